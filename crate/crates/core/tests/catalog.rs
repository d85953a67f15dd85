use std::collections::{BTreeMap, HashSet};

use darboux_core::catalog::{
    classify, enumerate_192, instantiate, proportionality_deviation, seeded_ids, transformed_convergence,
    transformed_params, transformed_termination, verify_ids, SolutionGroup, SolutionId,
};
use darboux_core::elliptic::{Elliptic, C64};
use darboux_core::series::{dl_eval, LVariant, Radius, SeriesSolution};
use darboux_core::symmetry::{GIIElement, ParamTuple};

const V: LVariant = LVariant::Corrected;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn id(s: &str) -> SolutionId {
    s.parse().unwrap()
}

fn generic(k: f64) -> ParamTuple {
    ParamTuple::new([c(0.23, 0.05), c(0.71, 0.0), c(-0.37, 0.11), c(1.13, 0.0)], c(0.77, -0.2), c(k, 0.0))
}

#[test]
fn exactly_192_distinct_ids_in_canonical_order() {
    let ids = enumerate_192();
    assert_eq!(ids.len(), 192);
    assert_eq!(ids.iter().collect::<HashSet<_>>().len(), 192);
    for (n, x) in GIIElement::all().iter().enumerate() {
        assert_eq!(ids[8 * n].gii, *x);
        assert_eq!(ids[8 * n].signs, [false; 3]);
    }
    for s in ["I0+++", "I1+++", "I2+++", "I3+++"] {
        assert!(ids.contains(&id(s)));
    }
}

#[test]
fn no_sign_on_the_last_parameter() {
    for x in enumerate_192() {
        assert!(!x.sign_vector().0[3]);
    }
}

#[test]
fn id_text_round_trip() {
    assert_eq!(id("A1+-+").to_string(), "A1+-+");
    assert!("A4+++".parse::<SolutionId>().is_err());
    assert!("A1+-".parse::<SolutionId>().is_err());
    assert!("A1+-*".parse::<SolutionId>().is_err());
}

#[test]
fn eight_groups_of_twenty_four() {
    let mut groups: BTreeMap<SolutionGroup, usize> = BTreeMap::new();
    for x in enumerate_192() {
        *groups.entry(classify(&x)).or_default() += 1;
    }
    assert_eq!(groups.len(), 8);
    assert!(groups.values().all(|&n| n == 24));
}

#[test]
fn classification_examples() {
    assert_eq!(classify(&id("I0+++")), SolutionGroup { point: 0, minus: false });
    assert_eq!(classify(&id("I0-++")), SolutionGroup { point: 0, minus: true });
    for x in enumerate_192().iter().filter(|x| x.gii.shift == 3) {
        assert_eq!(classify(x).point, 3);
    }
}

/// The group is read off the first exponent of the transformed series and
/// the point the change of variable sends to zero.
#[test]
fn classification_matches_the_expansion() {
    let p = generic(0.6);
    let ell = Elliptic::new(p.k).unwrap();
    for x in enumerate_192() {
        let inst = instantiate(&x, &p, 20, 40, V).unwrap();
        let centre = inst.sub.invert(c(0.0, 0.0));
        let point = (0..4).min_by(|&a, &b| ell.distance_to_point(centre, a).total_cmp(&ell.distance_to_point(centre, b))).unwrap();
        assert!(ell.distance_to_point(centre, point) < 1e-12);
        assert_eq!(classify(&x).point, point, "{x}");
        let first = inst.params.xi;
        let original = [p.xi, p.eta, p.mu, p.nu][point];
        let minus = (first - original).norm() > 1e-12;
        assert!(!minus || (first + original + 1.0).norm() < 1e-12);
        assert_eq!(classify(&x).minus, minus, "{x}");
    }
}

#[test]
fn identity_id_is_the_plain_series() {
    let p = ParamTuple::real([0.0, 0.0, 0.0, 3.0], 4.0 * 1.36, 0.6);
    let inst = instantiate(&id("I0+++"), &p, 10, 20, V).unwrap();
    assert_eq!(inst.params, p);
    for u in [c(0.2, 0.1), c(0.5, -0.2)] {
        assert_eq!(inst.eval(u).unwrap(), dl_eval(&p, u, 10, V).unwrap().value);
    }
}

#[test]
fn c0_id_swaps_and_rescales() {
    let p = generic(0.6);
    let inst = instantiate(&id("C0+++"), &p, 40, 80, V).unwrap();
    let k = p.k;
    assert_eq!([inst.params.xi, inst.params.eta, inst.params.mu, inst.params.nu], [p.xi, p.mu, p.eta, p.nu]);
    assert!((inst.params.h - p.h / (k * k)).norm() < 1e-14);
    assert!((inst.params.k - 1.0 / k).norm() < 1e-15);
    // built independently from the swapped tuple at w = k u, modulus 1/k
    let q = ParamTuple::new([p.xi, p.mu, p.eta, p.nu], p.h / (k * k), 1.0 / k);
    let direct = SeriesSolution::new(&q, 40, 80, V).unwrap();
    let ell = Elliptic::new(1.0 / k).unwrap();
    for u in [c(0.1, 0.05), c(0.15, -0.1)] {
        let want = direct.eval(&ell, k * u).unwrap().value;
        assert!((inst.eval(u).unwrap() - want).norm() < 1e-14 * want.norm());
    }
}

#[test]
fn seeded_ids_cover_every_element() {
    let ids = seeded_ids(2024);
    assert_eq!(ids.len(), 24);
    let elems: HashSet<_> = ids.iter().map(|x| x.gii).collect();
    assert_eq!(elems.len(), 24);
    assert_eq!(ids, seeded_ids(2024));
    assert_ne!(ids, seeded_ids(7));
}

#[test]
fn seeded_catalog_solves_the_original_equation() {
    let k = 0.6;
    let p = ParamTuple::real([0.0, 0.0, 0.0, 3.0], 4.0 * (1.0 + k * k), k);
    for check in verify_ids(&seeded_ids(2024), &p, 60, 120, V).unwrap() {
        assert!(check.report.passes(1e-6).unwrap(), "{}: {:e}", check.id, check.report.max_relative_residual);
        assert_eq!(check.group, classify(&check.id));
    }
}

#[test]
fn group_members_are_proportional() {
    let k = 0.6;
    let p = ParamTuple::real([0.0, 0.0, 0.0, 3.0], 4.0 * (1.0 + k * k), k);
    for (a, b) in [("I0+++", "C0++-"), ("B2-+-", "E2---"), ("A1+-+", "D1++-")] {
        let dev = proportionality_deviation(&id(a), &id(b), &p, 60, 120, V).unwrap();
        assert!(dev <= 1e-8, "{a} vs {b}: {dev:e}");
    }
    assert!(proportionality_deviation(&id("I0+++"), &id("I1+++"), &p, 60, 120, V).is_err());
}

#[test]
fn transformed_termination_examples() {
    let p = ParamTuple::real([0.0, 0.0, 0.0, 3.0], 1.0, 0.6);
    assert_eq!(transformed_termination(&id("I0+++"), &p).unwrap(), Some(0));
    let swapped = ParamTuple::real([3.0, 0.0, 0.0, 0.0], 1.0, 0.6);
    assert_eq!(transformed_termination(&id("I0+++"), &swapped).unwrap(), None);
    let x = enumerate_192()
        .into_iter()
        .find(|x| x.signs == [false; 3] && transformed_params(x, &swapped).unwrap().nu == c(3.0, 0.0))
        .unwrap();
    assert_eq!(transformed_params(&x, &swapped).unwrap().xi, c(0.0, 0.0));
    assert_eq!(transformed_termination(&x, &swapped).unwrap(), Some(0));
    let irrational = ParamTuple::real([2f64.sqrt(), 3f64.sqrt(), 5f64.sqrt(), 7f64.sqrt()], 1.0, 0.6);
    assert!(enumerate_192().iter().all(|x| transformed_termination(x, &irrational).unwrap().is_none()));
}

#[test]
fn transformed_convergence_examples() {
    let k = 0.6;
    let p = ParamTuple::real([0.0, 0.0, 0.0, 1.0], 1.234, k);
    assert_eq!(transformed_convergence(&id("I0+++"), &p, 400, V).unwrap(), Radius::Finite { value: 1.0 });
    // kappa = 1/k, so the generic radius is min(1, k)
    let Radius::Finite { value } = transformed_convergence(&id("C0+++"), &p, 400, V).unwrap() else { panic!() };
    assert!((value - k).abs() < 1e-15);
    let roots = darboux_core::series::darboux_function_eigenvalues(
        &p,
        darboux_core::series::SearchRegion::Real { lo: 0.0, hi: 10.0 },
        400,
        V,
    )
    .unwrap();
    let hat = p.with_h(roots[0].h);
    let Radius::Finite { value } = transformed_convergence(&id("I0+++"), &hat, 400, V).unwrap() else { panic!() };
    assert!((value - 1.0 / k).abs() < 1e-14);
}
