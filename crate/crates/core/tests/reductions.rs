use darboux_core::elliptic::{Elliptic, C64};
use darboux_core::reductions::{
    assoc_lame_subgroup, duplication_pair, identity_points, is_closed, lame_subgroup, landen_h, landen_pair, max_gap,
    potential, relative_gap, LameParams,
};
use darboux_core::series::{polynomial_eigenvalues, LVariant};
use darboux_core::symmetry::{gii_compose, sigma_and_h, GIIElement, ParamTuple};

const V: LVariant = LVariant::Corrected;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn names(v: &[GIIElement]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

#[test]
fn lame_subgroup_is_a_non_abelian_group_of_order_six() {
    let g = lame_subgroup();
    assert_eq!(names(&g), ["I0", "A1", "B2", "C0", "D2", "E1"]);
    assert!(is_closed(&g));
    assert!(g.iter().any(|&a| g.iter().any(|&b| gii_compose(a, b) != gii_compose(b, a))));
    for x in &g {
        assert_eq!(x.perm()[3], 3, "{x}");
    }
}

#[test]
fn assoc_lame_subgroup_is_a_klein_group() {
    let g = assoc_lame_subgroup();
    assert_eq!(names(&g), ["I0", "I1", "A0", "A1"]);
    assert!(is_closed(&g));
    for &x in &g {
        assert_eq!(gii_compose(x, x), GIIElement::IDENTITY);
    }
}

#[test]
fn a_non_subgroup_is_not_closed() {
    let all = GIIElement::all();
    let partial: Vec<GIIElement> = ["I0", "I1", "A0"].iter().map(|s| s.parse().unwrap()).collect();
    assert!(!is_closed(&partial));
    assert!(is_closed(all));
}

#[test]
fn lame_equation_keeps_its_shape() {
    let lame = LameParams { nu: c(1.7, 0.2), h: c(0.9, 0.0), k: c(0.6, 0.0) };
    let p = lame.to_params();
    let zero = c(0.0, 0.0);
    for x in lame_subgroup() {
        let q = sigma_and_h(x, &p).unwrap();
        assert_eq!([q.xi, q.eta, q.mu, q.nu], [zero, zero, zero, lame.nu], "{x}");
    }
    // elements outside the subgroup move nu off the sn^2 slot
    let outside = GIIElement::all().iter().filter(|x| !lame_subgroup().contains(x));
    for &x in outside {
        assert_eq!(sigma_and_h(x, &p).unwrap().nu, zero, "{x}");
    }
}

#[test]
fn associated_lame_keeps_only_cd_and_sn_terms() {
    let p = ParamTuple::new([c(0.0, 0.0), c(-1.0, 0.0), c(0.8, 0.1), c(1.3, 0.0)], c(0.4, 0.0), c(0.6, 0.0));
    for x in assoc_lame_subgroup() {
        let q = sigma_and_h(x, &p).unwrap();
        for g in [q.xi, q.eta] {
            assert_eq!(g * (g + 1.0), c(0.0, 0.0), "{x}");
        }
        // ns^2 and dc^2 are absent, so the potential stays small next to w = 0
        let ell = Elliptic::with_guard(q.k, 1e-6).unwrap();
        let v = q.potential(&ell.triple(c(1e-3, 1e-3)).unwrap());
        assert!(v.norm() < 10.0, "{x}: {v}");
    }
}

#[test]
fn landen_potential_at_a_real_point() {
    let k = c(0.6, 0.0);
    for (lhs, rhs) in [potential::landen_sn(c(0.4, 0.0), k).unwrap(), potential::landen_ns(c(0.4, 0.0), k).unwrap()] {
        assert!((lhs - rhs).norm() < 1e-13 * rhs.norm());
    }
}

#[test]
fn duplication_potential_at_a_complex_point() {
    let (lhs, rhs) = potential::duplication(c(0.37, 0.21), c(0.6, 0.0)).unwrap();
    assert!((lhs - rhs).norm() < 1e-13 * rhs.norm());
}

#[test]
fn potential_identities_hold_for_complex_modulus() {
    let pts = identity_points();
    let k = c(0.5, 0.2);
    assert!(max_gap(&pts, |u| potential::landen_sn(u, k)).unwrap() < 1e-12);
    assert!(max_gap(&pts, |u| potential::landen_ns(u, k)).unwrap() < 1e-12);
    assert!(max_gap(&pts, |u| potential::duplication(u, k)).unwrap() < 1e-12);
}

#[test]
fn landen_with_no_potential_is_linear() {
    // y'' = 0 on both sides: both series are the linear solution
    let k = c(0.6, 0.0);
    let (_, f) = potential::landen_modulus(k);
    let zero = c(0.0, 0.0);
    assert_eq!(landen_h(zero, zero, zero, k), zero);
    for u in identity_points() {
        let (lhs, rhs) = landen_pair(zero, zero, zero, k, u, 60, V).unwrap();
        assert!((lhs - f * u).norm() < 1e-13 * (f * u).norm());
        assert!((rhs - f * u).norm() < 1e-13 * (f * u).norm());
    }
}

#[test]
fn landen_with_terminating_right_side() {
    let k = c(0.6, 0.0);
    let zero = c(0.0, 0.0);
    let nu = c(-2.0, 0.0);
    let right = ParamTuple::new([zero, zero, nu, nu], zero, k);
    for h in polynomial_eigenvalues(&right, V).unwrap() {
        let gap = max_gap(&identity_points(), |u| landen_pair(zero, nu, h, k, u, 200, V)).unwrap();
        assert!(gap <= 1e-8, "h = {h}: {gap:e}");
    }
}

#[test]
fn landen_and_duplication_at_generic_parameters() {
    let pts = identity_points();
    for k in [c(0.3, 0.0), c(0.6, 0.0), c(0.5, 0.2)] {
        let (xi, nu, h) = (c(0.3, 0.1), c(0.7, 0.0), c(1.1, 0.2));
        assert!(max_gap(&pts, |u| landen_pair(xi, nu, h, k, u, 200, V)).unwrap() <= 1e-8);
        assert!(max_gap(&pts, |u| duplication_pair(xi, h, k, u, 200, V)).unwrap() <= 1e-8);
    }
}

#[test]
fn duplication_at_zero_exponent() {
    let k = c(0.6, 0.0);
    let zero = c(0.0, 0.0);
    let h = c(1.7, 0.0);
    assert!(max_gap(&identity_points(), |u| duplication_pair(zero, h, k, u, 200, V)).unwrap() <= 1e-8);
}

#[test]
fn the_printed_variant_breaks_the_identities() {
    let pts = identity_points();
    let (xi, nu, h, k) = (c(0.3, 0.1), c(0.7, 0.0), c(1.1, 0.2), c(0.6, 0.0));
    assert!(max_gap(&pts, |u| landen_pair(xi, nu, h, k, u, 200, LVariant::Paper)).unwrap() > 1e-4);
}

#[test]
fn gap_helpers() {
    assert_eq!(relative_gap((c(0.0, 0.0), c(0.0, 0.0))), 0.0);
    assert!((relative_gap((c(1.0, 0.0), c(2.0, 0.0))) - 0.5).abs() < 1e-15);
    assert!(max_gap(&[], |u| Ok((u, u))).is_err());
}
