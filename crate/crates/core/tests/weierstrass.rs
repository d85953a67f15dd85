use darboux_core::elliptic::{lambda_of_tau, C64};
use darboux_core::tables::Anh;
use darboux_core::weierstrass::{
    accessory_weierstrass, add_points, anh_on_e, darboux_potential_algebraic, evalues_from_modulus, evalues_from_tau,
    half_period_shift, weierstrass_potential, CurvePoint, EValues, WeierstrassP,
};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + b.norm())
}

/// `℘` summed directly over the lattice `2 omega1 Z + 2 omega3 Z` with the
/// Eisenstein ordering; slow, but shares nothing with the Jacobi route.
fn wp_lattice_sum(z: C64, omega1: C64, omega3: C64) -> C64 {
    let n = 60i32;
    let mut acc = 1.0 / (z * z);
    for a in -n..=n {
        for b in -n..=n {
            if a == 0 && b == 0 {
                continue;
            }
            let w = omega1 * (2 * a) as f64 + omega3 * (2 * b) as f64;
            acc += 1.0 / ((z - w) * (z - w)) - 1.0 / (w * w);
        }
    }
    acc
}

#[test]
fn square_lattice_evalues() {
    let k = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let ev = evalues_from_modulus(k, c(1.0, 0.0)).unwrap();
    assert!(close(ev.e1, c(0.5, 0.0), 1e-15));
    assert!(ev.e2.norm() < 1e-15);
    assert!(close(ev.e3, c(-0.5, 0.0), 1e-15));
}

#[test]
fn evalues_sum_to_zero_and_reproduce_modulus() {
    for (k, s) in [(c(0.6, 0.0), c(1.0, 0.0)), (c(0.3, 0.4), c(-2.0, 1.5)), (c(1.4, -0.2), c(0.3, 0.0))] {
        let ev = evalues_from_modulus(k, s).unwrap();
        assert!((ev.e1 + ev.e2 + ev.e3).norm() < 1e-15 * (1.0 + s.norm()));
        assert!(close(ev.modulus_squared(), k * k, 1e-14));
    }
    let ev = evalues_from_modulus(c(0.6, 0.0), c(1.0, 0.0)).unwrap();
    assert!(close(ev.modulus_squared(), c(0.36, 0.0), 1e-15));
}

#[test]
fn wp_takes_evalues_at_half_periods() {
    let k = c(0.6, 0.0);
    let wp = WeierstrassP::new(evalues_from_modulus(k, c(1.0, 0.0)).unwrap(), k).unwrap();
    let hp = wp.half_periods();
    for j in 1..=3 {
        assert!(close(wp.wp(hp.get(j)).unwrap(), wp.ev.get(j), 1e-13), "omega{j}");
    }
}

#[test]
fn wp_matches_lattice_sum() {
    let k = c(0.6, 0.0);
    let wp = WeierstrassP::new(evalues_from_modulus(k, c(1.0, 0.0)).unwrap(), k).unwrap();
    let hp = wp.half_periods();
    for z in [c(0.31, 0.12), c(-0.2, 0.45)] {
        let direct = wp_lattice_sum(z, hp.omega1, hp.omega3);
        assert!(close(wp.wp(z).unwrap(), direct, 1e-3), "{z}");
    }
}

#[test]
fn wp_is_even() {
    let wp = WeierstrassP::for_tau(c(0.31, 1.13)).unwrap();
    for z in [c(0.13, 0.07), c(-0.21, 0.17), c(0.3, -0.1)] {
        assert!(close(wp.wp(-z).unwrap(), wp.wp(z).unwrap(), 1e-13));
    }
}

#[test]
fn wp_has_double_pole_with_unit_residue() {
    let wp = WeierstrassP::with_guard(evalues_from_modulus(c(0.6, 0.0), c(1.0, 0.0)).unwrap(), c(0.6, 0.0), 1e-9).unwrap();
    let dir = c(0.6, 0.8);
    let errs: Vec<f64> = [1e-1, 1e-2, 1e-3].iter().map(|&r| (dir * r * dir * r * wp.wp(dir * r).unwrap() - 1.0).norm()).collect();
    assert!(errs[2] < 1e-5);
    assert!(errs[0] > errs[1] && errs[1] > errs[2]);
}

#[test]
fn wp_satisfies_its_differential_equation() {
    let wp = WeierstrassP::for_tau(c(-0.4, 0.9)).unwrap();
    for z in [c(0.13, 0.07), c(-0.21, 0.17)] {
        let p = wp.point(z, c(-0.4, 0.9)).unwrap();
        assert!(p.curve_residual().unwrap() < 1e-12);
    }
}

#[test]
fn tau_evalues_match_lambda() {
    for tau in [c(0.31, 1.13), c(0.0, 2.1)] {
        let (ev, k) = evalues_from_tau(tau).unwrap();
        let lambda = lambda_of_tau(tau).unwrap();
        assert!(close(k * k, 1.0 - lambda, 1e-13));
        assert!(close(ev.modulus_squared(), 1.0 - lambda, 1e-13));
    }
}

fn sample_point(tau: C64) -> (CurvePoint, EValues, WeierstrassP) {
    let wp = WeierstrassP::for_tau(tau).unwrap();
    let p = wp.point(c(0.17, 0.11), tau).unwrap();
    (p, wp.ev, wp)
}

#[test]
fn identity_map_fixes_points() {
    let tau = c(0.31, 1.13);
    let (p, _, _) = sample_point(tau);
    assert_eq!(anh_on_e(Anh::I, p).unwrap(), p);
}

#[test]
fn c_map_keeps_coordinates_and_reflects_tau() {
    let tau = c(0.31, 1.13);
    let (p, _, _) = sample_point(tau);
    let img = anh_on_e(Anh::C, p).unwrap();
    let (CurvePoint::Finite { x, y, .. }, CurvePoint::Finite { x: x2, y: y2, tau: t2 }) = (p, img) else { panic!() };
    assert_eq!((x, y), (x2, y2));
    // 1 - tau lies below the axis; its negative spans the same lattice
    assert!(close(t2, -(1.0 - tau), 1e-15));
    assert!(img.curve_residual().unwrap() < 1e-12);
}

#[test]
fn b_map_scales_by_weight() {
    let tau = c(0.31, 1.13);
    let (p, _, _) = sample_point(tau);
    let img = anh_on_e(Anh::B, p).unwrap();
    let (CurvePoint::Finite { x, y, .. }, CurvePoint::Finite { x: x2, y: y2, tau: t2 }) = (p, img) else { panic!() };
    assert!(close(x2, tau * tau * x, 1e-15));
    assert!(close(y2, tau * tau * tau * y, 1e-15));
    assert!(close(t2, -1.0 / tau, 1e-15));
    assert!(img.curve_residual().unwrap() < 1e-11);
}

#[test]
fn every_map_lands_on_its_curve() {
    let tau = c(-0.4, 0.9);
    let (p, _, _) = sample_point(tau);
    for x in Anh::ALL {
        let img = anh_on_e(x, p).unwrap();
        assert!(img.tau().im > 0.0);
        assert!(img.curve_residual().unwrap() < 1e-11, "{x:?}");
    }
}

#[test]
fn zero_shift_is_identity_and_shifts_are_involutions() {
    let tau = c(0.31, 1.13);
    let (p, ev, _) = sample_point(tau);
    assert_eq!(half_period_shift(0, p, &ev).unwrap(), p);
    for j in 1..=3 {
        let twice = half_period_shift(j, half_period_shift(j, p, &ev).unwrap(), &ev).unwrap();
        let (CurvePoint::Finite { x, y, .. }, CurvePoint::Finite { x: x2, y: y2, .. }) = (p, twice) else { panic!() };
        assert!(close(x2, x, 1e-11) && close(y2, y, 1e-10), "j = {j}");
    }
}

#[test]
fn shift_matches_translated_wp() {
    let tau = c(0.0, 1.0);
    let (p, ev, wp) = sample_point(tau);
    let hp = wp.half_periods();
    let z = c(0.17, 0.11);
    for j in 1..=3 {
        let CurvePoint::Finite { x, y, .. } = half_period_shift(j, p, &ev).unwrap() else { panic!() };
        assert!(close(x, wp.wp(z + hp.get(j)).unwrap(), 1e-11), "x, j = {j}");
        assert!(close(y, wp.wp_prime(z + hp.get(j)).unwrap(), 1e-10), "y, j = {j}");
    }
}

#[test]
fn doubling_a_two_torsion_point_gives_infinity() {
    let (ev, _) = evalues_from_tau(c(0.0, 1.0)).unwrap();
    let t = CurvePoint::Finite { x: ev.e1, y: c(0.0, 0.0), tau: c(0.0, 1.0) };
    assert!(matches!(add_points(t, t, &ev), CurvePoint::Infinity { .. }));
}

#[test]
fn algebraic_potential_trivial_cases() {
    let ev = evalues_from_modulus(c(0.6, 0.0), c(1.0, 0.0)).unwrap();
    let zero = c(0.0, 0.0);
    for x in [c(2.0, 0.5), c(-0.3, 1.1)] {
        assert!(darboux_potential_algebraic(x, &ev, [zero; 4]).unwrap().norm() < 1e-15);
        let v = darboux_potential_algebraic(x, &ev, [c(1.0, 0.0), zero, zero, zero]).unwrap();
        assert!(close(v, 2.0 * x, 1e-15));
    }
}

#[test]
fn algebraic_potential_is_shifted_wp_sum() {
    let gammas = [c(0.3, 0.1), c(0.7, 0.0), c(-0.4, 0.2), c(1.2, 0.0)];
    for tau in [c(0.31, 1.13), c(-0.4, 0.9)] {
        let wp = WeierstrassP::for_tau(tau).unwrap();
        // each rational term differs from its shifted ℘ by 2 e_j
        let constant: C64 = (1..=3).map(|j| gammas[j] * (gammas[j] + 1.0) * wp.ev.get(j) * 2.0).sum();
        for z in [c(0.13, 0.07), c(-0.21, 0.17)] {
            let alg = darboux_potential_algebraic(wp.wp(z).unwrap(), &wp.ev, gammas).unwrap();
            let sum = weierstrass_potential(&wp, z, gammas).unwrap();
            assert!(close(alg, sum + constant, 1e-11));
        }
    }
}

#[test]
fn accessory_maps_follow_the_weight() {
    let h = c(0.9, -0.3);
    let tau = c(0.31, 1.13);
    assert!(close(accessory_weierstrass(Anh::I, h, tau), h, 1e-15));
    assert!(close(accessory_weierstrass(Anh::A, h, tau), (tau - 1.0) * (tau - 1.0) * h, 1e-14));
    assert!(close(accessory_weierstrass(Anh::B, h, tau), tau * tau * h, 1e-14));
}

#[test]
fn curve_maps_respect_weight_two() {
    // f^2 ℘(z; tau) = ℘(z/f; M tau) with f = c tau + d
    let tau = c(0.31, 1.13);
    let wp = WeierstrassP::for_tau(tau).unwrap();
    for x in Anh::ALL {
        let m = darboux_core::weierstrass::curve_map_matrix(x);
        let f = tau * m[1][0] as f64 + m[1][1] as f64;
        let image = darboux_core::weierstrass::mobius(m, tau);
        let wp2 = WeierstrassP::for_tau(image).unwrap();
        let z = c(0.13, 0.07);
        assert!(close(f * f * wp.wp(z).unwrap(), wp2.wp(z / f).unwrap(), 1e-11), "{x:?}");
    }
}
