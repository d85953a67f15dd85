//! Weierstrass picture: e-values, `℘` through the Jacobi conversion, the
//! anharmonic maps on the curve family and half-period shifts as point
//! addition.
//!
//! `℘(z; tau)` without further qualification refers to the lattice
//! `Z + tau Z`, with `omega1 = tau/2`, `omega3 = 1/2`, `omega2 = omega1 + omega3`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::elliptic::{theta_tau, Elliptic, JacobiCode, C64, DEFAULT_POLE_GUARD};
use crate::error::{Error, Result};
use crate::tables::{self, Anh};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EValues {
    pub e1: C64,
    pub e2: C64,
    pub e3: C64,
}

impl EValues {
    /// `e_j` for `j` in 1..=3.
    pub fn get(&self, j: usize) -> C64 {
        match j {
            1 => self.e1,
            2 => self.e2,
            3 => self.e3,
            _ => panic!("e-value index {j} outside 1..=3"),
        }
    }

    pub fn as_array(&self) -> [C64; 3] {
        [self.e1, self.e2, self.e3]
    }

    pub fn g2(&self) -> C64 {
        -(self.e1 * self.e2 + self.e2 * self.e3 + self.e3 * self.e1) * 4.0
    }

    pub fn g3(&self) -> C64 {
        self.e1 * self.e2 * self.e3 * 4.0
    }

    /// `(e2 - e3) / (e1 - e3)`, the square of the Jacobi modulus.
    pub fn modulus_squared(&self) -> C64 {
        (self.e2 - self.e3) / (self.e1 - self.e3)
    }

    pub fn scaled(&self, f: C64) -> EValues {
        EValues { e1: self.e1 * f, e2: self.e2 * f, e3: self.e3 * f }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPeriods {
    pub omega1: C64,
    pub omega3: C64,
    pub omega2: C64,
}

impl HalfPeriods {
    pub fn new(omega1: C64, omega3: C64) -> Result<Self> {
        if !((omega3 / omega1).im > 0.0) {
            return Err(Error::Domain(format!("half periods {omega1}, {omega3} are not positively oriented")));
        }
        Ok(HalfPeriods { omega1, omega3, omega2: omega1 + omega3 })
    }

    /// `omega_j` for `j` in 0..=3 (`omega_0 = 0`).
    pub fn get(&self, j: usize) -> C64 {
        match j {
            0 => C64::new(0.0, 0.0),
            1 => self.omega1,
            2 => self.omega2,
            3 => self.omega3,
            _ => panic!("half-period index {j} outside 0..=3"),
        }
    }
}

fn check_distinct(ev: &EValues) -> Result<()> {
    let [a, b, c] = ev.as_array();
    let scale = a.norm().max(b.norm()).max(c.norm());
    let gap = (a - b).norm().min((b - c).norm()).min((a - c).norm());
    if !(gap > 1e-14 * scale) || !scale.is_finite() {
        return Err(Error::DegenerateModulus(format!("coincident e-values {a}, {b}, {c}")));
    }
    Ok(())
}

/// e-values with `e1 - e3 = scale` and `(e2 - e3)/(e1 - e3) = k^2`.
pub fn evalues_from_modulus(k: C64, scale: C64) -> Result<EValues> {
    let m = k * k;
    if !m.re.is_finite() || !m.im.is_finite() || m.norm() < 1e-300 || (m - 1.0).norm() < 1e-15 {
        return Err(Error::DegenerateModulus(format!("{m}")));
    }
    if scale.norm() == 0.0 || !scale.re.is_finite() || !scale.im.is_finite() {
        return Err(Error::Domain(format!("scale {scale} must be finite and nonzero")));
    }
    let e3 = -(m + 1.0) * scale / 3.0;
    let e1 = e3 + scale;
    let e2 = -(e1 + e3);
    let ev = EValues { e1, e2, e3 };
    check_distinct(&ev)?;
    Ok(ev)
}

/// e-values of the lattice `Z + tau Z` in the normalization
/// `omega1 = tau/2`, `omega3 = 1/2`, together with the matching Jacobi
/// modulus `k = theta_4^2/theta_3^2`, so that `k^2 = 1 - lambda(tau)`.
/// `tau` and `-tau` describe the same lattice, so either half-plane is
/// accepted.
pub fn evalues_from_tau(tau: C64) -> Result<(EValues, C64)> {
    let tau = upper(tau)?;
    let zero = C64::new(0.0, 0.0);
    let t3 = theta_tau(3, zero, tau);
    let t4 = theta_tau(4, zero, tau);
    let k = (t4 / t3).powi(2);
    let ev = evalues_from_modulus(k, -(t3.powi(4)) * (PI * PI))?;
    Ok((ev, k))
}

fn upper(tau: C64) -> Result<C64> {
    if !tau.re.is_finite() || !tau.im.is_finite() || tau.im.abs() < 1e-12 {
        return Err(Error::ParabolicImage(format!("{tau}")));
    }
    Ok(if tau.im < 0.0 { -tau } else { tau })
}

/// `℘` for given e-values, evaluated as `e3 + (e1-e3) ns^2((e1-e3)^(1/2) z, k)`.
#[derive(Debug, Clone)]
pub struct WeierstrassP {
    pub ev: EValues,
    ell: Elliptic,
    root: C64,
}

impl WeierstrassP {
    pub fn new(ev: EValues, k: C64) -> Result<Self> {
        Self::with_guard(ev, k, DEFAULT_POLE_GUARD)
    }

    pub fn with_guard(ev: EValues, k: C64, guard: f64) -> Result<Self> {
        check_distinct(&ev)?;
        let m = ev.modulus_squared();
        if (m - k * k).norm() > 1e-10 * (1.0 + m.norm()) {
            return Err(Error::Domain(format!("k^2 = {} does not match e-value ratio {m}", k * k)));
        }
        let root = (ev.e1 - ev.e3).sqrt();
        Ok(WeierstrassP { ev, ell: Elliptic::with_guard(k, guard)?, root })
    }

    /// `℘(z; tau)` on the lattice `Z + tau Z`.
    pub fn for_tau(tau: C64) -> Result<Self> {
        let (ev, k) = evalues_from_tau(tau)?;
        Self::new(ev, k)
    }

    pub fn half_periods(&self) -> HalfPeriods {
        let md = &self.ell.md;
        let omega1 = md.big_k / self.root;
        let omega3 = crate::elliptic::I * md.big_kp / self.root;
        HalfPeriods { omega1, omega3, omega2: omega1 + omega3 }
    }

    pub fn wp(&self, z: C64) -> Result<C64> {
        let ns = self.ell.glyph(JacobiCode::Ns, self.root * z)?;
        Ok(self.ev.e3 + (self.ev.e1 - self.ev.e3) * ns * ns)
    }

    /// `℘'(z)`, from `ns' = -cs ds`.
    pub fn wp_prime(&self, z: C64) -> Result<C64> {
        let u = self.root * z;
        let t = self.ell.triple(u)?;
        let ns = t.glyph(JacobiCode::Ns);
        let cs = t.glyph(JacobiCode::Cs);
        let ds = t.glyph(JacobiCode::Ds);
        if !(ns.norm().is_finite()) || self.ell.distance_to_point(u, 0) < self.ell.guard {
            return Err(Error::PoleProximity { guard: self.ell.guard });
        }
        Ok((self.ev.e1 - self.ev.e3) * self.root * ns * cs * ds * -2.0)
    }

    /// The point `(℘(z), ℘'(z))` on the curve of `tau`.
    pub fn point(&self, z: C64, tau: C64) -> Result<CurvePoint> {
        Ok(CurvePoint::Finite { x: self.wp(z)?, y: self.wp_prime(z)?, tau })
    }
}

pub fn wp(z: C64, ev: EValues, k: C64) -> Result<C64> {
    WeierstrassP::new(ev, k)?.wp(z)
}

/// A point of `y^2 = 4x^3 - g2(tau) x - g3(tau)`, or the identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CurvePoint {
    Infinity { tau: C64 },
    Finite { x: C64, y: C64, tau: C64 },
}

impl CurvePoint {
    pub fn tau(&self) -> C64 {
        match *self {
            CurvePoint::Infinity { tau } | CurvePoint::Finite { tau, .. } => tau,
        }
    }

    /// Relative defect of the curve equation; zero at infinity.
    pub fn curve_residual(&self) -> Result<f64> {
        match *self {
            CurvePoint::Infinity { .. } => Ok(0.0),
            CurvePoint::Finite { x, y, tau } => {
                let (ev, _) = evalues_from_tau(tau)?;
                Ok(curve_defect(x, y, &ev))
            }
        }
    }
}

fn curve_defect(x: C64, y: C64, ev: &EValues) -> f64 {
    let rhs = x * x * x * 4.0 - ev.g2() * x - ev.g3();
    (y * y - rhs).norm() / (1.0 + (y * y).norm() + rhs.norm())
}

/// Chord-tangent addition on the cubic with `g2` taken from `ev`.
pub fn add_points(p: CurvePoint, q: CurvePoint, ev: &EValues) -> CurvePoint {
    let tau = p.tau();
    let (x1, y1, x2, y2) = match (p, q) {
        (CurvePoint::Infinity { .. }, other) | (other, CurvePoint::Infinity { .. }) => {
            return match other {
                CurvePoint::Infinity { .. } => CurvePoint::Infinity { tau },
                CurvePoint::Finite { x, y, .. } => CurvePoint::Finite { x, y, tau },
            }
        }
        (CurvePoint::Finite { x: x1, y: y1, .. }, CurvePoint::Finite { x: x2, y: y2, .. }) => (x1, y1, x2, y2),
    };
    let scale = 1.0 + x1.norm() + x2.norm();
    let slope = if (x1 - x2).norm() > 1e-13 * scale {
        (y2 - y1) / (x2 - x1)
    } else if (y1 + y2).norm() <= 1e-12 * (1.0 + y1.norm()) {
        // vertical chord or tangent at a 2-torsion point
        return CurvePoint::Infinity { tau };
    } else {
        (x1 * x1 * 12.0 - ev.g2()) / (y1 * 2.0)
    };
    let x3 = slope * slope / 4.0 - x1 - x2;
    let y3 = -(y1 + slope * (x3 - x1));
    CurvePoint::Finite { x: x3, y: y3, tau }
}

/// `p + (e_j, 0)`; `j = 0` is the identity.
pub fn half_period_shift(j: usize, p: CurvePoint, ev: &EValues) -> Result<CurvePoint> {
    if j == 0 {
        return Ok(p);
    }
    if j > 3 {
        return Err(Error::Domain(format!("half-period index {j} outside 0..=3")));
    }
    let t = CurvePoint::Finite { x: ev.get(j), y: C64::new(0.0, 0.0), tau: p.tau() };
    Ok(add_points(p, t, ev))
}

/// Möbius action of an integer matrix.
pub fn mobius(m: [[i32; 2]; 2], tau: C64) -> C64 {
    let [[a, b], [c, d]] = m;
    (tau * a as f64 + b as f64) / (tau * c as f64 + d as f64)
}

/// The integer matrix behind each curve map: `tau -> (a tau + b)/(c tau + d)`
/// with `x` scaled by `(c tau + d)^2` and `y` by `(c tau + d)^3`.
pub fn curve_map_matrix(x: Anh) -> [[i32; 2]; 2] {
    match x {
        Anh::I => [[1, 0], [0, 1]],
        Anh::A => [[1, 0], [1, -1]],
        Anh::B => [[0, 1], [1, 0]],
        Anh::C => [[-1, 1], [0, 1]],
        Anh::D => [[1, -1], [1, 0]],
        Anh::E => [[0, 1], [-1, 1]],
    }
}

/// The map of `X` on the curve family. Three of the six maps have
/// determinant -1 and land in the lower half-plane; the image is reported
/// with `tau` replaced by `-tau`, which describes the same lattice.
pub fn anh_on_e(x: Anh, p: CurvePoint) -> Result<CurvePoint> {
    let tau = p.tau();
    if !tau.re.is_finite() || !(tau.im > 0.0) {
        return Err(Error::LowerHalfPlane(format!("{tau}")));
    }
    let m = curve_map_matrix(x);
    let f = tau * m[1][0] as f64 + m[1][1] as f64;
    let new_tau = upper(mobius(m, tau))?;
    Ok(match p {
        CurvePoint::Infinity { .. } => CurvePoint::Infinity { tau: new_tau },
        CurvePoint::Finite { x, y, .. } => CurvePoint::Finite { x: f * f * x, y: f * f * f * y, tau: new_tau },
    })
}

/// The potential of the algebraic Darboux operator at `x`, with parameter
/// `gammas = [xi, eta, mu, nu]` attached to `(x, e1, e2, e3)`.
pub fn darboux_potential_algebraic(x: C64, ev: &EValues, gammas: [C64; 4]) -> Result<C64> {
    let e = ev.as_array();
    let scale = 1.0 + e.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut v = gammas[0] * (gammas[0] + 1.0) * x;
    for i in 0..3 {
        let (a, b) = ((i + 1) % 3, (i + 2) % 3);
        let den = x - e[i];
        if den.norm() < 1e-12 * scale {
            return Err(Error::PoleProximity { guard: 1e-12 * scale });
        }
        let num = (x - e[a]) * (x - e[b]) - den * den;
        let g = gammas[i + 1];
        v += g * (g + 1.0) * num / den;
    }
    Ok(v)
}

/// `xi(xi+1) ℘(z) + eta(eta+1) ℘(z+ω1) + mu(mu+1) ℘(z+ω2) + nu(nu+1) ℘(z+ω3)`
/// with each parameter attached to the half-period whose value is its
/// e-value.
pub fn weierstrass_potential(wp: &WeierstrassP, z: C64, gammas: [C64; 4]) -> Result<C64> {
    let hp = wp.half_periods();
    let mut v = C64::new(0.0, 0.0);
    for (j, g) in gammas.iter().enumerate() {
        v += g * (g + 1.0) * wp.wp(z + hp.get(j))?;
    }
    Ok(v)
}

/// Weierstrass-form accessory parameter after `X`.
pub fn accessory_weierstrass(x: Anh, h: C64, tau: C64) -> C64 {
    tables::frozen().anh(x).h_weierstrass.eval(tau) * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::{c, real};

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn evalues_linear_solve() {
        let ev = evalues_from_modulus(real(0.5f64.sqrt()), real(1.0)).unwrap();
        assert!(close(ev.e1, real(0.5), 1e-15));
        assert!(close(ev.e2, real(0.0), 1e-15));
        assert!(close(ev.e3, real(-0.5), 1e-15));
        let ev = evalues_from_modulus(real(0.6), real(1.0)).unwrap();
        assert!(close(ev.modulus_squared(), real(0.36), 1e-15));
    }

    #[test]
    fn wp_hits_e_values() {
        let ev = evalues_from_modulus(c(0.6, 0.1), c(1.3, -0.4)).unwrap();
        let w = WeierstrassP::new(ev, c(0.6, 0.1)).unwrap();
        let hp = w.half_periods();
        for j in 1..=3 {
            assert!(close(w.wp(hp.get(j)).unwrap(), ev.get(j), 1e-10), "e{j}");
        }
    }

    #[test]
    fn shift_twice_is_identity() {
        let tau = c(0.2, 1.1);
        let w = WeierstrassP::for_tau(tau).unwrap();
        let p = w.point(c(0.13, 0.21), tau).unwrap();
        for j in 1..=3 {
            let q = half_period_shift(j, half_period_shift(j, p, &w.ev).unwrap(), &w.ev).unwrap();
            match (p, q) {
                (CurvePoint::Finite { x, y, .. }, CurvePoint::Finite { x: x2, y: y2, .. }) => {
                    assert!(close(x2, x, 1e-9) && close(y2, y, 1e-9));
                }
                _ => panic!("lost the point"),
            }
        }
    }
}
