//! Lamé and associated-Lamé specializations, and the Landen and
//! duplication identities between Darboux series.

use serde::{Deserialize, Serialize};

use crate::elliptic::{Elliptic, JacobiTriple, C64};
use crate::error::{Error, Result};
use crate::series::{LVariant, SeriesSolution};
use crate::symmetry::{gii_compose, GIIElement, ParamTuple};

/// `y'' + [h - nu(nu+1) k^2 sn^2] y = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LameParams {
    pub nu: C64,
    pub h: C64,
    pub k: C64,
}

impl LameParams {
    pub fn to_params(&self) -> ParamTuple {
        let z = C64::new(0.0, 0.0);
        ParamTuple::new([z, z, z, self.nu], self.h, self.k)
    }
}

/// Elements whose permutation fixes the point `iK'`.
pub fn lame_subgroup() -> Vec<GIIElement> {
    GIIElement::all().iter().copied().filter(|x| x.perm()[3] == 3).collect()
}

/// Elements that permute the points `0` and `K` among themselves.
pub fn assoc_lame_subgroup() -> Vec<GIIElement> {
    GIIElement::all()
        .iter()
        .copied()
        .filter(|x| {
            let p = x.perm();
            p[0] < 2 && p[1] < 2
        })
        .collect()
}

/// True when `set` is closed under composition.
pub fn is_closed(set: &[GIIElement]) -> bool {
    set.iter().all(|&a| set.iter().all(|&b| set.contains(&gii_compose(a, b))))
}

/// Sign-twisted twins and the duplication law, each as `(lhs, rhs)`.
pub mod potential {
    use super::*;

    fn triple(u: C64, k: C64) -> Result<JacobiTriple> {
        Elliptic::new(k)?.triple(u)
    }

    /// Descending Landen modulus `(1 - k')/(1 + k')` and the factor `1 + k'`.
    pub fn landen_modulus(k: C64) -> (C64, C64) {
        let kp = (C64::new(1.0, 0.0) - k * k).sqrt();
        ((1.0 - kp) / (1.0 + kp), 1.0 + kp)
    }

    /// `(1+k')^2 l^2 sn^2(w, l) + k^2` against `k^2 sn^2 + k^2 cd^2`.
    pub fn landen_sn(u: C64, k: C64) -> Result<(C64, C64)> {
        let (l, f) = landen_modulus(k);
        let t = triple(u, k)?;
        let s = triple(f * u, l)?;
        let k2 = k * k;
        let cd = t.cn / t.dn;
        Ok((f * f * l * l * s.sn * s.sn + k2, k2 * t.sn * t.sn + k2 * cd * cd))
    }

    /// `(1+k')^2 ns^2(w, l) + k^2` against `ns^2 + dc^2`.
    pub fn landen_ns(u: C64, k: C64) -> Result<(C64, C64)> {
        let (l, f) = landen_modulus(k);
        let t = triple(u, k)?;
        let s = triple(f * u, l)?;
        let dc = t.dn / t.cn;
        Ok((f * f / (s.sn * s.sn) + k * k, 1.0 / (t.sn * t.sn) + dc * dc))
    }

    /// `ns^2 + dc^2 + k^2 cd^2 + k^2 sn^2` against `4 ns^2(2u)`.
    pub fn duplication(u: C64, k: C64) -> Result<(C64, C64)> {
        let t = triple(u, k)?;
        let d = triple(2.0 * u, k)?;
        let k2 = k * k;
        let (cd, dc) = (t.cn / t.dn, t.dn / t.cn);
        let lhs = 1.0 / (t.sn * t.sn) + dc * dc + k2 * cd * cd + k2 * t.sn * t.sn;
        Ok((lhs, 4.0 / (d.sn * d.sn)))
    }
}

/// Accessory parameter of the Landen image equation.
pub fn landen_h(xi: C64, nu: C64, h: C64, k: C64) -> C64 {
    let (_, f) = potential::landen_modulus(k);
    (h - k * k * xi * (xi + 1.0) - k * k * nu * (nu + 1.0)) / (f * f)
}

fn series_at(p: &ParamTuple, u: C64, n: usize, variant: LVariant) -> Result<C64> {
    let sol = SeriesSolution::new(p, n, 2 * n, variant)?;
    Ok(sol.eval(&Elliptic::new(p.k)?, u)?.value)
}

/// `Dl(xi,0,0,nu; h*; (1+k')u, l)` against `(1+k')^(xi+1) Dl(xi,xi,nu,nu; h; u, k)`.
pub fn landen_pair(xi: C64, nu: C64, h: C64, k: C64, u: C64, n: usize, variant: LVariant) -> Result<(C64, C64)> {
    let (l, f) = potential::landen_modulus(k);
    let z = C64::new(0.0, 0.0);
    let left = ParamTuple::new([xi, z, z, nu], landen_h(xi, nu, h, k), l);
    let right = ParamTuple::new([xi, xi, nu, nu], h, k);
    let lhs = series_at(&left, f * u, n, variant)?;
    let rhs = f.powc(xi + 1.0) * series_at(&right, u, n, variant)?;
    Ok((lhs, rhs))
}

/// `Dl(xi,0,0,0; h/4; 2u, k)` against `2^(xi+1) Dl(xi,xi,xi,xi; h; u, k)`.
pub fn duplication_pair(xi: C64, h: C64, k: C64, u: C64, n: usize, variant: LVariant) -> Result<(C64, C64)> {
    let z = C64::new(0.0, 0.0);
    let left = ParamTuple::new([xi, z, z, z], h / 4.0, k);
    let right = ParamTuple::new([xi; 4], h, k);
    let lhs = series_at(&left, 2.0 * u, n, variant)?;
    let rhs = C64::new(2.0, 0.0).powc(xi + 1.0) * series_at(&right, u, n, variant)?;
    Ok((lhs, rhs))
}

/// Relative mismatch `|lhs - rhs| / max(|lhs|, |rhs|)`.
pub fn relative_gap((lhs, rhs): (C64, C64)) -> f64 {
    let scale = lhs.norm().max(rhs.norm());
    if scale == 0.0 {
        return 0.0;
    }
    (lhs - rhs).norm() / scale
}

/// Ten points near the origin with small argument, where the principal
/// powers of both sides share a branch.
pub fn identity_points() -> Vec<C64> {
    (0..10).map(|j| C64::new(0.12 + 0.025 * j as f64, 0.12 * ((j as f64) * 1.3).sin())).collect()
}

/// Mismatch of one identity over `points`, failing on the first error.
pub fn max_gap(points: &[C64], f: impl Fn(C64) -> Result<(C64, C64)>) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::InsufficientData { need: 1, got: 0 });
    }
    points.iter().map(|&u| f(u).map(relative_gap)).try_fold(0.0, |m, g| g.map(|g| f64::max(m, g)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subgroups_have_expected_members() {
        let names = |v: Vec<GIIElement>| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert_eq!(names(lame_subgroup()), ["I0", "A1", "B2", "C0", "D2", "E1"]);
        assert_eq!(names(assoc_lame_subgroup()), ["I0", "I1", "A0", "A1"]);
    }

    #[test]
    fn landen_modulus_at_small_k() {
        let (l, f) = potential::landen_modulus(C64::new(0.6, 0.0));
        assert!((l - 1.0 / 9.0).norm() < 1e-15);
        assert!((f - 1.8).norm() < 1e-15);
    }
}
