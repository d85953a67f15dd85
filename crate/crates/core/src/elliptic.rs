//! Jacobi elliptic functions for complex argument and complex modulus.
//!
//! Quarter periods come from the arithmetic-geometric mean; the functions
//! themselves are theta quotients in the nome `q = exp(i pi tau)` with
//! `tau = i K'/K`. Only `k^2` enters sn, cn and dn, but the half-period
//! shifts tie the signs of `k`, `k'` and `K` together, so [`ModulusData`]
//! checks that the AGM quarter periods agree with the theta constants and
//! moves to an equivalent period pair when they do not.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

/// Default exclusion radius around poles, in u-units.
pub const DEFAULT_POLE_GUARD: f64 = 0.05;

const THETA_REL_TOL: f64 = 1e-17;
const THETA_MAX_TERMS: usize = 256;
const AGM_MAX_STEPS: usize = 64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// AGM with the "right" sign choice at every step, which keeps the iterates
/// on the principal sheet and always contracts.
pub fn agm(a: C64, b: C64) -> Result<C64> {
    let (mut a, mut b) = (a, b);
    for _ in 0..AGM_MAX_STEPS {
        let a1 = (a + b) * 0.5;
        let mut g = (a * b).sqrt();
        if (a1 - g).norm() > (a1 + g).norm() {
            g = -g;
        }
        if (a1 - g).norm() <= 4.0 * f64::EPSILON * a1.norm() {
            return Ok(a1);
        }
        a = a1;
        b = g;
    }
    Err(Error::NonConvergence(format!("AGM({a}, {b})")))
}

fn check_modulus(k: C64) -> Result<C64> {
    let m = k * k;
    if !finite(m) || m.norm() < 1e-300 || (C64::new(1.0, 0.0) - m).norm() < 1e-300 {
        return Err(Error::DegenerateModulus(format!("{m}")));
    }
    Ok(m)
}

/// Complete elliptic integrals `(K(k), K(k'))` with `k' = sqrt(1 - k^2)`
/// (principal root).
pub fn complete_elliptic(k: C64) -> Result<(C64, C64)> {
    let m = check_modulus(k)?;
    let kp = (C64::new(1.0, 0.0) - m).sqrt();
    let big_k = C64::new(PI / 2.0, 0.0) / agm(real(1.0), kp)?;
    let big_kp = C64::new(PI / 2.0, 0.0) / agm(real(1.0), k)?;
    Ok((big_k, big_kp))
}

/// Theta function `theta_index(z | tau)` summed in terms of `tau` so that
/// fractional nome powers carry no branch ambiguity.
pub fn theta_tau(index: u8, z: C64, tau: C64) -> C64 {
    let ipt = I * PI * tau;
    match index {
        1 | 2 => {
            let mut sum = C64::new(0.0, 0.0);
            for n in 0..THETA_MAX_TERMS {
                let half = n as f64 + 0.5;
                let w = (ipt * (half * half)).exp();
                let arg = z * (2 * n + 1) as f64;
                let term = if index == 1 {
                    let sgn = if n % 2 == 0 { 2.0 } else { -2.0 };
                    w * arg.sin() * sgn
                } else {
                    w * arg.cos() * 2.0
                };
                sum += term;
                if term.norm() < THETA_REL_TOL * sum.norm() || term.norm() == 0.0 {
                    break;
                }
            }
            sum
        }
        _ => {
            let mut sum = C64::new(1.0, 0.0);
            for n in 1..THETA_MAX_TERMS {
                let w = (ipt * (n * n) as f64).exp();
                let sgn = if index == 4 && n % 2 == 1 { -2.0 } else { 2.0 };
                let term = w * (z * (2 * n) as f64).cos() * sgn;
                sum += term;
                if term.norm() < THETA_REL_TOL * sum.norm() || term.norm() == 0.0 {
                    break;
                }
            }
            sum
        }
    }
}

/// Theta function with nome `q`; the quarter power of `q` is principal.
pub fn theta(index: u8, z: C64, q: C64) -> Result<C64> {
    if !(1..=4).contains(&index) {
        return Err(Error::Domain(format!("theta index {index} not in 1..=4")));
    }
    if !(q.norm() < 1.0) {
        return Err(Error::NomeOutOfDisc(q.norm()));
    }
    if q.norm() == 0.0 {
        return Ok(match index {
            1 | 2 => C64::new(0.0, 0.0),
            _ => C64::new(1.0, 0.0),
        });
    }
    let tau = q.ln() / (I * PI);
    Ok(theta_tau(index, z, tau))
}

/// The modular lambda function `theta_2^4 / theta_3^4`.
pub fn lambda_of_tau(tau: C64) -> Result<C64> {
    if !(tau.im > 0.0) {
        return Err(Error::LowerHalfPlane(format!("{tau}")));
    }
    let zero = C64::new(0.0, 0.0);
    let t2 = theta_tau(2, zero, tau);
    let t3 = theta_tau(3, zero, tau);
    Ok((t2 / t3).powi(4))
}

/// Everything that characterises one torus in Jacobi normalisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulusData {
    pub k: C64,
    pub kp: C64,
    pub big_k: C64,
    pub big_kp: C64,
    pub q: C64,
    pub tau: C64,
}

impl ModulusData {
    pub fn new(k: C64) -> Result<Self> {
        let m = check_modulus(k)?;
        let kp = (C64::new(1.0, 0.0) - m).sqrt();
        let (k0, kp0) = complete_elliptic(k)?;
        // The AGM pair is tried first; the other candidates are the same
        // period lattice with a different choice of generators.
        let mut best: Option<(f64, C64, C64)> = None;
        for (a, b) in candidate_shifts() {
            for s1 in [1.0, -1.0] {
                for s2 in [1.0, -1.0] {
                    let big_k = k0 * s1 + I * kp0 * (2.0 * a as f64);
                    let i_kp = I * kp0 * s2 + k0 * (2.0 * b as f64);
                    let tau = i_kp / big_k;
                    if !(tau.im > 1e-3) {
                        continue;
                    }
                    let err = theta_mismatch(k, kp, big_k, tau);
                    if err < 1e-9 {
                        return Ok(Self::assemble(k, kp, big_k, i_kp, tau));
                    }
                    if best.map_or(true, |(e, _, _)| err < e) {
                        best = Some((err, big_k, i_kp));
                    }
                }
            }
        }
        Err(Error::NonConvergence(format!(
            "no period pair consistent with theta constants for k = {k} (best mismatch {:.2e})",
            best.map_or(f64::INFINITY, |b| b.0)
        )))
    }

    fn assemble(k: C64, kp: C64, big_k: C64, i_kp: C64, tau: C64) -> Self {
        ModulusData {
            k,
            kp,
            big_k,
            big_kp: -I * i_kp,
            q: (I * PI * tau).exp(),
            tau,
        }
    }

    /// `k` and `k'` read off the theta constants; equal to the stored values
    /// for every constructed instance.
    pub fn theta_moduli(&self) -> (C64, C64) {
        let zero = C64::new(0.0, 0.0);
        let t2 = theta_tau(2, zero, self.tau);
        let t3 = theta_tau(3, zero, self.tau);
        let t4 = theta_tau(4, zero, self.tau);
        ((t2 / t3).powi(2), (t4 / t3).powi(2))
    }
}

fn candidate_shifts() -> Vec<(i32, i32)> {
    let mut v = Vec::new();
    for a in -2i32..=2 {
        for b in -2i32..=2 {
            v.push((a, b));
        }
    }
    v.sort_by_key(|&(a, b)| (a.abs() + b.abs(), a.abs(), b.abs()));
    v
}

fn theta_mismatch(k: C64, kp: C64, big_k: C64, tau: C64) -> f64 {
    let zero = C64::new(0.0, 0.0);
    let t2 = theta_tau(2, zero, tau);
    let t3 = theta_tau(3, zero, tau);
    let t4 = theta_tau(4, zero, tau);
    let rel = |a: C64, b: C64| (a - b).norm() / (1.0 + b.norm());
    let e1 = rel((t2 / t3).powi(2), k);
    let e2 = rel((t4 / t3).powi(2), kp);
    let e3 = rel(t3 * t3 * (PI / 2.0), big_k);
    e1.max(e2).max(e3)
}

/// `(q, tau)` for modulus `k`.
pub fn nome_and_tau(k: C64) -> Result<(C64, C64)> {
    let md = ModulusData::new(k)?;
    Ok((md.q, md.tau))
}

/// The twelve Jacobi glyphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JacobiCode {
    Sn,
    Cn,
    Dn,
    Ns,
    Nc,
    Nd,
    Sc,
    Cs,
    Sd,
    Ds,
    Cd,
    Dc,
}

impl JacobiCode {
    pub const ALL: [JacobiCode; 12] = [
        JacobiCode::Sn,
        JacobiCode::Cn,
        JacobiCode::Dn,
        JacobiCode::Ns,
        JacobiCode::Nc,
        JacobiCode::Nd,
        JacobiCode::Sc,
        JacobiCode::Cs,
        JacobiCode::Sd,
        JacobiCode::Ds,
        JacobiCode::Cd,
        JacobiCode::Dc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            JacobiCode::Sn => "sn",
            JacobiCode::Cn => "cn",
            JacobiCode::Dn => "dn",
            JacobiCode::Ns => "ns",
            JacobiCode::Nc => "nc",
            JacobiCode::Nd => "nd",
            JacobiCode::Sc => "sc",
            JacobiCode::Cs => "cs",
            JacobiCode::Sd => "sd",
            JacobiCode::Ds => "ds",
            JacobiCode::Cd => "cd",
            JacobiCode::Dc => "dc",
        }
    }

    /// Index of the order-two point (0, K, K+iK', iK') carrying this
    /// glyph's pole.
    pub fn pole_point(self) -> usize {
        match self {
            JacobiCode::Sn | JacobiCode::Cn | JacobiCode::Dn => 3,
            JacobiCode::Ns | JacobiCode::Cs | JacobiCode::Ds => 0,
            JacobiCode::Nc | JacobiCode::Sc | JacobiCode::Dc => 1,
            JacobiCode::Nd | JacobiCode::Sd | JacobiCode::Cd => 2,
        }
    }
}

impl fmt::Display for JacobiCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for JacobiCode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        JacobiCode::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown Jacobi glyph '{s}'")))
    }
}

/// sn, cn, dn at one argument; the other nine glyphs are quotients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiTriple {
    pub sn: C64,
    pub cn: C64,
    pub dn: C64,
}

impl JacobiTriple {
    pub fn glyph(&self, code: JacobiCode) -> C64 {
        let one = C64::new(1.0, 0.0);
        let (s, c, d) = (self.sn, self.cn, self.dn);
        match code {
            JacobiCode::Sn => s,
            JacobiCode::Cn => c,
            JacobiCode::Dn => d,
            JacobiCode::Ns => one / s,
            JacobiCode::Nc => one / c,
            JacobiCode::Nd => one / d,
            JacobiCode::Sc => s / c,
            JacobiCode::Cs => c / s,
            JacobiCode::Sd => s / d,
            JacobiCode::Ds => d / s,
            JacobiCode::Cd => c / d,
            JacobiCode::Dc => d / c,
        }
    }
}

/// Evaluator bound to one modulus, with the theta constants cached.
#[derive(Debug, Clone)]
pub struct Elliptic {
    pub md: ModulusData,
    pub guard: f64,
    t2: C64,
    t3: C64,
    t4: C64,
}

impl Elliptic {
    pub fn new(k: C64) -> Result<Self> {
        Self::with_guard(k, DEFAULT_POLE_GUARD)
    }

    pub fn with_guard(k: C64, guard: f64) -> Result<Self> {
        let md = ModulusData::new(k)?;
        Ok(Self::from_modulus(md, guard))
    }

    pub fn from_modulus(md: ModulusData, guard: f64) -> Self {
        let zero = C64::new(0.0, 0.0);
        Elliptic {
            md,
            guard,
            t2: theta_tau(2, zero, md.tau),
            t3: theta_tau(3, zero, md.tau),
            t4: theta_tau(4, zero, md.tau),
        }
    }

    pub fn k(&self) -> C64 {
        self.md.k
    }

    /// Order-two point `j` of the lattice `2K Z + 2iK' Z`.
    pub fn half_period(&self, j: usize) -> C64 {
        let (kk, ikp) = (self.md.big_k, I * self.md.big_kp);
        match j & 3 {
            0 => C64::new(0.0, 0.0),
            1 => kk,
            2 => kk + ikp,
            _ => ikp,
        }
    }

    /// Splits `u = r + 2mK + 2n iK'` with `r` in the central cell.
    fn reduce(&self, u: C64) -> (C64, i64, i64) {
        let w1 = self.md.big_k * 2.0;
        let w2 = I * self.md.big_kp * 2.0;
        let det = w1.re * w2.im - w1.im * w2.re;
        let a = (u.re * w2.im - u.im * w2.re) / det;
        let b = (w1.re * u.im - w1.im * u.re) / det;
        let (m, n) = (a.round() as i64, b.round() as i64);
        (u - w1 * m as f64 - w2 * n as f64, m, n)
    }

    /// Distance from `u` to the nearest lattice translate of order-two
    /// point `j`.
    pub fn distance_to_point(&self, u: C64, j: usize) -> f64 {
        let (r, _, _) = self.reduce(u - self.half_period(j));
        let w1 = self.md.big_k * 2.0;
        let w2 = I * self.md.big_kp * 2.0;
        let mut best = f64::INFINITY;
        for m in -1..=1 {
            for n in -1..=1 {
                best = best.min((r - w1 * m as f64 - w2 * n as f64).norm());
            }
        }
        best
    }

    /// Distance to the nearest of the four singular points of the equation.
    pub fn distance_to_singular(&self, u: C64) -> f64 {
        (0..4).map(|j| self.distance_to_point(u, j)).fold(f64::INFINITY, f64::min)
    }

    /// sn, cn, dn without any pole check.
    pub fn triple_unguarded(&self, u: C64) -> JacobiTriple {
        let (r, m, n) = self.reduce(u);
        let z = r * (PI / 2.0) / self.md.big_k;
        let tau = self.md.tau;
        let th1 = theta_tau(1, z, tau);
        let th2 = theta_tau(2, z, tau);
        let th3 = theta_tau(3, z, tau);
        let th4 = theta_tau(4, z, tau);
        let mut sn = self.t3 / self.t2 * th1 / th4;
        let mut cn = self.t4 / self.t2 * th2 / th4;
        let mut dn = self.t4 / self.t3 * th3 / th4;
        if m.rem_euclid(2) == 1 {
            sn = -sn;
            cn = -cn;
        }
        if n.rem_euclid(2) == 1 {
            cn = -cn;
            dn = -dn;
        }
        JacobiTriple { sn, cn, dn }
    }

    /// sn, cn, dn, refusing arguments near their common pole.
    pub fn triple(&self, u: C64) -> Result<JacobiTriple> {
        self.guard_point(u, 3)?;
        Ok(self.triple_unguarded(u))
    }

    fn guard_point(&self, u: C64, j: usize) -> Result<()> {
        if !finite(u) {
            return Err(Error::Domain(format!("non-finite argument {u}")));
        }
        if self.distance_to_point(u, j) < self.guard {
            return Err(Error::PoleProximity { guard: self.guard });
        }
        Ok(())
    }

    pub fn glyph(&self, code: JacobiCode, u: C64) -> Result<C64> {
        self.guard_point(u, code.pole_point())?;
        let v = self.triple_unguarded(u).glyph(code);
        if !finite(v) {
            return Err(Error::PoleProximity { guard: self.guard });
        }
        Ok(v)
    }
}

/// One-shot evaluation of a Jacobi glyph.
pub fn jacobi(code: JacobiCode, u: C64, k: C64) -> Result<C64> {
    Elliptic::new(k)?.glyph(code, u)
}
