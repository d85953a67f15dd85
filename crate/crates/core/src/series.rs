//! The local solution at `u = 0` with exponent `xi + 1`:
//!
//! ```text
//! Dl(xi, eta, mu, nu; h; u, k) = sn^(xi+1) cn^(eta+1) dn^(mu+1) * sum_m C_m sn^(2m)
//! ```
//!
//! with `M_m C_{m+1} + L_m C_m + K_m C_{m-1} = 0`, `C_{-1} = 0`, `C_0 = 1`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elliptic::{Elliptic, C64};
use crate::error::{Error, Result};
use crate::symmetry::ParamTuple;

/// Which diagonal weight `L_m` to use. `Paper` carries the extra constant
/// `+(k^2+1)(xi+1)^2` exactly as printed; `Corrected` drops it and is the
/// one that solves the equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LVariant {
    #[default]
    Corrected,
    Paper,
}

impl LVariant {
    pub const ALL: [LVariant; 2] = [LVariant::Corrected, LVariant::Paper];

    pub fn name(self) -> &'static str {
        match self {
            LVariant::Corrected => "corrected",
            LVariant::Paper => "paper",
        }
    }

    /// The constant the variant adds to every `L_m`.
    pub fn offset(self, p: &ParamTuple) -> C64 {
        match self {
            LVariant::Corrected => C64::new(0.0, 0.0),
            LVariant::Paper => (p.k * p.k + 1.0) * (p.xi + 1.0) * (p.xi + 1.0),
        }
    }
}

impl fmt::Display for LVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corrected" => Ok(LVariant::Corrected),
            "paper" => Ok(LVariant::Paper),
            _ => Err(Error::Domain(format!("unknown L-variant '{s}' (expected corrected or paper)"))),
        }
    }
}

/// The three weights at index `m`: `upper` multiplies `C_{m+1}` (`M_m`),
/// `diag` multiplies `C_m` (`L_m`), `lower` multiplies `C_{m-1}` (`K_m`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecursionCoeffs {
    pub upper: C64,
    pub diag: C64,
    pub lower: C64,
}

fn near_integer(z: C64, tol: f64) -> Option<i64> {
    let r = z.re.round();
    ((z.re - r).abs() <= tol && z.im.abs() <= tol).then_some(r as i64)
}

/// `xi` in `{-3/2, -5/2, ...}` makes some `M_m` vanish.
pub fn check_logarithmic(xi: C64) -> Result<()> {
    if let Some(n) = near_integer(xi * 2.0 + 3.0, 1e-12) {
        if n <= 0 && n % 2 == 0 {
            return Err(Error::LogarithmicCase(format!("{xi}")));
        }
    }
    Ok(())
}

/// Weights with `h` left out of the diagonal; `diag + h` is `L_m`.
fn weights_without_h(m: usize, p: &ParamTuple, variant: LVariant) -> RecursionCoeffs {
    let mf = m as f64;
    let (xi, eta, mu, nu) = (p.xi, p.eta, p.mu, p.nu);
    let k2 = p.k * p.k;
    let a = eta + xi + 2.0 * mf + 2.0;
    let b = mu + xi + 2.0 * mf + 2.0;
    RecursionCoeffs {
        upper: (xi * 2.0 + 2.0 * mf + 3.0) * (2.0 * mf + 2.0),
        diag: -(a * a) - k2 * b * b + variant.offset(p),
        lower: k2 * (xi + eta + mu + nu + 2.0 * mf + 2.0) * (xi + eta + mu - nu + 2.0 * mf + 1.0),
    }
}

pub fn recursion_coeffs(m: usize, p: &ParamTuple, variant: LVariant) -> Result<RecursionCoeffs> {
    check_logarithmic(p.xi)?;
    let mut w = weights_without_h(m, p, variant);
    w.diag += p.h;
    Ok(w)
}

const RESCALE_AT: f64 = 1e150;

/// Coefficients `C_m = mantissa_m * 1e150^exponent_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledCoeffs {
    pub mantissa: Vec<C64>,
    pub exponent: Vec<i32>,
}

impl ScaledCoeffs {
    pub fn to_plain(&self) -> Result<Vec<C64>> {
        self.mantissa
            .iter()
            .zip(&self.exponent)
            .enumerate()
            .map(|(m, (c, &e))| {
                let v = c * RESCALE_AT.powi(e);
                if v.re.is_finite() && v.im.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Overflow(m))
                }
            })
            .collect()
    }
}

/// Forward recursion with tail rescaling whenever `|C_m|` passes `1e150`.
pub fn dl_coefficients_scaled(p: &ParamTuple, n: usize, variant: LVariant) -> Result<ScaledCoeffs> {
    check_logarithmic(p.xi)?;
    let mut mantissa = Vec::with_capacity(n + 1);
    let mut exponent = Vec::with_capacity(n + 1);
    mantissa.push(C64::new(1.0, 0.0));
    exponent.push(0);
    let (mut prev, mut cur, mut e) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0), 0i32);
    for m in 0..n {
        let w = recursion_coeffs(m, p, variant)?;
        if w.upper.norm() == 0.0 {
            return Err(Error::DegenerateRecursion(m));
        }
        let next = -(w.diag * cur + w.lower * prev) / w.upper;
        prev = cur;
        cur = next;
        if cur.norm() > RESCALE_AT {
            cur /= RESCALE_AT;
            prev /= RESCALE_AT;
            e += 1;
        }
        if !cur.re.is_finite() || !cur.im.is_finite() {
            return Err(Error::Overflow(m + 1));
        }
        mantissa.push(cur);
        exponent.push(e);
    }
    Ok(ScaledCoeffs { mantissa, exponent })
}

/// `C_0..C_N` by forward recursion.
pub fn dl_coefficients(p: &ParamTuple, n: usize, variant: LVariant) -> Result<Vec<C64>> {
    dl_coefficients_scaled(p, n, variant)?.to_plain()
}

/// `C_0..C_N` of the minimal solution, from backward ratios started at
/// `depth`. Only meaningful when the continued fraction vanishes at `h`.
pub fn minimal_coefficients(p: &ParamTuple, n: usize, depth: usize, variant: LVariant) -> Result<Vec<C64>> {
    check_logarithmic(p.xi)?;
    let depth = depth.max(n + 1);
    let mut ratios = vec![C64::new(0.0, 0.0); depth + 2];
    let mut r = C64::new(0.0, 0.0);
    for m in (1..=depth).rev() {
        let w = recursion_coeffs(m, p, variant)?;
        let den = w.diag + w.upper * r;
        if den.norm() == 0.0 {
            return Err(Error::ZeroPivot(m));
        }
        r = -w.lower / den;
        ratios[m] = r;
    }
    let mut c = Vec::with_capacity(n + 1);
    c.push(C64::new(1.0, 0.0));
    for m in 1..=n {
        c.push(c[m - 1] * ratios[m]);
    }
    Ok(c)
}

/// The non-negative integer `q` with `xi+eta+mu+nu = -2q-4` or
/// `xi+eta+mu-nu = -2q-3`, if any.
pub fn termination_check(p: &ParamTuple) -> Option<usize> {
    let first = -(p.xi + p.eta + p.mu + p.nu + 4.0) / 2.0;
    let second = -(p.xi + p.eta + p.mu - p.nu + 3.0) / 2.0;
    [first, second]
        .into_iter()
        .filter_map(|q| near_integer(q, 1e-9))
        .filter(|&q| q >= 0)
        .min()
        .map(|q| q as usize)
}

/// The `q+1` accessory parameters for which the series terminates after
/// `C_q`, as eigenvalues of the tridiagonal recursion matrix.
pub fn polynomial_eigenvalues(p: &ParamTuple, variant: LVariant) -> Result<Vec<C64>> {
    let q = termination_check(p).ok_or(Error::NoTermination)?;
    check_logarithmic(p.xi)?;
    let n = q + 1;
    let w: Vec<RecursionCoeffs> = (0..n).map(|m| weights_without_h(m, p, variant)).collect();
    if let Some(m) = w.iter().position(|c| c.upper.norm() == 0.0) {
        return Err(Error::DegenerateRecursion(m));
    }
    // Row m reads M_m C_{m+1} + (L~_m + h) C_m + K_m C_{m-1} = 0 with C_{q+1} = 0.
    let t = DMatrix::<C64>::from_fn(n, n, |i, j| {
        if i == j {
            -w[i].diag
        } else if j == i + 1 {
            -w[i].upper
        } else if i == j + 1 {
            -w[i].lower
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let eig = t
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::NonConvergence("Schur decomposition of the recursion matrix".into()))?;
    let mut hs: Vec<C64> = eig.iter().copied().collect();
    hs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(hs)
}

/// Value of the truncated infinite continued fraction, and how much it
/// moved relative to half the depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfValue {
    pub value: C64,
    pub change: f64,
}

fn cf_at_depth(p: &ParamTuple, depth: usize, variant: LVariant) -> Result<C64> {
    let mut t = C64::new(0.0, 0.0);
    for m in (1..=depth).rev() {
        let w = recursion_coeffs(m, p, variant)?;
        let den = w.diag - w.upper * t;
        if den.norm() == 0.0 {
            return Err(Error::ZeroPivot(m));
        }
        t = w.lower / den;
    }
    let w0 = recursion_coeffs(0, p, variant)?;
    Ok(w0.diag / w0.upper - t)
}

/// `g(h) = L_0/M_0 - K_1/(L_1 - M_1 K_2/(L_2 - ...))`, whose zeros are the
/// accessory parameters of the minimal (Darboux function) solution.
pub fn infinite_cf(p: &ParamTuple, depth: usize, variant: LVariant) -> Result<CfValue> {
    if depth == 0 {
        return Err(Error::Domain("continued-fraction depth must be at least 1".into()));
    }
    let value = cf_at_depth(p, depth, variant)?;
    let half = cf_at_depth(p, (depth / 2).max(1), variant)?;
    Ok(CfValue { value, change: (value - half).norm() })
}

/// Scale against which `|g|` is judged to vanish.
fn cf_scale(p: &ParamTuple, variant: LVariant) -> f64 {
    let w = weights_without_h(0, p, variant);
    1.0 + ((w.diag + p.h) / w.upper).norm()
}

/// Relative size of `|g(h)|` below which `h` is treated as a root.
pub const CF_VANISH_TOL: f64 = 1e-9;

pub fn cf_vanishes(p: &ParamTuple, depth: usize, variant: LVariant) -> Result<bool> {
    let g = cf_at_depth(p, depth, variant)?;
    Ok(g.norm() <= CF_VANISH_TOL * cf_scale(p, variant))
}

/// Where to look for accessory parameters of Darboux functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SearchRegion {
    /// Real interval scanned for sign changes of `g`.
    Real { lo: f64, hi: f64 },
    /// Complex box searched by the argument principle.
    Box { re_lo: f64, re_hi: f64, im_lo: f64, im_hi: f64 },
}

impl FromStr for SearchRegion {
    type Err = Error;
    /// `lo:hi` or `re_lo:re_hi:im_lo:im_hi`.
    fn from_str(s: &str) -> Result<Self> {
        let v: Vec<f64> = s
            .split(':')
            .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Domain(format!("bad region '{s}'"))))
            .collect::<Result<_>>()?;
        match v[..] {
            [lo, hi] => Ok(SearchRegion::Real { lo, hi }),
            [re_lo, re_hi, im_lo, im_hi] => Ok(SearchRegion::Box { re_lo, re_hi, im_lo, im_hi }),
            _ => Err(Error::Domain(format!("region '{s}' needs 2 or 4 numbers"))),
        }
    }
}

/// A root of `g` together with its depth-doubling certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenRoot {
    pub h: C64,
    pub depth: usize,
    /// Distance to the root found at twice the depth.
    pub shift: f64,
}

/// Roots must agree this well between `depth` and `2 depth`.
pub const ROOT_TOL: f64 = 1e-10;

pub fn darboux_function_eigenvalues(
    p: &ParamTuple,
    region: SearchRegion,
    depth: usize,
    variant: LVariant,
) -> Result<Vec<EigenRoot>> {
    check_logarithmic(p.xi)?;
    let roots = match region {
        SearchRegion::Real { lo, hi } => real_scan(p, lo, hi, depth, variant)?,
        SearchRegion::Box { re_lo, re_hi, im_lo, im_hi } => box_scan(p, [re_lo, re_hi, im_lo, im_hi], depth, variant)?,
    };
    let mut out = Vec::with_capacity(roots.len());
    for h in roots {
        let deeper = refine_complex(p, h, 2 * depth, variant)?;
        let shift = (deeper - h).norm();
        if shift > ROOT_TOL * (1.0 + h.norm()) {
            return Err(Error::DepthUnstable { root: format!("{h}"), shift });
        }
        out.push(EigenRoot { h, depth, shift });
    }
    out.sort_by(|a, b| a.h.re.total_cmp(&b.h.re).then(a.h.im.total_cmp(&b.h.im)));
    Ok(out)
}

fn g_real(p: &ParamTuple, h: f64, depth: usize, variant: LVariant) -> Result<f64> {
    Ok(cf_at_depth(&p.with_h(C64::new(h, 0.0)), depth, variant)?.re)
}

fn is_real_problem(p: &ParamTuple) -> bool {
    p.gammas().iter().all(|g| g.im == 0.0) && p.k.im == 0.0
}

const SCAN_STEP: f64 = 0.01;

fn real_scan(p: &ParamTuple, lo: f64, hi: f64, depth: usize, variant: LVariant) -> Result<Vec<C64>> {
    if !(hi > lo) {
        return Ok(Vec::new());
    }
    if !is_real_problem(p) {
        return Err(Error::Domain("a real scan needs real parameters and modulus; use a complex box".into()));
    }
    let cells = (((hi - lo) / SCAN_STEP).ceil() as usize).max(16);
    let grid: Vec<f64> = (0..=cells).map(|j| lo + (hi - lo) * j as f64 / cells as f64).collect();
    let values: Vec<Option<f64>> = grid.par_iter().map(|&h| g_real(p, h, depth, variant).ok()).collect();
    let brackets: Vec<(f64, f64)> = (0..cells)
        .filter_map(|j| match (values[j], values[j + 1]) {
            (Some(a), Some(b)) if a == 0.0 || a.signum() != b.signum() => Some((grid[j], grid[j + 1])),
            _ => None,
        })
        .collect();
    let found: Vec<Option<C64>> = brackets
        .par_iter()
        .map(|&(a, b)| bisect(p, a, b, depth, variant).ok().flatten())
        .collect();
    let mut roots: Vec<C64> = found.into_iter().flatten().collect();
    roots.dedup_by(|a, b| (*a - *b).norm() < 1e-9);
    Ok(roots)
}

/// Bisection on a sign change; poles of `g` also change sign and are
/// rejected by the size of `|g|` at the end.
fn bisect(p: &ParamTuple, mut a: f64, mut b: f64, depth: usize, variant: LVariant) -> Result<Option<C64>> {
    let mut ga = g_real(p, a, depth, variant)?;
    if ga == 0.0 {
        return Ok(Some(C64::new(a, 0.0)));
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let gm = g_real(p, mid, depth, variant)?;
        if gm == 0.0 {
            a = mid;
            b = mid;
            break;
        }
        if gm.signum() == ga.signum() {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    let h = 0.5 * (a + b);
    let ph = p.with_h(C64::new(h, 0.0));
    let g = cf_at_depth(&ph, depth, variant)?;
    Ok((g.norm() <= 1e-6 * cf_scale(&ph, variant)).then_some(C64::new(h, 0.0)))
}

/// Newton iteration on `g` with a numerical derivative, starting at `h0`.
fn refine_complex(p: &ParamTuple, h0: C64, depth: usize, variant: LVariant) -> Result<C64> {
    let mut h = h0;
    for _ in 0..60 {
        let g = cf_at_depth(&p.with_h(h), depth, variant)?;
        let step = 1e-6 * (1.0 + h.norm());
        let gp = (cf_at_depth(&p.with_h(h + step), depth, variant)?
            - cf_at_depth(&p.with_h(h - step), depth, variant)?)
            / (2.0 * step);
        if gp.norm() == 0.0 {
            break;
        }
        let dh = g / gp;
        h -= dh;
        if dh.norm() <= 1e-15 * (1.0 + h.norm()) {
            break;
        }
    }
    Ok(h)
}

/// Phase of `C_{depth+1}(h)`, a polynomial in `h` whose zeros are those of
/// the continued fraction truncated at `depth`. Accumulated from the
/// forward ratios so that nothing overflows.
fn terminal_phase(p: &ParamTuple, h: C64, depth: usize, variant: LVariant) -> Result<f64> {
    let ph = p.with_h(h);
    let mut ratio: Option<C64> = None;
    let mut phase = 0.0;
    for m in 0..=depth {
        let w = recursion_coeffs(m, &ph, variant)?;
        let r = match ratio {
            None => -w.diag / w.upper,
            Some(r) => -(w.diag + w.lower / r) / w.upper,
        };
        if r.norm() == 0.0 || !r.re.is_finite() {
            return Err(Error::ZeroPivot(m));
        }
        phase += r.arg();
        ratio = Some(r);
    }
    Ok(phase)
}

fn wrap(a: f64) -> f64 {
    let t = std::f64::consts::TAU;
    a - t * (a / t).round()
}

/// Winding number of `C_{depth+1}` around the box boundary.
fn winding(p: &ParamTuple, bx: [f64; 4], depth: usize, variant: LVariant) -> Result<i64> {
    let [x0, x1, y0, y1] = bx;
    let corners = [C64::new(x0, y0), C64::new(x1, y0), C64::new(x1, y1), C64::new(x0, y1)];
    let mut total = 0.0;
    for e in 0..4 {
        total += edge_phase(p, corners[e], corners[(e + 1) % 4], depth, variant, 0)?;
    }
    Ok((total / std::f64::consts::TAU).round() as i64)
}

fn edge_phase(p: &ParamTuple, a: C64, b: C64, depth: usize, variant: LVariant, level: u32) -> Result<f64> {
    let n = 16;
    let pts: Vec<f64> = (0..=n)
        .map(|j| terminal_phase(p, a + (b - a) * (j as f64 / n as f64), depth, variant))
        .collect::<Result<_>>()?;
    let mut total = 0.0;
    for j in 0..n {
        let d = wrap(pts[j + 1] - pts[j]);
        if d.abs() > 0.8 && level < 12 {
            let s = a + (b - a) * (j as f64 / n as f64);
            let t = a + (b - a) * ((j + 1) as f64 / n as f64);
            total += edge_phase(p, s, t, depth, variant, level + 1)?;
        } else {
            total += d;
        }
    }
    Ok(total)
}

fn box_scan(p: &ParamTuple, bx: [f64; 4], depth: usize, variant: LVariant) -> Result<Vec<C64>> {
    let [x0, x1, y0, y1] = bx;
    if !(x1 > x0 && y1 > y0) {
        return Ok(Vec::new());
    }
    let count = winding(p, bx, depth, variant)?;
    if count <= 0 {
        return Ok(Vec::new());
    }
    let size = (x1 - x0).max(y1 - y0);
    if count == 1 && size < 0.05 {
        let centre = C64::new(0.5 * (x0 + x1), 0.5 * (y0 + y1));
        let h = refine_complex(p, centre, depth, variant)?;
        let inside = h.re >= x0 - 1e-9 && h.re <= x1 + 1e-9 && h.im >= y0 - 1e-9 && h.im <= y1 + 1e-9;
        return Ok(if inside { vec![h] } else { Vec::new() });
    }
    if size < 1e-7 {
        // a cluster; report its centre once per counted zero
        let centre = C64::new(0.5 * (x0 + x1), 0.5 * (y0 + y1));
        return Ok(vec![refine_complex(p, centre, depth, variant)?; count as usize]);
    }
    let (xm, ym) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    // offsets keep the split lines off the real axis, where real-parameter
    // roots sit
    let ym = if ym == 0.0 { ym + 1e-3 * (y1 - y0) } else { ym };
    let quads = [[x0, xm, y0, ym], [xm, x1, y0, ym], [x0, xm, ym, y1], [xm, x1, ym, y1]];
    let parts: Vec<Result<Vec<C64>>> = quads.par_iter().map(|q| box_scan(p, *q, depth, variant)).collect();
    let mut roots = Vec::new();
    for r in parts {
        roots.extend(r?);
    }
    Ok(roots)
}

/// Radius in `|sn u|` of the disc where the series converges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Radius {
    /// The series terminates.
    Polynomial,
    Finite { value: f64 },
}

impl Radius {
    pub fn value(&self) -> f64 {
        match self {
            Radius::Polynomial => f64::INFINITY,
            Radius::Finite { value } => *value,
        }
    }
}

/// `max(1, 1/|k|)` when `g(h)` vanishes, `min(1, 1/|k|)` otherwise.
pub fn convergence_domain(p: &ParamTuple, depth: usize, variant: LVariant) -> Result<Radius> {
    let kabs = p.k.norm();
    if (kabs - 1.0).abs() < 1e-12 {
        return Err(Error::ModulusOnUnitCircle);
    }
    if terminates(p, variant)?.is_some() {
        return Ok(Radius::Polynomial);
    }
    let value = if termination_check(p).is_none() && cf_vanishes(p, depth, variant)? { 1f64.max(1.0 / kabs) } else { 1f64.min(1.0 / kabs) };
    Ok(Radius::Finite { value })
}

/// `Some(q)` when a termination relation holds and `h` makes `C_{q+1}`
/// vanish.
pub fn terminates(p: &ParamTuple, variant: LVariant) -> Result<Option<usize>> {
    let Some(q) = termination_check(p) else { return Ok(None) };
    let c = dl_coefficients(p, q + 1, variant)?;
    let scale = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let hscale = 1.0 + p.h.norm() + (p.k * p.k).norm() * 10.0;
    Ok((c[q + 1].norm() <= 1e-10 * scale * hscale).then_some(q))
}

/// How the coefficients of a [`SeriesSolution`] were produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientKind {
    Polynomial,
    Minimal,
    Forward,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSolution {
    pub params: ParamTuple,
    pub coeffs: Vec<C64>,
    pub terminated_at: Option<usize>,
    pub radius: Radius,
    pub variant: LVariant,
    pub kind: CoefficientKind,
}

/// A series value with an estimate of the neglected tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: C64,
    pub tail_bound: f64,
}

fn integer_power(base: C64, exponent: C64) -> Result<C64> {
    if let Some(n) = near_integer(exponent, 1e-14) {
        if base.norm() == 0.0 {
            return match n.cmp(&0) {
                std::cmp::Ordering::Greater => Ok(C64::new(0.0, 0.0)),
                std::cmp::Ordering::Equal => Ok(C64::new(1.0, 0.0)),
                std::cmp::Ordering::Less => Err(Error::PoleProximity { guard: 0.0 }),
            };
        }
        return Ok(base.powi(n as i32));
    }
    if base.norm() == 0.0 {
        return if exponent.re > 0.0 { Ok(C64::new(0.0, 0.0)) } else { Err(Error::PoleProximity { guard: 0.0 }) };
    }
    Ok(base.powc(exponent))
}

impl SeriesSolution {
    /// Coefficients up to `n`, choosing the terminating, minimal or forward
    /// solution as appropriate for `h`.
    pub fn new(p: &ParamTuple, n: usize, depth: usize, variant: LVariant) -> Result<Self> {
        check_logarithmic(p.xi)?;
        if (p.k.norm() - 1.0).abs() < 1e-12 {
            return Err(Error::ModulusOnUnitCircle);
        }
        if let Some(q) = terminates(p, variant)? {
            let mut coeffs = dl_coefficients(p, q, variant)?;
            coeffs.resize(n.max(q) + 1, C64::new(0.0, 0.0));
            return Ok(SeriesSolution {
                params: *p,
                coeffs,
                terminated_at: Some(q),
                radius: Radius::Polynomial,
                variant,
                kind: CoefficientKind::Polynomial,
            });
        }
        let radius = convergence_domain(p, depth, variant)?;
        // with a termination relation in force the recursion decouples after
        // C_q and the continued fraction says nothing about the head
        let minimal = termination_check(p).is_none() && p.k.norm() < 1.0 && cf_vanishes(p, depth, variant)?;
        let (coeffs, kind) = if minimal {
            (minimal_coefficients(p, n, depth, variant)?, CoefficientKind::Minimal)
        } else {
            (dl_coefficients(p, n, variant)?, CoefficientKind::Forward)
        };
        Ok(SeriesSolution { params: *p, coeffs, terminated_at: None, radius, variant, kind })
    }

    /// `sum C_m s^m` at `s = sn^2`, with a geometric tail estimate.
    pub fn sum(&self, s: C64) -> Result<SeriesValue> {
        let r = self.radius.value();
        if s.norm().sqrt() >= r {
            return Err(Error::OutsideConvergence { value: s.norm().sqrt(), radius: r });
        }
        let mut acc = C64::new(0.0, 0.0);
        let mut pow = C64::new(1.0, 0.0);
        for c in &self.coeffs {
            acc += c * pow;
            pow *= s;
        }
        let tail_bound = if self.terminated_at.is_some() {
            0.0
        } else {
            let n = self.coeffs.len() - 1;
            let last = (self.coeffs[n] * s.powu(n as u32)).norm();
            let rho = (s.norm() / (r * r)).min(1.0);
            if rho >= 1.0 {
                f64::INFINITY
            } else {
                last * rho / (1.0 - rho)
            }
        };
        Ok(SeriesValue { value: acc, tail_bound })
    }

    pub fn eval(&self, ell: &Elliptic, u: C64) -> Result<SeriesValue> {
        let t = ell.triple(u)?;
        let p = &self.params;
        let pre = integer_power(t.sn, p.xi + 1.0)? * integer_power(t.cn, p.eta + 1.0)? * integer_power(t.dn, p.mu + 1.0)?;
        let s = self.sum(t.sn * t.sn)?;
        let value = pre * s.value;
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::PoleProximity { guard: ell.guard });
        }
        Ok(SeriesValue { value, tail_bound: pre.norm() * s.tail_bound })
    }
}

/// One-shot evaluation of `Dl` at `u`.
pub fn dl_eval(p: &ParamTuple, u: C64, n: usize, variant: LVariant) -> Result<SeriesValue> {
    let sol = SeriesSolution::new(p, n, 2 * n, variant)?;
    let ell = Elliptic::new(p.k)?;
    sol.eval(&ell, u)
}

/// Which root of `t^2 - (1+k^2) t + k^2` the coefficient ratios approach.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RatioClass {
    Dominant,
    Minimal,
    Terminated,
    Unclassified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioDiagnostic {
    pub estimate: Option<C64>,
    pub class: RatioClass,
}

/// Least-squares fit `C_{m+1}/C_m ≈ a + b/m` over the top quartile of
/// indices; `a` is the limit estimate.
pub fn ratio_diagnostic(coeffs: &[C64], k: C64) -> Result<RatioDiagnostic> {
    if coeffs.len() < 65 {
        return Err(Error::InsufficientData { need: 65, got: coeffs.len() });
    }
    let n = coeffs.len() - 1;
    if coeffs[n].norm() == 0.0 && coeffs[n - 1].norm() == 0.0 {
        return Ok(RatioDiagnostic { estimate: None, class: RatioClass::Terminated });
    }
    let ms: Vec<usize> = (3 * n / 4..n).collect();
    // normal equations for (a, b) with basis (1, 1/m)
    let (mut s11, mut s12, mut s22) = (0.0, 0.0, 0.0);
    let (mut t1, mut t2) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    for &m in &ms {
        if coeffs[m].norm() == 0.0 {
            return Ok(RatioDiagnostic { estimate: None, class: RatioClass::Unclassified });
        }
        let r = coeffs[m + 1] / coeffs[m];
        let x = 1.0 / m as f64;
        s11 += 1.0;
        s12 += x;
        s22 += x * x;
        t1 += r;
        t2 += r * x;
    }
    let det = s11 * s22 - s12 * s12;
    let a = (t1 * s22 - t2 * s12) / det;
    let k2 = k * k;
    let (d1, d2) = ((a - 1.0).norm(), (a - k2).norm());
    let class = if d1 < 0.05 && d1 < d2 {
        RatioClass::Dominant
    } else if d2 < 0.05 {
        RatioClass::Minimal
    } else {
        RatioClass::Unclassified
    };
    Ok(RatioDiagnostic { estimate: Some(a), class })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_at_small_index() {
        let p = ParamTuple::real([0.0, -1.0, -1.0, 1.0], 2.0, 0.6);
        let w = recursion_coeffs(0, &p, LVariant::Corrected).unwrap();
        assert_eq!(w.upper, C64::new(6.0, 0.0));
        assert!((w.diag - C64::new(2.0 - 1.0 - 0.36, 0.0)).norm() < 1e-15);
        let p = ParamTuple::real([0.0, 0.0, 0.0, 3.0], 0.0, 0.6);
        assert_eq!(recursion_coeffs(1, &p, LVariant::Corrected).unwrap().lower.norm(), 0.0);
    }

    #[test]
    fn termination_relations() {
        let q = |g| termination_check(&ParamTuple::real(g, 0.0, 0.6));
        assert_eq!(q([0.0, 0.0, 0.0, 3.0]), Some(0));
        assert_eq!(q([0.0, 0.0, 0.0, -6.0]), Some(1));
        assert_eq!(q([1.0, 1.0, 0.0, 0.0]), None);
    }

    #[test]
    fn logarithmic_guard() {
        let p = ParamTuple::real([-1.5, 0.0, 0.0, 1.0], 0.0, 0.6);
        assert!(matches!(recursion_coeffs(0, &p, LVariant::Corrected), Err(Error::LogarithmicCase(_))));
        let p = ParamTuple::real([0.5, 0.0, 0.0, 1.0], 0.0, 0.6);
        assert!(recursion_coeffs(0, &p, LVariant::Corrected).is_ok());
    }

    #[test]
    fn region_parsing() {
        assert_eq!("0:40".parse::<SearchRegion>().unwrap(), SearchRegion::Real { lo: 0.0, hi: 40.0 });
        assert!("1:2:3".parse::<SearchRegion>().is_err());
    }
}
