//! The symmetry group `G = G_I ⋊ G_II` of order 384 as executable data.
//!
//! `G_I` flips exponent branches (`gamma -> -gamma - 1`), `G_II` permutes
//! the four order-two points. On the shifted parameters
//! `z_t = gamma_t + 1/2` the group acts by signed permutations: an element
//! `(s, X)` first moves slot `t` to slot `perm_X(t)`, then flips signs.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::elliptic::{Elliptic, ModulusData, C64, DEFAULT_POLE_GUARD};
use crate::error::{Error, Result};
use crate::tables::{self, Anh, GlyphEntry, TransformationRecord};

pub use crate::tables::Anh as AnhTag;

/// Four branch signs for `(xi, eta, mu, nu)`; `true` means minus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct SignVector(pub [bool; 4]);

impl SignVector {
    pub const IDENTITY: SignVector = SignVector([false; 4]);

    /// Bit `t` of `index` is the sign of slot `t`.
    pub fn from_index(index: u8) -> SignVector {
        SignVector(std::array::from_fn(|t| index >> t & 1 == 1))
    }

    pub fn index(&self) -> u8 {
        (0..4).map(|t| (self.0[t] as u8) << t).sum()
    }

    pub fn all() -> Vec<SignVector> {
        (0..16).map(SignVector::from_index).collect()
    }

    pub fn mul(&self, other: &SignVector) -> SignVector {
        SignVector(std::array::from_fn(|t| self.0[t] ^ other.0[t]))
    }

    pub fn value(&self, t: usize) -> i8 {
        if self.0[t] {
            -1
        } else {
            1
        }
    }
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &m in &self.0 {
            f.write_str(if m { "-" } else { "+" })?;
        }
        Ok(())
    }
}

impl FromStr for SignVector {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != 4 || chars.iter().any(|c| *c != '+' && *c != '-') {
            return Err(Error::Domain(format!("sign vector '{s}' must be four of '+'/'-'")));
        }
        Ok(SignVector(std::array::from_fn(|t| chars[t] == '-')))
    }
}

/// One of the 24 half-period maps `X_i`: anharmonic part `X`, Klein index `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GIIElement {
    pub anh: Anh,
    pub shift: usize,
}

fn all_gii() -> &'static [GIIElement; 24] {
    static CELL: OnceLock<[GIIElement; 24]> = OnceLock::new();
    CELL.get_or_init(|| std::array::from_fn(|n| GIIElement { anh: Anh::ALL[n / 4], shift: n % 4 }))
}

fn perm_table() -> &'static [[usize; 4]; 24] {
    static CELL: OnceLock<[[usize; 4]; 24]> = OnceLock::new();
    CELL.get_or_init(|| {
        std::array::from_fn(|n| {
            let sigma = tables::frozen().rows[n].sigma.images();
            let mut perm = [0; 4];
            for (slot, &src) in sigma.iter().enumerate() {
                perm[src] = slot;
            }
            perm
        })
    })
}

impl GIIElement {
    pub const IDENTITY: GIIElement = GIIElement { anh: Anh::I, shift: 0 };

    pub fn new(anh: Anh, shift: usize) -> Result<Self> {
        if shift > 3 {
            return Err(Error::Domain(format!("Klein index {shift} outside 0..=3")));
        }
        Ok(GIIElement { anh, shift })
    }

    pub fn all() -> &'static [GIIElement; 24] {
        all_gii()
    }

    pub fn index(&self) -> usize {
        self.anh.index() * 4 + self.shift
    }

    /// Where each order-two point (0, K, K+iK', iK') is sent.
    pub fn perm(&self) -> [usize; 4] {
        perm_table()[self.index()]
    }

    pub fn from_perm(perm: [usize; 4]) -> Option<GIIElement> {
        perm_table().iter().position(|p| *p == perm).map(|n| all_gii()[n])
    }

    pub fn record(&self) -> &'static TransformationRecord {
        &tables::frozen().rows[self.index()]
    }

    pub fn inverse(&self) -> GIIElement {
        let p = self.perm();
        let mut inv = [0; 4];
        for (t, &pt) in p.iter().enumerate() {
            inv[pt] = t;
        }
        GIIElement::from_perm(inv).expect("permutation table is a group")
    }
}

impl fmt::Display for GIIElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.anh.letter(), self.shift)
    }
}

impl FromStr for GIIElement {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("'{s}' is not one of I0..E3"));
        let mut chars = s.chars();
        let anh: Anh = chars.next().ok_or_else(bad)?.to_string().parse().map_err(|_| bad())?;
        let rest: String = chars.collect();
        let shift: usize = rest.parse().map_err(|_| bad())?;
        GIIElement::new(anh, shift).map_err(|_| bad())
    }
}

impl Serialize for GIIElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GIIElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// `a ∘ b`: apply `b` first.
pub fn gii_compose(a: GIIElement, b: GIIElement) -> GIIElement {
    let (pa, pb) = (a.perm(), b.perm());
    GIIElement::from_perm(std::array::from_fn(|t| pa[pb[t]])).expect("permutation table is a group")
}

/// `Gamma(X)(s)`: the sign vector carried along by the permutation of `X`.
pub fn gamma_action(x: GIIElement, s: SignVector) -> SignVector {
    let p = x.perm();
    let mut out = [false; 4];
    for t in 0..4 {
        out[p[t]] = s.0[t];
    }
    SignVector(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement {
    pub signs: SignVector,
    pub gii: GIIElement,
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement { signs: SignVector::IDENTITY, gii: GIIElement::IDENTITY };

    pub fn all() -> Vec<GroupElement> {
        let mut v = Vec::with_capacity(384);
        for &gii in GIIElement::all() {
            for signs in SignVector::all() {
                v.push(GroupElement { signs, gii });
            }
        }
        v
    }

    /// The 4×4 signed permutation matrix acting on `gamma + 1/2`.
    pub fn matrix(&self) -> [[i8; 4]; 4] {
        let p = self.gii.perm();
        let mut m = [[0i8; 4]; 4];
        for t in 0..4 {
            m[p[t]][t] = self.signs.value(p[t]);
        }
        m
    }

    pub fn from_matrix(m: &[[i8; 4]; 4]) -> Option<GroupElement> {
        let mut perm = [0; 4];
        let mut signs = [false; 4];
        for t in 0..4 {
            let rows: Vec<usize> = (0..4).filter(|&r| m[r][t] != 0).collect();
            if rows.len() != 1 || m[rows[0]][t].abs() != 1 {
                return None;
            }
            perm[t] = rows[0];
            signs[rows[0]] = m[rows[0]][t] < 0;
        }
        Some(GroupElement { signs: SignVector(signs), gii: GIIElement::from_perm(perm)? })
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.signs, self.gii)
    }
}

pub fn semidirect_compose(g1: GroupElement, g2: GroupElement) -> GroupElement {
    GroupElement {
        signs: g1.signs.mul(&gamma_action(g1.gii, g2.signs)),
        gii: gii_compose(g1.gii, g2.gii),
    }
}

pub fn matrix_product(a: &[[i8; 4]; 4], b: &[[i8; 4]; 4]) -> [[i8; 4]; 4] {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..4).map(|t| a[i][t] * b[t][j]).sum()))
}

/// Exponent parameters, accessory parameter and modulus of one equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamTuple {
    pub xi: C64,
    pub eta: C64,
    pub mu: C64,
    pub nu: C64,
    pub h: C64,
    pub k: C64,
}

impl ParamTuple {
    pub fn new(gammas: [C64; 4], h: C64, k: C64) -> Self {
        let [xi, eta, mu, nu] = gammas;
        ParamTuple { xi, eta, mu, nu, h, k }
    }

    pub fn real(gammas: [f64; 4], h: f64, k: f64) -> Self {
        Self::new(gammas.map(|g| C64::new(g, 0.0)), C64::new(h, 0.0), C64::new(k, 0.0))
    }

    pub fn gammas(&self) -> [C64; 4] {
        [self.xi, self.eta, self.mu, self.nu]
    }

    pub fn with_gammas(&self, g: [C64; 4]) -> Self {
        ParamTuple::new(g, self.h, self.k)
    }

    pub fn with_h(&self, h: C64) -> Self {
        ParamTuple { h, ..*self }
    }

    /// `sum gamma (gamma + 1)` over the four parameters.
    pub fn casimir(&self) -> C64 {
        self.gammas().iter().map(|g| g * (g + 1.0)).sum()
    }

    /// The potential `xi(xi+1) ns^2 + eta(eta+1) dc^2 + mu(mu+1) k^2 cd^2 + nu(nu+1) k^2 sn^2`
    /// evaluated from a Jacobi triple.
    pub fn potential(&self, t: &crate::elliptic::JacobiTriple) -> C64 {
        let k2 = self.k * self.k;
        let (s, c, d) = (t.sn, t.cn, t.dn);
        let p = |g: C64| g * (g + 1.0);
        p(self.xi) / (s * s) + p(self.eta) * (d * d) / (c * c) + p(self.mu) * k2 * (c * c) / (d * d) + p(self.nu) * k2 * s * s
    }
}

/// `gamma -> -gamma - 1` on every slot with a minus sign.
pub fn gi_apply(s: SignVector, p: &ParamTuple) -> ParamTuple {
    let g = p.gammas();
    p.with_gammas(std::array::from_fn(|t| if s.0[t] { -g[t] - 1.0 } else { g[t] }))
}

/// The affine change of variable `w = scale * (u + offset)` and new modulus
/// of one row, evaluated at a fixed `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Substitution {
    pub scale: C64,
    pub offset: C64,
    pub kappa: C64,
}

impl Substitution {
    pub fn from_record(rec: &TransformationRecord, md: &ModulusData) -> Self {
        Substitution {
            scale: rec.scale.eval(md.k, md.kp),
            offset: rec.shift.eval(md.big_k, md.big_kp),
            kappa: rec.modulus.eval(md.k, md.kp),
        }
    }

    pub fn apply(&self, u: C64) -> C64 {
        self.scale * (u + self.offset)
    }

    /// Inverse map `w -> u`.
    pub fn invert(&self, w: C64) -> C64 {
        w / self.scale - self.offset
    }
}

fn check_kappa(kappa: C64) -> Result<()> {
    let m = kappa * kappa;
    if !m.re.is_finite() || !m.im.is_finite() || m.norm() < 1e-14 || (m - 1.0).norm() < 1e-12 {
        return Err(Error::DegenerateModulus(format!("{m}")));
    }
    Ok(())
}

pub fn substitution(x: GIIElement, k: C64) -> Result<Substitution> {
    let md = ModulusData::new(k)?;
    let sub = Substitution::from_record(x.record(), &md);
    check_kappa(sub.kappa)?;
    Ok(sub)
}

/// `(w, kappa)` for the row `x`.
pub fn apply_to_variable(x: GIIElement, u: C64, k: C64) -> Result<(C64, C64)> {
    let sub = substitution(x, k)?;
    Ok((sub.apply(u), sub.kappa))
}

/// The transformed equation: parameters permuted, `h` replaced by `h_X`
/// and `k` by `kappa_X`.
pub fn sigma_and_h(x: GIIElement, p: &ParamTuple) -> Result<ParamTuple> {
    let rec = x.record();
    let kp = (C64::new(1.0, 0.0) - p.k * p.k).sqrt();
    let kappa = rec.modulus.eval(p.k, kp);
    check_kappa(kappa)?;
    let sigma = rec.sigma.images();
    let g = p.gammas();
    let h = tables::frozen().anh(x.anh).h_jacobi.eval(p.h, p.casimir(), p.k);
    Ok(ParamTuple::new(std::array::from_fn(|slot| g[sigma[slot]]), h, kappa))
}

/// One identity `target(w, kappa) = coef * glyph(u, k)` of a row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowIdentity {
    pub element: GIIElement,
    pub target: crate::elliptic::JacobiCode,
    pub entry: GlyphEntry,
}

/// Everything needed to evaluate the identities of one row at one `k`.
#[derive(Debug, Clone)]
pub struct RowContext {
    pub sub: Substitution,
    pub source: Elliptic,
    pub image: Elliptic,
}

impl RowContext {
    pub fn new(rec: &TransformationRecord, k: C64) -> Result<Self> {
        let source = Elliptic::with_guard(k, DEFAULT_POLE_GUARD)?;
        let sub = Substitution::from_record(rec, &source.md);
        check_kappa(sub.kappa)?;
        let image = Elliptic::with_guard(sub.kappa, DEFAULT_POLE_GUARD)?;
        Ok(RowContext { sub, source, image })
    }
}

impl RowIdentity {
    /// Both sides at `u`.
    pub fn evaluate(&self, ctx: &RowContext, u: C64) -> Result<(C64, C64)> {
        evaluate_entry(ctx, self.target, &self.entry, u)
    }
}

pub fn evaluate_entry(
    ctx: &RowContext,
    target: crate::elliptic::JacobiCode,
    entry: &GlyphEntry,
    u: C64,
) -> Result<(C64, C64)> {
    let lhs = ctx.image.glyph(target, ctx.sub.apply(u))?;
    let md = &ctx.source.md;
    let rhs = entry.coef.eval(md.k, md.kp) * ctx.source.glyph(entry.glyph, u)?;
    Ok((lhs, rhs))
}

pub fn jacobi_transform_row(x: GIIElement) -> [RowIdentity; 3] {
    x.record().entries().map(|(target, entry)| RowIdentity { element: x, target, entry })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perms_are_faithful() {
        let mut seen = std::collections::HashSet::new();
        for x in GIIElement::all() {
            assert!(seen.insert(x.perm()), "{x}");
        }
        assert_eq!(seen.len(), 24);
    }

    #[test]
    fn klein_relations() {
        let i = |n| GIIElement { anh: Anh::I, shift: n };
        assert_eq!(gii_compose(i(1), i(2)), i(3));
        assert_eq!(gii_compose(i(2), i(3)), i(1));
        let b0: GIIElement = "B0".parse().unwrap();
        assert_eq!(gii_compose(b0, b0), GIIElement::IDENTITY);
    }

    #[test]
    fn sign_vector_parsing() {
        let s: SignVector = "+-+-".parse().unwrap();
        assert_eq!(s.to_string(), "+-+-");
        assert_eq!(SignVector::from_index(s.index()), s);
    }

    #[test]
    fn matrix_round_trip() {
        for g in GroupElement::all() {
            assert_eq!(GroupElement::from_matrix(&g.matrix()), Some(g));
        }
    }
}
