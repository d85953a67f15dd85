//! Machine-readable transformation tables.
//!
//! Two record kinds, one per line of a JSONL file:
//! [`TransformationRecord`] (24 rows, one per half-period map) and
//! [`AnhRecord`] (6 rows, one per anharmonic element). Scalars are short
//! symbolic strings such as `-ik'/k` so that the files stay readable and
//! diff cleanly; [`Scalar`] and friends parse them back.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::elliptic::{JacobiCode, C64, I};
use crate::error::{Error, Result};

/// The six anharmonic elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Anh {
    I,
    A,
    B,
    C,
    D,
    E,
}

impl Anh {
    pub const ALL: [Anh; 6] = [Anh::I, Anh::A, Anh::B, Anh::C, Anh::D, Anh::E];

    pub fn letter(self) -> char {
        match self {
            Anh::I => 'I',
            Anh::A => 'A',
            Anh::B => 'B',
            Anh::C => 'C',
            Anh::D => 'D',
            Anh::E => 'E',
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl FromStr for Anh {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Anh::ALL
            .into_iter()
            .find(|a| s.len() == 1 && s.starts_with(a.letter()))
            .ok_or_else(|| Error::Domain(format!("unknown anharmonic element '{s}'")))
    }
}

macro_rules! string_serde {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.serialize_str(&self.to_string())
            }
        }
        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

/// Real factors built from `k` and `k'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Factor {
    One,
    K,
    InvK,
    Kp,
    InvKp,
    KOverKp,
    KpOverK,
}

impl Factor {
    pub const ALL: [Factor; 7] = [
        Factor::One,
        Factor::K,
        Factor::InvK,
        Factor::Kp,
        Factor::InvKp,
        Factor::KOverKp,
        Factor::KpOverK,
    ];

    fn token(self) -> &'static str {
        match self {
            Factor::One => "1",
            Factor::K => "k",
            Factor::InvK => "1/k",
            Factor::Kp => "k'",
            Factor::InvKp => "1/k'",
            Factor::KOverKp => "k/k'",
            Factor::KpOverK => "k'/k",
        }
    }

    pub fn eval(self, k: C64, kp: C64) -> C64 {
        let one = C64::new(1.0, 0.0);
        match self {
            Factor::One => one,
            Factor::K => k,
            Factor::InvK => one / k,
            Factor::Kp => kp,
            Factor::InvKp => one / kp,
            Factor::KOverKp => k / kp,
            Factor::KpOverK => kp / k,
        }
    }
}

/// A fourth root of unity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    One,
    MinusOne,
    Imag,
    MinusImag,
}

impl Unit {
    pub const ALL: [Unit; 4] = [Unit::One, Unit::MinusOne, Unit::Imag, Unit::MinusImag];

    pub fn value(self) -> C64 {
        match self {
            Unit::One => C64::new(1.0, 0.0),
            Unit::MinusOne => C64::new(-1.0, 0.0),
            Unit::Imag => I,
            Unit::MinusImag => -I,
        }
    }
}

/// `unit * factor`, written like `-ik'/k`, `k`, `-1` or `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scalar {
    pub unit: Unit,
    pub factor: Factor,
}

impl Scalar {
    pub const ONE: Scalar = Scalar { unit: Unit::One, factor: Factor::One };

    pub fn new(unit: Unit, factor: Factor) -> Self {
        Scalar { unit, factor }
    }

    pub fn eval(&self, k: C64, kp: C64) -> C64 {
        self.unit.value() * self.factor.eval(k, kp)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.unit {
            Unit::One => "",
            Unit::MinusOne => "-",
            Unit::Imag => "i",
            Unit::MinusImag => "-i",
        };
        match (self.factor, self.unit) {
            (Factor::One, Unit::One) => f.write_str("1"),
            (Factor::One, Unit::MinusOne) => f.write_str("-1"),
            (Factor::One, _) => f.write_str(prefix),
            // `i/k` rather than `i1/k`
            (fac, Unit::Imag | Unit::MinusImag) => write!(f, "{prefix}{}", fac.token().trim_start_matches('1')),
            (fac, _) => write!(f, "{prefix}{}", fac.token()),
        }
    }
}

impl FromStr for Scalar {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::TableData(format!("bad scalar '{s}'"));
        let (neg, rest) = match s.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, s),
        };
        let (imag, rest) = match rest.strip_prefix('i') {
            Some(r) => (true, r),
            None => (false, rest),
        };
        let padded;
        let rest = if imag && rest.starts_with('/') {
            padded = format!("1{rest}");
            padded.as_str()
        } else {
            rest
        };
        let factor = if rest.is_empty() {
            if !imag {
                return Err(bad());
            }
            Factor::One
        } else {
            Factor::ALL.into_iter().find(|f| f.token() == rest).ok_or_else(bad)?
        };
        let unit = match (neg, imag) {
            (false, false) => Unit::One,
            (true, false) => Unit::MinusOne,
            (false, true) => Unit::Imag,
            (true, true) => Unit::MinusImag,
        };
        Ok(Scalar { unit, factor })
    }
}

string_serde!(Scalar);

/// `coef * glyph(u, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GlyphEntry {
    pub coef: Scalar,
    pub glyph: JacobiCode,
}

impl fmt::Display for GlyphEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.coef.factor, self.coef.unit) {
            (Factor::One, crate::tables::Unit::One) => write!(f, "{}", self.glyph),
            _ => write!(f, "{} {}", self.coef, self.glyph),
        }
    }
}

/// Which order-two point the variable is translated by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shift {
    Zero,
    K,
    KPlusIKp,
    IKp,
}

impl Shift {
    pub const ALL: [Shift; 4] = [Shift::Zero, Shift::K, Shift::KPlusIKp, Shift::IKp];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Shift {
        Shift::ALL[i & 3]
    }

    pub fn eval(self, big_k: C64, big_kp: C64) -> C64 {
        match self {
            Shift::Zero => C64::new(0.0, 0.0),
            Shift::K => big_k,
            Shift::KPlusIKp => big_k + I * big_kp,
            Shift::IKp => I * big_kp,
        }
    }
}

impl fmt::Display for Shift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shift::Zero => "0",
            Shift::K => "K",
            Shift::KPlusIKp => "K+iK'",
            Shift::IKp => "iK'",
        })
    }
}

impl FromStr for Shift {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Shift::ALL
            .into_iter()
            .find(|x| x.to_string() == s)
            .ok_or_else(|| Error::TableData(format!("bad shift '{s}'")))
    }
}

string_serde!(Shift);

/// The four parameter slots, in equation order.
pub const SLOT_NAMES: [&str; 4] = ["xi", "eta", "mu", "nu"];

/// Parameter permutation in cycle notation over `xi eta mu nu`, e.g.
/// `(xi eta mu nu)`. A cycle `(a b ...)` sends `a` to `b`; the transformed
/// tuple holds `sigma(gamma)` in the slot of `gamma`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cycles {
    pub cycles: Vec<Vec<usize>>,
}

impl Cycles {
    /// The map `slot -> sigma(slot)` as an array.
    pub fn images(&self) -> [usize; 4] {
        let mut img = [0, 1, 2, 3];
        for cyc in &self.cycles {
            for (i, &a) in cyc.iter().enumerate() {
                img[a] = cyc[(i + 1) % cyc.len()];
            }
        }
        img
    }

    pub fn from_images(img: [usize; 4]) -> Cycles {
        let mut seen = [false; 4];
        let mut cycles = Vec::new();
        for start in 0..4 {
            if seen[start] {
                continue;
            }
            let mut cyc = vec![start];
            seen[start] = true;
            let mut j = img[start];
            while j != start {
                seen[j] = true;
                cyc.push(j);
                j = img[j];
            }
            if cyc.len() > 1 {
                cycles.push(cyc);
            }
        }
        Cycles { cycles }
    }

    pub fn inverse(&self) -> Cycles {
        let img = self.images();
        let mut inv = [0; 4];
        for (a, &b) in img.iter().enumerate() {
            inv[b] = a;
        }
        Cycles::from_images(inv)
    }
}

impl fmt::Display for Cycles {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cycles.is_empty() {
            return f.write_str("()");
        }
        for cyc in &self.cycles {
            let names: Vec<&str> = cyc.iter().map(|&i| SLOT_NAMES[i]).collect();
            write!(f, "({})", names.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for Cycles {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::TableData(format!("bad cycle notation '{s}'"));
        let mut cycles = Vec::new();
        let mut used = [false; 4];
        for part in s.split(')') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let inner = part.strip_prefix('(').ok_or_else(bad)?;
            let mut cyc = Vec::new();
            for name in inner.split_whitespace() {
                let i = SLOT_NAMES.iter().position(|n| *n == name).ok_or_else(bad)?;
                if used[i] {
                    return Err(bad());
                }
                used[i] = true;
                cyc.push(i);
            }
            if cyc.len() > 1 {
                cycles.push(cyc);
            }
        }
        Ok(Cycles { cycles })
    }
}

string_serde!(Cycles);

/// One row of the 24-row table: `w = scale * (u + shift)`, modulus
/// `kappa`, and the three identities `sn(w, kappa) = coef * glyph(u, k)`
/// (likewise cn, dn).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformationRecord {
    pub id: String,
    pub anh: Anh,
    pub shift: Shift,
    pub scale: Scalar,
    pub modulus: Scalar,
    pub sn: GlyphEntry,
    pub cn: GlyphEntry,
    pub dn: GlyphEntry,
    pub sigma: Cycles,
}

impl TransformationRecord {
    pub fn entries(&self) -> [(JacobiCode, GlyphEntry); 3] {
        [(JacobiCode::Sn, self.sn), (JacobiCode::Cn, self.cn), (JacobiCode::Dn, self.dn)]
    }

    pub fn entry_mut(&mut self, target: JacobiCode) -> &mut GlyphEntry {
        match target {
            JacobiCode::Sn => &mut self.sn,
            JacobiCode::Cn => &mut self.cn,
            _ => &mut self.dn,
        }
    }
}

/// Gaussian integer `a + b i` used as a coefficient of `K` or `K'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Gauss {
    pub re: i32,
    pub im: i32,
}

impl Gauss {
    pub fn value(self) -> C64 {
        C64::new(self.re as f64, self.im as f64)
    }
}

impl fmt::Display for Gauss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let imag = |b: i32| match b {
            1 => "i".to_string(),
            -1 => "-i".to_string(),
            b => format!("{b}i"),
        };
        match (self.re, self.im) {
            (a, 0) => write!(f, "{a}"),
            (0, b) => f.write_str(&imag(b)),
            (a, b) if b > 0 => write!(f, "{a}+{}", imag(b)),
            (a, b) => write!(f, "{a}{}", imag(b)),
        }
    }
}

impl FromStr for Gauss {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::TableData(format!("bad Gaussian integer '{s}'"));
        let parse_im = |t: &str| -> Result<i32> {
            let t = t.strip_suffix('i').ok_or_else(bad)?;
            match t {
                "" | "+" => Ok(1),
                "-" => Ok(-1),
                t => t.trim_start_matches('+').parse().map_err(|_| bad()),
            }
        };
        if !s.ends_with('i') {
            return Ok(Gauss { re: s.parse().map_err(|_| bad())?, im: 0 });
        }
        let split = s[1..].rfind(['+', '-']).map(|p| p + 1);
        match split {
            Some(p) => Ok(Gauss { re: s[..p].parse().map_err(|_| bad())?, im: parse_im(&s[p..])? }),
            None => Ok(Gauss { re: 0, im: parse_im(s)? }),
        }
    }
}

string_serde!(Gauss);

/// `scale * (k_coef K(k) + kp_coef K'(k))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuarterExpr {
    pub scale: Scalar,
    pub k_coef: Gauss,
    pub kp_coef: Gauss,
}

impl QuarterExpr {
    pub fn eval(&self, k: C64, kp: C64, big_k: C64, big_kp: C64) -> C64 {
        self.scale.eval(k, kp) * (self.k_coef.value() * big_k + self.kp_coef.value() * big_kp)
    }
}

impl fmt::Display for QuarterExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = String::new();
        for (g, sym) in [(self.k_coef, "K"), (self.kp_coef, "K'")] {
            if g == (Gauss { re: 0, im: 0 }) {
                continue;
            }
            let c = match g.to_string().as_str() {
                "1" => String::new(),
                "-1" => "-".into(),
                t if g.re != 0 && g.im != 0 => format!("({t})"),
                t => t.to_string(),
            };
            if !terms.is_empty() && !c.starts_with('-') {
                terms.push('+');
            }
            terms.push_str(&c);
            terms.push_str(sym);
        }
        if terms.is_empty() {
            terms.push('0');
        }
        write!(f, "{}({terms})", self.scale)
    }
}

/// The six images of `lambda` under the anharmonic group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CrossRatio {
    Id,
    OverMinusOne,
    Inverse,
    OneMinus,
    MinusOneOver,
    InverseOneMinus,
}

impl CrossRatio {
    pub const ALL: [CrossRatio; 6] = [
        CrossRatio::Id,
        CrossRatio::OverMinusOne,
        CrossRatio::Inverse,
        CrossRatio::OneMinus,
        CrossRatio::MinusOneOver,
        CrossRatio::InverseOneMinus,
    ];

    pub fn apply(self, l: C64) -> C64 {
        let one = C64::new(1.0, 0.0);
        match self {
            CrossRatio::Id => l,
            CrossRatio::OverMinusOne => l / (l - one),
            CrossRatio::Inverse => one / l,
            CrossRatio::OneMinus => one - l,
            CrossRatio::MinusOneOver => (l - one) / l,
            CrossRatio::InverseOneMinus => one / (one - l),
        }
    }
}

impl fmt::Display for CrossRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CrossRatio::Id => "l",
            CrossRatio::OverMinusOne => "l/(l-1)",
            CrossRatio::Inverse => "1/l",
            CrossRatio::OneMinus => "1-l",
            CrossRatio::MinusOneOver => "(l-1)/l",
            CrossRatio::InverseOneMinus => "1/(1-l)",
        })
    }
}

impl FromStr for CrossRatio {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CrossRatio::ALL
            .into_iter()
            .find(|x| x.to_string() == s)
            .ok_or_else(|| Error::TableData(format!("bad cross ratio '{s}'")))
    }
}

string_serde!(CrossRatio);

/// Permutation of `e1, e2, e3` in cycle notation, e.g. `(e1 e2 e3)` sends
/// `e1` to `e2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EPerm {
    pub images: [usize; 3],
}

impl fmt::Display for EPerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut seen = [false; 3];
        let mut any = false;
        for start in 0..3 {
            if seen[start] {
                continue;
            }
            let mut cyc = vec![start];
            seen[start] = true;
            let mut j = self.images[start];
            while j != start {
                seen[j] = true;
                cyc.push(j);
                j = self.images[j];
            }
            if cyc.len() > 1 {
                any = true;
                let names: Vec<String> = cyc.iter().map(|i| format!("e{}", i + 1)).collect();
                write!(f, "({})", names.join(" "))?;
            }
        }
        if !any {
            f.write_str("()")?;
        }
        Ok(())
    }
}

impl FromStr for EPerm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::TableData(format!("bad e-permutation '{s}'"));
        let mut images = [0, 1, 2];
        for part in s.split(')') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let inner = part.strip_prefix('(').ok_or_else(bad)?;
            let idx: Vec<usize> = inner
                .split_whitespace()
                .map(|t| match t {
                    "e1" => Ok(0),
                    "e2" => Ok(1),
                    "e3" => Ok(2),
                    _ => Err(bad()),
                })
                .collect::<Result<_>>()?;
            for (i, &a) in idx.iter().enumerate() {
                images[a] = idx[(i + 1) % idx.len()];
            }
        }
        Ok(EPerm { images })
    }
}

string_serde!(EPerm);

/// Accessory-parameter map in Jacobi form; `S` is the sum of
/// `gamma(gamma+1)` over the four parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HMap {
    Identity,
    ShiftedOverKp2,
    Reflected,
    OverK2,
    ReflectedOverKp2,
    ReflectedOverK2,
    /// As transcribed for row D: carries an extra factor `h`.
    HTimesReflectedOverKp2,
}

impl HMap {
    pub fn eval(self, h: C64, s: C64, k: C64) -> C64 {
        let k2 = k * k;
        let kp2 = C64::new(1.0, 0.0) - k2;
        match self {
            HMap::Identity => h,
            HMap::ShiftedOverKp2 => (h - k2 * s) / kp2,
            HMap::Reflected => -h + s,
            HMap::OverK2 => h / k2,
            HMap::ReflectedOverKp2 => (-h + s) / kp2,
            HMap::ReflectedOverK2 => -h / k2 + s,
            HMap::HTimesReflectedOverKp2 => h * (-h + s) / kp2,
        }
    }
}

impl fmt::Display for HMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HMap::Identity => "h",
            HMap::ShiftedOverKp2 => "(h-k^2 S)/k'^2",
            HMap::Reflected => "-h+S",
            HMap::OverK2 => "h/k^2",
            HMap::ReflectedOverKp2 => "(-h+S)/k'^2",
            HMap::ReflectedOverK2 => "-h/k^2+S",
            HMap::HTimesReflectedOverKp2 => "h(-h+S)/k'^2",
        })
    }
}

impl FromStr for HMap {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [
            HMap::Identity,
            HMap::ShiftedOverKp2,
            HMap::Reflected,
            HMap::OverK2,
            HMap::ReflectedOverKp2,
            HMap::ReflectedOverK2,
            HMap::HTimesReflectedOverKp2,
        ]
        .into_iter()
        .find(|x| x.to_string() == s)
        .ok_or_else(|| Error::TableData(format!("bad accessory map '{s}'")))
    }
}

string_serde!(HMap);

/// Weierstrass-form accessory factor: `h_X = factor(tau) * h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WFactor {
    One,
    TauMinusOneSquared,
    TauSquared,
}

impl WFactor {
    pub fn eval(self, tau: C64) -> C64 {
        match self {
            WFactor::One => C64::new(1.0, 0.0),
            WFactor::TauMinusOneSquared => (tau - 1.0) * (tau - 1.0),
            WFactor::TauSquared => tau * tau,
        }
    }
}

impl fmt::Display for WFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WFactor::One => "1",
            WFactor::TauMinusOneSquared => "(tau-1)^2",
            WFactor::TauSquared => "tau^2",
        })
    }
}

impl FromStr for WFactor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [WFactor::One, WFactor::TauMinusOneSquared, WFactor::TauSquared]
            .into_iter()
            .find(|x| x.to_string() == s)
            .ok_or_else(|| Error::TableData(format!("bad Weierstrass factor '{s}'")))
    }
}

string_serde!(WFactor);

/// One anharmonic element: lambda action, e-permutation, the Jacobi
/// modulus and quarter-period transformation, and the accessory maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnhRecord {
    pub anh: Anh,
    pub matrix: [[i32; 2]; 2],
    pub cross_ratio: CrossRatio,
    pub rho: EPerm,
    pub scale: Scalar,
    pub modulus: Scalar,
    pub complement: Scalar,
    pub quarter_k: QuarterExpr,
    pub quarter_kp: QuarterExpr,
    pub sn: GlyphEntry,
    pub cn: GlyphEntry,
    pub dn: GlyphEntry,
    pub h_jacobi: HMap,
    pub h_weierstrass: WFactor,
}

impl AnhRecord {
    pub fn entries(&self) -> [(JacobiCode, GlyphEntry); 3] {
        [(JacobiCode::Sn, self.sn), (JacobiCode::Cn, self.cn), (JacobiCode::Dn, self.dn)]
    }

    pub fn entry_mut(&mut self, target: JacobiCode) -> &mut GlyphEntry {
        match target {
            JacobiCode::Sn => &mut self.sn,
            JacobiCode::Cn => &mut self.cn,
            _ => &mut self.dn,
        }
    }
}

pub fn parse_jsonl<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::TableData(format!("line {}: {e}", i + 1))))
        .collect()
}

pub fn to_jsonl<T: Serialize>(rows: &[T]) -> String {
    let mut out = String::new();
    for r in rows {
        out.push_str(&serde_json::to_string(r).expect("table rows serialize"));
        out.push('\n');
    }
    out
}

/// Frozen (post-adjudication) data shipped with the crate.
pub const FROZEN_TRANSFORMATIONS: &str = include_str!("../data/transformations.jsonl");
pub const FROZEN_ANH: &str = include_str!("../data/anh.jsonl");
/// The tables as transcribed, before adjudication.
pub const TRANSCRIBED_TRANSFORMATIONS: &str = include_str!("../data/transcribed/transformations.jsonl");
pub const TRANSCRIBED_ANH: &str = include_str!("../data/transcribed/anh.jsonl");

pub struct Tables {
    pub rows: Vec<TransformationRecord>,
    pub anh: Vec<AnhRecord>,
}

impl Tables {
    pub fn parse(rows: &str, anh: &str) -> Result<Tables> {
        let rows: Vec<TransformationRecord> = parse_jsonl(rows)?;
        let anh: Vec<AnhRecord> = parse_jsonl(anh)?;
        if rows.len() != 24 || anh.len() != 6 {
            return Err(Error::TableData(format!("expected 24 + 6 rows, got {} + {}", rows.len(), anh.len())));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.anh != Anh::ALL[i / 4] || r.id != format!("{}{}", r.anh.letter(), i % 4) {
                return Err(Error::TableData(format!("row {} out of canonical order", r.id)));
            }
        }
        for (i, a) in anh.iter().enumerate() {
            if a.anh != Anh::ALL[i] {
                return Err(Error::TableData("anharmonic rows out of order".into()));
            }
        }
        Ok(Tables { rows, anh })
    }

    pub fn row(&self, anh: Anh, shift: usize) -> &TransformationRecord {
        &self.rows[anh.index() * 4 + (shift & 3)]
    }

    pub fn anh(&self, anh: Anh) -> &AnhRecord {
        &self.anh[anh.index()]
    }
}

/// The frozen tables, parsed once.
pub fn frozen() -> &'static Tables {
    static CELL: OnceLock<Tables> = OnceLock::new();
    CELL.get_or_init(|| Tables::parse(FROZEN_TRANSFORMATIONS, FROZEN_ANH).expect("frozen tables are well formed"))
}

pub fn transcribed() -> Result<Tables> {
    Tables::parse(TRANSCRIBED_TRANSFORMATIONS, TRANSCRIBED_ANH)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_round_trip() {
        for s in ["1", "-1", "i", "-i", "k", "-ik'/k", "ik/k'", "1/k'", "-k'", "ik'", "-i/k", "i/k'"] {
            assert_eq!(s.parse::<Scalar>().unwrap().to_string(), s);
        }
        assert!("q".parse::<Scalar>().is_err());
    }

    #[test]
    fn gauss_round_trip() {
        for s in ["0", "1", "-1", "i", "-i", "1+i", "1-i", "-1+i", "2i"] {
            assert_eq!(s.parse::<Gauss>().unwrap().to_string(), s, "{s}");
        }
    }

    #[test]
    fn cycles_parse_and_map() {
        let c: Cycles = "(xi)(eta)(mu nu)".parse().unwrap();
        assert_eq!(c.images(), [0, 1, 3, 2]);
        assert_eq!(c.to_string(), "(mu nu)");
        let c: Cycles = "(xi eta mu nu)".parse().unwrap();
        assert_eq!(c.images(), [1, 2, 3, 0]);
        assert_eq!(c.inverse().images(), [3, 0, 1, 2]);
    }

    #[test]
    fn eperm_round_trip() {
        for s in ["()", "(e2 e3)", "(e1 e2 e3)", "(e1 e3 e2)"] {
            assert_eq!(s.parse::<EPerm>().unwrap().to_string(), s);
        }
        assert_eq!("(e1 e2 e3)".parse::<EPerm>().unwrap().images, [1, 2, 0]);
    }

    #[test]
    fn frozen_tables_load() {
        let t = frozen();
        assert_eq!(t.rows.len(), 24);
        assert_eq!(t.anh.len(), 6);
    }
}
