//! The 192 local solutions: one Darboux series per transformation and per
//! choice of exponent branch on the first three parameters.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elliptic::{Elliptic, C64};
use crate::error::{Error, Result};
use crate::series::{termination_check, LVariant, Radius, SeriesSolution};
use crate::symmetry::{gi_apply, sigma_and_h, substitution, GIIElement, ParamTuple, SignVector, Substitution};
use crate::verify::{ode_residual, ResidualReport, DEFAULT_STEP};

/// `(signs on xi, eta, mu; element)`; `true` flips `gamma -> -gamma - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SolutionId {
    pub signs: [bool; 3],
    pub gii: GIIElement,
}

impl SolutionId {
    pub fn index(&self) -> usize {
        let s = self.signs.iter().enumerate().map(|(t, &b)| (b as usize) << (2 - t)).sum::<usize>();
        self.gii.index() * 8 + s
    }

    pub fn from_index(i: usize) -> Result<SolutionId> {
        if i >= 192 {
            return Err(Error::Domain(format!("solution index {i} out of range")));
        }
        let s = i % 8;
        Ok(SolutionId { signs: [s & 4 != 0, s & 2 != 0, s & 1 != 0], gii: GIIElement::all()[i / 8] })
    }

    pub fn sign_vector(&self) -> SignVector {
        SignVector([self.signs[0], self.signs[1], self.signs[2], false])
    }

    pub fn group(&self) -> SolutionGroup {
        classify(self)
    }
}

impl fmt::Display for SolutionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.signs.iter().map(|&b| if b { '-' } else { '+' }).collect();
        write!(f, "{}{s}", self.gii)
    }
}

impl FromStr for SolutionId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("bad solution id '{s}' (expected e.g. A1+-+)"));
        if s.len() != 5 || !s.is_ascii() {
            return Err(bad());
        }
        let gii: GIIElement = s[..2].parse().map_err(|_| bad())?;
        let mut signs = [false; 3];
        for (t, ch) in s[2..].chars().enumerate() {
            signs[t] = match ch {
                '+' => false,
                '-' => true,
                _ => return Err(bad()),
            };
        }
        Ok(SolutionId { signs, gii })
    }
}

impl Serialize for SolutionId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SolutionId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// All ids, ordered by element then by signs.
pub fn enumerate_192() -> Vec<SolutionId> {
    (0..192).map(|i| SolutionId::from_index(i).expect("in range")).collect()
}

/// The singular point a solution is expanded at and which of the two
/// exponents there it carries (`minus` picks `-gamma`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SolutionGroup {
    pub point: usize,
    pub minus: bool,
}

impl fmt::Display for SolutionGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.point, if self.minus { '-' } else { '+' })
    }
}

pub fn classify(id: &SolutionId) -> SolutionGroup {
    SolutionGroup { point: id.gii.shift, minus: id.signs[0] }
}

/// Parameters of the series behind `id`.
pub fn transformed_params(id: &SolutionId, p: &ParamTuple) -> Result<ParamTuple> {
    Ok(gi_apply(id.sign_vector(), &sigma_and_h(id.gii, p)?))
}

/// A catalog entry made concrete for one parameter tuple.
#[derive(Debug, Clone)]
pub struct Instantiated {
    pub id: SolutionId,
    pub params: ParamTuple,
    pub sub: Substitution,
    pub image: Elliptic,
    pub solution: SeriesSolution,
}

impl Instantiated {
    /// `y(u) = Dl(w(u))`, a solution of the equation for the original tuple.
    pub fn eval(&self, u: C64) -> Result<C64> {
        Ok(self.solution.eval(&self.image, self.sub.apply(u))?.value)
    }

    /// Largest `|w|` at which the series is summed safely.
    pub fn sample_radius(&self) -> f64 {
        let kappa2 = (self.sub.kappa * self.sub.kappa).norm();
        let r = match self.solution.radius {
            Radius::Polynomial => 1.0f64.min(1.0 / kappa2),
            Radius::Finite { value } => (value * value).min(1.0).min(1.0 / kappa2),
        };
        0.3 * r.sqrt()
    }

    /// Points on a circle of radius `sample_radius` around the expansion
    /// point, in the original variable.
    pub fn sample_points(&self, n: usize) -> Vec<C64> {
        let rho = self.sample_radius();
        (0..n)
            .map(|j| {
                let theta = 0.3 + std::f64::consts::TAU * j as f64 / n as f64;
                self.sub.invert(C64::from_polar(rho, theta))
            })
            .collect()
    }
}

pub fn instantiate(id: &SolutionId, p: &ParamTuple, n: usize, depth: usize, variant: LVariant) -> Result<Instantiated> {
    let params = transformed_params(id, p)?;
    let sub = substitution(id.gii, p.k)?;
    let image = Elliptic::new(sub.kappa)?;
    let solution = SeriesSolution::new(&params, n, depth, variant)?;
    Ok(Instantiated { id: *id, params, sub, image, solution })
}

/// The termination relation of the series behind `id`, whatever `h` is.
pub fn transformed_termination(id: &SolutionId, p: &ParamTuple) -> Result<Option<usize>> {
    Ok(termination_check(&transformed_params(id, p)?))
}

pub fn transformed_convergence(id: &SolutionId, p: &ParamTuple, depth: usize, variant: LVariant) -> Result<Radius> {
    crate::series::convergence_domain(&transformed_params(id, p)?, depth, variant)
}

/// One id per element, with signs drawn from `seed`.
pub fn seeded_ids(seed: u64) -> Vec<SolutionId> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GIIElement::all()
        .iter()
        .map(|&gii| SolutionId { signs: [rng.gen(), rng.gen(), rng.gen()], gii })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CatalogCheck {
    pub id: SolutionId,
    pub group: SolutionGroup,
    pub terminated_at: Option<usize>,
    pub report: ResidualReport,
}

/// Residual of each catalog solution against the original equation.
pub fn verify_ids(ids: &[SolutionId], p: &ParamTuple, n: usize, depth: usize, variant: LVariant) -> Result<Vec<CatalogCheck>> {
    ids.par_iter()
        .map(|id| {
            let inst = instantiate(id, p, n, depth, variant)?;
            let grid = inst.sample_points(12);
            let f = |u: C64| inst.eval(u);
            let report = ode_residual(&f, p, &grid, DEFAULT_STEP)?;
            Ok(CatalogCheck { id: *id, group: classify(id), terminated_at: inst.solution.terminated_at, report })
        })
        .collect()
}

/// Direction in which neither expansion variable meets the cut of the
/// principal power, as seen from the original variable.
fn clear_direction(a: &Instantiated, b: &Instantiated) -> f64 {
    let margin = |phi: f64| {
        [a.sub.scale, b.sub.scale]
            .iter()
            .map(|s| (std::f64::consts::PI - (s.arg() + phi).rem_euclid(std::f64::consts::TAU) + 0.0).abs())
            .map(|d| d.min(std::f64::consts::TAU - d).min(std::f64::consts::PI))
            .fold(f64::INFINITY, f64::min)
    };
    (0..32)
        .map(|j| std::f64::consts::TAU * j as f64 / 32.0)
        .max_by(|x, y| margin(*x).total_cmp(&margin(*y)))
        .unwrap_or(0.0)
}

/// Largest relative spread of `y_a / y_b` over points near the shared
/// expansion point.
pub fn proportionality_deviation(
    a: &SolutionId,
    b: &SolutionId,
    p: &ParamTuple,
    n: usize,
    depth: usize,
    variant: LVariant,
) -> Result<f64> {
    if classify(a) != classify(b) {
        return Err(Error::Domain(format!("{a} and {b} lie in different groups")));
    }
    let ia = instantiate(a, p, n, depth, variant)?;
    let ib = instantiate(b, p, n, depth, variant)?;
    let reach = (ia.sample_radius() / ia.sub.scale.norm()).min(ib.sample_radius() / ib.sub.scale.norm());
    let phi = clear_direction(&ia, &ib);
    let centre = ia.sub.invert(C64::new(0.0, 0.0));
    let ratios: Vec<C64> = (0..8)
        .map(|j| {
            let r = reach * (0.5 + 0.5 * j as f64 / 7.0);
            let u = centre + C64::from_polar(r, phi + 0.4 * (j as f64 / 7.0 - 0.5));
            Ok(ia.eval(u)? / ib.eval(u)?)
        })
        .collect::<Result<_>>()?;
    let r0 = ratios[0];
    Ok(ratios.iter().map(|r| (r - r0).norm() / r0.norm()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for (i, id) in enumerate_192().iter().enumerate() {
            assert_eq!(id.index(), i);
            assert_eq!(id.to_string().parse::<SolutionId>().unwrap(), *id);
        }
    }

    #[test]
    fn eight_groups_of_24() {
        let mut counts = std::collections::BTreeMap::new();
        for id in enumerate_192() {
            *counts.entry(classify(&id)).or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 8);
        assert!(counts.values().all(|&c| c == 24));
    }
}
