use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Tolerance on the total mass of a finite coordinate.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// Law of one coordinate `Z_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Coordinate {
    Finite { values: Vec<f64>, probs: Vec<f64> },
    Uniform { lo: f64, hi: f64 },
    Gaussian { mean: f64, sd: f64 },
}

impl Coordinate {
    pub fn finite(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        let c = Self::Finite { values, probs };
        c.validate()?;
        Ok(c)
    }

    /// Uniform on `{−1, +1}`.
    pub fn rademacher() -> Self {
        Self::Finite { values: vec![-1.0, 1.0], probs: vec![0.5, 0.5] }
    }

    /// A point mass.
    pub fn constant(value: f64) -> Self {
        Self::Finite { values: vec![value], probs: vec![1.0] }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Finite { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return Err(Error::Shape("finite coordinate needs matching nonempty values and probs".into()));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Parameter("coordinate values must be finite".into()));
                }
                if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
                    return Err(Error::Parameter("probabilities must be nonnegative".into()));
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > PROB_SUM_TOL {
                    return Err(Error::Parameter(format!("probabilities sum to {total}, not 1")));
                }
            }
            Self::Uniform { lo, hi } => {
                if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                    return Err(Error::Parameter(format!("uniform coordinate needs lo < hi, got [{lo}, {hi}]")));
                }
            }
            Self::Gaussian { mean, sd } => {
                if !mean.is_finite() || !(*sd >= 0.0) || !sd.is_finite() {
                    return Err(Error::Parameter("gaussian coordinate needs finite mean and sd >= 0".into()));
                }
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Self::Finite { .. })
    }

    pub fn support_size(&self) -> Option<usize> {
        match self {
            Self::Finite { values, .. } => Some(values.len()),
            _ => None,
        }
    }

    pub fn sample(&self, rng: &mut Rng) -> f64 {
        match self {
            Self::Finite { values, probs } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (v, p) in values.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *v;
                    }
                }
                // Roundoff left a sliver of mass: return the last atom with positive probability.
                let last = probs.iter().rposition(|p| *p > 0.0).unwrap_or(values.len() - 1);
                values[last]
            }
            Self::Uniform { lo, hi } => rng.random_range(*lo..*hi),
            Self::Gaussian { mean, sd } => {
                if *sd == 0.0 {
                    *mean
                } else {
                    Normal::new(*mean, *sd).expect("validated").sample(rng)
                }
            }
        }
    }
}

/// Independent coordinates `Z = (Z_1, …, Z_n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Coordinate>", into = "Vec<Coordinate>")]
pub struct ProductDistribution {
    coords: Vec<Coordinate>,
}

impl TryFrom<Vec<Coordinate>> for ProductDistribution {
    type Error = Error;

    fn try_from(coords: Vec<Coordinate>) -> Result<Self> {
        Self::new(coords)
    }
}

impl From<ProductDistribution> for Vec<Coordinate> {
    fn from(d: ProductDistribution) -> Self {
        d.coords
    }
}

impl ProductDistribution {
    pub fn new(coords: Vec<Coordinate>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Parameter("a product distribution needs at least one coordinate".into()));
        }
        for c in &coords {
            c.validate()?;
        }
        Ok(Self { coords })
    }

    pub fn iid(n: usize, c: Coordinate) -> Result<Self> {
        Self::new(vec![c; n])
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Coordinate] {
        &self.coords
    }

    pub fn coord(&self, j: usize) -> &Coordinate {
        &self.coords[j]
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(Coordinate::is_finite)
    }

    /// Number of outcomes, if every coordinate is finite.
    pub fn cardinality(&self) -> Option<u128> {
        self.coords
            .iter()
            .map(|c| c.support_size().map(|s| s as u128))
            .try_fold(1u128, |acc, s| s.map(|s| acc.saturating_mul(s)))
    }

    pub fn sample(&self, rng: &mut Rng) -> Vec<f64> {
        self.coords.iter().map(|c| c.sample(rng)).collect()
    }
}
