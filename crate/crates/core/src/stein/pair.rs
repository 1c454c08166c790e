use std::collections::BTreeMap;

use rand::Rng as _;

use super::model::{sample_mean, Enumeration, MatrixModel, Provenance};
use crate::error::{Error, Result};
use crate::matcore::HermitianMatrix;
use crate::rng::{self, Rng};

/// One draw of the coordinate-replacement pair.
#[derive(Clone, Debug, PartialEq)]
pub struct PairDraw {
    pub z: Vec<f64>,
    pub z_prime: Vec<f64>,
    pub j: usize,
}

/// Sampler for `(Z, Z′)` with `Z′ = Z^{(J)}`, `J` uniform on the coordinates.
#[derive(Debug)]
pub struct ExchangeablePairSampler<'a> {
    model: &'a MatrixModel,
    rng: Rng,
}

pub fn make_exchangeable_pair(model: &MatrixModel, seed: u64) -> ExchangeablePairSampler<'_> {
    ExchangeablePairSampler { model, rng: rng::stream(seed, 0) }
}

impl ExchangeablePairSampler<'_> {
    pub fn sample(&mut self) -> PairDraw {
        let dist = self.model.dist();
        let z = dist.sample(&mut self.rng);
        let j = self.rng.random_range(0..dist.n());
        let mut z_prime = z.clone();
        z_prime[j] = dist.coord(j).sample(&mut self.rng);
        PairDraw { z, z_prime, j }
    }
}

/// Exact joint law of `(Z, Z′)` on outcome indices.
pub fn joint_pmf(e: &Enumeration) -> BTreeMap<(usize, usize), f64> {
    let mut out = BTreeMap::new();
    for a in 0..e.len() {
        if e.probs[a] == 0.0 {
            continue;
        }
        for (b, w) in e.transitions(a) {
            *out.entry((a, b)).or_insert(0.0) += e.probs[a] * w;
        }
    }
    out
}

/// Largest `|P(a, b) − P(b, a)|` over the joint law.
pub fn exchangeability_defect(e: &Enumeration) -> f64 {
    let pmf = joint_pmf(e);
    pmf.iter().map(|(&(a, b), p)| (p - pmf.get(&(b, a)).copied().unwrap_or(0.0)).abs()).fold(0.0, f64::max)
}

/// `V(z) = ½ Σ_j E[(H(z) − H(z^{(j)}))²]`, summing exactly over the
/// replacement values. Every coordinate must be finite.
pub fn variance_proxy(model: &MatrixModel, z: &[f64]) -> Result<HermitianMatrix> {
    if !model.dist().is_finite() {
        return Err(Error::Precondition("exact variance proxy needs finite coordinates; use variance_proxy_mc".into()));
    }
    check_len(model, z)?;
    let hz = model.h(z);
    let mut acc = HermitianMatrix::zeros(model.dim());
    let mut w = z.to_vec();
    for j in 0..model.n() {
        if let super::dist::Coordinate::Finite { values, probs } = model.dist().coord(j) {
            for (v, p) in values.iter().zip(probs) {
                if *p == 0.0 {
                    continue;
                }
                w[j] = *v;
                acc = &acc + &(&hz - &model.h(&w)).square().scaled(*p);
            }
        }
        w[j] = z[j];
    }
    Ok(acc.scaled(0.5))
}

/// A variance proxy value with its provenance and Monte Carlo error.
#[derive(Clone, Debug, PartialEq)]
pub struct ProxyValue {
    pub matrix: HermitianMatrix,
    pub provenance: Provenance,
    pub std_error: f64,
}

/// Variance proxy with replacement draws sampled: finite coordinates are
/// summed exactly, the rest use `samples` draws from stream `seed`.
pub fn variance_proxy_mc(model: &MatrixModel, z: &[f64], samples: usize, seed: u64) -> Result<ProxyValue> {
    check_len(model, z)?;
    if model.dist().is_finite() {
        return Ok(ProxyValue { matrix: variance_proxy(model, z)?, provenance: Provenance::Analytic, std_error: 0.0 });
    }
    if samples < 2 {
        return Err(Error::Parameter("at least 2 samples are needed".into()));
    }
    let hz = model.h(z);
    let mut r = rng::stream(seed, 0);
    let mut total = HermitianMatrix::zeros(model.dim());
    let mut var_sum = 0.0;
    let mut w = z.to_vec();
    for j in 0..model.n() {
        let coord = model.dist().coord(j);
        let term = match coord {
            super::dist::Coordinate::Finite { values, probs } => {
                let mut acc = HermitianMatrix::zeros(model.dim());
                for (v, p) in values.iter().zip(probs) {
                    w[j] = *v;
                    acc = &acc + &(&hz - &model.h(&w)).square().scaled(*p);
                }
                acc
            }
            _ => {
                let draws: Vec<HermitianMatrix> = (0..samples)
                    .map(|_| {
                        w[j] = coord.sample(&mut r);
                        (&hz - &model.h(&w)).square()
                    })
                    .collect();
                let (m, se) = sample_mean(&draws);
                var_sum += se * se;
                m
            }
        };
        w[j] = z[j];
        total = &total + &term;
    }
    Ok(ProxyValue {
        matrix: total.scaled(0.5),
        provenance: Provenance::MonteCarlo { samples, seed },
        std_error: 0.5 * var_sum.sqrt(),
    })
}

/// `Γ₀(a) = E[(H(Z) − H(Z′))² | Z = z_a]` from the pair's transitions.
pub fn gamma0(e: &Enumeration, a: usize) -> HermitianMatrix {
    let mut acc = HermitianMatrix::zeros(e.dim());
    for (b, w) in e.transitions(a) {
        acc = &acc + &(&e.h[a] - &e.h[b]).square().scaled(w);
    }
    acc
}

fn check_len(model: &MatrixModel, z: &[f64]) -> Result<()> {
    if z.len() != model.n() {
        return Err(Error::Shape(format!("outcome has {} coordinates, model has {}", z.len(), model.n())));
    }
    Ok(())
}
