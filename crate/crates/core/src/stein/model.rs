use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::dist::{Coordinate, ProductDistribution};
use crate::error::{Error, Result};
use crate::matcore::{dilation, HermitianMatrix, RectMatrix};
use crate::rng;

/// Default cap on the number of outcomes swept by exact enumeration.
pub const ENUMERATION_BUDGET: usize = 100_000;

pub type HFn = Arc<dyn Fn(&[f64]) -> HermitianMatrix + Send + Sync>;
pub type RectFn = Arc<dyn Fn(&[f64]) -> RectMatrix + Send + Sync>;

/// How an expectation was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// Full sweep of the product space.
    Enumeration { outcomes: usize },
    /// Closed form supplied with the model.
    Analytic,
    /// Sample average.
    MonteCarlo { samples: usize, seed: u64 },
}

impl Provenance {
    pub fn is_exact(&self) -> bool {
        !matches!(self, Self::MonteCarlo { .. })
    }
}

/// How to obtain `E H(Z)` when building a model.
#[derive(Clone, Debug)]
pub enum MeanSpec {
    Analytic(HermitianMatrix),
    Enumerate { budget: usize },
    MonteCarlo { samples: usize, seed: u64 },
}

/// The cached mean and, for Monte Carlo, its entrywise standard error
/// (Frobenius norm of the per-entry standard errors).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub matrix: HermitianMatrix,
    pub provenance: Provenance,
    pub std_error: f64,
}

/// A product distribution with a Hermitian-valued map `H`, housing
/// `X = H(Z) − E H(Z)`.
#[derive(Clone)]
pub struct MatrixModel {
    name: String,
    dist: ProductDistribution,
    dim: usize,
    h: HFn,
    mean: MeanEstimate,
}

impl fmt::Debug for MatrixModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatrixModel")
            .field("name", &self.name)
            .field("n", &self.dist.n())
            .field("dim", &self.dim)
            .field("mean", &self.mean.provenance)
            .finish()
    }
}

impl MatrixModel {
    pub fn new(
        name: impl Into<String>,
        dist: ProductDistribution,
        dim: usize,
        h: impl Fn(&[f64]) -> HermitianMatrix + Send + Sync + 'static,
        mean: MeanSpec,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Parameter("matrix dimension must be positive".into()));
        }
        let h: HFn = Arc::new(h);
        let mean = match mean {
            MeanSpec::Analytic(m) => {
                if m.dim() != dim {
                    return Err(Error::Shape(format!("mean has dimension {}, model has {dim}", m.dim())));
                }
                MeanEstimate { matrix: m, provenance: Provenance::Analytic, std_error: 0.0 }
            }
            MeanSpec::Enumerate { budget } => {
                let outcomes = check_budget(&dist, budget)?;
                let mut acc = HermitianMatrix::zeros(dim);
                for_each_outcome(&dist, |z, p| {
                    acc = &acc + &check_dim(&h, z, dim).scaled(p);
                });
                MeanEstimate { matrix: acc, provenance: Provenance::Enumeration { outcomes }, std_error: 0.0 }
            }
            MeanSpec::MonteCarlo { samples, seed } => {
                if samples < 2 {
                    return Err(Error::Parameter("Monte Carlo mean needs at least 2 samples".into()));
                }
                let mut r = rng::stream(seed, 0);
                let draws: Vec<HermitianMatrix> =
                    (0..samples).map(|_| check_dim(&h, &dist.sample(&mut r), dim)).collect();
                let (matrix, std_error) = sample_mean(&draws);
                MeanEstimate { matrix, provenance: Provenance::MonteCarlo { samples, seed }, std_error }
            }
        };
        Ok(Self { name: name.into(), dist, dim, h, mean })
    }

    /// Exact mean by enumeration when the space fits the default budget.
    pub fn enumerated(
        name: impl Into<String>,
        dist: ProductDistribution,
        dim: usize,
        h: impl Fn(&[f64]) -> HermitianMatrix + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::new(name, dist, dim, h, MeanSpec::Enumerate { budget: ENUMERATION_BUDGET })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dist(&self) -> &ProductDistribution {
        &self.dist
    }

    pub fn n(&self) -> usize {
        self.dist.n()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mean(&self) -> &MeanEstimate {
        &self.mean
    }

    pub fn h(&self, z: &[f64]) -> HermitianMatrix {
        check_dim(&self.h, z, self.dim)
    }

    pub fn h_fn(&self) -> &HFn {
        &self.h
    }

    /// `X(z) = H(z) − E H(Z)`.
    pub fn x(&self, z: &[f64]) -> HermitianMatrix {
        &self.h(z) - &self.mean.matrix
    }

    pub fn enumerate(&self, budget: usize) -> Result<Enumeration> {
        Enumeration::new(self, budget)
    }
}

fn check_dim(h: &HFn, z: &[f64], dim: usize) -> HermitianMatrix {
    let m = h(z);
    assert_eq!(m.dim(), dim, "model map returned a matrix of the wrong dimension");
    m
}

fn check_budget(dist: &ProductDistribution, budget: usize) -> Result<usize> {
    if !dist.is_finite() {
        return Err(Error::Precondition("exact enumeration needs every coordinate to be finite".into()));
    }
    let card = dist.cardinality().expect("finite");
    if card > budget as u128 {
        return Err(Error::Budget { outcomes: card, budget });
    }
    Ok(card as usize)
}

/// Sample mean of matrices and the Frobenius norm of the Bessel-corrected
/// per-entry standard errors.
pub fn sample_mean(draws: &[HermitianMatrix]) -> (HermitianMatrix, f64) {
    let n = draws.len();
    let dim = draws[0].dim();
    let mut mean = HermitianMatrix::zeros(dim);
    for m in draws {
        mean = &mean + m;
    }
    let mean = mean.scaled(1.0 / n as f64);
    if n < 2 {
        return (mean, f64::INFINITY);
    }
    let mut ss = 0.0;
    for m in draws {
        ss += (m.as_mat() - mean.as_mat()).norm_squared();
    }
    let var = ss / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

fn finite_parts(c: &Coordinate) -> (&[f64], &[f64]) {
    match c {
        Coordinate::Finite { values, probs } => (values, probs),
        _ => unreachable!("checked finite"),
    }
}

/// Visit every outcome of a finite product space with its probability, in
/// mixed-radix order with the first coordinate varying fastest.
fn for_each_outcome(dist: &ProductDistribution, mut f: impl FnMut(&[f64], f64)) {
    let parts: Vec<(&[f64], &[f64])> = dist.coords().iter().map(finite_parts).collect();
    let n = parts.len();
    let mut digits = vec![0usize; n];
    let mut z: Vec<f64> = parts.iter().map(|(v, _)| v[0]).collect();
    loop {
        let p: f64 = digits.iter().zip(&parts).map(|(&k, (_, pr))| pr[k]).product();
        f(&z, p);
        let mut j = 0;
        loop {
            if j == n {
                return;
            }
            digits[j] += 1;
            if digits[j] < parts[j].0.len() {
                z[j] = parts[j].0[digits[j]];
                break;
            }
            digits[j] = 0;
            z[j] = parts[j].0[0];
            j += 1;
        }
    }
}

/// Full sweep of a finite model: outcomes, probabilities, `H` and `X`.
#[derive(Clone, Debug)]
pub struct Enumeration {
    radices: Vec<usize>,
    strides: Vec<usize>,
    coord_values: Vec<Vec<f64>>,
    coord_probs: Vec<Vec<f64>>,
    pub probs: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub h: Vec<HermitianMatrix>,
    pub x: Vec<HermitianMatrix>,
}

impl Enumeration {
    pub fn new(model: &MatrixModel, budget: usize) -> Result<Self> {
        let card = check_budget(model.dist(), budget)?;
        let (coord_values, coord_probs): (Vec<Vec<f64>>, Vec<Vec<f64>>) = model
            .dist()
            .coords()
            .iter()
            .map(|c| {
                let (v, p) = finite_parts(c);
                (v.to_vec(), p.to_vec())
            })
            .unzip();
        let radices: Vec<usize> = coord_values.iter().map(Vec::len).collect();
        let mut strides = Vec::with_capacity(radices.len());
        let mut s = 1;
        for r in &radices {
            strides.push(s);
            s *= r;
        }
        let mut probs = Vec::with_capacity(card);
        let mut values = Vec::with_capacity(card);
        for_each_outcome(model.dist(), |z, p| {
            probs.push(p);
            values.push(z.to_vec());
        });
        let h: Vec<HermitianMatrix> = values.iter().map(|z| model.h(z)).collect();
        let x = h.iter().map(|m| m - &model.mean().matrix).collect();
        Ok(Self { radices, strides, coord_values, coord_probs, probs, values, h, x })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn n(&self) -> usize {
        self.radices.len()
    }

    pub fn dim(&self) -> usize {
        self.x[0].dim()
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    pub fn coord_probs(&self, j: usize) -> &[f64] {
        &self.coord_probs[j]
    }

    pub fn coord_values(&self, j: usize) -> &[f64] {
        &self.coord_values[j]
    }

    pub fn digit(&self, a: usize, j: usize) -> usize {
        (a / self.strides[j]) % self.radices[j]
    }

    pub fn digits(&self, a: usize) -> Vec<usize> {
        (0..self.n()).map(|j| self.digit(a, j)).collect()
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }

    /// Index of the outcome `a` with coordinate `j` replaced by its `k`-th value.
    pub fn replace(&self, a: usize, j: usize, k: usize) -> usize {
        a - self.digit(a, j) * self.strides[j] + k * self.strides[j]
    }

    /// Index of the outcome with the given coordinate values, if present.
    pub fn locate(&self, z: &[f64]) -> Option<usize> {
        if z.len() != self.n() {
            return None;
        }
        let mut a = 0;
        for (j, v) in z.iter().enumerate() {
            let k = self.coord_values[j].iter().position(|x| x == v)?;
            a += k * self.strides[j];
        }
        Some(a)
    }

    /// Conditional law of `Z′` given `Z = z_a` under the coordinate
    /// replacement pair: one entry per `(J, replacement)` with mass
    /// `π_J(v)/n`. Zero-mass replacements are skipped.
    pub fn transitions(&self, a: usize) -> Vec<(usize, f64)> {
        let n = self.n() as f64;
        let mut out = Vec::new();
        for j in 0..self.n() {
            for (k, &p) in self.coord_probs[j].iter().enumerate() {
                if p > 0.0 {
                    out.push((self.replace(a, j, k), p / n));
                }
            }
        }
        out
    }

    /// `Σ_a π(a) f(a)` for matrix-valued `f`.
    pub fn expect(&self, f: impl Fn(usize) -> HermitianMatrix) -> HermitianMatrix {
        let mut acc = HermitianMatrix::zeros(self.dim());
        for (a, &p) in self.probs.iter().enumerate() {
            if p > 0.0 {
                acc = &acc + &f(a).scaled(p);
            }
        }
        acc
    }

    /// `Σ_a π(a) f(a)` for scalar `f`.
    pub fn expect_scalar(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.probs.iter().enumerate().filter(|(_, p)| **p > 0.0).map(|(a, p)| p * f(a)).sum()
    }

    /// Average coordinate `j` out of a table indexed by outcome.
    pub fn average_out(&self, table: &[HermitianMatrix], j: usize) -> Vec<HermitianMatrix> {
        (0..self.len())
            .map(|a| {
                let mut acc = HermitianMatrix::zeros(self.dim());
                for (k, &p) in self.coord_probs[j].iter().enumerate() {
                    if p > 0.0 {
                        acc = &acc + &table[self.replace(a, j, k)].scaled(p);
                    }
                }
                acc
            })
            .collect()
    }
}

/// A product distribution with a rectangular-valued map.
#[derive(Clone)]
pub struct RectModel {
    pub name: String,
    pub dist: ProductDistribution,
    pub rows: usize,
    pub cols: usize,
    pub h: RectFn,
    pub mean: Option<RectMatrix>,
}

impl fmt::Debug for RectModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RectModel({}, {}x{})", self.name, self.rows, self.cols)
    }
}

/// Lift a rectangular model to the Hermitian dilation `H̃(z) = 𝓗(H(z))`,
/// so `‖X‖ = λ_max(X̃)` and the Hermitian machinery applies unchanged.
pub fn rectangularize(model: &RectModel) -> Result<MatrixModel> {
    let (rows, cols) = (model.rows, model.cols);
    let h = model.h.clone();
    let lifted = move |z: &[f64]| {
        let b = h(z);
        assert_eq!((b.rows(), b.cols()), (rows, cols), "rectangular map returned the wrong shape");
        dilation(&b)
    };
    let mean = match &model.mean {
        Some(m) => MeanSpec::Analytic(dilation(m)),
        None => MeanSpec::Enumerate { budget: ENUMERATION_BUDGET },
    };
    MatrixModel::new(format!("dilation({})", model.name), model.dist.clone(), rows + cols, lifted, mean)
}
