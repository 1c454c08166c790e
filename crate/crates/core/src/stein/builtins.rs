use std::collections::HashMap;
use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::dist::{Coordinate, ProductDistribution};
use super::model::{rectangularize, MatrixModel, MeanSpec, RectModel, ENUMERATION_BUDGET};
use crate::error::{Error, Result};
use crate::matcore::{CMat, HermitianMatrix, RectMatrix, C64};
use crate::rng::{self, Rng};

/// Largest coordinate count or matrix dimension accepted from a spec.
pub const MAX_SPEC_SIZE: usize = 64;

/// How compound covariance entries are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EntryDist {
    /// Uniform on `{±1}`: variance 1, magnitude 1.
    #[default]
    Rademacher,
    /// Uniform on `[−1, 1]`: variance 1/3, magnitude 1.
    Uniform,
}

impl EntryDist {
    pub fn coordinate(self) -> Coordinate {
        match self {
            Self::Rademacher => Coordinate::rademacher(),
            Self::Uniform => Coordinate::Uniform { lo: -1.0, hi: 1.0 },
        }
    }

    pub fn variance(self) -> f64 {
        match self {
            Self::Rademacher => 1.0,
            Self::Uniform => 1.0 / 3.0,
        }
    }
}

/// One row of a tabulated model: coordinate value indices and `H` there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub outcome: Vec<usize>,
    pub matrix: HermitianMatrix,
}

/// Serializable description of a model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Finite coordinates with `H` given outcome by outcome.
    Table { coordinates: Vec<Coordinate>, dim: usize, table: Vec<TableEntry> },
    /// `H(z) = (Σ_j z_j) E₁₁` on `{±1}ⁿ`.
    HypercubeSum {
        n: usize,
        #[serde(default = "one")]
        d: usize,
    },
    /// `H(z) = Σ_j z_j A_j` on `{±1}ⁿ` with seeded unit-norm `A_j`.
    BoundedDiff {
        n: usize,
        #[serde(default = "one")]
        d: usize,
        #[serde(default)]
        seed: u64,
    },
    /// `H(Z) = Z B Z*` with iid entries of `Z ∈ ℝ^{p×n}`.
    CompoundCovariance {
        p: usize,
        n: usize,
        #[serde(default)]
        b: Option<HermitianMatrix>,
        #[serde(default)]
        entry: EntryDist,
    },
    /// Binary coordinates with seeded probabilities and a seeded random
    /// Hermitian matrix at every outcome.
    RandomBinary {
        n: usize,
        #[serde(default = "one")]
        d: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Dilation of `H(z) = Σ_j z_j B_j` with seeded rectangular `B_j`.
    RectangularDemo {
        n: usize,
        rows: usize,
        cols: usize,
        #[serde(default)]
        seed: u64,
    },
}

fn one() -> usize {
    1
}

fn check_size(what: &str, x: usize) -> Result<()> {
    if x == 0 || x > MAX_SPEC_SIZE {
        return Err(Error::Parameter(format!("{what} must lie in 1..={MAX_SPEC_SIZE}, got {x}")));
    }
    Ok(())
}

fn gaussian_hermitian(d: usize, r: &mut Rng) -> HermitianMatrix {
    let m = CMat::from_fn(d, d, |_, _| C64::new(StandardNormal.sample(r), StandardNormal.sample(r)));
    HermitianMatrix::project(m)
}

fn gaussian_rect(rows: usize, cols: usize, r: &mut Rng) -> RectMatrix {
    let m = CMat::from_fn(rows, cols, |_, _| C64::new(StandardNormal.sample(r), StandardNormal.sample(r)));
    RectMatrix::new(m).expect("finite gaussian entries")
}

impl ModelSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn build(&self) -> Result<MatrixModel> {
        match self {
            Self::Table { coordinates, dim, table } => table_model(coordinates, *dim, table),
            Self::HypercubeSum { n, d } => hypercube_sum(*n, *d),
            Self::BoundedDiff { n, d, seed } => bounded_diff_demo(*n, *d, *seed).map(|(m, _)| m),
            Self::CompoundCovariance { p, n, b, entry } => {
                let b = match b {
                    Some(b) => b.clone(),
                    None => {
                        check_size("n", *n)?;
                        HermitianMatrix::identity(*n)
                    }
                };
                compound_covariance(*p, *n, b, *entry)
            }
            Self::RandomBinary { n, d, seed } => random_binary(*n, *d, *seed),
            Self::RectangularDemo { n, rows, cols, seed } => {
                rectangularize(&rectangular_demo(*n, *rows, *cols, *seed)?)
            }
        }
    }
}

/// `H(z) = (Σ_j z_j) E₁₁` with Rademacher coordinates.
pub fn hypercube_sum(n: usize, d: usize) -> Result<MatrixModel> {
    check_size("n", n)?;
    check_size("d", d)?;
    let dist = ProductDistribution::iid(n, Coordinate::rademacher())?;
    let e11 = HermitianMatrix::unit(d, 0);
    MatrixModel::new(
        format!("hypercube_sum(n={n},d={d})"),
        dist,
        d,
        move |z| e11.scaled(z.iter().sum()),
        MeanSpec::Analytic(HermitianMatrix::zeros(d)),
    )
}

/// `H(z) = Σ_j z_j A_j` with Rademacher coordinates and seeded `A_j` of unit
/// operator norm. Returns the model with its difference bounds `2A_j`.
pub fn bounded_diff_demo(n: usize, d: usize, seed: u64) -> Result<(MatrixModel, Vec<HermitianMatrix>)> {
    check_size("n", n)?;
    check_size("d", d)?;
    let mut r = rng::stream(seed, 0);
    let a: Vec<HermitianMatrix> = (0..n)
        .map(|_| {
            let g = gaussian_hermitian(d, &mut r);
            let s = g.op_norm().max(f64::MIN_POSITIVE);
            g.scaled(1.0 / s)
        })
        .collect();
    let bounds = a.iter().map(|m| m.scaled(2.0)).collect();
    let dist = ProductDistribution::iid(n, Coordinate::rademacher())?;
    let model = MatrixModel::new(
        format!("bounded_diff(n={n},d={d},seed={seed})"),
        dist,
        d,
        move |z| {
            let mut acc = HermitianMatrix::zeros(a[0].dim());
            for (zj, aj) in z.iter().zip(&a) {
                acc = &acc + &aj.scaled(*zj);
            }
            acc
        },
        MeanSpec::Analytic(HermitianMatrix::zeros(d)),
    )?;
    Ok((model, bounds))
}

/// `H(Z) = Z B Z*` for `Z ∈ ℝ^{p×n}` with iid entries, coordinates in
/// row-major order. `E H(Z) = σ² (tr B) I_p`.
pub fn compound_covariance(p: usize, n: usize, b: HermitianMatrix, entry: EntryDist) -> Result<MatrixModel> {
    check_size("p", p)?;
    check_size("n", n)?;
    check_size("p*n", p * n)?;
    if b.dim() != n {
        return Err(Error::Shape(format!("B must be {n}x{n}")));
    }
    let dist = ProductDistribution::iid(p * n, entry.coordinate())?;
    let mean = HermitianMatrix::identity(p).scaled(entry.variance() * b.trace());
    let bm = b.as_mat().clone();
    MatrixModel::new(
        format!("compound_covariance(p={p},n={n},entry={entry:?})"),
        dist,
        p,
        move |z| {
            let zm = CMat::from_fn(p, n, |i, j| C64::new(z[i * n + j], 0.0));
            HermitianMatrix::project(&zm * &bm * zm.adjoint())
        },
        MeanSpec::Analytic(mean),
    )
}

/// Random finite model: coordinate `j` takes values `{0, 1}` with a seeded
/// probability in `[0.2, 0.8]`; every outcome carries an independent
/// Gaussian Hermitian matrix.
pub fn random_binary(n: usize, d: usize, seed: u64) -> Result<MatrixModel> {
    check_size("n", n)?;
    check_size("d", d)?;
    if n > 12 {
        return Err(Error::Parameter("random_binary supports at most 12 coordinates".into()));
    }
    let mut r = rng::stream(seed, 0);
    let coords = (0..n)
        .map(|_| {
            let p = 0.2 + 0.6 * rand::Rng::random::<f64>(&mut r);
            Coordinate::finite(vec![0.0, 1.0], vec![1.0 - p, p])
        })
        .collect::<Result<Vec<_>>>()?;
    let table: Vec<HermitianMatrix> = (0..1usize << n).map(|_| gaussian_hermitian(d, &mut r)).collect();
    let dist = ProductDistribution::new(coords)?;
    MatrixModel::enumerated(format!("random_binary(n={n},d={d},seed={seed})"), dist, d, move |z| {
        let idx = z.iter().enumerate().map(|(j, v)| (*v as usize) << j).sum::<usize>();
        table[idx].clone()
    })
}

/// `H(z) = Σ_j z_j B_j` with Rademacher coordinates and seeded Gaussian
/// `B_j ∈ ℂ^{rows×cols}`; mean zero.
pub fn rectangular_demo(n: usize, rows: usize, cols: usize, seed: u64) -> Result<RectModel> {
    check_size("n", n)?;
    check_size("rows", rows)?;
    check_size("cols", cols)?;
    let mut r = rng::stream(seed, 0);
    let b: Vec<RectMatrix> = (0..n).map(|_| gaussian_rect(rows, cols, &mut r)).collect();
    Ok(RectModel {
        name: format!("rectangular_demo(n={n},rows={rows},cols={cols},seed={seed})"),
        dist: ProductDistribution::iid(n, Coordinate::rademacher())?,
        rows,
        cols,
        h: Arc::new(move |z| {
            let mut acc = RectMatrix::zeros(rows, cols);
            for (zj, bj) in z.iter().zip(&b) {
                acc = acc.try_add(&bj.scaled(*zj)).expect("same shape");
            }
            acc
        }),
        mean: Some(RectMatrix::zeros(rows, cols)),
    })
}

fn table_model(coordinates: &[Coordinate], dim: usize, table: &[TableEntry]) -> Result<MatrixModel> {
    check_size("dim", dim)?;
    check_size("number of coordinates", coordinates.len())?;
    let dist = ProductDistribution::new(coordinates.to_vec())?;
    let card = dist.cardinality().ok_or_else(|| Error::Parameter("tabulated models need finite coordinates".into()))?;
    if card > ENUMERATION_BUDGET as u128 {
        return Err(Error::Budget { outcomes: card, budget: ENUMERATION_BUDGET });
    }
    if table.len() as u128 != card {
        return Err(Error::Shape(format!("table has {} rows, product space has {card} outcomes", table.len())));
    }
    let radices: Vec<usize> = coordinates.iter().map(|c| c.support_size().expect("finite")).collect();
    let values: Vec<Vec<f64>> = coordinates
        .iter()
        .map(|c| match c {
            Coordinate::Finite { values, .. } => values.clone(),
            _ => unreachable!(),
        })
        .collect();
    let mut map: HashMap<Vec<u64>, HermitianMatrix> = HashMap::with_capacity(table.len());
    for entry in table {
        if entry.outcome.len() != radices.len() || entry.outcome.iter().zip(&radices).any(|(k, r)| k >= r) {
            return Err(Error::Shape(format!("table outcome {:?} is not in the product space", entry.outcome)));
        }
        if entry.matrix.dim() != dim {
            return Err(Error::Shape(format!("table matrix has dimension {}, expected {dim}", entry.matrix.dim())));
        }
        let key: Vec<u64> = entry.outcome.iter().enumerate().map(|(j, &k)| values[j][k].to_bits()).collect();
        if map.insert(key, entry.matrix.clone()).is_some() {
            return Err(Error::Parse(format!("duplicate table outcome {:?}", entry.outcome)));
        }
    }
    if map.len() as u128 != card {
        return Err(Error::Parse("table outcomes collide because coordinate values repeat".into()));
    }
    MatrixModel::enumerated("table", dist, dim, move |z| {
        let key: Vec<u64> = z.iter().map(|v| v.to_bits()).collect();
        map.get(&key).cloned().expect("outcome in support")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_round_trip_and_unknown_keys() {
        let s = r#"{"kind":"hypercube_sum","n":3,"d":2}"#;
        let spec = ModelSpec::from_json(s).unwrap();
        assert_eq!(spec, ModelSpec::HypercubeSum { n: 3, d: 2 });
        assert!(ModelSpec::from_json(r#"{"kind":"hypercube_sum","n":3,"d":2,"x":1}"#).is_err());
        let back = serde_json::to_string(&spec).unwrap();
        assert_eq!(ModelSpec::from_json(&back).unwrap(), spec);
        assert!(ModelSpec::HypercubeSum { n: 0, d: 1 }.build().is_err());
    }

    #[test]
    fn compound_mean_is_exact() {
        let m = compound_covariance(2, 3, HermitianMatrix::identity(3), EntryDist::Rademacher).unwrap();
        let e = m.enumerate(ENUMERATION_BUDGET).unwrap();
        let mean = e.expect(|a| e.h[a].clone());
        assert!((mean.as_mat() - m.mean().matrix.as_mat()).norm() < 1e-12);
        assert!((m.mean().matrix.get(0, 0).re - 3.0).abs() < 1e-15);
    }

    #[test]
    fn table_spec_builds() {
        let json = r#"{"kind":"table","dim":1,
            "coordinates":[{"kind":"finite","values":[-1,1],"probs":[0.5,0.5]}],
            "table":[{"outcome":[0],"matrix":{"dim":1,"real":[-1]}},
                     {"outcome":[1],"matrix":{"dim":1,"real":[1]}}]}"#;
        let m = ModelSpec::from_json(json).unwrap().build().unwrap();
        assert_eq!(m.h(&[1.0]).get(0, 0).re, 1.0);
        assert!(m.mean().matrix.op_norm() < 1e-15);
        let missing = json.replace(
            r#",
                     {"outcome":[1],"matrix":{"dim":1,"real":[1]}}"#,
            "",
        );
        assert!(ModelSpec::from_json(&missing).unwrap().build().is_err());
    }

    #[test]
    fn random_binary_is_reproducible() {
        let a = random_binary(3, 2, 11).unwrap();
        let b = random_binary(3, 2, 11).unwrap();
        let c = random_binary(3, 2, 12).unwrap();
        let z = [1.0, 0.0, 1.0];
        assert_eq!(a.h(&z), b.h(&z));
        assert_ne!(a.h(&z), c.h(&z));
        assert!(a.enumerate(ENUMERATION_BUDGET).unwrap().expect(|_| HermitianMatrix::zeros(2)).op_norm() == 0.0);
    }
}
