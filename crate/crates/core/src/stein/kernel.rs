use serde::Serialize;

use super::coupling::{estimate_kernel_with_sup, kernel_by_path_enumeration, KernelEstimate};
use super::model::{Enumeration, MatrixModel};
use crate::error::{Error, Result};
use crate::matcore::{log_mean_ntrace_exp, matrix_function, spectral_norm, CMat, HermitianMatrix, ScalarFn};

/// An antisymmetric kernel `K(z_a, z_b)` on the outcomes of a finite model.
pub trait Kernel: Sync {
    fn name(&self) -> &str;

    fn eval(&self, a: usize, b: usize) -> HermitianMatrix;

    /// Uniform bound on `‖K̂ − K‖` for an approximate kernel; zero if exact.
    fn error_bound(&self) -> f64 {
        0.0
    }
}

/// Exact kernel `K(z, z′) = G(z) − G(z′)` where `G` solves the Poisson
/// equation `(I − P)G = X` for the pair's Markov operator
/// `P = (1/n) Σ_j Q_j`, `Q_j` averaging out coordinate `j`.
///
/// On the Hoeffding decomposition `X = Σ_{S≠∅} X_S` each `Q_j` keeps `X_S`
/// when `j ∉ S` and kills it otherwise, so `P X_S = (1 − |S|/n) X_S` and
/// `G = Σ_S (n/|S|) X_S`. Collecting terms by the set `T` of retained
/// coordinates gives `G = Σ_T c_{|T|} E[X | Z_T]` with
/// `c_t = Σ_{k=max(t,1)}^n C(n−t, k−t) (−1)^{k−t} n/k`.
#[derive(Clone, Debug)]
pub struct PoissonKernel {
    g: Vec<HermitianMatrix>,
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Largest coordinate count accepted by the exact Poisson kernel.
pub const POISSON_MAX_COORDS: usize = 16;

impl PoissonKernel {
    pub fn new(e: &Enumeration) -> Result<Self> {
        let n = e.n();
        if n > POISSON_MAX_COORDS {
            return Err(Error::Parameter(format!("exact kernel supports at most {POISSON_MAX_COORDS} coordinates")));
        }
        let coef: Vec<f64> = (0..=n)
            .map(|t| {
                (t.max(1)..=n)
                    .map(|k| {
                        let sign = if (k - t) % 2 == 0 { 1.0 } else { -1.0 };
                        binom(n - t, k - t) * sign * n as f64 / k as f64
                    })
                    .sum()
            })
            .collect();
        // tables[mask] = E[X | Z_T] for the retained set T = mask, built from
        // larger sets by averaging out the lowest missing coordinate.
        let full = (1usize << n) - 1;
        let mut tables: Vec<Option<Vec<HermitianMatrix>>> = vec![None; 1 << n];
        tables[full] = Some(e.x.clone());
        for mask in (0..full).rev() {
            let j = (!mask).trailing_zeros() as usize;
            let parent = tables[mask | (1 << j)].as_ref().expect("supersets are built first");
            tables[mask] = Some(e.average_out(parent, j));
        }
        let mut g = vec![HermitianMatrix::zeros(e.dim()); e.len()];
        for (mask, table) in tables.iter().enumerate() {
            let c = coef[mask.count_ones() as usize];
            if c == 0.0 {
                continue;
            }
            for (ga, ta) in g.iter_mut().zip(table.as_ref().expect("built")) {
                *ga = &*ga + &ta.scaled(c);
            }
        }
        Ok(Self { g })
    }

    /// The potential `G`, indexed by outcome.
    pub fn potential(&self) -> &[HermitianMatrix] {
        &self.g
    }
}

impl Kernel for PoissonKernel {
    fn name(&self) -> &str {
        "poisson"
    }

    fn eval(&self, a: usize, b: usize) -> HermitianMatrix {
        &self.g[a] - &self.g[b]
    }
}

/// `K(z, z′) = α⁻¹ (X(z) − X(z′))`, a kernel whenever
/// `E[X − X′ | Z] = αX`. The default `α = 1/n` matches additive models.
#[derive(Clone, Debug)]
pub struct MatrixSteinKernel {
    x: Vec<HermitianMatrix>,
    alpha: f64,
}

impl MatrixSteinKernel {
    pub fn new(e: &Enumeration, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Parameter(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self { x: e.x.clone(), alpha })
    }

    pub fn additive(e: &Enumeration) -> Self {
        Self { x: e.x.clone(), alpha: 1.0 / e.n() as f64 }
    }
}

impl Kernel for MatrixSteinKernel {
    fn name(&self) -> &str {
        "matrix_stein"
    }

    fn eval(&self, a: usize, b: usize) -> HermitianMatrix {
        (&self.x[a] - &self.x[b]).scaled(1.0 / self.alpha)
    }
}

/// How [`EstimatedKernel`] computes the coupling expectation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimationMethod {
    MonteCarlo { samples: usize, seed: u64 },
    PathEnumeration,
}

/// Kernel from the coupling series, truncated at a finite horizon and
/// tabulated over every pair the exchangeable pair can produce.
#[derive(Clone, Debug)]
pub struct EstimatedKernel {
    horizon: usize,
    method: EstimationMethod,
    n_out: usize,
    table: std::collections::HashMap<(usize, usize), KernelEstimate>,
    error: f64,
}

/// Standard errors added to the truncation bound in [`Kernel::error_bound`].
pub const MC_RADIUS_Z: f64 = 4.0;

impl EstimatedKernel {
    pub fn new(model: &MatrixModel, e: &Enumeration, horizon: usize, method: EstimationMethod) -> Result<Self> {
        if horizon < 1 {
            return Err(Error::Parameter("horizon must be at least 1".into()));
        }
        let sup = e.h.iter().map(HermitianMatrix::op_norm).fold(0.0, f64::max);
        let mut table = std::collections::HashMap::new();
        let mut error: f64 = 0.0;
        for a in 0..e.len() {
            for (b, _) in e.transitions(a) {
                if table.contains_key(&(a, b)) {
                    continue;
                }
                let est = match method {
                    EstimationMethod::MonteCarlo { samples, seed } => {
                        estimate_kernel_with_sup(model, &e.values[a], &e.values[b], horizon, samples, seed, sup)?
                    }
                    EstimationMethod::PathEnumeration => kernel_by_path_enumeration(e, a, b, horizon),
                };
                error = error.max(est.error_radius(MC_RADIUS_Z));
                table.insert((a, b), est);
            }
        }
        Ok(Self { horizon, method, n_out: e.len(), table, error })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn method(&self) -> EstimationMethod {
        self.method
    }

    pub fn estimate(&self, a: usize, b: usize) -> Option<&KernelEstimate> {
        self.table.get(&(a, b))
    }
}

impl Kernel for EstimatedKernel {
    fn name(&self) -> &str {
        "estimated"
    }

    fn eval(&self, a: usize, b: usize) -> HermitianMatrix {
        assert!(a < self.n_out && b < self.n_out, "outcome index out of range");
        match self.table.get(&(a, b)) {
            Some(k) => k.estimate.clone(),
            None => panic!("pair ({a}, {b}) is not reachable by one step of the exchangeable pair"),
        }
    }

    fn error_bound(&self) -> f64 {
        self.error
    }
}

/// `V_X(z) = ½E[(X − X′)² | Z = z]` and `V^K(z) = ½E[K(Z, Z′)² | Z = z]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionalVariances {
    pub v_x: HermitianMatrix,
    pub v_k: HermitianMatrix,
}

pub fn conditional_variances(e: &Enumeration, kernel: &dyn Kernel, a: usize) -> ConditionalVariances {
    let mut v_x = HermitianMatrix::zeros(e.dim());
    let mut v_k = HermitianMatrix::zeros(e.dim());
    for (b, w) in e.transitions(a) {
        v_x = &v_x + &(&e.x[a] - &e.x[b]).square().scaled(w);
        v_k = &v_k + &kernel.eval(a, b).square().scaled(w);
    }
    ConditionalVariances { v_x: v_x.scaled(0.5), v_k: v_k.scaled(0.5) }
}

pub fn all_conditional_variances(e: &Enumeration, kernel: &dyn Kernel) -> Vec<ConditionalVariances> {
    (0..e.len()).map(|a| conditional_variances(e, kernel, a)).collect()
}

/// `E[K(z, Z′) | Z = z]`.
pub fn kernel_conditional_mean(e: &Enumeration, kernel: &dyn Kernel, a: usize) -> HermitianMatrix {
    let mut acc = HermitianMatrix::zeros(e.dim());
    for (b, w) in e.transitions(a) {
        acc = &acc + &kernel.eval(a, b).scaled(w);
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SteinResidual {
    /// `max_z ‖E[K(z, Z′) | Z = z] − X(z)‖` over outcomes of positive mass.
    pub residual: f64,
    /// Uncertainty carried by an approximate kernel (zero when exact).
    pub radius: f64,
}

pub fn check_stein_identity(e: &Enumeration, kernel: &dyn Kernel) -> SteinResidual {
    let residual = (0..e.len())
        .filter(|&a| e.probs[a] > 0.0)
        .map(|a| (&kernel_conditional_mean(e, kernel, a) - &e.x[a]).op_norm())
        .fold(0.0, f64::max);
    SteinResidual { residual, radius: kernel.error_bound() }
}

/// `‖E K(Z, Z′)‖`.
pub fn kernel_centering(e: &Enumeration, kernel: &dyn Kernel) -> f64 {
    e.expect(|a| kernel_conditional_mean(e, kernel, a)).op_norm()
}

/// `max ‖K(a, b) + K(b, a)‖_F` over pairs the exchangeable pair produces.
pub fn kernel_antisymmetry_defect(e: &Enumeration, kernel: &dyn Kernel) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..e.len() {
        for (b, _) in e.transitions(a) {
            worst = worst.max((&kernel.eval(a, b) + &kernel.eval(b, a)).frobenius_norm());
        }
    }
    worst
}

/// `‖E[X F(X)] − ½E[K(Z, Z′)(F(X) − F(X′))]‖` by enumerating the joint law.
pub fn exchangeable_pairs_identity(e: &Enumeration, kernel: &dyn Kernel, f: &ScalarFn) -> Result<f64> {
    let fx: Vec<HermitianMatrix> = e.x.iter().map(|x| matrix_function(x, f)).collect::<Result<_>>()?;
    let d = e.dim();
    let mut lhs = CMat::zeros(d, d);
    let mut rhs = CMat::zeros(d, d);
    for a in 0..e.len() {
        let pa = e.probs[a];
        if pa == 0.0 {
            continue;
        }
        lhs += e.x[a].matmul(&fx[a]) * crate::matcore::C64::new(pa, 0.0);
        for (b, w) in e.transitions(a) {
            let diff = &fx[a] - &fx[b];
            rhs += kernel.eval(a, b).matmul(&diff) * crate::matcore::C64::new(0.5 * pa * w, 0.0);
        }
    }
    Ok(spectral_norm(&(lhs - rhs)))
}

/// `r(ψ) = ψ⁻¹ inf_s log E tr̄ exp(ψ/2 (s V_X + s⁻¹ V^K))` over a grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RPsi {
    pub value: f64,
    pub best_s: f64,
    /// Grid points whose exponential overflowed.
    pub skipped: Vec<f64>,
}

pub fn r_psi(e: &Enumeration, cond: &[ConditionalVariances], psi: f64, s_grid: &[f64]) -> Result<RPsi> {
    if !(psi > 0.0) || !psi.is_finite() {
        return Err(Error::Parameter(format!("psi must be positive, got {psi}")));
    }
    if s_grid.is_empty() || s_grid.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(Error::Parameter("s grid must be nonempty and positive".into()));
    }
    if cond.len() != e.len() {
        return Err(Error::Shape("one pair of conditional variances per outcome is required".into()));
    }
    let mut best = (f64::INFINITY, f64::NAN);
    let mut skipped = Vec::new();
    for &s in s_grid {
        let mats: Vec<HermitianMatrix> =
            cond.iter().map(|c| (&c.v_x.scaled(s) + &c.v_k.scaled(1.0 / s)).scaled(psi / 2.0)).collect();
        let v = log_mean_ntrace_exp(e.probs.iter().copied().zip(mats.iter()));
        if !v.is_finite() {
            skipped.push(s);
            continue;
        }
        if v < best.0 {
            best = (v, s);
        }
    }
    if best.1.is_nan() {
        return Err(Error::Precondition("every grid point overflowed".into()));
    }
    Ok(RPsi { value: best.0 / psi, best_s: best.1, skipped })
}

/// Default `s` grid: `2^k` for `k = −10, −9.5, …, 10` (41 points).
pub fn default_s_grid() -> Vec<f64> {
    (0..41).map(|i| 2f64.powf(-10.0 + 0.5 * i as f64)).collect()
}
