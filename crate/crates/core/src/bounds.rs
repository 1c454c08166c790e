//! Closed-form tail and expectation bounds.
//!
//! Tail values are reported both raw (they may exceed one, exactly as the
//! formulas read) and clamped to `[0, 1]`. Comparisons against empirical data
//! use the raw value.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{induced_norm, CMat, HermitianMatrix, C64, PSD_TOL};
pub use crate::stein::rectangularize;

/// A probability bound, raw and clamped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub raw: f64,
    pub clamped: f64,
}

impl TailBound {
    pub fn new(raw: f64) -> Self {
        let clamped = if raw.is_nan() { 1.0 } else { raw.clamp(0.0, 1.0) };
        Self { raw, clamped }
    }
}

/// Tail bound at a given `t` plus a bound on the expectation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailAndMean {
    pub tail: TailBound,
    pub mean_bound: f64,
}

/// `factor · exp(−t²/denominator)` with the zero-denominator convention:
/// the tail vanishes for `t > 0` and equals `factor` at `t = 0`.
fn sub_gaussian_tail(factor: f64, t: f64, denominator: f64) -> f64 {
    if t <= 0.0 {
        return factor;
    }
    if denominator <= 0.0 {
        return 0.0;
    }
    factor * (-t * t / denominator).exp()
}

fn check_nonneg(name: &str, x: f64) -> Result<()> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Parameter(format!("{name} must be a finite nonnegative number, got {x}")));
    }
    Ok(())
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::Parameter("dimension must be at least 1".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Chebyshev

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevBound {
    pub tail: TailBound,
    pub mean_bound: f64,
}

/// Matrix Chebyshev bound from Schatten moments `(p, E‖X‖_p^p)`:
/// `P(‖X‖ ≥ t) ≤ min_p t^{−p} E‖X‖_p^p` and `E‖X‖ ≤ min_p (E‖X‖_p^p)^{1/p}`.
pub fn chebyshev_tail(moments: &[(f64, f64)], t: f64) -> Result<ChebyshevBound> {
    if moments.is_empty() {
        return Err(Error::Parameter("at least one moment is required".into()));
    }
    if !(t > 0.0) {
        return Err(Error::Parameter(format!("t must be positive, got {t}")));
    }
    let mut tail = f64::INFINITY;
    let mut mean = f64::INFINITY;
    for &(p, m) in moments {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::Parameter(format!("moment order must be >= 1, got {p}")));
        }
        check_nonneg("moment", m)?;
        tail = tail.min(m / t.powf(p));
        mean = mean.min(m.powf(1.0 / p));
    }
    Ok(ChebyshevBound { tail: TailBound::new(tail), mean_bound: mean })
}

// ---------------------------------------------------------------------------
// Laplace transform method

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaplaceBounds {
    /// `d · inf_{θ>0} exp(−θt + log m(θ))`.
    pub upper_tail: TailBound,
    /// `d · inf_{θ<0} exp(−θt + log m(θ))`.
    pub lower_tail: TailBound,
    /// `inf_{θ>0} (log d + log m(θ))/θ`.
    pub upper_mean: f64,
    /// `sup_{θ<0} (log d + log m(θ))/θ`.
    pub lower_mean: f64,
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Minimise `f` over the grid, then refine by golden-section search inside
/// the grid cell(s) adjacent to the best point. Only finite evaluations are
/// accepted, so the result is always an attained value of `f`.
fn grid_min(grid: &[f64], f: &dyn Fn(f64) -> f64, refine: bool) -> f64 {
    let vals: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let mut best_i = None;
    for (i, v) in vals.iter().enumerate() {
        if v.is_finite() && best_i.is_none_or(|b: usize| *v < vals[b]) {
            best_i = Some(i);
        }
    }
    let Some(bi) = best_i else {
        return f64::INFINITY;
    };
    let mut best = vals[bi];
    if !refine || grid.len() < 2 {
        return best;
    }
    let lo = grid[bi.saturating_sub(1)];
    let hi = grid[(bi + 1).min(grid.len() - 1)];
    let (mut a, mut b) = (lo, hi);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let eval = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let (mut fc, mut fd) = (eval(c), eval(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-14 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = eval(d);
        }
    }
    best = best.min(fc).min(fd);
    best
}

/// Laplace transform bounds over a finite θ grid (positive points for the
/// upper quantities, negative points for the lower ones). Any grid gives
/// valid bounds; `refine` tightens them with a golden-section search.
pub fn laplace_bounds(
    log_mgf: &dyn Fn(f64) -> f64,
    d: usize,
    t: f64,
    theta_grid: &[f64],
    refine: bool,
) -> Result<LaplaceBounds> {
    check_dim(d)?;
    let mut pos: Vec<f64> = theta_grid.iter().copied().filter(|&x| x > 0.0 && x.is_finite()).collect();
    let mut neg: Vec<f64> = theta_grid.iter().copied().filter(|&x| x < 0.0 && x.is_finite()).collect();
    if pos.is_empty() && neg.is_empty() {
        return Err(Error::Parameter("theta grid must contain a nonzero point".into()));
    }
    pos.sort_by(f64::total_cmp);
    pos.dedup();
    neg.sort_by(f64::total_cmp);
    neg.dedup();
    let log_d = (d as f64).ln();
    let tail_exp = |th: f64| -th * t + log_mgf(th);
    let mean_obj = |th: f64| (log_d + log_mgf(th)) / th;
    let neg_mean_obj = |th: f64| -(log_d + log_mgf(th)) / th;

    let upper_exp = if pos.is_empty() { f64::INFINITY } else { grid_min(&pos, &tail_exp, refine) };
    let lower_exp = if neg.is_empty() { f64::INFINITY } else { grid_min(&neg, &tail_exp, refine) };
    let upper_mean = if pos.is_empty() { f64::INFINITY } else { grid_min(&pos, &mean_obj, refine) };
    let lower_mean = if neg.is_empty() { f64::NEG_INFINITY } else { -grid_min(&neg, &neg_mean_obj, refine) };
    let dd = d as f64;
    Ok(LaplaceBounds {
        upper_tail: TailBound::new(dd * upper_exp.exp()),
        lower_tail: TailBound::new(dd * lower_exp.exp()),
        upper_mean,
        lower_mean,
    })
}

// ---------------------------------------------------------------------------
// Sub-gamma trace mgf

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussExpParams {
    pub d: usize,
    pub v: f64,
    pub c: f64,
}

impl GaussExpParams {
    pub fn new(d: usize, v: f64, c: f64) -> Result<Self> {
        check_dim(d)?;
        check_nonneg("v", v)?;
        check_nonneg("c", c)?;
        Ok(Self { d, v, c })
    }
}

/// Consequences of `log m(θ) ≤ vθ²/(2(1 − cθ))`:
/// tail `d·exp(−t²/(2v + 2ct))`, mean `√(2v log d) + c log d`.
pub fn gaussexp_bounds(params: &GaussExpParams, t: f64) -> Result<TailAndMean> {
    let GaussExpParams { d, v, c } = *params;
    check_dim(d)?;
    check_nonneg("v", v)?;
    check_nonneg("c", c)?;
    check_nonneg("t", t)?;
    let log_d = (d as f64).ln();
    Ok(TailAndMean {
        tail: TailBound::new(sub_gaussian_tail(d as f64, t, 2.0 * v + 2.0 * c * t)),
        mean_bound: (2.0 * v * log_d).sqrt() + c * log_d,
    })
}

// ---------------------------------------------------------------------------
// Efron-Stein right-hand sides

/// `√(2(2p−1)) · (E‖V‖_p^p)^{1/(2p)}`, which dominates `(E‖X‖_{2p}^{2p})^{1/(2p)}`.
pub fn efron_stein_poly_rhs(p: u32, v_moment: f64) -> Result<f64> {
    if p == 0 {
        return Err(Error::Parameter("p must be a natural number >= 1".into()));
    }
    check_nonneg("E‖V‖_p^p", v_moment)?;
    let p = p as f64;
    Ok((2.0 * (2.0 * p - 1.0)).sqrt() * v_moment.powf(1.0 / (2.0 * p)))
}

/// `(θ²/ψ)/(1 − 2θ²/ψ) · log E tr̄ e^{ψV}`, valid for `|θ| ≤ √(ψ/2)`.
/// At the boundary the bound is `+∞` unless the log-mgf vanishes.
pub fn efron_stein_exp_rhs(theta: f64, psi: f64, log_mgf_v: f64) -> Result<f64> {
    if !(psi > 0.0) || !psi.is_finite() {
        return Err(Error::Parameter(format!("psi must be positive, got {psi}")));
    }
    if !theta.is_finite() {
        return Err(Error::Parameter("theta must be finite".into()));
    }
    check_nonneg("log E tr̄ e^{ψV}", log_mgf_v)?;
    if theta.abs() > (psi / 2.0).sqrt() {
        return Err(Error::Precondition(format!(
            "|theta| = {} exceeds sqrt(psi/2) = {}",
            theta.abs(),
            (psi / 2.0).sqrt()
        )));
    }
    if theta == 0.0 || log_mgf_v == 0.0 {
        return Ok(0.0);
    }
    let r = theta * theta / psi;
    let denom = 1.0 - 2.0 * r;
    if denom <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(r / denom * log_mgf_v)
}

// ---------------------------------------------------------------------------
// Corollaries

/// Self-bounded matrices, `V ≼ vI + cX`: tail `d·exp(−t²/(4v + 6ct))`,
/// mean `√(4v log d) + 3c log d`.
pub fn self_bounded_bounds(d: usize, v: f64, c: f64, t: f64) -> Result<TailAndMean> {
    check_dim(d)?;
    check_nonneg("v", v)?;
    check_nonneg("c", c)?;
    check_nonneg("t", t)?;
    let log_d = (d as f64).ln();
    Ok(TailAndMean {
        tail: TailBound::new(sub_gaussian_tail(d as f64, t, 4.0 * v + 6.0 * c * t)),
        mean_bound: (4.0 * v * log_d).sqrt() + 3.0 * c * log_d,
    })
}

/// Difference bounds `A_j` with `(H(z) − H(z'))² ≼ A_j²` when only
/// coordinate `j` changes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundedDiffSpec {
    pub difference_bounds: Vec<HermitianMatrix>,
    pub sigma2: f64,
}

impl BoundedDiffSpec {
    pub fn new(difference_bounds: Vec<HermitianMatrix>) -> Result<Self> {
        let sigma2 = bounded_diff_sigma(&difference_bounds)?;
        Ok(Self { difference_bounds, sigma2 })
    }

    pub fn dim(&self) -> usize {
        self.difference_bounds.first().map_or(1, HermitianMatrix::dim)
    }
}

/// `σ² = ‖Σ_j A_j²‖`.
pub fn bounded_diff_sigma(bounds: &[HermitianMatrix]) -> Result<f64> {
    let Some(first) = bounds.first() else {
        return Ok(0.0);
    };
    let mut acc = HermitianMatrix::zeros(first.dim());
    for a in bounds {
        acc = acc.try_add(&a.square())?;
    }
    Ok(acc.op_norm())
}

/// Tail `d·e^{−t²/(2σ²)}`, mean `σ√(2 log d)`.
pub fn bounded_diff_bounds(d: usize, sigma2: f64, t: f64) -> Result<TailAndMean> {
    check_dim(d)?;
    check_nonneg("sigma2", sigma2)?;
    check_nonneg("t", t)?;
    Ok(TailAndMean {
        tail: TailBound::new(sub_gaussian_tail(d as f64, t, 2.0 * sigma2)),
        mean_bound: (sigma2 * 2.0 * (d as f64).ln()).sqrt(),
    })
}

/// Dobrushin interdependence matrix with its boundedness parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DobrushinJson", into = "DobrushinJson")]
pub struct DobrushinSpec {
    pub d: Vec<Vec<f64>>,
    pub sigma2: f64,
    pub b: f64,
    pub norm_one: f64,
    pub norm_inf: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DobrushinJson {
    d: Vec<Vec<f64>>,
    sigma2: f64,
}

impl TryFrom<DobrushinJson> for DobrushinSpec {
    type Error = Error;

    fn try_from(raw: DobrushinJson) -> Result<Self> {
        DobrushinSpec::new(raw.d, raw.sigma2)
    }
}

impl From<DobrushinSpec> for DobrushinJson {
    fn from(s: DobrushinSpec) -> Self {
        Self { d: s.d, sigma2: s.sigma2 }
    }
}

impl DobrushinSpec {
    /// Validates a zero diagonal, nonnegative entries and
    /// `max{‖D‖_{1→1}, ‖D‖_{∞→∞}} < 1`, then computes
    /// `b = [1 − ½(‖D‖_{1→1} + ‖D‖_{∞→∞})]⁻¹`.
    pub fn new(d: Vec<Vec<f64>>, sigma2: f64) -> Result<Self> {
        check_nonneg("sigma2", sigma2)?;
        let n = d.len();
        if n == 0 || d.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("Dobrushin matrix must be square and nonempty".into()));
        }
        for (i, row) in d.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                if !x.is_finite() || x < 0.0 {
                    return Err(Error::Precondition(format!("entry D[{i}][{j}] = {x} is not a nonnegative number")));
                }
                if i == j && x != 0.0 {
                    return Err(Error::Precondition(format!("diagonal entry D[{i}][{i}] = {x} must be zero")));
                }
            }
        }
        let m = CMat::from_fn(n, n, |i, j| C64::new(d[i][j], 0.0));
        let norm_one = induced_norm(&m, 1.0)?;
        let norm_inf = induced_norm(&m, f64::INFINITY)?;
        if norm_one >= 1.0 {
            return Err(Error::Precondition(format!("‖D‖_1→1 = {norm_one} must be < 1")));
        }
        if norm_inf >= 1.0 {
            return Err(Error::Precondition(format!("‖D‖_∞→∞ = {norm_inf} must be < 1")));
        }
        let b = 1.0 / (1.0 - 0.5 * (norm_one + norm_inf));
        Ok(Self { d, sigma2, b, norm_one, norm_inf })
    }
}

/// Tail `d·e^{−t²/(bσ²)}`, mean `σ√(b log d)`.
pub fn dobrushin_bounds(spec: &DobrushinSpec, d: usize, t: f64) -> Result<TailAndMean> {
    check_dim(d)?;
    check_nonneg("t", t)?;
    Ok(TailAndMean {
        tail: TailBound::new(sub_gaussian_tail(d as f64, t, spec.b * spec.sigma2)),
        mean_bound: (spec.sigma2 * spec.b * (d as f64).ln()).sqrt(),
    })
}

/// Compound sample covariance `Z B Z*` with `Z ∈ ℂ^{p×n}` having iid centred
/// entries of variance `σ²` bounded by `L`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompoundCovSpec {
    pub p: usize,
    pub n: usize,
    pub sigma2: f64,
    pub l: f64,
    pub b: HermitianMatrix,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CompoundCovJson {
    p: usize,
    n: usize,
    sigma2: f64,
    l: f64,
    b: Option<HermitianMatrix>,
}

impl<'de> Deserialize<'de> for CompoundCovSpec {
    fn deserialize<De: serde::Deserializer<'de>>(de: De) -> std::result::Result<Self, De::Error> {
        let raw = CompoundCovJson::deserialize(de)?;
        if raw.n == 0 || raw.n > 4096 {
            return Err(serde::de::Error::custom("n out of range"));
        }
        let b = raw.b.unwrap_or_else(|| HermitianMatrix::identity(raw.n));
        CompoundCovSpec::new(raw.p, raw.n, raw.sigma2, raw.l, b).map_err(serde::de::Error::custom)
    }
}

impl CompoundCovSpec {
    pub fn new(p: usize, n: usize, sigma2: f64, l: f64, b: HermitianMatrix) -> Result<Self> {
        if p == 0 || n == 0 {
            return Err(Error::Parameter("p and n must be positive".into()));
        }
        check_nonneg("sigma2", sigma2)?;
        check_nonneg("L", l)?;
        if sigma2 > l * l * (1.0 + 1e-12) {
            return Err(Error::Precondition(format!("variance {sigma2} exceeds L² = {}", l * l)));
        }
        if b.dim() != n {
            return Err(Error::Shape(format!("B must be {n}x{n}, got {}x{}", b.dim(), b.dim())));
        }
        Ok(Self { p, n, sigma2, l, b })
    }

    /// Parameters `(v, c)` of the trace-mgf bound after rescaling the entries
    /// to unit magnitude: `Z = L·Z₀`, `B₀ = L²B`, `σ₀² = σ²/L²`; then
    /// `v = 22‖B₀‖_F²(pσ₀² + 1)` and `c = 16√3·p·‖B₀‖`.
    fn unit_scale_params(&self) -> (f64, f64) {
        let l2 = self.l * self.l;
        if l2 == 0.0 {
            return (0.0, 0.0);
        }
        let b0_fro2 = l2 * l2 * self.b.frobenius_norm().powi(2);
        let b0_op = l2 * self.b.op_norm();
        let sigma0 = self.sigma2 / l2;
        let p = self.p as f64;
        (22.0 * b0_fro2 * (p * sigma0 + 1.0), 16.0 * 3f64.sqrt() * p * b0_op)
    }
}

/// Two-sided bound for `‖ZBZ* − E ZBZ*‖`: tail
/// `2p·exp(−t²/(44(pσ² + L²)‖B‖_F² + 32√3·L·p·‖B‖·t))` and mean
/// `2√(44(pσ² + L²)(log p)‖B‖_F²) + 32√3·L·p·(log p)·‖B‖`, stated for `L = 1`
/// and extended to general `L` by rescaling the entries.
pub fn compound_cov_bounds(spec: &CompoundCovSpec, t: f64) -> Result<TailAndMean> {
    check_nonneg("t", t)?;
    let (v, c) = spec.unit_scale_params();
    let p = spec.p as f64;
    let log_p = p.ln();
    Ok(TailAndMean {
        tail: TailBound::new(sub_gaussian_tail(2.0 * p, t, 2.0 * v + 2.0 * c * t)),
        mean_bound: 2.0 * ((2.0 * v * log_p).sqrt() + c * log_p),
    })
}

/// Trace-mgf bound for `ZAZ* − E ZAZ*` with `A ≽ 0` and unit-magnitude
/// entries: `8θ²(tr A)(pσ²‖A‖ + max_j a_jj)/(1 − 24p‖A‖θ)` for
/// `0 ≤ θ < 1/(24p‖A‖)`.
pub fn compound_psd_mgf(a: &HermitianMatrix, p: usize, sigma2: f64, theta: f64) -> Result<f64> {
    if p == 0 {
        return Err(Error::Parameter("p must be positive".into()));
    }
    check_nonneg("sigma2", sigma2)?;
    if !a.is_psd(PSD_TOL) {
        return Err(Error::Precondition("A must be positive semidefinite".into()));
    }
    let norm = a.op_norm();
    let pf = p as f64;
    if !(theta >= 0.0) || (norm > 0.0 && theta >= 1.0 / (24.0 * pf * norm)) {
        return Err(Error::Precondition(format!(
            "theta = {theta} must lie in [0, 1/(24 p ‖A‖)) = [0, {})",
            if norm > 0.0 { 1.0 / (24.0 * pf * norm) } else { f64::INFINITY }
        )));
    }
    let max_diag = (0..a.dim()).map(|j| a.get(j, j).re).fold(f64::NEG_INFINITY, f64::max);
    Ok(8.0 * theta * theta * a.trace() * (pf * sigma2 * norm + max_diag) / (1.0 - 24.0 * pf * norm * theta))
}

/// Inputs for the Haar random-walk corollary. `tv_seq[i]` is the total
/// variation distance between the `i`-step walk and Haar measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HaarSpec {
    pub r: f64,
    pub s: f64,
    pub tv_seq: Vec<f64>,
    pub d: usize,
}

impl HaarSpec {
    pub fn new(r: f64, s: f64, tv_seq: Vec<f64>, d: usize) -> Result<Self> {
        let spec = Self { r, s, tv_seq, d };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.d)?;
        check_nonneg("R", self.r)?;
        if !(self.s > 0.0) || !self.s.is_finite() {
            return Err(Error::Parameter(format!("S must be positive, got {}", self.s)));
        }
        if let Some(bad) = self.tv_seq.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::Parameter(format!("total variation distance {bad} outside [0, 1]")));
        }
        Ok(())
    }

    /// `σ² = S²/2 · Σ_i min{1, 4R S⁻¹ tv_i}` over the supplied terms.
    pub fn sigma2(&self) -> f64 {
        let ratio = 4.0 * self.r / self.s;
        self.s * self.s / 2.0 * self.tv_seq.iter().map(|&tv| (ratio * tv).min(1.0)).sum::<f64>()
    }
}

/// Tail `d·e^{−t²/(2σ²)}`, mean `σ√(2 log d)` with the Haar `σ²`.
pub fn haar_bounds(spec: &HaarSpec, t: f64) -> Result<TailAndMean> {
    spec.validate()?;
    bounded_diff_bounds(spec.d, spec.sigma2(), t)
}

// ---------------------------------------------------------------------------
// Bound curves

/// Every closed-form tail bound, with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundKind {
    Gaussexp(GaussExpParams),
    SelfBounded { d: usize, v: f64, c: f64 },
    BoundedDiff { d: usize, sigma2: f64 },
    Dobrushin { d: usize, spec: DobrushinSpec },
    CompoundCov(CompoundCovSpec),
    Haar(HaarSpec),
}

impl BoundKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Gaussexp(_) => "gaussexp",
            Self::SelfBounded { .. } => "self_bounded",
            Self::BoundedDiff { .. } => "bounded_diff",
            Self::Dobrushin { .. } => "dobrushin",
            Self::CompoundCov(_) => "compound_cov",
            Self::Haar(_) => "haar",
        }
    }

    pub fn evaluate(&self, t: f64) -> Result<TailAndMean> {
        match self {
            Self::Gaussexp(p) => gaussexp_bounds(p, t),
            Self::SelfBounded { d, v, c } => self_bounded_bounds(*d, *v, *c, t),
            Self::BoundedDiff { d, sigma2 } => bounded_diff_bounds(*d, *sigma2, t),
            Self::Dobrushin { d, spec } => dobrushin_bounds(spec, *d, t),
            Self::CompoundCov(spec) => compound_cov_bounds(spec, t),
            Self::Haar(spec) => haar_bounds(spec, t),
        }
    }

    /// Scalar parameters, for provenance records.
    pub fn params(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: f64| {
            m.insert(k.to_string(), v);
        };
        match self {
            Self::Gaussexp(p) => {
                put("d", p.d as f64);
                put("v", p.v);
                put("c", p.c);
            }
            Self::SelfBounded { d, v, c } => {
                put("d", *d as f64);
                put("v", *v);
                put("c", *c);
            }
            Self::BoundedDiff { d, sigma2 } => {
                put("d", *d as f64);
                put("sigma2", *sigma2);
            }
            Self::Dobrushin { d, spec } => {
                put("d", *d as f64);
                put("sigma2", spec.sigma2);
                put("b", spec.b);
            }
            Self::CompoundCov(s) => {
                put("p", s.p as f64);
                put("n", s.n as f64);
                put("sigma2", s.sigma2);
                put("L", s.l);
                put("B_fro", s.b.frobenius_norm());
                put("B_op", s.b.op_norm());
            }
            Self::Haar(s) => {
                put("d", s.d as f64);
                put("R", s.r);
                put("S", s.s);
                put("sigma2", s.sigma2());
            }
        }
        m
    }
}

/// A named map `t ↦ probability` with parameter provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub kind: BoundKind,
}

/// One sampled row of a bound curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub t: f64,
    pub raw: f64,
    pub clamped: f64,
}

impl BoundCurve {
    pub fn new(kind: BoundKind) -> Self {
        Self { name: kind.name().to_string(), params: kind.params(), kind }
    }

    pub fn eval(&self, t: f64) -> Result<TailBound> {
        Ok(self.kind.evaluate(t)?.tail)
    }

    pub fn sample(&self, ts: &[f64]) -> Result<Vec<CurvePoint>> {
        ts.iter()
            .map(|&t| {
                let b = self.eval(t)?;
                Ok(CurvePoint { t, raw: b.raw, clamped: b.clamped })
            })
            .collect()
    }

    /// Header comment naming the bound and its parameters.
    pub fn describe(&self) -> String {
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}({})", self.name, params.join(","))
    }

    /// CSV export: a `# bound(params)` comment line followed by `t,raw,clamped` rows.
    pub fn write_csv<W: Write>(&self, ts: &[f64], mut out: W) -> Result<()> {
        writeln!(out, "# {}", self.describe())?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "raw", "clamped"])?;
        for p in self.sample(ts)? {
            w.write_record([p.t.to_string(), p.raw.to_string(), p.clamped.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}
