//! Hermitian matrix algebra.
//!
//! Matrices are dense `nalgebra` matrices over `Complex<f64>`. Superoperators
//! use the column-stacking vectorization, so left multiplication by `A` is
//! `I ⊗ A` and right multiplication by `B` is `Bᵀ ⊗ I`.

mod hermitian;
mod norms;
mod rect;
mod superop;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use hermitian::{cmat_from_real, matrix_function, Eigh, HermitianMatrix, HERMITIAN_REJECT_TOL};
pub use norms::{induced_norm, schatten_norm, singular_values, spectral_norm, InducedNorm, SingularValues};
pub use rect::RectMatrix;
pub use superop::SuperOperator;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

/// Default relative tolerance for semidefinite comparisons.
pub const PSD_TOL: f64 = 1e-9;

/// A scalar function together with the interval on which it is defined.
#[derive(Clone)]
pub struct ScalarFn {
    name: String,
    lo: f64,
    hi: f64,
    lo_open: bool,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl ScalarFn {
    pub fn new(
        name: impl Into<String>,
        lo: f64,
        hi: f64,
        lo_open: bool,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), lo, hi, lo_open, f: Arc::new(f) }
    }

    pub fn everywhere(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(name, f64::NEG_INFINITY, f64::INFINITY, false, f)
    }

    pub fn exp() -> Self {
        Self::everywhere("exp", f64::exp)
    }

    pub fn square() -> Self {
        Self::everywhere("square", |x| x * x)
    }

    pub fn cube() -> Self {
        Self::everywhere("cube", |x| x * x * x)
    }

    pub fn powi(k: i32) -> Self {
        Self::everywhere(format!("pow{k}"), move |x| x.powi(k))
    }

    pub fn abs() -> Self {
        Self::everywhere("abs", f64::abs)
    }

    /// `|x|^r`, with `|x|^0 = 1` including at zero.
    pub fn abs_pow(r: f64) -> Self {
        Self::everywhere(format!("abs_pow{r}"), move |x| if r == 0.0 { 1.0 } else { x.abs().powf(r) })
    }

    pub fn pos_part() -> Self {
        Self::everywhere("pos_part", |x| x.max(0.0))
    }

    pub fn neg_part() -> Self {
        Self::everywhere("neg_part", |x| (-x).max(0.0))
    }

    pub fn log() -> Self {
        Self::new("log", 0.0, f64::INFINITY, true, f64::ln)
    }

    /// Square root on `[0, ∞)`; eigenvalues within `-1e-12` of zero are
    /// treated as zero.
    pub fn sqrt() -> Self {
        Self::new("sqrt", -1e-12, f64::INFINITY, false, |x| x.max(0.0).sqrt())
    }

    /// `x log x` with `0 log 0 = 0`, on `[0, ∞)` up to `-1e-12` roundoff.
    pub fn xlogx() -> Self {
        Self::new("xlogx", -1e-12, f64::INFINITY, false, |x| if x <= 0.0 { 0.0 } else { x * x.ln() })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_open { x > self.lo } else { x >= self.lo };
        above && x <= self.hi && x.is_finite()
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarFn({})", self.name)
    }
}

fn require_square(m: &CMat) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::Shape(format!("expected a nonempty square matrix, got {}x{}", m.nrows(), m.ncols())));
    }
    Ok(())
}

/// `Re(M) = (M + M*)/2`.
pub fn real_part(m: &CMat) -> Result<HermitianMatrix> {
    require_square(m)?;
    Ok(HermitianMatrix::project(m.clone()))
}

/// `Im(M) = (M - M*)/(2i)`.
pub fn imag_part(m: &CMat) -> Result<HermitianMatrix> {
    require_square(m)?;
    let minus_i = C64::new(0.0, -1.0);
    Ok(HermitianMatrix::project((m - m.adjoint()) * (minus_i * 0.5)))
}

/// Semidefinite order test `A ≼ B`: true iff
/// `λ_min(B − A) ≥ −tol·(1 + ‖A‖ + ‖B‖)`.
pub fn psd_leq(a: &HermitianMatrix, b: &HermitianMatrix, tol: f64) -> Result<bool> {
    Ok(psd_gap(a, b)? >= -tol)
}

/// Normalized semidefinite gap `λ_min(B − A) / (1 + ‖A‖ + ‖B‖)`.
pub fn psd_gap(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    let diff = b.try_sub(a)?;
    Ok(diff.lambda_min() / (1.0 + a.op_norm() + b.op_norm()))
}

/// Hermitian dilation `[[0, B], [B*, 0]]`.
pub fn dilation(b: &RectMatrix) -> HermitianMatrix {
    let (r, c) = (b.rows(), b.cols());
    let n = r + c;
    let mut m = CMat::zeros(n, n);
    let bm = b.as_mat();
    for i in 0..r {
        for j in 0..c {
            m[(i, r + j)] = bm[(i, j)];
            m[(r + j, i)] = bm[(i, j)].conj();
        }
    }
    HermitianMatrix::project(m)
}

/// Trace inner product `⟨M, N⟩ = tr(M* N)`.
pub fn trace_inner(m: &CMat, n: &CMat) -> C64 {
    m.iter().zip(n.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// `log Σ_k w_k tr̄ exp(A_k)` evaluated through a log-sum-exp over the
/// eigenvalues, so large spectra do not overflow.
pub fn log_mean_ntrace_exp<'a>(terms: impl IntoIterator<Item = (f64, &'a HermitianMatrix)>) -> f64 {
    let mut logs: Vec<f64> = Vec::new();
    for (w, a) in terms {
        if w <= 0.0 {
            continue;
        }
        let d = a.dim() as f64;
        let lw = w.ln() - d.ln();
        logs.extend(a.eigenvalues().into_iter().map(|l| lw + l));
    }
    log_sum_exp(&logs)
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}
