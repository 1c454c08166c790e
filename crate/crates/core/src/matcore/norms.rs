use super::{CMat, HermitianMatrix, RectMatrix};
use crate::error::{Error, Result};

/// Anything with a singular value spectrum.
pub trait SingularValues {
    fn singular_values(&self) -> Vec<f64>;
}

impl SingularValues for HermitianMatrix {
    fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.eigenvalues().into_iter().map(f64::abs).collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }
}

impl SingularValues for RectMatrix {
    fn singular_values(&self) -> Vec<f64> {
        singular_values(self.as_mat())
    }
}

impl SingularValues for CMat {
    fn singular_values(&self) -> Vec<f64> {
        singular_values(self)
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Spectral norm of a general matrix.
pub fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Schatten `p`-norm `(Σ s_k^p)^{1/p}` for `p ≥ 1`; `p = ∞` gives the
/// operator norm.
pub fn schatten_norm<M: SingularValues + ?Sized>(m: &M, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Parameter(format!("Schatten index must satisfy p >= 1, got {p}")));
    }
    let s = m.singular_values();
    let smax = s.iter().copied().fold(0.0, f64::max);
    if p.is_infinite() || smax == 0.0 {
        return Ok(smax);
    }
    // Scale by the largest singular value so large p does not overflow.
    let sum: f64 = s.iter().map(|&x| (x / smax).powf(p)).sum();
    Ok(smax * sum.powf(1.0 / p))
}

/// The supported induced norms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InducedNorm {
    /// `‖·‖_{1→1}`: maximum absolute column sum.
    One,
    /// `‖·‖_{∞→∞}`: maximum absolute row sum.
    Infinity,
}

impl TryFrom<f64> for InducedNorm {
    type Error = Error;

    fn try_from(p: f64) -> Result<Self> {
        if p == 1.0 {
            Ok(Self::One)
        } else if p == f64::INFINITY {
            Ok(Self::Infinity)
        } else {
            Err(Error::Parameter(format!("induced norm only implemented for p = 1 or p = ∞, got {p}")))
        }
    }
}

/// Induced `p → p` norm for `p ∈ {1, ∞}`.
pub fn induced_norm(m: &CMat, p: f64) -> Result<f64> {
    let kind = InducedNorm::try_from(p)?;
    let v = match kind {
        InducedNorm::One => m.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max),
        InducedNorm::Infinity => m.row_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max),
    };
    Ok(v)
}
