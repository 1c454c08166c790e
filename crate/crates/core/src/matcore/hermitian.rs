use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{CMat, ScalarFn, C64};
use crate::error::{Error, Result};

/// Relative anti-Hermitian residual tolerated by [`HermitianMatrix::new`].
pub const HERMITIAN_REJECT_TOL: f64 = 1e-8;

/// A dense `d x d` complex Hermitian matrix.
///
/// The stored entries are exactly Hermitian: every constructor projects its
/// input onto the Hermitian part `(M + M*)/2`.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix {
    m: CMat,
}

/// Eigendecomposition `A = U diag(values) U*` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl HermitianMatrix {
    /// Checked constructor. Rejects input whose anti-Hermitian part exceeds
    /// `1e-8 * ||M||_F`, then symmetrizes.
    pub fn new(m: CMat) -> Result<Self> {
        Self::with_tolerance(m, HERMITIAN_REJECT_TOL)
    }

    pub fn with_tolerance(m: CMat, rel_tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Shape(format!("expected a square matrix, got {}x{}", m.nrows(), m.ncols())));
        }
        if m.nrows() == 0 {
            return Err(Error::Shape("dimension must be positive".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parse("matrix has non-finite entries".into()));
        }
        let residual = (&m - m.adjoint()).norm() / 2.0;
        let limit = rel_tol * m.norm();
        if residual > limit {
            return Err(Error::NotHermitian { residual, limit });
        }
        Ok(Self::project(m))
    }

    /// Hermitian part `(M + M*)/2` of a square matrix, without any check.
    pub fn project(m: CMat) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        let adj = m.adjoint();
        let m = (m + adj) * C64::new(0.5, 0.0);
        Self { m }
    }

    pub fn zeros(d: usize) -> Self {
        Self { m: CMat::zeros(d, d) }
    }

    pub fn identity(d: usize) -> Self {
        Self { m: CMat::identity(d, d) }
    }

    pub fn diag(values: &[f64]) -> Self {
        let d = values.len();
        let mut m = CMat::zeros(d, d);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        Self { m }
    }

    /// Diagonal matrix unit `E_ii`.
    pub fn unit(d: usize, i: usize) -> Self {
        let mut m = CMat::zeros(d, d);
        m[(i, i)] = C64::new(1.0, 0.0);
        Self { m }
    }

    /// Real symmetric matrix from rows.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Shape("rows must form a square matrix".into()));
        }
        let m = CMat::from_fn(d, d, |i, j| C64::new(rows[i][j], 0.0));
        Self::new(m)
    }

    /// Row-major real and imaginary parts.
    pub fn from_parts(dim: usize, real: &[f64], imag: &[f64]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("dimension must be positive".into()));
        }
        if real.len() != dim * dim || imag.len() != dim * dim {
            return Err(Error::Shape(format!(
                "expected {} real and imaginary entries for dim {dim}, got {} and {}",
                dim * dim,
                real.len(),
                imag.len()
            )));
        }
        let m = CMat::from_fn(dim, dim, |i, j| C64::new(real[i * dim + j], imag[i * dim + j]));
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_mat(&self) -> &CMat {
        &self.m
    }

    pub fn into_mat(self) -> CMat {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    /// Normalized trace `tr(A)/d`.
    pub fn ntrace(&self) -> f64 {
        self.trace() / self.dim() as f64
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.norm()
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { m: &self.m * C64::new(a, 0.0) }
    }

    /// General (non-Hermitian) product `self * other`.
    pub fn matmul(&self, other: &Self) -> CMat {
        &self.m * &other.m
    }

    pub fn square(&self) -> Self {
        Self::project(&self.m * &self.m)
    }

    /// `tr(self * other)`, real for Hermitian arguments.
    pub fn trace_product(&self, other: &Self) -> f64 {
        let d = self.dim();
        let mut acc = 0.0;
        for i in 0..d {
            for k in 0..d {
                acc += (self.m[(i, k)] * other.m[(k, i)]).re;
            }
        }
        acc
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::Shape(format!("dimension mismatch: {} vs {}", self.dim(), other.dim())));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self { m: &self.m + &other.m })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self { m: &self.m - &other.m })
    }

    /// Eigendecomposition with eigenvalues ascending. Exact eigenvalue ties are
    /// ordered by the lexicographic order of the phase-normalized eigenvectors.
    pub fn eigh(&self) -> Eigh {
        let d = self.dim();
        let eig = SymmetricEigen::new(self.m.clone());
        let mut pairs: Vec<(f64, Vec<C64>)> = (0..d)
            .map(|k| {
                let mut v: Vec<C64> = eig.eigenvectors.column(k).iter().copied().collect();
                normalize_phase(&mut v);
                (eig.eigenvalues[k], v)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| lex_cmp(&a.1, &b.1)));
        let values = pairs.iter().map(|p| p.0).collect();
        let vectors = CMat::from_fn(d, d, |i, k| pairs[k].1[i]);
        Eigh { values, vectors }
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = SymmetricEigen::new(self.m.clone());
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn lambda_max(&self) -> f64 {
        *self.eigenvalues().last().expect("nonempty")
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Spectral norm.
    pub fn op_norm(&self) -> f64 {
        let ev = self.eigenvalues();
        ev[0].abs().max(ev[ev.len() - 1].abs())
    }

    /// Lift a scalar map to a standard matrix function, with no domain check.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        let e = self.eigh();
        Self::from_eigh(&e, f)
    }

    pub(crate) fn from_eigh(e: &Eigh, f: impl Fn(f64) -> f64) -> Self {
        let d = e.values.len();
        let mut scaled = e.vectors.clone();
        for (k, &lam) in e.values.iter().enumerate() {
            let fk = C64::new(f(lam), 0.0);
            for i in 0..d {
                scaled[(i, k)] *= fk;
            }
        }
        Self::project(scaled * e.vectors.adjoint())
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.lambda_min() >= -tol * (1.0 + self.op_norm())
    }

    /// Row-major real parts.
    pub fn real_parts(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d * d).map(|k| self.m[(k / d, k % d)].re).collect()
    }

    /// Row-major imaginary parts.
    pub fn imag_parts(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d * d).map(|k| self.m[(k / d, k % d)].im).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn normalize_phase(v: &mut [C64]) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    if let Some(pivot) = v.iter().find(|z| z.norm() > 1e-8 * max).copied() {
        let phase = pivot.conj() / pivot.norm();
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

fn lex_cmp(a: &[C64], b: &[C64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.re.total_cmp(&y.re).then_with(|| x.im.total_cmp(&y.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

/// Standard matrix function `f(A) = sum f(lambda_k) u_k u_k*`.
///
/// Fails with [`Error::Domain`] naming the first eigenvalue outside the
/// domain of `f`.
pub fn matrix_function(a: &HermitianMatrix, f: &ScalarFn) -> Result<HermitianMatrix> {
    let e = a.eigh();
    if let Some(&bad) = e.values.iter().find(|&&lam| !f.contains(lam)) {
        return Err(Error::Domain { function: f.name().to_string(), eigenvalue: bad });
    }
    Ok(HermitianMatrix::from_eigh(&e, |x| f.eval(x)))
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HermitianMatrix({}x{}) {}", self.dim(), self.dim(), self.m)
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: Self) -> HermitianMatrix {
        self.try_add(rhs).expect("dimension mismatch in Hermitian addition")
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: Self) -> HermitianMatrix {
        self.try_sub(rhs).expect("dimension mismatch in Hermitian subtraction")
    }
}

impl Neg for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn neg(self) -> HermitianMatrix {
        HermitianMatrix { m: -&self.m }
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, rhs: f64) -> HermitianMatrix {
        self.scaled(rhs)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HermitianJson {
    dim: usize,
    real: Vec<f64>,
    #[serde(default)]
    imag: Option<Vec<f64>>,
}

impl Serialize for HermitianMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        HermitianJson { dim: self.dim(), real: self.real_parts(), imag: Some(self.imag_parts()) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = HermitianJson::deserialize(d)?;
        if raw.dim == 0 || raw.dim > 4096 {
            return Err(serde::de::Error::custom(format!("unsupported dimension {}", raw.dim)));
        }
        let imag = raw.imag.unwrap_or_else(|| vec![0.0; raw.real.len()]);
        HermitianMatrix::from_parts(raw.dim, &raw.real, &imag).map_err(serde::de::Error::custom)
    }
}

/// Build a dense complex matrix from real rows (test and builder helper).
pub fn cmat_from_real(rows: &[Vec<f64>]) -> CMat {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.len());
    DMatrix::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn constructor_symmetrizes_roundoff_and_rejects_garbage() {
        let mut m = cmat_from_real(&[vec![1.0, 2.0], vec![2.0, 3.0]]);
        m[(0, 1)] += C64::new(1e-13, 0.0);
        let h = HermitianMatrix::new(m).unwrap();
        assert_eq!(h.get(0, 1), h.get(1, 0).conj());

        let bad = cmat_from_real(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert!(matches!(HermitianMatrix::new(bad), Err(Error::NotHermitian { .. })));
        let rect = CMat::zeros(2, 3);
        assert!(matches!(HermitianMatrix::new(rect), Err(Error::Shape(_))));
    }

    #[test]
    fn eigh_reconstructs() {
        let m = CMat::from_fn(3, 3, |i, j| {
            C64::new(
                (i + 2 * j) as f64,
                if i < j {
                    0.5
                } else if i > j {
                    -0.5
                } else {
                    0.0
                },
            )
        });
        let h = HermitianMatrix::project(m);
        let e = h.eigh();
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let back = HermitianMatrix::from_eigh(&e, |x| x);
        let rel = (back.as_mat() - h.as_mat()).norm() / h.frobenius_norm();
        assert!(rel <= 1e-10, "{rel}");
    }

    #[test]
    fn exact_ties_are_ordered_deterministically() {
        let e1 = HermitianMatrix::identity(3).eigh();
        let e2 = HermitianMatrix::identity(3).eigh();
        assert_eq!(e1.values, vec![1.0; 3]);
        assert_eq!(e1.vectors, e2.vectors);
    }

    #[test]
    fn matrix_function_examples() {
        let z = HermitianMatrix::zeros(2);
        let e = matrix_function(&z, &ScalarFn::exp()).unwrap();
        assert!((e.as_mat() - CMat::identity(2, 2)).norm() < 1e-15);

        let sq = matrix_function(&HermitianMatrix::diag(&[1.0, 2.0]), &ScalarFn::square()).unwrap();
        assert!(close(sq.get(0, 0).re, 1.0, 1e-14));
        assert!(close(sq.get(1, 1).re, 4.0, 1e-14));
    }

    #[test]
    fn exp_of_swap_matches_power_series() {
        let a = HermitianMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let e = matrix_function(&a, &ScalarFn::exp()).unwrap();
        // Truncated power series, 30 terms.
        let mut term = CMat::identity(2, 2);
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * a.as_mat() * C64::new(1.0 / k as f64, 0.0);
            sum += &term;
        }
        assert!((e.as_mat() - &sum).norm() < 1e-13);
        assert!(close(e.get(0, 0).re, 1f64.cosh(), 1e-13));
        assert!(close(e.get(0, 1).re, 1f64.sinh(), 1e-13));
    }

    #[test]
    fn domain_error_names_eigenvalue() {
        let a = HermitianMatrix::diag(&[-2.0, 1.0]);
        match matrix_function(&a, &ScalarFn::log()) {
            Err(Error::Domain { function, eigenvalue }) => {
                assert_eq!(function, "log");
                assert!(close(eigenvalue, -2.0, 1e-14));
            }
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn json_roundtrip_and_validation() {
        let h = HermitianMatrix::project(CMat::from_fn(2, 2, |i, j| C64::new((i + j) as f64, (i as f64) - (j as f64))));
        let s = h.to_json();
        assert_eq!(HermitianMatrix::from_json(&s).unwrap(), h);
        let bad = r#"{"dim":2,"real":[0,1,0,0],"imag":[0,0,0,0]}"#;
        assert!(HermitianMatrix::from_json(bad).is_err());
        let short = r#"{"dim":2,"real":[0,1,1]}"#;
        assert!(HermitianMatrix::from_json(short).is_err());
        let real_only = r#"{"dim":2,"real":[0,1,1,0]}"#;
        assert_eq!(HermitianMatrix::from_json(real_only).unwrap().get(0, 1).re, 1.0);
        let extra = r#"{"dim":1,"real":[1],"imag":[0],"junk":1}"#;
        assert!(HermitianMatrix::from_json(extra).is_err());
    }
}
