use super::{CMat, HermitianMatrix, C64};
use crate::error::{Error, Result};

/// Linear map on `d x d` matrices, stored as a `d² x d²` matrix acting on
/// column-stacked vectorizations.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperOperator {
    dim: usize,
    m: CMat,
    self_adjoint: bool,
}

fn vec_of(m: &CMat) -> CMat {
    // nalgebra storage is column-major, i.e. already column-stacked.
    CMat::from_column_slice(m.len(), 1, m.as_slice())
}

impl SuperOperator {
    pub fn from_matrix(dim: usize, m: CMat) -> Result<Self> {
        let n = dim * dim;
        if dim == 0 || m.nrows() != n || m.ncols() != n {
            return Err(Error::Shape(format!(
                "superoperator on {dim}x{dim} matrices needs a {n}x{n} representation, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let self_adjoint = (&m - m.adjoint()).norm() <= 1e-12 * m.norm().max(1.0);
        Ok(Self { dim, m, self_adjoint })
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, m: CMat::identity(dim * dim, dim * dim), self_adjoint: true }
    }

    /// `M ↦ A M`, represented by `I ⊗ A`.
    pub fn left_mult(a: &CMat) -> Result<Self> {
        let d = a.nrows();
        if a.ncols() != d {
            return Err(Error::Shape("left multiplier must be square".into()));
        }
        Self::from_matrix(d, CMat::identity(d, d).kronecker(a))
    }

    /// `M ↦ M B`, represented by `Bᵀ ⊗ I`.
    pub fn right_mult(b: &CMat) -> Result<Self> {
        let d = b.nrows();
        if b.ncols() != d {
            return Err(Error::Shape("right multiplier must be square".into()));
        }
        Self::from_matrix(d, b.transpose().kronecker(&CMat::identity(d, d)))
    }

    pub fn left_mult_op(a: &HermitianMatrix) -> Self {
        Self::left_mult(a.as_mat()).expect("Hermitian matrices are square")
    }

    pub fn right_mult_op(b: &HermitianMatrix) -> Self {
        Self::right_mult(b.as_mat()).expect("Hermitian matrices are square")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.self_adjoint
    }

    pub fn as_mat(&self) -> &CMat {
        &self.m
    }

    pub fn apply(&self, x: &CMat) -> Result<CMat> {
        if x.nrows() != self.dim || x.ncols() != self.dim {
            return Err(Error::Shape(format!("expected a {0}x{0} argument", self.dim)));
        }
        let y = &self.m * vec_of(x);
        Ok(CMat::from_column_slice(self.dim, self.dim, y.as_slice()))
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Shape("superoperator dimensions differ".into()));
        }
        Self::from_matrix(self.dim, &self.m * &other.m)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Shape("superoperator dimensions differ".into()));
        }
        Self::from_matrix(self.dim, &self.m + &other.m)
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { dim: self.dim, m: &self.m * C64::new(a, 0.0), self_adjoint: self.self_adjoint }
    }

    /// The representation as a Hermitian `d² x d²` matrix; fails unless the
    /// operator is self-adjoint.
    pub fn as_hermitian(&self) -> Result<HermitianMatrix> {
        if !self.self_adjoint {
            return Err(Error::Precondition("superoperator is not self-adjoint".into()));
        }
        Ok(HermitianMatrix::project(self.m.clone()))
    }

    /// Standard function of a self-adjoint superoperator.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = self.as_hermitian()?.map_spectrum(f);
        Ok(Self { dim: self.dim, m: h.into_mat(), self_adjoint: true })
    }

    /// `|𝒜|`, the absolute value from the Jordan decomposition.
    pub fn abs(&self) -> Result<Self> {
        self.map_spectrum(f64::abs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::cmat_from_real;

    #[test]
    fn identity_and_products() {
        let i = HermitianMatrix::identity(3);
        assert_eq!(SuperOperator::left_mult_op(&i), SuperOperator::identity(3));

        let a = cmat_from_real(&[vec![1.0, 2.0], vec![-1.0, 0.5]]);
        let b = cmat_from_real(&[vec![0.0, 3.0], vec![1.0, 1.0]]);
        let m = CMat::from_fn(2, 2, |i, j| C64::new(i as f64 + 0.3, j as f64 - 0.7));
        let l = SuperOperator::left_mult(&a).unwrap();
        let r = SuperOperator::right_mult(&b).unwrap();
        assert!((l.apply(&m).unwrap() - &a * &m).norm() < 1e-14);
        assert!((r.apply(&m).unwrap() - &m * &b).norm() < 1e-14);
        assert_eq!(l.compose(&r).unwrap().as_mat(), r.compose(&l).unwrap().as_mat());
    }

    #[test]
    fn left_mult_of_diag_has_repeated_spectrum() {
        let op = SuperOperator::left_mult_op(&HermitianMatrix::diag(&[2.0, -1.0]));
        assert!(op.is_self_adjoint());
        let ev = op.as_hermitian().unwrap().eigenvalues();
        let want = [-1.0, -1.0, 2.0, 2.0];
        for (x, y) in ev.iter().zip(want) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn non_self_adjoint_is_flagged() {
        let a = cmat_from_real(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        let op = SuperOperator::left_mult(&a).unwrap();
        assert!(!op.is_self_adjoint());
        assert!(op.abs().is_err());
    }
}
