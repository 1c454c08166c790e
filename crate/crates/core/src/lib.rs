//! Matrix concentration toolkit.
//!
//! The crate is organised in four layers:
//!
//! - [`matcore`]: dense Hermitian algebra (eigendecompositions, standard matrix
//!   functions, Schatten and induced norms, the semidefinite order, Hermitian
//!   dilation, and superoperators acting on `d x d` matrices).
//! - [`bounds`]: closed-form tail and expectation bounds for the largest
//!   eigenvalue of a random Hermitian matrix (Chebyshev, Laplace transform,
//!   Efron-Stein right-hand sides, bounded differences, Dobrushin, compound
//!   sample covariance, Haar random walks).
//! - [`stein`]: product distributions, matrix models `H(Z)`, exchangeable pairs,
//!   the Efron-Stein variance proxy, the coordinate-replacement kernel coupling,
//!   and exact or Monte Carlo kernels for kernel Stein pairs.
//! - [`verify`]: exact-enumeration and Monte Carlo checks of the moment
//!   inequalities, trace-inequality fuzz suites, and the signed mean value
//!   explorer.
//!
//! Every stochastic entry point takes an explicit `u64` seed and is
//! bit-reproducible.

#![forbid(unsafe_code)]
// `!(x > 0.0)` guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod matcore;
pub mod par;
pub mod rng;
pub mod stein;
pub mod verify;

pub use error::{Error, Result};
pub use matcore::{HermitianMatrix, RectMatrix, SuperOperator};
