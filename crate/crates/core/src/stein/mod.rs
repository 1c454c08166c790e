//! Exchangeable pairs, kernel Stein pairs and the coordinate-replacement
//! kernel coupling.
//!
//! A [`MatrixModel`] pairs a product distribution with a Hermitian-valued map
//! `H`. The exchangeable pair refreshes one uniformly chosen coordinate. On
//! finite models every expectation is computed by sweeping the product space
//! ([`Enumeration`]); otherwise seeded Monte Carlo is used and the sample
//! count is recorded.

mod builtins;
mod coupling;
mod dist;
mod kernel;
mod model;
mod pair;

pub use builtins::{
    bounded_diff_demo, compound_covariance, hypercube_sum, random_binary, rectangular_demo, EntryDist, ModelSpec,
    TableEntry, MAX_SPEC_SIZE,
};
pub use coupling::{
    coupling_stats, default_horizon, estimate_kernel, estimate_kernel_with_sup, harmonic, kernel_by_path_enumeration,
    simulate_kernel_coupling, sup_norm, truncation_bound, CouplingRun, CouplingStats, CouplingStep, KernelEstimate,
};
pub use dist::{Coordinate, ProductDistribution, PROB_SUM_TOL};
pub use kernel::{
    all_conditional_variances, check_stein_identity, conditional_variances, default_s_grid,
    exchangeable_pairs_identity, kernel_antisymmetry_defect, kernel_centering, kernel_conditional_mean, r_psi,
    ConditionalVariances, EstimatedKernel, EstimationMethod, Kernel, MatrixSteinKernel, PoissonKernel, RPsi,
    SteinResidual, MC_RADIUS_Z, POISSON_MAX_COORDS,
};
pub use model::{
    rectangularize, sample_mean, Enumeration, MatrixModel, MeanEstimate, MeanSpec, Provenance, RectModel,
    ENUMERATION_BUDGET,
};
pub use pair::{
    exchangeability_defect, gamma0, joint_pmf, make_exchangeable_pair, variance_proxy, variance_proxy_mc,
    ExchangeablePairSampler, PairDraw, ProxyValue,
};
