//! Numerical checks of the inequalities: exact enumeration on small models,
//! randomized suites for the trace inequalities, the conjecture explorer and
//! Monte Carlo tail comparisons.

pub mod cases;
pub mod ensemble;
pub mod fuzz;
pub mod tail;
pub mod theorems;

pub use cases::{normalized_slack, CaseInputs, ConjectureForm, Evaluation};
pub use ensemble::{Ensemble, EnsembleKind};
pub use fuzz::{
    default_s_values, explore_conjecture, fuzz_emvti, fuzz_matrix_entropy_young, fuzz_operator_cs, fuzz_pmvti,
    fuzz_young_commuting, replay, ConjectureReport, DimSlack, FuzzReport, FuzzSettings, ReplayOutcome, WorstCase,
    FUZZ_TOL,
};
pub use tail::{
    dkw_radius, empirical_tail, empirical_tail_rect, linear_grid, EmpiricalTail, Statistic, SurvivalPoint,
    TailComparison,
};
pub use theorems::{
    certified_conditional_variances, default_theta_psi, verify_exp_efron_stein, verify_kernel_exp_moments,
    verify_kernel_identities, verify_kernel_poly_moments, verify_poly_efron_stein, CheckReport, CheckRow, CHECK_TOL,
};
