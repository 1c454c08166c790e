//! Exact-enumeration checks of the moment and exponential inequalities.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bounds::{efron_stein_exp_rhs, efron_stein_poly_rhs};
use crate::error::{Error, Result};
use crate::matcore::{log_mean_ntrace_exp, HermitianMatrix, ScalarFn};
use crate::stein::{
    all_conditional_variances, check_stein_identity, exchangeable_pairs_identity, kernel_antisymmetry_defect,
    kernel_centering, r_psi, variance_proxy, ConditionalVariances, Enumeration, Kernel, MatrixModel,
    ENUMERATION_BUDGET,
};

/// Absolute tolerance for the exact checks.
pub const CHECK_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub params: BTreeMap<String, f64>,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub slack: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub model: String,
    pub outcomes: usize,
    pub tolerance: f64,
    pub pass: bool,
    pub min_slack: f64,
    pub rows: Vec<CheckRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CheckReport {
    fn new(check: &str, model: &str, outcomes: usize, rows: Vec<CheckRow>, notes: Vec<String>) -> Self {
        let min_slack = rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
        Self {
            check: check.into(),
            model: model.into(),
            outcomes,
            tolerance: CHECK_TOL,
            pass: rows.iter().all(|r| r.pass),
            min_slack,
            rows,
            notes,
        }
    }
}

fn row(params: &[(&str, f64)], lhs: f64, rhs: f64) -> CheckRow {
    let slack = rhs - lhs;
    CheckRow {
        label: None,
        params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        lhs,
        rhs,
        slack,
        pass: slack >= -CHECK_TOL,
    }
}

fn check_p_list(p_list: &[u32]) -> Result<()> {
    if p_list.is_empty() || p_list.contains(&0) {
        return Err(Error::Parameter("p list must be nonempty with every p ≥ 1".into()));
    }
    Ok(())
}

/// `Σ_i |λ_i|^r`, i.e. `‖A‖_r^r` for Hermitian `A`.
fn schatten_pow(a: &HermitianMatrix, r: f64) -> f64 {
    a.eigenvalues().into_iter().map(|l| l.abs().powf(r)).sum()
}

fn moment(e: &Enumeration, mats: &[HermitianMatrix], r: f64) -> f64 {
    e.expect_scalar(|a| schatten_pow(&mats[a], r))
}

/// Variance proxy at every outcome.
pub fn variance_proxies(model: &MatrixModel, e: &Enumeration) -> Result<Vec<HermitianMatrix>> {
    e.values.iter().map(|z| variance_proxy(model, z)).collect()
}

/// `(E‖X‖_{2p}^{2p})^{1/(2p)} ≤ √(2(2p−1)) (E‖V‖_p^p)^{1/(2p)}` for each `p`.
pub fn verify_poly_efron_stein(model: &MatrixModel, p_list: &[u32]) -> Result<CheckReport> {
    check_p_list(p_list)?;
    let e = model.enumerate(ENUMERATION_BUDGET)?;
    let v = variance_proxies(model, &e)?;
    let rows = p_list
        .iter()
        .map(|&p| {
            let pf = p as f64;
            let lhs = moment(&e, &e.x, 2.0 * pf).powf(1.0 / (2.0 * pf));
            Ok(row(&[("p", pf)], lhs, efron_stein_poly_rhs(p, moment(&e, &v, pf))?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckReport::new("poly_efron_stein", model.name(), e.len(), rows, vec![]))
}

/// Eight admissible pairs: `ψ ∈ {1, 4}` and `θ = ±{¼, ¾}·√(ψ/2)`.
pub fn default_theta_psi() -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for psi in [1.0f64, 4.0] {
        let edge = (psi / 2.0).sqrt();
        for f in [-0.75, -0.25, 0.25, 0.75] {
            out.push((f * edge, psi));
        }
    }
    out
}

/// `log E tr̄ e^{θX} ≤ (θ²/ψ)/(1 − 2θ²/ψ) · log E tr̄ e^{ψV}` on admissible
/// pairs. Pairs outside `|θ| ≤ √(ψ/2)` are a precondition error.
pub fn verify_exp_efron_stein(model: &MatrixModel, pairs: &[(f64, f64)]) -> Result<CheckReport> {
    if pairs.is_empty() {
        return Err(Error::Parameter("at least one (theta, psi) pair is required".into()));
    }
    let e = model.enumerate(ENUMERATION_BUDGET)?;
    let v = variance_proxies(model, &e)?;
    let mut rows = Vec::new();
    for &(theta, psi) in pairs {
        let scaled_v: Vec<HermitianMatrix> = v.iter().map(|m| m.scaled(psi)).collect();
        let log_mgf_v = log_mean_ntrace_exp(e.probs.iter().copied().zip(scaled_v.iter()));
        let scaled_x: Vec<HermitianMatrix> = e.x.iter().map(|m| m.scaled(theta)).collect();
        let lhs = log_mean_ntrace_exp(e.probs.iter().copied().zip(scaled_x.iter()));
        let rhs = efron_stein_exp_rhs(theta, psi, log_mgf_v.max(0.0))?;
        rows.push(row(&[("theta", theta), ("psi", psi)], lhs, rhs));
    }
    Ok(CheckReport::new("exp_efron_stein", model.name(), e.len(), rows, vec![]))
}

/// Conditional variances with `V^K` inflated to a certified upper bound when
/// the kernel is approximate: `K = K̂ + E` with `‖E‖ ≤ ε` gives
/// `K² ≼ K̂² + (2‖K̂‖ε + ε²) I`.
pub fn certified_conditional_variances(e: &Enumeration, kernel: &dyn Kernel) -> Vec<ConditionalVariances> {
    let eps = kernel.error_bound();
    let mut cond = all_conditional_variances(e, kernel);
    if eps > 0.0 {
        for (a, c) in cond.iter_mut().enumerate() {
            let pad: f64 = e
                .transitions(a)
                .into_iter()
                .map(|(b, w)| w * (2.0 * kernel.eval(a, b).op_norm() * eps + eps * eps))
                .sum();
            c.v_k = &c.v_k + &HermitianMatrix::identity(e.dim()).scaled(0.5 * pad);
        }
    }
    cond
}

fn kernel_notes(kernel: &dyn Kernel) -> Vec<String> {
    let eps = kernel.error_bound();
    if eps > 0.0 {
        vec![format!("approximate kernel {}: V^K inflated by error bound {eps:.3e}", kernel.name())]
    } else {
        vec![]
    }
}

/// `(E‖X‖_{2p}^{2p})^{1/(2p)} ≤ √(2p−1) (E‖½(sV_X + s⁻¹V^K)‖_p^p)^{1/(2p)}`
/// for every `p` and every `s`; each row reports the smallest slack over the
/// grid and the `s` where it occurs.
pub fn verify_kernel_poly_moments(
    e: &Enumeration,
    kernel: &dyn Kernel,
    p_list: &[u32],
    s_grid: &[f64],
) -> Result<CheckReport> {
    check_p_list(p_list)?;
    if s_grid.is_empty() || s_grid.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::Parameter("s grid must be nonempty and positive".into()));
    }
    let cond = certified_conditional_variances(e, kernel);
    let mut rows = Vec::new();
    for &p in p_list {
        let pf = p as f64;
        let lhs = moment(e, &e.x, 2.0 * pf).powf(1.0 / (2.0 * pf));
        let mut worst: Option<CheckRow> = None;
        for &s in s_grid {
            let mix: Vec<HermitianMatrix> =
                cond.iter().map(|c| (&c.v_x.scaled(s) + &c.v_k.scaled(1.0 / s)).scaled(0.5)).collect();
            let rhs = (2.0 * pf - 1.0).sqrt() * moment(e, &mix, pf).powf(1.0 / (2.0 * pf));
            let r = row(&[("p", pf), ("s", s)], lhs, rhs);
            if worst.as_ref().is_none_or(|w| r.slack < w.slack) {
                worst = Some(r);
            }
        }
        rows.extend(worst);
    }
    Ok(CheckReport::new("kernel_poly_moments", kernel.name(), e.len(), rows, kernel_notes(kernel)))
}

/// `log E tr̄ e^{θX} ≤ (ψ r(ψ)/2) log(1/(1 − θ²/ψ))` for `|θ| < √ψ`, with
/// `r(ψ)` minimized over `s_grid`. The looser form
/// `r(ψ) θ² / (2(1 − θ²/ψ))` is recorded as `rhs_simple`.
pub fn verify_kernel_exp_moments(
    e: &Enumeration,
    kernel: &dyn Kernel,
    pairs: &[(f64, f64)],
    s_grid: &[f64],
) -> Result<CheckReport> {
    if pairs.is_empty() {
        return Err(Error::Parameter("at least one (theta, psi) pair is required".into()));
    }
    let cond = certified_conditional_variances(e, kernel);
    let mut rows = Vec::new();
    for &(theta, psi) in pairs {
        if !(psi > 0.0 && psi.is_finite()) || !theta.is_finite() {
            return Err(Error::Parameter(format!("invalid pair theta={theta}, psi={psi}")));
        }
        let ratio = theta * theta / psi;
        if ratio >= 1.0 {
            return Err(Error::Precondition(format!(
                "|theta| = {} must be below sqrt(psi) = {}",
                theta.abs(),
                psi.sqrt()
            )));
        }
        let r = r_psi(e, &cond, psi, s_grid)?;
        let scaled_x: Vec<HermitianMatrix> = e.x.iter().map(|m| m.scaled(theta)).collect();
        let lhs = log_mean_ntrace_exp(e.probs.iter().copied().zip(scaled_x.iter()));
        let rhs = 0.5 * psi * r.value * (-(-ratio).ln_1p());
        let simple = r.value * theta * theta / (2.0 * (1.0 - ratio));
        rows.push(row(&[("theta", theta), ("psi", psi), ("s", r.best_s), ("rhs_simple", simple)], lhs, rhs));
    }
    Ok(CheckReport::new("kernel_exp_moments", kernel.name(), e.len(), rows, kernel_notes(kernel)))
}

/// Defining properties of a kernel Stein pair: `E[K(Z, Z′) | Z] = X`,
/// antisymmetry, centering, and the exchangeable pairs identity for
/// `F ∈ {1, x, x³}`. Each row has `lhs` the defect and `rhs` the allowance
/// (`CHECK_TOL` plus the kernel's error bound, scaled where needed).
pub fn verify_kernel_identities(e: &Enumeration, kernel: &dyn Kernel) -> Result<CheckReport> {
    let eps = kernel.error_bound();
    let mut rows = Vec::new();
    let mut push = |label: &str, defect: f64, allowance: f64| {
        let mut r = row(&[], defect, CHECK_TOL + allowance);
        r.label = Some(label.to_string());
        rows.push(r);
    };
    let stein = check_stein_identity(e, kernel);
    push("stein_identity", stein.residual, stein.radius);
    push("antisymmetry", kernel_antisymmetry_defect(e, kernel), 0.0);
    push("centering", kernel_centering(e, kernel), eps);
    let fs = [ScalarFn::everywhere("one", |_| 1.0), ScalarFn::everywhere("x", |x| x), ScalarFn::cube()];
    let sup_x = e.x.iter().map(HermitianMatrix::op_norm).fold(0.0, f64::max);
    for f in &fs {
        let sup_diff = 2.0 * e.x.iter().map(|x| x.map_spectrum(|v| f.eval(v)).op_norm()).fold(0.0, f64::max);
        let defect = exchangeable_pairs_identity(e, kernel, f)?;
        // ‖K̂ − K‖ ≤ ε perturbs ½E[K(F(X) − F(X′))] by at most ½ε·sup‖F(X) − F(X′)‖.
        push(&format!("exchangeable_pairs[F={}]", f.name()), defect, 0.5 * eps * sup_diff + CHECK_TOL * sup_x);
    }
    Ok(CheckReport::new("kernel_identities", kernel.name(), e.len(), rows, kernel_notes(kernel)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stein::{hypercube_sum, random_binary, PoissonKernel};

    #[test]
    fn hypercube_p1_values() {
        let m = hypercube_sum(3, 1).unwrap();
        let r = verify_poly_efron_stein(&m, &[1]).unwrap();
        let row = &r.rows[0];
        assert!((row.lhs - 3f64.sqrt()).abs() < 1e-12);
        assert!((row.rhs - 6f64.sqrt()).abs() < 1e-12);
        assert!(r.pass);
    }

    #[test]
    fn scalar_p1_is_classical_efron_stein() {
        for seed in 0..5 {
            let m = random_binary(3, 1, seed).unwrap();
            let r = verify_poly_efron_stein(&m, &[1]).unwrap();
            let e = m.enumerate(ENUMERATION_BUDGET).unwrap();
            let v = variance_proxies(&m, &e).unwrap();
            let ev = e.expect_scalar(|a| v[a].trace());
            assert!(r.rows[0].lhs.powi(2) <= 2.0 * ev + 1e-12);
        }
    }

    #[test]
    fn exp_and_kernel_checks_pass_on_small_models() {
        let m = random_binary(3, 2, 11).unwrap();
        assert!(verify_exp_efron_stein(&m, &default_theta_psi()).unwrap().pass);
        let e = m.enumerate(ENUMERATION_BUDGET).unwrap();
        let k = PoissonKernel::new(&e).unwrap();
        assert!(verify_kernel_poly_moments(&e, &k, &[1, 2], &crate::stein::default_s_grid()).unwrap().pass);
        let pairs = [(0.3, 1.0), (-0.9, 1.0), (1.5, 4.0)];
        assert!(verify_kernel_exp_moments(&e, &k, &pairs, &crate::stein::default_s_grid()).unwrap().pass);
    }

    #[test]
    fn exact_kernel_identities_pass() {
        let m = random_binary(3, 2, 4).unwrap();
        let e = m.enumerate(ENUMERATION_BUDGET).unwrap();
        let rep = verify_kernel_identities(&e, &PoissonKernel::new(&e).unwrap()).unwrap();
        assert!(rep.pass && rep.rows.len() == 6, "{rep:?}");
    }

    #[test]
    fn inadmissible_pairs_are_rejected() {
        let m = hypercube_sum(2, 1).unwrap();
        assert!(verify_exp_efron_stein(&m, &[(1.0, 1.0)]).is_err());
        let e = m.enumerate(ENUMERATION_BUDGET).unwrap();
        let k = PoissonKernel::new(&e).unwrap();
        assert!(verify_kernel_exp_moments(&e, &k, &[(1.0, 1.0)], &[1.0]).is_err());
    }
}
