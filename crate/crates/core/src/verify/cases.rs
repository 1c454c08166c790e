//! Serializable inequality instances and their exact evaluation.
//!
//! Every fuzz trial reduces to one [`CaseInputs`] value. Evaluating it again
//! after a JSON round trip reproduces the same slack bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{matrix_function, trace_inner, CMat, HermitianMatrix, RectMatrix, ScalarFn, SuperOperator};

/// The two inequalities of the signed mean value conjecture.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConjectureForm {
    Exponential,
    Polynomial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "inequality", rename_all = "snake_case", deny_unknown_fields)]
pub enum CaseInputs {
    Pmvti {
        a: HermitianMatrix,
        b: HermitianMatrix,
        c: HermitianMatrix,
        q: u32,
        s: f64,
    },
    Emvti {
        a: HermitianMatrix,
        b: HermitianMatrix,
        c: HermitianMatrix,
        s: f64,
    },
    YoungCommuting {
        a: HermitianMatrix,
        b: HermitianMatrix,
        p: f64,
    },
    /// `op` holds the `d² x d²` matrix of a self-adjoint superoperator.
    OperatorCs {
        op: HermitianMatrix,
        m: RectMatrix,
        n: RectMatrix,
    },
    MatrixEntropyYoung {
        u: Vec<HermitianMatrix>,
        w: Vec<HermitianMatrix>,
    },
    Conjecture {
        form: ConjectureForm,
        a: HermitianMatrix,
        b: HermitianMatrix,
        c: HermitianMatrix,
        q: u32,
        s: f64,
    },
}

/// Both sides of an instance and the normalized slack
/// `(rhs − lhs) / max(1, |rhs| + |lhs|)`. For semidefinite inequalities `lhs`
/// is `0` and `rhs` is `λ_min(RHS − LHS)` before normalization by the sum of
/// the operator norms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

pub fn normalized_slack(lhs: f64, rhs: f64) -> f64 {
    (rhs - lhs) / (rhs.abs() + lhs.abs()).max(1.0)
}

fn scalar(lhs: f64, rhs: f64) -> Evaluation {
    Evaluation { lhs, rhs, slack: normalized_slack(lhs, rhs) }
}

fn same_dim(ms: &[&HermitianMatrix]) -> Result<usize> {
    let d = ms[0].dim();
    if ms.iter().any(|m| m.dim() != d) {
        return Err(Error::Shape("inequality inputs must share one dimension".into()));
    }
    Ok(d)
}

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Parameter(format!("s must be positive and finite, got {s}")));
    }
    Ok(())
}

fn check_q(q: u32) -> Result<()> {
    if q == 0 || q > 64 {
        return Err(Error::Parameter(format!("q must be an integer in 1..=64, got {q}")));
    }
    Ok(())
}

fn power(a: &HermitianMatrix, q: u32) -> HermitianMatrix {
    a.map_spectrum(|x| x.powi(q as i32))
}

fn abs_power(a: &HermitianMatrix, r: u32) -> HermitianMatrix {
    a.map_spectrum(|x| if r == 0 { 1.0 } else { x.abs().powi(r as i32) })
}

/// `s D² + s⁻¹ C²`.
fn weighted_squares(diff: &HermitianMatrix, c: &HermitianMatrix, s: f64) -> HermitianMatrix {
    &diff.square().scaled(s) + &c.square().scaled(1.0 / s)
}

pub fn pmvti(a: &HermitianMatrix, b: &HermitianMatrix, c: &HermitianMatrix, q: u32, s: f64) -> Result<Evaluation> {
    same_dim(&[a, b, c])?;
    check_q(q)?;
    check_s(s)?;
    let lhs = c.trace_product(&(&power(a, q) - &power(b, q))).abs();
    let w = weighted_squares(&(a - b), c, s);
    let rhs = 0.25 * q as f64 * w.trace_product(&(&abs_power(a, q - 1) + &abs_power(b, q - 1)));
    Ok(scalar(lhs, rhs))
}

pub fn emvti(a: &HermitianMatrix, b: &HermitianMatrix, c: &HermitianMatrix, s: f64) -> Result<Evaluation> {
    let d = same_dim(&[a, b, c])? as f64;
    check_s(s)?;
    let (ea, eb) = (a.map_spectrum(f64::exp), b.map_spectrum(f64::exp));
    let lhs = (c.trace_product(&(&ea - &eb)) / d).abs();
    let w = weighted_squares(&(a - b), c, s);
    let rhs = 0.25 * w.trace_product(&(&ea + &eb)) / d;
    Ok(scalar(lhs, rhs))
}

fn psd_slack(lhs: &HermitianMatrix, rhs: &HermitianMatrix) -> Evaluation {
    let gap = (rhs - lhs).lambda_min();
    let scale = (lhs.op_norm() + rhs.op_norm()).max(1.0);
    Evaluation { lhs: 0.0, rhs: gap, slack: gap / scale }
}

/// `𝒜𝒝 ≼ |𝒜|^p/p + |𝒝|^q/q` with `𝒜 = L_A` and `𝒝 = R_B`.
pub fn young_commuting(a: &HermitianMatrix, b: &HermitianMatrix, p: f64) -> Result<Evaluation> {
    same_dim(&[a, b])?;
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Parameter(format!("Young exponent must lie in (1, ∞), got {p}")));
    }
    let q = p / (p - 1.0);
    young_superop(&SuperOperator::left_mult_op(a), &SuperOperator::right_mult_op(b), p, q)
}

pub fn young_superop(sa: &SuperOperator, sb: &SuperOperator, p: f64, q: f64) -> Result<Evaluation> {
    let lhs = sa.compose(sb)?.as_hermitian()?;
    let rhs = &sa.map_spectrum(|x| x.abs().powf(p) / p)?.as_hermitian()?
        + &sb.map_spectrum(|x| x.abs().powf(q) / q)?.as_hermitian()?;
    Ok(psd_slack(&lhs, &rhs))
}

/// `|⟨M, 𝒜N⟩| ≤ (⟨M, |𝒜|M⟩ ⟨N, |𝒜|N⟩)^{1/2}`.
pub fn operator_cs(op: &HermitianMatrix, m: &RectMatrix, n: &RectMatrix) -> Result<Evaluation> {
    let d = m.rows();
    if m.cols() != d || n.rows() != d || n.cols() != d || op.dim() != d * d {
        return Err(Error::Shape("operator Cauchy–Schwarz needs d x d matrices and a d² x d² operator".into()));
    }
    let sa = SuperOperator::from_matrix(d, op.as_mat().clone())?;
    let abs = sa.abs()?;
    let (mm, nm) = (m.as_mat(), n.as_mat());
    let lhs = trace_inner(mm, &sa.apply(nm)?).norm();
    let qm = trace_inner(mm, &abs.apply(mm)?).re.max(0.0);
    let qn = trace_inner(nm, &abs.apply(nm)?).re.max(0.0);
    Ok(scalar(lhs, (qm * qn).sqrt()))
}

/// `E tr̄(UW) ≤ log E tr̄ e^U + E tr̄[W log W]` over the uniform law on the
/// listed pairs. Requires every `W` to be positive semidefinite and
/// `E tr̄ W = 1`.
pub fn matrix_entropy_young(u: &[HermitianMatrix], w: &[HermitianMatrix]) -> Result<Evaluation> {
    if u.is_empty() || u.len() != w.len() {
        return Err(Error::Shape("entropy Young needs equally many U and W samples".into()));
    }
    let all: Vec<&HermitianMatrix> = u.iter().chain(w).collect();
    let d = same_dim(&all)? as f64;
    let k = u.len() as f64;
    let mean_ntr_w = w.iter().map(HermitianMatrix::ntrace).sum::<f64>() / k;
    if (mean_ntr_w - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!("E tr̄ W must equal 1, got {mean_ntr_w}")));
    }
    if let Some(bad) = w.iter().find(|x| !x.is_psd(1e-12)) {
        return Err(Error::Precondition(format!("W has eigenvalue {} < 0", bad.lambda_min())));
    }
    let lhs = u.iter().zip(w).map(|(a, b)| a.trace_product(b)).sum::<f64>() / (k * d);
    let log_mgf = crate::matcore::log_mean_ntrace_exp(u.iter().map(|a| (1.0 / k, a)));
    let xlogx = ScalarFn::xlogx();
    let mut entropy = 0.0;
    for x in w {
        entropy += matrix_function(x, &xlogx)?.ntrace();
    }
    Ok(scalar(lhs, log_mgf + entropy / k))
}

/// One form of the signed mean value conjecture. No absolute value on the
/// left, positive and negative parts split on the right.
pub fn conjecture(
    form: ConjectureForm,
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    c: &HermitianMatrix,
    q: u32,
    s: f64,
) -> Result<Evaluation> {
    same_dim(&[a, b, c])?;
    check_s(s)?;
    let diff = a - b;
    let (dp, dm) = (diff.map_spectrum(|x| x.max(0.0)), diff.map_spectrum(|x| (-x).max(0.0)));
    let (cp, cm) = (c.map_spectrum(|x| x.max(0.0)), c.map_spectrum(|x| (-x).max(0.0)));
    let w_plus = &dp.square().scaled(s) + &cp.square().scaled(1.0 / s);
    let w_minus = &dm.square().scaled(s) + &cm.square().scaled(1.0 / s);
    let (lhs, rhs) = match form {
        ConjectureForm::Exponential => {
            let (ea, eb) = (a.map_spectrum(f64::exp), b.map_spectrum(f64::exp));
            (c.trace_product(&(&ea - &eb)), 0.5 * (w_plus.trace_product(&ea) + w_minus.trace_product(&eb)))
        }
        ConjectureForm::Polynomial => {
            check_q(q)?;
            let lhs = c.trace_product(&(&power(a, q) - &power(b, q)));
            let rhs = 0.5
                * q as f64
                * (w_plus.trace_product(&abs_power(a, q - 1)) + w_minus.trace_product(&abs_power(b, q - 1)));
            (lhs, rhs)
        }
    };
    Ok(scalar(lhs, rhs))
}

impl CaseInputs {
    pub fn inequality(&self) -> &'static str {
        match self {
            CaseInputs::Pmvti { .. } => "pmvti",
            CaseInputs::Emvti { .. } => "emvti",
            CaseInputs::YoungCommuting { .. } => "young_commuting",
            CaseInputs::OperatorCs { .. } => "operator_cs",
            CaseInputs::MatrixEntropyYoung { .. } => "matrix_entropy_young",
            CaseInputs::Conjecture { form: ConjectureForm::Exponential, .. } => "conjecture_exponential",
            CaseInputs::Conjecture { form: ConjectureForm::Polynomial, .. } => "conjecture_polynomial",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            CaseInputs::Pmvti { a, .. }
            | CaseInputs::Emvti { a, .. }
            | CaseInputs::YoungCommuting { a, .. }
            | CaseInputs::Conjecture { a, .. } => a.dim(),
            CaseInputs::OperatorCs { m, .. } => m.rows(),
            CaseInputs::MatrixEntropyYoung { u, .. } => u.first().map_or(0, HermitianMatrix::dim),
        }
    }

    pub fn evaluate(&self) -> Result<Evaluation> {
        match self {
            CaseInputs::Pmvti { a, b, c, q, s } => pmvti(a, b, c, *q, *s),
            CaseInputs::Emvti { a, b, c, s } => emvti(a, b, c, *s),
            CaseInputs::YoungCommuting { a, b, p } => young_commuting(a, b, *p),
            CaseInputs::OperatorCs { op, m, n } => operator_cs(op, m, n),
            CaseInputs::MatrixEntropyYoung { u, w } => matrix_entropy_young(u, w),
            CaseInputs::Conjecture { form, a, b, c, q, s } => conjecture(*form, a, b, c, *q, *s),
        }
    }
}

/// Column-stacked matrix `M` as a `d x d` rectangular wrapper.
pub fn rect(m: CMat) -> RectMatrix {
    RectMatrix::new(m).expect("finite entries")
}
