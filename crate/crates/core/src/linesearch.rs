//! Zero-order linesearch: accept `λ` when
//! `φ(2λ) ≤ φ(λ) − λ⟨G, ∇f(x)⟩ + (λ/2)‖G‖²`, with `φ(t) = f(x − tG)` and
//! `G` the gradient mapping at `λ`. Only function values are needed on top
//! of the gradient already computed at `x`.

use serde::{Deserialize, Serialize};

use crate::numkit::{dot_unchecked, DenseVector};
use crate::problems::CompositeProblem;
use crate::prox::GradMapResult;

/// Relative slack of the acceptance test.
pub const DEFAULT_SLACK: f64 = 1e-12;
/// Additive slack of [`stepsize_interval_audit`].
pub const INTERVAL_AUDIT_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinesearchConfig {
    /// Backtracking factor `C ∈ (0, 1)`.
    pub factor: f64,
    /// Starting stepsize when there is no previous iteration.
    pub lambda_init: f64,
    pub max_backtracks: usize,
    /// Relative slack, scaled by `max(1, |φ(λ)|)`.
    pub slack: f64,
}

impl Default for LinesearchConfig {
    fn default() -> Self {
        Self { factor: 0.5, lambda_init: 1.0, max_backtracks: 60, slack: DEFAULT_SLACK }
    }
}

impl LinesearchConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.factor > 0.0 && self.factor < 1.0) {
            return Err(format!("backtracking factor must lie in (0, 1), got {}", self.factor));
        }
        if !(self.lambda_init > 0.0 && self.lambda_init.is_finite()) {
            return Err(format!("lambda_init must be positive, got {}", self.lambda_init));
        }
        if self.max_backtracks < 1 {
            return Err("max_backtracks must be at least 1".into());
        }
        if !(self.slack >= 0.0) {
            return Err(format!("slack must be nonnegative, got {}", self.slack));
        }
        Ok(())
    }
}

/// One evaluation of the acceptance test.
#[derive(Clone, Debug)]
pub struct ZoCheck {
    pub holds: bool,
    pub grad_map: GradMapResult,
    /// `φ(λ) = f(x − λG)`.
    pub phi_lambda: f64,
    /// `φ(2λ)`.
    pub phi_2lambda: f64,
    pub f_evals: u64,
}

impl ZoCheck {
    pub fn g_map(&self) -> &DenseVector {
        &self.grad_map.g_map
    }
}

/// `φ(2λ) ≤ φ(λ) − λ⟨G, g⟩ + (λ/2)‖G‖² + slack·max(1, |φ(λ)|)`; false on non-finite input.
pub fn zo_inequality(phi_lambda: f64, phi_2lambda: f64, g_dot_grad: f64, g_norm_sq: f64, lambda: f64, slack: f64) -> bool {
    if !(phi_lambda.is_finite() && phi_2lambda.is_finite()) {
        return false;
    }
    let rhs = phi_lambda - lambda * g_dot_grad + 0.5 * lambda * g_norm_sq;
    phi_2lambda <= rhs + slack * phi_lambda.abs().max(1.0)
}

/// Smooth form `φ(2λ) ≤ φ(λ) + (λ/2)φ′(0)` with `φ′(0) = −‖∇f(x)‖²`.
pub fn zo_inequality_smooth(phi_lambda: f64, phi_2lambda: f64, grad_norm_sq: f64, lambda: f64, slack: f64) -> bool {
    if !(phi_lambda.is_finite() && phi_2lambda.is_finite()) {
        return false;
    }
    phi_2lambda <= phi_lambda - 0.5 * lambda * grad_norm_sq + slack * phi_lambda.abs().max(1.0)
}

/// Evaluates the acceptance test at `λ`: one prox and two counted function values.
pub fn zo_condition(problem: &CompositeProblem, x: &DenseVector, f_grad: &DenseVector, lambda: f64) -> ZoCheck {
    zo_condition_with_slack(problem, x, f_grad, lambda, DEFAULT_SLACK)
}

pub fn zo_condition_with_slack(
    problem: &CompositeProblem,
    x: &DenseVector,
    f_grad: &DenseVector,
    lambda: f64,
    slack: f64,
) -> ZoCheck {
    let grad_map = problem.grad_map(f_grad, x, lambda);
    let g = &grad_map.g_map;
    let phi_lambda = problem.smooth().value(&grad_map.x_plus);
    let phi_2lambda = problem.smooth().value(&x.axpy(-2.0 * lambda, g));
    let holds = zo_inequality(
        phi_lambda,
        phi_2lambda,
        dot_unchecked(g.as_slice(), f_grad.as_slice()),
        g.norm_sq(),
        lambda,
        slack,
    );
    ZoCheck { holds, grad_map, phi_lambda, phi_2lambda, f_evals: 2 }
}

/// `2(f_prev − f_cur)/‖∇f‖²` when finite and positive, else `fallback`.
pub fn warm_start_lambda(f_prev: f64, f_cur: f64, grad_norm_sq: f64, fallback: f64) -> f64 {
    let lam = 2.0 * (f_prev - f_cur) / grad_norm_sq;
    if lam.is_finite() && lam > 0.0 {
        lam
    } else {
        fallback
    }
}

/// Accepted step of [`backtrack`].
#[derive(Clone, Debug)]
pub struct LinesearchOutcome {
    pub lambda: f64,
    pub grad_map: GradMapResult,
    /// `f(x − λG)`, already paid for by the test.
    pub f_plus: f64,
    pub f_evals: u64,
    pub prox_evals: u64,
    pub backtracks: usize,
}

impl LinesearchOutcome {
    pub fn g_map(&self) -> &DenseVector {
        &self.grad_map.g_map
    }

    pub fn x_plus(&self) -> &DenseVector {
        &self.grad_map.x_plus
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("no stepsize accepted after {tried} trials (smallest tried {best_lambda:e}, last φ(λ) = {last_phi})")]
pub struct LinesearchError {
    /// Smallest stepsize tried.
    pub best_lambda: f64,
    pub tried: usize,
    pub last_phi: f64,
    pub f_evals: u64,
    pub prox_evals: u64,
}

/// Tries `λ_start·Cⁱ` for `i = 0, …, max_backtracks` and returns the first
/// stepsize passing [`zo_condition`].
pub fn backtrack(
    problem: &CompositeProblem,
    x: &DenseVector,
    f_grad: &DenseVector,
    lambda_start: f64,
    cfg: &LinesearchConfig,
) -> Result<LinesearchOutcome, LinesearchError> {
    debug_assert!(lambda_start > 0.0);
    let mut lambda = lambda_start;
    let mut f_evals = 0;
    let mut prox_evals = 0;
    let mut last_phi = f64::NAN;
    for i in 0..=cfg.max_backtracks {
        if i > 0 {
            lambda *= cfg.factor;
        }
        let check = zo_condition_with_slack(problem, x, f_grad, lambda, cfg.slack);
        f_evals += check.f_evals;
        prox_evals += check.grad_map.prox_count;
        last_phi = check.phi_lambda;
        if check.holds {
            return Ok(LinesearchOutcome {
                lambda,
                f_plus: check.phi_lambda,
                grad_map: check.grad_map,
                f_evals,
                prox_evals,
                backtracks: i,
            });
        }
    }
    Err(LinesearchError { best_lambda: lambda, tried: cfg.max_backtracks + 1, last_phi, f_evals, prox_evals })
}

/// `2(f(x − λg) − f(x − 2λg))/‖g‖² − λ`; nonnegative (up to rounding) for any
/// stepsize accepted in the smooth case.
pub fn stepsize_interval_margin(
    f: impl Fn(&DenseVector) -> f64,
    x: &DenseVector,
    lambda: f64,
    f_grad: &DenseVector,
) -> f64 {
    let y1 = x.axpy(-lambda, f_grad);
    let y2 = x.axpy(-2.0 * lambda, f_grad);
    2.0 * (f(&y1) - f(&y2)) / f_grad.norm_sq() - lambda
}

/// `λ ≤ 2(f(y₁) − f(y₂))/‖∇f(x)‖² + 1e−9` with `y₁ = x − λ∇f`, `y₂ = x − 2λ∇f`.
pub fn stepsize_interval_audit(
    f: impl Fn(&DenseVector) -> f64,
    x: &DenseVector,
    lambda: f64,
    f_grad: &DenseVector,
) -> bool {
    let m = stepsize_interval_margin(f, x, lambda, f_grad);
    m.is_finite() && m >= -INTERVAL_AUDIT_SLACK
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::DenseMatrix;
    use crate::problems::SmoothKind;
    use crate::prox::ProxTerm;

    fn half_square() -> CompositeProblem {
        CompositeProblem::custom(
            SmoothKind::Quadratic { hessian: DenseMatrix::identity(1), linear: DenseVector::zeros(1) },
            ProxTerm::Zero,
            [1.0].into(),
        )
    }

    #[test]
    fn threshold_on_half_square() {
        let p = half_square();
        let x: DenseVector = [1.0].into();
        assert!(zo_condition(&p, &x, &x, 1.0 / 3.0).holds);
        assert!(!zo_condition(&p, &x, &x, 1.0 / 3.0 + 1e-6).holds);
        assert!(zo_condition(&p, &x, &x, 1e-8).holds);
    }

    #[test]
    fn backtracking_example() {
        let p = half_square();
        let x: DenseVector = [1.0].into();
        let out = backtrack(&p, &x, &x, 1.0, &LinesearchConfig::default()).unwrap();
        assert_eq!(out.lambda, 0.25);
        assert_eq!(out.backtracks, 2);
        assert_eq!((out.f_evals, out.prox_evals), (6, 3));
        assert_eq!(p.counts().f_evals, 6);
        assert_eq!(p.counts().prox_evals, 3);
        let out = backtrack(&p, &x, &x, 0.2, &LinesearchConfig::default()).unwrap();
        assert_eq!((out.lambda, out.backtracks), (0.2, 0));
    }

    #[test]
    fn warm_start_examples() {
        assert_eq!(warm_start_lambda(2.0, 1.0, 4.0, 9.0), 0.5);
        assert_eq!(warm_start_lambda(1.0, 1.0, 4.0, 9.0), 9.0);
        assert_eq!(warm_start_lambda(2.0, 1.0, 0.0, 9.0), 9.0);
        assert_eq!(warm_start_lambda(1.0, 2.0, 4.0, 9.0), 9.0);
    }

    #[test]
    fn nonfinite_values_reject() {
        assert!(!zo_inequality(f64::NAN, 0.0, 1.0, 1.0, 0.1, 0.0));
        assert!(!zo_inequality(0.0, f64::INFINITY, 1.0, 1.0, 0.1, 0.0));
        assert!(!zo_inequality_smooth(f64::NAN, 0.0, 1.0, 0.1, 0.0));
    }

    #[test]
    fn exhausted_backtracking_reports_smallest_lambda() {
        // an ascent direction passed as the gradient is rejected at every λ
        let p = half_square();
        let x: DenseVector = [1.0].into();
        let g: DenseVector = [-1.0].into();
        let cfg = LinesearchConfig { max_backtracks: 3, ..Default::default() };
        let err = backtrack(&p, &x, &g, 1.0, &cfg).unwrap_err();
        assert_eq!(err.best_lambda, 0.125);
        assert_eq!(err.tried, 4);
        assert_eq!(p.counts().f_evals, 8);
    }

    #[test]
    fn interval_audit_examples() {
        let f = |v: &DenseVector| 0.5 * v.norm_sq();
        let x: DenseVector = [1.0].into();
        let m = stepsize_interval_margin(f, &x, 0.25, &x);
        assert!((m - (0.3125 - 0.25)).abs() < 1e-15);
        assert!(stepsize_interval_audit(f, &x, 0.25, &x));
        assert!(stepsize_interval_margin(f, &x, 1.0 / 3.0, &x).abs() < 1e-9);
        for lam in [0.34, 0.5, 1.0, 3.0] {
            assert!(!stepsize_interval_audit(f, &x, lam, &x));
        }
    }

    #[test]
    fn config_validation() {
        assert!(LinesearchConfig::default().validate().is_ok());
        assert!(LinesearchConfig { factor: 1.0, ..Default::default() }.validate().is_err());
        assert!(LinesearchConfig { max_backtracks: 0, ..Default::default() }.validate().is_err());
        assert!(LinesearchConfig { lambda_init: 0.0, ..Default::default() }.validate().is_err());
    }
}
