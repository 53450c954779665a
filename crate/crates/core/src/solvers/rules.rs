//! Scalar stepsize and momentum rules shared by the solvers.

use crate::numkit::DenseVector;

/// Relative slack of [`armijo_accept`].
pub const ARMIJO_SLACK: f64 = 1e-12;

/// `(1 + √(1 + 4β²)) / 2`.
pub fn beta_next(beta_prev: f64) -> f64 {
    (1.0 + (1.0 + 4.0 * beta_prev * beta_prev).sqrt()) / 2.0
}

/// `((β_k + β_{k+1} − 1)/β_{k+1})·y_{k+1} + ((1 − β_k)/β_{k+1})·y_k`.
pub fn momentum_combine(y_next: &DenseVector, y_cur: &DenseVector, beta_cur: f64, beta_next: f64) -> DenseVector {
    let a = (-1.0 + beta_cur + beta_next) / beta_next;
    let b = (1.0 - beta_cur) / beta_next;
    y_next.lincomb(a, y_cur, b)
}

/// `(f(x) − f*)/‖∇f(x)‖²`.
pub fn polyak_stepsize(f_x: f64, f_star: f64, grad_norm_sq: f64) -> f64 {
    (f_x - f_star) / grad_norm_sq
}

/// `φ(λ) ≤ φ(0) + c₁λφ′(0)`, with slack `1e−12·max(1, |φ(0)|)`.
pub fn armijo_accept(phi_0: f64, phi_lambda: f64, dphi_0: f64, lambda: f64, c1: f64) -> bool {
    phi_lambda.is_finite() && phi_lambda <= phi_0 + c1 * lambda * dphi_0 + ARMIJO_SLACK * phi_0.abs().max(1.0)
}

/// `min(a, num/(2·den))`, dropping the second argument when it is undefined.
fn capped(a: f64, num: f64, den: f64) -> f64 {
    if num > 0.0 && den > 0.0 {
        a.min(num / (2.0 * den))
    } else {
        a
    }
}

/// `λ = min(√(1+θ)·λ_prev, ‖Δx‖/(2‖Δ∇f‖))`, `θ = λ/λ_prev`.
pub fn adgd_stepsize(lambda_prev: f64, theta_prev: f64, dx_norm: f64, dg_norm: f64) -> (f64, f64) {
    let first = (1.0 + theta_prev).sqrt() * lambda_prev;
    let lambda = if dg_norm > 0.0 { first.min(dx_norm / (2.0 * dg_norm)) } else { first };
    (lambda, lambda / lambda_prev)
}

/// Stepsize and inverse-stepsize estimates of the accelerated adaptive method.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdgdAccelState {
    pub lambda: f64,
    pub big_lambda: f64,
    pub theta: f64,
    pub big_theta: f64,
}

impl AdgdAccelState {
    /// `λ₀` given, `Λ₀ = 1/λ₀`, `θ₀ = Θ₀ = 0`.
    pub fn new(lambda0: f64) -> Self {
        Self { lambda: lambda0, big_lambda: 1.0 / lambda0, theta: 0.0, big_theta: 0.0 }
    }
}

/// Advances `(λ, Λ, θ, Θ)` and returns `(λ, Λ, β)` with
/// `β = (√(1/λ) − √Λ)/(√(1/λ) + √Λ)`.
pub fn adgd_accel_update(state: &mut AdgdAccelState, dx_norm: f64, dg_norm: f64) -> (f64, f64, f64) {
    let lambda = capped((1.0 + state.theta / 2.0).sqrt() * state.lambda, dx_norm, dg_norm);
    let big_lambda = capped((1.0 + state.big_theta / 2.0).sqrt() * state.big_lambda, dg_norm, dx_norm);
    state.theta = lambda / state.lambda;
    state.big_theta = big_lambda / state.big_lambda;
    state.lambda = lambda;
    state.big_lambda = big_lambda;
    let (s, t) = ((1.0 / lambda).sqrt(), big_lambda.sqrt());
    (lambda, big_lambda, (s - t) / (s + t))
}

/// `‖G‖∞`.
pub fn stationarity_norm(g: &DenseVector) -> f64 {
    g.norm_inf()
}
