//! Proximal operators, the gradient mapping, and the gradient-mapping
//! inequalities used as runtime audits.
//!
//! The gradient mapping of `f + h` at `x` with stepsize `λ` is
//! `G = (x − prox_{λh}(x − λ∇f(x))) / λ`. It reduces to `∇f(x)` when `h = 0`
//! and vanishes exactly at composite minimizers, so `‖G‖∞` doubles as the
//! stopping measure for every solver in the crate.

use serde::{Deserialize, Serialize};

use crate::numkit::{dot_unchecked, DenseVector};
use crate::problems::CompositeProblem;

/// Slack for the `h`-side inequality in [`check_lemma1_ii`].
pub const LEMMA_II_SLACK: f64 = 1e-9;
/// Slack for the linesearch implication in [`check_lemma1_iv_implication`].
pub const LEMMA_IV_SLACK: f64 = 1e-9;
/// Feasibility tolerance of the ℓ1-ball indicator, relative to `max(1, r)`.
pub const BALL_FEASIBILITY_TOL: f64 = 1e-10;

/// A prox-friendly convex term `h`.
pub trait ProxOperator {
    /// `prox_{λh}(x)`.
    fn prox(&self, x: &DenseVector, lambda: f64) -> DenseVector;

    /// `h(x)`; `+∞` outside the domain.
    fn value(&self, x: &DenseVector) -> f64;

    /// True when `h ≡ 0`, which lets the gradient mapping return `∇f` verbatim.
    fn is_zero(&self) -> bool {
        false
    }
}

/// The nonsmooth terms used by the benchmarks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProxTerm {
    Zero,
    /// `γ‖x‖₁`.
    L1 { gamma: f64 },
    /// Indicator of `{‖x‖₁ ≤ radius}`.
    L1Ball { radius: f64 },
}

impl ProxTerm {
    /// `γ‖x‖₁`. `γ = 0` is accepted and behaves like `Zero` up to rounding.
    pub fn l1(gamma: f64) -> Option<Self> {
        (gamma >= 0.0 && gamma.is_finite()).then_some(Self::L1 { gamma })
    }

    pub fn l1_ball(radius: f64) -> Option<Self> {
        (radius > 0.0 && radius.is_finite()).then_some(Self::L1Ball { radius })
    }

    /// True when `h ≡ 0`, including an ℓ1 term of weight zero.
    pub fn is_trivial(&self) -> bool {
        matches!(*self, Self::Zero | Self::L1 { gamma: 0.0 })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::L1 { .. } => "l1",
            Self::L1Ball { .. } => "l1_ball",
        }
    }
}

impl ProxOperator for ProxTerm {
    fn prox(&self, x: &DenseVector, lambda: f64) -> DenseVector {
        apply_prox(self, x, lambda)
    }

    fn value(&self, x: &DenseVector) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::L1 { gamma } => gamma * x.norm_l1(),
            Self::L1Ball { radius } => {
                if x.norm_l1() <= radius + BALL_FEASIBILITY_TOL * radius.max(1.0) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }
}

/// Componentwise soft-thresholding `sign(xᵢ)·max(|xᵢ| − t, 0)`.
pub fn prox_l1(x: &DenseVector, t: f64) -> DenseVector {
    debug_assert!(t >= 0.0);
    x.map(|v| soft_threshold(v, t))
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    let m = v.abs() - t;
    if m > 0.0 {
        m.copysign(v)
    } else {
        0.0
    }
}

/// Euclidean projection onto `{y : ‖y‖₁ ≤ r}` by sorting magnitudes and
/// soft-thresholding at the unique level that lands on the boundary.
pub fn project_l1_ball(x: &DenseVector, r: f64) -> DenseVector {
    debug_assert!(r > 0.0);
    if x.norm_l1() <= r {
        return x.clone();
    }
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in mags.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - r) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    x.map(|v| soft_threshold(v, theta))
}

/// `prox_{λh}(x)` for the closed-form terms. The ball projection does not
/// depend on `λ`.
pub fn apply_prox(term: &ProxTerm, x: &DenseVector, lambda: f64) -> DenseVector {
    match *term {
        ProxTerm::Zero => x.clone(),
        ProxTerm::L1 { gamma } => prox_l1(x, lambda * gamma),
        ProxTerm::L1Ball { radius } => project_l1_ball(x, radius),
    }
}

/// Gradient mapping together with the step it induces.
#[derive(Clone, Debug, PartialEq)]
pub struct GradMapResult {
    pub g_map: DenseVector,
    /// `x − λ·G`, recomputed from `G` rather than taken from the prox output.
    pub x_plus: DenseVector,
    pub prox_count: u64,
}

/// `G = (x − prox_{λh}(x − λ∇f(x))) / λ` and `x⁺ = x − λG`.
///
/// The caller passes `∇f(x)`; no oracle is touched here.
pub fn gradient_mapping<P: ProxOperator + ?Sized>(
    f_grad: &DenseVector,
    x: &DenseVector,
    lambda: f64,
    term: &P,
) -> GradMapResult {
    let g_map = if term.is_zero() {
        f_grad.clone()
    } else {
        let p = term.prox(&x.axpy(-lambda, f_grad), lambda);
        x.sub(&p).scaled(1.0 / lambda)
    };
    let x_plus = x.axpy(-lambda, &g_map);
    GradMapResult { g_map, x_plus, prox_count: 1 }
}

/// `h(y) − ⟨G − ∇f(x), y − x⁺⟩ − h(x⁺)`; nonnegative when the
/// convexity-like inequality holds.
pub fn lemma1_ii_margin<P: ProxOperator + ?Sized>(
    term: &P,
    x: &DenseVector,
    y: &DenseVector,
    lambda: f64,
    f_grad: &DenseVector,
) -> f64 {
    let gm = gradient_mapping(f_grad, x, lambda, term);
    let lhs = term.value(&gm.x_plus);
    let hy = term.value(y);
    if hy.is_infinite() {
        return f64::INFINITY;
    }
    let subgrad = gm.g_map.sub(f_grad);
    let rhs = hy - dot_unchecked(subgrad.as_slice(), y.sub(&gm.x_plus).as_slice());
    rhs - lhs
}

/// `h(x − λG) ≤ h(y) − ⟨G − ∇f(x), y − (x − λG)⟩`, up to [`LEMMA_II_SLACK`].
pub fn check_lemma1_ii<P: ProxOperator + ?Sized>(
    term: &P,
    x: &DenseVector,
    y: &DenseVector,
    lambda: f64,
    f_grad: &DenseVector,
) -> bool {
    lemma1_ii_margin(term, x, y, lambda, f_grad) >= -LEMMA_II_SLACK
}

/// Right side minus left side of the increment bound
/// `F(x⁺) − F(z) ≤ ⟨x⁺−x, ∇f(x⁺)−∇f(x)+½G⟩ − ‖x⁺−x‖²/(2λ) − ⟨x⁺−x, x−z⟩/λ`.
///
/// Evaluations go through the uncounted oracle path.
pub fn lemma1_iii_margin(problem: &CompositeProblem, x: &DenseVector, z: &DenseVector, lambda: f64) -> f64 {
    let g = problem.smooth().gradient_uncounted(x);
    let gm = gradient_mapping(&g, x, lambda, problem.prox_term());
    let fz = problem.objective(z);
    if fz.is_infinite() {
        return f64::INFINITY;
    }
    let step = gm.x_plus.sub(x);
    let inner = bad_term(problem, x, &g, &gm);
    let rhs = inner - step.norm_sq() / (2.0 * lambda) - dot_unchecked(step.as_slice(), x.sub(z).as_slice()) / lambda;
    rhs - (problem.objective(&gm.x_plus) - fz)
}

/// `⟨x⁺ − x, ∇f(x⁺) − ∇f(x) + ½G⟩`, the term the linesearch keeps nonpositive.
fn bad_term(problem: &CompositeProblem, x: &DenseVector, g: &DenseVector, gm: &GradMapResult) -> f64 {
    let g_plus = problem.smooth().gradient_uncounted(&gm.x_plus);
    let v = g_plus.sub(g).axpy(0.5, &gm.g_map);
    dot_unchecked(gm.x_plus.sub(x).as_slice(), v.as_slice())
}

/// `⟨x⁺ − x, ∇f(x⁺) − ∇f(x) + ½G⟩` at `(x, λ)`.
pub fn lemma1_iv_value(problem: &CompositeProblem, x: &DenseVector, lambda: f64) -> f64 {
    let g = problem.smooth().gradient_uncounted(x);
    let gm = gradient_mapping(&g, x, lambda, problem.prox_term());
    bad_term(problem, x, &g, &gm)
}

/// For a stepsize accepted by the zero-order condition, the bad term of the
/// increment bound is nonpositive (up to [`LEMMA_IV_SLACK`]).
pub fn check_lemma1_iv_implication(problem: &CompositeProblem, x: &DenseVector, lambda: f64) -> bool {
    lemma1_iv_value(problem, x, lambda) <= LEMMA_IV_SLACK
}
