//! Benchmark objectives: smooth oracles with call counters, paired with a
//! prox-friendly term into a composite problem.

mod families;
pub mod io;

use std::cell::Cell;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use families::{
    cubic_value_grad, least_squares_value, least_squares_value_grad, logistic_value, logistic_value_grad,
    lse_value, lse_value_grad, maxcut_smooth_part, maxcut_value, maxcut_value_grad, quadratic_value_grad,
};

use crate::error::{NumError, ProblemError};
use crate::numkit::{matvec_t, spectral_norm_default, DenseMatrix, DenseVector};
use crate::prox::{gradient_mapping, GradMapResult, ProxOperator, ProxTerm};
use crate::randgen::{
    gen_correlated_matrix, gen_regression_target, gen_uniform_matrix, gen_wishart_normalized, RngState, NOISE_SD,
};

/// Data of a smooth objective `f`.
#[derive(Clone, Debug, PartialEq)]
pub enum SmoothKind {
    /// Rows of `a` are samples; labels may be real-valued.
    Logistic { a: DenseMatrix, b: DenseVector, gamma: f64 },
    Quadratic { hessian: DenseMatrix, linear: DenseVector },
    LogSumExp { a: DenseMatrix, b: DenseVector, gamma: f64 },
    /// Smoothed maximum eigenvalue of `C + diag(y)` with a ridge on `y`.
    MaxCut { c: DenseMatrix, epsilon: f64, eta: f64 },
    LeastSquares { a: DenseMatrix, b: DenseVector },
    Cubic { h: DenseMatrix, g: DenseVector, m: f64 },
}

impl SmoothKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Logistic { .. } => "logistic",
            Self::Quadratic { .. } => "quadratic",
            Self::LogSumExp { .. } => "log_sum_exp",
            Self::MaxCut { .. } => "maxcut",
            Self::LeastSquares { .. } => "least_squares",
            Self::Cubic { .. } => "cubic",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Logistic { a, .. } | Self::LogSumExp { a, .. } | Self::LeastSquares { a, .. } => a.cols(),
            Self::Quadratic { hessian, .. } => hessian.cols(),
            Self::MaxCut { c, .. } => c.cols(),
            Self::Cubic { h, .. } => h.cols(),
        }
    }

    pub fn is_convex(&self) -> bool {
        // the cubic term is convex too, but the quadratic part need not be
        !matches!(self, Self::Cubic { .. })
    }

    pub fn try_value(&self, x: &DenseVector) -> Result<f64, NumError> {
        Ok(match self {
            Self::Logistic { a, b, gamma } => logistic_value(a, b, *gamma, x),
            Self::LogSumExp { a, b, gamma } => lse_value(a, b, *gamma, x),
            Self::MaxCut { c, epsilon, eta } => maxcut_value(c, *epsilon, *eta, x)?,
            Self::LeastSquares { a, b } => least_squares_value(a, b, x),
            _ => self.try_value_grad(x)?.0,
        })
    }

    pub fn try_value_grad(&self, x: &DenseVector) -> Result<(f64, DenseVector), NumError> {
        if x.len() != self.dim() {
            return Err(NumError::DimensionMismatch { op: "value_grad", left: self.dim(), right: x.len() });
        }
        Ok(match self {
            Self::Logistic { a, b, gamma } => logistic_value_grad(a, b, *gamma, x),
            Self::Quadratic { hessian, linear } => quadratic_value_grad(hessian, linear, x),
            Self::LogSumExp { a, b, gamma } => lse_value_grad(a, b, *gamma, x),
            Self::MaxCut { c, epsilon, eta } => maxcut_value_grad(c, *epsilon, *eta, x)?,
            Self::LeastSquares { a, b } => least_squares_value_grad(a, b, x),
            Self::Cubic { h, g, m } => cubic_value_grad(h, g, *m, x),
        })
    }

    /// Value, with numerical failures reported as NaN.
    pub fn value(&self, x: &DenseVector) -> f64 {
        self.try_value(x).unwrap_or(f64::NAN)
    }

    /// Value and gradient, with numerical failures reported as NaN.
    pub fn value_grad(&self, x: &DenseVector) -> (f64, DenseVector) {
        self.try_value_grad(x)
            .unwrap_or_else(|_| (f64::NAN, DenseVector::from_elem(x.len(), f64::NAN)))
    }

    /// Smoothness constant used by constant-step methods, and (for the
    /// log-sum-exp family) the unsquared `σ_max(A)` as a second reading.
    pub fn smoothness_estimates(&self, x0: &DenseVector) -> (f64, Option<f64>) {
        match self {
            Self::Logistic { a, gamma, .. } => {
                let s = spectral_norm_default(a);
                (s * s / a.rows() as f64 + gamma, None)
            }
            Self::Quadratic { hessian, .. } => (spectral_norm_default(hessian), None),
            Self::LogSumExp { a, gamma, .. } => {
                let s = spectral_norm_default(a);
                (s * s + gamma, Some(s))
            }
            Self::MaxCut { epsilon, .. } => (1.0 / epsilon, None),
            Self::LeastSquares { a, .. } => {
                let s = spectral_norm_default(a);
                (2.0 * s * s, None)
            }
            Self::Cubic { h, m, .. } => (spectral_norm_default(h) + m * x0.norm(), None),
        }
    }
}

/// Cumulative oracle calls.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleCounts {
    pub f_evals: u64,
    pub grad_evals: u64,
    pub prox_evals: u64,
}

impl std::ops::Sub for OracleCounts {
    type Output = OracleCounts;
    fn sub(self, rhs: Self) -> Self {
        OracleCounts {
            f_evals: self.f_evals - rhs.f_evals,
            grad_evals: self.grad_evals - rhs.grad_evals,
            prox_evals: self.prox_evals - rhs.prox_evals,
        }
    }
}

/// A smooth objective with value/gradient counters.
///
/// The data sits behind an `Arc`; counters are per instance, so one oracle
/// serves one solver run.
#[derive(Debug)]
pub struct SmoothOracle {
    kind: Arc<SmoothKind>,
    f_evals: Cell<u64>,
    grad_evals: Cell<u64>,
}

impl Clone for SmoothOracle {
    fn clone(&self) -> Self {
        Self { kind: Arc::clone(&self.kind), f_evals: self.f_evals.clone(), grad_evals: self.grad_evals.clone() }
    }
}

impl SmoothOracle {
    pub fn new(kind: SmoothKind) -> Self {
        Self { kind: Arc::new(kind), f_evals: Cell::new(0), grad_evals: Cell::new(0) }
    }

    pub fn kind(&self) -> &SmoothKind {
        &self.kind
    }

    pub fn value(&self, x: &DenseVector) -> f64 {
        self.f_evals.set(self.f_evals.get() + 1);
        self.kind.value(x)
    }

    pub fn gradient(&self, x: &DenseVector) -> DenseVector {
        self.grad_evals.set(self.grad_evals.get() + 1);
        self.kind.value_grad(x).1
    }

    /// Counts one value and one gradient evaluation.
    pub fn value_grad(&self, x: &DenseVector) -> (f64, DenseVector) {
        self.f_evals.set(self.f_evals.get() + 1);
        self.grad_evals.set(self.grad_evals.get() + 1);
        self.kind.value_grad(x)
    }

    pub fn value_uncounted(&self, x: &DenseVector) -> f64 {
        self.kind.value(x)
    }

    pub fn gradient_uncounted(&self, x: &DenseVector) -> DenseVector {
        self.kind.value_grad(x).1
    }

    pub fn f_evals(&self) -> u64 {
        self.f_evals.get()
    }

    pub fn grad_evals(&self) -> u64 {
        self.grad_evals.get()
    }

    fn reset(&self) {
        self.f_evals.set(0);
        self.grad_evals.set(0);
    }
}

/// The benchmark families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Logreg,
    Quad,
    Lse,
    Maxcut,
    L1ls,
    L1constr,
    L1logreg,
    Cubic,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Logreg,
        Family::Quad,
        Family::Lse,
        Family::Maxcut,
        Family::L1ls,
        Family::L1constr,
        Family::L1logreg,
        Family::Cubic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Logreg => "logreg",
            Family::Quad => "quad",
            Family::Lse => "lse",
            Family::Maxcut => "maxcut",
            Family::L1ls => "l1ls",
            Family::L1constr => "l1constr",
            Family::L1logreg => "l1logreg",
            Family::Cubic => "cubic",
        }
    }

    pub fn is_composite(self) -> bool {
        matches!(self, Family::L1ls | Family::L1constr | Family::L1logreg)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = ProblemError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| ProblemError::UnknownFamily(s.to_string()))
    }
}

/// Recipe for one generated benchmark instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub family: Family,
    /// Number of unknowns (`n` for max-cut).
    pub dim: usize,
    /// Number of data rows `N`; ignored by quad, maxcut.
    pub samples: usize,
    pub seed: u64,
    /// ℓ2 weight of logreg/lse/cubic and ℓ1 weight of the composite families; `None` means `1/N`.
    pub gamma: Option<f64>,
    pub eta: f64,
    pub epsilon: f64,
    pub cubic_m: f64,
    pub radius: f64,
    pub noise_sd: f64,
    pub binarize_labels: bool,
    /// Scale of the uniform design of the composite families.
    pub uniform_scale: f64,
}

impl ProblemSpec {
    pub fn new(family: Family, dim: usize, seed: u64) -> Self {
        Self {
            family,
            dim,
            samples: dim,
            seed,
            gamma: None,
            eta: 0.01,
            epsilon: 1e-5,
            cubic_m: 5.0,
            radius: 1.0,
            noise_sd: NOISE_SD,
            binarize_labels: false,
            uniform_scale: 5.0,
        }
    }

    pub fn gamma_value(&self) -> f64 {
        self.gamma.unwrap_or(1.0 / self.samples as f64)
    }

    /// File stem `family_d{dim}_s{seed}`, plus the swept hyperparameter where the family has one.
    pub fn stem(&self) -> String {
        let base = format!("{}_d{}_s{}", self.family, self.dim, self.seed);
        match self.family {
            Family::Maxcut => format!("{base}_eta{}", self.eta),
            Family::Cubic => format!("{base}_m{}", self.cubic_m),
            _ => base,
        }
    }

    fn validate(&self) -> Result<(), ProblemError> {
        let bad = |name, reason: &str| Err(ProblemError::InvalidParameter { name, reason: reason.to_string() });
        if self.dim == 0 {
            return bad("dim", "must be at least 1");
        }
        if self.samples == 0 {
            return bad("samples", "must be at least 1");
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon", "must be positive");
        }
        if !(self.cubic_m > 0.0) {
            return bad("cubic_m", "must be positive");
        }
        if !(self.radius > 0.0) {
            return bad("radius", "must be positive");
        }
        if matches!(self.gamma, Some(g) if !(g >= 0.0)) {
            return bad("gamma", "must be nonnegative");
        }
        if !(self.eta >= 0.0) {
            return bad("eta", "must be nonnegative");
        }
        Ok(())
    }
}

/// `min f(x) + h(x)` with a starting point and smoothness metadata.
#[derive(Clone, Debug)]
pub struct CompositeProblem {
    spec: Option<ProblemSpec>,
    smooth: SmoothOracle,
    prox_term: ProxTerm,
    l_estimate: f64,
    l_paper: Option<f64>,
    f_star: Option<f64>,
    x0: DenseVector,
    prox_evals: Cell<u64>,
}

impl CompositeProblem {
    /// A problem from explicit data; the smoothness constant is derived from the data.
    pub fn custom(kind: SmoothKind, prox_term: ProxTerm, x0: DenseVector) -> Self {
        let (l_estimate, l_paper) = kind.smoothness_estimates(&x0);
        Self {
            spec: None,
            smooth: SmoothOracle::new(kind),
            prox_term,
            l_estimate,
            l_paper,
            f_star: None,
            x0,
            prox_evals: Cell::new(0),
        }
    }

    pub(crate) fn from_parts(
        spec: Option<ProblemSpec>,
        kind: SmoothKind,
        prox_term: ProxTerm,
        x0: DenseVector,
        l_estimate: f64,
        l_paper: Option<f64>,
    ) -> Self {
        Self {
            spec,
            smooth: SmoothOracle::new(kind),
            prox_term,
            l_estimate,
            l_paper,
            f_star: None,
            x0,
            prox_evals: Cell::new(0),
        }
    }

    pub fn with_f_star(mut self, f_star: Option<f64>) -> Self {
        self.f_star = f_star;
        self
    }

    pub fn with_l_estimate(mut self, l: f64) -> Self {
        assert!(l > 0.0, "smoothness estimate must be positive");
        self.l_estimate = l;
        self
    }

    pub fn with_x0(mut self, x0: DenseVector) -> Self {
        assert_eq!(x0.len(), self.dim());
        self.x0 = x0;
        self
    }

    pub fn with_prox_term(mut self, term: ProxTerm) -> Self {
        self.prox_term = term;
        self
    }

    /// Same data and metadata with zeroed counters.
    pub fn fresh(&self) -> Self {
        let p = self.clone();
        p.reset_counts();
        p
    }

    pub fn spec(&self) -> Option<&ProblemSpec> {
        self.spec.as_ref()
    }

    pub fn family(&self) -> Option<Family> {
        self.spec.as_ref().map(|s| s.family)
    }

    pub fn label(&self) -> String {
        match &self.spec {
            Some(s) => s.stem(),
            None => format!("{}+{}", self.smooth.kind().name(), self.prox_term.name()),
        }
    }

    pub fn smooth(&self) -> &SmoothOracle {
        &self.smooth
    }

    pub fn kind(&self) -> &SmoothKind {
        self.smooth.kind()
    }

    pub fn prox_term(&self) -> &ProxTerm {
        &self.prox_term
    }

    /// False when `h ≡ 0`.
    pub fn is_composite(&self) -> bool {
        !self.prox_term.is_trivial()
    }

    pub fn l_estimate(&self) -> f64 {
        self.l_estimate
    }

    pub fn l_paper(&self) -> Option<f64> {
        self.l_paper
    }

    pub fn f_star(&self) -> Option<f64> {
        self.f_star
    }

    pub fn x0(&self) -> &DenseVector {
        &self.x0
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    /// `F(x) = f(x) + h(x)` without touching the counters.
    pub fn objective(&self, x: &DenseVector) -> f64 {
        self.smooth.value_uncounted(x) + self.prox_term.value(x)
    }

    pub fn h_value(&self, x: &DenseVector) -> f64 {
        self.prox_term.value(x)
    }

    /// Counted prox evaluation.
    pub fn prox(&self, x: &DenseVector, lambda: f64) -> DenseVector {
        self.prox_evals.set(self.prox_evals.get() + 1);
        self.prox_term.prox(x, lambda)
    }

    /// Counted gradient mapping (one prox evaluation).
    pub fn grad_map(&self, f_grad: &DenseVector, x: &DenseVector, lambda: f64) -> GradMapResult {
        let gm = gradient_mapping(f_grad, x, lambda, &self.prox_term);
        self.prox_evals.set(self.prox_evals.get() + gm.prox_count);
        gm
    }

    pub fn counts(&self) -> OracleCounts {
        OracleCounts {
            f_evals: self.smooth.f_evals(),
            grad_evals: self.smooth.grad_evals(),
            prox_evals: self.prox_evals.get(),
        }
    }

    pub fn reset_counts(&self) {
        self.smooth.reset();
        self.prox_evals.set(0);
    }
}

/// Builds a benchmark instance from its recipe.
///
/// Data is drawn first, then the starting point `x0 ~ N(0, I)` from the same
/// stream, so every solver on the instance starts from the same point.
pub fn build_problem(spec: &ProblemSpec) -> Result<CompositeProblem, ProblemError> {
    spec.validate()?;
    let mut rng = RngState::new(spec.seed);
    let d = spec.dim;
    let n = spec.samples;
    let gamma = spec.gamma_value();

    let (kind, prox) = match spec.family {
        Family::Logreg => {
            let a = gen_correlated_matrix(&mut rng, d, n);
            let (_, mut b) = gen_regression_target(&mut rng, &a, spec.noise_sd);
            if spec.binarize_labels {
                b = b.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
            }
            (SmoothKind::Logistic { a, b, gamma }, ProxTerm::Zero)
        }
        Family::Quad => {
            let a = gen_correlated_matrix(&mut rng, d, d);
            let (_, b) = gen_regression_target(&mut rng, &a, spec.noise_sd);
            let gram = a.gram();
            let scale = spectral_norm_default(&gram);
            let bn = b.norm();
            (
                SmoothKind::Quadratic { hessian: gram.scaled(1.0 / scale), linear: b.scaled(1.0 / bn) },
                ProxTerm::Zero,
            )
        }
        Family::Lse => {
            let a = gen_correlated_matrix(&mut rng, d, n);
            let (_, b) = gen_regression_target(&mut rng, &a, spec.noise_sd);
            (SmoothKind::LogSumExp { a, b, gamma }, ProxTerm::Zero)
        }
        Family::Maxcut => {
            let c = gen_wishart_normalized(&mut rng, d);
            (SmoothKind::MaxCut { c, epsilon: spec.epsilon, eta: spec.eta }, ProxTerm::Zero)
        }
        Family::L1ls | Family::L1constr | Family::L1logreg => {
            let a = gen_uniform_matrix(&mut rng, n, d, spec.uniform_scale);
            let b = rng.uniform_vector(n);
            let prox = if spec.family == Family::L1constr {
                ProxTerm::L1Ball { radius: spec.radius }
            } else {
                ProxTerm::L1 { gamma }
            };
            let kind = if spec.family == Family::L1logreg {
                SmoothKind::Logistic { a, b, gamma: 0.0 }
            } else {
                SmoothKind::LeastSquares { a, b }
            };
            (kind, prox)
        }
        Family::Cubic => {
            let a = gen_correlated_matrix(&mut rng, d, n);
            let (_, b) = gen_regression_target(&mut rng, &a, spec.noise_sd);
            let (h, g) = logistic_hessian_grad_at_origin(&a, &b, gamma);
            (SmoothKind::Cubic { h, g, m: spec.cubic_m }, ProxTerm::Zero)
        }
    };
    let mut x0 = rng.gaussian_vector(d);
    if let ProxTerm::L1Ball { radius } = prox {
        // start feasible
        x0 = crate::prox::project_l1_ball(&x0, radius);
    }
    let (l_estimate, l_paper) = kind.smoothness_estimates(&x0);
    Ok(CompositeProblem::from_parts(Some(spec.clone()), kind, prox, x0, l_estimate, l_paper))
}

/// Hessian `(1/(4N)) Aᵀ diag(b²) A + γI` and gradient `−(1/(2N)) Aᵀb` of
/// the ℓ2-regularized logistic loss at `x = 0`.
pub fn logistic_hessian_grad_at_origin(a: &DenseMatrix, b: &DenseVector, gamma: f64) -> (DenseMatrix, DenseVector) {
    let n = a.rows() as f64;
    let d = a.cols();
    let mut h = DenseMatrix::zeros(d, d);
    for r in 0..a.rows() {
        let w = 0.25 * b[r] * b[r] / n;
        let row = a.row(r);
        for i in 0..d {
            let wi = w * row[i];
            for j in 0..d {
                h[(i, j)] += wi * row[j];
            }
        }
    }
    for i in 0..d {
        h[(i, i)] += gamma;
    }
    let g = matvec_t(a, b).expect("dims").scaled(-0.5 / n);
    (h, g)
}
