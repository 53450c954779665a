//! The zero-order linesearch methods and the baselines, behind [`solve`].

mod methods;
pub mod rules;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use rules::{
    adgd_accel_update, adgd_stepsize, armijo_accept, beta_next, momentum_combine, polyak_stepsize,
    stationarity_norm, AdgdAccelState,
};

use crate::linesearch::LinesearchConfig;
use crate::numkit::DenseVector;
use crate::problems::{CompositeProblem, OracleCounts};
use crate::trace::{IterRecord, IterSnapshot, Termination, Trace, TraceMeta};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SolverKind {
    Alg1,
    Alg2,
    GD,
    NAGD,
    PolyakGD,
    ArmijoGD,
    AdGD,
    AdGDAccel,
    ISTA,
    FISTA,
}

impl SolverKind {
    pub const ALL: [SolverKind; 10] = [
        SolverKind::Alg1,
        SolverKind::Alg2,
        SolverKind::GD,
        SolverKind::NAGD,
        SolverKind::PolyakGD,
        SolverKind::ArmijoGD,
        SolverKind::AdGD,
        SolverKind::AdGDAccel,
        SolverKind::ISTA,
        SolverKind::FISTA,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Alg1 => "alg1",
            SolverKind::Alg2 => "alg2",
            SolverKind::GD => "gd",
            SolverKind::NAGD => "nagd",
            SolverKind::PolyakGD => "polyak",
            SolverKind::ArmijoGD => "armijo",
            SolverKind::AdGD => "adgd",
            SolverKind::AdGDAccel => "adgd-accel",
            SolverKind::ISTA => "ista",
            SolverKind::FISTA => "fista",
        }
    }

    /// Whether the method handles a nonzero prox term.
    pub fn supports_composite(self) -> bool {
        matches!(self, SolverKind::Alg1 | SolverKind::Alg2 | SolverKind::ISTA | SolverKind::FISTA)
    }

    pub fn is_accelerated(self) -> bool {
        matches!(self, SolverKind::Alg2 | SolverKind::NAGD | SolverKind::AdGDAccel | SolverKind::FISTA)
    }

    pub fn accepts(self, problem: &CompositeProblem) -> bool {
        self.supports_composite() || !problem.is_composite()
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        let alias = match key.as_str() {
            "polyakgd" => "polyak",
            "armijogd" => "armijo",
            "adgdaccel" => "adgd-accel",
            k => k,
        };
        SolverKind::ALL.into_iter().find(|k| k.name() == alias).ok_or_else(|| format!("unknown solver {s:?}"))
    }
}

/// Where the accelerated method starts backtracking.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccelStart {
    /// The previous accepted stepsize.
    #[default]
    Previous,
    /// `min(previous, warm start)`.
    WarmClamped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Stop once `‖G‖∞ ≤ tol`.
    pub tol: f64,
    pub ls: LinesearchConfig,
    /// Armijo sufficient-decrease constant.
    pub c1: f64,
    /// Replaces the problem's smoothness estimate in constant-step rules.
    pub l_override: Option<f64>,
    /// Optimal value used by the Polyak rule.
    pub f_star_hint: Option<f64>,
    pub accel_start: AccelStart,
    /// Bootstrap step of the adaptive methods.
    pub adgd_lambda0: f64,
    /// Keep every iterate in the trace.
    pub record_iterates: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            tol: 1e-10,
            ls: LinesearchConfig::default(),
            c1: 1e-4,
            l_override: None,
            f_star_hint: None,
            accel_start: AccelStart::Previous,
            adgd_lambda0: 1e-7,
            record_iterates: false,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |m: String| Err(SolveError::InvalidOptions(m));
        if self.max_iter < 1 {
            return bad("max_iter must be at least 1".into());
        }
        if !(self.tol >= 0.0) {
            return bad(format!("tol must be nonnegative, got {}", self.tol));
        }
        if !(self.c1 > 0.0 && self.c1 < 1.0) {
            return bad(format!("c1 must lie in (0, 1), got {}", self.c1));
        }
        if matches!(self.l_override, Some(l) if !(l > 0.0 && l.is_finite())) {
            return bad("L override must be positive".into());
        }
        if !(self.adgd_lambda0 > 0.0) {
            return bad("adgd_lambda0 must be positive".into());
        }
        self.ls.validate().map_err(SolveError::InvalidOptions)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("solver {solver} does not handle the nonsmooth term of {problem}")]
    Incompatible { solver: SolverKind, problem: String },
    #[error("the Polyak rule needs an optimal value (f_star_hint)")]
    MissingFStar,
    #[error("starting point has length {got}, problem has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("starting point is not finite")]
    NonFiniteStart,
    #[error("invalid options: {0}")]
    InvalidOptions(String),
}

/// Runs `kind` on `problem` from `x0`.
///
/// Oracle counters of `problem` keep running; the trace reports counts
/// relative to the start of this call.
pub fn solve(
    kind: SolverKind,
    problem: &CompositeProblem,
    x0: &DenseVector,
    opts: &SolverOptions,
) -> Result<Trace, SolveError> {
    opts.validate()?;
    if !kind.accepts(problem) {
        return Err(SolveError::Incompatible { solver: kind, problem: problem.label() });
    }
    if x0.len() != problem.dim() {
        return Err(SolveError::DimensionMismatch { expected: problem.dim(), got: x0.len() });
    }
    if !x0.is_finite() {
        return Err(SolveError::NonFiniteStart);
    }
    if kind == SolverKind::PolyakGD && opts.f_star_hint.is_none() {
        return Err(SolveError::MissingFStar);
    }
    let l_used = opts.l_override.unwrap_or_else(|| problem.l_estimate());
    let mut run = Run::new(problem, opts, l_used);
    let termination = match kind {
        SolverKind::Alg1 => methods::alg1(&mut run, x0),
        SolverKind::Alg2 => methods::accelerated(&mut run, x0, methods::AccelStep::Linesearch),
        SolverKind::GD => methods::constant_step(&mut run, x0, false),
        SolverKind::ISTA => methods::constant_step(&mut run, x0, true),
        SolverKind::NAGD => methods::accelerated(&mut run, x0, methods::AccelStep::Fixed { prox: false }),
        SolverKind::FISTA => methods::accelerated(&mut run, x0, methods::AccelStep::Fixed { prox: true }),
        SolverKind::PolyakGD => methods::polyak(&mut run, x0, opts.f_star_hint.expect("checked above")),
        SolverKind::ArmijoGD => methods::armijo(&mut run, x0),
        SolverKind::AdGD => methods::adgd(&mut run, x0),
        SolverKind::AdGDAccel => methods::adgd_accel(&mut run, x0),
    };
    Ok(run.finish(kind, termination))
}

/// Bookkeeping shared by all methods.
pub(crate) struct Run<'a> {
    pub problem: &'a CompositeProblem,
    pub opts: &'a SolverOptions,
    pub l_used: f64,
    start_counts: OracleCounts,
    start: Instant,
    f_star: Option<f64>,
    records: Vec<IterRecord>,
    snapshots: Vec<IterSnapshot>,
    x_last: DenseVector,
}

/// Optional iterate data attached to a record.
#[derive(Default)]
pub(crate) struct StepInfo<'v> {
    pub aux: Option<&'v DenseVector>,
    pub beta: Option<(f64, f64)>,
    pub g_norm_sq: f64,
}

impl<'a> Run<'a> {
    fn new(problem: &'a CompositeProblem, opts: &'a SolverOptions, l_used: f64) -> Self {
        Self {
            problem,
            opts,
            l_used,
            start_counts: problem.counts(),
            start: Instant::now(),
            f_star: problem.f_star().or(opts.f_star_hint),
            records: Vec::new(),
            snapshots: Vec::new(),
            x_last: DenseVector::zeros(0),
        }
    }

    pub fn tol(&self) -> f64 {
        self.opts.tol
    }

    /// Appends a record for `x`. `f_smooth` is `f(x)` when already known.
    /// Returns false when the objective is not finite.
    pub fn push(&mut self, iter: usize, x: &DenseVector, f_smooth: Option<f64>, stepsize: f64, info: StepInfo) -> bool {
        let f = f_smooth.unwrap_or_else(|| self.problem.smooth().value_uncounted(x));
        let f_value = f + self.problem.h_value(x);
        let counts = self.problem.counts() - self.start_counts;
        self.records.push(IterRecord {
            iter,
            f_value,
            gap: self.f_star.map(|fs| f_value - fs),
            stepsize,
            grad_evals: counts.grad_evals,
            f_evals: counts.f_evals,
            prox_evals: counts.prox_evals,
            elapsed: self.start.elapsed().as_secs_f64(),
        });
        if self.opts.record_iterates {
            self.snapshots.push(IterSnapshot {
                primary: x.clone(),
                aux: info.aux.cloned(),
                beta: info.beta,
                step_g_norm_sq: info.g_norm_sq,
            });
        }
        self.x_last = x.clone();
        f_value.is_finite() && x.is_finite()
    }

    fn finish(self, kind: SolverKind, termination: Termination) -> Trace {
        let mut notes = Vec::new();
        if matches!(kind, SolverKind::AdGD | SolverKind::AdGDAccel) {
            notes.push(format!("bootstrap step {:e}, theta0 = 0", self.opts.adgd_lambda0));
        }
        if kind == SolverKind::Alg2 {
            notes.push(format!("backtracking start: {:?}", self.opts.accel_start));
        }
        let meta = TraceMeta {
            solver: kind.name().to_string(),
            problem: self.problem.label(),
            seed: self.problem.spec().map(|s| s.seed),
            options: serde_json::to_value(self.opts).expect("options serialize"),
            l_used: self.l_used,
            l_estimate: self.problem.l_estimate(),
            l_paper: self.problem.l_paper(),
            f_star: self.f_star,
            notes,
        };
        Trace { meta, records: self.records, termination, snapshots: self.snapshots, x_final: self.x_last }
    }
}
