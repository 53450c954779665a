use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{OutputFormat, SuiteConfig};
use super::{write_file, HarnessError};
use crate::numkit::cg_solve;
use crate::problems::io::{problem_to_string, read_problem, FILE_EXTENSION};
use crate::problems::{build_problem, CompositeProblem, SmoothKind};
use crate::solvers::{solve, SolverKind, SolverOptions};
use crate::trace::{fmt_num, Trace};

/// Subtracted from the best observed objective.
pub const REFERENCE_MARGIN: f64 = 1e-12;
/// Stationarity tolerance of reference runs.
pub const REFERENCE_TOL: f64 = 1e-14;
/// Largest change of the running minimum between the last two checkpoints
/// before a reference is flagged as unconverged.
pub const CHECKPOINT_TOL: f64 = 1e-10;
const CHECKPOINTS: usize = 10;
const CG_RESIDUAL: f64 = 1e-12;
const DIRECT_RESIDUAL_OK: f64 = 1e-10;

/// Writes one `.zprob` file per recipe in `cfg` and returns their paths.
pub fn cmd_generate(cfg: &SuiteConfig) -> Result<Vec<PathBuf>, HarnessError> {
    cfg.validate()?;
    let mut out = Vec::new();
    for spec in cfg.problem_specs() {
        let problem = build_problem(&spec).map_err(|e| HarnessError::usage(e.to_string()))?;
        let path = cfg.out_dir.join(format!("{}.{FILE_EXTENSION}", spec.stem()));
        write_file(&path, &problem_to_string(&problem))?;
        out.push(path);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReferenceRecord {
    pub problem: String,
    pub solver: String,
    pub budget: usize,
    pub iterations: usize,
    pub termination: String,
    /// Smallest objective seen, including the direct solve when there is one.
    pub f_min: f64,
    pub f_star: f64,
    /// Set when the budget looks too small.
    pub warning: bool,
    /// Objective at the conjugate-gradient solution (quadratics only).
    pub direct_value: Option<f64>,
    pub direct_residual: Option<f64>,
}

impl ReferenceRecord {
    pub fn converged(&self) -> bool {
        !self.warning
    }
}

fn reference_solvers(problem: &CompositeProblem) -> &'static [SolverKind] {
    if problem.is_composite() {
        &[SolverKind::FISTA, SolverKind::Alg1]
    } else if problem.kind().is_convex() {
        &[SolverKind::Alg2, SolverKind::Alg1, SolverKind::AdGDAccel]
    } else {
        &[SolverKind::Alg1, SolverKind::AdGD]
    }
}

/// Long runs of a few applicable solvers; the lowest objective seen wins.
/// An `f_star` already stored on the problem is ignored.
pub fn reference_problem(problem: &CompositeProblem, budget: usize) -> Result<ReferenceRecord, HarnessError> {
    if budget == 0 {
        return Err(HarnessError::usage("reference budget must be at least 1"));
    }
    let work = problem.fresh().with_f_star(None);
    let opts = SolverOptions { max_iter: budget, tol: REFERENCE_TOL, ..Default::default() };
    let mut runs = Vec::new();
    for &kind in reference_solvers(&work) {
        let trace = solve(kind, &work.fresh(), work.x0(), &opts)?;
        runs.push((kind, running_min(&trace, budget), trace));
    }
    let (kind, (mut best, stalled), trace) = runs
        .into_iter()
        .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .expect("at least one reference solver");
    let converged = trace.termination == crate::trace::Termination::Converged;
    let mut warning = !(converged || stalled) || !best.is_finite();

    let (mut direct_value, mut direct_residual) = (None, None);
    if let SmoothKind::Quadratic { hessian, linear } = work.kind() {
        if !work.is_composite() {
            let (x, resid) = cg_solve(hessian, &linear.scaled(-1.0), CG_RESIDUAL, 20 * work.dim().max(10))
                .map_err(|e| HarnessError::Invariant(e.to_string()))?;
            let v = work.objective(&x);
            direct_value = Some(v);
            direct_residual = Some(resid);
            // the direct solve is another observed point, and an exact one
            // once its residual is small
            if v.is_finite() && v < best {
                best = v;
            }
            if resid <= DIRECT_RESIDUAL_OK * linear.norm().max(1.0) {
                warning = false;
            }
        }
    }

    Ok(ReferenceRecord {
        problem: work.label(),
        solver: kind.name().into(),
        budget,
        iterations: trace.iterations(),
        termination: trace.termination.name().into(),
        f_min: best,
        f_star: best - REFERENCE_MARGIN,
        warning,
        direct_value,
        direct_residual,
    })
}

/// Smallest finite objective in the trace, and whether it stopped moving
/// between the last two of the evenly spaced checkpoints.
fn running_min(trace: &crate::trace::Trace, budget: usize) -> (f64, bool) {
    let mut best = f64::INFINITY;
    let mut checkpoints = Vec::with_capacity(CHECKPOINTS);
    let every = (budget / CHECKPOINTS).max(1);
    for r in &trace.records {
        if r.f_value.is_finite() {
            best = best.min(r.f_value);
        }
        if r.iter > 0 && r.iter % every == 0 {
            checkpoints.push(best);
        }
    }
    let stalled = match checkpoints.as_slice() {
        [.., a, b] => (a - b).abs() <= CHECKPOINT_TOL,
        _ => false,
    };
    (best, stalled)
}

/// Stores `record.f_star` into the problem file at `path`.
pub fn write_reference(path: &Path, problem: &CompositeProblem, record: &ReferenceRecord) -> Result<(), HarnessError> {
    let updated = problem.clone().with_f_star(Some(record.f_star));
    write_file(path, &problem_to_string(&updated))
}

/// Computes the reference optimum of the problem at `path` and writes it back
/// into that file.
pub fn cmd_reference(path: &Path, budget: usize) -> Result<ReferenceRecord, HarnessError> {
    let problem = read_problem(path).map_err(|e| HarnessError::from_problem(path, e))?;
    let record = reference_problem(&problem, budget)?;
    write_reference(path, &problem, &record)?;
    Ok(record)
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub trace_path: PathBuf,
    pub meta_path: PathBuf,
    pub trace: Trace,
}

pub(crate) fn trace_stem(problem: &str, solver: SolverKind) -> String {
    format!("{problem}__{}", solver.name())
}

pub(crate) fn write_trace(out_dir: &Path, trace: &Trace, stem: &str, format: OutputFormat) -> Result<(PathBuf, PathBuf), HarnessError> {
    let (trace_path, body) = match format {
        OutputFormat::Csv => (out_dir.join(format!("{stem}.csv")), trace.to_csv()),
        OutputFormat::Json => (out_dir.join(format!("{stem}.json")), trace.records_json()),
    };
    write_file(&trace_path, &body)?;
    let meta_path = out_dir.join(format!("{stem}.meta.json"));
    write_file(&meta_path, &trace.meta_json())?;
    Ok((trace_path, meta_path))
}

/// Runs `kind` from the problem's stored start point and writes the trace
/// and its metadata into `out_dir`.
pub fn cmd_run(
    path: &Path,
    kind: SolverKind,
    opts: &SolverOptions,
    out_dir: &Path,
    format: OutputFormat,
) -> Result<RunOutput, HarnessError> {
    let problem = read_problem(path).map_err(|e| HarnessError::from_problem(path, e))?;
    let mut opts = opts.clone();
    if opts.f_star_hint.is_none() {
        opts.f_star_hint = problem.f_star();
    }
    let trace = solve(kind, &problem, problem.x0(), &opts)?;
    let (trace_path, meta_path) = write_trace(out_dir, &trace, &trace_stem(&problem.label(), kind), format)?;
    Ok(RunOutput { trace_path, meta_path, trace })
}

/// Human-readable `key: value` summary of a problem.
pub fn describe_problem(p: &CompositeProblem) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "label: {}", p.label());
    let _ = writeln!(s, "smooth: {}", p.kind().name());
    let _ = writeln!(s, "prox: {:?}", p.prox_term());
    let _ = writeln!(s, "dim: {}", p.dim());
    if let Some(spec) = p.spec() {
        let _ = writeln!(s, "family: {}", spec.family);
        let _ = writeln!(s, "samples: {}", spec.samples);
        let _ = writeln!(s, "seed: {}", spec.seed);
        match spec.family {
            crate::problems::Family::Logreg
            | crate::problems::Family::Lse
            | crate::problems::Family::L1ls
            | crate::problems::Family::L1logreg => {
                let _ = writeln!(s, "gamma: {}", spec.gamma_value());
            }
            _ => {}
        }
        match spec.family {
            crate::problems::Family::Maxcut => {
                let _ = writeln!(s, "epsilon: {}", spec.epsilon);
                let _ = writeln!(s, "eta: {}", spec.eta);
            }
            crate::problems::Family::Cubic => {
                let _ = writeln!(s, "gamma: {}", spec.gamma_value());
                let _ = writeln!(s, "cubic_m: {}", spec.cubic_m);
            }
            crate::problems::Family::L1constr => {
                let _ = writeln!(s, "radius: {}", spec.radius);
            }
            _ => {}
        }
    }
    let _ = writeln!(s, "convex: {}", p.kind().is_convex());
    let _ = writeln!(s, "l_estimate: {}", fmt_num(p.l_estimate()));
    if let Some(l) = p.l_paper() {
        let _ = writeln!(s, "l_paper: {}", fmt_num(l));
    }
    match p.f_star() {
        Some(f) => {
            let _ = writeln!(s, "f_star: {}", fmt_num(f));
        }
        None => s.push_str("f_star: unknown\n"),
    }
    let _ = writeln!(s, "f_x0: {}", fmt_num(p.objective(p.x0())));
    let solvers: Vec<&str> = SolverKind::ALL.iter().filter(|k| k.accepts(p)).map(|k| k.name()).collect();
    let _ = writeln!(s, "solvers: {}", solvers.join(", "));
    s
}

pub fn cmd_describe(path: &Path) -> Result<String, HarnessError> {
    let problem = read_problem(path).map_err(|e| HarnessError::from_problem(path, e))?;
    Ok(describe_problem(&problem))
}
