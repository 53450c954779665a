use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use super::commands::{reference_problem, trace_stem, write_reference, write_trace, ReferenceRecord};
use super::config::SuiteConfig;
use super::{write_file, HarnessError};
use crate::problems::io::FILE_EXTENSION;
use crate::problems::{build_problem, CompositeProblem};
use crate::solvers::{solve, SolverKind};
use crate::trace::{fmt_num, IterRecord, Trace};

pub const GAP_THRESHOLDS: [f64; 3] = [1e-3, 1e-6, 1e-9];

pub const SUMMARY_HEADER: &str = "problem,solver,seed,status,iterations,grad_evals,f_final,gap_final,\
iters_1e-3,grad_evals_1e-3,iters_1e-6,grad_evals_1e-6,iters_1e-9,grad_evals_1e-9,reference_warning,error";

/// First `(iter, grad_evals)` whose gap is at most `threshold`.
pub fn evals_to_threshold(records: &[IterRecord], threshold: f64) -> Option<(usize, u64)> {
    records.iter().find(|r| r.gap.is_some_and(|g| g <= threshold)).map(|r| (r.iter, r.grad_evals))
}

/// One summary line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteRow {
    pub problem: String,
    pub solver: String,
    pub seed: u64,
    /// Termination name, or `error`.
    pub status: String,
    pub iterations: usize,
    pub grad_evals: u64,
    pub f_final: f64,
    pub gap_final: Option<f64>,
    pub to_threshold: [Option<(usize, u64)>; 3],
    pub reference_warning: bool,
    pub error: Option<String>,
}

impl SuiteRow {
    fn from_trace(problem: &str, seed: u64, trace: &Trace, reference_warning: bool) -> Self {
        let last = trace.last();
        Self {
            problem: problem.into(),
            solver: trace.meta.solver.clone(),
            seed,
            status: trace.termination.name().into(),
            iterations: trace.iterations(),
            grad_evals: last.grad_evals,
            f_final: last.f_value,
            gap_final: last.gap,
            to_threshold: GAP_THRESHOLDS.map(|t| evals_to_threshold(&trace.records, t)),
            reference_warning,
            error: None,
        }
    }

    fn failed(problem: &str, solver: SolverKind, seed: u64, message: String) -> Self {
        Self {
            problem: problem.into(),
            solver: solver.name().into(),
            seed,
            status: "error".into(),
            iterations: 0,
            grad_evals: 0,
            f_final: f64::NAN,
            gap_final: None,
            to_threshold: [None; 3],
            reference_warning: false,
            error: Some(message),
        }
    }

    fn csv_line(&self) -> String {
        let mut s = format!(
            "{},{},{},{},{},{},{},{}",
            self.problem,
            self.solver,
            self.seed,
            self.status,
            self.iterations,
            self.grad_evals,
            fmt_num(self.f_final),
            self.gap_final.map(fmt_num).unwrap_or_default()
        );
        for t in &self.to_threshold {
            match t {
                Some((it, ge)) => {
                    let _ = write!(s, ",{it},{ge}");
                }
                None => s.push_str(",,"),
            }
        }
        let err = self.error.as_deref().unwrap_or("").replace([',', '\n', '\r'], ";");
        let _ = write!(s, ",{},{err}", self.reference_warning);
        s
    }
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub rows: Vec<SuiteRow>,
    pub references: Vec<ReferenceRecord>,
    pub summary_path: PathBuf,
    pub problem_paths: Vec<PathBuf>,
}

impl SuiteReport {
    pub fn summary_csv(&self) -> String {
        summary_csv(&self.rows)
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

pub fn summary_csv(rows: &[SuiteRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

struct Job {
    problem_index: usize,
    problem: CompositeProblem,
    solver: SolverKind,
}

/// Problems × applicable solvers. Problems and references are computed in
/// parallel, every run writes its own trace files, and the summary is merged
/// afterwards in job order.
pub fn cmd_suite(cfg: &SuiteConfig) -> Result<SuiteReport, HarnessError> {
    cfg.validate()?;
    let specs = cfg.problem_specs();
    let built: Vec<CompositeProblem> = specs
        .par_iter()
        .map(build_problem)
        .collect::<Result<_, _>>()
        .map_err(|e| HarnessError::usage(e.to_string()))?;

    let references: Vec<ReferenceRecord> = built
        .iter()
        .map(|p| p.fresh())
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|p| reference_problem(&p, cfg.reference_budget))
        .collect::<Result<_, _>>()?;

    let problem_dir = cfg.out_dir.join("problems");
    let mut problem_paths = Vec::with_capacity(built.len());
    let mut problems = Vec::with_capacity(built.len());
    for (p, r) in built.into_iter().zip(&references) {
        let path = problem_dir.join(format!("{}.{FILE_EXTENSION}", p.label()));
        write_reference(&path, &p, r)?;
        problem_paths.push(path);
        problems.push(p.with_f_star(Some(r.f_star)));
    }

    let jobs: Vec<Job> = problems
        .iter()
        .enumerate()
        .flat_map(|(i, p)| {
            cfg.solvers
                .iter()
                .filter(|s| s.accepts(p))
                .map(move |&solver| Job { problem_index: i, problem: p.fresh(), solver })
        })
        .collect();

    let trace_dir = cfg.out_dir.join("traces");
    let rows: Vec<SuiteRow> = jobs
        .into_par_iter()
        .map(|job| {
            let label = job.problem.label();
            let seed = job.problem.spec().map_or(0, |s| s.seed);
            let warn = references[job.problem_index].warning;
            let mut opts = cfg.solver_options(job.problem.is_composite());
            opts.f_star_hint = job.problem.f_star();
            let outcome = catch_unwind(AssertUnwindSafe(|| solve(job.solver, &job.problem, job.problem.x0(), &opts)));
            match outcome {
                Ok(Ok(trace)) => {
                    match write_trace(&trace_dir, &trace, &trace_stem(&label, job.solver), cfg.format) {
                        Ok(_) => SuiteRow::from_trace(&label, seed, &trace, warn),
                        Err(e) => SuiteRow::failed(&label, job.solver, seed, e.to_string()),
                    }
                }
                Ok(Err(e)) => SuiteRow::failed(&label, job.solver, seed, e.to_string()),
                Err(_) => SuiteRow::failed(&label, job.solver, seed, "solver panicked".into()),
            }
        })
        .collect();

    let summary_path = cfg.out_dir.join("summary.csv");
    write_file(&summary_path, &summary_csv(&rows))?;
    Ok(SuiteReport { rows, references, summary_path, problem_paths })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::Family;

    fn rec(iter: usize, gap: f64, ge: u64) -> IterRecord {
        IterRecord { iter, f_value: gap, gap: Some(gap), stepsize: 0.1, grad_evals: ge, f_evals: 0, prox_evals: 0, elapsed: 0.0 }
    }

    #[test]
    fn thresholds_are_monotone() {
        let records = [rec(0, 1.0, 0), rec(1, 1e-4, 2), rec(2, 1e-7, 4), rec(3, 1e-10, 7)];
        let hits = GAP_THRESHOLDS.map(|t| evals_to_threshold(&records, t).unwrap());
        assert_eq!(hits, [(1, 2), (2, 4), (3, 7)]);
        assert_eq!(evals_to_threshold(&records[..2], 1e-9), None);
    }

    #[test]
    fn small_suite_writes_summary() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SuiteConfig {
            families: vec![Family::Quad, Family::L1ls],
            dim: Some(6),
            seeds: vec![5],
            solvers: vec![SolverKind::Alg1, SolverKind::GD, SolverKind::FISTA],
            max_iter: 100,
            composite_max_iter: 100,
            reference_budget: 500,
            out_dir: dir.path().to_path_buf(),
            ..Default::default()
        };
        let report = cmd_suite(&cfg).unwrap();
        // GD is skipped on the composite problem
        assert_eq!(report.rows.len(), 5);
        assert_eq!(report.failures(), 0);
        let text = std::fs::read_to_string(&report.summary_path).unwrap();
        assert!(text.starts_with(SUMMARY_HEADER));
        assert_eq!(text.lines().count(), 6);
        assert!(dir.path().join("traces/quad_d6_s5__alg1.csv").exists());
        assert!(dir.path().join("problems/l1ls_d6_s5.zprob").exists());
    }
}
