//! Invariant battery behind `check`.
//!
//! Every invariant reports a worst margin: allowed minus observed, so a
//! negative margin is a violation.

use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use super::HarnessError;
use crate::linesearch::{backtrack, stepsize_interval_margin, zo_condition, zo_inequality_smooth, LinesearchConfig};
use crate::numkit::{dot, DenseVector};
use crate::problems::io::read_problem;
use crate::problems::{CompositeProblem, SmoothKind};
use crate::prox::{gradient_mapping, lemma1_ii_margin, lemma1_iii_margin, lemma1_iv_value, ProxOperator, ProxTerm};
use crate::randgen::RngState;
use crate::solvers::{solve, SolverKind, SolverOptions};
use crate::trace::{Trace, CSV_HEADER};

pub const FD_REL_TOL: f64 = 1e-4;
/// Smoothing used for max-cut finite differences.
pub const FD_MAXCUT_EPSILON: f64 = 0.1;
pub const DESCENT_SLACK: f64 = 1e-8;
pub const LEMMA_SLACK: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct AuditOptions {
    /// Random points per invariant and problem.
    pub samples: usize,
    pub seed: u64,
    /// Iterations of the solver runs in the battery.
    pub run_iters: usize,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self { samples: 5, seed: 0, run_iters: 100 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantResult {
    pub name: &'static str,
    pub problem: String,
    pub checks: usize,
    pub worst_margin: f64,
    pub passed: bool,
}

struct Tally {
    problem: String,
    out: Vec<InvariantResult>,
}

impl Tally {
    fn entry(&mut self, name: &'static str) -> &mut InvariantResult {
        if let Some(i) = self.out.iter().position(|r| r.name == name) {
            return &mut self.out[i];
        }
        self.out.push(InvariantResult {
            name,
            problem: self.problem.clone(),
            checks: 0,
            worst_margin: f64::INFINITY,
            passed: true,
        });
        self.out.last_mut().unwrap()
    }

    /// Records one check; NaN margins count as failures.
    fn margin(&mut self, name: &'static str, m: f64) {
        let e = self.entry(name);
        e.checks += 1;
        if m.is_nan() || m < 0.0 {
            e.passed = false;
        }
        if m.is_nan() {
            e.worst_margin = f64::NEG_INFINITY;
        } else {
            e.worst_margin = e.worst_margin.min(m);
        }
    }

    fn flag(&mut self, name: &'static str, ok: bool) {
        self.margin(name, if ok { 0.0 } else { -1.0 });
    }
}

fn perturbed(rng: &mut RngState, base: &DenseVector, scale: f64) -> DenseVector {
    base.axpy(scale, &rng.gaussian_vector(base.len()))
}

fn fd_kind(kind: &SmoothKind) -> SmoothKind {
    match kind {
        SmoothKind::MaxCut { c, epsilon, eta } => {
            SmoothKind::MaxCut { c: c.clone(), epsilon: epsilon.max(FD_MAXCUT_EPSILON), eta: *eta }
        }
        other => other.clone(),
    }
}

/// Worst relative error of central directional differences against `⟨∇f, u⟩`.
pub fn fd_directional_error(kind: &SmoothKind, x: &DenseVector, u: &DenseVector) -> f64 {
    let (_, g) = kind.value_grad(x);
    let h = 1e-5 * x.norm().max(1.0) / u.norm();
    let fd = (kind.value(&x.axpy(h, u)) - kind.value(&x.axpy(-h, u))) / (2.0 * h);
    let exact = dot(&g, u).unwrap_or(f64::NAN);
    (fd - exact).abs() / (g.norm() * u.norm()).max(1e-12)
}

fn trace_checks(t: &mut Tally, trace: &Trace) {
    let csv = trace.to_csv();
    t.flag("csv_schema", csv.lines().next() == Some(CSV_HEADER) && !csv.contains('\r'));
    let n = trace.records.len();
    for (i, w) in trace.records.windows(2).enumerate() {
        let (a, b) = (&w[0], &w[1]);
        t.flag(
            "trace_monotone_counters",
            b.iter > a.iter && b.grad_evals >= a.grad_evals && b.f_evals >= a.f_evals && b.prox_evals >= a.prox_evals,
        );
        let final_fail = i + 2 == n && matches!(trace.termination, crate::trace::Termination::LinesearchFail { .. });
        t.flag("trace_finite_rows", final_fail || (b.f_value.is_finite() && b.stepsize.is_finite()));
    }
}

/// Runs the battery on `problem`, using `prox` wherever a prox operator is
/// exercised directly (the solvers always use the problem's own term).
pub fn run_battery(problem: &CompositeProblem, prox: &dyn ProxOperator, opts: &AuditOptions) -> Vec<InvariantResult> {
    let p = problem.fresh();
    let mut t = Tally { problem: p.label(), out: Vec::new() };
    let mut rng = RngState::new(opts.seed ^ p.spec().map_or(0, |s| s.seed));
    let x0 = p.x0().clone();
    let d = p.dim();
    let spread = (x0.norm() / (d as f64).sqrt()).max(0.1);
    let convex = p.kind().is_convex();

    // oracle checks
    let fdk = fd_kind(p.kind());
    for _ in 0..opts.samples {
        let x = perturbed(&mut rng, &x0, spread);
        let u = rng.gaussian_vector(d);
        t.margin("gradient_fd", FD_REL_TOL - fd_directional_error(&fdk, &x, &u));
        if convex {
            let y = perturbed(&mut rng, &x0, spread);
            let (fx, fy) = (p.smooth().value_uncounted(&x), p.smooth().value_uncounted(&y));
            let mid = p.smooth().value_uncounted(&x.lincomb(0.5, &y, 0.5));
            t.margin("convexity_midpoint", 0.5 * (fx + fy) - mid + 1e-10 * fx.abs().max(fy.abs()).max(1.0));
        }
        if !matches!(p.kind(), SmoothKind::Cubic { .. }) {
            let y = perturbed(&mut rng, &x, spread);
            let dg = p.smooth().gradient_uncounted(&x).dist(&p.smooth().gradient_uncounted(&y));
            t.margin("smoothness_bound", p.l_estimate() * x.dist(&y) * (1.0 + 1e-9) - dg);
        }
    }

    // prox and gradient mapping
    for _ in 0..opts.samples {
        let lambda = 10f64.powf(-3.0 + 3.0 * rng.next_uniform());
        let a = perturbed(&mut rng, &x0, spread);
        let b = perturbed(&mut rng, &x0, spread);
        let (pa, pb) = (prox.prox(&a, lambda), prox.prox(&b, lambda));
        t.margin("prox_nonexpansive", a.dist(&b) + 1e-12 - pa.dist(&pb));
        if let ProxTerm::L1Ball { radius } = *p.prox_term() {
            t.margin("ball_feasible", radius + 1e-10 - pa.norm_l1());
        }
        let g = p.smooth().gradient_uncounted(&a);
        let gm = gradient_mapping(&g, &a, lambda, prox);
        let back = a.sub(&gm.x_plus).scaled(1.0 / lambda);
        let tol = 1e-12 * (a.norm() / lambda).max(1.0);
        t.margin("grad_map_consistency", tol - back.dist(&gm.g_map));
        if prox.is_zero() {
            t.flag("grad_map_smooth_identity", gm.g_map == g);
        }
        // feasible comparison point for indicator terms
        let mut y = perturbed(&mut rng, &x0, 3.0 * spread);
        if let ProxTerm::L1Ball { radius } = *p.prox_term() {
            y = crate::prox::project_l1_ball(&y, radius);
        }
        // the ray through x⁺ is where the inequality is tight
        let mut ys = vec![y, gm.x_plus.scaled(0.5), gm.x_plus.scaled(1.5)];
        if let ProxTerm::L1Ball { radius } = *p.prox_term() {
            ys[2] = crate::prox::project_l1_ball(&ys[2], radius);
        }
        for y in &ys {
            let m = lemma1_ii_margin(prox, &a, y, lambda, &g);
            let scale = prox.value(y).abs().max(prox.value(&gm.x_plus).abs()).max(1.0);
            t.margin("lemma1_ii", m + LEMMA_SLACK * scale);
        }
    }

    // linesearch at random points
    for _ in 0..opts.samples {
        let x = perturbed(&mut rng, &x0, spread);
        let x = if let ProxTerm::L1Ball { radius } = *p.prox_term() { crate::prox::project_l1_ball(&x, radius) } else { x };
        let g = p.smooth().gradient_uncounted(&x);
        let cfg = LinesearchConfig::default();
        let before = p.counts();
        let Ok(ls) = backtrack(&p, &x, &g, cfg.lambda_init, &cfg) else {
            t.flag("linesearch_accepts", false);
            continue;
        };
        t.flag("linesearch_accepts", true);
        let used = p.counts() - before;
        let b = ls.backtracks as u64;
        t.flag("linesearch_accounting", used.f_evals == 2 * (b + 1) && used.prox_evals == b + 1 && ls.f_evals == used.f_evals);
        t.flag("linesearch_candidates", ls.lambda == cfg.lambda_init * cfg.factor.powi(ls.backtracks as i32));
        if convex {
            let scale = p.objective(&x).abs().max(1.0);
            t.margin("lemma1_iv", LEMMA_SLACK * scale - lemma1_iv_value(&p, &x, ls.lambda));
            let z = perturbed(&mut rng, &x, spread);
            let z = if let ProxTerm::L1Ball { radius } = *p.prox_term() { crate::prox::project_l1_ball(&z, radius) } else { z };
            let scale = scale.max(p.objective(&z).abs());
            t.margin("lemma1_iii", lemma1_iii_margin(&p, &x, &z, ls.lambda) + LEMMA_SLACK * scale);
        }
        if !p.is_composite() {
            t.margin("interval_audit", stepsize_interval_margin(|v| p.smooth().value_uncounted(v), &x, ls.lambda, &g) + 1e-9);
            // smooth specialization decides like the general path
            let lam = ls.lambda * (1.0 + 4.0 * rng.next_uniform());
            let general = zo_condition(&p, &x, &g, lam);
            let smooth = zo_inequality_smooth(general.phi_lambda, general.phi_2lambda, g.norm_sq(), lam, cfg.slack);
            t.flag("zo_smooth_agreement", general.holds == smooth);
        }
    }

    // solver runs
    let run_opts = SolverOptions { max_iter: opts.run_iters, record_iterates: true, ..Default::default() };
    match solve(SolverKind::Alg1, &p, &x0, &run_opts) {
        Ok(trace) => {
            for (w, s) in trace.records.windows(2).zip(trace.snapshots.iter().skip(1)) {
                let (fk, fk1) = (w[0].f_value, w[1].f_value);
                let allowed = fk - 0.5 * w[1].stepsize * s.step_g_norm_sq + DESCENT_SLACK * fk.abs().max(1.0);
                t.margin("alg1_descent", allowed - fk1);
            }
            trace_checks(&mut t, &trace);
            let again = solve(SolverKind::Alg1, &p.fresh(), &x0, &run_opts);
            t.flag("dispatch_determinism", again.is_ok_and(|b| b.to_csv_without_elapsed() == trace.to_csv_without_elapsed()));
        }
        Err(_) => t.flag("alg1_descent", false),
    }
    if convex {
        match solve(SolverKind::Alg2, &p, &x0, &run_opts) {
            Ok(trace) => {
                for w in trace.records.windows(2).skip(1) {
                    t.margin("alg2_stepsize_monotone", w[0].stepsize + 1e-15 - w[1].stepsize);
                }
                trace_checks(&mut t, &trace);
            }
            Err(_) => t.flag("alg2_stepsize_monotone", false),
        }
    }
    t.out
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AuditReport {
    pub problems: Vec<String>,
    pub results: Vec<InvariantResult>,
    pub warnings: Vec<String>,
}

/// One invariant folded over every audited problem.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantSummary {
    pub name: &'static str,
    pub checks: usize,
    pub worst_margin: f64,
    pub worst_problem: String,
    pub passed: bool,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn total_checks(&self) -> usize {
        self.results.iter().map(|r| r.checks).sum()
    }

    pub fn summary(&self) -> Vec<InvariantSummary> {
        let mut out: Vec<InvariantSummary> = Vec::new();
        for r in &self.results {
            match out.iter_mut().find(|s| s.name == r.name) {
                Some(s) => {
                    s.checks += r.checks;
                    s.passed &= r.passed;
                    if r.worst_margin < s.worst_margin {
                        s.worst_margin = r.worst_margin;
                        s.worst_problem = r.problem.clone();
                    }
                }
                None => out.push(InvariantSummary {
                    name: r.name,
                    checks: r.checks,
                    worst_margin: r.worst_margin,
                    worst_problem: r.problem.clone(),
                    passed: r.passed,
                }),
            }
        }
        out
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.summary().into_iter().filter(|s| !s.passed).map(|s| s.name).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<26} {:<6} {:>7} {:>24}  worst problem", "invariant", "status", "checks", "worst margin");
        for r in self.summary() {
            let _ = writeln!(
                s,
                "{:<26} {:<6} {:>7} {:>24.16e}  {}",
                r.name,
                if r.passed { "pass" } else { "FAIL" },
                r.checks,
                r.worst_margin,
                r.worst_problem
            );
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        let _ = writeln!(
            s,
            "{} problems, {} checks, {}",
            self.problems.len(),
            self.total_checks(),
            if self.passed() { "all passed" } else { "violations found" }
        );
        s
    }
}

/// Audits in-memory problems with their own prox terms.
pub fn audit_problems(problems: &[CompositeProblem], opts: &AuditOptions) -> AuditReport {
    let owned: Vec<CompositeProblem> = problems.iter().map(|p| p.fresh()).collect();
    let per: Vec<Vec<InvariantResult>> = owned.into_par_iter().map(|p| run_battery(&p, p.prox_term(), opts)).collect();
    let mut report = AuditReport {
        problems: problems.iter().map(|p| p.label()).collect(),
        results: per.into_iter().flatten().collect(),
        warnings: Vec::new(),
    };
    if problems.is_empty() {
        report.warnings.push("no problems given; zero checks were run".into());
    }
    report
}

/// Reads every file and audits it.
pub fn cmd_check(paths: &[PathBuf], opts: &AuditOptions) -> Result<AuditReport, HarnessError> {
    let problems = paths
        .iter()
        .map(|p| read_problem(p).map_err(|e| HarnessError::from_problem(p, e)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(audit_problems(&problems, opts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{build_problem, Family, ProblemSpec};

    #[test]
    fn empty_input_warns_but_passes() {
        let r = audit_problems(&[], &AuditOptions::default());
        assert!(r.passed());
        assert_eq!(r.total_checks(), 0);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn small_problems_pass() {
        let problems: Vec<_> = [Family::Quad, Family::L1logreg, Family::L1constr]
            .into_iter()
            .map(|f| build_problem(&ProblemSpec::new(f, 8, 3)).unwrap())
            .collect();
        let r = audit_problems(&problems, &AuditOptions { run_iters: 50, ..Default::default() });
        assert!(r.passed(), "{}", r.to_text());
        assert!(r.summary().iter().any(|s| s.name == "lemma1_ii" && s.checks == 45));
    }
}
