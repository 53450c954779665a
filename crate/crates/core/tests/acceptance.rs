//! Acceptance criteria, one line each. Runs as a plain binary so the lines
//! are always printed; exits nonzero when a hard criterion fails.

use std::time::Instant;

use zols::harness::{cmd_suite, reference_problem, SuiteConfig};
use zols::linesearch::{backtrack, stepsize_interval_margin, zo_condition, LinesearchConfig};
use zols::numkit::{cg_solve, jacobi_eigenvalues, DenseMatrix, DenseVector};
use zols::problems::{build_problem, maxcut_smooth_part, CompositeProblem, Family, ProblemSpec, SmoothKind};
use zols::prox::{
    check_lemma1_ii, check_lemma1_iv_implication, lemma1_iii_margin, project_l1_ball, prox_l1, ProxTerm,
};
use zols::randgen::RngState;
use zols::{solve, SolverKind, SolverOptions};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn half_square() -> CompositeProblem {
    CompositeProblem::custom(
        SmoothKind::Quadratic { hessian: DenseMatrix::identity(1), linear: DenseVector::zeros(1) },
        ProxTerm::Zero,
        [1.0].into(),
    )
}

/// quad d = 50, its exact L and the direct solution.
struct QuadCase {
    problem: CompositeProblem,
    l: f64,
    x_star: DenseVector,
    f_star: f64,
}

fn quad_case() -> QuadCase {
    let problem = build_problem(&ProblemSpec::new(Family::Quad, 50, 7)).unwrap();
    let SmoothKind::Quadratic { hessian, linear } = problem.kind() else { unreachable!() };
    let eig = jacobi_eigenvalues(hessian).unwrap();
    let l = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (x_star, resid) = cg_solve(hessian, &linear.scaled(-1.0), 1e-12, 5000).unwrap();
    assert!(resid <= 1e-10, "direct solve residual {resid}");
    let f_star = problem.objective(&x_star);
    let problem = problem.with_l_estimate(l);
    QuadCase { problem, l, x_star, f_star }
}

fn c1_threshold() -> Outcome {
    let p = half_square();
    let x: DenseVector = [1.0].into();
    let g: DenseVector = [1.0].into();
    let at = zo_condition(&p, &x, &g, 1.0 / 3.0).holds;
    let above = zo_condition(&p, &x, &g, 1.0 / 3.0 + 1e-6).holds;
    let ls = backtrack(&p, &x, &g, 1.0, &LinesearchConfig::default()).unwrap();
    let ok = at && !above && ls.lambda == 0.25 && ls.lambda >= 0.5 / 3.0;
    outcome(ok, format!("holds at 1/3: {at}, holds above: {above}, accepted {}", ls.lambda))
}

fn c2_stepsize_floor(q: &QuadCase) -> Outcome {
    let opts = SolverOptions { max_iter: 2000, tol: 0.0, ..Default::default() };
    let t = solve(SolverKind::Alg1, &q.problem, q.problem.x0(), &opts).unwrap();
    let floor = opts.ls.factor / (3.0 * q.l);
    let min = t.stepsizes().fold(f64::INFINITY, f64::min);
    outcome(
        t.iterations() == 2000 && min >= floor - 1e-12,
        format!("min stepsize {min:.6} vs C/(3L) = {floor:.6} over {} iterations", t.iterations()),
    )
}

fn c3_alg1_rate(q: &QuadCase) -> Outcome {
    let opts = SolverOptions { max_iter: 2000, tol: 0.0, ..Default::default() };
    let t = solve(SolverKind::Alg1, &q.problem, q.problem.x0(), &opts).unwrap();
    let r0 = q.problem.x0().dist(&q.x_star).powi(2);
    let mut violations = 0;
    let mut worst = 0.0f64;
    for r in t.records.iter().filter(|r| r.iter >= 1) {
        let bound = q.l * r0 / r.iter as f64;
        let gap = r.f_value - q.f_star;
        worst = worst.max(gap / bound);
        if gap > bound {
            violations += 1;
        }
    }
    outcome(violations == 0 && t.iterations() == 2000, format!("{violations} violations, worst gap/bound {worst:.3e}"))
}

fn c4_alg2_rate(q: &QuadCase) -> Outcome {
    let opts = SolverOptions { max_iter: 2000, tol: 0.0, record_iterates: true, ..Default::default() };
    let t = solve(SolverKind::Alg2, &q.problem, q.problem.x0(), &opts).unwrap();
    let c = opts.ls.factor;
    // record j holds y_{j+1}; x₁ = y₁ = x0
    let r1 = q.problem.x0().dist(&q.x_star).powi(2);
    let mut violations = 0;
    let mut worst = 0.0f64;
    for r in &t.records {
        let k = (r.iter + 1) as f64;
        if k < 2.0 {
            continue;
        }
        let bound = 6.0 * q.l / c * r1 / (k * k);
        let gap = r.f_value - q.f_star;
        worst = worst.max(gap / bound);
        if gap > bound {
            violations += 1;
        }
    }
    // λ_k β_k² δ_{k+1} + ½‖β_{k+1} x_{k+1} − (β_{k+1} − 1) y_{k+1} − x*‖²
    let mut rises = 0;
    let mut prev: Option<f64> = None;
    for (r, s) in t.records.iter().zip(&t.snapshots).skip(1) {
        let (b_k, b_k1) = s.beta.unwrap();
        let x_next = s.aux.as_ref().unwrap();
        let u = x_next.lincomb(b_k1, &s.primary, -(b_k1 - 1.0)).sub(&q.x_star);
        let v = r.stepsize * b_k * b_k * (r.f_value - q.f_star) + 0.5 * u.norm_sq();
        if let Some(p) = prev {
            if v > p + 1e-8 * p.abs().max(1.0) {
                rises += 1;
            }
        }
        prev = Some(v);
    }
    outcome(
        violations == 0 && rises == 0 && t.iterations() == 2000,
        format!("{violations} rate violations (worst gap/bound {worst:.3e}), {rises} Lyapunov increases"),
    )
}

fn c5_descent() -> Outcome {
    let mut violations = 0;
    let mut steps = 0;
    let mut worst = f64::INFINITY;
    for family in Family::ALL {
        let (dim, iters) = if family == Family::Maxcut { (50, 300) } else { (100, 2000) };
        let p = build_problem(&ProblemSpec::new(family, dim, 11)).unwrap();
        let opts = SolverOptions { max_iter: iters, record_iterates: true, ..Default::default() };
        let t = solve(SolverKind::Alg1, &p, p.x0(), &opts).unwrap();
        for (w, s) in t.records.windows(2).zip(t.snapshots.iter().skip(1)) {
            let fk = w[0].f_value;
            let allowed = fk - 0.5 * w[1].stepsize * s.step_g_norm_sq + 1e-8 * fk.abs().max(1.0);
            let m = allowed - w[1].f_value;
            worst = worst.min(m);
            steps += 1;
            if m < 0.0 {
                violations += 1;
            }
        }
    }
    outcome(violations == 0, format!("{violations} violations over {steps} steps on 8 families, worst margin {worst:.3e}"))
}

fn random_composite(rng: &mut RngState, term: ProxTerm) -> CompositeProblem {
    let a = rng.gaussian_matrix(5, 5);
    let b = rng.gaussian_vector(5);
    let x0 = rng.gaussian_vector(5);
    CompositeProblem::custom(SmoothKind::LeastSquares { a, b }, term, x0)
}

fn feasible(term: &ProxTerm, v: DenseVector) -> DenseVector {
    match *term {
        ProxTerm::L1Ball { radius } => project_l1_ball(&v, radius),
        _ => v,
    }
}

fn c6_lemma_battery() -> Outcome {
    let mut rng = RngState::new(6);
    let cfg = LinesearchConfig::default();
    let (mut fail_ii, mut fail_iii, mut fail_iv, mut n) = (0, 0, 0, 0);
    for i in 0..200 {
        let term = if i % 2 == 0 {
            ProxTerm::L1 { gamma: 0.05 + rng.next_uniform() }
        } else {
            ProxTerm::L1Ball { radius: 0.5 + 2.0 * rng.next_uniform() }
        };
        let p = random_composite(&mut rng, term);
        let x = feasible(&term, rng.gaussian_vector(5));
        let y = feasible(&term, rng.gaussian_vector(5).scaled(2.0));
        let g = p.smooth().gradient_uncounted(&x);
        let lambda_any = 10f64.powf(-3.0 + 3.0 * rng.next_uniform());
        if !check_lemma1_ii(&term, &x, &y, lambda_any, &g) {
            fail_ii += 1;
        }
        let Ok(ls) = backtrack(&p, &x, &g, cfg.lambda_init, &cfg) else {
            fail_iv += 1;
            continue;
        };
        let scale = p.objective(&x).abs().max(p.objective(&y).abs()).max(1.0);
        if lemma1_iii_margin(&p, &x, &y, ls.lambda) < -1e-8 * scale {
            fail_iii += 1;
        }
        if !check_lemma1_iv_implication(&p, &x, ls.lambda) {
            fail_iv += 1;
        }
        n += 1;
    }
    outcome(
        fail_ii + fail_iii + fail_iv == 0 && n == 200,
        format!("200 instances (L1 and L1-ball, d = 5): failures ii {fail_ii}, iii {fail_iii}, iv {fail_iv}"),
    )
}

/// Minimizer of `t|u| + ½(u − x)²` by grid search refined with ternary search.
fn soft_oracle(x: f64, t: f64) -> f64 {
    let obj = |u: f64| t * u.abs() + 0.5 * (u - x) * (u - x);
    let (lo, hi) = (x.min(0.0) - 1.0, x.max(0.0) + 1.0);
    let n = 2000;
    let h = (hi - lo) / n as f64;
    let best = (0..=n).map(|i| lo + i as f64 * h).min_by(|a, b| obj(*a).total_cmp(&obj(*b))).unwrap();
    let (mut a, mut b) = (best - h, best + h);
    for _ in 0..200 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if obj(m1) <= obj(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    0.5 * (a + b)
}

/// Projection onto the ℓ1 ball by enumerating supports: on support `S` with
/// signs fixed by `x`, the boundary solution shifts every magnitude by the
/// same θ.
fn ball_oracle(x: &[f64], r: f64) -> Vec<f64> {
    if x.iter().map(|v| v.abs()).sum::<f64>() <= r {
        return x.to_vec();
    }
    let d = x.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << d) {
        let support: Vec<usize> = (0..d).filter(|i| mask & (1 << i) != 0).collect();
        let theta = (support.iter().map(|&i| x[i].abs()).sum::<f64>() - r) / support.len() as f64;
        if support.iter().any(|&i| x[i].abs() - theta < 0.0) {
            continue;
        }
        let y: Vec<f64> =
            (0..d).map(|i| if support.contains(&i) { x[i].signum() * (x[i].abs() - theta) } else { 0.0 }).collect();
        let dist: f64 = y.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().is_none_or(|(bd, _)| dist < *bd) {
            best = Some((dist, y));
        }
    }
    best.unwrap().1
}

fn c7_prox_oracles() -> Outcome {
    let mut rng = RngState::new(7);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let d = 1 + i % 3;
        let x = rng.gaussian_vector(d).scaled(2.0);
        let t = 0.01 + rng.next_uniform();
        let r = 0.1 + 2.0 * rng.next_uniform();
        let soft = prox_l1(&x, t);
        for j in 0..d {
            worst = worst.max((soft[j] - soft_oracle(x[j], t)).abs());
        }
        let proj = project_l1_ball(&x, r);
        let oracle = ball_oracle(x.as_slice(), r);
        for j in 0..d {
            worst = worst.max((proj[j] - oracle[j]).abs());
        }
    }
    outcome(worst <= 1e-6, format!("200 inputs, d <= 3, worst deviation {worst:.2e}"))
}

fn fd_gradient_error(kind: &SmoothKind, x: &DenseVector) -> f64 {
    let (_, g) = kind.value_grad(x);
    let mut fd = DenseVector::zeros(x.len());
    for i in 0..x.len() {
        let h = 1e-6 * x[i].abs().max(1.0);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp.as_mut_slice()[i] += h;
        xm.as_mut_slice()[i] -= h;
        fd.as_mut_slice()[i] = (kind.value(&xp) - kind.value(&xm)) / (2.0 * h);
    }
    fd.dist(&g) / g.norm().max(1e-12)
}

fn c8_gradients() -> Outcome {
    let mut rng = RngState::new(8);
    let mut worst: Vec<(&str, f64)> = Vec::new();
    for family in [Family::Logreg, Family::Quad, Family::Lse, Family::Maxcut, Family::L1ls, Family::Cubic] {
        let mut spec = ProblemSpec::new(family, 10, 3);
        if family == Family::Maxcut {
            spec.epsilon = 0.1;
        }
        let p = build_problem(&spec).unwrap();
        let mut w = 0.0f64;
        for _ in 0..5 {
            let x = p.x0().axpy(0.5, &rng.gaussian_vector(10));
            w = w.max(fd_gradient_error(p.kind(), &x));
        }
        worst.push((p.kind().name(), w));
    }
    let ok = worst.iter().all(|(_, w)| *w <= 1e-4);
    let detail = worst.iter().map(|(n, w)| format!("{n} {w:.1e}")).collect::<Vec<_>>().join(", ");
    outcome(ok, format!("relative errors: {detail}"))
}

fn c9_maxcut_structure() -> Outcome {
    let mut rng = RngState::new(9);
    let (mut worst_sum, mut worst_box) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let c = rng.gaussian_matrix(20, 20).symmetrized();
        let y = rng.gaussian_vector(20);
        let (_, g) = maxcut_smooth_part(&c, 1e-5, &y).unwrap();
        worst_sum = worst_sum.max((g.sum() - 1.0).abs());
        for v in g.iter() {
            worst_box = worst_box.max(-v).max(v - 1.0);
        }
    }
    outcome(
        worst_sum <= 1e-8 && worst_box <= 1e-10,
        format!("worst |sum - 1| {worst_sum:.1e}, worst box excess {worst_box:.1e}"),
    )
}

fn c10_interval_audit() -> Outcome {
    let slack = LinesearchConfig::default().slack;
    let (mut worst, mut checked, mut violations, mut beyond_slack) = (f64::INFINITY, 0, 0, 0);
    for family in [Family::Logreg, Family::Quad, Family::Lse] {
        let p = build_problem(&ProblemSpec::new(family, 100, 10)).unwrap();
        let opts = SolverOptions { max_iter: 2000, record_iterates: true, ..Default::default() };
        let t = solve(SolverKind::Alg1, &p, p.x0(), &opts).unwrap();
        for (s, r) in t.snapshots.iter().zip(t.records.iter().skip(1)) {
            let g = p.smooth().gradient_uncounted(&s.primary);
            let f = |v: &DenseVector| p.smooth().value_uncounted(v);
            let m = stepsize_interval_margin(f, &s.primary, r.stepsize, &g);
            worst = worst.min(m);
            checked += 1;
            if m < -1e-9 {
                violations += 1;
                // what the acceptance test's own slack allows, in stepsize units
                let phi = f(&s.primary.axpy(-r.stepsize, &g));
                if m + 2.0 * slack * phi.abs().max(1.0) / g.norm_sq() < -1e-9 {
                    beyond_slack += 1;
                }
            }
        }
    }
    outcome(
        violations == 0,
        format!(
            "{checked} accepted steps, {violations} violations (worst margin {worst:.3e}), \
             {beyond_slack} not explained by the linesearch slack"
        ),
    )
}

fn c11_figure() -> Outcome {
    let p = build_problem(&ProblemSpec::new(Family::L1logreg, 100, 12)).unwrap();
    let rec = reference_problem(&p, 20_000).unwrap();
    let p = p.with_f_star(Some(rec.f_star));
    let evals = |kind: SolverKind| {
        let opts = SolverOptions { max_iter: 20_000, tol: 1e-12, ..Default::default() };
        let t = solve(kind, &p.fresh(), p.x0(), &opts).unwrap();
        t.records.iter().find(|r| r.gap.is_some_and(|g| g <= 1e-6)).map(|r| r.grad_evals)
    };
    let (a2, ista, fista) = (evals(SolverKind::Alg2), evals(SolverKind::ISTA), evals(SolverKind::FISTA));
    let ok = match (a2, ista, fista) {
        (Some(a), Some(i), Some(f)) => a <= i && a <= 2 * f,
        (Some(a), None, Some(f)) => a <= 2 * f,
        _ => false,
    };
    outcome(ok, format!("gradient evaluations to gap 1e-6: alg2 {a2:?}, ista {ista:?}, fista {fista:?}"))
}

fn c12_determinism() -> Outcome {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SuiteConfig {
            seed: 2024,
            max_iter: 300,
            reference_budget: 1000,
            solvers: SolverKind::ALL.to_vec(),
            out_dir: dir.path().to_path_buf(),
            ..Default::default()
        };
        let report = cmd_suite(&cfg).unwrap();
        (std::fs::read(&report.summary_path).unwrap(), report.rows.len(), report.failures())
    };
    let (a, rows, failures) = run();
    let (b, _, _) = run();
    outcome(a == b && rows > 0, format!("{rows} runs per suite, {failures} failed runs, summaries identical: {}", a == b))
}

fn main() {
    let start = Instant::now();
    let q = quad_case();
    let criteria: Vec<(usize, &str, bool, Box<dyn Fn() -> Outcome>)> = vec![
        (1, "tight threshold on the 1-D quadratic", true, Box::new(c1_threshold)),
        (2, "stepsize lower bound C/(3L)", true, Box::new(|| c2_stepsize_floor(&q))),
        (3, "Alg1 sub-optimality rate", true, Box::new(|| c3_alg1_rate(&q))),
        (4, "Alg2 rate and Lyapunov decrease", true, Box::new(|| c4_alg2_rate(&q))),
        (5, "Alg1 per-step descent on every family", true, Box::new(c5_descent)),
        (6, "gradient-mapping inequality battery", true, Box::new(c6_lemma_battery)),
        (7, "prox oracle equivalence", true, Box::new(c7_prox_oracles)),
        (8, "gradient finite differences", true, Box::new(c8_gradients)),
        (9, "max-cut gradient structure", true, Box::new(c9_maxcut_structure)),
        (10, "stepsize interval audit", true, Box::new(c10_interval_audit)),
        (11, "L1 logistic regression ordering (soft)", false, Box::new(c11_figure)),
        (12, "suite determinism", true, Box::new(c12_determinism)),
    ];
    let mut hard_failures = 0;
    for (id, name, hard, f) in &criteria {
        let t0 = Instant::now();
        let o = f();
        let status = match (o.passed, hard) {
            (true, _) => "PASS",
            (false, true) => {
                hard_failures += 1;
                "FAIL"
            }
            (false, false) => "WARN",
        };
        println!("criterion {id:>2} {status} {name}: {} [{:.2}s]", o.detail, t0.elapsed().as_secs_f64());
    }
    println!("acceptance: {hard_failures} hard failures, {:.1}s total", start.elapsed().as_secs_f64());
    if hard_failures > 0 {
        std::process::exit(1);
    }
}
