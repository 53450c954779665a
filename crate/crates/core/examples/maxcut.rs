//! The smoothed max-cut relaxation for several η.

use zols::{build_problem, solve, Family, ProblemSpec, SolverKind, SolverOptions};

fn main() {
    for eta in [1e-3, 1e-2, 1e-1] {
        let mut spec = ProblemSpec::new(Family::Maxcut, 30, 2);
        spec.eta = eta;
        let p = build_problem(&spec).unwrap();
        let opts = SolverOptions { max_iter: 400, ..Default::default() };
        let t = solve(SolverKind::Alg1, &p, p.x0(), &opts).unwrap();
        let median_step = {
            let mut s: Vec<f64> = t.stepsizes().skip(1).collect();
            s.sort_by(f64::total_cmp);
            s.get(s.len() / 2).copied().unwrap_or(0.0)
        };
        println!(
            "η = {eta:<6} f0 {:.6}  f {:.6}  iters {}  median step {:.3e}",
            t.records[0].f_value,
            t.last().f_value,
            t.iterations(),
            median_step
        );
    }
}
