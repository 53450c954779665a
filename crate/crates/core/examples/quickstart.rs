//! Build a benchmark problem, run Alg1 and print a few trace rows.

use zols::harness::reference_problem;
use zols::{build_problem, solve, Family, ProblemSpec, SolverKind, SolverOptions};

fn main() {
    let problem = build_problem(&ProblemSpec::new(Family::Logreg, 50, 1)).expect("valid spec");
    let reference = reference_problem(&problem, 5000).expect("reference");
    let problem = problem.with_f_star(Some(reference.f_star));

    let opts = SolverOptions { max_iter: 500, ..Default::default() };
    let trace = solve(SolverKind::Alg1, &problem, problem.x0(), &opts).expect("solver accepts problem");

    println!("{} on {}: {}", trace.meta.solver, problem.label(), trace.termination.name());
    for r in trace.records.iter().step_by(100).chain([trace.last()]) {
        println!(
            "iter {:>4}  f {:.12}  gap {:.3e}  step {:.3e}  grads {}",
            r.iter,
            r.f_value,
            r.gap.unwrap_or(f64::NAN),
            r.stepsize,
            r.grad_evals
        );
    }
}
