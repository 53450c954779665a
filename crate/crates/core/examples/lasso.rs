//! ℓ1-regularized least squares: proximal methods and the sparsity they find.

use zols::harness::reference_problem;
use zols::{build_problem, solve, Family, ProblemSpec, SolverKind, SolverOptions};

fn main() {
    let mut spec = ProblemSpec::new(Family::L1ls, 80, 5);
    spec.gamma = Some(0.05);
    let p = build_problem(&spec).unwrap();
    let f_star = reference_problem(&p, 20_000).unwrap().f_star;
    let p = p.with_f_star(Some(f_star));

    for kind in [SolverKind::Alg1, SolverKind::Alg2, SolverKind::ISTA, SolverKind::FISTA] {
        let opts = SolverOptions { max_iter: 4000, ..Default::default() };
        let t = solve(kind, &p.fresh(), p.x0(), &opts).unwrap();
        let nnz = t.x_final.iter().filter(|v| v.abs() > 1e-8).count();
        println!(
            "{:<6} gap {:.2e}  nonzeros {:>3}/{}  prox evals {}",
            kind.name(),
            t.last().gap.unwrap(),
            nnz,
            p.dim(),
            t.last().prox_evals
        );
    }
}
