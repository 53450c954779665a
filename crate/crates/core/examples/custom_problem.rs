//! A hand-built problem: least squares over an ℓ1 ball.

use zols::{solve, CompositeProblem, RngState, SmoothKind, SolverKind, SolverOptions};
use zols::ProxTerm;

fn main() {
    let mut rng = RngState::new(9);
    let a = rng.gaussian_matrix(40, 15);
    let b = rng.gaussian_vector(40);
    let radius = 1.0;
    let x0 = zols::prox::project_l1_ball(&rng.gaussian_vector(15), radius);
    let p = CompositeProblem::custom(SmoothKind::LeastSquares { a, b }, ProxTerm::L1Ball { radius }, x0);

    for kind in [SolverKind::Alg1, SolverKind::FISTA] {
        let t = solve(kind, &p.fresh(), p.x0(), &SolverOptions { max_iter: 1000, ..Default::default() }).unwrap();
        println!(
            "{:<6} F {:.10}  ‖x‖₁ {:.6}  {}",
            kind.name(),
            t.last().f_value,
            t.x_final.norm_l1(),
            t.termination.name()
        );
    }
}
