//! One zero-order backtracking search on f(x) = ½‖Ax − b‖², printing every
//! candidate with the two function values the test compares.

use zols::linesearch::{backtrack, zo_condition, LinesearchConfig};
use zols::{CompositeProblem, DenseMatrix, DenseVector, ProxTerm, SmoothKind};

fn main() {
    let a = DenseMatrix::from_rows(&[vec![4.0, 1.0], vec![1.0, 3.0], vec![0.0, 2.0]]).unwrap();
    let b = DenseVector::from(vec![1.0, -2.0, 0.5]);
    let problem = CompositeProblem::custom(
        SmoothKind::LeastSquares { a, b },
        ProxTerm::Zero,
        DenseVector::from(vec![3.0, -1.0]),
    );
    let x = problem.x0().clone();
    let g = problem.smooth().gradient(&x);
    let cfg = LinesearchConfig { lambda_init: 4.0, ..Default::default() };

    let mut lambda = cfg.lambda_init;
    loop {
        let c = zo_condition(&problem, &x, &g, lambda);
        println!("λ = {lambda:<10} φ(λ) = {:<22} φ(2λ) = {:<22} {}", c.phi_lambda, c.phi_2lambda, if c.holds { "accept" } else { "reject" });
        if c.holds {
            break;
        }
        lambda *= cfg.factor;
    }

    let out = backtrack(&problem, &x, &g, cfg.lambda_init, &cfg).unwrap();
    println!("backtrack: λ = {} after {} reductions, {} f evals", out.lambda, out.backtracks, out.f_evals);
    println!("f: {} -> {}", problem.objective(&x), out.f_plus);
}
