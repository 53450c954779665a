//! Gradient evaluations each smooth method needs to reach a gap of 1e-6.

use zols::harness::{evals_to_threshold, reference_problem};
use zols::{build_problem, solve, Family, ProblemSpec, SolverKind, SolverOptions};

fn main() {
    for family in [Family::Logreg, Family::Lse, Family::Cubic] {
        let p = build_problem(&ProblemSpec::new(family, 60, 3)).unwrap();
        let f_star = reference_problem(&p, 10_000).unwrap().f_star;
        let p = p.with_f_star(Some(f_star));
        println!("{}", p.label());
        for kind in SolverKind::ALL.into_iter().filter(|k| k.accepts(&p)) {
            let opts = SolverOptions { max_iter: 3000, f_star_hint: Some(f_star), ..Default::default() };
            let t = solve(kind, &p.fresh(), p.x0(), &opts).unwrap();
            let hit = evals_to_threshold(&t.records, 1e-6);
            let shown = hit.map_or("-".to_string(), |(_, g)| g.to_string());
            println!("  {:<11} grads to 1e-6: {:>6}   final gap {:.2e}", kind.name(), shown, t.last().gap.unwrap());
        }
    }
}
