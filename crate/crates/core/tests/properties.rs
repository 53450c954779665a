use proptest::prelude::*;

use zols::linesearch::{backtrack, zo_condition, zo_inequality_smooth, LinesearchConfig};
use zols::numkit::{dot, DenseVector};
use zols::problems::{CompositeProblem, SmoothKind};
use zols::prox::{
    check_lemma1_ii, check_lemma1_iv_implication, gradient_mapping, lemma1_iii_margin, project_l1_ball, prox_l1,
    ProxTerm,
};
use zols::randgen::RngState;

fn vec_strategy(len: usize) -> impl Strategy<Value = DenseVector> {
    prop::collection::vec(-5.0f64..5.0, len).prop_map(DenseVector::from)
}

fn ls_instance(seed: u64, term: ProxTerm) -> CompositeProblem {
    let mut rng = RngState::new(seed);
    let a = rng.gaussian_matrix(5, 5);
    let b = rng.gaussian_vector(5);
    let x0 = rng.gaussian_vector(5);
    CompositeProblem::custom(SmoothKind::LeastSquares { a, b }, term, x0)
}

fn term_strategy() -> impl Strategy<Value = ProxTerm> {
    prop_oneof![
        Just(ProxTerm::Zero),
        (0.01f64..2.0).prop_map(|gamma| ProxTerm::L1 { gamma }),
        (0.1f64..3.0).prop_map(|radius| ProxTerm::L1Ball { radius }),
    ]
}

fn feasible(term: &ProxTerm, v: DenseVector) -> DenseVector {
    match *term {
        ProxTerm::L1Ball { radius } => project_l1_ball(&v, radius),
        _ => v,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn dot_is_bilinear(a in vec_strategy(6), b in vec_strategy(6), c in vec_strategy(6), s in -3.0f64..3.0) {
        let lhs = dot(&a.lincomb(s, &b, 1.0), &c).unwrap();
        let rhs = s * dot(&a, &c).unwrap() + dot(&b, &c).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        prop_assert_eq!(dot(&a, &b).unwrap(), dot(&b, &a).unwrap());
    }

    #[test]
    fn prox_is_nonexpansive(a in vec_strategy(5), b in vec_strategy(5), t in 0.001f64..3.0, r in 0.1f64..4.0) {
        prop_assert!(prox_l1(&a, t).dist(&prox_l1(&b, t)) <= a.dist(&b) + 1e-12);
        prop_assert!(project_l1_ball(&a, r).dist(&project_l1_ball(&b, r)) <= a.dist(&b) + 1e-12);
    }

    #[test]
    fn projection_is_feasible(a in vec_strategy(7), r in 0.01f64..10.0) {
        prop_assert!(project_l1_ball(&a, r).norm_l1() <= r + 1e-10);
    }

    #[test]
    fn gradient_mapping_is_consistent(x in vec_strategy(5), g in vec_strategy(5), lambda in 0.01f64..2.0, term in term_strategy()) {
        let gm = gradient_mapping(&g, &x, lambda, &term);
        let back = x.sub(&gm.x_plus).scaled(1.0 / lambda);
        prop_assert!(back.dist(&gm.g_map) <= 1e-12 * (x.norm() / lambda).max(1.0));
        prop_assert_eq!(gm.x_plus.clone(), x.axpy(-lambda, &gm.g_map));
        if term == ProxTerm::Zero {
            prop_assert_eq!(gm.g_map, g);
        }
    }

    #[test]
    fn lemma1_ii_holds(seed in any::<u64>(), term in term_strategy(), lambda in 0.001f64..3.0) {
        let p = ls_instance(seed, term);
        let mut rng = RngState::new(seed ^ 1);
        let x = rng.gaussian_vector(5);
        let y = feasible(&term, rng.gaussian_vector(5).scaled(2.0));
        let g = p.smooth().gradient_uncounted(&x);
        prop_assert!(check_lemma1_ii(&term, &x, &y, lambda, &g));
        // y = x⁺ turns the inequality into an equality
        let gm = gradient_mapping(&g, &x, lambda, &term);
        prop_assert!(check_lemma1_ii(&term, &x, &gm.x_plus, lambda, &g));
    }

    #[test]
    fn accepted_steps_satisfy_lemma1_iii_and_iv(seed in any::<u64>(), term in term_strategy()) {
        let p = ls_instance(seed, term);
        let mut rng = RngState::new(seed ^ 2);
        let x = feasible(&term, rng.gaussian_vector(5));
        let z = feasible(&term, rng.gaussian_vector(5));
        let g = p.smooth().gradient_uncounted(&x);
        let ls = backtrack(&p, &x, &g, 1.0, &LinesearchConfig::default()).unwrap();
        prop_assert!(check_lemma1_iv_implication(&p, &x, ls.lambda));
        let scale = p.objective(&x).abs().max(p.objective(&z).abs()).max(1.0);
        prop_assert!(lemma1_iii_margin(&p, &x, &z, ls.lambda) >= -1e-8 * scale);
    }

    #[test]
    fn backtracking_accounting(seed in any::<u64>(), term in term_strategy(), start in 0.01f64..50.0, c in 0.1f64..0.9) {
        let p = ls_instance(seed, term);
        let x = feasible(&term, p.x0().clone());
        let g = p.smooth().gradient(&x);
        let cfg = LinesearchConfig { factor: c, ..Default::default() };
        let before = p.counts();
        let (tried, lambda) = match backtrack(&p, &x, &g, start, &cfg) {
            Ok(ls) => {
                let b = ls.backtracks as u64;
                prop_assert!(ls.backtracks <= cfg.max_backtracks);
                prop_assert_eq!((ls.f_evals, ls.prox_evals), (2 * (b + 1), b + 1));
                (ls.backtracks, Some(ls.lambda))
            }
            Err(e) => {
                prop_assert_eq!(e.tried, cfg.max_backtracks + 1);
                (e.tried, None)
            }
        };
        let used = p.counts() - before;
        let n = match lambda { Some(_) => tried as u64 + 1, None => tried as u64 };
        prop_assert_eq!(used.prox_evals, n);
        prop_assert_eq!(used.f_evals, 2 * n);
        let mut lam = start;
        for _ in 0..tried {
            // every earlier candidate is rejected
            prop_assert!(!zo_condition(&p, &x, &g, lam).holds);
            lam *= c;
        }
        if let Some(l) = lambda {
            prop_assert_eq!(lam, l);
        }
    }

    #[test]
    fn smooth_and_general_decisions_agree(seed in any::<u64>(), lambda in 1e-4f64..10.0) {
        let p = ls_instance(seed, ProxTerm::Zero);
        let x = p.x0().clone();
        let g = p.smooth().gradient_uncounted(&x);
        let check = zo_condition(&p, &x, &g, lambda);
        let smooth = zo_inequality_smooth(check.phi_lambda, check.phi_2lambda, g.norm_sq(), lambda, 1e-12);
        prop_assert_eq!(check.holds, smooth);
    }

    #[test]
    fn uniforms_stay_in_unit_interval(seed in any::<u64>()) {
        let mut rng = RngState::new(seed);
        for _ in 0..200 {
            let u = rng.next_uniform();
            prop_assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn job_streams_are_reproducible(master in any::<u64>(), job in 0u64..8) {
        let a: Vec<u64> = { let mut r = RngState::for_job(master, job); (0..4).map(|_| r.next_u64()).collect() };
        let b: Vec<u64> = { let mut r = RngState::for_job(master, job); (0..4).map(|_| r.next_u64()).collect() };
        let c: Vec<u64> = { let mut r = RngState::for_job(master, job + 1); (0..4).map(|_| r.next_u64()).collect() };
        prop_assert_eq!(&a, &b);
        prop_assert_ne!(a, c);
    }

    #[test]
    fn gram_matches_explicit_product(rows in 1usize..6, cols in 1usize..6, seed in any::<u64>()) {
        let a = RngState::new(seed).gaussian_matrix(rows, cols);
        let explicit = a.transpose().matmul(&a).unwrap();
        let diff = a.gram().sub(&explicit).unwrap().max_abs();
        prop_assert!(diff <= 1e-12 * (1.0 + explicit.max_abs()));
    }
}
