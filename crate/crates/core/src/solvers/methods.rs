use super::rules::{
    adgd_accel_update, adgd_stepsize, armijo_accept, beta_next, momentum_combine, polyak_stepsize,
    stationarity_norm, AdgdAccelState,
};
use super::{AccelStart, Run, StepInfo};
use crate::linesearch::{backtrack, warm_start_lambda};
use crate::numkit::DenseVector;
use crate::trace::Termination;

fn info(g_norm_sq: f64) -> StepInfo<'static> {
    StepInfo { g_norm_sq, ..Default::default() }
}

/// Zero-order linesearch without momentum, warm-started from the last
/// objective decrease.
pub(crate) fn alg1(run: &mut Run, x0: &DenseVector) -> Termination {
    let p = run.problem;
    let cfg = run.opts.ls;
    let mut x = x0.clone();
    let (mut f_cur, mut g) = p.smooth().value_grad(&x);
    run.push(0, &x, Some(f_cur), 0.0, info(0.0));
    let composite = p.is_composite();
    let mut h_cur = p.h_value(&x);
    // (f or F at the previous iterate, ‖G‖² of the previous step)
    let mut prev: Option<(f64, f64)> = None;
    let mut lambda_prev = cfg.lambda_init;
    for k in 0..run.opts.max_iter {
        if k > 0 {
            g = p.smooth().gradient(&x);
        }
        let start = match prev {
            None => cfg.lambda_init,
            // ∇f need not vanish at a constrained or sparse optimum; the
            // composite analogue measures the decrease of F against the last ‖G‖²
            Some((fp, gn_prev)) if composite => warm_start_lambda(fp, f_cur + h_cur, gn_prev, lambda_prev),
            Some((fp, _)) => warm_start_lambda(fp, f_cur, g.norm_sq(), lambda_prev),
        };
        let ls = match backtrack(p, &x, &g, start, &cfg) {
            Ok(ls) => ls,
            Err(e) => {
                run.push(k + 1, &x, Some(f_cur), e.best_lambda, info(0.0));
                return Termination::LinesearchFail { iter: k };
            }
        };
        if stationarity_norm(ls.g_map()) <= run.tol() {
            return Termination::Converged;
        }
        x = ls.x_plus().clone();
        prev = Some((if composite { f_cur + h_cur } else { f_cur }, ls.g_map().norm_sq()));
        f_cur = ls.f_plus;
        h_cur = p.h_value(&x);
        lambda_prev = ls.lambda;
        if !run.push(k + 1, &x, Some(f_cur), ls.lambda, info(ls.g_map().norm_sq())) {
            return Termination::Diverged { iter: k };
        }
    }
    Termination::MaxIter
}

/// GD (`prox = false`) or ISTA with stepsize `1/L`.
pub(crate) fn constant_step(run: &mut Run, x0: &DenseVector, prox: bool) -> Termination {
    let p = run.problem;
    let lambda = 1.0 / run.l_used;
    let mut x = x0.clone();
    run.push(0, &x, None, 0.0, info(0.0));
    for k in 0..run.opts.max_iter {
        let g = p.smooth().gradient(&x);
        let (step, x_next) = if prox {
            let gm = p.grad_map(&g, &x, lambda);
            (gm.g_map, gm.x_plus)
        } else {
            let x_next = x.axpy(-lambda, &g);
            (g, x_next)
        };
        if stationarity_norm(&step) <= run.tol() {
            return Termination::Converged;
        }
        x = x_next;
        if !run.push(k + 1, &x, None, lambda, info(step.norm_sq())) {
            return Termination::Diverged { iter: k };
        }
    }
    Termination::MaxIter
}

#[derive(Clone, Copy)]
pub(crate) enum AccelStep {
    /// Zero-order linesearch with non-increasing stepsizes.
    Linesearch,
    /// Stepsize `1/L`; `prox = false` skips the prox entirely.
    Fixed { prox: bool },
}

/// Two-sequence accelerated scheme:
/// `y_{k+1} = x_k − λ_k G(x_k, λ_k)`, `x_{k+1}` an affine combination of
/// `y_{k+1}` and `y_k`. With `β₀ = 0` the recursion gives `β₁ = 1`, and
/// `x₁ = y₁ = x0`.
pub(crate) fn accelerated(run: &mut Run, x0: &DenseVector, step: AccelStep) -> Termination {
    let p = run.problem;
    let cfg = run.opts.ls;
    let warm = matches!(step, AccelStep::Linesearch) && run.opts.accel_start == AccelStart::WarmClamped;
    let mut y = x0.clone();
    let mut x = x0.clone();
    let mut beta = beta_next(0.0);
    run.push(0, &y, None, 0.0, StepInfo { aux: Some(&x), beta: Some((0.0, beta)), g_norm_sq: 0.0 });
    let mut lambda_prev = cfg.lambda_init;
    let mut f_x_prev: Option<f64> = None;
    for k in 0..run.opts.max_iter {
        let (lambda, g_map, y_next, f_y) = match step {
            AccelStep::Linesearch => {
                let (f_x, g) = if warm {
                    let (f, g) = p.smooth().value_grad(&x);
                    (Some(f), g)
                } else {
                    (None, p.smooth().gradient(&x))
                };
                let start = match (k, f_x_prev, f_x) {
                    (0, _, _) => cfg.lambda_init,
                    (_, Some(fp), Some(fc)) => lambda_prev.min(warm_start_lambda(fp, fc, g.norm_sq(), lambda_prev)),
                    _ => lambda_prev,
                };
                f_x_prev = f_x;
                match backtrack(p, &x, &g, start, &cfg) {
                    Ok(ls) => (ls.lambda, ls.grad_map.g_map, ls.grad_map.x_plus, Some(ls.f_plus)),
                    Err(e) => {
                        run.push(k + 1, &y, None, e.best_lambda, info(0.0));
                        return Termination::LinesearchFail { iter: k };
                    }
                }
            }
            AccelStep::Fixed { prox } => {
                let lambda = 1.0 / run.l_used;
                let g = p.smooth().gradient(&x);
                if prox {
                    let gm = p.grad_map(&g, &x, lambda);
                    (lambda, gm.g_map, gm.x_plus, None)
                } else {
                    let y_next = x.axpy(-lambda, &g);
                    (lambda, g, y_next, None)
                }
            }
        };
        if stationarity_norm(&g_map) <= run.tol() {
            return Termination::Converged;
        }
        let beta_n = beta_next(beta);
        let x_next = momentum_combine(&y_next, &y, beta, beta_n);
        let ok = run.push(
            k + 1,
            &y_next,
            f_y,
            lambda,
            StepInfo { aux: Some(&x_next), beta: Some((beta, beta_n)), g_norm_sq: g_map.norm_sq() },
        );
        y = y_next;
        x = x_next;
        beta = beta_n;
        lambda_prev = lambda;
        if !ok {
            return Termination::Diverged { iter: k };
        }
    }
    Termination::MaxIter
}

/// `λ = (f − f*)/‖∇f‖²`; stops once `f ≤ f*`.
pub(crate) fn polyak(run: &mut Run, x0: &DenseVector, f_star: f64) -> Termination {
    let p = run.problem;
    let mut x = x0.clone();
    run.push(0, &x, None, 0.0, info(0.0));
    for k in 0..run.opts.max_iter {
        let (f, g) = p.smooth().value_grad(&x);
        if stationarity_norm(&g) <= run.tol() {
            return Termination::Converged;
        }
        let lambda = polyak_stepsize(f, f_star, g.norm_sq());
        if !(lambda > 0.0) {
            return Termination::Converged;
        }
        x = x.axpy(-lambda, &g);
        if !run.push(k + 1, &x, None, lambda, info(g.norm_sq())) {
            return Termination::Diverged { iter: k };
        }
    }
    Termination::MaxIter
}

/// Gradient descent with Armijo backtracking from `lambda_init`.
pub(crate) fn armijo(run: &mut Run, x0: &DenseVector) -> Termination {
    let p = run.problem;
    let cfg = run.opts.ls;
    let mut x = x0.clone();
    let (mut f, mut g) = p.smooth().value_grad(&x);
    run.push(0, &x, Some(f), 0.0, info(0.0));
    for k in 0..run.opts.max_iter {
        if k > 0 {
            g = p.smooth().gradient(&x);
        }
        if stationarity_norm(&g) <= run.tol() {
            return Termination::Converged;
        }
        let gn = g.norm_sq();
        let mut lambda = cfg.lambda_init;
        let mut accepted = None;
        for i in 0..=cfg.max_backtracks {
            if i > 0 {
                lambda *= cfg.factor;
            }
            let cand = x.axpy(-lambda, &g);
            let phi = p.smooth().value(&cand);
            if armijo_accept(f, phi, -gn, lambda, run.opts.c1) {
                accepted = Some((cand, phi));
                break;
            }
        }
        let Some((cand, phi)) = accepted else {
            run.push(k + 1, &x, Some(f), lambda, info(0.0));
            return Termination::LinesearchFail { iter: k };
        };
        x = cand;
        f = phi;
        if !run.push(k + 1, &x, Some(f), lambda, info(gn)) {
            return Termination::Diverged { iter: k };
        }
    }
    Termination::MaxIter
}

/// Adaptive gradient descent driven by local curvature estimates.
pub(crate) fn adgd(run: &mut Run, x0: &DenseVector) -> Termination {
    let p = run.problem;
    let mut x_prev = x0.clone();
    run.push(0, &x_prev, None, 0.0, info(0.0));
    let mut g_prev = p.smooth().gradient(&x_prev);
    if stationarity_norm(&g_prev) <= run.tol() {
        return Termination::Converged;
    }
    let mut lambda = run.opts.adgd_lambda0;
    let mut theta = 0.0;
    let mut x = x_prev.axpy(-lambda, &g_prev);
    if !run.push(1, &x, None, lambda, info(g_prev.norm_sq())) {
        return Termination::Diverged { iter: 0 };
    }
    for k in 1..run.opts.max_iter {
        let g = p.smooth().gradient(&x);
        if stationarity_norm(&g) <= run.tol() {
            return Termination::Converged;
        }
        (lambda, theta) = adgd_stepsize(lambda, theta, x.dist(&x_prev), g.dist(&g_prev));
        let x_next = x.axpy(-lambda, &g);
        x_prev = std::mem::replace(&mut x, x_next);
        if !run.push(k + 1, &x, None, lambda, info(g.norm_sq())) {
            return Termination::Diverged { iter: k };
        }
        g_prev = g;
    }
    Termination::MaxIter
}

/// Accelerated variant: `y_{k+1} = x_k − λ_k∇f(x_k)`,
/// `x_{k+1} = y_{k+1} + β_k(y_{k+1} − y_k)`.
pub(crate) fn adgd_accel(run: &mut Run, x0: &DenseVector) -> Termination {
    let p = run.problem;
    let mut state = AdgdAccelState::new(run.opts.adgd_lambda0);
    let mut y = x0.clone();
    run.push(0, &y, None, 0.0, info(0.0));
    let mut x_prev = x0.clone();
    let mut g_prev = p.smooth().gradient(&x_prev);
    if stationarity_norm(&g_prev) <= run.tol() {
        return Termination::Converged;
    }
    // first step without momentum
    let y_next = x_prev.axpy(-state.lambda, &g_prev);
    let mut x = y_next.clone();
    if !run.push(1, &y_next, None, state.lambda, info(g_prev.norm_sq())) {
        return Termination::Diverged { iter: 0 };
    }
    y = y_next;
    for k in 1..run.opts.max_iter {
        let g = p.smooth().gradient(&x);
        if stationarity_norm(&g) <= run.tol() {
            return Termination::Converged;
        }
        let (lambda, _, beta) = adgd_accel_update(&mut state, x.dist(&x_prev), g.dist(&g_prev));
        let y_next = x.axpy(-lambda, &g);
        let x_next = y_next.lincomb(1.0 + beta, &y, -beta);
        if !run.push(k + 1, &y_next, None, lambda, StepInfo { aux: Some(&x_next), beta: None, g_norm_sq: g.norm_sq() }) {
            return Termination::Diverged { iter: k };
        }
        y = y_next;
        x_prev = std::mem::replace(&mut x, x_next);
        g_prev = g;
    }
    Termination::MaxIter
}
