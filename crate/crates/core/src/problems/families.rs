//! Value and gradient of each smooth objective family.

use crate::error::NumError;
use crate::numkit::{dot_unchecked, jacobi_eig, jacobi_eigenvalues, matvec, matvec_t, DenseMatrix, DenseVector};

/// `log(1 + e^t)` without overflow.
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// `1 / (1 + e^{-t})` without overflow.
fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Rows of `a` are the samples `a_i`.
pub fn logistic_value(a: &DenseMatrix, b: &DenseVector, gamma: f64, x: &DenseVector) -> f64 {
    let n = a.rows() as f64;
    let z = matvec(a, x).expect("logistic: dims");
    let loss: f64 = z.iter().zip(b.iter()).map(|(&zi, &bi)| softplus(-bi * zi)).sum::<f64>() / n;
    loss + 0.5 * gamma * x.norm_sq()
}

/// `(1/N) Σ log(1 + exp(−b_i a_iᵀx)) + (γ/2)‖x‖²` and its gradient.
pub fn logistic_value_grad(a: &DenseMatrix, b: &DenseVector, gamma: f64, x: &DenseVector) -> (f64, DenseVector) {
    let n = a.rows() as f64;
    let z = matvec(a, x).expect("logistic: dims");
    let mut loss = 0.0;
    let coef: DenseVector = z
        .iter()
        .zip(b.iter())
        .map(|(&zi, &bi)| {
            let m = bi * zi;
            loss += softplus(-m);
            -bi * sigmoid(-m) / n
        })
        .collect();
    let grad = matvec_t(a, &coef).expect("logistic: dims").axpy(gamma, x);
    (loss / n + 0.5 * gamma * x.norm_sq(), grad)
}

/// `½xᵀBx + bᵀx` and `Bx + b`.
pub fn quadratic_value_grad(hessian: &DenseMatrix, linear: &DenseVector, x: &DenseVector) -> (f64, DenseVector) {
    let bx = matvec(hessian, x).expect("quadratic: dims");
    let f = 0.5 * dot_unchecked(x.as_slice(), bx.as_slice()) + dot_unchecked(linear.as_slice(), x.as_slice());
    (f, bx.add(linear))
}

fn lse_shifted(a: &DenseMatrix, b: &DenseVector, x: &DenseVector) -> (DenseVector, f64, f64) {
    let s = matvec(a, x).expect("lse: dims").sub(b);
    let m = s.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let sum: f64 = s.iter().map(|&v| (v - m).exp()).sum();
    (s, m, sum)
}

pub fn lse_value(a: &DenseMatrix, b: &DenseVector, gamma: f64, x: &DenseVector) -> f64 {
    let (_, m, sum) = lse_shifted(a, b, x);
    m + sum.ln() + 0.5 * gamma * x.norm_sq()
}

/// `log Σ exp(a_iᵀx − b_i) + (γ/2)‖x‖²` with max-shift, gradient `Aᵀ softmax + γx`.
pub fn lse_value_grad(a: &DenseMatrix, b: &DenseVector, gamma: f64, x: &DenseVector) -> (f64, DenseVector) {
    let (s, m, sum) = lse_shifted(a, b, x);
    let w: DenseVector = s.iter().map(|&v| (v - m).exp() / sum).collect();
    let grad = matvec_t(a, &w).expect("lse: dims").axpy(gamma, x);
    (m + sum.ln() + 0.5 * gamma * x.norm_sq(), grad)
}

fn shifted_diag(c: &DenseMatrix, y: &DenseVector) -> DenseMatrix {
    let mut x = c.clone();
    for i in 0..y.len() {
        x[(i, i)] += y[i];
    }
    x
}

fn smoothed_max(eigs: &DenseVector, epsilon: f64) -> (f64, DenseVector) {
    let lmax = eigs[0];
    let e: DenseVector = eigs.iter().map(|&l| ((l - lmax) / epsilon).exp()).collect();
    let sum = e.sum();
    (lmax + epsilon * sum.ln(), e.scaled(1.0 / sum))
}

pub fn maxcut_value(c: &DenseMatrix, epsilon: f64, eta: f64, y: &DenseVector) -> Result<f64, NumError> {
    let eigs = jacobi_eigenvalues(&shifted_diag(c, y))?;
    let (f_eps, _) = smoothed_max(&eigs, epsilon);
    Ok(f_eps - y.sum() + eta * y.norm_sq())
}

/// `ε log Σ exp(λ_i(C + diag y)/ε) − ⟨1, y⟩ + η‖y‖²` and its gradient
/// `diag(Q diag(w) Qᵀ) − 1 + 2ηy` with `w = softmax(λ/ε)`.
pub fn maxcut_value_grad(
    c: &DenseMatrix,
    epsilon: f64,
    eta: f64,
    y: &DenseVector,
) -> Result<(f64, DenseVector), NumError> {
    let (f_eps, diag) = maxcut_smooth_part(c, epsilon, y)?;
    let grad: DenseVector = diag.iter().zip(y.iter()).map(|(&d, &yj)| d - 1.0 + 2.0 * eta * yj).collect();
    Ok((f_eps - y.sum() + eta * y.norm_sq(), grad))
}

/// `f_ε(C + diag y)` and the diagonal of its matrix gradient.
pub fn maxcut_smooth_part(c: &DenseMatrix, epsilon: f64, y: &DenseVector) -> Result<(f64, DenseVector), NumError> {
    let eig = jacobi_eig(&shifted_diag(c, y))?;
    let (f_eps, w) = smoothed_max(&eig.eigenvalues, epsilon);
    let n = y.len();
    let q = &eig.vectors;
    let diag = (0..n)
        .map(|j| (0..n).map(|i| w[i] * q[(j, i)] * q[(j, i)]).sum())
        .collect();
    Ok((f_eps, diag))
}

pub fn least_squares_value(a: &DenseMatrix, b: &DenseVector, x: &DenseVector) -> f64 {
    matvec(a, x).expect("least squares: dims").sub(b).norm_sq()
}

/// `‖Ax − b‖²` and `2Aᵀ(Ax − b)`.
pub fn least_squares_value_grad(a: &DenseMatrix, b: &DenseVector, x: &DenseVector) -> (f64, DenseVector) {
    let r = matvec(a, x).expect("least squares: dims").sub(b);
    let grad = matvec_t(a, &r).expect("least squares: dims").scaled(2.0);
    (r.norm_sq(), grad)
}

/// `½xᵀHx + gᵀx + (M/6)‖x‖³` and `Hx + g + (M/2)‖x‖x`.
pub fn cubic_value_grad(h: &DenseMatrix, g: &DenseVector, m: f64, x: &DenseVector) -> (f64, DenseVector) {
    let (q, qg) = quadratic_value_grad(h, g, x);
    let nx = x.norm();
    (q + m / 6.0 * nx * nx * nx, qg.axpy(0.5 * m * nx, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_at_origin() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![-0.5, 0.3], vec![0.2, 0.2]]).unwrap();
        let b: DenseVector = [1.0, -0.4, 2.0].into();
        let (f, g) = logistic_value_grad(&a, &b, 0.0, &DenseVector::zeros(2));
        assert!((f - 2f64.ln()).abs() < 1e-15);
        // −(1/2N) Σ b_i a_i
        let expect = matvec_t(&a, &b).unwrap().scaled(-1.0 / 6.0);
        assert!(g.sub(&expect).norm_inf() < 1e-15);
    }

    #[test]
    fn logistic_is_finite_for_huge_margins() {
        let a = DenseMatrix::from_rows(&[vec![1.0], vec![-1.0]]).unwrap();
        let b: DenseVector = [1.0, 1.0].into();
        let (f, g) = logistic_value_grad(&a, &b, 0.0, &[800.0].into());
        assert!(f.is_finite() && g.is_finite());
        assert!((f - 400.0).abs() < 1e-9);
    }

    #[test]
    fn quadratic_examples() {
        let b: DenseVector = [1.0, -2.0].into();
        let (f, g) = quadratic_value_grad(&DenseMatrix::identity(2), &b, &DenseVector::zeros(2));
        assert_eq!((f, g), (0.0, b));
        let x: DenseVector = [3.0, 4.0].into();
        let (f, g) = quadratic_value_grad(&DenseMatrix::identity(2), &DenseVector::zeros(2), &x);
        assert_eq!(f, 12.5);
        assert_eq!(g, x);
    }

    #[test]
    fn lse_examples() {
        let a = DenseMatrix::from_rows(&[vec![2.0, -1.0]]).unwrap();
        let x: DenseVector = [0.3, 0.7].into();
        let (f, g) = lse_value_grad(&a, &[0.5].into(), 0.0, &x);
        assert!((f - (0.6 - 0.7 - 0.5)).abs() < 1e-15);
        assert_eq!(g.as_slice(), &[2.0, -1.0]);

        let a = DenseMatrix::zeros(3, 2);
        let b: DenseVector = [0.1, 1.0, -2.0].into();
        let (f, g) = lse_value_grad(&a, &b, 0.0, &x);
        let expect = b.iter().map(|v| (-v).exp()).sum::<f64>().ln();
        assert!((f - expect).abs() < 1e-14);
        assert_eq!(g, DenseVector::zeros(2));
    }

    #[test]
    fn maxcut_symmetric_example() {
        let eps = 0.3;
        let (f, g) = maxcut_value_grad(&DenseMatrix::zeros(2, 2), eps, 0.7, &DenseVector::zeros(2)).unwrap();
        assert!((f - eps * 2f64.ln()).abs() < 1e-15);
        assert!((g[0] + 0.5).abs() < 1e-15 && (g[1] + 0.5).abs() < 1e-15);
        let v = maxcut_value(&DenseMatrix::zeros(2, 2), eps, 0.7, &DenseVector::zeros(2)).unwrap();
        assert_eq!(v, f);
    }

    #[test]
    fn least_squares_examples() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        let x: DenseVector = [1.0, 1.0].into();
        let b = matvec(&a, &x).unwrap();
        let (f, g) = least_squares_value_grad(&a, &b, &x);
        assert_eq!(f, 0.0);
        assert_eq!(g, DenseVector::zeros(2));
        let (f, g) = least_squares_value_grad(&DenseMatrix::identity(2), &DenseVector::zeros(2), &[3.0, -1.0].into());
        assert_eq!(f, 10.0);
        assert_eq!(g.as_slice(), &[6.0, -2.0]);
    }

    #[test]
    fn cubic_examples() {
        let h = DenseMatrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let g: DenseVector = [0.3, -0.1].into();
        let (f, gr) = cubic_value_grad(&h, &g, 5.0, &DenseVector::zeros(2));
        assert_eq!(f, 0.0);
        assert_eq!(gr, g);
        let m = 5.0;
        let (f, gr) = cubic_value_grad(&DenseMatrix::zeros(2, 2), &DenseVector::zeros(2), m, &[2.0, 0.0].into());
        assert!((f - m / 6.0 * 8.0).abs() < 1e-14);
        assert!((gr[0] - 2.0 * m).abs() < 1e-14 && gr[1] == 0.0);
    }
}
