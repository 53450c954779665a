//! Seeded random streams and the benchmark data recipes.
//!
//! Every stream is xoshiro256** seeded through SplitMix64 (the
//! `seed_from_u64` expansion of `rand_xoshiro`). Uniform deviates take the
//! top 53 bits of a 64-bit draw; Gaussians use the cosine branch of
//! Box–Muller and always consume exactly two uniforms.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use crate::numkit::{matvec, spectral_norm, DenseMatrix, DenseVector};

/// Standard deviation of the additive noise in regression targets.
pub const NOISE_SD: f64 = 0.05;
/// Correlation factor between adjacent design-matrix columns.
pub const COLUMN_CORRELATION: f64 = 0.5;

/// Uniform draws consumed by one call to [`RngState::next_gaussian`].
pub const UNIFORMS_PER_GAUSSIAN: usize = 2;

const TWO_POW_MINUS_53: f64 = 1.0 / (1u64 << 53) as f64;

/// Single-owner pseudo-random stream.
#[derive(Clone, Debug)]
pub struct RngState {
    seed: u64,
    inner: Xoshiro256StarStar,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self { seed, inner: Xoshiro256StarStar::seed_from_u64(seed) }
    }

    /// Independent stream for job `job` of a run seeded with `master`: the
    /// master stream advanced by `job + 1` xoshiro jumps (2¹²⁸ draws each).
    pub fn for_job(master: u64, job: u64) -> Self {
        let mut inner = Xoshiro256StarStar::seed_from_u64(master);
        for _ in 0..=job {
            inner.jump();
        }
        Self { seed: master, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform deviate in `[0, 1)`.
    pub fn next_uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * TWO_POW_MINUS_53
    }

    /// Standard normal deviate.
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = self.next_uniform();
        let u2 = self.next_uniform();
        // 1 - u1 lies in (0, 1], so the log is finite
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn gaussian_vector(&mut self, len: usize) -> DenseVector {
        (0..len).map(|_| self.next_gaussian()).collect()
    }

    pub fn uniform_vector(&mut self, len: usize) -> DenseVector {
        (0..len).map(|_| self.next_uniform()).collect()
    }

    pub fn gaussian_matrix(&mut self, rows: usize, cols: usize) -> DenseMatrix {
        let data = (0..rows * cols).map(|_| self.next_gaussian()).collect();
        DenseMatrix::from_row_major(rows, cols, data).expect("sizes agree")
    }
}

/// `samples × dim` design matrix with correlated columns: column 0 is i.i.d.
/// N(0,1) and column `j+1 = 0.5·column j + fresh N(0,1)`.
///
/// Entries are drawn column by column.
pub fn gen_correlated_matrix(rng: &mut RngState, dim: usize, samples: usize) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(samples, dim);
    for j in 0..dim {
        for i in 0..samples {
            let fresh = rng.next_gaussian();
            a[(i, j)] = if j == 0 { fresh } else { COLUMN_CORRELATION * a[(i, j - 1)] + fresh };
        }
    }
    a
}

/// Planted solution and targets `b = A x♮ + noise_sd · N(0, 1)`.
pub fn gen_regression_target(rng: &mut RngState, a: &DenseMatrix, noise_sd: f64) -> (DenseVector, DenseVector) {
    let x_nat = rng.gaussian_vector(a.cols());
    let clean = matvec(a, &x_nat).expect("x♮ sized to A");
    let b = clean.iter().map(|&v| v + noise_sd * rng.next_gaussian()).collect();
    (x_nat, b)
}

/// `GᵀG / ‖G‖₂²` for a standard Gaussian `n × n` matrix `G`.
pub fn gen_wishart_normalized(rng: &mut RngState, n: usize) -> DenseMatrix {
    let g = rng.gaussian_matrix(n, n);
    let est = spectral_norm(&g, 1e-13, 200_000).expect("non-empty");
    g.gram().scaled(1.0 / est.value_sq)
}

/// `scale · U(0,1)` entries, the design used by the composite benchmarks.
pub fn gen_uniform_matrix(rng: &mut RngState, rows: usize, cols: usize, scale: f64) -> DenseMatrix {
    let data = (0..rows * cols).map(|_| scale * rng.next_uniform()).collect();
    DenseMatrix::from_row_major(rows, cols, data).expect("sizes agree")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::jacobi_eig;

    #[test]
    fn golden_uniform_stream() {
        let mut rng = RngState::new(42);
        let draws: Vec<f64> = (0..3).map(|_| rng.next_uniform()).collect();
        assert_eq!(draws, GOLDEN_SEED42);
    }

    // captured from the first build, matches a separate SplitMix64 + xoshiro256** implementation
    const GOLDEN_SEED42: [f64; 3] = [0.08386297105988216, 0.3789802506626686, 0.6800434110281394];

    #[test]
    fn uniform_range_and_determinism() {
        for seed in [0u64, 1, 7, u64::MAX] {
            let mut a = RngState::new(seed);
            let mut b = RngState::new(seed);
            for _ in 0..1000 {
                let u = a.next_uniform();
                assert!((0.0..1.0).contains(&u));
                assert_eq!(u.to_bits(), b.next_uniform().to_bits());
            }
        }
    }

    #[test]
    fn gaussian_consumes_two_uniforms() {
        let mut a = RngState::new(3);
        let mut b = RngState::new(3);
        a.next_gaussian();
        for _ in 0..UNIFORMS_PER_GAUSSIAN {
            b.next_uniform();
        }
        assert_eq!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = RngState::new(2024);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| rng.next_gaussian()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.03, "var {var}");
    }

    #[test]
    fn job_streams_differ_and_repeat() {
        let a: Vec<u64> = { let mut r = RngState::for_job(9, 0); (0..4).map(|_| r.next_u64()).collect() };
        let b: Vec<u64> = { let mut r = RngState::for_job(9, 1); (0..4).map(|_| r.next_u64()).collect() };
        let c: Vec<u64> = { let mut r = RngState::for_job(9, 1); (0..4).map(|_| r.next_u64()).collect() };
        assert_ne!(a, b);
        assert_eq!(b, c);
    }

    #[test]
    fn correlated_single_entry_is_plain_gaussian() {
        let mut a = RngState::new(5);
        let mut b = RngState::new(5);
        let m = gen_correlated_matrix(&mut a, 1, 1);
        assert_eq!(m[(0, 0)], b.next_gaussian());
    }

    #[test]
    fn correlated_columns_statistics() {
        let mut rng = RngState::new(77);
        let (d, n) = (200, 200);
        let a = gen_correlated_matrix(&mut rng, d, n);
        let col = |j: usize| a.column(j);
        let corr = |x: &DenseVector, y: &DenseVector| {
            let mx = x.sum() / n as f64;
            let my = y.sum() / n as f64;
            let cov: f64 = x.iter().zip(y.iter()).map(|(p, q)| (p - mx) * (q - my)).sum();
            let vx: f64 = x.iter().map(|p| (p - mx).powi(2)).sum();
            let vy: f64 = y.iter().map(|q| (q - my).powi(2)).sum();
            cov / (vx * vy).sqrt()
        };
        // corr(0.5 g + e, g) = 0.5 / sqrt(1.25) for a stationary column
        let expected = 0.5 / 1.25f64.sqrt();
        let mean_corr: f64 = (1..d).map(|j| corr(&col(j - 1), &col(j))).sum::<f64>() / (d - 1) as f64;
        assert!((mean_corr - expected).abs() < 0.1, "{mean_corr}");
        let last = col(d - 1);
        let var = last.norm_sq() / n as f64;
        assert!(var > 1.0 - 0.15 && var < 4.0 / 3.0 + 0.15, "{var}");
        assert!(a.as_slice().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn regression_target_noise_free_and_zero_design() {
        let mut rng = RngState::new(1);
        let a = gen_correlated_matrix(&mut rng, 4, 6);
        let mut r1 = RngState::new(10);
        let (x, b_clean) = gen_regression_target(&mut r1, &a, 0.0);
        assert_eq!(b_clean, matvec(&a, &x).unwrap());

        let z = DenseMatrix::zeros(200, 3);
        let mut r2 = RngState::new(11);
        let (_, b) = gen_regression_target(&mut r2, &z, NOISE_SD);
        let mean = b.sum() / 200.0;
        // 3 sigma of the sample mean: 3 * 0.05 / sqrt(200)
        assert!(mean.abs() <= 3.0 * NOISE_SD / 200f64.sqrt());

        let again = gen_regression_target(&mut RngState::new(10), &a, 0.0);
        assert_eq!(again, (x, b_clean));
    }

    #[test]
    fn wishart_properties() {
        let mut rng = RngState::new(8);
        let c = gen_wishart_normalized(&mut rng, 1);
        assert_eq!(c[(0, 0)], 1.0);

        let mut rng = RngState::new(8);
        let c = gen_wishart_normalized(&mut rng, 20);
        assert!(c.max_asymmetry() <= 1e-12);
        let e = jacobi_eig(&c).unwrap();
        assert!(e.eigenvalues[19] >= -1e-10);
        let s = spectral_norm(&c, 1e-13, 100_000).unwrap();
        assert!((s.value - 1.0).abs() < 1e-6, "{}", s.value);
    }
}
