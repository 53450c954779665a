//! Small dense linear-algebra kit.
//!
//! Row-major matrices, plain vectors, a power-iteration spectral norm, a
//! cyclic Jacobi eigensolver and a conjugate-gradient solve. Nothing here is
//! tuned for speed; problem sizes stay in the low hundreds.

use std::ops::{Index, IndexMut};

use rand_core::RngCore;
use rand_xoshiro::rand_core::SeedableRng;
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

use crate::error::NumError;

/// Off-diagonal Frobenius mass at which Jacobi sweeps stop, relative to `‖S‖_F`.
pub const JACOBI_OFF_TOL: f64 = 1e-12;
/// Hard cap on Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Change in the Rayleigh quotient below which power iteration counts as stalled.
pub const POWER_STALL_TOL: f64 = 1e-16;
/// Seed of the single random restart used when the all-ones start vector is degenerate.
pub const POWER_RESTART_SEED: u64 = 0x05ee_d0f9_03e7;

/// Dense column vector of `f64`.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct DenseVector {
    data: Vec<f64>,
}

impl DenseVector {
    pub fn zeros(len: usize) -> Self {
        Self { data: vec![0.0; len] }
    }

    pub fn from_elem(len: usize, v: f64) -> Self {
        Self { data: vec![v; len] }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.data.iter()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn norm_l1(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &DenseVector) -> Self {
        assert_eq!(self.len(), other.len(), "axpy: length mismatch");
        Self {
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + s * b).collect(),
        }
    }

    /// `a * self + b * other`.
    pub fn lincomb(&self, a: f64, other: &DenseVector, b: f64) -> Self {
        assert_eq!(self.len(), other.len(), "lincomb: length mismatch");
        Self {
            data: self.data.iter().zip(&other.data).map(|(x, y)| a * x + b * y).collect(),
        }
    }

    pub fn sub(&self, other: &DenseVector) -> Self {
        self.axpy(-1.0, other)
    }

    pub fn add(&self, other: &DenseVector) -> Self {
        self.axpy(1.0, other)
    }

    pub fn dist(&self, other: &DenseVector) -> f64 {
        self.sub(other).norm()
    }
}

impl From<Vec<f64>> for DenseVector {
    fn from(data: Vec<f64>) -> Self {
        Self { data }
    }
}

impl From<&[f64]> for DenseVector {
    fn from(data: &[f64]) -> Self {
        Self { data: data.to_vec() }
    }
}

impl<const N: usize> From<[f64; N]> for DenseVector {
    fn from(data: [f64; N]) -> Self {
        Self { data: data.to_vec() }
    }
}

impl FromIterator<f64> for DenseVector {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        Self { data: iter.into_iter().collect() }
    }
}

impl Index<usize> for DenseVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl IndexMut<usize> for DenseVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[i]
    }
}

/// Dense row-major matrix of `f64`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, NumError> {
        if data.len() != rows * cols {
            return Err(NumError::DimensionMismatch {
                op: "from_row_major",
                left: rows * cols,
                right: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, NumError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(NumError::DimensionMismatch { op: "from_rows", left: c, right: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { rows: r, cols: c, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> DenseVector {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `(S + Sᵀ) / 2`; panics on non-square input.
    pub fn symmetrized(&self) -> Self {
        assert!(self.is_square(), "symmetrized: matrix is not square");
        let n = self.rows;
        let mut s = self.clone();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        s
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                m = m.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        m
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<Self, NumError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(NumError::DimensionMismatch {
                op: "sub",
                left: self.data.len(),
                right: other.data.len(),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<Self, NumError> {
        if self.cols != other.rows {
            return Err(NumError::DimensionMismatch { op: "matmul", left: self.cols, right: other.rows });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ * self`.
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let mut g = Self::zeros(n, n);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                let a = row[i];
                if a == 0.0 {
                    continue;
                }
                for j in i..n {
                    g.data[i * n + j] += a * row[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                g.data[i * n + j] = g.data[j * n + i];
            }
        }
        g
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Inner product.
pub fn dot(a: &DenseVector, b: &DenseVector) -> Result<f64, NumError> {
    if a.len() != b.len() {
        return Err(NumError::DimensionMismatch { op: "dot", left: a.len(), right: b.len() });
    }
    Ok(dot_unchecked(a.as_slice(), b.as_slice()))
}

pub(crate) fn dot_unchecked(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `M v`.
pub fn matvec(m: &DenseMatrix, v: &DenseVector) -> Result<DenseVector, NumError> {
    if m.cols() != v.len() {
        return Err(NumError::DimensionMismatch { op: "matvec", left: m.cols(), right: v.len() });
    }
    Ok((0..m.rows()).map(|i| dot_unchecked(m.row(i), v.as_slice())).collect())
}

/// `Mᵀ v`.
pub fn matvec_t(m: &DenseMatrix, v: &DenseVector) -> Result<DenseVector, NumError> {
    if m.rows() != v.len() {
        return Err(NumError::DimensionMismatch { op: "matvec_t", left: m.rows(), right: v.len() });
    }
    let mut out = vec![0.0; m.cols()];
    for (i, &vi) in v.iter().enumerate() {
        if vi == 0.0 {
            continue;
        }
        for (o, &a) in out.iter_mut().zip(m.row(i)) {
            *o += a * vi;
        }
    }
    Ok(out.into())
}

/// Result of a power iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralEstimate {
    /// Largest singular value of `M`.
    pub value: f64,
    /// Largest eigenvalue of `MᵀM`, i.e. `value²` without the rounding of a square root.
    pub value_sq: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Largest singular value of `M` by power iteration on `MᵀM`.
///
/// Starts from the normalized all-ones vector. Stops once the eigen-residual
/// `‖MᵀMv − ρv‖` falls below `tol·ρ`. If the start vector lies in the null
/// space of `MᵀM`, a single restart from a fixed-seed random vector is made.
pub fn spectral_norm(m: &DenseMatrix, tol: f64, max_iter: usize) -> Result<SpectralEstimate, NumError> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(NumError::Empty("spectral_norm"));
    }
    let n = m.cols();
    let start = DenseVector::from_elem(n, 1.0 / (n as f64).sqrt());
    let est = power_iterate(m, start, tol, max_iter)?;
    if est.value_sq > 0.0 || m.max_abs() == 0.0 {
        return Ok(est);
    }
    // all-ones start was annihilated; try once more from a seeded random vector
    let mut rng = Xoshiro256StarStar::seed_from_u64(POWER_RESTART_SEED);
    let mut v: DenseVector = (0..n).map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5).collect();
    let nv = v.norm();
    v = v.scaled(1.0 / nv);
    power_iterate(m, v, tol, max_iter)
}

fn power_iterate(
    m: &DenseMatrix,
    mut v: DenseVector,
    tol: f64,
    max_iter: usize,
) -> Result<SpectralEstimate, NumError> {
    let apply = |v: &DenseVector| -> Result<DenseVector, NumError> { matvec_t(m, &matvec(m, v)?) };
    let mut rho = 0.0;
    let mut w = apply(&v)?;
    for it in 1..=max_iter.max(1) {
        let new_rho = dot_unchecked(v.as_slice(), w.as_slice());
        let resid = w.axpy(-new_rho, &v).norm();
        let stalled = (new_rho - rho).abs() < POWER_STALL_TOL * new_rho.abs().max(f64::MIN_POSITIVE);
        rho = new_rho;
        let wn = w.norm();
        if wn == 0.0 {
            return Ok(SpectralEstimate { value: 0.0, value_sq: 0.0, iterations: it, converged: true });
        }
        if resid <= tol * rho || (stalled && it > 1) {
            return Ok(SpectralEstimate { value: rho.sqrt(), value_sq: rho, iterations: it, converged: true });
        }
        v = w.scaled(1.0 / wn);
        w = apply(&v)?;
    }
    Ok(SpectralEstimate { value: rho.max(0.0).sqrt(), value_sq: rho, iterations: max_iter, converged: false })
}

/// Spectral norm with the crate's fixed tolerance; used for smoothness constants.
pub fn spectral_norm_default(m: &DenseMatrix) -> f64 {
    spectral_norm(m, 1e-12, 100_000).map(|e| e.value).unwrap_or(0.0)
}

/// Symmetric eigendecomposition `S = Q diag(λ) Qᵀ`.
#[derive(Clone, Debug)]
pub struct EigDecomposition {
    /// Sorted in descending order.
    pub eigenvalues: DenseVector,
    /// Column `i` is the unit eigenvector for `eigenvalues[i]`.
    pub vectors: DenseMatrix,
    pub sweeps: usize,
}

impl EigDecomposition {
    pub fn reconstruct(&self) -> DenseMatrix {
        let n = self.eigenvalues.len();
        let mut out = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = (0..n)
                    .map(|k| self.vectors[(i, k)] * self.eigenvalues[k] * self.vectors[(j, k)])
                    .sum();
            }
        }
        out
    }
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
///
/// The input is symmetrized first. Sweeps run until the off-diagonal
/// Frobenius mass is at most `JACOBI_OFF_TOL · ‖S‖_F`.
pub fn jacobi_eig(s: &DenseMatrix) -> Result<EigDecomposition, NumError> {
    jacobi_impl(s, true)
}

/// Eigenvalues only (descending). Same rotations as [`jacobi_eig`] without
/// accumulating `Q`.
pub fn jacobi_eigenvalues(s: &DenseMatrix) -> Result<DenseVector, NumError> {
    jacobi_impl(s, false).map(|e| e.eigenvalues)
}

fn jacobi_impl(s: &DenseMatrix, want_vectors: bool) -> Result<EigDecomposition, NumError> {
    if !s.is_square() {
        return Err(NumError::NotSquare { rows: s.rows(), cols: s.cols() });
    }
    let n = s.rows();
    let sym = s.symmetrized();
    let target = JACOBI_OFF_TOL * sym.frobenius();
    let mut a = sym.data;
    // rows of qt are the eigenvector columns, so rotations touch contiguous memory
    let mut qt = if want_vectors { DenseMatrix::identity(n).data } else { Vec::new() };

    let off = |a: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            for &v in &a[i * n + i + 1..(i + 1) * n] {
                acc += 2.0 * v * v;
            }
        }
        acc.sqrt()
    };

    let mut sweeps = 0;
    while sweeps < JACOBI_MAX_SWEEPS && off(&a) > target {
        sweeps += 1;
        for p in 0..n {
            for r in (p + 1)..n {
                let apr = a[p * n + r];
                if apr == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let arr = a[r * n + r];
                // rotation angle that zeroes a[p][r]
                let theta = (arr - app) / (2.0 * apr);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;

                rotate_rows(&mut a, n, p, r, c, sn);
                // mirror the two updated rows into the matching columns
                for k in 0..n {
                    a[k * n + p] = a[p * n + k];
                    a[k * n + r] = a[r * n + k];
                }
                a[p * n + p] = app - t * apr;
                a[r * n + r] = arr + t * apr;
                a[p * n + r] = 0.0;
                a[r * n + p] = 0.0;
                if want_vectors {
                    rotate_rows(&mut qt, n, p, r, c, sn);
                }
            }
        }
    }
    if off(&a) > target && sweeps >= JACOBI_MAX_SWEEPS {
        return Err(NumError::NoConvergence { op: "jacobi_eig", iterations: sweeps });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let eigenvalues: DenseVector = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = if want_vectors {
        let mut v = DenseMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            for k in 0..n {
                v[(k, dst)] = qt[src * n + k];
            }
        }
        v
    } else {
        DenseMatrix::zeros(0, 0)
    };
    Ok(EigDecomposition { eigenvalues, vectors, sweeps })
}

/// `row_p ← c·row_p − s·row_r`, `row_r ← s·row_p + c·row_r` for `p < r`.
fn rotate_rows(m: &mut [f64], n: usize, p: usize, r: usize, c: f64, sn: f64) {
    let (head, tail) = m.split_at_mut(r * n);
    let rp = &mut head[p * n..(p + 1) * n];
    let rr = &mut tail[..n];
    for (x, y) in rp.iter_mut().zip(rr.iter_mut()) {
        let (xp, yr) = (*x, *y);
        *x = c * xp - sn * yr;
        *y = sn * xp + c * yr;
    }
}

/// Solves `B x = rhs` for symmetric positive (semi)definite `B` by conjugate
/// gradients. Returns the iterate and the final residual norm.
pub fn cg_solve(
    b: &DenseMatrix,
    rhs: &DenseVector,
    tol: f64,
    max_iter: usize,
) -> Result<(DenseVector, f64), NumError> {
    if !b.is_square() {
        return Err(NumError::NotSquare { rows: b.rows(), cols: b.cols() });
    }
    let mut x = DenseVector::zeros(rhs.len());
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut rs = r.norm_sq();
    for it in 0..max_iter {
        if rs.sqrt() <= tol {
            break;
        }
        let bp = matvec(b, &p)?;
        let pbp = dot_unchecked(p.as_slice(), bp.as_slice());
        if pbp <= 0.0 {
            break;
        }
        let alpha = rs / pbp;
        x = x.axpy(alpha, &p);
        // recompute the true residual now and then to stop drift
        r = if it % 50 == 49 { rhs.sub(&matvec(b, &x)?) } else { r.axpy(-alpha, &bp) };
        let rs_new = r.norm_sq();
        p = r.axpy(rs_new / rs, &p);
        rs = rs_new;
    }
    let resid = rhs.sub(&matvec(b, &x)?).norm();
    Ok((x, resid))
}
