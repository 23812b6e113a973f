//! Deterministic randomness and the dense linear-algebra primitives used by
//! the rest of the crate.
//!
//! Every stochastic routine takes a [`Seed`]. A seed is expanded into a
//! ChaCha8 stream, and independent sub-streams are obtained with
//! [`Seed::derive`], so replicate `r` of an experiment draws from
//! `base.derive(r)` no matter which worker thread runs it.

use std::ops::{Deref, DerefMut};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Root of a deterministic random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed(pub u64);

impl Seed {
    pub fn new(value: u64) -> Self {
        Seed(value)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    /// Child seed number `index`. Children of distinct indices (and of
    /// distinct parents) are decorrelated by a SplitMix64 finalizer.
    pub fn derive(self, index: u64) -> Seed {
        let mixed = splitmix64(self.0 ^ splitmix64(index.wrapping_add(0x6A09_E667_F3BC_C909)));
        Seed(mixed)
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Dense vector of finite `f64` values.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Vector(Vec<f64>);

impl Vector {
    /// Wraps `data`, rejecting non-finite entries.
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("vector"));
        }
        Ok(Vector(data))
    }

    pub fn zeros(len: usize) -> Self {
        Vector(vec![0.0; len])
    }

    /// Standard basis vector `e_index` of length `len`.
    pub fn basis(len: usize, index: usize) -> Self {
        let mut v = vec![0.0; len];
        v[index] = 1.0;
        Vector(v)
    }

    pub(crate) fn from_vec_unchecked(data: Vec<f64>) -> Self {
        debug_assert!(data.iter().all(|v| v.is_finite()));
        Vector(data)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }

    pub fn norm(&self) -> f64 {
        self.dot(&self.0).sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sub(&self, other: &[f64]) -> Vector {
        assert_eq!(self.len(), other.len());
        Vector(self.0.iter().zip(other).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &[f64]) -> Vector {
        assert_eq!(self.len(), other.len());
        Vector(self.0.iter().zip(other).map(|(a, b)| a + b).collect())
    }

    pub fn scaled(&self, factor: f64) -> Vector {
        Vector(self.0.iter().map(|v| v * factor).collect())
    }

    /// Indices of nonzero entries, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Vector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl AsRef<[f64]> for Vector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense row-major matrix of finite `f64` values.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix whose columns are `columns` (all of equal length).
    pub fn from_columns(columns: &[impl AsRef<[f64]>]) -> Result<Self> {
        let cols = columns.len();
        if cols == 0 {
            return Err(Error::EmptyInput("no columns"));
        }
        let rows = columns[0].as_ref().len();
        if columns.iter().any(|c| c.as_ref().len() != rows) {
            return Err(Error::DimensionMismatch("ragged columns".into()));
        }
        let m = Matrix::from_fn(rows, cols, |i, j| columns[j].as_ref()[i]);
        Matrix::new(rows, cols, m.data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vector {
        Vector((0..self.rows).map(|i| self.get(i, j)).collect())
    }

    /// All columns, each as a contiguous vector.
    pub fn columns(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::with_capacity(self.rows); self.cols];
        for i in 0..self.rows {
            for (j, v) in self.row(i).iter().enumerate() {
                out[j].push(*v);
            }
        }
        out
    }

    pub fn column_norms_sq(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (acc, v) in out.iter_mut().zip(self.row(i)) {
                *acc += v * v;
            }
        }
        out
    }

    pub fn scale_column(&mut self, j: usize, factor: f64) {
        for i in 0..self.rows {
            self.data[i * self.cols + j] *= factor;
        }
    }

    /// `A v`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vector> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "matvec: {} columns vs vector of length {}",
                self.cols,
                v.len()
            )));
        }
        Ok(Vector(
            (0..self.rows).map(|i| dot(self.row(i), v)).collect(),
        ))
    }

    /// `A^T v`.
    pub fn tr_matvec(&self, v: &[f64]) -> Result<Vector> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "tr_matvec: {} rows vs vector of length {}",
                self.rows,
                v.len()
            )));
        }
        let mut out = vec![0.0; self.cols];
        for (i, vi) in v.iter().enumerate() {
            if *vi == 0.0 {
                continue;
            }
            for (acc, a) in out.iter_mut().zip(self.row(i)) {
                *acc += a * vi;
            }
        }
        Ok(Vector(out))
    }

    /// Inner product of column `j` with `v`.
    pub fn column_dot(&self, j: usize, v: &[f64]) -> Result<f64> {
        if j >= self.cols {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.cols,
            });
        }
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "column_dot: {} rows vs vector of length {}",
                self.rows,
                v.len()
            )));
        }
        Ok((0..self.rows).map(|i| self.get(i, j) * v[i]).sum())
    }

    /// Sub-matrix made of the listed columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        Matrix::from_fn(self.rows, cols.len(), |i, k| self.get(i, cols[k]))
    }
}

/// `len` independent standard-normal deviates from the stream of `seed`.
///
/// Deviates come from the ziggurat sampler of `rand_distr` applied to the
/// ChaCha8 stream, so a shorter request is always a prefix of a longer one.
pub fn normal_vector(seed: Seed, len: usize) -> Result<Vector> {
    if len == 0 {
        return Err(Error::EmptyInput("normal_vector length"));
    }
    let mut rng = seed.rng();
    Ok(Vector(fill_normal(&mut rng, len)))
}

pub(crate) fn fill_normal(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn matvec(a: &Matrix, v: &Vector) -> Result<Vector> {
    a.matvec(v)
}

pub fn column_dot(a: &Matrix, j: usize, v: &Vector) -> Result<f64> {
    a.column_dot(j, v)
}

/// In-place Cholesky factor of a symmetric positive definite matrix stored
/// as a dense lower triangle, grown one row at a time.
#[derive(Debug, Clone, Default)]
pub(crate) struct Cholesky {
    dim: usize,
    // row-major lower triangle, row i has i+1 entries
    rows: Vec<Vec<f64>>,
}

impl Cholesky {
    pub fn new() -> Self {
        Cholesky::default()
    }

    /// Solves `L y = b`.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for i in 0..self.dim {
            let row = &self.rows[i];
            let s: f64 = (0..i).map(|k| row[k] * y[k]).sum();
            y[i] = (b[i] - s) / row[i];
        }
        y
    }

    /// Solves `L^T x = y`.
    pub fn backward(&self, y: &[f64]) -> Vec<f64> {
        let mut x = y.to_vec();
        for i in (0..self.dim).rev() {
            x[i] /= self.rows[i][i];
            let xi = x[i];
            for k in 0..i {
                x[k] -= self.rows[i][k] * xi;
            }
        }
        x
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.backward(&self.forward(b))
    }

    /// Appends a row for a new variable with cross products `cross` against
    /// the current variables and squared norm `diag`. Returns `false`
    /// (leaving the factor untouched) when the new variable is numerically
    /// dependent: its residual pivot is at most `rel_tol * diag`.
    pub fn try_push(&mut self, cross: &[f64], diag: f64, rel_tol: f64) -> bool {
        let y = self.forward(cross);
        let pivot = diag - dot(&y, &y);
        if !(pivot > rel_tol * diag) {
            return false;
        }
        let mut row = y;
        row.push(pivot.sqrt());
        self.rows.push(row);
        self.dim += 1;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_matvec(a: &Matrix, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; a.rows()];
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                out[i] += a.get(i, j) * v[j];
            }
        }
        out
    }

    fn random_matrix(seed: Seed, rows: usize, cols: usize) -> Matrix {
        let v = normal_vector(seed, rows * cols).unwrap();
        Matrix::new(rows, cols, v.into_inner()).unwrap()
    }

    #[test]
    fn normal_moments() {
        let v = normal_vector(Seed(11), 1_000_000).unwrap();
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() <= 0.01, "mean {mean}");
        assert!((0.99..=1.01).contains(&var), "var {var}");
    }

    #[test]
    fn normal_is_deterministic_and_prefix_stable() {
        let a = normal_vector(Seed(3), 50).unwrap();
        let b = normal_vector(Seed(3), 50).unwrap();
        assert_eq!(a, b);
        let one = normal_vector(Seed(3), 1).unwrap();
        let two = normal_vector(Seed(3), 2).unwrap();
        assert_eq!(one[0].to_bits(), two[0].to_bits());
        assert!(normal_vector(Seed(3), 0).is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        let base = Seed(5);
        assert_ne!(base.derive(0), base.derive(1));
        assert_ne!(base.derive(0), Seed(6).derive(0));
        assert_eq!(base.derive(7), base.derive(7));
    }

    #[test]
    fn matvec_examples() {
        let id = Matrix::identity(3);
        let v = Vector::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(matvec(&id, &v).unwrap(), v);
        let z = Matrix::zeros(3, 3);
        assert_eq!(matvec(&z, &v).unwrap(), Vector::zeros(3));
        assert!(matvec(&Matrix::zeros(2, 2), &v).is_err());

        let a = random_matrix(Seed(1), 5, 4);
        let x = normal_vector(Seed(2), 4).unwrap();
        let fast = matvec(&a, &x).unwrap();
        let slow = naive_matvec(&a, &x);
        for (f, s) in fast.iter().zip(&slow) {
            assert!((f - s).abs() <= 1e-12);
        }
    }

    #[test]
    fn matvec_distributes() {
        let a = random_matrix(Seed(9), 50, 50);
        let u = normal_vector(Seed(10), 50).unwrap();
        let v = normal_vector(Seed(12), 50).unwrap();
        let lhs = a.matvec(&u.add(&v)).unwrap();
        let rhs = a.matvec(&u).unwrap().add(&a.matvec(&v).unwrap());
        for (l, r) in lhs.iter().zip(rhs.iter()) {
            assert!((l - r).abs() <= 1e-10);
        }
    }

    #[test]
    fn column_dot_examples() {
        let mut a = random_matrix(Seed(4), 6, 3);
        for i in 0..6 {
            a.set(i, 1, 0.0);
        }
        let v = normal_vector(Seed(5), 6).unwrap();
        assert_eq!(column_dot(&a, 1, &v).unwrap(), 0.0);
        let id = Matrix::identity(6);
        assert_eq!(column_dot(&id, 4, &v).unwrap(), v[4]);
        let naive: f64 = (0..6).map(|i| a.get(i, 2) * v[i]).sum();
        assert!((column_dot(&a, 2, &v).unwrap() - naive).abs() <= 1e-12);
        assert!(matches!(
            column_dot(&a, 3, &v),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn tr_matvec_matches_column_dots() {
        let a = random_matrix(Seed(8), 7, 5);
        let v = normal_vector(Seed(9), 7).unwrap();
        let t = a.tr_matvec(&v).unwrap();
        for j in 0..5 {
            assert!((t[j] - a.column_dot(j, &v).unwrap()).abs() <= 1e-12);
        }
    }

    #[test]
    fn rejects_non_finite() {
        assert!(Vector::new(vec![1.0, f64::NAN]).is_err());
        assert!(Matrix::new(1, 2, vec![1.0, f64::INFINITY]).is_err());
        assert!(Matrix::new(2, 2, vec![1.0]).is_err());
    }

    #[test]
    fn cholesky_grows_and_detects_dependence() {
        let mut ch = Cholesky::new();
        assert!(ch.try_push(&[], 4.0, 1e-12));
        assert!(ch.try_push(&[2.0], 5.0, 1e-12));
        // third variable equal to the first: dependent
        assert!(!ch.try_push(&[4.0, 2.0], 4.0, 1e-10));
        let x = ch.solve(&[6.0, 7.0]);
        // [[4,2],[2,5]] x = [6,7]
        assert!((4.0 * x[0] + 2.0 * x[1] - 6.0).abs() < 1e-12);
        assert!((2.0 * x[0] + 5.0 * x[1] - 7.0).abs() < 1e-12);
    }
}
