//! Dense row-major matrices, finite vectors, column statistics and the
//! seedable random source shared by every model.
//!
//! The random source is ChaCha8 (`rand_chacha`), seeded through
//! `SeedableRng::seed_from_u64`. Bounded indices use the multiply-shift
//! reduction `(next_u64 * n) >> 64` computed in 128 bits, with no rejection
//! step. Both choices are part of the reproducibility contract: changing
//! either invalidates the golden streams in the tests.

use std::ops::Deref;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{ensure, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major values, rejecting non-finite entries.
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        ensure!(
            values.len() == rows * cols,
            "matrix of {rows}x{cols} needs {} values, got {}",
            rows * cols,
            values.len()
        );
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(crate::error::contract(format!(
                "non-finite value at row {}, column {}",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            ensure!(
                r.as_ref().len() == cols,
                "row {i} has {} values, expected {cols}",
                r.as_ref().len()
            );
            values.extend_from_slice(r.as_ref());
        }
        Self::new(rows.len(), cols, values)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.values[i * n + i] = 1.0;
        }
        m
    }

    /// Internal constructor for values produced by finite arithmetic.
    pub(crate) fn from_raw(rows: usize, cols: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), rows * cols);
        Self { rows, cols, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub(crate) fn set(&mut self, row: usize, col: usize, value: f64) {
        self.values[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, col)).collect()
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        // chunks_exact panics on a zero chunk size
        let step = self.cols.max(1);
        self.values
            .chunks_exact(step)
            .take(if self.cols == 0 { 0 } else { self.rows })
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.values[j * self.rows + i] = self.get(i, j);
            }
        }
        out
    }

    /// Copies the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut values = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Matrix::from_raw(indices.len(), self.cols, values)
    }

    /// Contiguous block of rows `start..end`.
    pub fn row_range(&self, start: usize, end: usize) -> Matrix {
        Matrix::from_raw(
            end - start,
            self.cols,
            self.values[start * self.cols..end * self.cols].to_vec(),
        )
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &Matrix) -> Result<Matrix> {
        ensure!(
            self.cols == other.cols,
            "cannot stack {} columns over {} columns",
            self.cols,
            other.cols
        );
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        Ok(Matrix::from_raw(self.rows + other.rows, self.cols, values))
    }

    pub fn scale(&self, factor: f64) -> Matrix {
        Matrix::from_raw(
            self.rows,
            self.cols,
            self.values.iter().map(|v| v * factor).collect(),
        )
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Matrix-vector product `self * v`.
    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        ensure!(
            v.len() == self.cols,
            "vector of length {} cannot multiply {} columns",
            v.len(),
            self.cols
        );
        Ok(self.row_iter().map(|r| dot(r, v)).collect())
    }

    /// Transposed product `self^T * v`.
    pub fn tmul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        ensure!(
            v.len() == self.rows,
            "vector of length {} cannot multiply {} rows",
            v.len(),
            self.rows
        );
        let mut out = vec![0.0; self.cols];
        for (r, &s) in self.row_iter().zip(v) {
            for (o, x) in out.iter_mut().zip(r) {
                *o += x * s;
            }
        }
        Ok(out)
    }
}

/// A finite real vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(crate::error::contract(format!(
                "non-finite value at index {pos}"
            )));
        }
        Ok(Self(values))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    ensure!(
        a.cols == b.rows,
        "cannot multiply {}x{} by {}x{}",
        a.rows,
        a.cols,
        b.rows,
        b.cols
    );
    let mut out = vec![0.0; a.rows * b.cols];
    for i in 0..a.rows {
        let row = &mut out[i * b.cols..(i + 1) * b.cols];
        for k in 0..a.cols {
            let aik = a.get(i, k);
            for (o, bkj) in row.iter_mut().zip(b.row(k)) {
                *o += aik * bkj;
            }
        }
    }
    Ok(Matrix::from_raw(a.rows, b.cols, out))
}

pub fn column_mean(m: &Matrix) -> Result<Vector> {
    ensure!(m.rows >= 1, "column mean of a matrix with no rows");
    let mut sums = vec![0.0; m.cols];
    for r in m.row_iter() {
        for (s, v) in sums.iter_mut().zip(r) {
            *s += v;
        }
    }
    let n = m.rows as f64;
    Ok(Vector(sums.into_iter().map(|s| s / n).collect()))
}

pub fn center_columns(m: &Matrix, means: &[f64]) -> Result<Matrix> {
    ensure!(
        means.len() == m.cols,
        "{} means for {} columns",
        means.len(),
        m.cols
    );
    let mut values = m.values.clone();
    for row in values.chunks_exact_mut(m.cols.max(1)) {
        for (v, mu) in row.iter_mut().zip(means) {
            *v -= mu;
        }
    }
    Ok(Matrix::from_raw(m.rows, m.cols, values))
}

/// Seeded deterministic random source.
#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    draws: u64,
    inner: ChaCha8Rng,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            draws: 0,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream for a parallel task: `base_seed XOR task_index`.
    pub fn derived(base_seed: u64, task_index: u64) -> Self {
        Self::new(base_seed ^ task_index)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of 64-bit words consumed so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        self.inner.next_u64()
    }

    /// Uniform index in `[0, n)` via multiply-shift reduction.
    pub fn uniform_index(&mut self, n: usize) -> Result<usize> {
        ensure!(n >= 1, "cannot draw an index from an empty range");
        Ok(self.index_unchecked(n))
    }

    pub(crate) fn index_unchecked(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Uniform real in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(self)
    }

    /// `k` distinct indices from `0..n`, by partial Fisher-Yates.
    pub fn sample_without_replacement(&mut self, n: usize, k: usize) -> Result<Vec<usize>> {
        ensure!(k <= n, "cannot draw {k} distinct indices from {n}");
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.index_unchecked(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        Ok(pool)
    }
}

impl RngCore for RngState {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        RngState::next_u64(self)
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for chunk in dest.chunks_mut(8) {
            let word = RngState::next_u64(self).to_le_bytes();
            chunk.copy_from_slice(&word[..chunk.len()]);
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand_core::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_product(a: &Matrix, b: &Matrix) -> Vec<f64> {
        let mut out = vec![0.0; a.rows() * b.cols()];
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut s = 0.0;
                for k in 0..a.cols() {
                    s += a.get(i, k) * b.get(k, j);
                }
                out[i * b.cols() + j] = s;
            }
        }
        out
    }

    fn random_matrix(rng: &mut RngState, rows: usize, cols: usize) -> Matrix {
        let values = (0..rows * cols).map(|_| rng.standard_normal()).collect();
        Matrix::new(rows, cols, values).unwrap()
    }

    #[test]
    fn identity_product() {
        let m = Matrix::from_rows(&[[1.5, -2.0], [0.25, 4.0]]).unwrap();
        assert_eq!(mat_mul(&Matrix::identity(2), &m).unwrap(), m);
    }

    #[test]
    fn hand_product() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let b = Matrix::from_rows(&[[1.0], [1.0]]).unwrap();
        assert_eq!(mat_mul(&a, &b).unwrap().values(), &[3.0, 7.0]);
    }

    #[test]
    fn random_product_matches_triple_loop() {
        let mut rng = RngState::new(11);
        let a = random_matrix(&mut rng, 3, 4);
        let b = random_matrix(&mut rng, 4, 2);
        let got = mat_mul(&a, &b).unwrap();
        for (g, e) in got.values().iter().zip(naive_product(&a, &b)) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn product_dimension_mismatch() {
        let a = Matrix::zeros(2, 3);
        assert!(matches!(mat_mul(&a, &a), Err(crate::Error::Contract(_))));
    }

    #[test]
    fn rejects_non_finite() {
        assert!(Matrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(Matrix::new(1, 2, vec![1.0]).is_err());
        assert!(Vector::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn column_means() {
        let m = Matrix::from_rows(&[[1.0], [3.0]]).unwrap();
        assert_eq!(column_mean(&m).unwrap().as_slice(), &[2.0]);

        let c = Matrix::new(3, 2, vec![4.5; 6]).unwrap();
        assert_eq!(column_mean(&c).unwrap().as_slice(), &[4.5, 4.5]);

        let mut rng = RngState::new(5);
        let r = random_matrix(&mut rng, 5, 3);
        let got = column_mean(&r).unwrap();
        for j in 0..3 {
            let mut s = 0.0;
            for i in 0..5 {
                s += r.get(i, j);
            }
            assert!((got[j] - s / 5.0).abs() < 1e-15);
        }

        assert!(column_mean(&Matrix::zeros(0, 3)).is_err());
    }

    #[test]
    fn centering() {
        let mut rng = RngState::new(8);
        let m = random_matrix(&mut rng, 4, 2);
        assert_eq!(center_columns(&m, &[0.0, 0.0]).unwrap(), m);

        let means = [0.3, -1.2];
        let c = center_columns(&m, &means).unwrap();
        for i in 0..4 {
            for (j, mean) in means.iter().enumerate() {
                assert_eq!(c.get(i, j), m.get(i, j) - mean);
            }
        }
        assert!(center_columns(&m, &[1.0]).is_err());
    }

    #[test]
    fn index_draws() {
        let mut rng = RngState::new(3);
        assert!((0..20).all(|_| rng.uniform_index(1).unwrap() == 0));
        assert!(rng.uniform_index(0).is_err());
    }

    #[test]
    fn golden_index_stream() {
        let mut rng = RngState::new(2024);
        let draws: Vec<usize> = (0..10).map(|_| rng.uniform_index(6).unwrap()).collect();
        assert_eq!(draws, GOLDEN_2024_N6);
    }

    // ChaCha8 seeded with 2024, ten multiply-shift draws over 6 values.
    const GOLDEN_2024_N6: [usize; 10] = [1, 5, 4, 5, 4, 2, 0, 1, 2, 5];

    #[test]
    fn index_frequencies_within_three_sigma() {
        let mut rng = RngState::new(99);
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[rng.uniform_index(4).unwrap()] += 1;
        }
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!(
                (c as f64 - n as f64 * 0.25).abs() < 3.0 * sigma,
                "{counts:?}"
            );
        }
    }

    #[test]
    fn distinct_sampling() {
        let mut rng = RngState::new(1);
        let mut s = rng.sample_without_replacement(7, 7).unwrap();
        s.sort_unstable();
        assert_eq!(s, (0..7).collect::<Vec<_>>());
        assert!(rng.sample_without_replacement(2, 3).is_err());
    }

    proptest! {
        #[test]
        fn product_is_associative(seed in any::<u64>(), n in 1usize..5, m in 1usize..5, p in 1usize..5, q in 1usize..5) {
            let mut rng = RngState::new(seed);
            let a = random_matrix(&mut rng, n, m);
            let b = random_matrix(&mut rng, m, p);
            let c = random_matrix(&mut rng, p, q);
            let left = mat_mul(&mat_mul(&a, &b).unwrap(), &c).unwrap();
            let right = mat_mul(&a, &mat_mul(&b, &c).unwrap()).unwrap();
            let scale = left.frobenius_norm().max(1.0);
            for (l, r) in left.values().iter().zip(right.values()) {
                prop_assert!((l - r).abs() <= 1e-9 * scale);
            }
        }

        #[test]
        fn centered_means_vanish(seed in any::<u64>(), rows in 1usize..12, cols in 1usize..6) {
            let mut rng = RngState::new(seed);
            let m = random_matrix(&mut rng, rows, cols).scale(100.0);
            let c = center_columns(&m, &column_mean(&m).unwrap()).unwrap();
            for mu in column_mean(&c).unwrap().iter() {
                prop_assert!(mu.abs() < 1e-12);
            }
        }

        #[test]
        fn streams_reproduce(seed in any::<u64>()) {
            let mut a = RngState::new(seed);
            let mut b = RngState::new(seed);
            for _ in 0..32 {
                prop_assert_eq!(a.uniform_index(1000).unwrap(), b.uniform_index(1000).unwrap());
            }
        }
    }
}
