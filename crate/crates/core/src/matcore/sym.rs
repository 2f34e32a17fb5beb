use crate::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;

/// Real symmetric matrix of order `n`.
///
/// Storage is a full row-major `n * n` buffer, and every write goes to both
/// `(i, j)` and `(j, i)`, so the two cells can never disagree.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, v)?;
        }
        Ok(m)
    }

    /// Builds the matrix from the upper triangle; `f` is called for `i <= j`.
    pub fn from_upper_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, f(i, j))?;
            }
        }
        Ok(m)
    }

    /// Parses nested rows; they must be square and exactly symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::invalid("matrix must have order at least 1"));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("matrix rows must all have length n"));
        }
        for i in 0..n {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::invalid(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Self::from_upper_fn(n, |i, j| rows[i][j])
    }

    /// GOE-like matrix: off-diagonal N(0, 1/n), diagonal N(0, 2/n).
    pub fn goe<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let scale = (1.0 / n as f64).sqrt();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let z: f64 = rng.sample(StandardNormal);
                let v = if i == j {
                    z * scale * std::f64::consts::SQRT_2
                } else {
                    z * scale
                };
                m.put(i, j, v);
            }
        }
        m
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Writes `v` to `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        if i >= self.n || j >= self.n {
            return Err(Error::invalid(format!(
                "index ({i}, {j}) outside order {}",
                self.n
            )));
        }
        if !v.is_finite() {
            return Err(Error::invalid(format!("non-finite entry at ({i}, {j})")));
        }
        self.put(i, j, v);
        Ok(())
    }

    #[inline]
    pub(crate) fn put(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// True when the matrix equals `c * I` exactly for some `c`.
    pub fn is_scalar(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let c = self.get(0, 0);
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j) == if i == j { c } else { 0.0 }))
    }

    pub(crate) fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn from_raw_symmetric(n: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        Self { n, data }
    }
}

/// Leading principal `k x k` submatrix.
pub fn top_left_block(h: &SymMatrix, k: usize) -> Result<SymMatrix> {
    if k == 0 || k > h.order() {
        return Err(Error::invalid(format!(
            "block order {k} must lie in 1..={}",
            h.order()
        )));
    }
    let mut data = Vec::with_capacity(k * k);
    for i in 0..k {
        data.extend_from_slice(&h.row(i)[..k]);
    }
    Ok(SymMatrix::from_raw_symmetric(k, data))
}

/// General dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// iid N(0, variance) entries.
    pub fn gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, variance: f64, rng: &mut R) -> Self {
        let sd = variance.sqrt();
        Self::from_fn(rows, cols, |_, _| sd * rng.sample::<f64, _>(StandardNormal))
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::invalid(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a == 0.0 {
                    continue;
                }
                let src = &other.data[l * other.cols..(l + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        Ok(out)
    }

    /// Determinant by LU with partial pivoting. Square matrices only.
    pub fn determinant(&self) -> Result<f64> {
        if self.rows != self.cols {
            return Err(Error::invalid("determinant of a non-square matrix"));
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs()))
                .unwrap_or(col);
            let p = a[pivot * n + col];
            if p == 0.0 {
                return Ok(0.0);
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                det = -det;
            }
            det *= p;
            for r in col + 1..n {
                let factor = a[r * n + col] / p;
                if factor != 0.0 {
                    for j in col..n {
                        a[r * n + j] -= factor * a[col * n + j];
                    }
                }
            }
        }
        Ok(det)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_are_mirrored() {
        let mut m = SymMatrix::zeros(3);
        m.set(0, 2, 5.0).unwrap();
        assert_eq!(m.get(2, 0), 5.0);
        assert!(m.set(0, 3, 1.0).is_err());
        assert!(m.set(0, 1, f64::NAN).is_err());
    }

    #[test]
    fn rejects_asymmetric_rows() {
        let rows = vec![vec![1.0, 2.0], vec![3.0, 1.0]];
        assert!(SymMatrix::from_rows(&rows).is_err());
    }

    #[test]
    fn block_examples() {
        let i4 = SymMatrix::identity(4);
        assert_eq!(top_left_block(&i4, 2).unwrap(), SymMatrix::identity(2));
        assert_eq!(top_left_block(&i4, 4).unwrap(), i4);
        let h = SymMatrix::from_rows(&[
            vec![1.0, 2.0, 3.0],
            vec![2.0, 4.0, 5.0],
            vec![3.0, 5.0, 6.0],
        ])
        .unwrap();
        let b = top_left_block(&h, 2).unwrap();
        assert_eq!(
            b,
            SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap()
        );
        assert!(top_left_block(&h, 0).is_err());
        assert!(top_left_block(&h, 4).is_err());
    }

    #[test]
    fn determinant_small_cases() {
        let m = DenseMatrix::from_fn(2, 2, |i, j| [[0.0, 1.0], [1.0, 0.0]][i][j]);
        assert_eq!(m.determinant().unwrap(), -1.0);
        let m = DenseMatrix::from_fn(3, 3, |i, j| {
            [[2.0, 0.0, 1.0], [1.0, 3.0, 2.0], [1.0, 1.0, 2.0]][i][j]
        });
        assert!((m.determinant().unwrap() - 6.0).abs() < 1e-12);
    }
}
