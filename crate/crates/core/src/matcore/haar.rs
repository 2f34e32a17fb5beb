use super::{DenseMatrix, SymMatrix};
use crate::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;

/// Element of SO(n), stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalMatrix {
    m: DenseMatrix,
}

impl OrthogonalMatrix {
    pub fn identity(n: usize) -> Self {
        Self {
            m: DenseMatrix::identity(n),
        }
    }

    pub fn order(&self) -> usize {
        self.m.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m.get(i, j)
    }

    pub fn as_dense(&self) -> &DenseMatrix {
        &self.m
    }

    /// `max |O O^T - I|` over all entries.
    pub fn orthogonality_residual(&self) -> f64 {
        let n = self.order();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|l| self.m.get(i, l) * self.m.get(j, l)).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    pub fn determinant(&self) -> f64 {
        self.m
            .determinant()
            .expect("orthogonal matrices are square")
    }

    /// `O H O^T`. A scalar `H` is returned unchanged, which is exact.
    pub fn conjugate(&self, h: &SymMatrix) -> Result<SymMatrix> {
        self.conjugate_block(h, h.order())
    }

    /// Leading `k x k` block of `O H O^T`, computed from the first `k` rows of `O` only.
    pub fn conjugate_block(&self, h: &SymMatrix, k: usize) -> Result<SymMatrix> {
        let n = self.order();
        if h.order() != n {
            return Err(Error::invalid(format!(
                "cannot conjugate order {} by order {n}",
                h.order()
            )));
        }
        if k == 0 || k > n {
            return Err(Error::invalid(format!(
                "block order {k} must lie in 1..={n}"
            )));
        }
        if h.is_scalar() {
            return super::top_left_block(h, k);
        }
        // t = O_k H, k x n
        let mut t = vec![0.0; k * n];
        for a in 0..k {
            let row = &mut t[a * n..(a + 1) * n];
            for l in 0..n {
                let o = self.m.get(a, l);
                if o == 0.0 {
                    continue;
                }
                for (dst, &hv) in row.iter_mut().zip(h.row(l)) {
                    *dst += o * hv;
                }
            }
        }
        let mut out = SymMatrix::zeros(k);
        for a in 0..k {
            for b in a..k {
                let v: f64 = (0..n).map(|l| t[a * n + l] * self.m.get(b, l)).sum();
                out.put(a, b, v);
            }
        }
        Ok(out)
    }
}

/// Haar-distributed element of SO(n).
///
/// Orthonormalizes the columns of a standard Gaussian matrix by modified
/// Gram-Schmidt (run twice for stability). The triangular factor then has a
/// positive diagonal, which makes the result Haar on O(n); if the
/// determinant is negative the first column is negated to land in SO(n).
pub fn haar_so_n<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<OrthogonalMatrix> {
    if n == 0 {
        return Err(Error::invalid("SO(n) needs n >= 1"));
    }
    loop {
        let mut cols: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        if orthonormalize(&mut cols) {
            let mut m = DenseMatrix::from_fn(n, n, |i, j| cols[j][i]);
            if m.determinant()? < 0.0 {
                for i in 0..n {
                    let v = m.get(i, 0);
                    m.set(i, 0, -v);
                }
            }
            return Ok(OrthogonalMatrix { m });
        }
        // rank-deficient draw (probability zero); resample
    }
}

fn orthonormalize(cols: &mut [Vec<f64>]) -> bool {
    for j in 0..cols.len() {
        let (done, rest) = cols.split_at_mut(j);
        let v = &mut rest[0];
        for _pass in 0..2 {
            for q in done.iter() {
                let proj: f64 = q.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                for (x, qv) in v.iter_mut().zip(q) {
                    *x -= proj * qv;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 1e-12) {
            return false;
        }
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    true
}
