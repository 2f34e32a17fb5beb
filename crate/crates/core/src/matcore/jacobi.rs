use super::SymMatrix;
use crate::{Error, Result};

/// Default off-diagonal tolerance, relative to the Frobenius norm.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;
/// Sweep cap before the solver gives up.
pub const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Sorts the values; rejects non-finite input.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("spectrum contains non-finite values"));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Largest elementwise difference; `None` when the lengths differ.
    pub fn max_abs_diff(&self, other: &Spectrum) -> Option<f64> {
        (self.len() == other.len()).then(|| {
            self.values
                .iter()
                .zip(&other.values)
                .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
        })
    }
}

/// Cyclic Jacobi eigenvalue iteration.
///
/// Sweeps over all `(p, q)` pairs, annihilating each off-diagonal entry with
/// a plane rotation, until the off-diagonal Frobenius norm is at most
/// `tol * ||M||_F`. Gives up after [`MAX_SWEEPS`] sweeps.
pub fn jacobi_eigenvalues(m: &SymMatrix, tol: f64) -> Result<Spectrum> {
    if !(tol > 0.0) {
        return Err(Error::invalid("eigensolver tolerance must be positive"));
    }
    if !m.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let n = m.order();
    let mut a = m.as_slice().to_vec();
    let scale = m.frobenius_norm();
    if scale == 0.0 {
        return Spectrum::new(vec![0.0; n]);
    }
    let threshold = tol * scale;

    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                s += 2.0 * a[i * n + j] * a[i * n + j];
            }
        }
        s.sqrt()
    };

    let mut converged = off_norm(&a) <= threshold;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::Numeric(format!(
                "Jacobi iteration did not converge in {MAX_SWEEPS} sweeps (order {n})"
            )));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let g = a[r * n + p];
                    let h = a[r * n + q];
                    let rp = g - s * (h + g * tau);
                    let rq = h + s * (g - h * tau);
                    a[r * n + p] = rp;
                    a[p * n + r] = rp;
                    a[r * n + q] = rq;
                    a[q * n + r] = rq;
                }
            }
        }
        sweeps += 1;
        converged = off_norm(&a) <= threshold;
    }

    Spectrum::new((0..n).map(|i| a[i * n + i]).collect())
}
