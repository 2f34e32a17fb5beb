use super::SymMatrix;
use crate::{Error, Result};
use std::f64::consts::PI;

/// A plane rotation `R_ij(theta)` with `i < j` (zero-based indices).
///
/// `R` has `cos` at `(i,i)` and `(j,j)`, `sin` at `(i,j)` and `-sin` at `(j,i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationEvent {
    pub i: usize,
    pub j: usize,
    pub theta: f64,
}

impl RotationEvent {
    pub fn new(i: usize, j: usize, theta: f64) -> Result<Self> {
        if i >= j {
            return Err(Error::invalid(format!(
                "rotation plane needs i < j, got ({i}, {j})"
            )));
        }
        if !(theta > -PI && theta <= PI) {
            return Err(Error::invalid(format!("angle {theta} outside (-pi, pi]")));
        }
        Ok(Self { i, j, theta })
    }
}

/// Returns `R H R^T`.
pub fn apply_givens_conjugation(h: &SymMatrix, e: &RotationEvent) -> Result<SymMatrix> {
    let mut out = h.clone();
    conjugate_in_place(&mut out, e)?;
    Ok(out)
}

/// In-place `H <- R H R^T`; touches only rows and columns `i` and `j`.
pub(crate) fn conjugate_in_place(h: &mut SymMatrix, e: &RotationEvent) -> Result<()> {
    let n = h.order();
    let (i, j) = (e.i, e.j);
    if i == j {
        return Err(Error::invalid("rotation plane needs two distinct indices"));
    }
    if i >= n || j >= n {
        return Err(Error::invalid(format!(
            "rotation plane ({i}, {j}) outside order {n}"
        )));
    }
    if e.theta == 0.0 {
        return Ok(());
    }
    let (s, c) = e.theta.sin_cos();

    for k in 0..n {
        if k == i || k == j {
            continue;
        }
        let hik = h.get(i, k);
        let hjk = h.get(j, k);
        h.put(i, k, c * hik + s * hjk);
        h.put(j, k, -s * hik + c * hjk);
    }

    let a = h.get(i, i);
    let b = h.get(i, j);
    let d = h.get(j, j);
    // A scalar 2x2 block is fixed by every rotation; skip it so that
    // c^2 + s^2 != 1 rounding cannot perturb it.
    if b == 0.0 && a == d {
        return Ok(());
    }
    let (cc, ss, cs) = (c * c, s * s, c * s);
    h.put(i, i, cc * a + 2.0 * cs * b + ss * d);
    h.put(j, j, ss * a - 2.0 * cs * b + cc * d);
    h.put(i, j, (cc - ss) * b + cs * (d - a));
    Ok(())
}
