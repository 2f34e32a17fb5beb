use super::Spectrum;
use crate::{Error, Result};

/// Right-continuous empirical distribution function `F(x) = #{jumps <= x} / len`.
///
/// Jumps are stored sorted with multiplicity, so a pooled ensemble of
/// equally sized spectra is itself an `EsdStepFunction`.
#[derive(Debug, Clone, PartialEq)]
pub struct EsdStepFunction {
    jumps: Vec<f64>,
}

impl EsdStepFunction {
    pub fn from_spectrum(spectrum: &Spectrum) -> Result<Self> {
        Self::from_values(spectrum.values().to_vec())
    }

    pub fn from_values(mut jumps: Vec<f64>) -> Result<Self> {
        if jumps.is_empty() {
            return Err(Error::invalid(
                "empirical distribution needs at least one point",
            ));
        }
        if jumps.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "empirical distribution has non-finite points",
            ));
        }
        jumps.sort_by(f64::total_cmp);
        Ok(Self { jumps })
    }

    /// Pointwise average of equally sized distribution functions.
    pub fn average(parts: &[EsdStepFunction]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::invalid("cannot average an empty ensemble"))?;
        if parts.iter().any(|p| p.len() != first.len()) {
            return Err(Error::invalid(
                "averaged distributions must have equal sizes",
            ));
        }
        Self::from_values(parts.iter().flat_map(|p| p.jumps.iter().copied()).collect())
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn len(&self) -> usize {
        self.jumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jumps.is_empty()
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        self.count_at_or_below(x) as f64 / self.len() as f64
    }

    /// Left limit `F(x-)`.
    pub fn evaluate_left(&self, x: f64) -> f64 {
        self.jumps.partition_point(|&v| v < x) as f64 / self.len() as f64
    }

    fn count_at_or_below(&self, x: f64) -> usize {
        self.jumps.partition_point(|&v| v <= x)
    }
}

/// Exact `sup_x |F(x) - G(x)|`.
///
/// Both functions are constant between consecutive points of the merged
/// jump set, and the left limit at a jump equals the value at the previous
/// jump, so comparing right values at every merged jump (starting from the
/// common value 0) covers both one-sided limits. Counts are compared as
/// integers and divided once at the end.
pub fn kolmogorov_distance(f: &EsdStepFunction, g: &EsdStepFunction) -> f64 {
    let (a, b) = (&f.jumps, &g.jumps);
    let (na, nb) = (a.len() as u128, b.len() as u128);
    let (mut i, mut j) = (0usize, 0usize);
    let mut best: u128 = 0;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&u), Some(&v)) => u.min(v),
            (Some(&u), None) => u,
            (None, Some(&v)) => v,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        let lhs = i as u128 * nb;
        let rhs = j as u128 * na;
        best = best.max(lhs.abs_diff(rhs));
    }
    best as f64 / (na * nb) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn esd(v: &[f64]) -> EsdStepFunction {
        EsdStepFunction::from_values(v.to_vec()).unwrap()
    }

    #[test]
    fn evaluation_examples() {
        let f = esd(&[1.0, 2.0, 3.0]);
        assert_eq!(f.evaluate(2.0), 2.0 / 3.0);
        assert_eq!(f.evaluate(0.5), 0.0);
        assert_eq!(f.evaluate(3.0), 1.0);
        assert_eq!(f.evaluate_left(3.0), 2.0 / 3.0);
        assert!(EsdStepFunction::from_values(vec![]).is_err());
    }

    #[test]
    fn distance_examples() {
        let f = esd(&[0.3, 1.0, 2.5]);
        assert_eq!(kolmogorov_distance(&f, &f), 0.0);
        assert_eq!(kolmogorov_distance(&esd(&[0.0]), &esd(&[1.0])), 1.0);
        assert_eq!(
            kolmogorov_distance(&esd(&[0.0, 2.0]), &esd(&[1.0, 2.0])),
            0.5
        );
    }

    #[test]
    fn distance_with_unequal_sizes() {
        // F = step at 0; G = half mass at -1 and 1. Sup is 1/2 on [-1, 0) and [0, 1).
        assert_eq!(kolmogorov_distance(&esd(&[0.0]), &esd(&[-1.0, 1.0])), 0.5);
    }

    #[test]
    fn average_pools_jumps() {
        let avg = EsdStepFunction::average(&[esd(&[0.0, 1.0]), esd(&[2.0, 3.0])]).unwrap();
        assert_eq!(avg.evaluate(1.5), 0.5);
        assert!(EsdStepFunction::average(&[esd(&[0.0]), esd(&[1.0, 2.0])]).is_err());
    }
}
