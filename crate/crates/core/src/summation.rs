//! Compensated (Kahan–Babuška–Neumaier) summation.
//!
//! Every lattice reduction in the crate goes through [`CompensatedSum`] in a
//! fixed order, so results are bit-reproducible regardless of how the
//! per-term values were computed (serially or on a thread pool).

use std::iter::Sum;
use std::ops::AddAssign;

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct CompensatedSum<T> {
    sum: T,
    comp: T,
}

impl<T: Scalar> Default for CompensatedSum<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

impl<T: Scalar> AddAssign<T> for CompensatedSum<T> {
    fn add_assign(&mut self, rhs: T) {
        self.add(rhs);
    }
}

impl<T: Scalar> Sum<T> for CompensatedSum<T> {
    fn sum<I: Iterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator, in iteration order.
pub fn compensated_sum<T: Scalar, I: IntoIterator<Item = T>>(iter: I) -> T {
    iter.into_iter().sum::<CompensatedSum<T>>().value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_small_terms() {
        let xs = [1.0e16, 1.0, -1.0e16, 1.0];
        let naive: f64 = xs.iter().sum();
        assert_ne!(naive, 2.0);
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn harmonic_series_matches_reverse_order() {
        let fwd = compensated_sum((1..=100_000).map(|k| 1.0 / k as f64));
        let rev = compensated_sum((1..=100_000).rev().map(|k| 1.0 / k as f64));
        assert!((fwd - rev).abs() <= 1e-15 * fwd);
    }

    #[test]
    fn works_in_single_precision() {
        let s = compensated_sum((0..10_000).map(|_| 0.1f32));
        assert!((s - 1000.0).abs() < 1e-3);
    }
}
