//! Gauss–Legendre quadrature: fixed rules, composite panels, and an adaptive
//! driver that bisects panels until two refinement levels agree.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::summation::CompensatedSum;

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Integral of `f` over [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut acc = CompensatedSum::new();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(mid + half * x));
        }
        half * acc.value()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Shared 20-point rule.
pub fn gl20() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(20))
}

/// Shared 10-point rule.
pub fn gl10() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(10))
}

/// Composite rule over `panels` equal panels of [a, b].
pub fn composite<F: FnMut(f64) -> f64>(rule: &GaussLegendre, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = CompensatedSum::new();
    for i in 0..panels {
        let lo = a + i as f64 * h;
        let hi = if i + 1 == panels { b } else { lo + h };
        acc.add(rule.integrate(lo, hi, &mut f));
    }
    acc.value()
}

/// Adaptive integral of a smooth function on [a, b] to absolute tolerance
/// `tol`. Each panel is accepted when its 10-point and 20-point values agree.
pub fn adaptive<F: FnMut(f64) -> f64>(a: f64, b: f64, tol: f64, mut f: F) -> Result<f64> {
    let mut stack = vec![(a, b, 0u32)];
    let mut total = CompensatedSum::new();
    let mut err_total = 0.0;
    let width = (b - a).abs().max(f64::MIN_POSITIVE);
    while let Some((lo, hi, depth)) = stack.pop() {
        let coarse = gl10().integrate(lo, hi, &mut f);
        let fine = gl20().integrate(lo, hi, &mut f);
        let err = (fine - coarse).abs();
        let local_tol = tol * (hi - lo).abs() / width;
        if err <= local_tol.max(1e-15 * fine.abs()) || depth >= 40 {
            if depth >= 40 && err > local_tol {
                err_total += err;
            }
            total.add(fine);
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    let value = total.value();
    if err_total > 10.0 * tol.max(1e-14 * value.abs()) {
        return Err(Error::Quadrature {
            estimate: value,
            error: err_total,
        });
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(5);
        // degree 9 is exact for 5 points
        let v = rule.integrate(-1.0, 2.0, |x| x.powi(9) - 3.0 * x.powi(4));
        let exact = (2f64.powi(10) - 1.0) / 10.0 - 3.0 * (2f64.powi(5) + 1.0) / 5.0;
        assert_relative_eq!(v, exact, max_relative = 1e-13);
        let sum_w: f64 = rule.weights.iter().sum();
        assert_relative_eq!(sum_w, 2.0, max_relative = 1e-15);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let v = adaptive(0.0, 1.0, 1e-12, |x| 1.0 / (1e-4 + (x - 0.3).powi(2))).unwrap();
        let exact = ((0.7f64 / 1e-2).atan() + (0.3f64 / 1e-2).atan()) / 1e-2;
        assert_relative_eq!(v, exact, max_relative = 1e-11);
    }

    #[test]
    fn composite_oscillatory() {
        let v = composite(gl20(), 0.0, 50.0, 40, |x| x.cos());
        assert_relative_eq!(v, 50f64.sin(), epsilon = 1e-13);
    }
}
