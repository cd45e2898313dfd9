//! Neumann ground state of −Δ + V/2 on a disk.
//!
//! For a disk of radius R > R0 we solve
//!
//! ```text
//!     −f'' − f'/r + ½V(r) f = λ f,   f'(0) = 0,   f'(R) = 0,   f(R) = 1,
//! ```
//!
//! by shooting on λ: the radial equation is integrated in t = log r from a
//! regular series start near the origin, and λ is bisected on the sign of
//! f'(R). The converged profile is then sampled on a grid that is uniform in
//! r on [0, 4R0] and uniform in log r on [4R0, R].

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::Dopri5;
use crate::potentials::{simpson, Potential};
use crate::quadrature::{composite, gl10};
use crate::special::{j0, j1};
use crate::summation::compensated_sum;

#[derive(Debug, Clone, Copy)]
pub struct NeumannOptions {
    /// Relative tolerance on λ.
    pub tol: f64,
    /// Intervals of the uniform part of the grid (rounded up to a multiple
    /// of 4 so that R0 is a node).
    pub uniform_intervals: usize,
    /// Log-grid nodes per decade of r beyond 4R0.
    pub nodes_per_decade: usize,
}

impl Default for NeumannOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            uniform_intervals: 400,
            nodes_per_decade: 100,
        }
    }
}

impl NeumannOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    /// Same tolerance, twice the grid density.
    pub fn refined(&self) -> Self {
        Self {
            tol: self.tol,
            uniform_intervals: 2 * self.uniform_intervals,
            nodes_per_decade: 2 * self.nodes_per_decade,
        }
    }
}

/// Radial grid: `r[0] = 0`, uniform up to `r[n_uniform]`, then log-uniform.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialGrid {
    pub r: Vec<f64>,
    pub n_uniform: usize,
}

impl RadialGrid {
    pub fn new(r0: f64, radius: f64, opts: &NeumannOptions) -> Self {
        let n_u = opts.uniform_intervals.max(4).div_ceil(4) * 4;
        let r_u = (4.0 * r0).min(radius);
        let mut r: Vec<f64> = (0..=n_u).map(|i| r_u * i as f64 / n_u as f64).collect();
        if radius > r_u {
            let decades = (radius / r_u).log10();
            let mut n_log = ((decades * opts.nodes_per_decade as f64).ceil() as usize).max(2);
            n_log += n_log % 2;
            let step = (radius / r_u).ln() / n_log as f64;
            for j in 1..=n_log {
                r.push(if j == n_log { radius } else { r_u * (step * j as f64).exp() });
            }
        }
        Self { r, n_uniform: n_u }
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// ∫₀^R g(r) r dr from samples g(r_i): Simpson in r on the uniform part,
    /// Simpson in log r on the rest.
    pub fn integrate_radial(&self, g: &[f64]) -> f64 {
        let n_u = self.n_uniform;
        let h = self.r[n_u] / n_u as f64;
        let inner: Vec<f64> = (0..=n_u).map(|i| g[i] * self.r[i]).collect();
        let mut total = simpson(&inner, h);
        if self.r.len() > n_u + 1 {
            let outer: Vec<f64> = (n_u..self.r.len()).map(|i| g[i] * self.r[i] * self.r[i]).collect();
            let ht = (self.r[self.r.len() - 1] / self.r[n_u]).ln() / (outer.len() - 1) as f64;
            total += simpson(&outer, ht);
        }
        total
    }
}

/// Neumann ground state on the disk of radius R.
#[derive(Debug, Clone, Serialize)]
pub struct ScatteringSolution {
    pub radius: f64,
    pub lambda: f64,
    /// ε_R² = λ_R R².
    pub eps_sq: f64,
    /// ∫ V f_R over ℝ² (2π ∫₀^{R0} V f_R r dr).
    pub int_vf: f64,
    /// ∫ f_R over the disk.
    pub int_f: f64,
    /// Scattering length of V (absent for V ≡ 0).
    pub scattering_length: Option<f64>,
    pub range: f64,
    pub grid: RadialGrid,
    /// f_R at the grid nodes, normalized so that f_R(R) = 1.
    pub f: Vec<f64>,
    /// f_R' at the grid nodes.
    pub df: Vec<f64>,
}

/// Empirical constants of the bounds on w_R = 1 − f_R.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WBoundsReport {
    /// sup over R0 ≤ r < R of |w(r)|·log(R/𝔞)/log(R/r).
    pub value_constant: f64,
    /// sup over r ≤ R of |w'(r)|·(r + 1)·log(R/𝔞).
    pub gradient_constant: f64,
    /// sup over r ≤ R0 of |w(r)|.
    pub core_sup: f64,
    /// w(R); zero by normalization.
    pub w_at_boundary: f64,
}

/// Scaled residuals of the large-R asymptotics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticDefects {
    /// log(R/𝔞).
    pub log_ratio: f64,
    /// (λ − 2/(R²L)(1 + 3/(4L)))·R²L³.
    pub eigenvalue: f64,
    /// (∫Vf − 4π/L (1 + 1/(2L)))·L³.
    pub int_vf: f64,
    /// far-field defect / (ε⁴ log²ε).
    pub far_field: f64,
    /// ε²L/2 (→ 1).
    pub eps_sq_ratio: f64,
}

/// State in t = log r: [f, r f', ∫₀^r V f s ds, ∫₀^r f s ds].
type State = [f64; 4];

struct RadialSweep<'a> {
    pot: &'a Potential,
    lambda: f64,
    ode: Dopri5,
}

impl RadialSweep<'_> {
    fn start(&self, r_start: f64) -> State {
        let v = self.pot.eval_unchecked(0.0);
        let c = 0.5 * v - self.lambda;
        let r2 = r_start * r_start;
        // f = 1 + c r²/4, r f' = c r²/2
        [1.0 + 0.25 * c * r2, 0.5 * c * r2, 0.5 * v * r2, 0.5 * r2]
    }

    /// Integrates through the ascending `stops` (all > 0), returning the
    /// state at each. The potential's breakpoints must be among the stops.
    fn run(&self, stops: &[f64]) -> Result<Vec<State>> {
        let r0 = self.pot.range();
        let r_start = 1e-6 * stops[0];
        let mut y = self.start(r_start);
        let mut t = r_start.ln();
        let mut h = 0.1;
        let mut lo = 0.0;
        let mut out = Vec::with_capacity(stops.len());
        for &hi in stops {
            let outside = lo >= r0;
            let lambda = self.lambda;
            let pot = self.pot;
            let (y1, h1) = self.ode.integrate(
                |t, y: &State| {
                    let r = t.exp();
                    let v = if outside { 0.0 } else { pot.eval_unchecked(r.min(hi)) };
                    let r2 = r * r;
                    [y[1], r2 * (0.5 * v - lambda) * y[0], r2 * v * y[0], r2 * y[0]]
                },
                t,
                y,
                hi.ln(),
                h,
            )?;
            y = y1;
            h = h1;
            t = hi.ln();
            lo = hi;
            out.push(y);
        }
        Ok(out)
    }
}

fn merge_stops(mut a: Vec<f64>, b: &[f64]) -> Vec<f64> {
    a.extend_from_slice(b);
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    a.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * y.abs());
    a
}

fn shooting_ode() -> Dopri5 {
    Dopri5 {
        rtol: 1e-12,
        atol: 1e-300,
        max_steps: 2_000_000,
    }
}

/// r f'(R) for f(0) = 1 at trial eigenvalue λ.
fn boundary_slope(pot: &Potential, lambda: f64, radius: f64) -> Result<f64> {
    let stops = merge_stops(
        pot.breakpoints().into_iter().filter(|&b| b < radius).collect(),
        &[radius],
    );
    let sweep = RadialSweep {
        pot,
        lambda,
        ode: shooting_ode(),
    };
    let states = sweep.run(&stops)?;
    Ok(states.last().unwrap()[1])
}

/// Solves the Neumann problem on the disk of radius `radius`.
pub fn solve_neumann(pot: &Potential, radius: f64, opts: &NeumannOptions) -> Result<ScatteringSolution> {
    let r0 = pot.range();
    if !(radius > r0) || !radius.is_finite() {
        return Err(Error::domain(format!("disk radius {radius} must exceed the range R0 = {r0}")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    let grid = RadialGrid::new(r0, radius, opts);
    if pot.is_zero() {
        let n = grid.len();
        return Ok(ScatteringSolution {
            radius,
            lambda: 0.0,
            eps_sq: 0.0,
            int_vf: 0.0,
            int_f: PI * radius * radius,
            scattering_length: None,
            range: r0,
            grid,
            f: vec![1.0; n],
            df: vec![0.0; n],
        });
    }
    let a = pot.scattering_length()?.a;
    let lambda = bracket_and_bisect(pot, radius, a, opts.tol)?;

    let stops = merge_stops(grid.r[1..].to_vec(), &pot.breakpoints().into_iter().filter(|&b| b < radius).collect::<Vec<_>>());
    let sweep = RadialSweep {
        pot,
        lambda,
        ode: shooting_ode(),
    };
    let states = sweep.run(&stops)?;
    let mut f = Vec::with_capacity(grid.len());
    let mut df = Vec::with_capacity(grid.len());
    f.push(1.0);
    df.push(0.0);
    let mut k = 0;
    for &r in &grid.r[1..] {
        while (stops[k] - r).abs() > 1e-14 * r {
            k += 1;
        }
        f.push(states[k][0]);
        df.push(states[k][1] / r);
    }
    let last = *states.last().unwrap();
    let norm = last[0];
    for (fi, dfi) in f.iter_mut().zip(df.iter_mut()) {
        *fi /= norm;
        *dfi /= norm;
    }
    if let Some(i) = f.iter().position(|&v| v <= 0.0) {
        return Err(Error::InteriorZero { r: grid.r[i] });
    }
    Ok(ScatteringSolution {
        radius,
        lambda,
        eps_sq: lambda * radius * radius,
        int_vf: 2.0 * PI * last[2] / norm,
        int_f: 2.0 * PI * last[3] / norm,
        scattering_length: Some(a),
        range: r0,
        grid,
        f,
        df,
    })
}

/// Window ×[¼, 4] around 2/(R² log(R/𝔞)), widened if it fails to bracket
/// (small R), then bisection on the sign of f'(R).
fn bracket_and_bisect(pot: &Potential, radius: f64, a: f64, tol: f64) -> Result<f64> {
    let log_ratio = (radius / a).ln().max(0.5);
    let guess = 2.0 / (radius * radius * log_ratio);
    let mut lo = 0.25 * guess;
    let mut hi = 4.0 * guess;
    let mut widen = 0;
    while boundary_slope(pot, lo, radius)? <= 0.0 {
        lo *= 0.25;
        widen += 1;
        if widen > 60 {
            return Err(Error::BracketFailure { lo, hi });
        }
    }
    while boundary_slope(pot, hi, radius)? > 0.0 {
        lo = hi;
        hi *= 2.0;
        widen += 1;
        if widen > 60 {
            return Err(Error::BracketFailure { lo, hi });
        }
    }
    for _ in 0..300 {
        if hi - lo <= tol * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if boundary_slope(pot, mid, radius)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

impl ScatteringSolution {
    /// w_R = 1 − f_R at the grid nodes.
    pub fn w(&self) -> Vec<f64> {
        self.f.iter().map(|f| 1.0 - f).collect()
    }

    pub fn log_ratio(&self) -> Option<f64> {
        self.scattering_length.map(|a| (self.radius / a).ln())
    }

    /// ∫ V f_R, accumulated along the ODE sweep.
    pub fn integral_vf(&self) -> f64 {
        self.int_vf
    }

    /// 2π ∫₀^{R0} V f_R r dr by Simpson quadrature of the grid samples.
    pub fn integral_vf_quadrature(&self, pot: &Potential) -> f64 {
        let n_u = self.grid.n_uniform;
        let r0_index = self.grid.r[..=n_u].iter().position(|&r| r >= self.range * (1.0 - 1e-14)).unwrap_or(n_u);
        if r0_index == 0 {
            return 0.0;
        }
        let h = self.grid.r[1];
        let vals: Vec<f64> = (0..=r0_index)
            .map(|i| {
                let r = self.grid.r[i].min(self.range);
                pot.eval_unchecked(r) * self.f[i] * self.grid.r[i]
            })
            .collect();
        if vals.len() % 2 == 1 {
            2.0 * PI * simpson(&vals, h)
        } else {
            // odd interval count: Simpson on all but the last, trapezoid there
            let n = vals.len() - 1;
            2.0 * PI * (simpson(&vals[..n], h) + 0.5 * h * (vals[n - 1] + vals[n]))
        }
    }

    /// 2π ∫₀^R f_R r dr by grid quadrature.
    pub fn integral_f_quadrature(&self) -> f64 {
        2.0 * PI * self.grid.integrate_radial(&self.f)
    }

    /// max over grid nodes r ∈ [2R0, R] of the deviation from the two-term
    /// far-field expansion.
    pub fn far_field_defect(&self) -> Result<f64> {
        if self.radius < 10.0 * self.range {
            return Err(Error::domain("far-field expansion needs R ≥ 10 R0"));
        }
        let e2 = self.eps_sq;
        let big_r = self.radius;
        let mut worst: f64 = 0.0;
        for (&r, &f) in self.grid.r.iter().zip(&self.f) {
            if r < 2.0 * self.range {
                continue;
            }
            let lg = (big_r / r).ln();
            let q = r * r / (big_r * big_r);
            let model = 1.0 - 0.25 * e2 * (2.0 * lg - 1.0 + q) + e2 * e2 / 16.0 * lg * (1.0 + 2.0 * q);
            worst = worst.max((f - model).abs());
        }
        Ok(worst)
    }

    pub fn w_bounds_check(&self) -> WBoundsReport {
        let n = self.f.len();
        let w_boundary = 1.0 - self.f[n - 1];
        let Some(log_ratio) = self.log_ratio() else {
            return WBoundsReport {
                value_constant: 0.0,
                gradient_constant: 0.0,
                core_sup: 0.0,
                w_at_boundary: w_boundary,
            };
        };
        let mut value_constant: f64 = 0.0;
        let mut gradient_constant: f64 = 0.0;
        let mut core_sup: f64 = 0.0;
        for i in 0..n {
            let r = self.grid.r[i];
            let w = 1.0 - self.f[i];
            if r <= self.range {
                core_sup = core_sup.max(w.abs());
            }
            if r >= self.range && r < self.radius {
                let lg = (self.radius / r).ln();
                if lg > 0.0 {
                    value_constant = value_constant.max(w.abs() * log_ratio / lg);
                }
            }
            gradient_constant = gradient_constant.max(self.df[i].abs() * (r + 1.0) * log_ratio);
        }
        WBoundsReport {
            value_constant,
            gradient_constant,
            core_sup,
            w_at_boundary: w_boundary,
        }
    }

    pub fn asymptotic_defects(&self) -> Option<AsymptoticDefects> {
        let l = self.log_ratio()?;
        let r2 = self.radius * self.radius;
        let eigenvalue = (self.lambda - 2.0 / (r2 * l) * (1.0 + 0.75 / l)) * r2 * l.powi(3);
        let int_vf = (self.int_vf - 4.0 * PI / l * (1.0 + 0.5 / l)) * l.powi(3);
        let far_field = match self.far_field_defect() {
            Ok(d) => {
                let eps = self.eps_sq.sqrt();
                d / (self.eps_sq * self.eps_sq * eps.ln().powi(2))
            }
            Err(_) => f64::NAN,
        };
        Some(AsymptoticDefects {
            log_ratio: l,
            eigenvalue,
            int_vf,
            far_field,
            eps_sq_ratio: self.eps_sq * l / 2.0,
        })
    }

    /// Cubic Hermite interpolation of w_R at radius r ∈ [0, R].
    pub fn w_at(&self, r: f64) -> f64 {
        1.0 - self.f_at(r)
    }

    /// Cubic Hermite interpolation of f_R at radius r ∈ [0, R].
    pub fn f_at(&self, r: f64) -> f64 {
        let g = &self.grid.r;
        if r <= 0.0 {
            return self.f[0];
        }
        if r >= self.radius {
            return 1.0;
        }
        let i = match g.binary_search_by(|v| v.partial_cmp(&r).unwrap()) {
            Ok(i) => return self.f[i],
            Err(i) => i - 1,
        };
        hermite(g[i], g[i + 1], self.f[i], self.f[i + 1], self.df[i], self.df[i + 1], r)
    }
}

/// Radial transforms of the grid profile, ∫ g(r, f(r)) J₀(kr) r dr over grid
/// intervals. Uniform intervals interpolate f by cubic Hermite in r, the log
/// part by cubic Hermite in t = log r; each interval is split into GL10
/// panels resolving the oscillation of J₀.
impl ScatteringSolution {
    /// f'' at both ends of interval i from the radial equation, with V
    /// taken one-sided so that jumps at grid nodes are respected.
    fn second_derivatives(&self, pot: &Potential, i: usize) -> (f64, f64) {
        let (ra, rb) = (self.grid.r[i], self.grid.r[i + 1]);
        let eps = 1e-9 * (rb - ra);
        let va = if ra + eps < self.range { pot.eval_unchecked(ra + eps) } else { 0.0 };
        let vb = if rb - eps < self.range { pot.eval_unchecked(rb - eps) } else { 0.0 };
        let dd = |r: f64, v: f64, f: f64, df: f64| {
            if r == 0.0 {
                0.5 * (0.5 * v - self.lambda) * f
            } else {
                (0.5 * v - self.lambda) * f - df / r
            }
        };
        (dd(ra, va, self.f[i], self.df[i]), dd(rb, vb, self.f[i + 1], self.df[i + 1]))
    }

    fn interval_transform<G: Fn(f64, f64) -> f64>(&self, pot: &Potential, i: usize, k: f64, g: &G) -> f64 {
        let (ra, rb) = (self.grid.r[i], self.grid.r[i + 1]);
        let (fa, fb) = (self.f[i], self.f[i + 1]);
        let (da, db) = (self.df[i], self.df[i + 1]);
        let (dda, ddb) = self.second_derivatives(pot, i);
        let panels = 1 + (k * (rb - ra) / 2.0) as usize;
        if i < self.grid.n_uniform {
            composite(gl10(), ra, rb, panels, |r| {
                let f = quintic_hermite(ra, rb, [fa, da, dda], [fb, db, ddb], r);
                g(r, f) * j0(k * r) * r
            })
        } else {
            // in t = log r: f_t = r f', f_tt = r² f'' + r f'
            let (ta, tb) = (ra.ln(), rb.ln());
            let ya = [fa, ra * da, ra * ra * dda + ra * da];
            let yb = [fb, rb * db, rb * rb * ddb + rb * db];
            composite(gl10(), ta, tb, panels, |t| {
                let r = t.exp();
                let f = quintic_hermite(ta, tb, ya, yb, t);
                g(r, f) * j0(k * r) * r * r
            })
        }
    }

    /// ∫₀^{r_end} g(r, f(r)) J₀(kr) r dr with `r_end` a grid node.
    pub fn radial_transform<G: Fn(f64, f64) -> f64>(&self, pot: &Potential, k: f64, end_index: usize, g: G) -> f64 {
        compensated_sum((0..end_index).map(|i| self.interval_transform(pot, i, k, &g)))
    }

    /// ∫₀^R w(r) J₀(kr) r dr.
    pub fn hankel_w(&self, pot: &Potential, k: f64) -> f64 {
        self.radial_transform(pot, k, self.grid.len() - 1, |_, f| 1.0 - f)
    }

    /// ∫₀^R f(r) J₀(kr) r dr, using ∫₀^R J₀(kr) r dr = R J₁(kR)/k.
    pub fn hankel_f(&self, pot: &Potential, k: f64) -> f64 {
        let r = self.radius;
        let disk = if k * r < 1e-8 { 0.5 * r * r } else { r * j1(k * r) / k };
        disk - self.hankel_w(pot, k)
    }

    /// ∫₀^{R0} V(r) f(r) J₀(kr) r dr.
    pub fn hankel_vf(&self, pot: &Potential, k: f64) -> f64 {
        let end = self.range_index();
        self.radial_transform(pot, k, end, |r, f| pot.eval_unchecked(r) * f)
    }

    /// ∫₀^R w(r)² r dr.
    pub fn integral_w_sq(&self, pot: &Potential) -> f64 {
        self.radial_transform(pot, 0.0, self.grid.len() - 1, |_, f| (1.0 - f) * (1.0 - f))
    }

    /// Grid index of the node r = R0.
    pub fn range_index(&self) -> usize {
        self.grid
            .r
            .iter()
            .position(|&r| r >= self.range * (1.0 - 1e-14))
            .unwrap_or(self.grid.len() - 1)
    }
}

/// Quintic Hermite interpolation from value, first and second derivative
/// at both ends.
pub(crate) fn quintic_hermite(x0: f64, x1: f64, y0: [f64; 3], y1: [f64; 3], x: f64) -> f64 {
    let h = x1 - x0;
    let s = (x - x0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;
    let h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
    let h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
    let h2 = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5);
    let h3 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
    let h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
    let h5 = 0.5 * (s3 - 2.0 * s4 + s5);
    y0[0] * h0 + h * y0[1] * h1 + h * h * y0[2] * h2 + y1[0] * h3 + h * y1[1] * h4 + h * h * y1[2] * h5
}

pub(crate) fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let s = (x - x0) / h;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn soft() -> Potential {
        Potential::soft_disk(2.0, 1.0).unwrap()
    }

    #[test]
    fn free_problem_short_circuits() {
        let v = Potential::soft_disk(0.0, 1.0).unwrap();
        let sol = solve_neumann(&v, 50.0, &NeumannOptions::default()).unwrap();
        assert_eq!(sol.lambda, 0.0);
        assert!(sol.f.iter().all(|&f| f == 1.0));
        assert_eq!(sol.integral_vf(), 0.0);
        assert_eq!(sol.far_field_defect().unwrap(), 0.0);
        let w = sol.w_bounds_check();
        assert_eq!(w.value_constant, 0.0);
        assert_eq!(w.gradient_constant, 0.0);
    }

    #[test]
    fn rejects_radius_inside_support() {
        assert!(solve_neumann(&soft(), 0.5, &NeumannOptions::default()).is_err());
        assert!(solve_neumann(&soft(), 5.0, &NeumannOptions::with_tol(0.0)).is_err());
    }

    // Frozen from exact Bessel matching (I₀ inside, J₀/Y₀ outside) at 40
    // digits, an independent route to the same eigenvalue.
    #[test]
    fn eigenvalue_matches_exact_bessel_matching() {
        let cases = [
            (1e2, 3.2681573766401374e-5, 0.27748629122539014),
            (1e3, 2.3765628820412015e-7, 0.20407156359947048),
            (1e4, 1.8666658069220117e-9, 0.161_321_628_730_019_5),
        ];
        for (r, lambda, f0) in cases {
            let sol = solve_neumann(&soft(), r, &NeumannOptions::default()).unwrap();
            assert_relative_eq!(sol.lambda, lambda, max_relative = 1e-8);
            assert_relative_eq!(sol.f[0], f0, max_relative = 1e-8);
        }
    }

    #[test]
    fn int_vf_matches_exact_value() {
        let sol = solve_neumann(&soft(), 1e5, &NeumannOptions::default()).unwrap();
        assert_relative_eq!(sol.int_vf, 0.947_142_883_785_057_8, max_relative = 1e-8);
        assert_relative_eq!(sol.lambda, 1.5367565579591006e-11, max_relative = 1e-8);
    }

    #[test]
    fn profile_is_between_zero_and_one_and_monotone_outside() {
        for r in [20.0, 1e3, 1e5] {
            let sol = solve_neumann(&soft(), r, &NeumannOptions::default()).unwrap();
            assert!(sol.f.iter().all(|&f| (0.0..=1.0 + 1e-12).contains(&f)));
            assert!((sol.f.last().unwrap() - 1.0).abs() < 1e-14);
            assert!(sol.df.last().unwrap().abs() * r < 1e-8);
            let start = sol.grid.r.iter().position(|&x| x >= 1.0).unwrap();
            assert!(sol.f[start..].windows(2).all(|w| w[1] >= w[0] - 1e-14));
        }
    }

    #[test]
    fn eigenvalue_stable_under_grid_refinement() {
        let opts = NeumannOptions::default();
        let a = solve_neumann(&soft(), 1e4, &opts).unwrap();
        let b = solve_neumann(&soft(), 1e4, &opts.refined()).unwrap();
        assert!(((a.lambda - b.lambda) / a.lambda).abs() < 0.1 * opts.tol);
    }

    #[test]
    fn integral_identity_with_grid_quadrature() {
        let sol = solve_neumann(&soft(), 1e4, &NeumannOptions::default()).unwrap();
        let lhs = 2.0 * sol.lambda * sol.integral_f_quadrature();
        assert_relative_eq!(lhs, sol.int_vf, max_relative = 1e-7);
        assert_relative_eq!(sol.integral_vf_quadrature(&soft()), sol.int_vf, max_relative = 1e-7);
    }

    #[test]
    fn far_field_defect_decreases_with_radius() {
        let d3 = solve_neumann(&soft(), 1e3, &NeumannOptions::default()).unwrap().far_field_defect().unwrap();
        let d5 = solve_neumann(&soft(), 1e5, &NeumannOptions::default()).unwrap().far_field_defect().unwrap();
        assert!(d5 < d3);
    }

    #[test]
    fn w_vanishes_at_boundary() {
        let sol = solve_neumann(&soft(), 1e4, &NeumannOptions::default()).unwrap();
        let rep = sol.w_bounds_check();
        assert!(rep.w_at_boundary.abs() < 1e-14);
        assert!(rep.value_constant.is_finite() && rep.value_constant > 0.0);
    }

    #[test]
    fn gaussian_and_tabulated_potentials_solve() {
        let g = Potential::gaussian_truncated(5.0, 1.0).unwrap();
        let sol = solve_neumann(&g, 1e3, &NeumannOptions::default()).unwrap();
        assert!(sol.lambda > 0.0);
        let l = sol.log_ratio().unwrap();
        assert!((sol.eps_sq * l / 2.0 - 1.0).abs() < 5.0 / l);
        let r: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        let v: Vec<f64> = r.iter().map(|_| 2.0).collect();
        let t = Potential::tabulated(r, v).unwrap();
        let st = solve_neumann(&t, 1e3, &NeumannOptions::default()).unwrap();
        assert_relative_eq!(st.lambda, 2.3765628820412015e-7, max_relative = 1e-7);
    }

    #[test]
    fn transforms_satisfy_the_radial_equation() {
        // −k² ŵ(k) + ½ (Vf)^(k) − λ f̂(k) = 0 by Green's formula on the disk
        let v = soft();
        let sol = solve_neumann(&v, 300.0, &NeumannOptions::default()).unwrap();
        for k in [0.0, 1e-3, 0.05, 0.7] {
            let lhs = -k * k * sol.hankel_w(&v, k) + 0.5 * sol.hankel_vf(&v, k) - sol.lambda * sol.hankel_f(&v, k);
            assert!(lhs.abs() < 1e-9 * sol.hankel_vf(&v, 0.0), "k = {k}: {lhs:e}");
        }
        assert_relative_eq!(2.0 * PI * sol.hankel_vf(&v, 0.0), sol.int_vf, max_relative = 1e-9);
    }

    #[test]
    fn hermite_interpolation_reproduces_nodes() {
        let sol = solve_neumann(&soft(), 1e3, &NeumannOptions::default()).unwrap();
        let i = sol.grid.len() - 10;
        assert_eq!(sol.f_at(sol.grid.r[i]), sol.f[i]);
        let mid = 0.5 * (sol.grid.r[i] + sol.grid.r[i + 1]);
        let v = sol.f_at(mid);
        assert!(v > sol.f[i] && v < sol.f[i + 1]);
    }
}
