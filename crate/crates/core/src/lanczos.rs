//! Symmetric sparse matrices and their lowest eigenpairs.
//!
//! The iterative solver is Lanczos with full reorthogonalization, explicit
//! restarts and locking: converged Ritz pairs are deflated and later runs
//! start from fresh random vectors orthogonal to them, which is how repeated
//! eigenvalues are picked up one copy at a time. A final run that finds
//! nothing below the locked set ends the search.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Dense eigensolver is used up to this dimension.
pub const DENSE_LIMIT: usize = 2000;

const ROW_CHUNK: usize = 1024;

/// Compressed sparse rows holding both triangles of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Expands lower-triangle entries (row ≥ col) into a full symmetric CSR.
    /// Duplicate positions are summed.
    pub fn from_lower(dim: usize, lower: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
        for &(r, c, v) in lower {
            if r >= dim || c > r {
                return Err(Error::domain(format!("entry ({r}, {c}) is not in the lower triangle of a {dim}x{dim} matrix")));
            }
            rows[r].push((c, v));
            if r != c {
                rows[c].push((r, v));
            }
        }
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if last == Some(c) {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        Ok(Self { dim, row_ptr, cols, vals })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nonzeros(&self) -> usize {
        self.vals.len()
    }

    /// Entries of row `i` as (column, value).
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    /// y = A x, parallel over row blocks. Each row is an independent
    /// sequential dot product, so the result does not depend on threading.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.par_chunks_mut(ROW_CHUNK).enumerate().for_each(|(b, out)| {
            for (o, yi) in out.iter_mut().enumerate() {
                let i = b * ROW_CHUNK + o;
                let mut s = 0.0;
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    s += self.vals[k] * x[self.cols[k]];
                }
                *yi = s;
            }
        });
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// max |A_ij − A_ji|.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                let t = self.row(j).find(|e| e.0 == i).map_or(0.0, |e| e.1);
                worst = worst.max((v - t).abs());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EigenMethod {
    /// Dense up to [`DENSE_LIMIT`], Lanczos beyond.
    #[default]
    Auto,
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Residual tolerance relative to the spectral scale of the Ritz problem.
    pub tol: f64,
    /// Krylov dimension per run.
    pub max_basis: usize,
    /// Total number of Lanczos runs.
    pub max_runs: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_basis: 200,
            max_runs: 400,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    /// Ascending.
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// ‖A v − θ v‖ per pair.
    pub residuals: Vec<f64>,
    pub method: EigenMethod,
}

/// The `k` smallest eigenpairs of a symmetric CSR matrix.
pub fn lowest_eigenpairs(a: &CsrMatrix, k: usize, method: EigenMethod, opts: &LanczosOptions) -> Result<EigenPairs> {
    if k == 0 || k > a.dim() {
        return Err(Error::domain(format!("requested {k} eigenvalues of a {}-dimensional matrix", a.dim())));
    }
    let dense = match method {
        EigenMethod::Dense => true,
        EigenMethod::Lanczos => false,
        EigenMethod::Auto => a.dim() <= DENSE_LIMIT,
    };
    if dense {
        dense_lowest(a, k)
    } else {
        if k >= a.dim() {
            return Err(Error::domain("Lanczos needs k below the dimension"));
        }
        lanczos_lowest(a.dim(), |x, y| a.matvec(x, y), k, opts)
    }
}

fn dense_lowest(a: &CsrMatrix, k: usize) -> Result<EigenPairs> {
    let eig = SymmetricEigen::new(a.to_dense());
    let mut order: Vec<usize> = (0..a.dim()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]).then(i.cmp(&j)));
    let mut values = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    let mut scratch = vec![0.0; a.dim()];
    for &i in order.iter().take(k) {
        let v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        let theta = eig.eigenvalues[i];
        residuals.push(residual(a, &v, theta, &mut scratch));
        values.push(theta);
        vectors.push(v);
    }
    Ok(EigenPairs {
        values,
        vectors,
        residuals,
        method: EigenMethod::Dense,
    })
}

fn residual(a: &CsrMatrix, v: &[f64], theta: f64, scratch: &mut [f64]) -> f64 {
    a.matvec(v, scratch);
    scratch.iter().zip(v).map(|(av, x)| (av - theta * x).powi(2)).sum::<f64>().sqrt()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn normalize(x: &mut [f64]) -> f64 {
    let n = dot(x, x).sqrt();
    if n > 0.0 {
        for v in x.iter_mut() {
            *v /= n;
        }
    }
    n
}

/// Two Gram–Schmidt passes against `basis`.
fn orthogonalize(x: &mut [f64], basis: &[Vec<f64>]) {
    orthogonalize_once(x, basis);
    orthogonalize_once(x, basis);
}

fn orthogonalize_once(x: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let c = dot(b, x);
        axpy(-c, b, x);
    }
}

struct Run {
    ritz_values: Vec<f64>,
    ritz_vectors: Vec<Vec<f64>>,
    /// ‖A y − θ y‖ per Ritz pair.
    estimates: Vec<f64>,
    scale: f64,
    /// True when the Krylov space became invariant.
    exhausted: bool,
}

/// Orthonormal basis V together with A V and the projection Vᵀ A V.
struct Subspace {
    v: Vec<Vec<f64>>,
    av: Vec<Vec<f64>>,
    h: Vec<Vec<f64>>,
}

impl Subspace {
    /// Appends `x` after orthogonalizing it against `locked` and V. Returns
    /// false if nothing new is left.
    fn push<Op: Fn(&[f64], &mut [f64])>(&mut self, op: &Op, mut x: Vec<f64>, locked: &[Vec<f64>]) -> bool {
        let n0 = dot(&x, &x).sqrt();
        if !(n0 > 0.0) {
            return false;
        }
        // repeat until a pass no longer removes most of the norm, otherwise
        // rounding left in a tiny remainder reintroduces locked directions
        let mut before = n0;
        for _ in 0..4 {
            orthogonalize_once(&mut x, locked);
            orthogonalize_once(&mut x, &self.v);
            let after = dot(&x, &x).sqrt();
            let settled = after > 0.7 * before;
            before = after;
            if settled {
                break;
            }
        }
        if before <= 1e-10 * n0 {
            return false;
        }
        normalize(&mut x);
        let mut ax = vec![0.0; x.len()];
        op(&x, &mut ax);
        orthogonalize(&mut ax, locked);
        let col: Vec<f64> = self.v.iter().map(|vi| dot(vi, &ax)).collect();
        for (row, c) in self.h.iter_mut().zip(&col) {
            row.push(*c);
        }
        let mut last = col;
        last.push(dot(&x, &ax));
        self.h.push(last);
        self.v.push(x);
        self.av.push(ax);
        true
    }

    /// Ritz values (ascending) and coefficient vectors.
    fn ritz(&self) -> (Vec<f64>, DMatrix<f64>) {
        let m = self.v.len();
        // symmetrize the accumulated projection
        let h = DMatrix::from_fn(m, m, |i, j| 0.5 * (self.h[i][j] + self.h[j][i]));
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let theta = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let s = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
        (theta, s)
    }

    fn combine(vs: &[Vec<f64>], s: &DMatrix<f64>, col: usize) -> Vec<f64> {
        let mut y = vec![0.0; vs[0].len()];
        for (r, b) in vs.iter().enumerate() {
            axpy(s[(r, col)], b, &mut y);
        }
        y
    }
}

/// Thick-restart Lanczos from `start`, deflated against `locked`: the basis
/// grows by Krylov steps up to `max_basis`, then shrinks to the lowest Ritz
/// vectors and continues from the residual direction.
fn lanczos_run<Op: Fn(&[f64], &mut [f64])>(dim: usize, op: &Op, start: Vec<f64>, locked: &[Vec<f64>], max_basis: usize, want: usize, tol: f64) -> Option<Run> {
    let room = dim - locked.len();
    let max_basis = max_basis.min(room).max(1);
    let keep = (want + 8).max(max_basis / 3).min(max_basis.saturating_sub(2)).max(1);
    let mut sub = Subspace {
        v: Vec::new(),
        av: Vec::new(),
        h: Vec::new(),
    };
    if !sub.push(op, start, locked) {
        return None;
    }
    let mut exhausted = false;
    for _restart in 0..200 {
        while sub.v.len() < max_basis {
            let next = sub.av.last().unwrap().clone();
            if !sub.push(op, next, locked) {
                exhausted = true;
                break;
            }
        }
        let (theta, s) = sub.ritz();
        let m = theta.len();
        let scale = theta.iter().fold(1e-300f64, |a, b| a.max(b.abs()));
        let n_out = if exhausted { m } else { (want + 1).min(m) };
        let mut vectors = Vec::with_capacity(n_out);
        let mut estimates = Vec::with_capacity(n_out);
        let mut first_unconverged: Option<Vec<f64>> = None;
        for (i, &t) in theta.iter().enumerate().take(n_out) {
            let mut y = Subspace::combine(&sub.v, &s, i);
            let ay = Subspace::combine(&sub.av, &s, i);
            let mut r = ay;
            axpy(-t, &y, &mut r);
            let res = dot(&r, &r).sqrt();
            normalize(&mut y);
            if res > tol * scale && first_unconverged.is_none() && i < want {
                first_unconverged = Some(r);
            }
            vectors.push(y);
            estimates.push(res);
        }
        let done = exhausted || m >= room || first_unconverged.is_none();
        if done || _restart == 199 {
            return Some(Run {
                ritz_values: theta[..n_out].to_vec(),
                ritz_vectors: vectors,
                estimates,
                scale,
                exhausted: exhausted || m >= room,
            });
        }
        // shrink to the lowest Ritz vectors; the projection becomes diagonal
        let k = keep.min(m - 1);
        let v: Vec<Vec<f64>> = (0..k).map(|i| Subspace::combine(&sub.v, &s, i)).collect();
        let av: Vec<Vec<f64>> = (0..k).map(|i| Subspace::combine(&sub.av, &s, i)).collect();
        let h = (0..k)
            .map(|i| (0..k).map(|j| if i == j { theta[i] } else { 0.0 }).collect())
            .collect();
        sub = Subspace { v, av, h };
        if !sub.push(op, first_unconverged.unwrap(), locked) {
            exhausted = true;
        }
    }
    None
}

/// The `k` smallest eigenpairs of the symmetric operator `op` on ℝ^dim.
pub fn lanczos_lowest<Op: Fn(&[f64], &mut [f64])>(dim: usize, op: Op, k: usize, opts: &LanczosOptions) -> Result<EigenPairs> {
    if k == 0 || k >= dim {
        return Err(Error::domain(format!("Lanczos needs 0 < k < dim, got k = {k}, dim = {dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let random = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..dim).map(|_| rng.gen::<f64>() - 0.5).collect() };
    let mut locked_values: Vec<f64> = Vec::new();
    let mut locked: Vec<Vec<f64>> = Vec::new();
    let mut start = random(&mut rng);
    let mut worst_estimate = f64::INFINITY;
    let mut verifying = false;
    for _ in 0..opts.max_runs {
        if locked.len() >= dim {
            break;
        }
        let want = if verifying { 1 } else { k - locked.len().min(k) }.max(1);
        let run = match lanczos_run(dim, &op, start, &locked, opts.max_basis, want, opts.tol) {
            Some(r) => r,
            None => {
                start = random(&mut rng);
                continue;
            }
        };
        let tol = opts.tol * run.scale;
        let threshold = locked_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut new_locks = 0;
        for i in 0..run.ritz_values.len() {
            if run.estimates[i] > tol {
                break;
            }
            // once k are locked, only values below the current k-th matter
            if locked.len() >= k && run.ritz_values[i] >= threshold - tol {
                break;
            }
            locked_values.push(run.ritz_values[i]);
            locked.push(run.ritz_vectors[i].clone());
            new_locks += 1;
            if !verifying && locked.len() >= k && !run.exhausted {
                break;
            }
        }
        worst_estimate = worst_estimate.min(run.estimates.first().copied().unwrap_or(f64::INFINITY));
        if locked.len() >= k {
            if verifying && new_locks == 0 {
                return finish(dim, &op, locked_values, locked, k);
            }
            verifying = true;
            start = random(&mut rng);
        } else if new_locks == 0 {
            // restart from the best unconverged Ritz vector, perturbed
            let mut s = run.ritz_vectors[0].clone();
            let noise = random(&mut rng);
            axpy(1e-3, &noise, &mut s);
            start = s;
        } else {
            start = random(&mut rng);
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_runs * opts.max_basis,
        residual: worst_estimate,
    })
}

fn finish<Op: Fn(&[f64], &mut [f64])>(dim: usize, op: &Op, values: Vec<f64>, vectors: Vec<Vec<f64>>, k: usize) -> Result<EigenPairs> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut out = EigenPairs {
        values: Vec::with_capacity(k),
        vectors: Vec::with_capacity(k),
        residuals: Vec::with_capacity(k),
        method: EigenMethod::Lanczos,
    };
    let mut scratch = vec![0.0; dim];
    for &i in order.iter().take(k) {
        let v = &vectors[i];
        op(v, &mut scratch);
        let theta = dot(v, &scratch);
        let r = scratch.iter().zip(v).map(|(av, x)| (av - theta * x).powi(2)).sum::<f64>().sqrt();
        out.values.push(theta);
        out.vectors.push(v.clone());
        out.residuals.push(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut lower = Vec::new();
        for i in 0..n {
            lower.push((i, i, 2.0));
            if i > 0 {
                lower.push((i, i - 1, -1.0));
            }
        }
        CsrMatrix::from_lower(n, &lower).unwrap()
    }

    #[test]
    fn csr_expands_symmetrically() {
        let a = CsrMatrix::from_lower(3, &[(0, 0, 1.0), (2, 0, 4.0), (1, 1, 2.0), (2, 2, 3.0), (2, 0, 1.0)]).unwrap();
        assert_eq!(a.asymmetry(), 0.0);
        let d = a.to_dense();
        assert_eq!(d[(0, 2)], 5.0);
        assert_eq!(d[(2, 0)], 5.0);
        let mut y = vec![0.0; 3];
        a.matvec(&[1.0, 1.0, 1.0], &mut y);
        assert_eq!(y, vec![6.0, 2.0, 8.0]);
        assert!(CsrMatrix::from_lower(2, &[(0, 1, 1.0)]).is_err());
    }

    #[test]
    fn lanczos_matches_dense_on_a_laplacian() {
        let n = 300;
        let a = laplacian_1d(n);
        let dense = lowest_eigenpairs(&a, 5, EigenMethod::Dense, &LanczosOptions::default()).unwrap();
        let iter = lowest_eigenpairs(&a, 5, EigenMethod::Lanczos, &LanczosOptions::default()).unwrap();
        for i in 0..5 {
            let exact = 2.0 - 2.0 * ((i + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((dense.values[i] - exact).abs() < 1e-12);
            assert!((iter.values[i] - exact).abs() < 1e-9, "{} vs {exact}", iter.values[i]);
        }
    }

    #[test]
    fn lanczos_resolves_degenerate_levels() {
        // two copies of the same spectrum: every level is doubly degenerate
        let n = 150;
        let mut lower = Vec::new();
        for i in 0..n {
            for off in [0, n] {
                lower.push((i + off, i + off, 2.0));
                if i > 0 {
                    lower.push((i + off, i + off - 1, -1.0));
                }
            }
        }
        let a = CsrMatrix::from_lower(2 * n, &lower).unwrap();
        let e = lowest_eigenpairs(&a, 4, EigenMethod::Lanczos, &LanczosOptions::default()).unwrap();
        let d = lowest_eigenpairs(&a, 4, EigenMethod::Dense, &LanczosOptions::default()).unwrap();
        for i in 0..4 {
            assert!((e.values[i] - d.values[i]).abs() < 1e-9, "{:?} vs {:?}", e.values, d.values);
        }
    }
}
