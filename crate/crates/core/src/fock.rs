//! Exact diagonalization of pair Hamiltonians on truncated Fock spaces.
//!
//! Modes are ordered p₁, −p₁, p₂, −p₂, …; a basis state is an occupation
//! vector with Σ n ≤ n_max. States are enumerated by increasing total
//! occupation, so pair lowering a_p a_{−p} always maps a state to a smaller
//! index and the Hamiltonian is assembled directly as its lower triangle.
//!
//! Truncation is a Rayleigh–Ritz restriction: every eigenvalue is an upper
//! bound for the corresponding eigenvalue of the untruncated operator, and it
//! decreases as n_max grows.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::bogoliubov::{cp_coefficients, diagonalize, dispersion, pair_frequency, ModePair, QuadraticModel};
use crate::coefficients::{bogoliubov_defect, CoefficientTable};
use crate::error::{Error, Result};
use crate::lanczos::{lowest_eigenpairs, CsrMatrix, EigenMethod, EigenPairs, LanczosOptions, DENSE_LIMIT};
use crate::lattice::{ladder, LadderMode};

pub const DEFAULT_NONZERO_BUDGET: usize = 2_000_000;

/// C(n, k) as f64, exact while it fits in 53 bits.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0f64;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c.round()
}

#[derive(Debug, Clone)]
pub struct FockBasis {
    pairs: usize,
    n_max: u32,
    // row-major, 2M entries per state
    occupations: Vec<u16>,
    index: HashMap<Vec<u16>, usize>,
}

impl FockBasis {
    /// Dimension C(2M + n_max, n_max) without enumerating.
    pub fn dimension_of(pairs: usize, n_max: u32) -> f64 {
        binomial(2 * pairs as u64 + n_max as u64, n_max as u64)
    }

    pub fn new(pairs: usize, n_max: u32) -> Result<Self> {
        if pairs == 0 {
            return Err(Error::domain("need at least one mode pair"));
        }
        if n_max < 2 || n_max > u16::MAX as u32 {
            return Err(Error::domain(format!("n_max must lie in [2, {}], got {n_max}", u16::MAX)));
        }
        let modes = 2 * pairs;
        let expected = Self::dimension_of(pairs, n_max);
        if expected > 5e7 {
            return Err(Error::DimensionBudget {
                nonzeros: expected as usize,
                budget: 50_000_000,
            });
        }
        let mut occupations = Vec::with_capacity(expected as usize * modes);
        let mut current = vec![0u16; modes];
        for total in 0..=n_max {
            compositions(&mut current, 0, total as u16, &mut occupations);
        }
        let dim = occupations.len() / modes;
        if dim as f64 != expected {
            return Err(Error::domain(format!("enumerated {dim} states, expected {expected}")));
        }
        let index = occupations.chunks(modes).enumerate().map(|(i, s)| (s.to_vec(), i)).collect();
        Ok(Self {
            pairs,
            n_max,
            occupations,
            index,
        })
    }

    pub fn pairs(&self) -> usize {
        self.pairs
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.occupations.len() / (2 * self.pairs)
    }

    pub fn state(&self, i: usize) -> &[u16] {
        let m = 2 * self.pairs;
        &self.occupations[i * m..(i + 1) * m]
    }

    pub fn lookup(&self, occ: &[u16]) -> Option<usize> {
        self.index.get(occ).copied()
    }

    /// d_i = n_{p_i} − n_{−p_i} per pair.
    pub fn sector(&self, i: usize) -> Vec<i32> {
        self.state(i).chunks(2).map(|c| c[0] as i32 - c[1] as i32).collect()
    }

    pub fn total(&self, i: usize) -> u32 {
        self.state(i).iter().map(|&n| n as u32).sum()
    }
}

// Lexicographically decreasing compositions of `total` into the slots from
// `pos` on, appended to `out`.
fn compositions(current: &mut [u16], pos: usize, total: u16, out: &mut Vec<u16>) {
    if pos + 1 == current.len() {
        current[pos] = total;
        out.extend_from_slice(current);
        current[pos] = 0;
        return;
    }
    for n in (0..=total).rev() {
        current[pos] = n;
        compositions(current, pos + 1, total - n, out);
    }
    current[pos] = 0;
}

#[derive(Debug, Clone)]
pub struct SparseHamiltonian {
    /// Lower triangle (row ≥ col), the canonical symmetric storage.
    pub entries: Vec<(usize, usize, f64)>,
    pub matrix: CsrMatrix,
    /// State indices grouped by d-vector, in increasing d order.
    pub blocks: Vec<Vec<usize>>,
}

impl SparseHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// H = Σ_pairs [F(a*_p a_p + a*_{−p}a_{−p}) + G(a*_p a*_{−p} + a_p a_{−p})].
pub fn build(model: &QuadraticModel<f64>, n_max: u32) -> Result<(FockBasis, SparseHamiltonian)> {
    build_with_budget(model, n_max, DEFAULT_NONZERO_BUDGET)
}

pub fn build_with_budget(model: &QuadraticModel<f64>, n_max: u32, budget: usize) -> Result<(FockBasis, SparseHamiltonian)> {
    let m = model.len();
    // one diagonal entry per state plus at most one lowering entry per pair
    let estimate = FockBasis::dimension_of(m, n_max) * (1.0 + m as f64);
    if estimate > budget as f64 {
        return Err(Error::DimensionBudget {
            nonzeros: estimate.min(usize::MAX as f64) as usize,
            budget,
        });
    }
    let basis = FockBasis::new(m, n_max)?;
    let rows: Vec<Vec<(usize, usize, f64)>> = (0..basis.dim())
        .into_par_iter()
        .map(|i| {
            let s = basis.state(i);
            let mut row = Vec::with_capacity(m + 1);
            let mut lowered = s.to_vec();
            for (k, pair) in model.pairs.iter().enumerate() {
                let (a, b) = (s[2 * k], s[2 * k + 1]);
                if a > 0 && b > 0 && pair.g != 0.0 {
                    lowered[2 * k] -= 1;
                    lowered[2 * k + 1] -= 1;
                    let j = basis.lookup(&lowered).expect("lowered state lies in the basis");
                    row.push((i, j, pair.g * ((a as f64) * (b as f64)).sqrt()));
                    lowered[2 * k] += 1;
                    lowered[2 * k + 1] += 1;
                }
            }
            let diag: f64 = model
                .pairs
                .iter()
                .enumerate()
                .map(|(k, p)| p.f * (s[2 * k] as f64 + s[2 * k + 1] as f64))
                .sum();
            row.push((i, i, diag));
            row
        })
        .collect();
    let entries: Vec<_> = rows.into_iter().flatten().collect();
    let matrix = CsrMatrix::from_lower(basis.dim(), &entries)?;
    let mut sectors: BTreeMap<Vec<i32>, Vec<usize>> = BTreeMap::new();
    for i in 0..basis.dim() {
        sectors.entry(basis.sector(i)).or_default().push(i);
    }
    let blocks = sectors.into_values().collect();
    Ok((basis, SparseHamiltonian { entries, matrix, blocks }))
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockReport {
    pub sectors: usize,
    /// Off-diagonal entries joining states with different d-vectors.
    pub cross_entries: usize,
    pub cross_max: f64,
    /// Every off-diagonal entry is a single (+1, +1) pair transition.
    pub pair_transitions_only: bool,
}

/// Structural check that H is block diagonal in the d-vectors.
pub fn block_structure(basis: &FockBasis, h: &SparseHamiltonian) -> BlockReport {
    let mut sectors: BTreeMap<Vec<i32>, usize> = BTreeMap::new();
    for i in 0..basis.dim() {
        *sectors.entry(basis.sector(i)).or_default() += 1;
    }
    let mut report = BlockReport {
        sectors: sectors.len(),
        cross_entries: 0,
        cross_max: 0.0,
        pair_transitions_only: true,
    };
    for &(r, c, v) in &h.entries {
        if r == c {
            continue;
        }
        if basis.sector(r) != basis.sector(c) {
            report.cross_entries += 1;
            report.cross_max = report.cross_max.max(v.abs());
        }
        let diff: Vec<i32> = basis
            .state(r)
            .iter()
            .zip(basis.state(c))
            .map(|(&a, &b)| a as i32 - b as i32)
            .collect();
        let changed: Vec<usize> = (0..diff.len()).filter(|&k| diff[k] != 0).collect();
        let ok = changed.len() == 2 && changed[0].is_multiple_of(2) && changed[1] == changed[0] + 1 && diff[changed[0]] == 1 && diff[changed[1]] == 1;
        if !ok {
            report.pair_transitions_only = false;
        }
    }
    report
}

/// The `k` lowest eigenvalues (ascending). `Auto` below the Lanczos
/// threshold solves each d-sector block densely and merges; `Dense` and
/// `Lanczos` work on the full matrix.
pub fn lowest_eigs(h: &SparseHamiltonian, k: usize, method: EigenMethod, opts: &LanczosOptions) -> Result<EigenPairs> {
    if k == 0 || k >= h.dim() {
        return Err(Error::domain(format!("need 1 ≤ k < {}, got {k}", h.dim())));
    }
    if method == EigenMethod::Auto && h.dim() <= DENSE_LIMIT {
        return blockwise_dense(h, k);
    }
    lowest_eigenpairs(&h.matrix, k, method, opts)
}

fn blockwise_dense(h: &SparseHamiltonian, k: usize) -> Result<EigenPairs> {
    let dim = h.dim();
    let mut owner = vec![(0usize, 0usize); dim];
    for (b, members) in h.blocks.iter().enumerate() {
        for (local, &i) in members.iter().enumerate() {
            owner[i] = (b, local);
        }
    }
    let mut block_entries: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); h.blocks.len()];
    for &(r, c, v) in &h.entries {
        let (br, lr) = owner[r];
        let (bc, lc) = owner[c];
        if br != bc {
            return Err(Error::domain("entry couples two d-sectors"));
        }
        block_entries[br].push((lr, lc, v));
    }
    let solved = h
        .blocks
        .par_iter()
        .zip(block_entries.par_iter())
        .map(|(members, entries)| {
            let block = CsrMatrix::from_lower(members.len(), entries)?;
            lowest_eigenpairs(&block, k.min(members.len()), EigenMethod::Dense, &LanczosOptions::default())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut all: Vec<(f64, usize, usize)> = solved
        .iter()
        .enumerate()
        .flat_map(|(b, e)| e.values.iter().enumerate().map(move |(j, &v)| (v, b, j)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut out = EigenPairs {
        values: Vec::with_capacity(k),
        vectors: Vec::with_capacity(k),
        residuals: Vec::with_capacity(k),
        method: EigenMethod::Dense,
    };
    for &(v, b, j) in all.iter().take(k) {
        let mut full = vec![0.0; dim];
        for (local, &i) in h.blocks[b].iter().enumerate() {
            full[i] = solved[b].vectors[j][local];
        }
        out.values.push(v);
        out.vectors.push(full);
        out.residuals.push(solved[b].residuals[j]);
    }
    Ok(out)
}

/// Eigenvalues of the block with the given d-vector.
pub fn sector_eigs(basis: &FockBasis, h: &SparseHamiltonian, d: &[i32], k: usize, method: EigenMethod, opts: &LanczosOptions) -> Result<EigenPairs> {
    if d.len() != basis.pairs() {
        return Err(Error::domain("sector vector must have one entry per pair"));
    }
    let members: Vec<usize> = (0..basis.dim()).filter(|&i| basis.sector(i) == d).collect();
    if members.is_empty() {
        return Err(Error::domain("empty sector"));
    }
    let local: HashMap<usize, usize> = members.iter().enumerate().map(|(a, &i)| (i, a)).collect();
    let entries: Vec<_> = h
        .entries
        .iter()
        .filter_map(|&(r, c, v)| Some((*local.get(&r)?, *local.get(&c)?, v)))
        .collect();
    let block = CsrMatrix::from_lower(members.len(), &entries)?;
    let k = k.min(members.len());
    lowest_eigenpairs(&block, k, method, opts)
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivityReport {
    /// Smallest gauge-fixed component in the d = 0 sector, relative to the
    /// largest.
    pub min_relative_component: f64,
    /// Weight of the ground vector outside d = 0.
    pub off_sector_weight: f64,
    pub positive: bool,
}

/// Perron–Frobenius check. After multiplying each basis vector by
/// Π_i sign(−G_i)^{n_{p_i}} every off-diagonal entry is ≤ 0, so the ground
/// state of the (connected) d = 0 block has one sign.
pub fn ground_state_positivity(model: &QuadraticModel<f64>, basis: &FockBasis, ground: &[f64]) -> PositivityReport {
    let mut comps = Vec::new();
    let mut off = 0.0;
    for (i, &x) in ground.iter().enumerate() {
        if basis.sector(i).iter().any(|&d| d != 0) {
            off += x * x;
            continue;
        }
        let s = basis.state(i);
        let mut sign = 1.0;
        for (k, p) in model.pairs.iter().enumerate() {
            if p.g > 0.0 && s[2 * k] % 2 == 1 {
                sign = -sign;
            }
        }
        comps.push(sign * x);
    }
    let big = comps.iter().fold(0.0f64, |m, &c| if c.abs() > m.abs() { c } else { m });
    let min_rel = comps.iter().map(|&c| c / big).fold(f64::INFINITY, f64::min);
    PositivityReport {
        min_relative_component: min_rel,
        off_sector_weight: off,
        positive: min_rel >= -1e-12,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EdComparison {
    pub pairs: usize,
    pub n_max: u32,
    pub dimension: usize,
    pub method: EigenMethod,
    pub shift: f64,
    pub frequencies: Vec<f64>,
    pub eigs: Vec<f64>,
    pub analytic: Vec<f64>,
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    /// max α², the geometric decay ratio of the truncation error per
    /// n_max → n_max + 2.
    pub truncation_ratio: f64,
    /// Eigenvalues at n_max − 2 (absent when n_max < 4).
    pub eigs_previous: Option<Vec<f64>>,
    pub extrapolated: Option<Vec<f64>>,
    pub extrapolated_max_deviation: Option<f64>,
    pub residuals: Vec<f64>,
}

/// Analytic levels shift + Σ n e over the modes p_i, −p_i, lowest `levels`
/// counted with multiplicity.
pub fn analytic_levels(model: &QuadraticModel<f64>, levels: usize) -> Result<Vec<f64>> {
    let diag = diagonalize(model)?;
    let modes: Vec<LadderMode> = diag
        .frequencies
        .iter()
        .enumerate()
        .flat_map(|(i, &e)| {
            [
                LadderMode { label: format!("p{}", i + 1), energy: e },
                LadderMode { label: format!("-p{}", i + 1), energy: e },
            ]
        })
        .collect();
    let e_min = diag.frequencies.iter().copied().fold(f64::INFINITY, f64::min);
    let mut zeta = e_min;
    loop {
        let found = ladder(&modes, zeta, 1_000_000)?;
        let count: usize = found.iter().map(|l| l.degeneracy).sum();
        if count >= levels {
            let mut out = Vec::with_capacity(levels);
            for l in found {
                for _ in 0..l.degeneracy {
                    out.push(diag.shift + l.value);
                }
            }
            out.truncate(levels);
            return Ok(out);
        }
        zeta += e_min;
    }
}

pub fn compare_analytic(model: &QuadraticModel<f64>, n_max: u32, levels: usize, method: EigenMethod) -> Result<EdComparison> {
    compare_analytic_with(model, n_max, levels, method, &LanczosOptions::default())
}

pub fn compare_analytic_with(
    model: &QuadraticModel<f64>,
    n_max: u32,
    levels: usize,
    method: EigenMethod,
    opts: &LanczosOptions,
) -> Result<EdComparison> {
    let opts = *opts;
    let diag = diagonalize(model)?;
    let (basis, h) = build(model, n_max)?;
    let levels = levels.min(basis.dim() - 1).max(1);
    let eig = lowest_eigs(&h, levels, method, &opts)?;
    let analytic = analytic_levels(model, levels)?;
    let deviations: Vec<f64> = eig.values.iter().zip(&analytic).map(|(a, b)| a - b).collect();
    let max_deviation = deviations.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let ratio = model
        .pairs
        .iter()
        .map(|p| cp_coefficients(p.f, p.g).map(|c| c.alpha * c.alpha))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0f64, f64::max);
    let (eigs_previous, extrapolated) = if n_max >= 4 {
        let (b2, h2) = build(model, n_max - 2)?;
        let k2 = levels.min(b2.dim() - 1);
        let prev = lowest_eigs(&h2, k2, method, &opts)?.values;
        let extra: Vec<f64> = eig
            .values
            .iter()
            .zip(&prev)
            .map(|(&e, &ep)| if ratio == 0.0 { e } else { (e - ratio * ep) / (1.0 - ratio) })
            .collect();
        (Some(prev), Some(extra))
    } else {
        (None, None)
    };
    let extrapolated_max_deviation = extrapolated
        .as_ref()
        .map(|x| x.iter().zip(&analytic).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())));
    Ok(EdComparison {
        pairs: model.len(),
        n_max,
        dimension: basis.dim(),
        method: eig.method,
        shift: diag.shift,
        frequencies: diag.frequencies,
        eigs: eig.values,
        analytic,
        deviations,
        max_deviation,
        truncation_ratio: ratio,
        eigs_previous,
        extrapolated,
        extrapolated_max_deviation,
        residuals: eig.residuals,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GpSliceStep {
    pub n_max: u32,
    pub ground_error: f64,
    pub gap_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GpSliceShell {
    pub m: u64,
    pub p_sq: f64,
    pub f: f64,
    pub g: f64,
    pub alpha: f64,
    pub shift: f64,
    pub frequency: f64,
    pub ed_ground: f64,
    pub ed_gap: f64,
    pub ground_error: f64,
    pub gap_error: f64,
    /// √(p⁴ + 8πp²).
    pub dispersion: f64,
    pub dispersion_deviation: f64,
    /// |√(F² − G²) − √(p⁴ + 8πp²)| as reported by the coefficient module.
    pub defect_bound: f64,
    pub within_defect: bool,
    /// Errors at smaller n_max, for the convergence trend.
    pub history: Vec<GpSliceStep>,
    pub converging: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GpSliceReport {
    pub n: u64,
    pub n_max: u32,
    pub shells: Vec<GpSliceShell>,
    /// Σ over shells of (ED ground − shift); pairs decouple, so this is the
    /// ground error of the joint model.
    pub total_ground_error: f64,
    pub max_gap_error: f64,
}

/// ED on one {p, −p} pair per tabulated shell, for the lowest `shells`
/// shells of the table.
pub fn gp_slice_check(table: &CoefficientTable, shells: usize, n_max: u32) -> Result<GpSliceReport> {
    if shells == 0 || shells > 3 {
        return Err(Error::domain("gp_slice_check takes between 1 and 3 shells"));
    }
    if table.shells.len() < shells {
        return Err(Error::domain(format!("table has only {} shells", table.shells.len())));
    }
    let defects = bogoliubov_defect(table)?;
    let opts = LanczosOptions::default();
    let mut out = Vec::with_capacity(shells);
    for s in table.shells.iter().take(shells) {
        let model = QuadraticModel::new(vec![ModePair::new(format!("m{}", s.m), s.f, s.g)?])?;
        let diag = diagonalize(&model)?;
        let e = pair_frequency(s.f, s.g)?;
        let mut history = Vec::new();
        let mut last = None;
        let mut steps: Vec<u32> = [n_max.saturating_sub(8), n_max.saturating_sub(4), n_max]
            .into_iter()
            .filter(|&n| n >= 2)
            .collect();
        steps.dedup();
        for &nm in &steps {
            let (_, h) = build(&model, nm)?;
            let eig = lowest_eigs(&h, 2, EigenMethod::Auto, &opts)?;
            let ground_error = eig.values[0] - diag.shift;
            let gap = eig.values[1] - eig.values[0];
            history.push(GpSliceStep {
                n_max: nm,
                ground_error,
                gap_error: gap - e,
            });
            last = Some((eig.values[0], gap));
        }
        let (ed_ground, ed_gap) = last.expect("at least one step");
        let converging = history
            .windows(2)
            .all(|w| w[1].ground_error.abs() <= w[0].ground_error.abs() + 1e-13 * e.max(1.0));
        let disp = dispersion(s.p_sq, 1.0);
        let defect_bound = defects.shells.iter().find(|d| d.m == s.m).map(|d| d.defect).unwrap_or(f64::INFINITY);
        let gap_error = ed_gap - e;
        let dispersion_deviation = (ed_gap - disp).abs();
        out.push(GpSliceShell {
            m: s.m,
            p_sq: s.p_sq,
            f: s.f,
            g: s.g,
            alpha: s.alpha,
            shift: diag.shift,
            frequency: e,
            ed_ground,
            ed_gap,
            ground_error: ed_ground - diag.shift,
            gap_error,
            dispersion: disp,
            dispersion_deviation,
            defect_bound,
            within_defect: dispersion_deviation <= defect_bound + gap_error.abs(),
            history,
            converging,
        });
    }
    Ok(GpSliceReport {
        n: table.params.n,
        n_max,
        total_ground_error: out.iter().map(|s| s.ground_error).sum(),
        max_gap_error: out.iter().fold(0.0f64, |m, s| m.max(s.gap_error.abs())),
        shells: out,
    })
}

/// Ground energies for n_max = lo, lo + step, …, hi.
pub fn ground_energy_sweep(model: &QuadraticModel<f64>, lo: u32, hi: u32, step: u32) -> Result<Vec<(u32, f64)>> {
    let opts = LanczosOptions::default();
    let mut out = Vec::new();
    let mut n = lo.max(2);
    while n <= hi {
        let (_, h) = build(model, n)?;
        out.push((n, lowest_eigs(&h, 1, EigenMethod::Auto, &opts)?.values[0]));
        n += step.max(1);
    }
    Ok(out)
}
