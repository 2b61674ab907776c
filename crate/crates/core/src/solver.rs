//! Damped Richardson iteration on Gramian systems with adaptive growth of
//! the active index set.
//!
//! The Gramian of a truncated quarklet frame is positive semidefinite and
//! increasingly ill conditioned, so systems are solved only on a small
//! active set: relax there, extend by zero, inspect the full residual, and
//! admit the indices carrying the largest residual entries (together with
//! whatever ancestors and lower degrees tree validity demands).

use crate::coeff::{CoefficientSequence, FrameSlot};
use crate::error::{Error, Result};
use crate::gramian::{assemble_rhs, truncated_index_set};
use crate::haar::{inner_product, WeightRule};
use crate::index::Bounds;
use crate::target::TargetFunction;
use nalgebra::{DMatrix, DVector};
use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

const STAGNATION_FRACTION: f64 = 1e-3;

/// Shape of the initial active index set.
///
/// Starting from the full-degree tree matters for approximation quality:
/// the first relaxation then has to spend polynomial degrees on the smooth
/// part of the target, and later residual-driven growth only adds the fine
/// wavelet scales near rough regions. A degree-zero start never develops
/// degree mass because the orthonormal Haar part absorbs the whole residual
/// scale by scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialSet {
    /// Wavelet tree up to the level, degree zero only (plus the degree-zero
    /// generator slot).
    WaveletTree { levels: u32 },
    /// Wavelet tree up to the level carrying all degrees up to the bounds'
    /// maximum, plus all generator slots.
    FullDegreeTree { levels: u32 },
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Relaxation damping; `None` selects `1/lambda_max` from a power
    /// iteration estimate, safely inside the stable interval.
    pub damping: Option<f64>,
    /// Target for the full residual norm `||Gc - b||_2`.
    pub residual_tol: f64,
    /// Iteration cap per relaxation sweep.
    pub max_iterations: usize,
    /// Indices admitted per outer round, before closure completion.
    pub growth_batch: usize,
    /// Initial active set policy.
    pub initial_set: InitialSet,
    /// Cap on outer growth rounds.
    pub max_rounds: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            damping: None,
            residual_tol: 1e-6,
            max_iterations: 400,
            growth_batch: 10,
            initial_set: InitialSet::FullDegreeTree { levels: 2 },
            max_rounds: 200,
        }
    }
}

/// Result of one relaxation phase.
#[derive(Debug, Clone)]
pub struct Relaxation {
    pub coefficients: DVector<f64>,
    /// Residual norms, starting with the initial residual.
    pub residual_history: Vec<f64>,
    pub converged: bool,
}

/// Euclidean norm of `G c - b`.
pub fn residual_norm(g: &DMatrix<f64>, c: &DVector<f64>, b: &DVector<f64>) -> Result<f64> {
    if g.nrows() != b.len() || g.ncols() != c.len() || !g.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "G is {}x{}, c has {}, b has {}",
            g.nrows(),
            g.ncols(),
            c.len(),
            b.len()
        )));
    }
    Ok((g * c - b).norm())
}

fn estimate_largest_eigenvalue(g: &DMatrix<f64>) -> f64 {
    let n = g.nrows();
    let mut v = DVector::from_fn(n, |i, _| 1.0 + (i % 3) as f64);
    let mut estimate = 0.0;
    for _ in 0..50 {
        let next = g * &v;
        let norm = next.norm();
        if norm == 0.0 {
            return 0.0;
        }
        estimate = v.dot(&next) / v.dot(&v);
        v = next / norm;
    }
    estimate
}

/// Damped Richardson iteration `c <- c + omega (b - G c)` from the zero
/// vector. The residual norm must not increase within the sweep; a damping
/// outside `(0, 2/||G||_2)` (estimated) is rejected before iterating.
pub fn richardson(g: &DMatrix<f64>, b: &DVector<f64>, config: &SolverConfig) -> Result<Relaxation> {
    let start = DVector::zeros(b.len());
    richardson_from(g, b, start, config)
}

fn richardson_from(
    g: &DMatrix<f64>,
    b: &DVector<f64>,
    start: DVector<f64>,
    config: &SolverConfig,
) -> Result<Relaxation> {
    let mut c = start;
    residual_norm(g, &c, b)?;
    let lambda = estimate_largest_eigenvalue(g);
    let omega = match config.damping {
        Some(omega) => {
            let limit = if lambda > 0.0 { 2.0 / lambda } else { f64::MAX };
            if omega <= 0.0 || omega >= limit {
                return Err(Error::DampingOutOfRange { omega, limit });
            }
            omega
        }
        None => {
            if lambda == 0.0 {
                // zero matrix: any damping works and the start is a solution
                1.0
            } else {
                1.0 / lambda
            }
        }
    };

    let mut residual = b - g * &c;
    let mut norm = residual.norm();
    let mut history = vec![norm];
    let mut converged = norm <= config.residual_tol;
    for iteration in 0..config.max_iterations {
        if converged {
            break;
        }
        c += omega * &residual;
        residual = b - g * &c;
        let next = residual.norm();
        if next > norm * (1.0 + 1e-12) + 1e-300 {
            return Err(Error::ResidualIncrease { iteration });
        }
        norm = next;
        history.push(norm);
        converged = norm <= config.residual_tol;
    }
    Ok(Relaxation {
        coefficients: c,
        residual_history: history,
        converged,
    })
}

/// One row of the outer-loop log.
#[derive(Debug, Clone, Copy)]
pub struct RoundRecord {
    pub round: usize,
    pub active_size: usize,
    pub residual: f64,
}

/// Outcome of an adaptive coefficient computation.
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Final coefficients, zero-extended over the truncated index set.
    pub coefficients: CoefficientSequence,
    /// Full residual norm after every outer round.
    pub residual_history: Vec<f64>,
    pub active_sizes: Vec<usize>,
    pub converged: bool,
    pub rounds: usize,
}

impl SolveReport {
    pub fn log_csv(&self) -> String {
        let mut out = String::from("round,active_size,residual\n");
        for (round, (size, res)) in self
            .active_sizes
            .iter()
            .zip(&self.residual_history)
            .enumerate()
        {
            writeln!(out, "{},{},{}", round + 1, size, res).expect("string write");
        }
        out
    }
}

/// Slots that must accompany `slot` when it is admitted: every degree of its
/// node up to `degrees` (an admitted node may spend polynomial enrichment in
/// later stages only if its degree slots exist), ancestors at degree zero for
/// tree validity, and generator slots in lockstep with the root.
fn closure_of(slot: &FrameSlot, degrees: u32) -> Vec<FrameSlot> {
    let mut needed = Vec::new();
    for p in 0..=slot.degree().max(degrees) {
        match slot {
            FrameSlot::Generator { .. } => {
                needed.push(FrameSlot::generator(p));
                needed.push(FrameSlot::quarklet(p, crate::index::ROOT));
            }
            FrameSlot::Quarklet(qi) => {
                needed.push(FrameSlot::quarklet(p, qi.wavelet()));
                if qi.wavelet().is_root() {
                    needed.push(FrameSlot::generator(p));
                }
            }
        }
    }
    if let FrameSlot::Quarklet(qi) = slot {
        let mut node = qi.wavelet();
        while let Some(parent) = node.parent() {
            needed.push(FrameSlot::quarklet(0, parent));
            if parent.is_root() {
                needed.push(FrameSlot::generator(0));
            }
            node = parent;
        }
    }
    needed
}

/// Enumerates the positions of all slots whose support intersects the
/// support of `slot`: its ancestors (including the generator slots), itself,
/// and all descendants, each at every degree.
fn related_positions(
    slot: &FrameSlot,
    bounds: Bounds,
    position: &impl Fn(&FrameSlot) -> usize,
) -> Vec<usize> {
    let mut out = Vec::new();
    let degrees = 0..=bounds.p_max;
    match slot {
        FrameSlot::Generator { .. } => {
            // the generator overlaps everything
            let total = (bounds.p_max as usize + 1) * ((2usize << bounds.j_max) - 1)
                + bounds.p_max as usize
                + 1;
            out.extend(0..total);
        }
        FrameSlot::Quarklet(qi) => {
            for p in degrees.clone() {
                out.push(position(&FrameSlot::generator(p)));
            }
            let mut node = qi.wavelet();
            loop {
                for p in degrees.clone() {
                    out.push(position(&FrameSlot::quarklet(p, node)));
                }
                match node.parent() {
                    Some(parent) => node = parent,
                    None => break,
                }
            }
            let (j0, k0) = (qi.wavelet().level(), qi.wavelet().translation());
            for j in j0 + 1..=bounds.j_max {
                let gap = j - j0;
                for k in (k0 << gap)..((k0 + 1) << gap) {
                    let idx = crate::index::WaveletIndex::new(j, k).expect("in range");
                    for p in degrees.clone() {
                        out.push(position(&FrameSlot::quarklet(p, idx)));
                    }
                }
            }
        }
    }
    out
}

/// Computes a quarklet coefficient representation of `target` by relaxing
/// `G c = b` on a growing active set until the full residual over the
/// truncated index set drops below the tolerance, the improvement per round
/// stagnates, or the budget runs out.
pub fn adaptive_coefficients(
    target: &dyn TargetFunction,
    bounds: Bounds,
    rule: &WeightRule,
    config: &SolverConfig,
) -> Result<SolveReport> {
    let indices = truncated_index_set(bounds);
    let n = indices.len();
    let positions: HashMap<FrameSlot, usize> =
        indices.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let position = |slot: &FrameSlot| positions[slot];
    let weights: Vec<f64> = indices.iter().map(|s| rule.weight(s.degree())).collect();
    let full_rhs = assemble_rhs(target, &indices, rule)?;

    // initial active set per policy
    let mut active: Vec<usize> = Vec::new();
    let mut is_active = vec![false; n];
    let admit = |slot: &FrameSlot, active: &mut Vec<usize>, is_active: &mut Vec<bool>| {
        let pos = position(slot);
        if !is_active[pos] {
            is_active[pos] = true;
            active.push(pos);
        }
    };
    let (levels, degrees) = match config.initial_set {
        InitialSet::WaveletTree { levels } => (levels, 0),
        InitialSet::FullDegreeTree { levels } => (levels, bounds.p_max),
    };
    for p in 0..=degrees {
        admit(&FrameSlot::generator(p), &mut active, &mut is_active);
    }
    for j in 0..=bounds.j_max.min(levels) {
        for k in 0..1u64 << j {
            let idx = crate::index::WaveletIndex::new(j, k).expect("in range");
            for p in 0..=degrees {
                admit(
                    &FrameSlot::quarklet(p, idx),
                    &mut active,
                    &mut is_active,
                );
            }
        }
    }
    active.sort_unstable();

    // active Gramian, extended incrementally as the set grows
    let mut g_active = DMatrix::zeros(active.len(), active.len());
    for (a, &pa) in active.iter().enumerate() {
        for (b, &pb) in active.iter().enumerate().skip(a) {
            let v = weights[pa] * weights[pb] * inner_product(&indices[pa], &indices[pb]);
            g_active[(a, b)] = v;
            g_active[(b, a)] = v;
        }
    }

    let mut solution = DVector::zeros(active.len());
    let mut residual_history = Vec::new();
    let mut active_sizes = Vec::new();
    let mut converged = false;
    let mut rounds = 0;

    for _round in 0..config.max_rounds {
        rounds += 1;
        let b_active = DVector::from_fn(active.len(), |i, _| full_rhs[active[i]]);
        let relaxed = richardson_from(&g_active, &b_active, solution.clone(), config)?;
        solution = relaxed.coefficients;

        // zero extension and full residual over the truncated set
        let mut full_residual: Vec<f64> = (0..n).map(|m| -full_rhs[m]).collect();
        for (i, &pos) in active.iter().enumerate() {
            let c = solution[i];
            if c == 0.0 {
                continue;
            }
            for m in related_positions(&indices[pos], bounds, &position) {
                full_residual[m] +=
                    c * weights[m] * weights[pos] * inner_product(&indices[m], &indices[pos]);
            }
        }
        let full_norm = full_residual.iter().map(|r| r * r).sum::<f64>().sqrt();
        residual_history.push(full_norm);
        active_sizes.push(active.len());

        if full_norm <= config.residual_tol {
            converged = true;
            break;
        }
        if residual_history.len() >= 2 {
            let previous = residual_history[residual_history.len() - 2];
            if previous > 0.0 && (previous - full_norm) / previous < STAGNATION_FRACTION {
                break;
            }
        }
        if active.len() == n {
            break;
        }

        // admit the largest residual entries with their closures
        let mut candidates: Vec<usize> = (0..n)
            .filter(|m| !is_active[*m] && full_residual[*m] != 0.0)
            .collect();
        if candidates.is_empty() {
            break;
        }
        candidates.sort_unstable_by(|a, b| {
            full_residual[*b]
                .abs()
                .total_cmp(&full_residual[*a].abs())
                .then(a.cmp(b))
        });
        let mut admitted = BTreeSet::new();
        for m in candidates.into_iter().take(config.growth_batch) {
            admitted.insert(m);
            for needed in closure_of(&indices[m], degrees) {
                let pos = position(&needed);
                if !is_active[pos] {
                    admitted.insert(pos);
                }
            }
        }
        let fresh: Vec<usize> = admitted.into_iter().filter(|m| !is_active[*m]).collect();

        // grow the matrix and warm-start vector
        let old_len = active.len();
        let new_len = old_len + fresh.len();
        let mut grown = DMatrix::zeros(new_len, new_len);
        grown.view_mut((0, 0), (old_len, old_len)).copy_from(&g_active);
        for (offset, &pm) in fresh.iter().enumerate() {
            is_active[pm] = true;
            active.push(pm);
            let row = old_len + offset;
            for (col, &pc) in active.iter().enumerate() {
                let v = weights[pm] * weights[pc] * inner_product(&indices[pm], &indices[pc]);
                grown[(row, col)] = v;
                grown[(col, row)] = v;
            }
        }
        g_active = grown;
        solution = solution.clone().resize_vertically(new_len, 0.0);
    }

    let mut coefficients = CoefficientSequence::new(bounds);
    for (i, &pos) in active.iter().enumerate() {
        if solution[i] != 0.0 {
            coefficients.set(indices[pos], solution[i])?;
        }
    }
    Ok(SolveReport {
        coefficients,
        residual_history,
        active_sizes,
        converged,
        rounds,
    })
}
