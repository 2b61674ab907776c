//! Haar quarklets: pointwise evaluation, frame weights, exact inner products
//! and L2 error measurement.
//!
//! The degree-`p` quark is `x^p` on `[0, 1)`; the degree-`p` quarklet glues
//! two scaled copies with opposite signs, `(2x)^p` on the left half and
//! `-(2x-1)^p` on the right. All half-open pieces are dyadic monomials, so
//! inner products reduce to the moment table `int_0^1 u^i psi_p(u) du` and
//! binomial sums with dyadic ratios; no quadrature is involved.

use crate::coeff::{CoefficientSequence, FrameSlot};
use crate::error::{Error, Result};
use crate::quad::integrate_adaptive;
use crate::target::TargetFunction;
use std::collections::HashMap;

/// Quark evaluation: `x^p` on `[0, 1)`, zero elsewhere (right-open support).
pub fn quark_eval(p: u32, x: f64) -> f64 {
    if (0.0..1.0).contains(&x) {
        x.powi(p as i32)
    } else {
        0.0
    }
}

/// Reference quarklet on `[0, 1)`: `(2t)^p` left, `-(2t-1)^p` right.
pub fn quarklet_prototype(p: u32, t: f64) -> f64 {
    if (0.0..0.5).contains(&t) {
        (2.0 * t).powi(p as i32)
    } else if (0.5..1.0).contains(&t) {
        -(2.0 * t - 1.0).powi(p as i32)
    } else {
        0.0
    }
}

/// Scaled and shifted quarklet `2^{j/2} psi_p(2^j x - k)`. Level `-1`
/// evaluates the translated quark instead.
pub fn quarklet_eval(p: u32, j: i64, k: u64, x: f64) -> f64 {
    if j < 0 {
        return quark_eval(p, x - k as f64);
    }
    let scale = 2.0f64.powi(j as i32);
    scale.sqrt() * quarklet_prototype(p, scale * x - k as f64)
}

/// Evaluation addressed by a frame slot.
pub fn slot_eval(slot: &FrameSlot, x: f64) -> f64 {
    match slot {
        FrameSlot::Generator { degree } => quark_eval(*degree, x),
        FrameSlot::Quarklet(qi) => quarklet_eval(
            qi.degree(),
            qi.wavelet().level() as i64,
            qi.wavelet().translation(),
            x,
        ),
    }
}

/// Piece boundaries of a slot inside `[0, 1]`.
pub fn slot_breakpoints(slot: &FrameSlot) -> Vec<f64> {
    match slot {
        FrameSlot::Generator { .. } => vec![0.0, 1.0],
        FrameSlot::Quarklet(qi) => {
            let width = 0.5f64.powi(qi.wavelet().level() as i32);
            let lo = qi.wavelet().translation() as f64 * width;
            vec![lo, lo + 0.5 * width, lo + width]
        }
    }
}

/// Polynomial frame weights `w_p = (p+1)^{-delta}` with `w_0 = 1`.
///
/// The exponent must exceed `1/2` so the weighted system retains the frame
/// property.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightRule {
    delta: f64,
}

impl Default for WeightRule {
    fn default() -> Self {
        Self { delta: 1.0 }
    }
}

impl WeightRule {
    pub fn new(delta: f64) -> Result<Self> {
        if delta <= 0.5 {
            return Err(Error::DimensionMismatch(format!(
                "weight exponent must exceed 1/2, got {delta}"
            )));
        }
        Ok(Self { delta })
    }

    pub fn exponent(&self) -> f64 {
        self.delta
    }

    pub fn weight(&self, p: u32) -> f64 {
        (p as f64 + 1.0).powf(-self.delta)
    }
}

/// Moment `int_0^1 u^i psi_p(u) du` of the reference quarklet.
///
/// Both pieces integrate in closed form; the `i = 0` moment vanishes exactly
/// (one vanishing moment).
pub fn quarklet_moment(p: u32, i: u32) -> f64 {
    let first = 2.0f64.powi(p as i32) * 0.5f64.powi((i + p + 1) as i32) / (i + p + 1) as f64;
    let mut sum = 0.0;
    let mut binom = 1.0;
    for m in 0..=i {
        sum += binom / (p + m + 1) as f64;
        binom *= (i - m) as f64 / (m + 1) as f64;
    }
    first - 0.5f64.powi(i as i32 + 1) * sum
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut value = 1.0;
    for i in 0..k {
        value *= (n - i) as f64 / (i + 1) as f64;
    }
    value
}

/// Moment sum `sum_i C(p_coarse, i) ratio^{p_coarse-i} shrink^i M(p_fine, i)`
/// shared by the nested-support inner products. `ratio` is the dyadic offset
/// of the fine support inside the coarse piece, `shrink` the level gap
/// factor; both lie in `[0, 1]`, keeping every term well scaled.
fn chain_moment_sum(p_coarse: u32, p_fine: u32, ratio: f64, shrink: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..=p_coarse {
        total += binomial(p_coarse, i)
            * ratio.powi((p_coarse - i) as i32)
            * shrink.powi(i as i32)
            * quarklet_moment(p_fine, i);
    }
    total
}

/// Exact `L2(0,1)` inner product of two unweighted frame elements.
///
/// Supports of distinct wavelet indices either nest or are disjoint, so the
/// product is nonzero only along ancestor chains.
pub fn inner_product(a: &FrameSlot, b: &FrameSlot) -> f64 {
    match (a, b) {
        (FrameSlot::Generator { degree: p1 }, FrameSlot::Generator { degree: p2 }) => {
            1.0 / (p1 + p2 + 1) as f64
        }
        (FrameSlot::Generator { degree }, FrameSlot::Quarklet(qi))
        | (FrameSlot::Quarklet(qi), FrameSlot::Generator { degree }) => {
            let j = qi.wavelet().level() as i32;
            let k = qi.wavelet().translation();
            let shrink = 0.5f64.powi(j);
            let ratio = k as f64 * shrink;
            let sum = chain_moment_sum(*degree, qi.degree(), ratio, shrink);
            shrink.sqrt() * sum
        }
        (FrameSlot::Quarklet(qa), FrameSlot::Quarklet(qb)) => {
            // order so the first index is the coarser one
            let (coarse, fine) = if qa.wavelet().level() <= qb.wavelet().level() {
                (qa, qb)
            } else {
                (qb, qa)
            };
            let gap = fine.wavelet().level() - coarse.wavelet().level();
            if gap == 0 {
                return if coarse.wavelet() == fine.wavelet() {
                    1.0 / (coarse.degree() + fine.degree() + 1) as f64
                } else {
                    0.0
                };
            }
            if !fine.wavelet().is_descendant_of(&coarse.wavelet()) {
                return 0.0;
            }
            let offset =
                fine.wavelet().translation() - (coarse.wavelet().translation() << gap);
            let half = 1u64 << (gap - 1);
            let (sign, local) = if offset < half {
                (1.0, offset)
            } else {
                (-1.0, offset - half)
            };
            let shrink = 0.5f64.powi(gap as i32 - 1);
            let ratio = local as f64 * shrink;
            let sum = chain_moment_sum(coarse.degree(), fine.degree(), ratio, shrink);
            sign * 0.5f64.powi(gap as i32).sqrt() * sum
        }
    }
}

/// Pointwise synthesis `sum c_slot w_p psi_slot(x)` over the support.
pub fn synthesize(coeffs: &CoefficientSequence, rule: &WeightRule, x: f64) -> f64 {
    coeffs
        .iter()
        .map(|(slot, c)| c * rule.weight(slot.degree()) * slot_eval(slot, x))
        .sum()
}

/// Point evaluator over a fixed coefficient sequence, grouping coefficients
/// by wavelet node so an evaluation touches one node per level.
pub struct SynthesisEvaluator {
    /// per level: translation -> weighted coefficients by degree
    levels: Vec<HashMap<u64, Vec<f64>>>,
    generator: Vec<f64>,
}

impl SynthesisEvaluator {
    pub fn new(coeffs: &CoefficientSequence, rule: &WeightRule) -> Self {
        let mut levels: Vec<HashMap<u64, Vec<f64>>> = Vec::new();
        let mut generator = Vec::new();
        for (slot, c) in coeffs.iter() {
            let weighted = c * rule.weight(slot.degree());
            match slot {
                FrameSlot::Generator { degree } => {
                    if generator.len() <= *degree as usize {
                        generator.resize(*degree as usize + 1, 0.0);
                    }
                    generator[*degree as usize] += weighted;
                }
                FrameSlot::Quarklet(qi) => {
                    let level = qi.wavelet().level() as usize;
                    if levels.len() <= level {
                        levels.resize_with(level + 1, HashMap::new);
                    }
                    let by_degree = levels[level]
                        .entry(qi.wavelet().translation())
                        .or_default();
                    if by_degree.len() <= qi.degree() as usize {
                        by_degree.resize(qi.degree() as usize + 1, 0.0);
                    }
                    by_degree[qi.degree() as usize] += weighted;
                }
            }
        }
        Self { levels, generator }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if !(0.0..1.0).contains(&x) {
            return 0.0;
        }
        // generator part: Horner in x
        let mut total = self.generator.iter().rev().fold(0.0, |acc, c| acc * x + c);
        for (level, nodes) in self.levels.iter().enumerate() {
            if nodes.is_empty() {
                continue;
            }
            let scaled = 2.0f64.powi(level as i32) * x;
            let k = scaled.floor();
            if let Some(by_degree) = nodes.get(&(k as u64)) {
                let t = scaled - k;
                let (sign, y) = if t < 0.5 {
                    (1.0, 2.0 * t)
                } else {
                    (-1.0, 2.0 * t - 1.0)
                };
                let horner = by_degree.iter().rev().fold(0.0, |acc, c| acc * y + c);
                total += sign * 2.0f64.powi(level as i32).sqrt() * horner;
            }
        }
        total
    }

    /// All piece breakpoints of the active slots, sorted and deduplicated,
    /// always including 0 and 1.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut points = vec![0.0, 1.0];
        for (level, nodes) in self.levels.iter().enumerate() {
            let width = 0.5f64.powi(level as i32);
            for k in nodes.keys() {
                let lo = *k as f64 * width;
                points.push(lo);
                points.push(lo + 0.5 * width);
                points.push(lo + width);
            }
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        points
    }
}

/// `L2(0,1)` distance between a target and a synthesized expansion.
///
/// Integrates the squared difference over the union of all active dyadic
/// pieces, grading the grid geometrically toward the target's singular
/// points down to width `2^-20`.
pub fn l2_error(
    target: &dyn TargetFunction,
    coeffs: &CoefficientSequence,
    rule: &WeightRule,
) -> Result<f64> {
    let evaluator = SynthesisEvaluator::new(coeffs, rule);
    let mut points = evaluator.breakpoints();
    for s in target.singular_points() {
        let mut width = 0.5f64.powi(20);
        while width < 1.0 {
            let graded = if s <= 0.5 { s + width } else { s - width };
            if (0.0..=1.0).contains(&graded) {
                points.push(graded);
            }
            width *= 2.0;
        }
    }
    points.sort_by(f64::total_cmp);
    points.dedup();

    let mut total = 0.0;
    for pair in points.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if hi <= lo {
            continue;
        }
        total += integrate_adaptive(
            &|x: f64| {
                let d = target.eval(x) - evaluator.eval(x);
                d * d
            },
            lo,
            hi,
            1e-12,
            1e-17,
            Some("squared approximation error"),
        )?;
    }
    Ok(total.max(0.0).sqrt())
}

/// A frame element used as an approximation target in tests and diagnostics.
pub struct SlotTarget(pub FrameSlot);

impl TargetFunction for SlotTarget {
    fn eval(&self, x: f64) -> f64 {
        slot_eval(&self.0, x)
    }

    fn load_value(&self, slot: &FrameSlot) -> Option<f64> {
        Some(inner_product(&self.0, slot))
    }
}
