//! Exhaustive best-tree search, the reference for near-best certificates.

use crate::error::{Error, Result};
use crate::index::{WaveletIndex, ROOT};
use crate::local_error::LocalErrorOracle;
use std::collections::HashMap;

/// Exact minimum of the global error over all quarklet trees of cardinality
/// at most `n`, searching complete trees up to depth `j_bound` with leaf
/// degrees up to `p_bound`.
///
/// Enumerates every tree shape and assigns degrees by dynamic programming
/// over the cardinality budget; `shape_budget` caps the number of shapes
/// visited. Returns infinity when no admissible tree fits the budget.
pub fn brute_force_sigma<O: LocalErrorOracle + ?Sized>(
    oracle: &O,
    n: usize,
    j_bound: u32,
    p_bound: u32,
    shape_budget: usize,
) -> Result<f64> {
    let mut memo: HashMap<(WaveletIndex, u32), f64> = HashMap::new();
    let mut local = |node: WaveletIndex, p: u32| -> f64 {
        *memo
            .entry((node, p))
            .or_insert_with(|| oracle.local_error(node, p))
    };

    let mut best = f64::INFINITY;
    let mut visited = 0usize;

    fn shapes(node: WaveletIndex, depth_left: u32, max_leaves: usize) -> Vec<Vec<WaveletIndex>> {
        let mut out = vec![vec![node]];
        if depth_left > 0 && max_leaves >= 2 {
            let (l, r) = node.children();
            for ls in shapes(l, depth_left - 1, max_leaves - 1) {
                let left_leaves = leaves_of(&ls).len();
                if left_leaves >= max_leaves {
                    continue;
                }
                for rs in shapes(r, depth_left - 1, max_leaves - left_leaves) {
                    let mut combined = ls.clone();
                    combined.extend_from_slice(&rs);
                    out.push(combined);
                }
            }
        }
        out
    }

    fn leaves_of(nodes: &[WaveletIndex]) -> Vec<WaveletIndex> {
        nodes
            .iter()
            .copied()
            .filter(|n| {
                let (l, _) = n.children();
                !nodes.contains(&l)
            })
            .collect()
    }

    if n == 0 {
        return Ok(f64::INFINITY);
    }
    // complete trees have 2L - 1 nodes for L leaves
    let max_leaves = n.div_ceil(2);
    for shape in shapes(ROOT, j_bound, max_leaves) {
        visited += 1;
        if visited > shape_budget {
            return Err(Error::SearchBudget {
                visited,
                budget: shape_budget,
            });
        }
        let node_count = shape.len();
        if node_count > n {
            continue;
        }
        let budget = n - node_count;
        let leaves = leaves_of(&shape);
        // minimise the leaf error sum subject to the degree cost: raising a
        // leaf to degree p costs p * |upsilon(leaf)| cardinality units
        let mut dp = vec![0.0f64; budget + 1];
        for leaf in &leaves {
            let unit = leaf.upsilon_len();
            let mut next = vec![f64::INFINITY; budget + 1];
            for (b, slot) in next.iter_mut().enumerate() {
                for p in 0..=p_bound {
                    let cost = p as usize * unit;
                    if cost > b {
                        break;
                    }
                    let candidate = dp[b - cost] + local(*leaf, p);
                    if candidate < *slot {
                        *slot = candidate;
                    }
                }
            }
            dp = next;
        }
        if dp[budget] < best {
            best = dp[budget];
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_error::CoefficientOracle;
    use approx::assert_relative_eq;

    #[test]
    fn worked_example_best_errors() {
        let oracle = CoefficientOracle::new(&crate::testutil::worked_sequence());
        let sigma1 = brute_force_sigma(&oracle, 1, 2, 3, 10_000).unwrap();
        assert_relative_eq!(sigma1, 1.7, max_relative = 1e-14);
        let sigma2 = brute_force_sigma(&oracle, 2, 2, 3, 10_000).unwrap();
        assert_relative_eq!(sigma2, 0.7, max_relative = 1e-14);
    }

    #[test]
    fn best_error_is_nonincreasing_in_the_budget() {
        let oracle = CoefficientOracle::new(&crate::testutil::worked_sequence());
        let mut previous = f64::INFINITY;
        for n in 1..=8 {
            let sigma = brute_force_sigma(&oracle, n, 3, 3, 100_000).unwrap();
            assert!(sigma <= previous, "sigma_{n} = {sigma} > {previous}");
            previous = sigma;
        }
    }

    #[test]
    fn zero_budget_is_infeasible() {
        let oracle = CoefficientOracle::new(&crate::testutil::worked_sequence());
        assert!(brute_force_sigma(&oracle, 0, 2, 2, 1000)
            .unwrap()
            .is_infinite());
    }

    #[test]
    fn shape_budget_guards_explosion() {
        let oracle = CoefficientOracle::new(&crate::testutil::worked_sequence());
        assert!(matches!(
            brute_force_sigma(&oracle, 9, 4, 2, 10),
            Err(Error::SearchBudget { .. })
        ));
    }
}
