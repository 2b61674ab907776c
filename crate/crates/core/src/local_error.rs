//! Local error functionals on coefficient sequences and the oracle interface
//! consumed by the refinement algorithm.

use crate::coeff::{CoefficientSequence, FrameSlot};
use crate::index::{WaveletIndex, LEVEL_CAP};
use crate::tree::QuarkletTree;
use std::collections::HashMap;

/// Source of local errors `e_p(node)`.
///
/// Implementations must be subadditive at degree zero,
/// `e_0(node) >= e_0(left) + e_0(right)`, and nonincreasing in the degree,
/// `e_p(node) >= e_{p+1}(node)`. Both properties are exercised by the test
/// suite for the coefficient-backed oracle.
pub trait LocalErrorOracle {
    /// The local error of `node` when kept as a leaf with maximal degree
    /// `degree`. Empty contributions are zero.
    fn local_error(&self, node: WaveletIndex, degree: u32) -> f64;

    /// Truncation level of the underlying index set. Leaves at this level are
    /// never subdivided by the refinement algorithm.
    fn level_limit(&self) -> u32 {
        LEVEL_CAP
    }
}

impl<F: Fn(WaveletIndex, u32) -> f64> LocalErrorOracle for F {
    fn local_error(&self, node: WaveletIndex, degree: u32) -> f64 {
        self(node, degree)
    }
}

/// Per-node tables supporting O(depth) local-error queries.
struct NodeMass {
    /// `tail[p]` = sum of squared coefficients with degree > p at this node,
    /// root slots counting both the quarklet and the generator coefficient.
    tail: Vec<f64>,
    /// Squared mass over all degrees at this node.
    own: f64,
    /// Squared mass of all strict descendants, all degrees.
    descendants: f64,
}

/// The coefficient-based local error: for a node kept as a leaf with degree
/// `p` it charges the degree tail along the increment chain of the node plus
/// the full mass of all descendants.
pub struct CoefficientOracle {
    masses: HashMap<WaveletIndex, NodeMass>,
    level_limit: u32,
}

impl CoefficientOracle {
    /// Precomputes suffix sums and descendant masses in one pass over the
    /// support.
    pub fn new(coeffs: &CoefficientSequence) -> Self {
        let bounds = coeffs.bounds();
        let p_len = bounds.p_max as usize + 1;
        let mut masses: HashMap<WaveletIndex, NodeMass> = HashMap::new();

        let mut by_node: HashMap<WaveletIndex, Vec<f64>> = HashMap::new();
        for (slot, value) in coeffs.iter() {
            let owner = match slot {
                FrameSlot::Generator { .. } => crate::index::ROOT,
                FrameSlot::Quarklet(qi) => qi.wavelet(),
            };
            let per_degree = by_node.entry(owner).or_insert_with(|| vec![0.0; p_len]);
            per_degree[slot.degree() as usize] += value * value;
        }

        for (node, per_degree) in &by_node {
            let mut tail = vec![0.0; p_len];
            let mut acc = 0.0;
            for p in (0..p_len).rev() {
                tail[p] = acc; // strictly greater degrees only
                acc += per_degree[p];
            }
            masses.insert(
                *node,
                NodeMass {
                    tail,
                    own: acc,
                    descendants: 0.0,
                },
            );
        }

        // descendant masses: push each node's own mass onto every strict
        // ancestor, materialising ancestors as needed
        let support: Vec<(WaveletIndex, f64)> = {
            let mut v: Vec<_> = masses.iter().map(|(n, m)| (*n, m.own)).collect();
            v.sort_unstable_by_key(|(node, _)| *node);
            v
        };
        for (node, own) in support {
            let mut current = node;
            while let Some(parent) = current.parent() {
                masses
                    .entry(parent)
                    .or_insert_with(|| NodeMass {
                        tail: vec![0.0; p_len],
                        own: 0.0,
                        descendants: 0.0,
                    })
                    .descendants += own;
                current = parent;
            }
        }

        Self {
            masses,
            level_limit: bounds.j_max,
        }
    }

    fn degree_tail(&self, node: &WaveletIndex, degree: u32) -> f64 {
        match self.masses.get(node) {
            Some(m) if (degree as usize) < m.tail.len() => m.tail[degree as usize],
            _ => 0.0,
        }
    }
}

impl LocalErrorOracle for CoefficientOracle {
    fn local_error(&self, node: WaveletIndex, degree: u32) -> f64 {
        let mut total = match self.masses.get(&node) {
            Some(m) => m.descendants,
            None => 0.0,
        };
        for chain_node in node.upsilon() {
            total += self.degree_tail(&chain_node, degree);
        }
        total
    }

    fn level_limit(&self) -> u32 {
        self.level_limit
    }
}

/// Global error of a quarklet tree: local errors summed over the leaves at
/// their maximal degrees.
pub fn global_error<O: LocalErrorOracle + ?Sized>(tree: &QuarkletTree, oracle: &O) -> f64 {
    tree.leaves()
        .map(|(leaf, degree)| oracle.local_error(*leaf, degree))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::ROOT;
    use crate::tree::WaveletTree;
    use approx::assert_relative_eq;
    use std::collections::BTreeMap;

    fn wi(j: u32, k: u64) -> WaveletIndex {
        WaveletIndex::new(j, k).unwrap()
    }

    use crate::testutil::worked_sequence;

    #[test]
    fn worked_sequence_local_errors() {
        let oracle = CoefficientOracle::new(&worked_sequence());
        assert_relative_eq!(oracle.local_error(ROOT, 0), 1.7, max_relative = 1e-14);
        assert_relative_eq!(oracle.local_error(ROOT, 1), 0.7, max_relative = 1e-14);
        assert_relative_eq!(oracle.local_error(wi(1, 0), 0), 1.1, max_relative = 1e-14);
        assert_relative_eq!(oracle.local_error(wi(1, 1), 0), 0.1, max_relative = 1e-14);
        // outside the support everything is zero
        assert_eq!(oracle.local_error(wi(4, 7), 0), 0.0);
    }

    #[test]
    fn worked_sequence_global_errors() {
        let seq = worked_sequence();
        let oracle = CoefficientOracle::new(&seq);

        let root = QuarkletTree::root_only();
        assert_relative_eq!(global_error(&root, &oracle), 1.7, max_relative = 1e-14);

        let mut deg = BTreeMap::new();
        deg.insert(ROOT, 1);
        let enriched = QuarkletTree::from_parts(WaveletTree::root_only(), deg).unwrap();
        assert_relative_eq!(global_error(&enriched, &oracle), 0.7, max_relative = 1e-14);

        let three = WaveletTree::root_only().refined(ROOT).unwrap();
        let mut deg = BTreeMap::new();
        deg.insert(wi(1, 0), 0);
        deg.insert(wi(1, 1), 0);
        let flat = QuarkletTree::from_parts(three, deg).unwrap();
        assert_relative_eq!(global_error(&flat, &oracle), 1.2, max_relative = 1e-14);
    }

    #[test]
    fn global_error_equals_uncaptured_mass() {
        let seq = worked_sequence();
        let oracle = CoefficientOracle::new(&seq);
        let three = WaveletTree::root_only().refined(ROOT).unwrap();
        let deeper = three.refined(wi(1, 1)).unwrap();
        let tree = QuarkletTree::derive_pmax(three, &deeper).unwrap();
        let expected = seq.total_mass() - tree.captured_mass(&seq);
        assert_relative_eq!(global_error(&tree, &oracle), expected, max_relative = 1e-12);
    }

    #[test]
    fn closure_fn_implements_oracle() {
        let oracle = |node: WaveletIndex, degree: u32| {
            if node.is_root() && degree == 0 {
                2.0
            } else {
                0.5
            }
        };
        assert_eq!(oracle.local_error(ROOT, 0), 2.0);
        assert_eq!(oracle.level_limit(), LEVEL_CAP);
    }
}
