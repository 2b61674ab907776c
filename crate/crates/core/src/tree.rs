//! Complete binary trees of wavelet indices and their quarklet enrichment.

use crate::error::{Error, Result};
use crate::index::{QuarkletIndex, WaveletIndex, LEVEL_CAP, ROOT};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// An ancestor-closed, complete (0 or 2 children) set of wavelet indices
/// containing the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaveletTree {
    nodes: BTreeSet<WaveletIndex>,
}

impl Default for WaveletTree {
    fn default() -> Self {
        Self::root_only()
    }
}

impl WaveletTree {
    /// The single-node tree `{root}`.
    pub fn root_only() -> Self {
        let mut nodes = BTreeSet::new();
        nodes.insert(ROOT);
        Self { nodes }
    }

    /// Builds a tree from an arbitrary node collection, rejecting sets that
    /// are not ancestor-closed or not complete.
    pub fn from_nodes<I: IntoIterator<Item = WaveletIndex>>(iter: I) -> Result<Self> {
        let nodes: BTreeSet<WaveletIndex> = iter.into_iter().collect();
        if !nodes.contains(&ROOT) {
            return Err(Error::InvalidTree);
        }
        for node in &nodes {
            if let Some(parent) = node.parent() {
                if !nodes.contains(&parent) {
                    return Err(Error::InvalidTree);
                }
            }
            let (left, right) = node.children();
            if nodes.contains(&left) != nodes.contains(&right) {
                return Err(Error::InvalidTree);
            }
        }
        Ok(Self { nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a tree always contains the root
    }

    pub fn contains(&self, node: &WaveletIndex) -> bool {
        self.nodes.contains(node)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &WaveletIndex> {
        self.nodes.iter()
    }

    pub fn is_leaf(&self, node: &WaveletIndex) -> bool {
        let (left, _) = node.children();
        self.nodes.contains(node) && !self.nodes.contains(&left)
    }

    /// The leaves, in canonical `(j, k)` order. Their supports partition `[0, 1)`.
    pub fn leaves(&self) -> Vec<WaveletIndex> {
        self.nodes
            .iter()
            .copied()
            .filter(|n| self.is_leaf(n))
            .collect()
    }

    /// Maximal level present in the tree.
    pub fn depth(&self) -> u32 {
        self.nodes.iter().map(|n| n.level()).max().unwrap_or(0)
    }

    /// Space refinement: returns the tree with both children of `leaf` added.
    pub fn refined(&self, leaf: WaveletIndex) -> Result<Self> {
        if !self.nodes.contains(&leaf) {
            return Err(Error::NotInTree(leaf));
        }
        if !self.is_leaf(&leaf) {
            return Err(Error::NotALeaf(leaf));
        }
        if leaf.level() >= LEVEL_CAP {
            return Err(Error::LevelCapExceeded {
                j: leaf.level() + 1,
                cap: LEVEL_CAP,
            });
        }
        let mut nodes = self.nodes.clone();
        let (left, right) = leaf.children();
        nodes.insert(left);
        nodes.insert(right);
        Ok(Self { nodes })
    }

    pub fn is_subtree_of(&self, other: &WaveletTree) -> bool {
        self.nodes.is_subset(&other.nodes)
    }

    /// Number of subdivisions inside the subtree emanating from `node`:
    /// the leaf count of that subtree minus one.
    pub fn refinement_count(&self, node: WaveletIndex) -> Result<usize> {
        if !self.nodes.contains(&node) {
            return Err(Error::NotInTree(node));
        }
        let leaves_below = self
            .nodes
            .iter()
            .filter(|n| n.is_weak_descendant_of(&node) && self.is_leaf(n))
            .count();
        Ok(leaves_below - 1)
    }
}

/// A quarklet tree: a wavelet tree plus maximal polynomial degrees on its
/// leaves. Inner nodes inherit the degree of the unique leaf whose increment
/// chain contains them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuarkletTree {
    base: WaveletTree,
    leaf_degrees: BTreeMap<WaveletIndex, u32>,
}

impl QuarkletTree {
    /// Pairs a wavelet tree with per-leaf maximal degrees. The assignment
    /// must mention exactly the leaves of `base`.
    pub fn from_parts(base: WaveletTree, leaf_degrees: BTreeMap<WaveletIndex, u32>) -> Result<Self> {
        let leaves = base.leaves();
        if leaves.len() != leaf_degrees.len() || leaves.iter().any(|l| !leaf_degrees.contains_key(l))
        {
            return Err(Error::LeafMismatch);
        }
        Ok(Self { base, leaf_degrees })
    }

    /// The trivial tree `{root}` with degree zero.
    pub fn root_only() -> Self {
        let mut leaf_degrees = BTreeMap::new();
        leaf_degrees.insert(ROOT, 0);
        Self {
            base: WaveletTree::root_only(),
            leaf_degrees,
        }
    }

    /// Trimming: interprets a subtree of a refined tree as a quarklet tree by
    /// converting the missing subdivisions below each leaf into polynomial
    /// degree, `p_max(leaf) = r(leaf, refined)`.
    pub fn derive_pmax(base: WaveletTree, refined: &WaveletTree) -> Result<Self> {
        if !base.is_subtree_of(refined) {
            let witness = base
                .nodes()
                .find(|n| !refined.contains(n))
                .copied()
                .unwrap_or(ROOT);
            return Err(Error::NotASubtree(witness));
        }
        let mut leaf_degrees = BTreeMap::new();
        for leaf in base.leaves() {
            leaf_degrees.insert(leaf, refined.refinement_count(leaf)? as u32);
        }
        Ok(Self { base, leaf_degrees })
    }

    pub fn base(&self) -> &WaveletTree {
        &self.base
    }

    pub fn leaf_degree(&self, leaf: &WaveletIndex) -> Option<u32> {
        self.leaf_degrees.get(leaf).copied()
    }

    pub fn leaves(&self) -> impl Iterator<Item = (&WaveletIndex, u32)> {
        self.leaf_degrees.iter().map(|(l, d)| (l, *d))
    }

    /// Degree of an arbitrary node: for leaves the stored value, for inner
    /// nodes the value induced along the increment chain of the unique leaf
    /// reached by descending through left children.
    pub fn induced_degree(&self, node: &WaveletIndex) -> Result<u32> {
        if !self.base.contains(node) {
            return Err(Error::NotInTree(*node));
        }
        let mut current = *node;
        while !self.base.is_leaf(&current) {
            current = current.children().0;
        }
        Ok(self.leaf_degrees[&current])
    }

    /// Number of quarklets in the tree: the node count plus the induced
    /// degrees summed over all nodes. Generator slots owned by the root are
    /// not counted.
    pub fn cardinality(&self) -> usize {
        let degrees: usize = self
            .leaf_degrees
            .iter()
            .map(|(leaf, d)| *d as usize * leaf.upsilon_len())
            .sum();
        self.base.len() + degrees
    }

    /// All quarklet indices of the tree, every node carrying degrees
    /// `0..=induced_degree`.
    pub fn index_set(&self) -> BTreeSet<QuarkletIndex> {
        let mut set = BTreeSet::new();
        for node in self.base.nodes() {
            let degree = self.induced_degree(node).expect("node is in the tree");
            for p in 0..=degree {
                set.insert(QuarkletIndex::new(p, *node));
            }
        }
        set
    }

    /// Checks the three quarklet-tree conditions on a raw index set:
    /// ancestor closure with completeness, constant degrees along each
    /// leaf chain, and degree completeness per node.
    pub fn validate_index_set<I>(indices: I) -> bool
    where
        I: IntoIterator<Item = QuarkletIndex>,
    {
        let mut degrees: BTreeMap<WaveletIndex, BTreeSet<u32>> = BTreeMap::new();
        for qi in indices {
            degrees.entry(qi.wavelet()).or_default().insert(qi.degree());
        }
        if degrees.is_empty() {
            return false;
        }
        // degree completeness: 0..=max all present
        let mut pmax: BTreeMap<WaveletIndex, u32> = BTreeMap::new();
        for (node, ps) in &degrees {
            let max = *ps.iter().max().unwrap();
            if ps.len() != (max + 1) as usize {
                return false;
            }
            pmax.insert(*node, max);
        }
        let base = match WaveletTree::from_nodes(pmax.keys().copied()) {
            Ok(t) => t,
            Err(_) => return false,
        };
        // chain-constant degrees, which also pins down every inner node
        let mut induced: BTreeMap<WaveletIndex, u32> = BTreeMap::new();
        for leaf in base.leaves() {
            let d = pmax[&leaf];
            for node in leaf.upsilon() {
                induced.insert(node, d);
            }
        }
        pmax == induced
    }

    /// Total L2 mass captured by the tree from a coefficient sequence,
    /// including the root generator slots up to the root degree.
    pub fn captured_mass(&self, coeffs: &crate::coeff::CoefficientSequence) -> f64 {
        let mut total = 0.0;
        for node in self.base.nodes() {
            let degree = self.induced_degree(node).expect("node is in the tree");
            for p in 0..=degree {
                let c = coeffs.node_value(p, *node);
                total += c * c;
                if node.is_root() {
                    let g = coeffs.generator_value(p);
                    total += g * g;
                }
            }
        }
        total
    }

    /// JSON dump rooted at the root node, children listed left then right.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.dump_node(ROOT)).expect("serialization cannot fail")
    }

    fn dump_node(&self, node: WaveletIndex) -> TreeDumpNode {
        let children = if self.base.is_leaf(&node) {
            Vec::new()
        } else {
            let (left, right) = node.children();
            vec![self.dump_node(left), self.dump_node(right)]
        };
        TreeDumpNode {
            j: node.level(),
            k: node.translation(),
            pmax: self.induced_degree(&node).expect("node is in the tree"),
            children,
        }
    }
}

#[derive(Serialize)]
struct TreeDumpNode {
    j: u32,
    k: u64,
    pmax: u32,
    children: Vec<TreeDumpNode>,
}
