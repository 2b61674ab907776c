//! Dyadic wavelet and quarklet indices on the unit interval.
//!
//! A wavelet index `(j, k)` stands for the dyadic interval `2^-j [k, k+1)`.
//! Every index has exactly two children obtained by splitting its interval in
//! half, which induces the ancestor/descendant order used throughout the
//! crate. Generator indices (level `-1`) are never materialised here; the
//! root owns their coefficient slots, see [`crate::coeff::FrameSlot`].

use crate::error::{Error, Result};
use std::fmt;

/// Hard structural cap on the refinement level so translations fit in `u64`
/// and dyadic endpoints stay exact in `f64`.
pub const LEVEL_CAP: u32 = 58;

/// A space/scale node `(j, k)` of the dyadic tree over `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WaveletIndex {
    j: u32,
    k: u64,
}

/// The root `(0, 0)`, owner of the whole interval.
pub const ROOT: WaveletIndex = WaveletIndex { j: 0, k: 0 };

impl WaveletIndex {
    /// Builds `(j, k)`, rejecting translations outside `0 <= k <= max(0, 2^j - 1)`.
    pub fn new(j: u32, k: u64) -> Result<Self> {
        if j > LEVEL_CAP {
            return Err(Error::LevelCapExceeded { j, cap: LEVEL_CAP });
        }
        if k >= 1u64 << j {
            return Err(Error::InvalidIndex { j, k });
        }
        Ok(Self { j, k })
    }

    pub fn level(&self) -> u32 {
        self.j
    }

    pub fn translation(&self) -> u64 {
        self.k
    }

    pub fn is_root(&self) -> bool {
        self.j == 0
    }

    /// A node is *right* when its translation is odd. The root counts as left.
    pub fn is_right_node(&self) -> bool {
        self.k % 2 == 1
    }

    /// Support interval `2^-j [k, k+1)`; endpoints are exact dyadics.
    pub fn interval(&self) -> (f64, f64) {
        let h = 0.5f64.powi(self.j as i32);
        (self.k as f64 * h, (self.k + 1) as f64 * h)
    }

    /// The two children `(j+1, 2k)` and `(j+1, 2k+1)`.
    ///
    /// Panics at [`LEVEL_CAP`]; all public construction paths keep levels
    /// below the cap, so this is unreachable through the crate API.
    pub fn children(&self) -> (WaveletIndex, WaveletIndex) {
        assert!(self.j < LEVEL_CAP, "level cap exceeded");
        let (j, k) = (self.j + 1, 2 * self.k);
        (WaveletIndex { j, k }, WaveletIndex { j, k: k + 1 })
    }

    /// The parent `(j-1, floor(k/2))`, or `None` for the root.
    pub fn parent(&self) -> Option<WaveletIndex> {
        if self.j == 0 {
            None
        } else {
            Some(WaveletIndex {
                j: self.j - 1,
                k: self.k / 2,
            })
        }
    }

    /// Strict descendant test: the support of `self` is strictly contained in
    /// the support of `other`.
    pub fn is_descendant_of(&self, other: &WaveletIndex) -> bool {
        self.j > other.j && (self.k >> (self.j - other.j)) == other.k
    }

    /// Descendant-or-equal.
    pub fn is_weak_descendant_of(&self, other: &WaveletIndex) -> bool {
        self == other || self.is_descendant_of(other)
    }

    /// The ancestor of `self` at level `j` (requires `j <= self.level()`).
    pub fn ancestor_at(&self, j: u32) -> WaveletIndex {
        debug_assert!(j <= self.j);
        WaveletIndex {
            j,
            k: self.k >> (self.j - j),
        }
    }

    /// The chain anchor: the deepest right node on the path from `self` to
    /// the root (possibly `self` itself), or the root when the whole path
    /// consists of left nodes.
    pub fn anchor(&self) -> WaveletIndex {
        let mut node = *self;
        while !node.is_right_node() {
            match node.parent() {
                Some(parent) => node = parent,
                None => return node,
            }
        }
        node
    }

    /// The degree-increment chain: all nodes from `self` up to and including
    /// [`WaveletIndex::anchor`], ordered from `self` upwards.
    ///
    /// Chains of distinct leaves of any tree are pairwise disjoint and cover
    /// the tree.
    pub fn upsilon(&self) -> Vec<WaveletIndex> {
        let anchor = self.anchor();
        let mut chain = Vec::with_capacity((self.j - anchor.j + 1) as usize);
        let mut node = *self;
        loop {
            chain.push(node);
            if node == anchor {
                return chain;
            }
            node = node.parent().expect("anchor lies on the path to the root");
        }
    }

    /// Length of [`WaveletIndex::upsilon`] without materialising it.
    pub fn upsilon_len(&self) -> usize {
        (self.j - self.anchor().j + 1) as usize
    }
}

impl fmt::Display for WaveletIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.j, self.k)
    }
}

/// A frame element identifier `(p, j, k)`: polynomial degree on top of a
/// wavelet index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuarkletIndex {
    degree: u32,
    space: WaveletIndex,
}

impl QuarkletIndex {
    pub fn new(degree: u32, space: WaveletIndex) -> Self {
        Self { degree, space }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// The underlying wavelet index (the degree-zero projection).
    pub fn wavelet(&self) -> WaveletIndex {
        self.space
    }
}

impl fmt::Display for QuarkletIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.degree, self.space.j, self.space.k)
    }
}

/// Configurable truncation bounds for index sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub j_max: u32,
    pub p_max: u32,
}

impl Bounds {
    pub fn new(j_max: u32, p_max: u32) -> Result<Self> {
        if j_max > LEVEL_CAP {
            return Err(Error::LevelCapExceeded {
                j: j_max,
                cap: LEVEL_CAP,
            });
        }
        Ok(Self { j_max, p_max })
    }

    pub fn admits(&self, degree: u32, space: WaveletIndex) -> bool {
        degree <= self.p_max && space.level() <= self.j_max
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn wi(j: u32, k: u64) -> WaveletIndex {
        WaveletIndex::new(j, k).unwrap()
    }

    #[test]
    fn children_of_sample_nodes() {
        assert_eq!(ROOT.children(), (wi(1, 0), wi(1, 1)));
        assert_eq!(wi(1, 1).children(), (wi(2, 2), wi(2, 3)));
        assert_eq!(wi(3, 5).children(), (wi(4, 10), wi(4, 11)));
    }

    #[test]
    fn parent_of_sample_nodes() {
        assert_eq!(wi(2, 3).parent(), Some(wi(1, 1)));
        assert_eq!(ROOT.parent(), None);
        assert_eq!(wi(4, 10).parent(), Some(wi(3, 5)));
    }

    #[test]
    fn descendant_relation() {
        assert!(wi(2, 1).is_descendant_of(&ROOT));
        assert!(!wi(1, 0).is_descendant_of(&wi(1, 1)));
        // 2^-3 [4,5) is inside 2^-1 [1,2)
        assert!(wi(3, 4).is_descendant_of(&wi(1, 1)));
        assert!(!ROOT.is_descendant_of(&ROOT));
        assert!(ROOT.is_weak_descendant_of(&ROOT));
    }

    #[test]
    fn upsilon_stops_at_first_right_node() {
        assert_eq!(wi(1, 1).upsilon(), vec![wi(1, 1)]);
        assert_eq!(wi(1, 0).upsilon(), vec![wi(1, 0), ROOT]);
        assert_eq!(wi(3, 4).upsilon(), vec![wi(3, 4), wi(2, 2), wi(1, 1)]);
        assert_eq!(ROOT.upsilon(), vec![ROOT]);
    }

    #[test]
    fn invalid_translation_rejected() {
        assert!(WaveletIndex::new(0, 1).is_err());
        assert!(WaveletIndex::new(3, 8).is_err());
        assert!(WaveletIndex::new(3, 7).is_ok());
        assert!(WaveletIndex::new(LEVEL_CAP + 1, 0).is_err());
    }

    #[test]
    fn interval_endpoints() {
        assert_eq!(ROOT.interval(), (0.0, 1.0));
        assert_eq!(wi(2, 3).interval(), (0.75, 1.0));
    }

    proptest! {
        #[test]
        fn children_and_parent_are_inverse(j in 0u32..=20, seed in any::<u64>()) {
            let k = seed % (1u64 << j);
            let node = wi(j, k);
            let (left, right) = node.children();
            prop_assert_eq!(left.parent(), Some(node));
            prop_assert_eq!(right.parent(), Some(node));
        }

        #[test]
        fn descendant_matches_interval_containment(
            j1 in 0u32..=10, j2 in 0u32..=10, s1 in any::<u64>(), s2 in any::<u64>()
        ) {
            let a = wi(j1, s1 % (1u64 << j1));
            let b = wi(j2, s2 % (1u64 << j2));
            let (al, ar) = a.interval();
            let (bl, br) = b.interval();
            let strictly_inside = bl <= al && ar <= br && (ar - al) < (br - bl);
            prop_assert_eq!(a.is_descendant_of(&b), strictly_inside);
        }

        #[test]
        fn upsilon_ends_at_right_node_or_root(j in 0u32..=12, seed in any::<u64>()) {
            let node = wi(j, seed % (1u64 << j));
            let chain = node.upsilon();
            prop_assert_eq!(chain.first(), Some(&node));
            let last = *chain.last().unwrap();
            prop_assert!(last.is_right_node() || last.is_root());
            // all interior nodes of the chain below the anchor are left nodes
            for node in &chain[..chain.len() - 1] {
                prop_assert!(!node.is_right_node());
            }
            prop_assert_eq!(chain.len(), node.upsilon_len());
        }
    }
}
