//! Incremental near-best tree refinement and the subsequent trimming.
//!
//! A run grows a wavelet tree one subdivision at a time, always splitting the
//! leaf with the largest penalized local error. The per-node bookkeeping is
//! limited to the path from the subdivided leaf to the root, which gives the
//! step-count law checked by the test suite: total work equals the sum of
//! `r(node) + 1` over the final tree.

use crate::error::{Error, Result};
use crate::index::{WaveletIndex, ROOT};
use crate::local_error::LocalErrorOracle;
use crate::penalty::{best_subtree_error, harmonic, threshold_and_target};
use crate::tree::{QuarkletTree, WaveletTree};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Bookkeeping attached to every node of the growing tree.
#[derive(Debug, Clone)]
pub struct NodeState {
    /// Local error at degree zero, fetched once at creation.
    pub local_error: f64,
    /// Penalized local error; fixed at creation.
    pub penalized: f64,
    /// Subdivisions performed below this node so far.
    pub refinements: usize,
    /// Local error at degree `refinements`, refreshed on every increment.
    pub local_error_at_r: f64,
    /// Best achievable error of the current subtree.
    pub subtree_error: f64,
    /// Penalized subtree error.
    pub penalized_subtree: f64,
    /// Refinement threshold of the subtree.
    pub threshold: f64,
    /// Arena id of the leaf this node would subdivide next.
    pub target: usize,
    /// Subtree errors at every past refinement count, index = count.
    pub subtree_error_history: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RunNode {
    pub index: WaveletIndex,
    pub parent: Option<usize>,
    pub children: Option<(usize, usize)>,
    pub state: NodeState,
}

/// One row of the run log.
#[derive(Debug, Clone, Copy)]
pub struct StepRecord {
    pub step: usize,
    pub subdivided: WaveletIndex,
    pub threshold: f64,
    pub root_subtree_error: f64,
}

/// Full state of a refinement run.
#[derive(Debug, Clone)]
pub struct RunState {
    nodes: Vec<RunNode>,
    by_index: BTreeMap<WaveletIndex, usize>,
    steps: usize,
    work: u64,
    stopped_early: bool,
    level_limit: u32,
    /// Steps whose target selection had to break a tie between two zero
    /// thresholds; flagged because the choice is then arbitrary.
    zero_tie_steps: Vec<usize>,
    log: Vec<StepRecord>,
}

impl RunState {
    fn init<O: LocalErrorOracle + ?Sized>(oracle: &O) -> Self {
        let level_limit = oracle.level_limit();
        let e = oracle.local_error(ROOT, 0);
        let threshold = if level_limit == 0 { 0.0 } else { e };
        let root = RunNode {
            index: ROOT,
            parent: None,
            children: None,
            state: NodeState {
                local_error: e,
                penalized: e,
                refinements: 0,
                local_error_at_r: e,
                subtree_error: e,
                penalized_subtree: e,
                threshold,
                target: 0,
                subtree_error_history: vec![e],
            },
        };
        let mut by_index = BTreeMap::new();
        by_index.insert(ROOT, 0);
        Self {
            nodes: vec![root],
            by_index,
            steps: 0,
            work: 1,
            stopped_early: false,
            level_limit,
            zero_tie_steps: Vec::new(),
            log: Vec::new(),
        }
    }

    /// Performs one subdivision. Returns `false` without changing anything
    /// when the root threshold is exactly zero: either every remaining leaf
    /// sits at the truncation level or no subdivision can reduce the error.
    fn step<O: LocalErrorOracle + ?Sized>(&mut self, oracle: &O) -> bool {
        if self.nodes[0].state.threshold == 0.0 {
            return false;
        }
        let target = self.nodes[0].state.target;
        debug_assert!(self.nodes[target].children.is_none());
        let parent_penalized = self.nodes[target].state.penalized;
        let (left, right) = self.nodes[target].index.children();

        let mut ids = [0usize; 2];
        for (slot, child) in [left, right].into_iter().enumerate() {
            let e = oracle.local_error(child, 0);
            let penalized = harmonic(e, parent_penalized);
            // leaves at the truncation level are excluded from selection
            let threshold = if child.level() >= self.level_limit {
                0.0
            } else {
                penalized
            };
            let id = self.nodes.len();
            self.nodes.push(RunNode {
                index: child,
                parent: Some(target),
                children: None,
                state: NodeState {
                    local_error: e,
                    penalized,
                    refinements: 0,
                    local_error_at_r: e,
                    subtree_error: e,
                    penalized_subtree: penalized,
                    threshold,
                    target: id,
                    subtree_error_history: vec![e],
                },
            });
            self.by_index.insert(child, id);
            ids[slot] = id;
            self.work += 1;
        }
        self.nodes[target].children = Some((ids[0], ids[1]));

        self.steps += 1;
        let mut zero_tie = false;
        let mut current = Some(target);
        while let Some(id) = current {
            let (c1, c2) = self.nodes[id].children.expect("walk visits inner nodes");
            let node_index = self.nodes[id].index;
            let r = self.nodes[id].state.refinements + 1;
            let e_r = oracle.local_error(node_index, r as u32);
            let (s1, s2) = (&self.nodes[c1].state, &self.nodes[c2].state);
            let subtree = best_subtree_error(s1.subtree_error, s2.subtree_error, e_r);
            if s1.threshold == 0.0 && s2.threshold == 0.0 {
                zero_tie = true;
            }
            let (q, target_id) = threshold_and_target(
                s1.threshold,
                s1.target,
                s2.threshold,
                s2.target,
                harmonic(subtree, self.nodes[id].state.penalized_subtree),
            );
            let state = &mut self.nodes[id].state;
            state.refinements = r;
            state.local_error_at_r = e_r;
            state.subtree_error = subtree;
            state.subtree_error_history.push(subtree);
            state.penalized_subtree = harmonic(subtree, state.penalized_subtree);
            state.threshold = q;
            state.target = target_id;
            self.work += 1;
            current = self.nodes[id].parent;
        }
        if zero_tie {
            self.zero_tie_steps.push(self.steps);
        }
        self.log.push(StepRecord {
            step: self.steps,
            subdivided: self.nodes[target].index,
            threshold: self.nodes[0].state.threshold,
            root_subtree_error: self.nodes[0].state.subtree_error,
        });
        true
    }

    /// Number of subdivisions performed.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Inner-loop work counter: one unit per node initialisation and one per
    /// upward-walk iteration.
    pub fn work(&self) -> u64 {
        self.work
    }

    /// True when the run ended before the requested number of steps.
    pub fn stopped_early(&self) -> bool {
        self.stopped_early
    }

    /// The run threshold `q_N` (threshold of the root).
    pub fn threshold(&self) -> f64 {
        self.nodes[0].state.threshold
    }

    /// Best achievable error over all trimmings of the current tree.
    pub fn root_subtree_error(&self) -> f64 {
        self.nodes[0].state.subtree_error
    }

    pub fn zero_tie_steps(&self) -> &[usize] {
        &self.zero_tie_steps
    }

    pub fn log(&self) -> &[StepRecord] {
        &self.log
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// State lookup by wavelet index.
    pub fn state_of(&self, index: &WaveletIndex) -> Option<&NodeState> {
        self.by_index.get(index).map(|&id| &self.nodes[id].state)
    }

    /// The wavelet index a node's target field points at.
    pub fn target_of(&self, index: &WaveletIndex) -> Option<WaveletIndex> {
        self.by_index
            .get(index)
            .map(|&id| self.nodes[self.nodes[id].state.target].index)
    }

    /// The grown wavelet tree.
    pub fn tree(&self) -> WaveletTree {
        WaveletTree::from_nodes(self.nodes.iter().map(|n| n.index))
            .expect("the run maintains a complete tree")
    }

    /// Trims the grown tree: descends from the root and cuts at the first
    /// node whose stored subtree error equals its stored local error at the
    /// current refinement count, converting the cut subdivisions into
    /// polynomial degree. Uses stored values only.
    pub fn trim(&self) -> QuarkletTree {
        let mut kept = Vec::new();
        let mut degrees = BTreeMap::new();
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            kept.push(node.index);
            let cut = node.state.subtree_error == node.state.local_error_at_r;
            match node.children {
                Some((c1, c2)) if !cut => {
                    stack.push(c2);
                    stack.push(c1);
                }
                _ => {
                    degrees.insert(node.index, node.state.refinements as u32);
                }
            }
        }
        let base = WaveletTree::from_nodes(kept).expect("trimming preserves completeness");
        QuarkletTree::from_parts(base, degrees).expect("degrees cover exactly the leaves")
    }

    /// Global error of a trimming, summed from stored local errors.
    pub fn stored_global_error(&self, tree: &QuarkletTree) -> f64 {
        tree.leaves()
            .map(|(leaf, degree)| {
                let state = self.state_of(leaf).expect("trim leaves come from the run");
                debug_assert_eq!(state.refinements as u32, degree);
                state.local_error_at_r
            })
            .sum()
    }

    /// Run log as CSV, one row per subdivision.
    pub fn log_csv(&self) -> String {
        let mut out = String::from("N,lambda_j,lambda_k,qN,EN_root\n");
        for record in &self.log {
            writeln!(
                out,
                "{},{},{},{},{}",
                record.step,
                record.subdivided.level(),
                record.subdivided.translation(),
                record.threshold,
                record.root_subtree_error
            )
            .expect("string write");
        }
        out
    }
}

/// Runs the refinement for up to `n_max` subdivisions.
///
/// The run stops earlier when the root threshold hits exactly zero; further
/// subdivisions could not reduce the error or would cross the truncation
/// level. A budget that could never be realised below the truncation level is
/// rejected outright.
pub fn nearbest_tree<O: LocalErrorOracle + ?Sized>(oracle: &O, n_max: usize) -> Result<RunState> {
    let level_limit = oracle.level_limit();
    let capacity = if level_limit >= usize::BITS - 1 {
        usize::MAX
    } else {
        (1usize << level_limit) - 1
    };
    if n_max > capacity {
        return Err(Error::StepBudget {
            requested: n_max,
            capacity,
            j_max: level_limit,
        });
    }
    let mut run = RunState::init(oracle);
    for _ in 0..n_max {
        if !run.step(oracle) {
            run.stopped_early = true;
            break;
        }
    }
    Ok(run)
}

/// Stepping interface used by the benchmark driver to inspect every stage.
pub struct NearbestRun<'a, O: LocalErrorOracle + ?Sized> {
    oracle: &'a O,
    state: RunState,
}

impl<'a, O: LocalErrorOracle + ?Sized> NearbestRun<'a, O> {
    pub fn new(oracle: &'a O) -> Self {
        Self {
            oracle,
            state: RunState::init(oracle),
        }
    }

    /// Attempts one subdivision; `false` means the run is exhausted.
    pub fn step(&mut self) -> bool {
        let advanced = self.state.step(self.oracle);
        if !advanced {
            self.state.stopped_early = true;
        }
        advanced
    }

    pub fn state(&self) -> &RunState {
        &self.state
    }

    pub fn into_state(self) -> RunState {
        self.state
    }
}
