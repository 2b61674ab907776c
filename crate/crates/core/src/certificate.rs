//! Near-best certificates and cardinality checks for refinement runs.

use crate::error::{Error, Result};
use crate::nearbest::RunState;
use crate::tree::QuarkletTree;
use serde::Serialize;

/// Relative slack granted on the pass side of each inequality.
const PASS_SLACK: f64 = 1e-9;

fn holds_le(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + PASS_SLACK * rhs.abs()
}

/// The three inequalities tying a run to the best achievable error.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    /// Subdivisions performed by the run.
    pub steps: usize,
    /// Cardinality budget the run is compared against.
    pub n: usize,
    /// Global error of the trimmed tree.
    pub global_error: f64,
    /// Best error over all trees of cardinality at most `n`.
    pub sigma_n: f64,
    /// Near-best bound `(2N+1)/(N-n+1) * sigma_n`.
    pub bound: f64,
    /// Run threshold `q_N`.
    pub threshold: f64,
    /// Lower bound `q_N * (N-n+1)` on `sigma_n`.
    pub lower: f64,
    /// Upper bound `q_N * (2N+1)` on the global error.
    pub upper: f64,
    pub near_best_pass: bool,
    pub lower_pass: bool,
    pub upper_pass: bool,
}

impl Certificate {
    pub fn all_pass(&self) -> bool {
        self.near_best_pass && self.lower_pass && self.upper_pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serialization cannot fail")
    }
}

/// Assembles the near-best certificate of a run against the best error
/// `sigma_n`; requires `1 <= n <= N` where `N` is the number of steps
/// actually performed.
pub fn certify(
    run: &RunState,
    trimmed: &QuarkletTree,
    n: usize,
    sigma_n: f64,
) -> Result<Certificate> {
    let steps = run.steps();
    if n == 0 || n > steps {
        return Err(Error::CertificateRange { n, steps });
    }
    let global_error = run.stored_global_error(trimmed);
    let threshold = run.threshold();
    let span = (steps - n + 1) as f64;
    let width = (2 * steps + 1) as f64;
    let bound = width / span * sigma_n;
    let lower = threshold * span;
    let upper = threshold * width;
    Ok(Certificate {
        steps,
        n,
        global_error,
        sigma_n,
        bound,
        threshold,
        lower,
        upper,
        near_best_pass: holds_le(global_error, bound),
        lower_pass: holds_le(lower, sigma_n),
        upper_pass: holds_le(global_error, upper),
    })
}

/// Checks the cardinality laws of a trimmed tree after `steps` subdivisions:
/// `N+1 <= #T <= (N^2+6N+5)/4` and `#T <= (depth+1) N + 1`.
pub fn cardinality_check(trimmed: &QuarkletTree, steps: usize) -> bool {
    let cardinality = trimmed.cardinality();
    let n = steps;
    let lower = n + 1;
    let upper4 = n * n + 6 * n + 5; // four times the upper bound
    let depth = trimmed.base().depth() as usize;
    let depth_bound = (depth + 1) * n + 1;
    lower <= cardinality && 4 * cardinality <= upper4 && cardinality <= depth_bound
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::{Bounds, WaveletIndex, ROOT};
    use crate::local_error::CoefficientOracle;
    use crate::nearbest::nearbest_tree;
    use crate::sigma::brute_force_sigma;
    use crate::tree::WaveletTree;
    use approx::assert_relative_eq;
    use std::collections::BTreeMap;

    #[test]
    fn worked_example_certificate() {
        let oracle = CoefficientOracle::new(&crate::testutil::worked_sequence());
        let run = nearbest_tree(&oracle, 1).unwrap();
        let trimmed = run.trim();
        let sigma_1 = brute_force_sigma(&oracle, 1, 2, 3, 10_000).unwrap();
        let cert = certify(&run, &trimmed, 1, sigma_1).unwrap();

        assert_relative_eq!(cert.bound, 5.1, max_relative = 1e-14);
        assert_relative_eq!(cert.global_error, 0.7, max_relative = 1e-14);
        assert_relative_eq!(cert.lower, 1.19 / 2.4, max_relative = 1e-14);
        assert_relative_eq!(cert.upper, 3.0 * 1.19 / 2.4, max_relative = 1e-14);
        assert!(cert.all_pass());
    }

    #[test]
    fn out_of_range_budget_is_rejected() {
        let oracle = CoefficientOracle::new(&crate::testutil::worked_sequence());
        let run = nearbest_tree(&oracle, 1).unwrap();
        let trimmed = run.trim();
        assert!(matches!(
            certify(&run, &trimmed, 2, 0.7),
            Err(Error::CertificateRange { .. })
        ));
        assert!(matches!(
            certify(&run, &trimmed, 0, 0.7),
            Err(Error::CertificateRange { .. })
        ));
    }

    #[test]
    fn zero_oracle_run_has_no_certifiable_step() {
        // stopping at q = 0 leaves no step to certify; all stored
        // quantities are zero
        let zero = |_: WaveletIndex, _: u32| 0.0;
        let run = nearbest_tree(&zero, 3).unwrap();
        assert_eq!(run.steps(), 0);
        assert_eq!(run.threshold(), 0.0);
        assert_eq!(run.stored_global_error(&run.trim()), 0.0);
        assert!(matches!(
            certify(&run, &run.trim(), 1, 0.0),
            Err(Error::CertificateRange { .. })
        ));
    }

    #[test]
    fn cardinality_check_examples() {
        // N=1, #T=2: 2 <= 2 <= 3 and depth bound
        let oracle = CoefficientOracle::new(&crate::testutil::worked_sequence());
        let run = nearbest_tree(&oracle, 1).unwrap();
        let trimmed = run.trim();
        assert_eq!(trimmed.cardinality(), 2);
        assert!(cardinality_check(&trimmed, 1));

        // flat tree after N enrichments sits exactly on the lower bound
        let mut degrees = BTreeMap::new();
        degrees.insert(ROOT, 3);
        let flat = QuarkletTree::from_parts(WaveletTree::root_only(), degrees).unwrap();
        assert_eq!(flat.cardinality(), 4);
        assert!(cardinality_check(&flat, 3));

        // bounds for N=3 are 4 <= #T <= 8: cardinality 9 must fail
        let mut seq = crate::coeff::CoefficientSequence::new(Bounds::new(6, 5).unwrap());
        seq.set(crate::coeff::FrameSlot::quarklet(0, ROOT), 1.0)
            .unwrap();
        let too_big = {
            let mut degrees = BTreeMap::new();
            degrees.insert(ROOT, 8);
            QuarkletTree::from_parts(WaveletTree::root_only(), degrees).unwrap()
        };
        assert_eq!(too_big.cardinality(), 9);
        assert!(!cardinality_check(&too_big, 3));
    }
}
