//! Penalized error recursions steering the refinement algorithm.
//!
//! All combinators use the zero convention: a harmonic combination of two
//! zeros is zero, never NaN. No epsilon regularisation is applied so the
//! reciprocal identities hold exactly on positive inputs.

/// Harmonic combination `a*b / (a + b)` with the both-zero guard.
///
/// Feeding a node's local error and its parent's penalized error yields the
/// node's penalized error; feeding a subtree error and the previous penalized
/// subtree error advances that recursion by one refinement.
pub fn harmonic(a: f64, b: f64) -> f64 {
    debug_assert!(a >= 0.0 && b >= 0.0);
    if a == 0.0 && b == 0.0 {
        return 0.0;
    }
    a * b / (a + b)
}

/// Penalized local error of a node given its parent's value; the root uses
/// its plain local error instead.
pub fn penalized_error(local_error: f64, parent_penalized: f64) -> f64 {
    harmonic(local_error, parent_penalized)
}

/// Best achievable subtree error at an inner node: either keep both children
/// subtrees or undo the subdivisions below the node and spend them on
/// polynomial enrichment.
pub fn best_subtree_error(child1: f64, child2: f64, enriched: f64) -> f64 {
    (child1 + child2).min(enriched)
}

/// Penalized subtree error after one more refinement below the node.
pub fn penalized_subtree_error(subtree_error: f64, previous: f64) -> f64 {
    harmonic(subtree_error, previous)
}

/// Threshold and refinement target of an inner node from its children.
///
/// The threshold is the larger child threshold capped by the node's penalized
/// subtree error; the target is inherited from the child attaining the
/// maximum, ties resolved toward the first (left) child.
pub fn threshold_and_target<T: Copy>(
    q1: f64,
    target1: T,
    q2: f64,
    target2: T,
    penalized_subtree: f64,
) -> (f64, T) {
    let (q_max, target) = if q1 >= q2 {
        (q1, target1)
    } else {
        (q2, target2)
    };
    (q_max.min(penalized_subtree), target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn penalized_error_examples() {
        assert_eq!(penalized_error(0.0, 0.0), 0.0);
        assert_relative_eq!(penalized_error(1.1, 1.7), 1.87 / 2.8, max_relative = 1e-15);
        assert_relative_eq!(
            penalized_error(0.1, 1.7),
            0.17 / 1.8,
            max_relative = 1e-15
        );
        // one-sided zeros collapse to zero without dividing by zero
        assert_eq!(penalized_error(0.0, 3.0), 0.0);
        assert_eq!(penalized_error(3.0, 0.0), 0.0);
    }

    #[test]
    fn best_subtree_error_examples() {
        assert_eq!(best_subtree_error(1.1, 0.1, 0.7), 0.7);
        assert_eq!(best_subtree_error(0.0, 0.0, 0.0), 0.0);
        assert_eq!(best_subtree_error(0.2, 0.3, 0.9), 0.5);
    }

    #[test]
    fn penalized_subtree_error_examples() {
        assert_relative_eq!(
            penalized_subtree_error(0.7, 1.7),
            1.19 / 2.4,
            max_relative = 1e-15
        );
        assert_eq!(penalized_subtree_error(0.0, 0.0), 0.0);
        assert_eq!(penalized_subtree_error(2.0, 2.0), 1.0);
    }

    #[test]
    fn threshold_and_target_examples() {
        let (q, s) = threshold_and_target(1.87 / 2.8, 'l', 0.17 / 1.8, 'r', 1.19 / 2.4);
        assert_relative_eq!(q, 1.19 / 2.4, max_relative = 1e-15);
        assert_eq!(s, 'l');

        // ties break toward the first child
        let (q, s) = threshold_and_target(0.3, 'a', 0.3, 'b', 1.0);
        assert_eq!((q, s), (0.3, 'a'));

        let (q, s) = threshold_and_target(0.5, 'a', 0.2, 'b', 0.7);
        assert_eq!((q, s), (0.5, 'a'));
    }

    proptest! {
        #[test]
        fn harmonic_is_bounded_by_both_inputs(a in 0.0f64..1e6, b in 0.0f64..1e6) {
            let h = harmonic(a, b);
            prop_assert!(h >= 0.0);
            prop_assert!(h <= a || a == 0.0);
            prop_assert!(h <= b || b == 0.0);
        }

        #[test]
        fn harmonic_reciprocal_identity(a in 1e-6f64..1e6, b in 1e-6f64..1e6) {
            let h = harmonic(a, b);
            prop_assert!((1.0 / h - (1.0 / a + 1.0 / b)).abs() <= 1e-10 * (1.0 / h));
        }
    }
}
