//! Weighted Gramian systems of truncated quarklet index sets.

use crate::coeff::FrameSlot;
use crate::error::Result;
use crate::haar::{inner_product, slot_breakpoints, WeightRule};
use crate::index::{Bounds, WaveletIndex};
use crate::quad::integrate_adaptive;
use crate::target::TargetFunction;
use nalgebra::{DMatrix, DVector};
use std::fmt::Write as _;

/// The full truncated index set in canonical order: generator slots by
/// degree, then quarklet slots by `(level, translation, degree)`.
pub fn truncated_index_set(bounds: Bounds) -> Vec<FrameSlot> {
    let mut slots = Vec::new();
    for p in 0..=bounds.p_max {
        slots.push(FrameSlot::generator(p));
    }
    for j in 0..=bounds.j_max {
        for k in 0..1u64 << j {
            let idx = WaveletIndex::new(j, k).expect("translation in range");
            for p in 0..=bounds.p_max {
                slots.push(FrameSlot::quarklet(p, idx));
            }
        }
    }
    slots
}

/// Weighted Gramian `G[a][b] = w_a w_b <psi_a, psi_b>`; symmetric by
/// construction, assembled from the exact inner products.
pub fn assemble_gramian(indices: &[FrameSlot], rule: &WeightRule) -> DMatrix<f64> {
    let n = indices.len();
    let weights: Vec<f64> = indices.iter().map(|s| rule.weight(s.degree())).collect();
    let mut matrix = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let value = weights[a] * weights[b] * inner_product(&indices[a], &indices[b]);
            matrix[(a, b)] = value;
            matrix[(b, a)] = value;
        }
    }
    matrix
}

/// Weighted load `b[a] = w_a <f, psi_a>`, using the target's closed form
/// when available and adaptive quadrature per dyadic piece otherwise.
pub fn assemble_rhs(
    target: &dyn TargetFunction,
    indices: &[FrameSlot],
    rule: &WeightRule,
) -> Result<DVector<f64>> {
    let mut rhs = DVector::zeros(indices.len());
    for (a, slot) in indices.iter().enumerate() {
        rhs[a] = rule.weight(slot.degree()) * load_entry(target, slot)?;
    }
    Ok(rhs)
}

/// Unweighted load `<f, psi_slot>`.
pub fn load_entry(target: &dyn TargetFunction, slot: &FrameSlot) -> Result<f64> {
    if let Some(value) = target.load_value(slot) {
        return Ok(value);
    }
    let points = slot_breakpoints(slot);
    let label = slot.to_string();
    let mut total = 0.0;
    for pair in points.windows(2) {
        total += integrate_adaptive(
            &|x: f64| target.eval(x) * crate::haar::slot_eval(slot, x),
            pair[0],
            pair[1],
            1e-12,
            1e-16,
            Some(&label),
        )?;
    }
    Ok(total)
}

/// An assembled system `G c = b` over an ordered index list.
#[derive(Debug, Clone)]
pub struct GramianSystem {
    pub indices: Vec<FrameSlot>,
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

impl GramianSystem {
    pub fn assemble(
        target: &dyn TargetFunction,
        indices: Vec<FrameSlot>,
        rule: &WeightRule,
    ) -> Result<Self> {
        let matrix = assemble_gramian(&indices, rule);
        let rhs = assemble_rhs(target, &indices, rule)?;
        Ok(Self {
            indices,
            matrix,
            rhs,
        })
    }

    fn legend(&self) -> String {
        let mut out = String::new();
        for (a, slot) in self.indices.iter().enumerate() {
            writeln!(
                out,
                "# {a}: {},{},{}",
                slot.degree(),
                slot.csv_level(),
                slot.owner().translation()
            )
            .expect("string write");
        }
        out
    }

    /// Row-major matrix dump with an index legend header.
    pub fn matrix_csv(&self) -> String {
        let mut out = self.legend();
        for a in 0..self.matrix.nrows() {
            let row: Vec<String> = (0..self.matrix.ncols())
                .map(|b| self.matrix[(a, b)].to_string())
                .collect();
            writeln!(out, "{}", row.join(",")).expect("string write");
        }
        out
    }

    /// Load vector dump with the same legend.
    pub fn rhs_csv(&self) -> String {
        let mut out = self.legend();
        for a in 0..self.rhs.len() {
            writeln!(out, "{}", self.rhs[a]).expect("string write");
        }
        out
    }
}

/// Certified Rayleigh bounds on the extreme eigenvalues of a symmetric
/// positive semidefinite matrix: the first component is an upper bound on
/// the smallest eigenvalue, the second a lower bound on the largest.
///
/// The largest is approached by plain power iteration, the smallest by
/// inverse iteration through a Cholesky factor (shifted when the matrix is
/// singular to machine precision). Both returned numbers are Rayleigh
/// quotients, hence certificates regardless of iteration convergence.
pub fn finite_section_spectrum_bounds(matrix: &DMatrix<f64>) -> (f64, f64) {
    let n = matrix.nrows();
    assert!(n > 0 && matrix.is_square());
    let rayleigh = |v: &DVector<f64>| {
        let gv = matrix * v;
        v.dot(&gv) / v.dot(v)
    };

    // largest eigenvalue from below
    let mut v = DVector::from_fn(n, |i, _| 1.0 + (i % 3) as f64);
    for _ in 0..200 {
        let next = matrix * &v;
        let norm = next.norm();
        if norm == 0.0 {
            return (0.0, 0.0);
        }
        v = next / norm;
    }
    let upper_witness = rayleigh(&v);

    // smallest eigenvalue from above via inverse iteration; shift until the
    // factorisation succeeds
    let mut shift = 0.0;
    let factor = loop {
        let shifted = if shift == 0.0 {
            matrix.clone()
        } else {
            matrix + DMatrix::identity(n, n) * shift
        };
        match shifted.cholesky() {
            Some(f) => break f,
            None => {
                shift = if shift == 0.0 {
                    upper_witness * 1e-15
                } else {
                    shift * 16.0
                };
            }
        }
    };
    let mut w = DVector::from_fn(n, |i, _| if i % 2 == 0 { 1.0 } else { -0.5 });
    w /= w.norm();
    for _ in 0..60 {
        let next = factor.solve(&w);
        let norm = next.norm();
        if norm == 0.0 {
            break;
        }
        w = next / norm;
    }
    (rayleigh(&w), upper_witness)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::SlotTarget;
    use crate::index::ROOT;
    use crate::target::TestFunction;
    use approx::assert_relative_eq;
    use nalgebra::SymmetricEigen;

    #[test]
    fn singleton_system_is_identity() {
        let rule = WeightRule::default();
        let indices = vec![FrameSlot::quarklet(0, ROOT)];
        let g = assemble_gramian(&indices, &rule);
        assert_eq!(g.nrows(), 1);
        assert_relative_eq!(g[(0, 0)], 1.0);
    }

    #[test]
    fn diagonal_entry_carries_squared_weight() {
        // degree 1 with delta = 1: (1/2)^2 * 1/3
        let rule = WeightRule::default();
        let indices = vec![FrameSlot::quarklet(1, ROOT)];
        let g = assemble_gramian(&indices, &rule);
        assert_relative_eq!(g[(0, 0)], 1.0 / 12.0, max_relative = 1e-14);
    }

    #[test]
    fn disjoint_supports_give_zero() {
        let rule = WeightRule::default();
        let a = FrameSlot::quarklet(0, WaveletIndex::new(1, 0).unwrap());
        let b = FrameSlot::quarklet(0, WaveletIndex::new(1, 1).unwrap());
        let g = assemble_gramian(&[a, b], &rule);
        assert_eq!(g[(0, 1)], 0.0);
    }

    #[test]
    fn frame_element_load_equals_gramian_column() {
        let rule = WeightRule::default();
        let indices = truncated_index_set(Bounds::new(2, 1).unwrap());
        let g = assemble_gramian(&indices, &rule);
        let target_slot = FrameSlot::quarklet(0, ROOT);
        let column = indices
            .iter()
            .position(|s| *s == target_slot)
            .expect("slot in set");
        let rhs = assemble_rhs(&SlotTarget(target_slot), &indices, &rule).unwrap();
        // w_0 = 1, so b = G e_column exactly
        for a in 0..indices.len() {
            assert_eq!(rhs[a], g[(a, column)], "row {a}");
        }
    }

    #[test]
    fn zero_target_gives_zero_rhs() {
        struct Zero;
        impl TargetFunction for Zero {
            fn eval(&self, _x: f64) -> f64 {
                0.0
            }
        }
        let rule = WeightRule::default();
        let indices = truncated_index_set(Bounds::new(1, 1).unwrap());
        let rhs = assemble_rhs(&Zero, &indices, &rule).unwrap();
        assert!(rhs.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn truncated_set_size_and_order() {
        let bounds = Bounds::new(2, 1).unwrap();
        let slots = truncated_index_set(bounds);
        // 2 generator degrees + (1+2+4) nodes x 2 degrees
        assert_eq!(slots.len(), 2 + 7 * 2);
        assert_eq!(slots[0], FrameSlot::generator(0));
        assert_eq!(slots[2], FrameSlot::quarklet(0, ROOT));
        let mut sorted = slots.clone();
        sorted.sort();
        assert_eq!(slots, sorted);
    }

    #[test]
    fn assembled_systems_are_symmetric_and_psd() {
        let rule = WeightRule::default();
        for (j, p) in [(2u32, 1u32), (2, 5), (3, 2)] {
            let indices = truncated_index_set(Bounds::new(j, p).unwrap());
            let g = assemble_gramian(&indices, &rule);
            let gt = g.transpose();
            assert_eq!(g, gt, "symmetry at j={j} p={p}");
            let eigen = SymmetricEigen::new(g);
            let min = eigen.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
            assert!(min >= -1e-10, "smallest eigenvalue {min} at j={j} p={p}");
        }
    }

    #[test]
    fn spectrum_bounds_match_dense_eigenvalues() {
        let rule = WeightRule::default();
        let indices = truncated_index_set(Bounds::new(2, 2).unwrap());
        let g = assemble_gramian(&indices, &rule);
        let eigen = SymmetricEigen::new(g.clone());
        let min = eigen.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
        let max = eigen.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
        let (small, large) = finite_section_spectrum_bounds(&g);
        // certificates: small >= min, large <= max, both within a few digits
        assert!(small >= min - 1e-13 && small <= min * 10.0 + 1e-12);
        assert!(large <= max + 1e-13 && large >= 0.9 * max);
    }

    #[test]
    fn csv_dumps_carry_legend() {
        let rule = WeightRule::default();
        let indices = truncated_index_set(Bounds::new(0, 0).unwrap());
        let f = TestFunction::singularity(0.75).unwrap();
        let system = GramianSystem::assemble(&f, indices, &rule).unwrap();
        let csv = system.matrix_csv();
        assert!(csv.starts_with("# 0: 0,-1,0\n# 1: 0,0,0\n"));
        assert_eq!(csv.lines().count(), 4);
        let rhs = system.rhs_csv();
        assert!(rhs.contains('\n'));
    }
}
