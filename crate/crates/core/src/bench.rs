//! Convergence experiments and rate fitting.

use crate::certificate::cardinality_check;
use crate::error::{Error, Result};
use crate::haar::{l2_error, WeightRule};
use crate::index::Bounds;
use crate::local_error::CoefficientOracle;
use crate::nearbest::NearbestRun;
use crate::solver::{adaptive_coefficients, SolveReport, SolverConfig};
use crate::target::TargetFunction;
use crate::tree::QuarkletTree;
use std::fmt::Write as _;

/// One stage of a refinement run.
#[derive(Debug, Clone, Copy)]
pub struct ExperimentRecord {
    /// Subdivision count `N`.
    pub step: usize,
    /// Cardinality of the trimmed tree (degrees of freedom).
    pub dofs: usize,
    /// Measured `L2` distance between the target and the tree expansion.
    pub l2_error: f64,
    /// Square root of the global error of the trimmed tree.
    pub estimator: f64,
    /// Run threshold `q_N`.
    pub threshold: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub bounds: Bounds,
    /// Subdivision budget `N_max`.
    pub steps: usize,
    pub rule: WeightRule,
    pub solver: SolverConfig,
}

#[derive(Debug, Clone)]
pub struct ExperimentRun {
    /// One record per stage, starting at the untouched root tree.
    pub records: Vec<ExperimentRecord>,
    /// False when the coefficient solve ended by stagnation or budget; the
    /// experiment still proceeds on the coefficients found.
    pub solver_converged: bool,
    pub solve: SolveReport,
    pub final_tree: QuarkletTree,
}

/// Computes coefficients for the target, then runs the refinement and
/// records error, estimator and threshold after every subdivision.
pub fn run_experiment(
    target: &dyn TargetFunction,
    config: &ExperimentConfig,
) -> Result<ExperimentRun> {
    let solve = adaptive_coefficients(target, config.bounds, &config.rule, &config.solver)?;
    let oracle = CoefficientOracle::new(&solve.coefficients);

    let mut run = NearbestRun::new(&oracle);
    let mut records = Vec::with_capacity(config.steps + 1);
    let mut record_stage = |state: &crate::nearbest::RunState| -> Result<QuarkletTree> {
        let tree = state.trim();
        let restricted = solve.coefficients.restricted_to(&tree);
        let record = ExperimentRecord {
            step: state.steps(),
            dofs: tree.cardinality(),
            l2_error: l2_error(target, &restricted, &config.rule)?,
            estimator: state.stored_global_error(&tree).max(0.0).sqrt(),
            threshold: state.threshold(),
        };
        debug_assert!(cardinality_check(&tree, record.step));
        records.push(record);
        Ok(tree)
    };

    let mut tree = record_stage(run.state())?;
    for _ in 0..config.steps {
        if !run.step() {
            break;
        }
        tree = record_stage(run.state())?;
    }
    Ok(ExperimentRun {
        records,
        solver_converged: solve.converged,
        solve,
        final_tree: tree,
    })
}

/// Experiment records as CSV.
pub fn experiment_csv(records: &[ExperimentRecord]) -> String {
    let mut out = String::from("N,dofs,l2_error,estimator,qN\n");
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.step, r.dofs, r.l2_error, r.estimator, r.threshold
        )
        .expect("string write");
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateModel {
    /// `error ~ exp(-beta n^gamma)`.
    Exponential { beta: f64, gamma: f64 },
    /// `error ~ n^(-exponent)`.
    Algebraic { exponent: f64 },
}

/// A fitted decay model with the goodness of its linearised least squares.
#[derive(Debug, Clone, Copy)]
pub struct RateFit {
    pub model: RateModel,
    pub r_squared: f64,
}

/// Both decay models fitted to the same records.
#[derive(Debug, Clone, Copy)]
pub struct RateSummary {
    pub exponential: RateFit,
    pub algebraic: RateFit,
}

const MIN_FIT_RECORDS: usize = 8;

fn linear_regression(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = points.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in points {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r_squared = (sxy * sxy) / (sxx * syy);
    Some((slope, intercept, r_squared))
}

/// Fits the exponential model `exp(-beta n^gamma)` over a gamma grid
/// `0.1, 0.2, ..., 1.0` (best linearised R^2 wins, ties to the smaller
/// gamma) and the algebraic model `n^-s`, both against the measured errors.
///
/// Requires at least eight records with positive error; constant errors are
/// rejected as degenerate.
pub fn fit_rate(records: &[ExperimentRecord]) -> Result<RateSummary> {
    let usable: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.l2_error > 0.0 && r.dofs >= 1)
        .map(|r| (r.dofs as f64, r.l2_error.ln()))
        .collect();
    if usable.len() < MIN_FIT_RECORDS {
        return Err(Error::TooFewRecords {
            needed: MIN_FIT_RECORDS,
            got: usable.len(),
        });
    }

    let mut exponential: Option<RateFit> = None;
    for tenth in 1..=10u32 {
        let gamma = tenth as f64 / 10.0;
        let points: Vec<(f64, f64)> = usable.iter().map(|(n, y)| (n.powf(gamma), *y)).collect();
        let Some((slope, _, r_squared)) = linear_regression(&points) else {
            return Err(Error::DegenerateFit);
        };
        let fit = RateFit {
            model: RateModel::Exponential {
                beta: -slope,
                gamma,
            },
            r_squared,
        };
        if exponential.is_none_or(|best| fit.r_squared > best.r_squared) {
            exponential = Some(fit);
        }
    }

    let log_points: Vec<(f64, f64)> = usable.iter().map(|(n, y)| (n.ln(), *y)).collect();
    let Some((slope, _, r_squared)) = linear_regression(&log_points) else {
        return Err(Error::DegenerateFit);
    };
    let algebraic = RateFit {
        model: RateModel::Algebraic { exponent: -slope },
        r_squared,
    };
    Ok(RateSummary {
        exponential: exponential.expect("grid is nonempty"),
        algebraic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::target::TestFunction;
    use approx::assert_relative_eq;

    fn synthetic(errors: impl Iterator<Item = (usize, f64)>) -> Vec<ExperimentRecord> {
        errors
            .enumerate()
            .map(|(i, (dofs, err))| ExperimentRecord {
                step: i,
                dofs,
                l2_error: err,
                estimator: err,
                threshold: 0.0,
            })
            .collect()
    }

    #[test]
    fn recovers_exponential_model() {
        let records = synthetic((1..=20).map(|n| {
            let x = n as f64;
            (n, (-0.5 * x.sqrt()).exp())
        }));
        let fit = fit_rate(&records).unwrap();
        let RateModel::Exponential { beta, gamma } = fit.exponential.model else {
            panic!("expected exponential model");
        };
        assert_eq!(gamma, 0.5);
        assert_relative_eq!(beta, 0.5, max_relative = 1e-10);
        assert!(fit.exponential.r_squared > 0.999);
    }

    #[test]
    fn recovers_algebraic_model() {
        let records = synthetic((1..=20).map(|n| (n, 1.0 / n as f64)));
        let fit = fit_rate(&records).unwrap();
        let RateModel::Algebraic { exponent } = fit.algebraic.model else {
            panic!("expected algebraic model");
        };
        assert_relative_eq!(exponent, 1.0, max_relative = 1e-10);
        assert!(fit.algebraic.r_squared > 0.999);
    }

    #[test]
    fn selects_the_benchmark_exponent() {
        // the reference decay exp(-2 ln 2 * n^{1/5})
        let records = synthetic((1..=40).map(|n| {
            let x = n as f64;
            (n, (-2.0 * 2.0f64.ln() * x.powf(0.2)).exp())
        }));
        let fit = fit_rate(&records).unwrap();
        let RateModel::Exponential { beta, gamma } = fit.exponential.model else {
            panic!("expected exponential model");
        };
        assert_eq!(gamma, 0.2);
        assert_relative_eq!(beta, 2.0 * 2.0f64.ln(), max_relative = 1e-9);
    }

    #[test]
    fn rejects_small_or_degenerate_inputs() {
        let records = synthetic((1..=5).map(|n| (n, 0.5)));
        assert!(matches!(
            fit_rate(&records),
            Err(Error::TooFewRecords { .. })
        ));
        let constant = synthetic((1..=10).map(|n| (n, 0.5)));
        assert!(matches!(fit_rate(&constant), Err(Error::DegenerateFit)));
        let zeros = synthetic((1..=10).map(|n| (n, 0.0)));
        assert!(matches!(fit_rate(&zeros), Err(Error::TooFewRecords { .. })));
    }

    #[test]
    fn zero_step_experiment_has_single_root_record() {
        let config = ExperimentConfig {
            bounds: Bounds::new(3, 1).unwrap(),
            steps: 0,
            rule: WeightRule::default(),
            solver: SolverConfig {
                growth_batch: 6,
                max_rounds: 4,
                ..SolverConfig::default()
            },
        };
        let f = TestFunction::singularity(0.75).unwrap();
        let run = run_experiment(&f, &config).unwrap();
        assert_eq!(run.records.len(), 1);
        assert_eq!(run.records[0].step, 0);
        assert_eq!(run.records[0].dofs, 1);
        assert_eq!(run.final_tree, QuarkletTree::root_only());
    }

    #[test]
    fn experiment_records_are_coherent() {
        let config = ExperimentConfig {
            bounds: Bounds::new(4, 2).unwrap(),
            steps: 6,
            rule: WeightRule::default(),
            solver: SolverConfig {
                growth_batch: 8,
                max_rounds: 6,
                ..SolverConfig::default()
            },
        };
        let f = TestFunction::singularity(0.75).unwrap();
        let run = run_experiment(&f, &config).unwrap();
        assert_eq!(run.records.len(), 7);
        for record in &run.records {
            assert!(record.dofs >= record.step + 1);
            assert!(record.l2_error.is_finite() && record.l2_error >= 0.0);
            assert!(record.estimator.is_finite());
        }
        let csv = experiment_csv(&run.records);
        assert!(csv.starts_with("N,dofs,l2_error,estimator,qN\n"));
        assert_eq!(csv.lines().count(), 1 + run.records.len());
    }
}
