//! Command-line driver for adaptive quarklet tree approximation.

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use quarklet_core::bench::{experiment_csv, fit_rate, run_experiment, ExperimentConfig, RateModel};
use quarklet_core::coeff::CoefficientSequence;
use quarklet_core::haar::WeightRule;
use quarklet_core::local_error::CoefficientOracle;
use quarklet_core::nearbest::nearbest_tree;
use quarklet_core::sigma::brute_force_sigma;
use quarklet_core::solver::{adaptive_coefficients, SolverConfig};
use quarklet_core::target::TestFunction;
use quarklet_core::{certificate, Bounds};
use std::fs;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "quarklet",
    about = "Near-best adaptive quarklet tree approximation on the unit interval",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SolverArgs {
    /// Truncation level of the index set
    #[arg(long, default_value_t = 10)]
    jmax: u32,
    /// Maximal polynomial degree of the index set
    #[arg(long, default_value_t = 5)]
    pmax: u32,
    /// Full-residual tolerance of the coefficient solve
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Weight exponent delta in w_p = (p+1)^-delta
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Indices admitted per growth round
    #[arg(long, default_value_t = 10)]
    batch: usize,
    /// Cap on growth rounds
    #[arg(long, default_value_t = 200)]
    rounds: usize,
}

impl SolverArgs {
    fn bounds(&self) -> Result<Bounds> {
        Ok(Bounds::new(self.jmax, self.pmax)?)
    }

    fn rule(&self) -> Result<WeightRule> {
        Ok(WeightRule::new(self.delta)?)
    }

    fn config(&self) -> SolverConfig {
        SolverConfig {
            residual_tol: self.tol,
            growth_batch: self.batch,
            max_rounds: self.rounds,
            ..SolverConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute frame coefficients of a test function and write them as
    /// p,j,k,c rows
    Coeffs {
        /// singularity | reflected | boundary_layer | spike
        #[arg(long)]
        function: String,
        #[command(flatten)]
        solver: SolverArgs,
        /// Output coefficient CSV
        #[arg(long)]
        out: PathBuf,
        /// Optional solver log CSV (round,active_size,residual)
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Run the refinement on stored coefficients; write the trimmed tree and
    /// the step log
    Approximate {
        /// Coefficient CSV produced by `coeffs`
        #[arg(long)]
        coeffs: PathBuf,
        /// Subdivision budget
        #[arg(long, default_value_t = 50)]
        steps: usize,
        /// Trimmed tree as JSON
        #[arg(long)]
        out_tree: PathBuf,
        /// Step log CSV (N,lambda_j,lambda_k,qN,EN_root)
        #[arg(long)]
        out_csv: PathBuf,
    },
    /// Full convergence experiment: solve, refine, record errors and fit
    /// decay rates
    Bench {
        /// singularity | reflected | boundary_layer | spike
        #[arg(long)]
        function: String,
        /// Restrict to degree zero (space refinement only)
        #[arg(long)]
        wavelet_only: bool,
        /// Subdivision budget
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[command(flatten)]
        solver: SolverArgs,
        /// Output record CSV (N,dofs,l2_error,estimator,qN)
        #[arg(long)]
        out: PathBuf,
    },
    /// Near-best certificate of a run against the exhaustive best tree
    Certify {
        /// Coefficient CSV produced by `coeffs`
        #[arg(long)]
        coeffs: PathBuf,
        /// Subdivision budget of the run
        #[arg(long)]
        steps: usize,
        /// Cardinality budget compared against (1 <= n <= steps)
        #[arg(long)]
        n: usize,
        /// Depth bound of the exhaustive search
        #[arg(long)]
        depth_bound: u32,
        /// Cap on tree shapes visited by the search
        #[arg(long, default_value_t = 10_000_000)]
        shape_budget: usize,
        /// Output JSON (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Coeffs {
            function,
            solver,
            out,
            log,
        } => {
            let target = TestFunction::from_name(&function)?;
            let report = adaptive_coefficients(
                &target,
                solver.bounds()?,
                &solver.rule()?,
                &solver.config(),
            )?;
            fs::write(&out, report.coefficients.to_csv())
                .with_context(|| format!("writing {}", out.display()))?;
            if let Some(log) = log {
                fs::write(&log, report.log_csv())
                    .with_context(|| format!("writing {}", log.display()))?;
            }
            eprintln!(
                "{} coefficients after {} rounds, residual {:.3e}{}",
                report.coefficients.support_len(),
                report.rounds,
                report.residual_history.last().copied().unwrap_or(0.0),
                if report.converged {
                    ""
                } else {
                    " (not converged)"
                }
            );
        }
        Command::Approximate {
            coeffs,
            steps,
            out_tree,
            out_csv,
        } => {
            let text = fs::read_to_string(&coeffs)
                .with_context(|| format!("reading {}", coeffs.display()))?;
            let sequence = CoefficientSequence::from_csv_inferred(&text)?;
            let oracle = CoefficientOracle::new(&sequence);
            let run = nearbest_tree(&oracle, steps)?;
            let trimmed = run.trim();
            fs::write(&out_tree, trimmed.to_json())
                .with_context(|| format!("writing {}", out_tree.display()))?;
            fs::write(&out_csv, run.log_csv())
                .with_context(|| format!("writing {}", out_csv.display()))?;
            eprintln!(
                "{} steps, {} degrees of freedom, estimator {:.6e}{}",
                run.steps(),
                trimmed.cardinality(),
                run.stored_global_error(&trimmed).max(0.0).sqrt(),
                if run.stopped_early() {
                    " (stopped early)"
                } else {
                    ""
                }
            );
        }
        Command::Bench {
            function,
            wavelet_only,
            steps,
            solver,
            out,
        } => {
            let target = TestFunction::from_name(&function)?;
            let mut bounds = solver.bounds()?;
            if wavelet_only {
                bounds = Bounds::new(bounds.j_max, 0)?;
            }
            let config = ExperimentConfig {
                bounds,
                steps,
                rule: solver.rule()?,
                solver: solver.config(),
            };
            let run = run_experiment(&target, &config)?;
            fs::write(&out, experiment_csv(&run.records))
                .with_context(|| format!("writing {}", out.display()))?;
            if !run.solver_converged {
                eprintln!("warning: coefficient solve did not reach the residual tolerance");
            }
            match fit_rate(&run.records) {
                Ok(summary) => {
                    if let RateModel::Exponential { beta, gamma } = summary.exponential.model {
                        eprintln!(
                            "exponential fit: beta={beta:.4} gamma={gamma:.1} (R^2 {:.4})",
                            summary.exponential.r_squared
                        );
                    }
                    if let RateModel::Algebraic { exponent } = summary.algebraic.model {
                        eprintln!(
                            "algebraic fit: s={exponent:.4} (R^2 {:.4})",
                            summary.algebraic.r_squared
                        );
                    }
                }
                Err(err) => eprintln!("rate fit unavailable: {err}"),
            }
        }
        Command::Certify {
            coeffs,
            steps,
            n,
            depth_bound,
            shape_budget,
            out,
        } => {
            let text = fs::read_to_string(&coeffs)
                .with_context(|| format!("reading {}", coeffs.display()))?;
            let sequence = CoefficientSequence::from_csv_inferred(&text)?;
            let oracle = CoefficientOracle::new(&sequence);
            let run = nearbest_tree(&oracle, steps)?;
            let trimmed = run.trim();
            let sigma = brute_force_sigma(
                &oracle,
                n,
                depth_bound,
                sequence.bounds().p_max,
                shape_budget,
            )?;
            let cert = certificate::certify(&run, &trimmed, n, sigma)?;
            let json = cert.to_json();
            match out {
                Some(path) => {
                    fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?
                }
                None => println!("{json}"),
            }
        }
    }
    Ok(())
}
