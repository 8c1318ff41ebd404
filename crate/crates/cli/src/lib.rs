//! `keyhole-stc` command-line front end.
//!
//! Exit codes: 0 success, 1 input or config error, 2 numerical failure,
//! 3 criterion not satisfied or not applicable, 4 property-suite failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod reproduce;
pub mod sweep;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use keyhole_stc::design::Theorem2Verdict;
use keyhole_stc::io::{read_matrix, write_matrix};
use keyhole_stc::verify;
use keyhole_stc::{
    construct_improving_correlation, criterion_check, difference_from_gram, ostbc_scan, CriterionVerdict, Estimator,
};

use crate::config::{load_config, DEFAULT_SEED};
use crate::error::{CliError, CliResult};
use crate::reproduce::{example_report, run_figure, write_figure_bundle, Figure, FigureOptions};
use crate::sweep::{simulate_curves, write_outputs};

#[derive(Debug, Parser)]
#[command(name = "keyhole-stc", version, about = "PEP analysis of space-time codes over correlated keyhole channels")]
pub struct Cli {
    /// Root seed for every Monte Carlo stream.
    #[arg(long, global = true, env = "KEYHOLE_STC_SEED")]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Plain,
    #[value(alias = "semi-analytic")]
    Semi,
    Conditional,
}

impl From<EstimatorArg> for Estimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Plain => Estimator::Plain,
            EstimatorArg::Semi => Estimator::SemiAnalytic,
            EstimatorArg::Conditional => Estimator::Conditional,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReproduceTarget {
    Example,
    Fig1,
    Fig2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyTarget {
    Lemma1,
    Theorem2,
    Ostbc,
    Estimators,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the eigenvalue criterion for every admissible L.
    CheckCriterion {
        /// JSON file holding the code-difference Gram matrix.
        #[arg(long)]
        gram: PathBuf,
        /// Receive antennas.
        #[arg(short = 'N', long = "receive")]
        n: usize,
    },
    /// Build the improving correlation matrix for a given L.
    Construct {
        /// JSON file holding the code-difference Gram matrix.
        #[arg(long)]
        gram: PathBuf,
        /// Number of weakest eigen-directions to switch off.
        #[arg(short = 'L', long = "zeroed")]
        l: usize,
        /// Where to write the correlation matrix (JSON).
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep a configured experiment over its SNR grid and write a CSV.
    Simulate {
        /// Experiment configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        /// CSV output; the provenance sidecar is written next to it.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the configured samples per SNR point.
        #[arg(long)]
        samples: Option<u64>,
        /// Overrides the configured estimator.
        #[arg(long, value_enum)]
        estimator: Option<EstimatorArg>,
        /// Relative split applied to repeated eigenvalues in the closed form.
        #[arg(long)]
        jitter: Option<f64>,
    },
    /// Rerun the three-antenna example or one of its figures.
    Reproduce {
        #[arg(value_enum)]
        target: ReproduceTarget,
        /// Output directory for CSV, provenance and plot script.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Samples per SNR point.
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long, value_enum)]
        estimator: Option<EstimatorArg>,
    },
    /// Run a seeded property suite.
    Verify {
        #[arg(value_enum)]
        target: VerifyTarget,
        /// Monte Carlo samples per trial (lemma1, estimators).
        #[arg(long)]
        samples: Option<u64>,
        /// Number of random trials.
        #[arg(long)]
        trials: Option<usize>,
        /// Largest M in the identical-spectrum scan (ostbc).
        #[arg(long, default_value_t = 8)]
        max_m: usize,
    },
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn seed_of(cli: &Cli, config_seed: Option<u64>) -> u64 {
    cli.seed.or(config_seed).unwrap_or(DEFAULT_SEED)
}

fn workers_of(cli: &Cli, config_workers: Option<usize>) -> CliResult<usize> {
    let w = cli.workers.or(config_workers).unwrap_or(1);
    if w == 0 {
        return Err(CliError::Input("--workers must be at least 1".into()));
    }
    Ok(w)
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).unwrap_or_else(|e| format!("<unserialisable: {e}>"))
}

fn load_gram(path: &Path) -> CliResult<keyhole_stc::GramMatrix> {
    Ok(difference_from_gram(&read_matrix(path)?)?)
}

pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::CheckCriterion { gram, n } => check_criterion(gram, *n, out),
        Command::Construct { gram, l, out: path } => construct(gram, *l, path, out),
        Command::Simulate { config, out: path, samples, estimator, jitter } => {
            let loaded = load_config(config)?;
            let mut cfg = loaded.config;
            if let Some(s) = samples {
                cfg.samples = *s;
            }
            if let Some(e) = estimator {
                cfg.estimator = (*e).into();
            }
            if jitter.is_some() {
                cfg.jitter = *jitter;
            }
            let seed = seed_of(cli, cfg.seed);
            let workers = workers_of(cli, cfg.workers)?;
            let exp = cfg.resolve(&loaded.base_dir, seed, workers)?;
            let rows = simulate_curves(&exp, |w| {
                let _ = writeln!(err, "warning: {w}");
            })?;
            let side = write_outputs(path, &rows, &exp, &loaded.digest)?;
            writeln!(out, "wrote {} rows to {} ({})", rows.len(), path.display(), side.display())?;
            Ok(())
        }
        Command::Reproduce { target, out: dir, samples, estimator } => {
            let fig = match target {
                ReproduceTarget::Example => {
                    write!(out, "{}", example_report()?)?;
                    return Ok(());
                }
                ReproduceTarget::Fig1 => Figure::Fig1,
                ReproduceTarget::Fig2 => Figure::Fig2,
            };
            let mut opts = FigureOptions::defaults(fig, seed_of(cli, None));
            opts.workers = workers_of(cli, None)?;
            if let Some(s) = samples {
                opts.samples = *s;
            }
            if let Some(e) = estimator {
                opts.estimator = (*e).into();
            }
            let report = run_figure(fig, &opts, |w| {
                let _ = writeln!(err, "warning: {w}");
            })?;
            let paths = write_figure_bundle(dir, &report, &opts)?;
            for c in &report.checks {
                writeln!(out, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail)?;
            }
            for p in &paths {
                writeln!(out, "wrote {}", p.display())?;
            }
            if report.all_pass() {
                Ok(())
            } else {
                Err(CliError::PropertyFailure(format!("{} reproduction checks failed", fig.name())))
            }
        }
        Command::Verify { target, samples, trials, max_m } => {
            let seed = seed_of(cli, None);
            let workers = workers_of(cli, None)?;
            let budget = Budget { samples: *samples, trials: *trials, max_m: *max_m };
            verify_command(*target, budget, seed, workers, out, err)
        }
    }
}

fn check_criterion(gram: &Path, n: usize, out: &mut dyn Write) -> CliResult<()> {
    let gram = load_gram(gram)?;
    let report = criterion_check(&gram, n)?;
    let eig: Vec<String> = report.eigenvalues.iter().map(|v| format!("{v:.4}")).collect();
    writeln!(out, "M = {}, N = {}, eigenvalues: {}", report.m, report.n, eig.join(" "))?;
    if !report.rows.is_empty() {
        writeln!(out, "{:>4} {:>12} {:>12} {:>12}  satisfied", "L", "lhs", "rhs", "margin")?;
        for r in &report.rows {
            writeln!(
                out,
                "{:>4} {:>12.6} {:>12.6} {:>12.6}  {}",
                r.l,
                r.lhs,
                r.rhs,
                r.margin,
                if r.satisfied { "yes" } else { "no" }
            )?;
        }
    }
    match (report.verdict, report.best_l) {
        (CriterionVerdict::Satisfied, Some(l)) => {
            writeln!(out, "SATISFIED (L={l})")?;
            Ok(())
        }
        (CriterionVerdict::NotApplicable, _) => {
            writeln!(out, "NOT APPLICABLE (no L in 1..=M-N-1)")?;
            Err(CliError::NotSatisfied(format!("criterion not applicable for M={}, N={}", report.m, report.n)))
        }
        _ => {
            writeln!(out, "NOT SATISFIED")?;
            Err(CliError::NotSatisfied("no L satisfies the criterion".into()))
        }
    }
}

fn construct(gram: &Path, l: usize, path: &Path, out: &mut dyn Write) -> CliResult<()> {
    let gram = load_gram(gram)?;
    let c = construct_improving_correlation(&gram, l)?;
    write_matrix(path, c.correlation.matrix())?;
    let nus: Vec<String> = c.nus.iter().map(|v| format!("{v:.6}")).collect();
    writeln!(out, "nus: {}", nus.join(" "))?;
    writeln!(out, "balanced rho: {:.6}", c.balanced_rho)?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(())
}

struct Budget {
    samples: Option<u64>,
    trials: Option<usize>,
    max_m: usize,
}

fn verify_command(
    target: VerifyTarget,
    Budget { samples, trials, max_m }: Budget,
    seed: u64,
    workers: usize,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult<()> {
    let fail = |what: &str| Err(CliError::PropertyFailure(format!("{what} suite failed")));
    match target {
        VerifyTarget::Lemma1 => {
            let suite = verify::lemma1_suite(trials.unwrap_or(100), samples.unwrap_or(1_000_000), seed, workers)?;
            writeln!(out, "lemma1: {}/{} trials pass", suite.passed(), suite.trials.len())?;
            let e = &suite.equality.report;
            writeln!(out, "equality case: difference {:.3e}, stderr {:.3e}", e.difference, e.stderr)?;
            for t in suite.trials.iter().filter(|t| !t.report.pass) {
                writeln!(err, "failing instance: {}", to_json(t))?;
            }
            if !suite.equality_pass {
                writeln!(err, "failing instance: {}", to_json(&suite.equality))?;
            }
            if suite.all_pass() {
                Ok(())
            } else {
                fail("lemma1")
            }
        }
        VerifyTarget::Theorem2 => {
            let suite = verify::theorem2_suite(trials.unwrap_or(1000), seed)?;
            writeln!(
                out,
                "theorem2: {}/{} product inequalities hold; max ratio {:.9}; identity ratio {:.12}",
                suite.trials - suite.violations.len(),
                suite.trials,
                suite.max_ratio,
                suite.identity_ratio
            )?;
            if !suite.all_pass() {
                writeln!(err, "failing instance: {}", to_json(&suite))?;
                return fail("theorem2");
            }
            // The rank-deficient P₁ counterpart is reported as an illustration.
            let gram = difference_from_gram(&keyhole_stc::reference::example_gram())?;
            let p1 = construct_improving_correlation(&gram, 1)?.correlation;
            if let Theorem2Verdict::DiversityLoss { effective_rank, gram_rank } =
                keyhole_stc::theorem2_check(&gram, &p1, 4)?
            {
                writeln!(out, "example P1 with N = 4: diversity loss (rank {effective_rank} < {gram_rank})")?;
            }
            Ok(())
        }
        VerifyTarget::Ostbc => {
            let scan = ostbc_scan(max_m)?;
            writeln!(
                out,
                "ostbc: {} (M, N) cells, {} rows, {} satisfied",
                scan.cells,
                scan.rows,
                scan.satisfied.len()
            )?;
            if scan.satisfied.is_empty() {
                Ok(())
            } else {
                writeln!(err, "failing instance: {}", to_json(&scan))?;
                fail("ostbc")
            }
        }
        VerifyTarget::Estimators => {
            let suite = verify::estimator_suite(trials.unwrap_or(20), samples.unwrap_or(200_000), 500, seed, workers)?;
            let passed = suite.trials.iter().filter(|t| t.pass).count();
            let worst = suite.trials.iter().map(|t| t.z_plain_semi.abs()).fold(0.0, f64::max);
            writeln!(out, "estimators: {passed}/{} plain vs semi-analytic within 3 sigma (max |z| {worst:.2})", suite.trials.len())?;
            writeln!(
                out,
                "determinant identity: {}/{} pairs hold (max relative error {:.2e})",
                suite.determinant_pairs - suite.determinant_failures,
                suite.determinant_pairs,
                suite.determinant_max_error
            )?;
            for t in suite.trials.iter().filter(|t| !t.pass) {
                writeln!(err, "failing instance: {}", to_json(t))?;
            }
            if suite.all_pass() {
                Ok(())
            } else {
                fail("estimators")
            }
        }
    }
}
