//! The three-antenna worked example and its two PEP figures.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use keyhole_stc::{
    construct_improving_correlation, criterion_check, difference_from_gram, reference, ComplexMatrix,
    CorrelationMatrix, Estimator, QuadratureSpec, SnrGrid,
};

use crate::config::{sha256_hex, Experiment};
use crate::error::CliResult;
use crate::sweep::{crossing_db, min_separation, plot_script, simulate_curves, write_outputs, CurveRow};

pub const LABELS: [&str; 3] = ["I", "P1", "P2"];
pub const GAIN_TARGET_PEP: f64 = 1e-3;
pub const DEFAULT_SAMPLES: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// M = 3, N = 1: P₁ improves on independent antennas.
    Fig1,
    /// M = 3, N = 4: every non-identity correlation degrades.
    Fig2,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
        }
    }

    pub fn receive_antennas(self) -> usize {
        match self {
            Figure::Fig1 => 1,
            Figure::Fig2 => 4,
        }
    }

    /// With N > rank(P₁) the semi-analytic estimator loses relative
    /// precision as SNR grows, so the second figure defaults to the
    /// conditional estimator.
    pub fn default_estimator(self) -> Estimator {
        match self {
            Figure::Fig1 => Estimator::SemiAnalytic,
            Figure::Fig2 => Estimator::Conditional,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FigureOptions {
    pub samples: u64,
    pub estimator: Estimator,
    pub seed: u64,
    pub workers: usize,
    pub grid: SnrGrid,
}

impl FigureOptions {
    pub fn defaults(fig: Figure, seed: u64) -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            estimator: fig.default_estimator(),
            seed,
            workers: 1,
            grid: SnrGrid::range_db(0.0, 30.0, 2.0).expect("static grid"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct FigureReport {
    pub figure: Figure,
    pub rows: Vec<CurveRow>,
    pub checks: Vec<Check>,
    /// Horizontal gain of P₁ over I at PEP = 1e-3 (dB).
    pub gain_db: Option<f64>,
}

impl FigureReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn figure_experiment(fig: Figure, opts: &FigureOptions) -> CliResult<Experiment> {
    let gram = difference_from_gram(&reference::example_gram())?;
    let p1 = construct_improving_correlation(&gram, 1)?.correlation;
    let p2 = reference::degrading_correlation(&gram)?;
    let curves = vec![
        (LABELS[0].to_string(), CorrelationMatrix::identity(3)),
        (LABELS[1].to_string(), p1),
        (LABELS[2].to_string(), p2),
    ];
    Ok(Experiment {
        m: 3,
        n: fig.receive_antennas(),
        gram,
        curves,
        grid: opts.grid.clone(),
        samples: opts.samples,
        estimator: opts.estimator,
        quadrature: QuadratureSpec::default(),
        seed: opts.seed,
        workers: opts.workers,
        jitter: None,
    })
}

fn separation_check(rows: &[CurveRow], above: &str, from_db: f64) -> Check {
    let z = min_separation(rows, above, "I", from_db);
    Check {
        name: format!("{above} above I beyond 3 sigma for SNR >= {from_db} dB"),
        pass: z.is_some_and(|z| z > 3.0),
        detail: match z {
            Some(z) => format!("min z = {z:.2}"),
            None => "no grid points in range".into(),
        },
    }
}

pub fn run_figure(fig: Figure, opts: &FigureOptions, warn: impl FnMut(String)) -> CliResult<FigureReport> {
    let exp = figure_experiment(fig, opts)?;
    let rows = simulate_curves(&exp, warn)?;
    let mut checks = Vec::new();
    let mut gain_db = None;
    match fig {
        Figure::Fig1 => {
            let gain = crossing_db(&rows, "I", GAIN_TARGET_PEP)
                .zip(crossing_db(&rows, "P1", GAIN_TARGET_PEP))
                .map(|(i, p)| i - p);
            gain_db = gain;
            checks.push(Check {
                name: "P1 gain over I at PEP 1e-3 within 1.5 +/- 0.5 dB".into(),
                pass: gain.is_some_and(|g| (g - 1.5).abs() <= 0.5),
                detail: gain.map_or("curves do not cross 1e-3".into(), |g| format!("gain = {g:.3} dB")),
            });
            checks.push(separation_check(&rows, "P2", 20.0));
        }
        Figure::Fig2 => {
            checks.push(separation_check(&rows, "P1", 16.0));
            checks.push(separation_check(&rows, "P2", 16.0));
        }
    }
    Ok(FigureReport { figure: fig, rows, checks, gain_db })
}

/// Writes `<name>.csv`, its provenance sidecar and `<name>.gp` into `dir`.
pub fn write_figure_bundle(dir: &Path, report: &FigureReport, opts: &FigureOptions) -> CliResult<Vec<PathBuf>> {
    let fig = report.figure;
    let exp = figure_experiment(fig, opts)?;
    let csv = dir.join(format!("{}.csv", fig.name()));
    let descriptor = format!(
        "{} samples={} estimator={} grid={:?}",
        fig.name(),
        opts.samples,
        opts.estimator.name(),
        opts.grid.db()
    );
    let side = write_outputs(&csv, &report.rows, &exp, &sha256_hex(descriptor.as_bytes()))?;
    let gp = dir.join(format!("{}.gp", fig.name()));
    let labels: Vec<String> = LABELS.iter().map(|s| s.to_string()).collect();
    let title = format!("M = 3, N = {}", fig.receive_antennas());
    std::fs::write(&gp, plot_script(&format!("{}.csv", fig.name()), &labels, &title))?;
    Ok(vec![csv, side, gp])
}

fn format_matrix(m: &ComplexMatrix) -> String {
    let mut s = String::new();
    for r in 0..m.rows() {
        let cells: Vec<String> = (0..m.cols())
            .map(|c| {
                let z = m[(r, c)];
                format!("{:>8.4} {:+.4}i", z.re, z.im)
            })
            .collect();
        let _ = writeln!(s, "    [{}]", cells.join(",  "));
    }
    s
}

/// Criterion values, the improving construction and both correlations.
pub fn example_report() -> CliResult<String> {
    let gram = difference_from_gram(&reference::example_gram())?;
    let mut s = String::new();
    let lam = gram.spectrum();
    let _ = writeln!(s, "code-difference eigenvalues: {:.4} {:.4} {:.4}", lam[0], lam[1], lam[2]);
    let report = criterion_check(&gram, 1)?;
    let row = report.row(1).expect("M = 3, N = 1 has L = 1");
    let _ = writeln!(
        s,
        "criterion (N = 1, L = 1): lhs = {:.3}  rhs = {:.3}  -> {}",
        row.lhs,
        row.rhs,
        if row.satisfied { "satisfied" } else { "not satisfied" }
    );
    let c = construct_improving_correlation(&gram, 1)?;
    let _ = writeln!(s, "nus = ({:.3}, {:.3}, {:.3}), balanced rho = {:.4}", c.nus[0], c.nus[1], c.nus[2], c.balanced_rho);
    let _ = write!(s, "P1 =\n{}", format_matrix(c.correlation.matrix()));
    let _ = writeln!(
        s,
        "  max deviation from four-decimal P1: {:.1e}",
        c.correlation.matrix().max_abs_diff(&reference::printed_p1())
    );
    let p2 = reference::degrading_correlation(&gram)?;
    let _ = write!(s, "P2 =\n{}", format_matrix(p2.matrix()));
    let _ = writeln!(s, "  max deviation from four-decimal P2: {:.1e}", p2.matrix().max_abs_diff(&reference::printed_p2()));
    Ok(s)
}
