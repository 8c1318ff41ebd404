//! SNR sweeps, CSV emission, provenance sidecars and plot scripts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use keyhole_stc::model::db_to_linear;
use keyhole_stc::{
    effective_spectrum, pep_asymptotic, pep_mc_conditional, pep_mc_plain, pep_mc_semianalytic, Estimator, McRun,
    PepEstimate, RngStream, SnrNormalization,
};

use crate::config::Experiment;
use crate::error::CliResult;

pub const CSV_HEADER: &str = "snr_db,pep_mc,stderr,pep_asymptotic,samples,label";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub snr_db: f64,
    pub pep_mc: f64,
    pub stderr: f64,
    /// None when the closed form is undefined (degenerate spectrum without jitter).
    pub pep_asymptotic: Option<f64>,
    pub samples: u64,
    pub label: String,
}

/// Stream for curve `curve` at grid point `point`; independent of the worker count.
pub fn point_stream(seed: u64, curve: usize, point: usize) -> RngStream {
    RngStream::new(seed, 0).split(curve as u64).split(point as u64)
}

fn estimate(exp: &Experiment, curve: usize, point: usize, snr: f64) -> CliResult<PepEstimate> {
    let corr = &exp.curves[curve].1;
    let run = McRun::new(exp.samples, point_stream(exp.seed, curve, point)).with_workers(exp.workers);
    let spectrum = effective_spectrum(&exp.gram, corr)?;
    Ok(match exp.estimator {
        Estimator::Plain => pep_mc_plain(&exp.gram, corr, exp.n, snr, &run)?,
        Estimator::SemiAnalytic => pep_mc_semianalytic(&spectrum, exp.n, snr, &exp.quadrature, &run)?,
        Estimator::Conditional => pep_mc_conditional(&spectrum, exp.n, snr, &run)?,
    })
}

/// Every (curve, SNR) point, sorted by label then SNR. `warn` receives one
/// message per curve whose closed form is unavailable.
pub fn simulate_curves(exp: &Experiment, mut warn: impl FnMut(String)) -> CliResult<Vec<CurveRow>> {
    let mut rows = Vec::with_capacity(exp.curves.len() * exp.grid.len());
    for (ci, (label, corr)) in exp.curves.iter().enumerate() {
        let spectrum = effective_spectrum(&exp.gram, corr)?;
        let mut warned = false;
        for (pi, &db) in exp.grid.db().iter().enumerate() {
            let snr = db_to_linear(db);
            let est = estimate(exp, ci, pi, snr)?;
            let asym = match pep_asymptotic(&spectrum, exp.n, snr, SnrNormalization::Transmit, exp.jitter) {
                Ok(a) => Some(a.value),
                Err(e) => {
                    if !warned {
                        warn(format!("curve '{label}': no closed form ({e})"));
                        warned = true;
                    }
                    None
                }
            };
            rows.push(CurveRow {
                snr_db: db,
                pep_mc: est.value,
                stderr: est.stderr,
                pep_asymptotic: asym,
                samples: est.samples,
                label: label.clone(),
            });
        }
    }
    rows.sort_by(|a, b| a.label.cmp(&b.label).then(a.snr_db.total_cmp(&b.snr_db)));
    Ok(rows)
}

pub fn render_csv(rows: &[CurveRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let asym = r.pep_asymptotic.map(|v| format!("{v:e}")).unwrap_or_default();
        let _ = writeln!(out, "{},{:e},{:e},{},{},{}", r.snr_db, r.pep_mc, r.stderr, asym, r.samples, r.label);
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub config_sha256: &'a str,
    pub estimator: Estimator,
    pub samples: u64,
    pub workers: usize,
    pub csv: String,
}

pub fn provenance_path(csv: &Path) -> PathBuf {
    csv.with_extension("provenance.json")
}

/// CSV plus provenance sidecar; returns the sidecar path.
pub fn write_outputs(csv_path: &Path, rows: &[CurveRow], exp: &Experiment, digest: &str) -> CliResult<PathBuf> {
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(csv_path, render_csv(rows))?;
    let prov = Provenance {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        seed: exp.seed,
        config_sha256: digest,
        estimator: exp.estimator,
        samples: exp.samples,
        workers: exp.workers,
        csv: csv_path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
    };
    let side = provenance_path(csv_path);
    let text = serde_json::to_string_pretty(&prov).map_err(|e| crate::error::CliError::Input(e.to_string()))?;
    std::fs::write(&side, text + "\n")?;
    Ok(side)
}

/// gnuplot script drawing PEP_MC (points) and the closed form (lines) per label.
pub fn plot_script(csv_name: &str, labels: &[String], title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set logscale y");
    let _ = writeln!(s, "set format y '10^{{%L}}'");
    let _ = writeln!(s, "set xlabel 'average SNR (dB)'");
    let _ = writeln!(s, "set ylabel 'PEP'");
    let _ = writeln!(s, "set title '{title}'");
    let _ = writeln!(s, "set key bottom left");
    let _ = writeln!(s, "set grid");
    let mut parts = Vec::new();
    for (i, l) in labels.iter().enumerate() {
        let c = i + 1;
        parts.push(format!(
            "'{csv_name}' every ::1 using 1:(strcol(6) eq '{l}' ? $2 : 1/0) with linespoints lc {c} pt 7 title '{l}'"
        ));
        parts.push(format!(
            "'{csv_name}' every ::1 using 1:(strcol(6) eq '{l}' && strcol(4) ne '' ? $4 : 1/0) with lines lc {c} dt 2 notitle"
        ));
    }
    let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
    s
}

/// SNR (dB) where a curve crosses `target`, by linear interpolation of
/// log₁₀ PEP between adjacent grid points.
pub fn crossing_db(rows: &[CurveRow], label: &str, target: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.label == label && r.pep_mc > 0.0).map(|r| (r.snr_db, r.pep_mc.log10())).collect();
    let t = target.log10();
    pts.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if (y0 - t) * (y1 - t) <= 0.0 && y0 != y1 {
            Some(x0 + (t - y0) * (x1 - x0) / (y1 - y0))
        } else {
            None
        }
    })
}

/// Smallest z = (PEP_a − PEP_b)/√(σ_a² + σ_b²) over grid points ≥ `from_db`.
pub fn min_separation(rows: &[CurveRow], above: &str, below: &str, from_db: f64) -> Option<f64> {
    rows.iter()
        .filter(|r| r.label == above && r.snr_db >= from_db)
        .filter_map(|a| {
            let b = rows.iter().find(|r| r.label == below && r.snr_db == a.snr_db)?;
            let sigma = a.stderr.hypot(b.stderr);
            let diff = a.pep_mc - b.pep_mc;
            Some(if sigma > 0.0 {
                diff / sigma
            } else if diff > 0.0 {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            })
        })
        .reduce(f64::min)
}
