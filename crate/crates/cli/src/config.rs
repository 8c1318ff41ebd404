//! Experiment configuration (JSON, unknown fields rejected).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use keyhole_stc::channel::MIN_SAMPLES;
use keyhole_stc::io::{matrix_from_value, read_matrix};
use keyhole_stc::{
    construct_improving_correlation, difference_from_gram, validate_correlation, CorrelationMatrix, Estimator,
    GramMatrix, QuadratureSpec, SnrGrid,
};

use crate::error::{CliError, CliResult};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dims {
    pub m: usize,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum GramSource {
    Inline(serde_json::Value),
    File(PathBuf),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constructed {
    pub l: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationSource {
    Identity,
    File(PathBuf),
    Constructed(Constructed),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationEntry {
    pub label: String,
    pub source: CorrelationSource,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dims: Dims,
    pub gram: GramSource,
    pub correlations: Vec<CorrelationEntry>,
    pub snr_grid: GridSpec,
    pub samples: u64,
    #[serde(default = "default_estimator")]
    pub estimator: Estimator,
    #[serde(default = "default_nodes")]
    pub quadrature_nodes: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub jitter: Option<f64>,
}

fn default_estimator() -> Estimator {
    Estimator::SemiAnalytic
}

fn default_nodes() -> usize {
    QuadratureSpec::DEFAULT_NODES
}

/// A validated, fully materialised experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub m: usize,
    pub n: usize,
    pub gram: GramMatrix,
    pub curves: Vec<(String, CorrelationMatrix)>,
    pub grid: SnrGrid,
    pub samples: u64,
    pub estimator: Estimator,
    pub quadrature: QuadratureSpec,
    pub seed: u64,
    pub workers: usize,
    pub jitter: Option<f64>,
}

/// Raw config text together with its SHA-256 digest.
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub digest: String,
    pub base_dir: PathBuf,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn load_config(path: &Path) -> CliResult<LoadedConfig> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let config: ExperimentConfig = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Input(format!("{}: invalid config: {e}", path.display())))?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(LoadedConfig { config, digest: sha256_hex(&bytes), base_dir })
}

fn resolve_path(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl ExperimentConfig {
    /// Lists every violated field constraint.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.dims.m == 0 || self.dims.n == 0 {
            v.push(format!("dims: M and N must be positive (M={}, N={})", self.dims.m, self.dims.n));
        }
        if self.correlations.is_empty() {
            v.push("correlations: at least one entry required".into());
        }
        let mut labels: Vec<&str> = self.correlations.iter().map(|c| c.label.as_str()).collect();
        if labels.iter().any(|l| l.is_empty() || l.contains(',') || l.contains('"')) {
            v.push("correlations: labels must be non-empty and free of commas and quotes".into());
        }
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            v.push("correlations: labels must be unique".into());
        }
        let g = &self.snr_grid;
        if !(g.step_db > 0.0) {
            v.push(format!("snr_grid: step_db must be positive, got {}", g.step_db));
        }
        if !(g.stop_db >= g.start_db) || !g.start_db.is_finite() || !g.stop_db.is_finite() {
            v.push(format!("snr_grid: need finite start_db <= stop_db, got {}..{}", g.start_db, g.stop_db));
        }
        if self.samples < MIN_SAMPLES {
            v.push(format!("samples: need at least {MIN_SAMPLES}, got {}", self.samples));
        }
        if self.quadrature_nodes < QuadratureSpec::MIN_NODES {
            v.push(format!("quadrature_nodes: need at least {}, got {}", QuadratureSpec::MIN_NODES, self.quadrature_nodes));
        }
        if self.workers == Some(0) {
            v.push("workers: must be at least 1".into());
        }
        if let Some(j) = self.jitter {
            if !(j > 0.0) {
                v.push(format!("jitter: must be positive, got {j}"));
            }
        }
        v
    }

    pub fn resolve(&self, base_dir: &Path, seed: u64, workers: usize) -> CliResult<Experiment> {
        let violations = self.violations();
        if !violations.is_empty() {
            return Err(CliError::Input(format!("invalid config:\n  {}", violations.join("\n  "))));
        }
        let raw = match &self.gram {
            GramSource::Inline(value) => matrix_from_value(value.clone())?,
            GramSource::File(p) => read_matrix(&resolve_path(base_dir, p))?,
        };
        if raw.rows() != self.dims.m {
            return Err(CliError::Input(format!(
                "gram is {}x{} but dims.m = {}",
                raw.rows(),
                raw.cols(),
                self.dims.m
            )));
        }
        let gram = difference_from_gram(&raw)?;
        let mut curves = Vec::with_capacity(self.correlations.len());
        for entry in &self.correlations {
            let corr = match &entry.source {
                CorrelationSource::Identity => CorrelationMatrix::identity(self.dims.m),
                CorrelationSource::File(p) => {
                    let mat = read_matrix(&resolve_path(base_dir, p))?;
                    validate_correlation(&mat, self.dims.m)
                        .map_err(|e| CliError::Input(format!("correlation '{}': {e}", entry.label)))?
                }
                CorrelationSource::Constructed(c) => construct_improving_correlation(&gram, c.l)?.correlation,
            };
            curves.push((entry.label.clone(), corr));
        }
        let g = &self.snr_grid;
        Ok(Experiment {
            m: self.dims.m,
            n: self.dims.n,
            gram,
            curves,
            grid: SnrGrid::range_db(g.start_db, g.stop_db, g.step_db)?,
            samples: self.samples,
            estimator: self.estimator,
            quadrature: QuadratureSpec::new(self.quadrature_nodes)?,
            seed,
            workers,
            jitter: self.jitter,
        })
    }
}
