//! Single-keyhole channel H = P^{1/2} h gᵀ and Monte Carlo estimators of the
//! pairwise error probability E[Q(√(γ̄/M ‖ΔH‖²_F))].
//!
//! Three estimators share one parallel contract: the sample budget is cut
//! into fixed-size blocks, block `b` draws from `stream.split(b)`, and block
//! statistics are merged in block order. Results are therefore bit-identical
//! for any worker count.
//!
//! * [`pep_mc_plain`] draws h and g and averages the Q expression.
//! * [`pep_mc_semianalytic`] draws ĥ only; g and the Gaussian tail are
//!   integrated through the Craig form with Gauss–Legendre nodes in θ.
//! * [`pep_mc_conditional`] draws only the direction of ĥ on the nonzero
//!   subspace; its radius, g and the tail are integrated deterministically.
//!   Its relative variance stays bounded as γ̄ → ∞, which the other two lack
//!   when N exceeds the effective rank.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CorrelationMatrix, EffectiveSpectrum, GramMatrix, SystemDims};
use crate::numerics::special::lgamma;
use crate::numerics::{craig_average, gaussian_q, ChebyshevInterpolant, ComplexMatrix, GaussLegendre, MeanVar};
use crate::numerics::{RngStream, StreamRng};

/// Samples per deterministic sub-stream.
pub const BLOCK_SIZE: u64 = 8192;

pub const MIN_SAMPLES: u64 = 1000;

/// One draw of the keyhole channel.
#[derive(Debug, Clone)]
pub struct ChannelSample {
    /// Transmit-to-keyhole gains.
    pub h: Vec<Complex64>,
    /// Keyhole-to-receive gains.
    pub g: Vec<Complex64>,
    /// H = P^{1/2} h gᵀ, M×N.
    pub matrix: ComplexMatrix,
}

pub fn sample_keyhole_channel(
    corr: &CorrelationMatrix,
    dims: &SystemDims,
    rng: &mut StreamRng,
) -> Result<ChannelSample> {
    if corr.dim() != dims.m {
        return Err(Error::DimensionMismatch { expected: dims.m, found: corr.dim() });
    }
    let h: Vec<Complex64> = (0..dims.m).map(|_| rng.complex_normal()).collect();
    let g: Vec<Complex64> = (0..dims.n).map(|_| rng.complex_normal()).collect();
    let shaped = corr.sqrt().apply(&h);
    let matrix = ComplexMatrix::from_fn(dims.m, dims.n, |i, j| shaped[i] * g[j]);
    Ok(ChannelSample { h, g, matrix })
}

/// ‖ΔH‖²_F for the realized difference matrix.
pub fn codeword_distance_sq(gram: &GramMatrix, sample: &ChannelSample) -> f64 {
    (gram.delta() * &sample.matrix).frobenius_norm_sq()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    Plain,
    SemiAnalytic,
    Conditional,
}

impl Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Estimator::Plain => "plain",
            Estimator::SemiAnalytic => "semi-analytic",
            Estimator::Conditional => "conditional",
        }
    }
}

/// Monte Carlo PEP value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PepEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
    pub method: Estimator,
    pub stream: RngStream,
}

impl PepEstimate {
    /// |a − b| / √(σ_a² + σ_b²); infinite when both errors vanish and values differ.
    pub fn z_score(&self, other: &Self) -> f64 {
        let sigma = self.stderr.hypot(other.stderr);
        let diff = (self.value - other.value).abs();
        if sigma == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            diff / sigma
        }
    }
}

/// Gauss–Legendre node count for the θ ∈ (0, π/2) Craig integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureSpec {
    nodes: usize,
}

impl QuadratureSpec {
    pub const DEFAULT_NODES: usize = 32;
    pub const MIN_NODES: usize = 8;

    pub fn new(nodes: usize) -> Result<Self> {
        if nodes < Self::MIN_NODES {
            return Err(Error::Domain(format!("quadrature needs at least {} nodes, got {nodes}", Self::MIN_NODES)));
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { nodes: Self::DEFAULT_NODES }
    }
}

/// Sample budget, worker count and root stream of one estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McRun {
    pub samples: u64,
    pub workers: usize,
    pub stream: RngStream,
}

impl McRun {
    pub fn new(samples: u64, stream: RngStream) -> Self {
        Self { samples, workers: 1, stream }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn with_stream(mut self, stream: RngStream) -> Self {
        self.stream = stream;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.samples < MIN_SAMPLES {
            return Err(Error::Domain(format!("need at least {MIN_SAMPLES} samples, got {}", self.samples)));
        }
        Ok(())
    }
}

/// Runs `block` over the block partition of `run`, returning per-block
/// results in block order regardless of the worker count.
pub fn map_blocks<T, F>(run: &McRun, block: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut StreamRng, u64) -> T + Sync,
{
    let n_blocks = run.samples.div_ceil(BLOCK_SIZE);
    let work = |b: u64| {
        let count = BLOCK_SIZE.min(run.samples - b * BLOCK_SIZE);
        block(&mut run.stream.split(b).generator(), count)
    };
    if run.workers <= 1 {
        (0..n_blocks).map(work).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(run.workers)
            .build()
            .expect("thread pool");
        pool.install(|| (0..n_blocks).into_par_iter().map(work).collect())
    }
}

/// [`map_blocks`] for a single accumulator, merged in block order.
pub fn run_blocks<F>(run: &McRun, block: F) -> MeanVar
where
    F: Fn(&mut StreamRng, u64) -> MeanVar + Sync,
{
    map_blocks(run, block).iter().fold(MeanVar::new(), |acc, p| acc.merge(p))
}

fn finish(stats: MeanVar, method: Estimator, run: &McRun) -> PepEstimate {
    PepEstimate {
        value: stats.mean().clamp(0.0, 0.5),
        stderr: stats.stderr(),
        samples: stats.count(),
        method,
        stream: run.stream,
    }
}

fn check_snr(snr: f64) -> Result<()> {
    if !(snr > 0.0) || !snr.is_finite() {
        return Err(Error::Domain(format!("SNR must be positive and finite, got {snr}")));
    }
    Ok(())
}

/// Sample mean of Q(√(γ̄/M ‖ΔH‖²_F)) over i.i.d. keyhole channels.
pub fn pep_mc_plain(
    gram: &GramMatrix,
    corr: &CorrelationMatrix,
    n: usize,
    snr: f64,
    run: &McRun,
) -> Result<PepEstimate> {
    run.validate()?;
    check_snr(snr)?;
    let dims = SystemDims::new(gram.dim(), n, gram.delta().rows())?;
    if corr.dim() != dims.m {
        return Err(Error::DimensionMismatch { expected: dims.m, found: corr.dim() });
    }
    let scale = snr / dims.m as f64;
    let stats = run_blocks(run, |rng, count| {
        let mut acc = MeanVar::new();
        for _ in 0..count {
            let sample = sample_keyhole_channel(corr, &dims, rng).expect("dimensions checked");
            let d2 = codeword_distance_sq(gram, &sample);
            acc.push(gaussian_q((scale * d2).sqrt()));
        }
        acc
    });
    Ok(finish(stats, Estimator::Plain, run))
}

/// Craig integrand (1 + x / sin²θ)^{−N} on fixed Gauss–Legendre nodes.
#[derive(Debug, Clone)]
pub struct CraigQuadrature {
    inv_sin_sq: Vec<f64>,
    weights: Vec<f64>,
    n: i32,
}

impl CraigQuadrature {
    pub fn new(spec: &QuadratureSpec, n: usize) -> Self {
        let gl = GaussLegendre::new(spec.nodes());
        let (inv_sin_sq, weights) = gl
            .mapped(0.0, FRAC_PI_2)
            .map(|(theta, w)| (1.0 / theta.sin().powi(2), w / PI))
            .unzip();
        Self { inv_sin_sq, weights, n: n as i32 }
    }

    /// (1/π) ∫₀^{π/2} (1 + x / sin²θ)^{−N} dθ.
    pub fn eval(&self, x: f64) -> f64 {
        self.inv_sin_sq
            .iter()
            .zip(&self.weights)
            .map(|(&c, &w)| w * (1.0 + x * c).powi(-self.n))
            .sum()
    }
}

/// MC over ĥ with ‖g‖² and the Gaussian tail marginalised in the θ-integral.
pub fn pep_mc_semianalytic(
    spectrum: &EffectiveSpectrum,
    n: usize,
    snr: f64,
    quad: &QuadratureSpec,
    run: &McRun,
) -> Result<PepEstimate> {
    run.validate()?;
    check_snr(snr)?;
    if n == 0 {
        return Err(Error::Domain("N must be positive".into()));
    }
    let m = spectrum.dim();
    let beta = snr / (2.0 * m as f64);
    let craig = CraigQuadrature::new(quad, n);
    let rho = spectrum.rho();
    let stats = run_blocks(run, |rng, count| {
        let mut acc = MeanVar::new();
        for _ in 0..count {
            let s: f64 = rho.iter().map(|&r| r * rng.unit_exponential()).sum();
            acc.push(craig.eval(beta * s));
        }
        acc
    });
    Ok(finish(stats, Estimator::SemiAnalytic, run))
}

/// E over T ~ Gamma(r, 1) of [`craig_average`]`(b·T, n)`.
pub fn radial_average(b: f64, r: u32, n: u32) -> f64 {
    assert!(r >= 1 && n >= 1 && b >= 0.0);
    if b == 0.0 {
        return 0.5;
    }
    let rf = f64::from(r);
    let norm = lgamma(rf);
    // t = e^w; the upper end sits where e^{−t} is negligible, the lower end
    // where t^r · ½ is negligible next to the integral.
    let w_hi = (2.0 * rf + 60.0).ln();
    let w_lo = -b.max(1.0).ln() - 36.0 / rf - 1.0;
    let panels = ((w_hi - w_lo) / 0.5).ceil() as usize;
    let width = (w_hi - w_lo) / panels as f64;
    let gl = radial_rule();
    let mut total = 0.0;
    for k in 0..panels {
        let a = w_lo + k as f64 * width;
        total += gl.integrate(a, a + width, |w| {
            let t = w.exp();
            (rf * w - t - norm).exp() * craig_average(b * t, n)
        });
    }
    total
}

fn radial_rule() -> &'static GaussLegendre {
    static RULE: std::sync::OnceLock<GaussLegendre> = std::sync::OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(12))
}

/// PEP conditioned on the direction of ĥ, as a function of A = Σρᵢuᵢ with u
/// uniform on the simplex over the nonzero ρ.
#[derive(Debug, Clone)]
pub struct ConditionalKernel {
    beta: f64,
    rank: u32,
    n: u32,
    table: KernelTable,
}

#[derive(Debug, Clone)]
enum KernelTable {
    Constant(f64),
    LogChebyshev(ChebyshevInterpolant),
}

impl ConditionalKernel {
    pub const DEGREE: usize = 48;

    pub fn new(spectrum: &EffectiveSpectrum, n: usize, snr: f64) -> Result<Self> {
        check_snr(snr)?;
        if n == 0 {
            return Err(Error::Domain("N must be positive".into()));
        }
        let beta = snr / (2.0 * spectrum.dim() as f64);
        let nonzero = spectrum.nonzero();
        let rank = nonzero.len() as u32;
        let n = n as u32;
        if rank == 0 {
            return Ok(Self { beta, rank, n, table: KernelTable::Constant(0.5) });
        }
        let lo = nonzero[0];
        let hi = nonzero[nonzero.len() - 1];
        let table = if hi / lo - 1.0 < 1e-12 {
            KernelTable::Constant(radial_average(beta * 0.5 * (lo + hi), rank, n))
        } else {
            KernelTable::LogChebyshev(ChebyshevInterpolant::new(lo.ln(), hi.ln(), Self::DEGREE, |la| {
                radial_average(beta * la.exp(), rank, n)
            }))
        };
        Ok(Self { beta, rank, n, table })
    }

    /// Interpolated conditional PEP at direction mean A.
    pub fn eval(&self, a: f64) -> f64 {
        match &self.table {
            KernelTable::Constant(v) => *v,
            KernelTable::LogChebyshev(cheb) => {
                let (lo, hi) = cheb.domain();
                cheb.eval(a.ln().clamp(lo, hi))
            }
        }
    }

    /// Direct evaluation without the interpolation table.
    pub fn eval_direct(&self, a: f64) -> f64 {
        if self.rank == 0 {
            return 0.5;
        }
        radial_average(self.beta * a, self.rank, self.n)
    }
}

/// MC over the direction of ĥ; radius, g and Gaussian tail integrated exactly.
pub fn pep_mc_conditional(spectrum: &EffectiveSpectrum, n: usize, snr: f64, run: &McRun) -> Result<PepEstimate> {
    run.validate()?;
    let kernel = ConditionalKernel::new(spectrum, n, snr)?;
    let nonzero = spectrum.nonzero();
    let stats = run_blocks(run, |rng, count| {
        let mut acc = MeanVar::new();
        for _ in 0..count {
            let mut total = 0.0;
            let mut weighted = 0.0;
            for &r in nonzero {
                let x = rng.unit_exponential();
                total += x;
                weighted += r * x;
            }
            let a = if total > 0.0 { weighted / total } else { nonzero.first().copied().unwrap_or(0.0) };
            acc.push(kernel.eval(a));
        }
        acc
    });
    Ok(finish(stats, Estimator::Conditional, run))
}
