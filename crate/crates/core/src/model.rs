//! Domain types: antenna dimensions, code-difference Gram matrices, transmit
//! correlation matrices and the effective spectrum they induce.

use crate::error::{CorrelationViolation, Error, Result};
use crate::numerics::{eigen, psd_eigendecomposition, ComplexMatrix, HermitianEig};

/// Relative factor in the numerical-rank rule: an eigenvalue is nonzero when it
/// exceeds `dim · max_eigenvalue · RANK_RTOL`.
pub const RANK_RTOL: f64 = 1e-12;

/// Allowed |trace(P) − M|.
pub const TRACE_TOL: f64 = 1e-8;

/// Number of eigenvalues above the rank threshold.
pub fn numerical_rank(values: &[f64]) -> usize {
    let threshold = rank_threshold(values);
    values.iter().filter(|&&v| v > threshold).count()
}

fn rank_threshold(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(0.0f64, f64::max);
    values.len() as f64 * max * RANK_RTOL
}

/// Product of the spectrum after zeroing entries under the rank threshold.
fn rank_aware_product(values: &[f64]) -> f64 {
    let threshold = rank_threshold(values);
    values.iter().map(|&v| if v > threshold { v } else { 0.0 }).product()
}

/// Transmit/receive antenna counts and block length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemDims {
    pub m: usize,
    pub n: usize,
    pub t: usize,
}

impl SystemDims {
    pub fn new(m: usize, n: usize, t: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::Domain(format!("antenna counts must be positive (M={m}, N={n})")));
        }
        if t < m {
            return Err(Error::Domain(format!("block length T={t} < M={m} cannot give a full-rank difference")));
        }
        Ok(Self { m, n, t })
    }

    /// Dimensions with T = M, as produced by [`difference_from_gram`].
    pub fn square(m: usize, n: usize) -> Result<Self> {
        Self::new(m, n, m)
    }
}

/// ΔᴴΔ with its ascending spectrum and one realization Δ.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    gram: ComplexMatrix,
    eig: HermitianEig,
    mean_eigenvalue: f64,
    delta: ComplexMatrix,
}

impl GramMatrix {
    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.gram
    }

    /// λ₁ ≤ … ≤ λ_M.
    pub fn spectrum(&self) -> &[f64] {
        &self.eig.values
    }

    /// Columns are eigenvectors paired with [`GramMatrix::spectrum`].
    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eig.vectors
    }

    pub fn mean_eigenvalue(&self) -> f64 {
        self.mean_eigenvalue
    }

    /// A T×M difference matrix with Δᴴ Δ = gram (here T = M).
    pub fn delta(&self) -> &ComplexMatrix {
        &self.delta
    }
}

/// Realizes Δ as the Hermitian square root of a full-rank Gram matrix.
pub fn difference_from_gram(gram: &ComplexMatrix) -> Result<GramMatrix> {
    let eig = psd_eigendecomposition(gram)?;
    let m = eig.dim();
    let rank = numerical_rank(&eig.values);
    if rank < m {
        return Err(Error::RankDeficient { rank, dim: m });
    }
    let mean_eigenvalue = eig.values.iter().sum::<f64>() / m as f64;
    let delta = eig.reconstruct_with(f64::sqrt);
    Ok(GramMatrix { gram: gram.hermitian_part(), eig, mean_eigenvalue, delta })
}

/// Validated transmit correlation matrix P (Hermitian, PSD, trace M).
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    p: ComplexMatrix,
    eig: HermitianEig,
    sqrt: ComplexMatrix,
}

impl CorrelationMatrix {
    pub fn identity(m: usize) -> Self {
        let p = ComplexMatrix::identity(m);
        let eig = HermitianEig { vectors: ComplexMatrix::identity(m), values: vec![1.0; m] };
        Self { sqrt: p.clone(), p, eig }
    }

    /// P = F·Fᴴ for a chosen square-root factor F (for example U S^{1/2} Dᴴ).
    pub fn from_factor(factor: &ComplexMatrix) -> Result<Self> {
        if !factor.is_square() {
            return Err(Error::NotSquare { rows: factor.rows(), cols: factor.cols() });
        }
        let p = (factor * &factor.adjoint()).hermitian_part();
        let mut corr = validate_correlation(&p, factor.rows())?;
        corr.sqrt = factor.clone();
        Ok(corr)
    }

    pub fn dim(&self) -> usize {
        self.p.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.p
    }

    /// ν₁ ≤ … ≤ ν_M.
    pub fn spectrum(&self) -> &[f64] {
        &self.eig.values
    }

    /// P^{1/2}, satisfying P^{1/2} (P^{1/2})ᴴ = P.
    pub fn sqrt(&self) -> &ComplexMatrix {
        &self.sqrt
    }

    pub fn rank(&self) -> usize {
        numerical_rank(&self.eig.values)
    }
}

/// Checks every correlation invariant and reports all violations together.
pub fn validate_correlation(p: &ComplexMatrix, m: usize) -> Result<CorrelationMatrix> {
    let mut violations = Vec::new();
    if p.rows() != m || p.cols() != m {
        violations.push(CorrelationViolation::Shape { rows: p.rows(), cols: p.cols(), expected: m });
        return Err(Error::InvalidCorrelation(violations));
    }
    let asymmetry = p.hermitian_asymmetry();
    if asymmetry > eigen::HERMITIAN_TOL {
        violations.push(CorrelationViolation::NotHermitian { asymmetry });
    }
    let sym = p.hermitian_part();
    let trace = sym.trace().re;
    if (trace - m as f64).abs() > TRACE_TOL {
        violations.push(CorrelationViolation::Trace { trace, expected: m as f64 });
    }
    let eig = eigen::hermitian_eigendecomposition(&sym)?;
    let lowest = eig.values.first().copied().unwrap_or(0.0);
    if lowest < eigen::PSD_CLAMP {
        violations.push(CorrelationViolation::NotPsd { eigenvalue: lowest });
    }
    if !violations.is_empty() {
        return Err(Error::InvalidCorrelation(violations));
    }
    let eig = HermitianEig { values: eig.values.iter().map(|v| v.max(0.0)).collect(), vectors: eig.vectors };
    let sqrt = eig.reconstruct_with(f64::sqrt);
    Ok(CorrelationMatrix { p: sym, eig, sqrt })
}

/// Eigenvalues ρ of P^{H/2} ΔᴴΔ P^{1/2}, ascending, with numerical rank.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveSpectrum {
    rho: Vec<f64>,
    rank: usize,
}

impl EffectiveSpectrum {
    /// Builds a spectrum directly from eigenvalues (any order).
    pub fn from_eigenvalues(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("empty spectrum".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut rho = values.to_vec();
        rho.sort_by(f64::total_cmp);
        if rho[0] < eigen::PSD_CLAMP {
            return Err(Error::NotPsd { eigenvalue: rho[0] });
        }
        let threshold = rank_threshold(&rho);
        for v in &mut rho {
            if *v <= threshold {
                *v = v.max(0.0);
            }
        }
        let rank = numerical_rank(&rho);
        Ok(Self { rho, rank })
    }

    pub fn dim(&self) -> usize {
        self.rho.len()
    }

    /// All M eigenvalues, ascending, zeros included.
    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// The `rank` largest eigenvalues.
    pub fn nonzero(&self) -> &[f64] {
        &self.rho[self.rho.len() - self.rank..]
    }
}

pub fn effective_spectrum(gram: &GramMatrix, corr: &CorrelationMatrix) -> Result<EffectiveSpectrum> {
    if gram.dim() != corr.dim() {
        return Err(Error::DimensionMismatch { expected: gram.dim(), found: corr.dim() });
    }
    let s = corr.sqrt();
    let k = &(&s.adjoint() * gram.matrix()) * s;
    let eig = eigen::hermitian_eigendecomposition(&k.hermitian_part())?;
    EffectiveSpectrum::from_eigenvalues(&eig.values)
}

/// Both sides of (Πν)(Πλ) = Πρ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeterminantReport {
    pub lhs: f64,
    pub rhs: f64,
    pub relative_error: f64,
    pub holds: bool,
}

pub const DETERMINANT_RTOL: f64 = 1e-8;

pub fn determinant_identity_check(gram: &GramMatrix, corr: &CorrelationMatrix) -> Result<DeterminantReport> {
    let spectrum = effective_spectrum(gram, corr)?;
    let lhs = rank_aware_product(corr.spectrum()) * gram.spectrum().iter().product::<f64>();
    let rhs = rank_aware_product(spectrum.rho());
    let scale = lhs.abs().max(rhs.abs());
    let relative_error = if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale };
    Ok(DeterminantReport { lhs, rhs, relative_error, holds: relative_error <= DETERMINANT_RTOL })
}

/// Average-SNR grid, strictly increasing and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrGrid {
    db: Vec<f64>,
}

impl SnrGrid {
    pub fn from_db(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("SNR grid is empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("SNR grid must be finite and strictly increasing".into()));
        }
        Ok(Self { db: values })
    }

    /// start, start+step, … up to and including stop.
    pub fn range_db(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
            return Err(Error::Domain(format!("invalid SNR range {start}:{step}:{stop}")));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        Self::from_db((0..count).map(|k| start + k as f64 * step).collect())
    }

    pub fn db(&self) -> &[f64] {
        &self.db
    }

    pub fn linear(&self) -> Vec<f64> {
        self.db.iter().map(|&d| db_to_linear(d)).collect()
    }

    pub fn len(&self) -> usize {
        self.db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.db.is_empty()
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
