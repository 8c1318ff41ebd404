//! Correlation design: the eigenvalue improvement criterion, the improving
//! correlation construction, the M ≤ N degradation check and Monte Carlo
//! checks of the balancing inequality.

use num_complex::Complex64;
use serde::Serialize;

use crate::channel::{map_blocks, McRun};
use crate::error::{Error, Result};
use crate::model::{effective_spectrum, numerical_rank, CorrelationMatrix, GramMatrix};
use crate::numerics::special::lgamma;
use crate::numerics::{ComplexMatrix, MeanVar, RngStream, StreamRng};

/// Minimum sample count for [`lemma1_mc_check`].
pub const LEMMA1_MIN_SAMPLES: u64 = 100_000;

/// Relative tolerance of the product inequality Πρ ≤ Πλ.
pub const PRODUCT_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriterionRow {
    pub l: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionVerdict {
    Satisfied,
    NotSatisfied,
    /// M ≤ N + 1: no L in 1..=M−N−1.
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub m: usize,
    pub n: usize,
    pub eigenvalues: Vec<f64>,
    pub rows: Vec<CriterionRow>,
    pub verdict: CriterionVerdict,
    pub best_l: Option<usize>,
}

impl CriterionReport {
    pub fn row(&self, l: usize) -> Option<&CriterionRow> {
        self.rows.iter().find(|r| r.l == l)
    }
}

/// ln [Γ(M−N)Γ(M−L) / (Γ(M)Γ(M−L−N))].
fn log_criterion_rhs(m: usize, n: usize, l: usize) -> f64 {
    let (m, n, l) = (m as f64, n as f64, l as f64);
    lgamma(m - n) + lgamma(m - l) - lgamma(m) - lgamma(m - l - n)
}

/// Criterion table for an ascending, strictly positive spectrum.
pub fn criterion_from_spectrum(lambdas: &[f64], n: usize) -> Result<CriterionReport> {
    let m = lambdas.len();
    if n == 0 {
        return Err(Error::Domain("N must be positive".into()));
    }
    if lambdas.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::Domain("criterion needs strictly positive eigenvalues".into()));
    }
    if lambdas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("eigenvalues must be ascending".into()));
    }
    let mean = lambdas.iter().sum::<f64>() / m as f64;
    let rows: Vec<CriterionRow> = if m > n + 1 {
        (1..m - n)
            .map(|l| {
                let tail: f64 = lambdas[l..].iter().map(|x| 1.0 / x).sum::<f64>() / m as f64;
                let lhs = (mean * tail).powi(n as i32);
                let rhs = log_criterion_rhs(m, n, l).exp();
                CriterionRow { l, lhs, rhs, satisfied: lhs < rhs, margin: rhs - lhs }
            })
            .collect()
    } else {
        Vec::new()
    };
    let best_l = rows
        .iter()
        .filter(|r| r.satisfied)
        .fold(None::<&CriterionRow>, |best, r| match best {
            Some(b) if b.margin >= r.margin => Some(b),
            _ => Some(r),
        })
        .map(|r| r.l);
    let verdict = match (rows.is_empty(), best_l) {
        (true, _) => CriterionVerdict::NotApplicable,
        (false, Some(_)) => CriterionVerdict::Satisfied,
        (false, None) => CriterionVerdict::NotSatisfied,
    };
    Ok(CriterionReport { m, n, eigenvalues: lambdas.to_vec(), rows, verdict, best_l })
}

/// Whether some correlation beats independent antennas at high SNR.
pub fn criterion_check(gram: &GramMatrix, n: usize) -> Result<CriterionReport> {
    criterion_from_spectrum(gram.spectrum(), n)
}

#[derive(Debug, Clone)]
pub struct ConstructedCorrelation {
    pub correlation: CorrelationMatrix,
    pub l: usize,
    /// Common nonzero effective eigenvalue c = M (Σ_{i>L} 1/λᵢ)⁻¹.
    pub balanced_rho: f64,
    /// Eigenvalues of P paired with the ascending Gram eigenvectors.
    pub nus: Vec<f64>,
}

/// P^{1/2} = U S^{1/2} Dᴴ with D = I.
pub fn construct_improving_correlation(gram: &GramMatrix, l: usize) -> Result<ConstructedCorrelation> {
    construct_improving_correlation_with(gram, l, &ComplexMatrix::identity(gram.dim()))
}

/// As [`construct_improving_correlation`] with an arbitrary unitary D.
pub fn construct_improving_correlation_with(
    gram: &GramMatrix,
    l: usize,
    d: &ComplexMatrix,
) -> Result<ConstructedCorrelation> {
    let m = gram.dim();
    if m < 3 || l < 1 || l > m - 2 {
        return Err(Error::Domain(format!("L={l} outside 1..=M-2 (M={m})")));
    }
    if d.rows() != m || d.cols() != m {
        return Err(Error::DimensionMismatch { expected: m, found: d.rows() });
    }
    if (&d.adjoint() * d).max_abs_diff(&ComplexMatrix::identity(m)) > 1e-10 {
        return Err(Error::Domain("D must be unitary".into()));
    }
    let lambdas = gram.spectrum();
    if !(lambdas[l] > 0.0) {
        return Err(Error::Domain("retained eigenvalues must be positive".into()));
    }
    let inv_sum: f64 = lambdas[l..].iter().map(|x| 1.0 / x).sum();
    let c = m as f64 / inv_sum;
    let nus: Vec<f64> = (0..m).map(|i| if i < l { 0.0 } else { c / lambdas[i] }).collect();
    let sqrt_nus: Vec<f64> = nus.iter().map(|v| v.sqrt()).collect();
    let factor = &gram.eigenvectors().scale_columns(&sqrt_nus) * &d.adjoint();
    let correlation = CorrelationMatrix::from_factor(&factor)?;
    Ok(ConstructedCorrelation { correlation, l, balanced_rho: c, nus })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Theorem2Verdict {
    /// Rank-deficient P lowers the diversity order.
    DiversityLoss { effective_rank: usize, gram_rank: usize },
    /// Full-rank P keeps diversity M but shrinks Πρ below Πλ.
    CodingGainLoss { product_rho: f64, product_lambda: f64, ratio: f64, holds: bool, equality: bool },
}

/// Degradation check for M ≤ N.
pub fn theorem2_check(gram: &GramMatrix, corr: &CorrelationMatrix, n: usize) -> Result<Theorem2Verdict> {
    let m = gram.dim();
    if m > n {
        return Err(Error::Domain(format!("degradation check needs M <= N (M={m}, N={n})")));
    }
    if corr.dim() != m {
        return Err(Error::DimensionMismatch { expected: m, found: corr.dim() });
    }
    let spectrum = effective_spectrum(gram, corr)?;
    let gram_rank = numerical_rank(gram.spectrum());
    if corr.rank() < m {
        return Ok(Theorem2Verdict::DiversityLoss { effective_rank: spectrum.rank(), gram_rank });
    }
    let log_rho: f64 = spectrum.rho().iter().map(|r| r.ln()).sum();
    let log_lambda: f64 = gram.spectrum().iter().map(|l| l.ln()).sum();
    let ratio = (log_rho - log_lambda).exp();
    let equality = corr.matrix().max_abs_diff(&ComplexMatrix::identity(m)) < 1e-9;
    Ok(Theorem2Verdict::CodingGainLoss {
        product_rho: log_rho.exp(),
        product_lambda: log_lambda.exp(),
        ratio,
        holds: ratio <= 1.0 + PRODUCT_RTOL,
        equality,
    })
}

/// How the two sides of the balancing inequality share random draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pairing {
    /// Same (X, Y) draws for both sides; `stderr` is that of the paired
    /// difference, which vanishes when all λᵢ are equal.
    Common,
    /// Independent streams per side; `stderr` combines both side errors.
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma1Report {
    /// E f(Y λ̄ ΣXᵢ).
    pub balanced: f64,
    /// E f(Y Σλᵢ Xᵢ).
    pub unbalanced: f64,
    /// unbalanced − balanced.
    pub difference: f64,
    pub stderr: f64,
    pub samples: u64,
    pub pairing: Pairing,
    pub pass: bool,
}

/// Estimates both sides of the balancing inequality with f(x) = e^{−x},
/// Xᵢ unit exponentials and Y ~ Gamma(N, 1), using common random numbers.
/// `pass` means balanced ≤ unbalanced + 3σ.
pub fn lemma1_mc_check(lambdas: &[f64], n: usize, samples: u64, stream: RngStream) -> Result<Lemma1Report> {
    lemma1_mc_check_with(lambdas, n, &McRun::new(samples, stream), Pairing::Common)
}

/// Per-block accumulators for (balanced, unbalanced, unbalanced − balanced).
fn lemma1_sides(lambdas: &[f64], n: usize, run: &McRun) -> [MeanVar; 3] {
    let mean = lambdas.iter().sum::<f64>() / lambdas.len() as f64;
    let parts = map_blocks(run, |rng, count| {
        let mut acc = [MeanVar::new(), MeanVar::new(), MeanVar::new()];
        for _ in 0..count {
            let y: f64 = (0..n).map(|_| rng.unit_exponential()).sum();
            let (mut plain, mut weighted) = (0.0, 0.0);
            for &l in lambdas {
                let x = rng.unit_exponential();
                plain += x;
                weighted += l * x;
            }
            let bal = (-y * mean * plain).exp();
            let unbal = (-y * weighted).exp();
            acc[0].push(bal);
            acc[1].push(unbal);
            acc[2].push(unbal - bal);
        }
        acc
    });
    parts.iter().fold([MeanVar::new(), MeanVar::new(), MeanVar::new()], |acc, p| {
        [acc[0].merge(&p[0]), acc[1].merge(&p[1]), acc[2].merge(&p[2])]
    })
}

pub fn lemma1_mc_check_with(lambdas: &[f64], n: usize, run: &McRun, pairing: Pairing) -> Result<Lemma1Report> {
    if run.samples < LEMMA1_MIN_SAMPLES {
        return Err(Error::Domain(format!("need at least {LEMMA1_MIN_SAMPLES} samples, got {}", run.samples)));
    }
    if lambdas.is_empty() || n == 0 {
        return Err(Error::Domain("need at least one eigenvalue and N >= 1".into()));
    }
    let [bal, unbal, diff] = lemma1_sides(lambdas, n, run);
    let (balanced, unbalanced, difference, stderr) = match pairing {
        Pairing::Common => (bal.mean(), unbal.mean(), diff.mean(), diff.stderr()),
        Pairing::Independent => {
            let [_, other, _] = lemma1_sides(lambdas, n, &run.with_stream(run.stream.split(u64::MAX)));
            (bal.mean(), other.mean(), other.mean() - bal.mean(), bal.stderr().hypot(other.stderr()))
        }
    };
    Ok(Lemma1Report {
        balanced,
        unbalanced,
        difference,
        stderr,
        samples: diff.count(),
        pairing,
        pass: -difference <= 3.0 * stderr,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OstbcScan {
    pub max_m: usize,
    pub cells: usize,
    pub rows: usize,
    /// (M, N, L) triples that satisfied the criterion.
    pub satisfied: Vec<(usize, usize, usize)>,
}

/// Criterion over identical spectra for every 3 ≤ M ≤ `max_m`, 1 ≤ N ≤ M−2.
pub fn ostbc_scan(max_m: usize) -> Result<OstbcScan> {
    if max_m < 3 {
        return Err(Error::Domain(format!("max_M must be at least 3, got {max_m}")));
    }
    let mut scan = OstbcScan { max_m, cells: 0, rows: 0, satisfied: Vec::new() };
    for m in 3..=max_m {
        for n in 1..=m - 2 {
            let report = criterion_from_spectrum(&vec![1.0; m], n)?;
            scan.cells += 1;
            scan.rows += report.rows.len();
            scan.satisfied.extend(report.rows.iter().filter(|r| r.satisfied).map(|r| (m, n, r.l)));
        }
    }
    Ok(scan)
}

/// Haar unitary from QR (modified Gram–Schmidt) of a complex Gaussian matrix.
pub fn haar_unitary(m: usize, rng: &mut StreamRng) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = (0..m).map(|_| (0..m).map(|_| rng.complex_normal()).collect()).collect();
    for j in 0..m {
        for k in 0..j {
            let (done, rest) = cols.split_at_mut(j);
            let q = &done[k];
            let proj: Complex64 = q.iter().zip(&rest[0]).map(|(a, b)| a.conj() * b).sum();
            for (x, qi) in rest[0].iter_mut().zip(q) {
                *x -= proj * qi;
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in &mut cols[j] {
            *x /= norm;
        }
    }
    ComplexMatrix::from_fn(m, m, |r, c| cols[c][r])
}

/// Uniform point on the simplex Σxᵢ = `total`, sorted ascending.
pub fn dirichlet_spectrum(m: usize, total: f64, rng: &mut StreamRng) -> Vec<f64> {
    let draws: Vec<f64> = (0..m).map(|_| rng.unit_exponential()).collect();
    let sum: f64 = draws.iter().sum();
    let mut v: Vec<f64> = draws.iter().map(|x| total * x / sum).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// P = U diag(ν) Uᴴ with Haar U and ν uniform on the trace-M simplex. With
/// `rank = Some(r)`, the weight is spread over r directions only.
pub fn random_correlation(m: usize, rank: Option<usize>, rng: &mut StreamRng) -> Result<CorrelationMatrix> {
    let r = rank.unwrap_or(m);
    if r == 0 || r > m {
        return Err(Error::Domain(format!("rank {r} outside 1..=M (M={m})")));
    }
    let u = haar_unitary(m, rng);
    let mut nus = vec![0.0; m - r];
    nus.extend(dirichlet_spectrum(r, m as f64, rng));
    CorrelationMatrix::from_factor(&u.scale_columns(&nus.iter().map(|v| v.sqrt()).collect::<Vec<_>>()))
}

/// Random full-rank Gram matrix U diag(λ) Uᴴ with λ on the trace-M simplex.
pub fn random_gram(m: usize, rng: &mut StreamRng) -> Result<GramMatrix> {
    let u = haar_unitary(m, rng);
    let lambdas = dirichlet_spectrum(m, m as f64, rng);
    let g = &u.scale_columns(&lambdas) * &u.adjoint();
    crate::model::difference_from_gram(&g)
}
