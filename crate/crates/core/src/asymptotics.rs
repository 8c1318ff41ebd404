//! High-SNR closed forms for the keyhole PEP.
//!
//! With R = rank of the effective spectrum, the PEP decays as γ̄^{−min(N,R)},
//! with an extra ln γ̄ when N = R. The coefficient depends on how the SNR
//! enters the Q argument; see [`SnrNormalization`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::EffectiveSpectrum;
use crate::numerics::special::{lgamma, tail_moment_factor};

/// Relative gap below which two nonzero eigenvalues count as one cluster.
pub const CLUSTER_RTOL: f64 = 1e-6;

/// How γ̄ scales ‖ΔH‖²_F inside Q(·).
///
/// `Transmit` is Q(√(γ̄/M ‖ΔH‖²_F)), the model every estimator in
/// [`crate::channel`] simulates. `Receive` is Q(√(2γ̄/N ‖ΔH‖²_F)), the
/// normalization in which the constants C1, C2, C3 take their compact form.
/// The two coefficients differ by (2M/N)^d for diversity order d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SnrNormalization {
    #[default]
    Transmit,
    Receive,
}

impl SnrNormalization {
    fn coefficient_scale(self, m: usize, n: usize, order: usize) -> f64 {
        match self {
            SnrNormalization::Transmit => (2.0 * m as f64 / n as f64).powi(order as i32),
            SnrNormalization::Receive => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// N > R: diversity limited by the effective rank.
    ReceiveExceedsRank,
    /// N = R: diversity R with a ln γ̄ correction.
    Balanced,
    /// N < R: diversity limited by the receive antennas.
    RankExceedsReceive,
}

impl Regime {
    pub fn classify(n: usize, rank: usize) -> Self {
        match n.cmp(&rank) {
            std::cmp::Ordering::Greater => Regime::ReceiveExceedsRank,
            std::cmp::Ordering::Equal => Regime::Balanced,
            std::cmp::Ordering::Less => Regime::RankExceedsReceive,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Regime::ReceiveExceedsRank => "N>R",
            Regime::Balanced => "N=R",
            Regime::RankExceedsReceive => "N<R",
        }
    }
}

/// value = coefficient · γ̄^{−diversity_order} (· ln γ̄ when `log_correction`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticPep {
    pub value: f64,
    pub regime: Regime,
    pub diversity_order: usize,
    pub log_correction: bool,
    pub coefficient: f64,
}

impl AsymptoticPep {
    fn new(regime: Regime, order: usize, coefficient: f64, snr: f64) -> Self {
        let log_correction = regime == Regime::Balanced;
        let mut value = coefficient * snr.powi(-(order as i32));
        if log_correction {
            value *= snr.ln();
        }
        Self { value, regime, diversity_order: order, log_correction, coefficient }
    }
}

fn check_common(n: usize, snr: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("N must be positive".into()));
    }
    if !(snr > 0.0) || !snr.is_finite() {
        return Err(Error::Domain(format!("SNR must be positive and finite, got {snr}")));
    }
    Ok(())
}

/// ln of the N ≥ R coefficient (Receive normalization) without 1/Πρ.
fn log_rank_limited_constant(rank: usize, n: usize) -> f64 {
    let (r, nf) = (rank as f64, n as f64);
    let gamma_gap = if n > rank { lgamma(nf - r) } else { 0.0 };
    tail_moment_factor(r).ln() + r * nf.ln() + gamma_gap - lgamma(nf)
}

/// Σᵢ ln ρᵢ / ρᵢᴺ · Π_{j≠i} ρᵢ / (ρᵢ − ρⱼ) over distinct nonzero ρ.
fn distinct_log_sum(rho: &[f64], n: usize) -> f64 {
    rho.iter()
        .enumerate()
        .map(|(i, &ri)| {
            let weight: f64 =
                rho.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &rj)| ri / (ri - rj)).product();
            ri.ln() * ri.powi(-(n as i32)) * weight
        })
        .sum()
}

fn check_clusters(rho: &[f64]) -> Result<()> {
    for w in rho.windows(2) {
        let gap = (w[1] - w[0]) / w[1];
        if gap < CLUSTER_RTOL {
            return Err(Error::Degenerate { left: w[0], right: w[1], gap });
        }
    }
    Ok(())
}

/// Asymptotic PEP for pairwise-distinct nonzero eigenvalues.
///
/// The distinctness requirement only bites when N < R; for N ≥ R the
/// coefficient depends on the nonzero eigenvalues through their product alone.
pub fn pep_asymptotic_distinct(
    spectrum: &EffectiveSpectrum,
    n: usize,
    snr: f64,
    normalization: SnrNormalization,
) -> Result<AsymptoticPep> {
    check_common(n, snr)?;
    let m = spectrum.dim();
    let rho = spectrum.nonzero();
    let rank = rho.len();
    if rank == 0 {
        return Err(Error::Domain("effective spectrum has rank zero".into()));
    }
    let regime = Regime::classify(n, rank);
    let (order, printed) = match regime {
        Regime::ReceiveExceedsRank | Regime::Balanced => {
            let log_prod: f64 = rho.iter().map(|r| r.ln()).sum();
            (rank, (log_rank_limited_constant(rank, n) - log_prod).exp())
        }
        Regime::RankExceedsReceive => {
            check_clusters(rho)?;
            let nf = n as f64;
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            let constant = tail_moment_factor(nf) * (nf * nf.ln() - lgamma(nf)).exp() * sign;
            (n, constant * distinct_log_sum(rho, n))
        }
    };
    let coefficient = printed * normalization.coefficient_scale(m, n, order);
    Ok(AsymptoticPep::new(regime, order, coefficient, snr))
}

/// Asymptotic PEP when all `rank` nonzero eigenvalues equal `rho`; `m` is the
/// transmit antenna count (needed for the Transmit normalization).
pub fn pep_asymptotic_identical(
    rho: f64,
    rank: usize,
    m: usize,
    n: usize,
    snr: f64,
    normalization: SnrNormalization,
) -> Result<AsymptoticPep> {
    check_common(n, snr)?;
    if !(rho > 0.0) || rank == 0 || rank > m {
        return Err(Error::Domain(format!("need rho > 0 and 1 <= rank <= M (rho={rho}, rank={rank}, M={m})")));
    }
    let regime = Regime::classify(n, rank);
    let (r, nf) = (rank as f64, n as f64);
    let (order, printed) = match regime {
        Regime::ReceiveExceedsRank | Regime::Balanced => {
            (rank, (log_rank_limited_constant(rank, n) - r * rho.ln()).exp())
        }
        Regime::RankExceedsReceive => {
            let log_c2 = tail_moment_factor(nf).ln() + nf * nf.ln() + lgamma(r - nf) - lgamma(r);
            (n, (log_c2 - nf * rho.ln()).exp())
        }
    };
    let coefficient = printed * normalization.coefficient_scale(m, n, order);
    Ok(AsymptoticPep::new(regime, order, coefficient, snr))
}

/// Picks the identical or distinct form from the spectrum. Mixed
/// multiplicities in the N < R regime are an error unless `jitter` is given,
/// in which case the k-th nonzero eigenvalue is scaled by (1+jitter)^k
/// (an approximation of order `jitter`).
pub fn pep_asymptotic(
    spectrum: &EffectiveSpectrum,
    n: usize,
    snr: f64,
    normalization: SnrNormalization,
    jitter: Option<f64>,
) -> Result<AsymptoticPep> {
    let rho = spectrum.nonzero();
    let rank = rho.len();
    if rank == 0 {
        return Err(Error::Domain("effective spectrum has rank zero".into()));
    }
    let (lo, hi) = (rho[0], rho[rank - 1]);
    if (hi - lo) / hi < CLUSTER_RTOL {
        let mean = rho.iter().sum::<f64>() / rank as f64;
        return pep_asymptotic_identical(mean, rank, spectrum.dim(), n, snr, normalization);
    }
    match pep_asymptotic_distinct(spectrum, n, snr, normalization) {
        Err(Error::Degenerate { .. }) if jitter.is_some() => {
            let eps = jitter.unwrap_or_default();
            if !(eps > 0.0) {
                return Err(Error::Domain(format!("jitter must be positive, got {eps}")));
            }
            let zeros = spectrum.dim() - rank;
            let mut values = vec![0.0; zeros];
            values.extend(rho.iter().enumerate().map(|(k, &r)| r * (1.0 + eps).powi(k as i32)));
            pep_asymptotic_distinct(&EffectiveSpectrum::from_eigenvalues(&values)?, n, snr, normalization)
        }
        other => other,
    }
}

/// Lower bound on the independent-antenna PEP obtained by balancing the
/// Gram spectrum to its mean λ̄; defined for M > N.
pub fn pep_lower_bound_independent(
    lambda_bar: f64,
    m: usize,
    n: usize,
    snr: f64,
    normalization: SnrNormalization,
) -> Result<f64> {
    check_common(n, snr)?;
    if m <= n {
        return Err(Error::Domain(format!("lower bound needs M > N (M={m}, N={n})")));
    }
    if !(lambda_bar > 0.0) {
        return Err(Error::Domain(format!("mean eigenvalue must be positive, got {lambda_bar}")));
    }
    let (mf, nf) = (m as f64, n as f64);
    let log = tail_moment_factor(nf).ln() + nf * nf.ln() + lgamma(mf - nf) - lgamma(mf)
        - nf * lambda_bar.ln()
        - nf * snr.ln();
    Ok(log.exp() * normalization.coefficient_scale(m, n, n))
}

/// High-SNR PEP under the constructed correlation that zeroes the `l`
/// weakest eigen-directions and balances the remaining ones.
pub fn constructed_pep_asymptote(
    lambdas: &[f64],
    m: usize,
    n: usize,
    l: usize,
    snr: f64,
    normalization: SnrNormalization,
) -> Result<f64> {
    check_common(n, snr)?;
    if lambdas.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: lambdas.len() });
    }
    if l < 1 || m < n + 2 || l > m - n - 1 {
        return Err(Error::Domain(format!("L={l} outside 1..=M-N-1 (M={m}, N={n})")));
    }
    if lambdas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("eigenvalues must be ascending".into()));
    }
    if !(lambdas[l] > 0.0) {
        return Err(Error::Domain("retained eigenvalues must be positive".into()));
    }
    let (mf, nf, lf) = (m as f64, n as f64, l as f64);
    let inv_sum: f64 = lambdas[l..].iter().map(|x| 1.0 / x).sum();
    let log = tail_moment_factor(nf).ln() + nf * nf.ln() + lgamma(mf - lf - nf) - lgamma(mf - lf) - nf * mf.ln()
        + nf * inv_sum.ln()
        - nf * snr.ln();
    Ok(log.exp() * normalization.coefficient_scale(m, n, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(v: &[f64]) -> EffectiveSpectrum {
        EffectiveSpectrum::from_eigenvalues(v).unwrap()
    }

    use SnrNormalization::{Receive, Transmit};

    #[test]
    fn single_antenna_identical_coefficient() {
        let a = pep_asymptotic_identical(1.0, 1, 1, 2, 100.0, Receive).unwrap();
        assert!((a.coefficient - 0.5).abs() < 1e-14);
        assert_eq!((a.regime, a.diversity_order), (Regime::ReceiveExceedsRank, 1));
        assert!((a.value - 0.005).abs() < 1e-15);
        // 2M/N = 1 here, so both normalizations agree.
        let t = pep_asymptotic_identical(1.0, 1, 1, 2, 100.0, Transmit).unwrap();
        assert!((t.coefficient - 0.5).abs() < 1e-14);
    }

    #[test]
    fn printed_c1_for_two_eigenvalues() {
        // C1 = Γ(5/2)/(2√π Γ(3)) · 3² Γ(1)/Γ(3) = 0.1875 · 4.5
        let a = pep_asymptotic_distinct(&sp(&[1.0, 2.0]), 3, 1e3, Receive).unwrap();
        assert!((a.coefficient - 0.1875 * 4.5 / 2.0).abs() < 1e-14);
        let t = pep_asymptotic_distinct(&sp(&[1.0, 2.0]), 3, 1e3, Transmit).unwrap();
        assert!((t.coefficient / a.coefficient - (4.0f64 / 3.0).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn homogeneity() {
        let a = pep_asymptotic_distinct(&sp(&[0.5, 1.0, 2.0]), 5, 10.0, Receive).unwrap();
        let b = pep_asymptotic_distinct(&sp(&[1.5, 3.0, 6.0]), 5, 10.0, Receive).unwrap();
        assert!((a.coefficient / b.coefficient - 27.0).abs() < 1e-10);

        let a = pep_asymptotic_identical(1.3, 4, 4, 2, 10.0, Receive).unwrap();
        let b = pep_asymptotic_identical(2.6, 4, 4, 2, 10.0, Receive).unwrap();
        assert!((a.coefficient / b.coefficient - 4.0).abs() < 1e-12);

        // N < R distinct: the log sum is scale-covariant with exponent N.
        let a = pep_asymptotic_distinct(&sp(&[0.5, 1.0, 2.0]), 2, 10.0, Receive).unwrap();
        let b = pep_asymptotic_distinct(&sp(&[1.0, 2.0, 4.0]), 2, 10.0, Receive).unwrap();
        assert!((a.coefficient / b.coefficient - 4.0).abs() < 1e-9);
    }

    #[test]
    fn distinct_form_tends_to_identical_form() {
        for n in 1..=3usize {
            let r = n + 2;
            let eps = 1e-3;
            let values: Vec<f64> = (0..r).map(|k| 1.7 * (1.0 + eps * k as f64)).collect();
            let d = pep_asymptotic_distinct(&sp(&values), n, 1e4, Receive).unwrap();
            let i = pep_asymptotic_identical(1.7, r, r, n, 1e4, Receive).unwrap();
            assert!((d.coefficient / i.coefficient - 1.0).abs() < 1e-2, "n={n}");
        }
    }

    #[test]
    fn regime_selection() {
        assert_eq!(Regime::classify(3, 2), Regime::ReceiveExceedsRank);
        assert_eq!(Regime::classify(2, 2), Regime::Balanced);
        assert_eq!(Regime::classify(1, 2), Regime::RankExceedsReceive);
        let a = pep_asymptotic_distinct(&sp(&[1.0, 2.0]), 2, 1e3, Transmit).unwrap();
        assert!(a.log_correction && a.coefficient > 0.0);
        assert!((a.value - a.coefficient * 1e-6 * 1e3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_clusters() {
        let s = sp(&[1.0, 1.0, 2.0]);
        assert!(matches!(pep_asymptotic_distinct(&s, 1, 10.0, Receive), Err(Error::Degenerate { .. })));
        assert!(pep_asymptotic(&s, 1, 10.0, Receive, None).is_err());
        let j = pep_asymptotic(&s, 1, 10.0, Receive, Some(1e-3)).unwrap();
        assert!(j.coefficient > 0.0);
        // N >= R does not care about multiplicities.
        assert!(pep_asymptotic_distinct(&s, 4, 10.0, Receive).is_ok());
        // All equal dispatches to the identical form.
        let e = pep_asymptotic(&sp(&[2.0, 2.0, 2.0]), 1, 10.0, Receive, None).unwrap();
        let i = pep_asymptotic_identical(2.0, 3, 3, 1, 10.0, Receive).unwrap();
        assert!((e.coefficient - i.coefficient).abs() < 1e-14);
    }

    #[test]
    fn lower_bound_worked_example() {
        let b = pep_lower_bound_independent(2.0, 3, 1, 1.0, Receive).unwrap();
        assert!((b - 1.0 / 16.0).abs() < 1e-15);
        let b2 = pep_lower_bound_independent(4.0, 3, 1, 1.0, Receive).unwrap();
        assert!((b / b2 - 2.0).abs() < 1e-14);
        assert!(pep_lower_bound_independent(2.0, 3, 3, 1.0, Receive).is_err());
    }

    #[test]
    fn constructed_asymptote_worked_example() {
        let lambdas = [0.1, 2.9, 3.0];
        let p = constructed_pep_asymptote(&lambdas, 3, 1, 1, 50.0, Receive).unwrap();
        let bound = pep_lower_bound_independent(2.0, 3, 1, 50.0, Receive).unwrap();
        let lhs = 2.0 * (1.0 / 2.9 + 1.0 / 3.0) / 3.0;
        assert!((p / bound - lhs / 0.5).abs() < 1e-12);
        assert!(p / bound < 1.0);

        let c = 3.0 / (1.0 / 2.9 + 1.0 / 3.0);
        let same = pep_asymptotic_identical(c, 2, 3, 1, 50.0, Receive).unwrap();
        assert!((same.value - p).abs() < 1e-14 * p);

        assert!(constructed_pep_asymptote(&[2.0, 2.0, 2.0], 3, 1, 0, 1.0, Receive).is_err());
        assert!(constructed_pep_asymptote(&lambdas, 3, 1, 2, 1.0, Receive).is_err());
    }
}
