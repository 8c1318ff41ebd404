//! Special functions: Gaussian tail, log-Gamma, and the Craig-form fading average.

use crate::error::{Error, Result};

/// Q(x) = P(Z > x) for a standard normal Z, via ½·erfc(x/√2).
pub fn gaussian_q(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// ln Γ(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(libm::lgamma(x))
}

/// ln Γ for arguments the caller has already range-checked.
pub(crate) fn lgamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    libm::lgamma(x)
}

/// Γ(½+n) / (2√π Γ(1+n)), the Gaussian-tail moment factor shared by every
/// asymptotic constant.
pub(crate) fn tail_moment_factor(n: f64) -> f64 {
    (lgamma(0.5 + n) - lgamma(1.0 + n)).exp() / (2.0 * std::f64::consts::PI.sqrt())
}

/// (1/π) ∫₀^{π/2} (1 + x / sin²θ)^{−n} dθ in closed form.
///
/// Equals E[Q(√(2x·G))] for G ~ Gamma(n, 1). Uses
/// ((1−μ)/2)ⁿ Σ_{k<n} C(n−1+k, k) ((1+μ)/2)ᵏ with μ = √(x/(1+x)), and
/// 1−μ computed without cancellation.
pub fn craig_average(x: f64, n: u32) -> f64 {
    assert!(n >= 1);
    if x <= 0.0 {
        return 0.5;
    }
    let mu = (x / (1.0 + x)).sqrt();
    let one_minus = 1.0 / ((1.0 + x) * (1.0 + mu));
    let lo = 0.5 * one_minus;
    let hi = 0.5 * (1.0 + mu);
    let mut binom = 1.0;
    let mut pow = 1.0;
    let mut sum = 0.0;
    for k in 0..n {
        if k > 0 {
            binom *= f64::from(n - 1 + k) / f64::from(k);
            pow *= hi;
        }
        sum += binom * pow;
    }
    lo.powi(n as i32) * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quadrature::GaussLegendre;

    #[test]
    fn q_landmarks() {
        assert_eq!(gaussian_q(0.0), 0.5);
        assert!((gaussian_q(-12.0) - 1.0).abs() < 1e-15);
        assert!(gaussian_q(40.0) >= 0.0);
    }

    #[test]
    fn q_at_one_matches_density_integral() {
        // ∫₁^∞ φ(t) dt split into panels; the tail beyond 40 is below 1e-300.
        let gl = GaussLegendre::new(40);
        let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let oracle: f64 = (0..39).map(|k| gl.integrate(1.0 + k as f64, 2.0 + k as f64, pdf)).sum();
        assert!((gaussian_q(1.0) - oracle).abs() < 1e-14);
        assert!((oracle - 0.158_655_253_931_457).abs() < 1e-13);
    }

    #[test]
    fn log_gamma_identities() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-14);
        assert!((log_gamma(3.0).unwrap() - 2.0f64.ln()).abs() < 1e-14);
        assert!((log_gamma(0.5).unwrap() - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
    }

    #[test]
    fn craig_average_matches_quadrature() {
        let gl = GaussLegendre::new(200);
        for n in 1..=5u32 {
            for &x in &[1e-3, 0.1, 1.0, 17.0, 1e4] {
                let direct = gl.integrate(0.0, std::f64::consts::FRAC_PI_2, |t| {
                    (1.0 + x / t.sin().powi(2)).powi(-(n as i32))
                }) / std::f64::consts::PI;
                let closed = craig_average(x, n);
                assert!((direct - closed).abs() < 1e-9 * closed.max(1e-3), "n={n} x={x}: {direct} vs {closed}");
            }
        }
        assert_eq!(craig_average(0.0, 3), 0.5);
    }

    #[test]
    fn craig_average_large_argument_tail() {
        // x → ∞: (1/π)∫ (sin²θ/x)ⁿ dθ = C(2n, n) / (2·4ⁿ) · x⁻ⁿ
        for n in 1..=4u32 {
            let x = 1e9_f64;
            let binom: f64 = (1..=n).map(|k| f64::from(n + k) / f64::from(k)).product();
            let tail = binom / (2.0 * 4f64.powi(n as i32)) * x.powi(-(n as i32));
            assert!((craig_average(x, n) / tail - 1.0).abs() < 1e-6);
        }
    }
}
