//! Deterministic PEP oracle by nested Gauss–Legendre quadrature.
//!
//! PEP = (1/π) ∫₀^{π/2} E_s[(1 + β s / sin²θ)^{−N}] dθ with β = γ̄/(2M) and
//! s = Σρᵢ|ĥᵢ|². The law of s is a hypoexponential mixture (distinct ρ) or a
//! scaled Gamma (identical ρ); expectations over it are taken in log-space.

#![allow(dead_code)]

use keyhole_stc::numerics::GaussLegendre;
use keyhole_stc::numerics::log_gamma;

/// E_{T ~ Gamma(r, 1)} [(1 + a T)^{−n}].
pub fn gamma_expectation(a: f64, r: u32, n: u32) -> f64 {
    let gl = GaussLegendre::new(16);
    let rf = f64::from(r);
    let norm = log_gamma(rf).unwrap();
    let (lo, hi) = (-45.0 / rf - a.max(1.0).ln(), (2.0 * rf + 70.0).ln());
    let panels = ((hi - lo) / 0.2).ceil() as usize;
    let width = (hi - lo) / panels as f64;
    (0..panels)
        .map(|k| {
            let a0 = lo + k as f64 * width;
            gl.integrate(a0, a0 + width, |w| {
                let t = w.exp();
                (rf * w - t - norm).exp() * (1.0 + a * t).powi(-(n as i32))
            })
        })
        .sum()
}

fn theta_integral(f: impl Fn(f64) -> f64) -> f64 {
    let gl = GaussLegendre::new(24);
    let panels = 16;
    let h = std::f64::consts::FRAC_PI_2 / panels as f64;
    (0..panels).map(|k| gl.integrate(k as f64 * h, (k + 1) as f64 * h, &f)).sum::<f64>() / std::f64::consts::PI
}

/// Exact PEP for pairwise-distinct nonzero `rho`.
pub fn exact_pep_distinct(rho: &[f64], m: usize, n: u32, snr: f64) -> f64 {
    let beta = snr / (2.0 * m as f64);
    let weights: Vec<f64> = rho
        .iter()
        .enumerate()
        .map(|(i, &ri)| rho.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &rj)| ri / (ri - rj)).product())
        .collect();
    theta_integral(|theta| {
        let c = beta / theta.sin().powi(2);
        rho.iter().zip(&weights).map(|(&r, &w)| w * gamma_expectation(c * r, 1, n)).sum()
    })
}

/// Exact PEP when all `rank` nonzero eigenvalues equal `rho`.
pub fn exact_pep_identical(rho: f64, rank: u32, m: usize, n: u32, snr: f64) -> f64 {
    let beta = snr / (2.0 * m as f64);
    theta_integral(|theta| gamma_expectation(beta * rho / theta.sin().powi(2), rank, n))
}
