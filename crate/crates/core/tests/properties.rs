use keyhole_stc::design::{
    criterion_from_spectrum, dirichlet_spectrum, haar_unitary, random_correlation, random_gram,
};
use keyhole_stc::model::{determinant_identity_check, numerical_rank};
use keyhole_stc::numerics::{gaussian_q, hermitian_eigendecomposition, psd_sqrt, StreamRng};
use keyhole_stc::{
    construct_improving_correlation, constructed_pep_asymptote, difference_from_gram, effective_spectrum,
    pep_asymptotic, pep_lower_bound_independent, validate_correlation, ComplexMatrix, CorrelationMatrix,
    EffectiveSpectrum, RngStream, SnrNormalization,
};
use num_complex::Complex64;
use proptest::prelude::*;

const T: SnrNormalization = SnrNormalization::Transmit;

fn random_matrix(rows: usize, cols: usize, rng: &mut StreamRng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| rng.complex_normal())
}

#[test]
fn hermitian_eigendecomposition_reconstructs_and_is_orthonormal() {
    let mut rng = RngStream::new(101, 0).generator();
    for trial in 0..200 {
        let m = 2 + trial % 7;
        let b = random_matrix(m, m, &mut rng);
        let a = ComplexMatrix::from_fn(m, m, |i, j| (b[(i, j)] + b[(j, i)].conj()) * 0.5);
        let eig = hermitian_eigendecomposition(&a).unwrap();
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        assert!(eig.reconstruct().max_abs_diff(&a) <= 1e-9 * a.max_abs().max(1.0), "trial {trial}");
        let gram = &eig.vectors.adjoint() * &eig.vectors;
        assert!(gram.max_abs_diff(&ComplexMatrix::identity(m)) <= 1e-10, "trial {trial}");
    }
}

#[test]
fn psd_sqrt_squares_back() {
    let mut rng = RngStream::new(103, 0).generator();
    for trial in 0..200 {
        let m = 2 + trial % 7;
        let k = 1 + trial % m;
        let b = random_matrix(m, k, &mut rng);
        let a = (&b * &b.adjoint()).hermitian_part();
        let s = psd_sqrt(&a).unwrap();
        assert!(s.hermitian_asymmetry() <= 1e-12 * a.max_abs());
        assert!((&s * &s).max_abs_diff(&a) <= 1e-9 * a.max_abs(), "trial {trial} m={m} k={k}");
    }
}

#[test]
fn gaussian_tail_is_antisymmetric_about_one_half() {
    for k in 0..=1600 {
        let x = -8.0 + k as f64 * 0.01;
        assert!((gaussian_q(x) + gaussian_q(-x) - 1.0).abs() <= 1e-12, "x={x}");
    }
    assert!((gaussian_q(0.0) - 0.5).abs() < 1e-16);
}

#[test]
fn complex_normal_has_unit_variance_and_no_pseudo_covariance() {
    let mut rng = RngStream::new(107, 0).generator();
    let n = 200_000;
    let (mut power, mut pseudo, mut mean) = (0.0, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for _ in 0..n {
        let z = rng.complex_normal();
        power += z.norm_sqr();
        pseudo += z * z;
        mean += z;
    }
    let nf = n as f64;
    assert!((power / nf - 1.0).abs() < 0.01);
    assert!((pseudo / nf).norm() < 0.01);
    assert!((mean / nf).norm() < 0.01);
}

#[test]
fn determinant_identity_against_lu() {
    let mut rng = RngStream::new(109, 0).generator();
    for pair in 0..500 {
        let m = 1 + pair % 8;
        let gram = random_gram(m, &mut rng).unwrap();
        let corr = random_correlation(m, None, &mut rng).unwrap();
        let s = corr.sqrt();
        let k = &(&s.adjoint() * gram.matrix()) * s;
        let lu_k = k.determinant().unwrap();
        let lu_pg = corr.matrix().determinant().unwrap() * gram.matrix().determinant().unwrap();
        let scale = lu_pg.norm();
        assert!((lu_k - lu_pg).norm() <= 1e-8 * scale, "pair {pair}");
        let rho: f64 = effective_spectrum(&gram, &corr).unwrap().rho().iter().product();
        assert!((rho - lu_k.re).abs() <= 1e-8 * scale, "pair {pair}");
        assert!(determinant_identity_check(&gram, &corr).unwrap().holds);
    }
}

#[test]
fn effective_rank_equals_correlation_rank() {
    let mut rng = RngStream::new(113, 0).generator();
    for trial in 0..200 {
        let m = 2 + trial % 6;
        let rank = 1 + (trial / 6) % m;
        let gram = random_gram(m, &mut rng).unwrap();
        let corr = random_correlation(m, Some(rank), &mut rng).unwrap();
        assert_eq!(corr.rank(), rank);
        let spectrum = effective_spectrum(&gram, &corr).unwrap();
        assert_eq!(spectrum.rank(), rank, "trial {trial}: {:?}", spectrum.rho());
        assert_eq!(numerical_rank(spectrum.rho()), rank);
    }
}

#[test]
fn identity_correlation_preserves_the_gram_spectrum() {
    let mut rng = RngStream::new(127, 0).generator();
    for m in 1..=8 {
        let gram = random_gram(m, &mut rng).unwrap();
        let spectrum = effective_spectrum(&gram, &CorrelationMatrix::identity(m)).unwrap();
        for (a, b) in spectrum.rho().iter().zip(gram.spectrum()) {
            assert!((a - b).abs() <= 1e-10 * b.max(1.0));
        }
    }
}

#[test]
fn constructed_power_allocation_sums_to_m() {
    let mut rng = RngStream::new(131, 0).generator();
    for m in 3..=8 {
        let gram = random_gram(m, &mut rng).unwrap();
        for l in 1..=m - 2 {
            let c = construct_improving_correlation(&gram, l).unwrap();
            assert!((c.nus.iter().sum::<f64>() - m as f64).abs() <= 1e-8);
            assert!(c.nus[..l].iter().all(|&v| v == 0.0));
            let s = effective_spectrum(&gram, &c.correlation).unwrap();
            assert_eq!(s.rank(), m - l);
            assert!(s.nonzero().iter().all(|&r| (r - c.balanced_rho).abs() <= 1e-9 * c.balanced_rho));
        }
    }
}

#[test]
fn haar_and_dirichlet_draws_are_well_formed() {
    let mut rng = RngStream::new(137, 0).generator();
    for m in 1..=8 {
        let u = haar_unitary(m, &mut rng);
        assert!((&u.adjoint() * &u).max_abs_diff(&ComplexMatrix::identity(m)) < 1e-12);
        let d = dirichlet_spectrum(m, m as f64, &mut rng);
        assert!((d.iter().sum::<f64>() - m as f64).abs() < 1e-12);
        assert!(d.iter().all(|&x| x > 0.0));
    }
}

fn spectrum_strategy() -> impl Strategy<Value = Vec<f64>> {
    (3usize..=8).prop_flat_map(|m| proptest::collection::vec(0.01f64..10.0, m)).prop_map(|mut v| {
        v.sort_by(f64::total_cmp);
        v
    })
}

fn gram_from(lambdas: &[f64], seed: u64) -> ComplexMatrix {
    let mut rng = RngStream::new(seed, 0).generator();
    let u = haar_unitary(lambdas.len(), &mut rng);
    (&u.scale_columns(lambdas) * &u.adjoint()).hermitian_part()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn criterion_is_scale_invariant(lambdas in spectrum_strategy(), n in 1usize..4, c in 1e-3f64..1e3) {
        let base = criterion_from_spectrum(&lambdas, n).unwrap();
        let scaled: Vec<f64> = lambdas.iter().map(|x| x * c).collect();
        let other = criterion_from_spectrum(&scaled, n).unwrap();
        prop_assert_eq!(base.rows.len(), other.rows.len());
        for (a, b) in base.rows.iter().zip(&other.rows) {
            prop_assert!((a.lhs - b.lhs).abs() <= 1e-10 * a.lhs);
            prop_assert_eq!(a.rhs, b.rhs);
        }
    }

    #[test]
    fn asymptote_is_homogeneous_in_snr(lambdas in spectrum_strategy(), n in 1usize..5, k in 1.0f64..100.0) {
        let s = EffectiveSpectrum::from_eigenvalues(&lambdas).unwrap();
        let (a, b) = (pep_asymptotic(&s, n, 1e6, T, Some(1e-6)), pep_asymptotic(&s, n, 1e6 * k, T, Some(1e-6)));
        let (a, b) = (a.unwrap(), b.unwrap());
        let expected = a.coefficient * (1e6 * k).powi(-(a.diversity_order as i32))
            * if a.log_correction { (1e6 * k).ln() } else { 1.0 };
        prop_assert!((b.value - expected).abs() <= 1e-9 * expected);
        prop_assert_eq!(a.diversity_order, b.diversity_order);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn construction_wins_exactly_when_the_criterion_holds(
        lambdas in spectrum_strategy(),
        n in 1usize..6,
        pick in 0usize..8,
        snr in 1e4f64..1e10,
    ) {
        let m = lambdas.len();
        prop_assume!(m > n + 1);
        let l = 1 + pick % (m - n - 1);
        let report = criterion_from_spectrum(&lambdas, n).unwrap();
        let row = report.row(l).unwrap();
        let mean = lambdas.iter().sum::<f64>() / m as f64;
        let bound = pep_lower_bound_independent(mean, m, n, snr, T).unwrap();
        let constructed = constructed_pep_asymptote(&lambdas, m, n, l, snr, T).unwrap();
        let ratio = constructed / bound;
        prop_assert!((ratio - row.lhs / row.rhs).abs() <= 1e-12 * ratio.max(1.0));
        if (row.lhs / row.rhs - 1.0).abs() > 1e-12 {
            prop_assert_eq!(constructed < bound, row.satisfied);
        }
    }

    #[test]
    fn constructed_correlation_is_valid(lambdas in spectrum_strategy(), pick in 0usize..8, seed in any::<u64>()) {
        let m = lambdas.len();
        let l = 1 + pick % (m - 2);
        let gram = difference_from_gram(&gram_from(&lambdas, seed)).unwrap();
        let c = construct_improving_correlation(&gram, l).unwrap();
        let p = c.correlation.matrix();
        prop_assert!(validate_correlation(p, m).is_ok());
        prop_assert_eq!(c.correlation.rank(), m - l);
    }
}
