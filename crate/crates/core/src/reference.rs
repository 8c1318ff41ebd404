//! The three-antenna worked example: a non-orthogonal code pair, the
//! improving correlation P₁ and the degrading correlation P₂.

use num_complex::Complex64;

use crate::error::Result;
use crate::model::{CorrelationMatrix, GramMatrix};
use crate::numerics::ComplexMatrix;

/// Eigenvalues of P₂, assigned to the Gram eigenvectors in ascending-λ order.
///
/// This assignment reproduces the printed P₂ entries (including the sign of
/// the imaginary parts) to within 4e-5.
pub const P2_EIGENVALUES: [f64; 3] = [1.8, 0.5, 0.7];

fn circulant(d: f64, a: Complex64) -> ComplexMatrix {
    let b = a.conj();
    let one = Complex64::new(d, 0.0);
    ComplexMatrix::from_row_major(3, 3, vec![one, a, b, b, one, a, a, b, one]).expect("finite")
}

/// ΔᴴΔ with eigenvalues ≈ (0.1, 2.9, 3).
pub fn example_gram() -> ComplexMatrix {
    circulant(2.0, Complex64::new(-0.95, 0.029))
}

/// P₁ as printed (four decimals).
pub fn printed_p1() -> ComplexMatrix {
    circulant(1.0, Complex64::new(-0.5, -0.0144))
}

/// P₂ as printed (four decimals).
pub fn printed_p2() -> ComplexMatrix {
    circulant(1.0, Complex64::new(0.4, 0.0577))
}

/// P₂ rebuilt exactly on the eigenvectors of `gram`.
pub fn degrading_correlation(gram: &GramMatrix) -> Result<CorrelationMatrix> {
    let u = gram.eigenvectors();
    let factor = u.scale_columns(&P2_EIGENVALUES.map(f64::sqrt));
    CorrelationMatrix::from_factor(&factor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::difference_from_gram;

    #[test]
    fn rebuilt_p2_matches_printed_entries() {
        let gram = difference_from_gram(&example_gram()).unwrap();
        let p2 = degrading_correlation(&gram).unwrap();
        assert!(p2.matrix().max_abs_diff(&printed_p2()) < 1e-4);
        assert!((p2.matrix().trace().re - 3.0).abs() < 1e-12);
    }
}
