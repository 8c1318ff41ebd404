//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Max entrywise asymmetry |a_ij − conj(a_ji)| accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues above this (negative) threshold are treated as round-off and clamped to zero.
pub const PSD_CLAMP: f64 = -1e-10;

const MAX_SWEEPS: usize = 64;

/// A = U · diag(values) · Uᴴ with ascending real eigenvalues.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub vectors: ComplexMatrix,
    pub values: Vec<f64>,
}

impl HermitianEig {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// U · diag(f(values)) · Uᴴ.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let mapped: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        let scaled = self.vectors.scale_columns(&mapped);
        &scaled * &self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|v| v)
    }
}

fn check_hermitian(a: &ComplexMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let asymmetry = a.hermitian_asymmetry();
    if asymmetry > HERMITIAN_TOL {
        return Err(Error::NotHermitian { asymmetry });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix.
///
/// The input is symmetrised to (A + Aᴴ)/2 after the tolerance check, then
/// diagonalised by cyclic Jacobi sweeps until the off-diagonal mass falls to
/// round-off. Eigenpairs are returned sorted by ascending eigenvalue.
pub fn hermitian_eigendecomposition(a: &ComplexMatrix) -> Result<HermitianEig> {
    check_hermitian(a)?;
    let n = a.rows();
    let mut m = a.hermitian_part();
    let mut v = ComplexMatrix::identity(n);

    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermitianEig { vectors, values })
}

/// One Jacobi rotation annihilating m[p][q]; accumulates into v.
fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let mag = apq.norm();
    if mag < f64::MIN_POSITIVE * 1e4 {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    if mag <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        m[(p, q)] = Complex64::new(0.0, 0.0);
        m[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    // Phase e^{-iφ} on index q makes the pivot real; then a real rotation.
    let phase = (apq / mag).conj();
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let j_pp = Complex64::new(c, 0.0);
    let j_pq = Complex64::new(s, 0.0);
    let j_qp = phase * (-s);
    let j_qq = phase * c;

    let n = m.rows();
    for k in 0..n {
        let akp = m[(k, p)];
        let akq = m[(k, q)];
        m[(k, p)] = akp * j_pp + akq * j_qp;
        m[(k, q)] = akp * j_pq + akq * j_qq;
    }
    for k in 0..n {
        let apk = m[(p, k)];
        let aqk = m[(q, k)];
        m[(p, k)] = j_pp.conj() * apk + j_qp.conj() * aqk;
        m[(q, k)] = j_pq.conj() * apk + j_qq.conj() * aqk;
    }
    m[(p, q)] = Complex64::new(0.0, 0.0);
    m[(q, p)] = Complex64::new(0.0, 0.0);
    m[(p, p)].im = 0.0;
    m[(q, q)].im = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * j_pp + vkq * j_qp;
        v[(k, q)] = vkp * j_pq + vkq * j_qq;
    }
}

/// Eigendecomposition of a PSD matrix with round-off negatives clamped to zero.
pub fn psd_eigendecomposition(a: &ComplexMatrix) -> Result<HermitianEig> {
    let mut eig = hermitian_eigendecomposition(a)?;
    if let Some(&lowest) = eig.values.first() {
        if lowest < PSD_CLAMP {
            return Err(Error::NotPsd { eigenvalue: lowest });
        }
    }
    for v in &mut eig.values {
        *v = v.max(0.0);
    }
    Ok(eig)
}

/// Hermitian PSD square root S with S·S = A.
pub fn psd_sqrt(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(psd_eigendecomposition(a)?.reconstruct_with(f64::sqrt))
}
