//! Transform-domain decorrelation of a first-order Markov sequence.
//!
//! Builds the Toeplitz covariance `C_u[i][j] = rho^|i-j|`, rotates it into
//! the unitary DFT or orthonormal DCT basis, and normalizes to correlation
//! coefficients. The DCT leaves markedly smaller off-diagonal mass for
//! highly correlated sequences, the reason filter synthesis favors it.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::transform::dct_matrix;
use super::{EyeStateError, TransformDomain};

/// `|rho_v(i, j)|` matrix of the transform coefficients for a Markov-1
/// sequence with adjacent correlation `rho` and length `n`.
pub fn markov1_decorrelation(
    rho: f64,
    n: usize,
    domain: TransformDomain,
) -> Result<DMatrix<f64>, EyeStateError> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(EyeStateError::BadCorrelation(rho));
    }
    if n < 2 {
        return Err(EyeStateError::SequenceTooShort(n));
    }
    let c_u = DMatrix::from_fn(n, n, |i, j| rho.powi((i as i32 - j as i32).abs()));
    let c_v: DMatrix<f64> = match domain {
        TransformDomain::Dct => {
            let a = dct_matrix(n);
            let c = &a * &c_u * a.transpose();
            c.map(|v| v.abs())
        }
        TransformDomain::Dft => {
            let scale = 1.0 / (n as f64).sqrt();
            let a = DMatrix::from_fn(n, n, |i, j| {
                let angle = -2.0 * std::f64::consts::PI * (i * j) as f64 / n as f64;
                Complex64::from_polar(scale, angle)
            });
            let cu_c = c_u.map(|v| Complex64::new(v, 0.0));
            let c = &a * cu_c * a.adjoint();
            c.map(|v| v.norm())
        }
    };
    // Normalize to correlation coefficients.
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let denom = (c_v[(i, i)] * c_v[(j, j)]).sqrt();
            out[(i, j)] = if denom > 0.0 { c_v[(i, j)] / denom } else { 0.0 };
        }
    }
    Ok(out)
}

/// Mean of the off-diagonal entries.
pub fn mean_off_diagonal(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    if n < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m[(i, j)];
            }
        }
    }
    acc / (n * n - n) as f64
}
