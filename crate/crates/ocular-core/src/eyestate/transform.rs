//! Orthonormal 2-D type-II DCT and unitary-convention 2-D DFT used for
//! filter synthesis and correlation.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

/// Orthonormal DCT-II basis matrix of order `n`:
/// `C[k][m] = s_k * cos((2m+1) k pi / (2n))`, `s_0 = sqrt(1/n)`,
/// `s_k = sqrt(2/n)` otherwise.
pub fn dct_matrix(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |k, m| {
        let s = if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
        s * ((2 * m + 1) as f64 * k as f64 * std::f64::consts::PI / (2.0 * n as f64)).cos()
    })
}

/// Forward 2-D DCT of row-major data with `rows x cols` shape.
pub fn dct2(data: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let x = DMatrix::from_row_slice(rows, cols, data);
    let cm = dct_matrix(rows);
    let cn = dct_matrix(cols);
    let y = &cm * x * cn.transpose();
    y.transpose().as_slice().to_vec()
}

/// Inverse 2-D DCT (the transpose of the orthonormal forward transform).
pub fn idct2(data: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let y = DMatrix::from_row_slice(rows, cols, data);
    let cm = dct_matrix(rows);
    let cn = dct_matrix(cols);
    let x = cm.transpose() * y * cn;
    x.transpose().as_slice().to_vec()
}

fn fft_pass_rows(data: &mut [Complex64], rows: usize, cols: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(cols) } else { planner.plan_fft_forward(cols) };
    for r in 0..rows {
        fft.process(&mut data[r * cols..(r + 1) * cols]);
    }
}

fn fft_pass_cols(data: &mut [Complex64], rows: usize, cols: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(rows) } else { planner.plan_fft_forward(rows) };
    let mut scratch = vec![Complex64::default(); rows];
    for c in 0..cols {
        for r in 0..rows {
            scratch[r] = data[r * cols + c];
        }
        fft.process(&mut scratch);
        for r in 0..rows {
            data[r * cols + c] = scratch[r];
        }
    }
}

/// Forward 2-D DFT of row-major real data.
pub fn dft2(data: &[f64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_pass_rows(&mut buf, rows, cols, false);
    fft_pass_cols(&mut buf, rows, cols, false);
    buf
}

/// Inverse 2-D DFT with `1/(rows*cols)` normalization.
pub fn idft2(data: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut buf = data.to_vec();
    fft_pass_rows(&mut buf, rows, cols, true);
    fft_pass_cols(&mut buf, rows, cols, true);
    let scale = 1.0 / (rows * cols) as f64;
    for v in &mut buf {
        *v *= scale;
    }
    buf
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn dct_matrix_is_orthonormal() {
        let c = dct_matrix(8);
        let prod = &c * c.transpose();
        for i in 0..8 {
            for j in 0..8 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dct_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let data: Vec<f64> = (0..7 * 5).map(|_| rng.random_range(-10.0..10.0)).collect();
        let back = idct2(&dct2(&data, 7, 5), 7, 5);
        for (a, b) in data.iter().zip(back.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn dft_round_trip_and_parseval() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let data: Vec<f64> = (0..6 * 9).map(|_| rng.random_range(-5.0..5.0)).collect();
        let spec = dft2(&data, 6, 9);
        let back = idft2(&spec, 6, 9);
        for (a, b) in data.iter().zip(back.iter()) {
            assert!((a - b.re).abs() < 1e-10);
            assert!(b.im.abs() < 1e-10);
        }
        let energy: f64 = data.iter().map(|v| v * v).sum();
        let spec_energy: f64 = spec.iter().map(|v| v.norm_sqr()).sum::<f64>() / (6.0 * 9.0);
        assert!((energy - spec_energy).abs() < 1e-8);
    }
}
