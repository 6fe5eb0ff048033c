//! OT-MACH correlation filters synthesized in a transform domain.
//!
//! The filter is `h = (a C_n + b D_x + c S_x)^-1 m_x` where all matrices are
//! diagonal over the transform bins: `C_n = sigma^2 I` is the white-noise
//! spectral density, `D_x` the average power spectrum of the training
//! images, `S_x` their spectral similarity (variance about the class mean),
//! and `m_x` the class-mean transform. Inversion is element-wise.
//!
//! The DFT path correlates by multiplying the test spectrum with the
//! conjugate filter; the DCT path multiplies the (real) coefficient grids,
//! which in the pixel domain equals circular convolution of the
//! symmetrically extended images modulated by a fixed surface — the
//! matched-class peak therefore lands at the surface origin.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::transform::{dct2, dft2, idct2, idft2};
use super::{EyeState, EyeStateError};
use crate::imagecore::GrayImage;

/// Denominator floor for bins where all three terms vanish.
const EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformDomain {
    Dct,
    Dft,
}

/// Non-negative trade-off weights and the white-noise level.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OtMachParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub sigma2: f64,
}

impl Default for OtMachParams {
    fn default() -> Self {
        // Weights found to generate the best results for eye-state classes.
        Self { a: 0.1, b: 0.2, c: 0.7, sigma2: 1.0 }
    }
}

/// One class's synthesized filter plus the statistics the Fisher-ratio
/// score needs.
#[derive(Debug, Clone)]
pub struct ClassFilter {
    pub label: EyeState,
    /// Transform-domain filter coefficients.
    pub h: Vec<Complex64>,
    /// Class mean in the transform domain.
    pub mean: Vec<Complex64>,
    /// Per-coefficient class variance in the transform domain.
    pub var: Vec<f64>,
}

/// Per-class OT-MACH filters sharing one image shape and domain.
#[derive(Debug, Clone)]
pub struct FilterBank {
    pub domain: TransformDomain,
    pub width: usize,
    pub height: usize,
    pub params: OtMachParams,
    pub classes: Vec<ClassFilter>,
    /// Raised when some denominator bin was epsilon-floored.
    pub regularized: bool,
}

/// Real-valued correlation output plane.
#[derive(Debug, Clone)]
pub struct CorrelationSurface {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl CorrelationSurface {
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Row-major location of the global maximum (first in scan order).
    pub fn peak(&self) -> (usize, usize, f64) {
        let mut best = (0usize, 0usize, f64::NEG_INFINITY);
        for y in 0..self.height {
            for x in 0..self.width {
                let v = self.get(x, y);
                if v > best.2 {
                    best = (x, y, v);
                }
            }
        }
        best
    }
}

/// Transforms an image into the bank's domain.
pub fn transform_image(img: &GrayImage, domain: TransformDomain) -> Vec<Complex64> {
    match domain {
        TransformDomain::Dct => dct2(img.pixels(), img.height(), img.width())
            .into_iter()
            .map(|v| Complex64::new(v, 0.0))
            .collect(),
        TransformDomain::Dft => dft2(img.pixels(), img.height(), img.width()),
    }
}

/// Synthesizes one OT-MACH filter per class from the training images.
pub fn synthesize_otmach(
    train: &[(EyeState, Vec<GrayImage>)],
    params: &OtMachParams,
    domain: TransformDomain,
) -> Result<FilterBank, EyeStateError> {
    if train.is_empty() {
        return Err(EyeStateError::NoClasses);
    }
    if params.a < 0.0 || params.b < 0.0 || params.c < 0.0 || params.a + params.b + params.c <= 0.0 {
        return Err(EyeStateError::BadTradeoff);
    }
    let (width, height) = {
        let first = train
            .iter()
            .find_map(|(_, imgs)| imgs.first())
            .ok_or(EyeStateError::EmptyClass)?;
        (first.width(), first.height())
    };
    let bins = width * height;
    let mut classes = Vec::with_capacity(train.len());
    let mut regularized = false;

    for (label, images) in train {
        if images.is_empty() {
            return Err(EyeStateError::EmptyClass);
        }
        for img in images {
            if img.width() != width || img.height() != height {
                return Err(EyeStateError::ShapeMismatch {
                    expected: (width, height),
                    got: (img.width(), img.height()),
                });
            }
        }
        let spectra: Vec<Vec<Complex64>> =
            images.iter().map(|img| transform_image(img, domain)).collect();
        let n = spectra.len() as f64;

        let mut mean = vec![Complex64::default(); bins];
        for spec in &spectra {
            for (m, s) in mean.iter_mut().zip(spec.iter()) {
                *m += s;
            }
        }
        for m in &mut mean {
            *m /= n;
        }

        let mut power = vec![0.0f64; bins];
        let mut var = vec![0.0f64; bins];
        for spec in &spectra {
            for k in 0..bins {
                power[k] += spec[k].norm_sqr();
                var[k] += (spec[k] - mean[k]).norm_sqr();
            }
        }
        for k in 0..bins {
            power[k] /= n;
            var[k] /= n;
        }

        let mut h = vec![Complex64::default(); bins];
        for k in 0..bins {
            let mut denom = params.a * params.sigma2 + params.b * power[k] + params.c * var[k];
            if denom < EPSILON {
                denom = EPSILON;
                regularized = true;
            }
            h[k] = mean[k] / denom;
        }
        classes.push(ClassFilter { label: *label, h, mean, var });
    }

    Ok(FilterBank { domain, width, height, params: *params, classes, regularized })
}

impl FilterBank {
    pub fn class(&self, label: EyeState) -> Option<&ClassFilter> {
        self.classes.iter().find(|c| c.label == label)
    }

    fn check_shape(&self, test: &GrayImage) -> Result<(), EyeStateError> {
        if test.width() != self.width || test.height() != self.height {
            return Err(EyeStateError::ShapeMismatch {
                expected: (self.width, self.height),
                got: (test.width(), test.height()),
            });
        }
        Ok(())
    }

    /// Correlates the test image against one class filter.
    pub fn correlate(
        &self,
        test: &GrayImage,
        class: &ClassFilter,
    ) -> Result<CorrelationSurface, EyeStateError> {
        self.check_shape(test)?;
        let spectrum = transform_image(test, self.domain);
        Ok(self.correlate_spectrum(&spectrum, class))
    }

    pub(crate) fn correlate_spectrum(
        &self,
        spectrum: &[Complex64],
        class: &ClassFilter,
    ) -> CorrelationSurface {
        let (rows, cols) = (self.height, self.width);
        let values: Vec<f64> = match self.domain {
            TransformDomain::Dft => {
                // Circular correlation: multiply by the conjugate filter.
                let prod: Vec<Complex64> =
                    spectrum.iter().zip(class.h.iter()).map(|(t, h)| t * h.conj()).collect();
                idft2(&prod, rows, cols).into_iter().map(|v| v.re).collect()
            }
            TransformDomain::Dct => {
                let prod: Vec<f64> =
                    spectrum.iter().zip(class.h.iter()).map(|(t, h)| t.re * h.re).collect();
                idct2(&prod, rows, cols)
            }
        };
        CorrelationSurface { width: cols, height: rows, values }
    }
}

/// Coefficient-product surface of two spatial images through the DCT path:
/// `IDCT(DCT(test) .* DCT(filter))`.
pub fn dct_correlate_images(test: &GrayImage, filter: &GrayImage) -> CorrelationSurface {
    let rows = test.height();
    let cols = test.width();
    let a = dct2(test.pixels(), rows, cols);
    let b = dct2(filter.pixels(), rows, cols);
    let prod: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x * y).collect();
    CorrelationSurface { width: cols, height: rows, values: idct2(&prod, rows, cols) }
}

/// Half-sample symmetric extension of `rows x cols` data onto the
/// `2rows x 2cols` torus.
fn symmetric_extension(data: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let (er, ec) = (2 * rows, 2 * cols);
    let mut out = vec![0.0; er * ec];
    for i in 0..er {
        let si = if i < rows { i } else { 2 * rows - 1 - i };
        for j in 0..ec {
            let sj = if j < cols { j } else { 2 * cols - 1 - j };
            out[i * ec + j] = data[si * cols + sj];
        }
    }
    out
}

/// Direct circular convolution on the torus (quadratic cost; this path is a
/// verification oracle for small shapes).
fn circular_convolve(a: &[f64], b: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; rows * cols];
    for ui in 0..rows {
        for uj in 0..cols {
            let mut acc = 0.0;
            for i in 0..rows {
                let wi = (ui + rows - i) % rows;
                for j in 0..cols {
                    let wj = (uj + cols - j) % cols;
                    acc += a[i * cols + j] * b[wi * cols + wj];
                }
            }
            out[ui * cols + uj] = acc;
        }
    }
    out
}

/// One axis of the modulating surface: the half-sample interpolation kernel
/// of length `2n` (a Dirichlet ratio) with the DC term corrected for the
/// orthonormal DCT scaling.
fn modulation_axis(n: usize) -> Vec<f64> {
    let scale = (2.0 / n as f64).sqrt() / (2.0 * n as f64);
    let dc = 1.0 / (2.0 * 2.0f64.sqrt()) - 1.0;
    (0..2 * n)
        .map(|m| {
            let t = 2.0 * m as f64 - 1.0;
            let quarter = std::f64::consts::PI * t / 4.0;
            let fine = quarter / n as f64;
            let dirichlet = (fine * (n as f64 - 1.0)).cos() * quarter.sin() / fine.sin();
            scale * (dc + dirichlet)
        })
        .collect()
}

/// The modulating surface, separable across the two axes.
pub fn modulation_surface(rows: usize, cols: usize) -> Vec<f64> {
    let zr = modulation_axis(rows);
    let zc = modulation_axis(cols);
    let mut out = Vec::with_capacity(4 * rows * cols);
    for i in 0..2 * rows {
        for j in 0..2 * cols {
            out.push(zr[i] * zc[j]);
        }
    }
    out
}

/// Pixel-domain construction of the DCT coefficient-product surface:
/// symmetric extension of both images, circular convolution, modulation,
/// restriction to the original support. Equals [`dct_correlate_images`]
/// element-wise; the cost is quadratic in the pixel count, so keep shapes
/// small.
pub fn dct_spatial_equivalent(test: &GrayImage, filter: &GrayImage) -> CorrelationSurface {
    let rows = test.height();
    let cols = test.width();
    let (er, ec) = (2 * rows, 2 * cols);
    let ext_test = symmetric_extension(test.pixels(), rows, cols);
    let ext_filter = symmetric_extension(filter.pixels(), rows, cols);
    let z = modulation_surface(rows, cols);
    let conv = circular_convolve(&ext_test, &ext_filter, er, ec);
    let full = circular_convolve(&conv, &z, er, ec);
    let mut values = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            values.push(full[i * ec + j]);
        }
    }
    CorrelationSurface { width: cols, height: rows, values }
}
