//! Image representation, gamma correction, polar resampling and noise
//! injection shared by every other module.
//!
//! Pixels are stored as `f64` and are only clamped to `[0, 255]` when an
//! image is written to disk; intermediate stages (noise addition in
//! particular) work on unclipped values so additive-moment algebra holds
//! exactly.

pub mod pgm;
pub mod synth;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("pixel buffer length {got} does not match {width}x{height}")]
    BadBufferLength { width: usize, height: usize, got: usize },
    #[error("gamma must be positive, got {0}")]
    NonPositiveGamma(f64),
    #[error("polar center ({x}, {y}) outside image bounds {width}x{height}")]
    CenterOutOfBounds { x: f64, y: f64, width: usize, height: usize },
    #[error("polar sampling needs radii >= 1 and angles >= 8, got {radii} x {angles}")]
    BadPolarSampling { radii: usize, angles: usize },
    #[error("image must be non-empty")]
    EmptyImage,
}

/// Grayscale raster, row-major, real-valued.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    /// All-zero image.
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, pixels: vec![0.0; width * height] }
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self, ImageError> {
        if pixels.len() != width * height {
            return Err(ImageError::BadBufferLength { width, height, got: pixels.len() });
        }
        Ok(Self { width, height, pixels })
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self { width, height, pixels }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [f64] {
        &mut self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.pixels[y * self.width + x] = v;
    }

    /// Pixel lookup with nearest-border replication for out-of-range indices.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let xc = x.clamp(0, self.width as isize - 1) as usize;
        let yc = y.clamp(0, self.height as isize - 1) as usize;
        self.get(xc, yc)
    }

    /// Bilinear sample with border clamping; `(x, y)` in pixel coordinates.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let x0 = x0 as isize;
        let y0 = y0 as isize;
        let p00 = self.get_clamped(x0, y0);
        let p10 = self.get_clamped(x0 + 1, y0);
        let p01 = self.get_clamped(x0, y0 + 1);
        let p11 = self.get_clamped(x0 + 1, y0 + 1);
        p00 * (1.0 - fx) * (1.0 - fy)
            + p10 * fx * (1.0 - fy)
            + p01 * (1.0 - fx) * fy
            + p11 * fx * fy
    }

    pub fn mean(&self) -> f64 {
        if self.pixels.is_empty() {
            return 0.0;
        }
        self.pixels.iter().sum::<f64>() / self.pixels.len() as f64
    }

    /// Population variance of all pixels.
    pub fn variance(&self) -> f64 {
        if self.pixels.is_empty() {
            return 0.0;
        }
        let m = self.mean();
        self.pixels.iter().map(|p| (p - m) * (p - m)).sum::<f64>() / self.pixels.len() as f64
    }

    pub fn min_pixel(&self) -> f64 {
        self.pixels.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_pixel(&self) -> f64 {
        self.pixels.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn transpose(&self) -> GrayImage {
        GrayImage::from_fn(self.height, self.width, |x, y| self.get(y, x))
    }

    /// Horizontal mirror (left-right flip).
    pub fn mirror_horizontal(&self) -> GrayImage {
        GrayImage::from_fn(self.width, self.height, |x, y| self.get(self.width - 1 - x, y))
    }

    /// Per-pixel map.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| f(p)).collect(),
        }
    }
}

/// Polar resampling of a source image about a sub-pixel origin.
#[derive(Debug, Clone)]
pub struct PolarImage {
    pub origin: (f64, f64),
    pub radii: usize,
    pub angles: usize,
    /// Row-major, radius-major: `samples[r * angles + a]`.
    pub samples: Vec<f64>,
}

impl PolarImage {
    #[inline]
    pub fn get(&self, radius: usize, angle: usize) -> f64 {
        self.samples[radius * self.angles + angle]
    }

    /// All samples of one ring.
    pub fn ring(&self, radius: usize) -> &[f64] {
        &self.samples[radius * self.angles..(radius + 1) * self.angles]
    }
}

/// Zero-mean i.i.d. Gaussian noise description; reproducible for one seed.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub variance: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(variance: f64, seed: u64) -> Self {
        assert!(variance >= 0.0, "noise variance must be non-negative");
        Self { variance, seed }
    }
}

/// Power-law intensity correction, `out = 255 * (in/255)^(1/gamma)`.
///
/// Gamma above one lightens the image. Negative inputs (possible on
/// noise-corrupted rasters) are treated as zero, the domain edge of the
/// power law.
pub fn gamma_correct(img: &GrayImage, gamma: f64) -> Result<GrayImage, ImageError> {
    if gamma <= 0.0 || !gamma.is_finite() {
        return Err(ImageError::NonPositiveGamma(gamma));
    }
    let inv = 1.0 / gamma;
    Ok(img.map(|p| 255.0 * (p.max(0.0) / 255.0).powf(inv)))
}

/// Resamples `img` on a polar grid centered at `center`, one ring per pixel
/// of radius, bilinear interpolation, border values replicated.
pub fn to_polar(
    img: &GrayImage,
    center: (f64, f64),
    radii: usize,
    angles: usize,
) -> Result<PolarImage, ImageError> {
    let (cx, cy) = center;
    if !(cx >= 0.0 && cx <= (img.width - 1) as f64 && cy >= 0.0 && cy <= (img.height - 1) as f64) {
        return Err(ImageError::CenterOutOfBounds {
            x: cx,
            y: cy,
            width: img.width,
            height: img.height,
        });
    }
    if radii < 1 || angles < 8 {
        return Err(ImageError::BadPolarSampling { radii, angles });
    }
    let mut samples = Vec::with_capacity(radii * angles);
    for r in 0..radii {
        for a in 0..angles {
            let theta = 2.0 * std::f64::consts::PI * a as f64 / angles as f64;
            let x = cx + r as f64 * theta.cos();
            let y = cy + r as f64 * theta.sin();
            samples.push(img.sample_bilinear(x, y));
        }
    }
    Ok(PolarImage { origin: center, radii, angles, samples })
}

/// Adds zero-mean Gaussian noise. Values are left unclamped so the additive
/// model stays exact; the same seed always produces the same output.
pub fn add_noise(img: &GrayImage, spec: &NoiseSpec) -> GrayImage {
    if spec.variance == 0.0 {
        return img.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = Normal::new(0.0, spec.variance.sqrt()).expect("finite std dev");
    let pixels = img.pixels.iter().map(|&p| p + normal.sample(&mut rng)).collect();
    GrayImage { width: img.width, height: img.height, pixels }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_fixed_points() {
        let img = GrayImage::from_pixels(3, 1, vec![0.0, 64.0, 255.0]).unwrap();
        let out = gamma_correct(&img, 2.0).unwrap();
        assert_eq!(out.get(0, 0), 0.0);
        assert_eq!(out.get(2, 0), 255.0);
        // 255 * sqrt(64/255)
        let expected = 255.0 * (64.0f64 / 255.0).sqrt();
        assert!((out.get(1, 0) - expected).abs() < 1e-12);
        assert!((expected - 127.749_755).abs() < 1e-3);
    }

    #[test]
    fn gamma_rejects_non_positive() {
        let img = GrayImage::new(2, 2);
        assert!(gamma_correct(&img, 0.0).is_err());
        assert!(gamma_correct(&img, -1.5).is_err());
    }

    #[test]
    fn gamma_is_monotone() {
        let img = GrayImage::from_pixels(
            6,
            1,
            vec![0.0, 1.0, 10.0, 100.0, 200.0, 255.0],
        )
        .unwrap();
        for gamma in [0.5, 1.0, 2.5, 3.0] {
            let out = gamma_correct(&img, gamma).unwrap();
            for i in 1..6 {
                assert!(out.get(i, 0) >= out.get(i - 1, 0));
            }
        }
    }

    #[test]
    fn polar_constant_image_is_constant() {
        let img = GrayImage::from_fn(21, 21, |_, _| 42.0);
        let polar = to_polar(&img, (10.0, 10.0), 8, 32).unwrap();
        for s in &polar.samples {
            assert!((s - 42.0).abs() < 1e-12);
        }
    }

    #[test]
    fn polar_radius_zero_is_center_pixel() {
        let mut img = GrayImage::new(9, 9);
        img.set(4, 4, 200.0);
        let polar = to_polar(&img, (4.0, 4.0), 1, 16).unwrap();
        for a in 0..16 {
            assert!((polar.get(0, a) - 200.0).abs() < 1e-12);
        }
    }

    #[test]
    fn polar_dark_disc_transition() {
        // Dark disc of radius 5 at the center: rings inside dark, outside bright.
        let img = GrayImage::from_fn(41, 41, |x, y| {
            let dx = x as f64 - 20.0;
            let dy = y as f64 - 20.0;
            if (dx * dx + dy * dy).sqrt() < 5.0 {
                10.0
            } else {
                240.0
            }
        });
        let polar = to_polar(&img, (20.0, 20.0), 12, 64).unwrap();
        for a in 0..64 {
            assert!(polar.get(2, a) < 30.0, "inside disc should be dark");
            assert!(polar.get(8, a) > 220.0, "outside disc should be bright");
        }
    }

    #[test]
    fn polar_radially_symmetric_constant_along_angle() {
        let img = GrayImage::from_fn(41, 41, |x, y| {
            let dx = x as f64 - 20.0;
            let dy = y as f64 - 20.0;
            100.0 + 5.0 * (dx * dx + dy * dy).sqrt()
        });
        let polar = to_polar(&img, (20.0, 20.0), 15, 90).unwrap();
        for r in 0..15 {
            let ring = polar.ring(r);
            let lo = ring.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = ring.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(hi - lo <= 1.0, "ring {r} spread {}", hi - lo);
        }
    }

    #[test]
    fn polar_rejects_center_outside() {
        let img = GrayImage::new(10, 10);
        assert!(to_polar(&img, (-1.0, 5.0), 4, 16).is_err());
        assert!(to_polar(&img, (5.0, 10.0), 4, 16).is_err());
    }

    #[test]
    fn noise_zero_variance_is_identity() {
        let img = synth::synth_step_edge(16, 16, 0.0, 255.0, synth::StepBoundary::Vertical(8));
        let out = add_noise(&img, &NoiseSpec::new(0.0, 7));
        assert_eq!(img, out);
    }

    #[test]
    fn noise_same_seed_identical() {
        let img = GrayImage::new(32, 32);
        let a = add_noise(&img, &NoiseSpec::new(25.0, 99));
        let b = add_noise(&img, &NoiseSpec::new(25.0, 99));
        assert_eq!(a, b);
    }

    #[test]
    fn noise_sample_variance_matches_spec() {
        let img = GrayImage::new(512, 512);
        let spec = NoiseSpec::new(49.0, 3);
        let out = add_noise(&img, &spec);
        let n = out.pixels().len() as f64;
        let mean = out.pixels().iter().sum::<f64>() / n;
        let var = out.pixels().iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / n;
        assert!((var - 49.0).abs() / 49.0 < 0.05, "sample variance {var}");
        // Empirical mean within 3*sqrt(v/N) of zero.
        assert!(mean.abs() < 3.0 * (49.0 / n).sqrt(), "mean {mean}");
    }
}
