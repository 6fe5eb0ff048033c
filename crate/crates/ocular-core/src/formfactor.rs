//! Form Factor: the RMS-to-average ratio of a pixel sequence,
//! `F = sqrt(1 + var/mean^2)`, in directional (per column / row / radius)
//! and local (windowed) modes, plus its blind recovery under zero-mean
//! i.i.d. additive noise.
//!
//! For non-negative data the moment form equals the norm form
//! `sqrt(N) * ||x||_2 / ||x||_1` and is bounded by `1 <= F <= sqrt(N)`,
//! with equality exactly at constant vectors and single-nonzero vectors.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imagecore::{GrayImage, PolarImage};

#[derive(Debug, Error)]
pub enum FfError {
    #[error("negative element {value} at index {index}")]
    NegativeElement { index: usize, value: f64 },
    #[error("empty sequence")]
    EmptySequence,
    #[error("expected a {expected:?} ratio, got {got:?}")]
    WrongRatioKind { expected: RatioKind, got: RatioKind },
    #[error("ratio value {0} outside its admissible range")]
    RatioOutOfRange(f64),
    #[error("window must be odd and at least 3, got {0}")]
    BadWindow(usize),
}

/// Axis along which a directional profile was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FfAxis {
    /// One value per column.
    Horizontal,
    /// One value per row.
    Vertical,
    /// One value per radius ring.
    Radial,
}

/// Directional form-factor profile.
#[derive(Debug, Clone)]
pub struct FFProfile {
    pub axis: FfAxis,
    pub values: Vec<f64>,
    /// Number of pixels contributing to each value.
    pub n_per_sample: usize,
}

/// Local (windowed) form factor per pixel.
#[derive(Debug, Clone)]
pub struct FFMap {
    pub width: usize,
    pub height: usize,
    pub window: usize,
    pub values: Vec<f64>,
}

impl FFMap {
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RatioKind {
    Snr,
    Stvr,
}

/// Dimensionless noise ratio: SNR in `[0, inf]`, STVR in `[0, 1]`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NoiseRatio {
    pub kind: RatioKind,
    pub value: f64,
}

impl NoiseRatio {
    pub fn snr(value: f64) -> Result<Self, FfError> {
        if value < 0.0 || value.is_nan() {
            return Err(FfError::RatioOutOfRange(value));
        }
        Ok(Self { kind: RatioKind::Snr, value })
    }

    pub fn stvr(value: f64) -> Result<Self, FfError> {
        if !(0.0..=1.0).contains(&value) {
            return Err(FfError::RatioOutOfRange(value));
        }
        Ok(Self { kind: RatioKind::Stvr, value })
    }
}

/// Recovery result; `clamped` is raised when sampling error pushed the
/// radicand below one and the value was floored at the homogeneous limit.
#[derive(Debug, Clone, Copy)]
pub struct Recovered {
    pub value: f64,
    pub clamped: bool,
}

/// Form factor of a non-negative sequence, `sqrt(N * sum(x^2)) / sum(x)`.
/// An all-zero sequence returns exactly 1 to avoid the 0/0 indefiniteness.
pub fn form_factor(seq: &[f64]) -> Result<f64, FfError> {
    if seq.is_empty() {
        return Err(FfError::EmptySequence);
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for (index, &value) in seq.iter().enumerate() {
        if value < 0.0 {
            return Err(FfError::NegativeElement { index, value });
        }
        sum += value;
        sum_sq += value * value;
    }
    if sum == 0.0 {
        return Ok(1.0);
    }
    Ok((seq.len() as f64 * sum_sq).sqrt() / sum)
}

/// Moment form `sqrt(1 + var/mean^2)` used by the profile computations.
///
/// Equal to [`form_factor`] on non-negative data but total on noise-corrupted
/// sequences that may dip below zero; a sequence with non-positive mean
/// degenerates to 1.
pub(crate) fn ff_moments(seq: &[f64]) -> f64 {
    let n = seq.len() as f64;
    if n == 0.0 {
        return 1.0;
    }
    let mean = seq.iter().sum::<f64>() / n;
    if mean <= 0.0 {
        return 1.0;
    }
    let var = seq.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (1.0 + var / (mean * mean)).sqrt()
}

/// One form factor per column.
pub fn horizontal_ff(img: &GrayImage) -> FFProfile {
    let mut values = Vec::with_capacity(img.width());
    let mut column = Vec::with_capacity(img.height());
    for x in 0..img.width() {
        column.clear();
        for y in 0..img.height() {
            column.push(img.get(x, y));
        }
        values.push(ff_moments(&column));
    }
    FFProfile { axis: FfAxis::Horizontal, values, n_per_sample: img.height() }
}

/// One form factor per row.
pub fn vertical_ff(img: &GrayImage) -> FFProfile {
    let mut values = Vec::with_capacity(img.height());
    for y in 0..img.height() {
        let row = &img.pixels()[y * img.width()..(y + 1) * img.width()];
        values.push(ff_moments(row));
    }
    FFProfile { axis: FfAxis::Vertical, values, n_per_sample: img.width() }
}

/// One form factor per radius ring, computed over the ring's angular samples.
pub fn radial_ff(polar: &PolarImage) -> FFProfile {
    let values = (0..polar.radii).map(|r| ff_moments(polar.ring(r))).collect();
    FFProfile { axis: FfAxis::Radial, values, n_per_sample: polar.angles }
}

/// Form factor of the `window x window` neighborhood of every pixel,
/// borders replicated.
pub fn local_ff(img: &GrayImage, window: usize) -> Result<FFMap, FfError> {
    if window < 3 || window % 2 == 0 {
        return Err(FfError::BadWindow(window));
    }
    let half = (window / 2) as isize;
    let mut values = Vec::with_capacity(img.width() * img.height());
    let mut buf = Vec::with_capacity(window * window);
    for y in 0..img.height() as isize {
        for x in 0..img.width() as isize {
            buf.clear();
            for dy in -half..=half {
                for dx in -half..=half {
                    buf.push(img.get_clamped(x + dx, y + dy));
                }
            }
            values.push(ff_moments(&buf));
        }
    }
    Ok(FFMap { width: img.width(), height: img.height(), window, values })
}

/// Recovers the noise-free form factor from a noisy measurement and an SNR
/// estimate: `F_s^2 = (F_g^2 + 1/SNR) / (1 + 1/SNR)`.
///
/// An SNR of zero means the measurement is all noise and yields 1; an
/// infinite SNR returns the measurement unchanged.
pub fn recover_ff_snr(f_g: f64, snr: &NoiseRatio) -> Result<Recovered, FfError> {
    if snr.kind != RatioKind::Snr {
        return Err(FfError::WrongRatioKind { expected: RatioKind::Snr, got: snr.kind });
    }
    if snr.value == 0.0 {
        return Ok(Recovered { value: 1.0, clamped: f_g != 1.0 });
    }
    let inv = 1.0 / snr.value;
    let radicand = (f_g * f_g + inv) / (1.0 + inv);
    clamp_recovery(radicand)
}

/// Recovers the noise-free form factor from a noisy measurement and an STVR
/// estimate: `F_s^2 = STVR * (F_g^2 - 1) + 1`.
pub fn recover_ff_stvr(f_g: f64, stvr: &NoiseRatio) -> Result<Recovered, FfError> {
    if stvr.kind != RatioKind::Stvr {
        return Err(FfError::WrongRatioKind { expected: RatioKind::Stvr, got: stvr.kind });
    }
    let radicand = stvr.value * (f_g * f_g - 1.0) + 1.0;
    clamp_recovery(radicand)
}

fn clamp_recovery(radicand: f64) -> Result<Recovered, FfError> {
    if radicand < 1.0 {
        Ok(Recovered { value: 1.0, clamped: true })
    } else {
        Ok(Recovered { value: radicand.sqrt(), clamped: false })
    }
}
