//! Blind estimation of image variance, noise variance, SNR and STVR from a
//! single noisy observation.
//!
//! Five estimators are provided: minimum (M1) and average (M2) of local tile
//! variances, their weighted blend, eigen-subspace splitting with an MDL
//! model-order criterion (M3), and linear extrapolation of the circular
//! autocorrelation sequence toward lag zero, horizontally (M4) or
//! vertically (M5). Every estimate reports a complementary split
//! `sigma_s2 + sigma_n2 = sigma_g2` of the observed total variance.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formfactor::NoiseRatio;
use crate::imagecore::GrayImage;

#[derive(Debug, Error)]
pub enum NoiseEstError {
    #[error("image {width}x{height} smaller than one {region}x{region} tile")]
    ImageSmallerThanTile { width: usize, height: usize, region: usize },
    #[error("image too small for subspace estimation (need at least 2x2)")]
    TooSmallForSubspace,
    #[error("degenerate rank-0 autocorrelation matrix")]
    DegenerateMatrix,
    #[error("c_alpha must lie in [0, 1], got {0}")]
    BadWeight(f64),
    #[error("region size must be at least 2, got {0}")]
    BadRegionSize(usize),
}

/// Which estimator produced a variance split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimatorMethod {
    M1,
    M2,
    M3,
    M4,
    M5,
}

impl std::fmt::Display for EstimatorMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcsDirection {
    Horizontal,
    Vertical,
}

/// Tuning knobs shared by the estimators.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Tile side for the local-statistics methods.
    pub region_size: usize,
    /// Blend weight for [`local_var_weighted`]; 1 is pure minimum, 0 pure average.
    pub c_alpha: f64,
    /// Extrapolation direction for the ACS method.
    pub acs_direction: AcsDirection,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self { region_size: 8, c_alpha: 0.5, acs_direction: AcsDirection::Horizontal }
    }
}

/// Complementary split of the observed total variance.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub sigma_s2: f64,
    pub sigma_n2: f64,
    pub sigma_g2: f64,
    pub method: EstimatorMethod,
    /// Raised when a physically impossible value was floored into range.
    pub floored: bool,
}

impl VarianceEstimate {
    fn from_noise(sigma_n2_raw: f64, sigma_g2: f64, method: EstimatorMethod) -> Self {
        let sigma_n2 = sigma_n2_raw.clamp(0.0, sigma_g2.max(0.0));
        let floored = sigma_n2 != sigma_n2_raw;
        Self { sigma_s2: sigma_g2 - sigma_n2, sigma_n2, sigma_g2, method, floored }
    }
}

fn tile_variances(img: &GrayImage, region: usize) -> Result<Vec<f64>, NoiseEstError> {
    if region < 2 {
        return Err(NoiseEstError::BadRegionSize(region));
    }
    if img.width() < region || img.height() < region {
        return Err(NoiseEstError::ImageSmallerThanTile {
            width: img.width(),
            height: img.height(),
            region,
        });
    }
    let mut vars = Vec::new();
    let mut buf = Vec::with_capacity(region * region);
    let tiles_x = img.width() / region;
    let tiles_y = img.height() / region;
    for ty in 0..tiles_y {
        for tx in 0..tiles_x {
            buf.clear();
            for y in ty * region..(ty + 1) * region {
                for x in tx * region..(tx + 1) * region {
                    buf.push(img.get(x, y));
                }
            }
            vars.push(population_variance(&buf));
        }
    }
    Ok(vars)
}

fn population_variance(data: &[f64]) -> f64 {
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    data.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// M1: noise variance as the minimum of non-overlapping tile variances.
pub fn local_var_min(img: &GrayImage, cfg: &EstimatorConfig) -> Result<VarianceEstimate, NoiseEstError> {
    let vars = tile_variances(img, cfg.region_size)?;
    let min = vars.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(VarianceEstimate::from_noise(min, img.variance(), EstimatorMethod::M1))
}

/// M2: noise variance as the average of tile variances.
pub fn local_var_avg(img: &GrayImage, cfg: &EstimatorConfig) -> Result<VarianceEstimate, NoiseEstError> {
    let vars = tile_variances(img, cfg.region_size)?;
    let avg = vars.iter().sum::<f64>() / vars.len() as f64;
    Ok(VarianceEstimate::from_noise(avg, img.variance(), EstimatorMethod::M2))
}

/// Weighted blend `c_alpha * min + (1 - c_alpha) * avg`; always inside
/// `[min, avg]`.
pub fn local_var_weighted(
    img: &GrayImage,
    cfg: &EstimatorConfig,
) -> Result<VarianceEstimate, NoiseEstError> {
    if !(0.0..=1.0).contains(&cfg.c_alpha) {
        return Err(NoiseEstError::BadWeight(cfg.c_alpha));
    }
    let vars = tile_variances(img, cfg.region_size)?;
    let min = vars.iter().copied().fold(f64::INFINITY, f64::min);
    let avg = vars.iter().sum::<f64>() / vars.len() as f64;
    let blended = cfg.c_alpha * min + (1.0 - cfg.c_alpha) * avg;
    // The blend lands between M1 and M2; report it under the dominant label.
    let method = if cfg.c_alpha >= 0.5 { EstimatorMethod::M1 } else { EstimatorMethod::M2 };
    Ok(VarianceEstimate::from_noise(blended, img.variance(), method))
}

/// Wax-Kailath MDL over a descending eigen-spectrum: number of samples `n`,
/// returns the estimated signal-subspace dimension.
fn mdl_order(eigenvalues: &[f64], n: usize) -> usize {
    let p = eigenvalues.len();
    let n = n.max(2) as f64;
    let mut best_k = 0;
    let mut best_score = f64::INFINITY;
    for k in 0..p {
        let trailing = &eigenvalues[k..];
        let m = trailing.len() as f64;
        let am = trailing.iter().sum::<f64>() / m;
        let log_gm = trailing.iter().map(|&l| l.max(1e-300).ln()).sum::<f64>() / m;
        let score = if am <= 0.0 {
            f64::INFINITY
        } else {
            -n * m * (log_gm - am.ln()) + 0.5 * (k as f64) * (2.0 * p as f64 - k as f64) * n.ln()
        };
        if score < best_score {
            best_score = score;
            best_k = k;
        }
    }
    best_k
}

/// M3: eigen-decomposition of the sample autocorrelation matrix of the
/// grand-mean-removed rows; the MDL criterion splits the spectrum into
/// signal and noise subspaces, and the trailing eigenvalues estimate the
/// noise variance.
pub fn subspace_variance(
    img: &GrayImage,
    _cfg: &EstimatorConfig,
) -> Result<VarianceEstimate, NoiseEstError> {
    let (w, h) = (img.width(), img.height());
    if w < 2 || h < 2 {
        return Err(NoiseEstError::TooSmallForSubspace);
    }
    let mean = img.mean();
    // R = (1/H) * sum over rows r of r^T r, rows grand-mean removed.
    let mut r = DMatrix::<f64>::zeros(w, w);
    for y in 0..h {
        for i in 0..w {
            let vi = img.get(i, y) - mean;
            for j in i..w {
                let vj = img.get(j, y) - mean;
                r[(i, j)] += vi * vj;
            }
        }
    }
    for i in 0..w {
        for j in 0..i {
            r[(i, j)] = r[(j, i)];
        }
    }
    r /= h as f64;

    let trace = r.trace();
    if trace <= 1e-12 {
        return Err(NoiseEstError::DegenerateMatrix);
    }

    let eigen = r.symmetric_eigen();
    let mut lambdas: Vec<f64> = eigen.eigenvalues.iter().copied().collect();
    lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    // Rank-deficient spectra produce tiny or slightly negative eigenvalues;
    // floor them so the geometric mean inside MDL stays meaningful.
    let floor = lambdas[0].max(0.0) * 1e-12 + 1e-300;
    for l in &mut lambdas {
        *l = l.max(floor);
    }

    let n_tsd = w;
    let n_sd = mdl_order(&lambdas, h);
    let sigma_n2 = if n_sd == n_tsd {
        0.0
    } else {
        lambdas[n_sd..].iter().map(|l| l.abs()).sum::<f64>() / (n_tsd - n_sd) as f64
    };
    // Leading-eigenvalue excess normalized per pixel; algebraically equal to
    // sigma_g2 - sigma_n2 when no eigenvalue dips below the noise floor.
    let sigma_s2_raw =
        lambdas[..n_sd].iter().map(|l| (l - sigma_n2).abs()).sum::<f64>() / n_tsd as f64;
    let sigma_g2 = trace / n_tsd as f64;
    let sigma_n2_reconciled = (sigma_g2 - sigma_s2_raw).clamp(0.0, sigma_g2);
    let floored = (sigma_n2_reconciled - sigma_n2).abs() > 1e-9 * sigma_g2.max(1.0);
    Ok(VarianceEstimate {
        sigma_s2: sigma_g2 - sigma_n2_reconciled,
        sigma_n2: sigma_n2_reconciled,
        sigma_g2,
        method: EstimatorMethod::M3,
        floored,
    })
}

/// Circular autocorrelation of the raw (mean-retained) image at lag
/// `(dx, dy)`.
fn circular_acs(img: &GrayImage, dx: usize, dy: usize) -> f64 {
    let (w, h) = (img.width(), img.height());
    let mut acc = 0.0;
    for y in 0..h {
        for x in 0..w {
            acc += img.get(x, y) * img.get((x + dx) % w, (y + dy) % h);
        }
    }
    acc / (w * h) as f64
}

/// M4/M5: the autocorrelation peak at lag zero carries signal-plus-noise
/// energy while nearby lags carry only signal; linear extrapolation of lags
/// one and two back to zero recovers the signal term.
pub fn acs_variance(img: &GrayImage, cfg: &EstimatorConfig) -> Result<VarianceEstimate, NoiseEstError> {
    let (w, h) = (img.width(), img.height());
    let (need, method) = match cfg.acs_direction {
        AcsDirection::Horizontal => (w, EstimatorMethod::M4),
        AcsDirection::Vertical => (h, EstimatorMethod::M5),
    };
    if need < 3 {
        return Err(NoiseEstError::TooSmallForSubspace);
    }
    let r0 = circular_acs(img, 0, 0);
    let (r1, r2) = match cfg.acs_direction {
        AcsDirection::Horizontal => (circular_acs(img, 1, 0), circular_acs(img, 2, 0)),
        AcsDirection::Vertical => (circular_acs(img, 0, 1), circular_acs(img, 0, 2)),
    };
    let r_s0 = 2.0 * r1 - r2;
    let mu = img.mean();
    let sigma_g2 = r0 - mu * mu;
    Ok(VarianceEstimate::from_noise(r0 - r_s0, sigma_g2, method))
}

/// Runs the estimator selected by `method`.
pub fn estimate(
    img: &GrayImage,
    method: EstimatorMethod,
    cfg: &EstimatorConfig,
) -> Result<VarianceEstimate, NoiseEstError> {
    match method {
        EstimatorMethod::M1 => local_var_min(img, cfg),
        EstimatorMethod::M2 => local_var_avg(img, cfg),
        EstimatorMethod::M3 => subspace_variance(img, cfg),
        EstimatorMethod::M4 => {
            acs_variance(img, &EstimatorConfig { acs_direction: AcsDirection::Horizontal, ..*cfg })
        }
        EstimatorMethod::M5 => {
            acs_variance(img, &EstimatorConfig { acs_direction: AcsDirection::Vertical, ..*cfg })
        }
    }
}

/// `SNR = sigma_s2 / (sigma_g2 - sigma_s2)`; a non-positive denominator
/// yields the infinity sentinel.
pub fn estimate_snr(est: &VarianceEstimate) -> NoiseRatio {
    let denom = est.sigma_g2 - est.sigma_s2;
    let value = if denom <= 0.0 { f64::INFINITY } else { est.sigma_s2 / denom };
    NoiseRatio::snr(value.max(0.0)).expect("non-negative by construction")
}

/// `STVR = sigma_s2 / sigma_g2`, clamped to `[0, 1]`. A zero-variance
/// observation degenerates to 1 (identity compensation).
pub fn estimate_stvr(est: &VarianceEstimate) -> NoiseRatio {
    let value = if est.sigma_g2 <= 0.0 { 1.0 } else { (est.sigma_s2 / est.sigma_g2).clamp(0.0, 1.0) };
    NoiseRatio::stvr(value).expect("clamped")
}

/// Percentage error that an image-variance estimation error `delta_sigma_s2`
/// induces in the SNR estimate:
/// `100 * sigma_g2 * delta / (sigma_s2 * (sigma_n2 - delta))`.
///
/// The error saturates at -100% as the noise vanishes and decays to
/// `100 * delta / sigma_s2` as noise dominates.
pub fn snr_error_pct(sigma_s2: f64, delta_sigma_s2: f64, sigma_n2: f64) -> f64 {
    let sigma_g2 = sigma_s2 + sigma_n2;
    100.0 * sigma_g2 * delta_sigma_s2 / (sigma_s2 * (sigma_n2 - delta_sigma_s2))
}

/// Percentage error in STVR equals the percentage error in the image
/// variance itself, independent of the noise level.
pub fn stvr_error_pct(sigma_s2: f64, delta_sigma_s2: f64) -> f64 {
    100.0 * delta_sigma_s2 / sigma_s2
}
