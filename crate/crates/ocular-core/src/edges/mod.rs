//! Edge detection from the Edge Strength Index, the inverse square of the
//! local form factor.
//!
//! The pipeline anchors intensities at the image minimum, computes the ESI
//! map over 3x3 windows, compensates the noise-induced depression using a
//! blind STVR estimate, suppresses non-minimal responses across the local
//! edge direction within a 5x5 window, and keeps pixels whose index falls in
//! the edge band `[alpha_low, alpha_high]`. Binary edge maps are compared
//! with the Baddeley distance-transform metric.

mod baddeley;

pub use baddeley::{baddeley_metric, default_cap, distance_transform};

use thiserror::Error;

use crate::imagecore::GrayImage;
use crate::noiseblind::{acs_variance, EstimatorConfig};

#[derive(Debug, Error)]
pub enum EdgeError {
    #[error("window must be odd and at least 3, got {0}")]
    BadWindow(usize),
    #[error("edge band must satisfy 0.5 <= low < high <= 1, got [{low}, {high}]")]
    BadBand { low: f64, high: f64 },
    #[error("edge maps have different dimensions: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("stvr must lie in [0, 1], got {0}")]
    BadStvr(f64),
    #[error("metric exponent must be at least 1, got {0}")]
    BadExponent(f64),
}

/// Per-pixel edge strength, each value in `[1/window^2, 1]`.
#[derive(Debug, Clone)]
pub struct ESIMap {
    pub width: usize,
    pub height: usize,
    pub window: usize,
    pub values: Vec<f64>,
}

impl ESIMap {
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    #[inline]
    fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let xc = x.clamp(0, self.width as isize - 1) as usize;
        let yc = y.clamp(0, self.height as isize - 1) as usize;
        self.get(xc, yc)
    }

    pub fn floor_bound(&self) -> f64 {
        1.0 / (self.window * self.window) as f64
    }
}

/// Binary edge map with the source image dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    pub width: usize,
    pub height: usize,
    pub bits: Vec<bool>,
}

impl EdgeMap {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, bits: vec![false; width * height] }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn edge_count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Edge maps travel as PGM with 0 = edge, 255 = non-edge.
    pub fn to_image(&self) -> GrayImage {
        GrayImage::from_fn(self.width, self.height, |x, y| if self.get(x, y) { 0.0 } else { 255.0 })
    }

    pub fn from_image(img: &GrayImage) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            bits: img.pixels().iter().map(|&p| p < 128.0).collect(),
        }
    }
}

/// Source of the STVR used for noise compensation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StvrSource {
    /// Estimate the global noise floor blindly (horizontal ACS
    /// extrapolation) and compensate each window with its local STVR.
    Auto,
    /// Compensate every pixel with one explicit global STVR.
    Explicit(f64),
}

/// Detector parameters; the band bounds follow the mid-entropy argument and
/// `alpha_high` limits how weak an admissible edge may be.
#[derive(Debug, Clone, Copy)]
pub struct EdgeParams {
    pub alpha_low: f64,
    pub alpha_high: f64,
    pub esi_window: usize,
    pub nms_window: usize,
    pub stvr_source: StvrSource,
}

impl Default for EdgeParams {
    fn default() -> Self {
        Self {
            alpha_low: 0.5,
            alpha_high: 0.90,
            esi_window: 3,
            nms_window: 5,
            stvr_source: StvrSource::Auto,
        }
    }
}

impl EdgeParams {
    fn validate(&self) -> Result<(), EdgeError> {
        if !(0.5 <= self.alpha_low && self.alpha_low < self.alpha_high && self.alpha_high <= 1.0) {
            return Err(EdgeError::BadBand { low: self.alpha_low, high: self.alpha_high });
        }
        check_window(self.esi_window)?;
        check_window(self.nms_window)
    }
}

fn check_window(window: usize) -> Result<(), EdgeError> {
    if window < 3 || window % 2 == 0 {
        return Err(EdgeError::BadWindow(window));
    }
    Ok(())
}

/// Edge strength index `alpha = (sum x)^2 / (N * sum x^2)` of the window
/// centered on each pixel, borders replicated. An all-zero window counts as
/// homogeneous (`alpha = 1`).
pub fn esi_map(img: &GrayImage, window: usize) -> Result<ESIMap, EdgeError> {
    check_window(window)?;
    let half = (window / 2) as isize;
    let n = (window * window) as f64;
    let floor = 1.0 / n;
    let mut values = Vec::with_capacity(img.width() * img.height());
    for y in 0..img.height() as isize {
        for x in 0..img.width() as isize {
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for dy in -half..=half {
                for dx in -half..=half {
                    let v = img.get_clamped(x + dx, y + dy);
                    sum += v;
                    sum_sq += v * v;
                }
            }
            let alpha = if sum_sq == 0.0 { 1.0 } else { (sum * sum / (n * sum_sq)).clamp(floor, 1.0) };
            values.push(alpha);
        }
    }
    Ok(ESIMap { width: img.width(), height: img.height(), window, values })
}

fn compensate_alpha(alpha_g: f64, stvr: f64, floor: f64) -> f64 {
    let inv_sq = stvr * (1.0 / (alpha_g * alpha_g) - 1.0) + 1.0;
    (1.0 / inv_sq.sqrt()).clamp(floor, 1.0)
}

/// Removes the noise-induced depression of the index with one global STVR:
/// `alpha_s^-2 = STVR * (alpha_g^-2 - 1) + 1`.
pub fn compensate_esi(esi_g: &ESIMap, stvr: f64) -> Result<ESIMap, EdgeError> {
    if !(0.0..=1.0).contains(&stvr) {
        return Err(EdgeError::BadStvr(stvr));
    }
    let floor = esi_g.floor_bound();
    Ok(ESIMap {
        width: esi_g.width,
        height: esi_g.height,
        window: esi_g.window,
        values: esi_g.values.iter().map(|&a| compensate_alpha(a, stvr, floor)).collect(),
    })
}

/// Window-local compensation: the noise floor `sigma_n2` is global while the
/// observed variance is measured per window, so flat regions are pushed back
/// to homogeneity and structured windows keep their strength.
pub fn compensate_esi_local(esi_g: &ESIMap, img: &GrayImage, sigma_n2: f64) -> ESIMap {
    let half = (esi_g.window / 2) as isize;
    let n = (esi_g.window * esi_g.window) as f64;
    let floor = esi_g.floor_bound();
    let mut values = Vec::with_capacity(esi_g.values.len());
    for y in 0..esi_g.height as isize {
        for x in 0..esi_g.width as isize {
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for dy in -half..=half {
                for dx in -half..=half {
                    let v = img.get_clamped(x + dx, y + dy);
                    sum += v;
                    sum_sq += v * v;
                }
            }
            let mean = sum / n;
            let var = (sum_sq / n - mean * mean).max(0.0);
            let stvr = if var > sigma_n2 { (var - sigma_n2) / var } else { 0.0 };
            let alpha = esi_g.get(x as usize, y as usize);
            values.push(compensate_alpha(alpha, stvr, floor));
        }
    }
    ESIMap { width: esi_g.width, height: esi_g.height, window: esi_g.window, values }
}

/// The four discrete orientations: offsets stepping along each line.
const DIRECTIONS: [(isize, isize); 4] = [(1, 0), (1, 1), (0, 1), (1, -1)];

/// Samples of the line through `(x, y)` with step `(dx, dy)` inside the
/// window, border-replicated and deduplicated by coordinate.
fn line_coords(
    esi: &ESIMap,
    x: isize,
    y: isize,
    step: (isize, isize),
    half: isize,
) -> Vec<(usize, usize)> {
    let mut coords: Vec<(usize, usize)> = Vec::with_capacity((2 * half + 1) as usize);
    for k in -half..=half {
        let cx = (x + k * step.0).clamp(0, esi.width as isize - 1) as usize;
        let cy = (y + k * step.1).clamp(0, esi.height as isize - 1) as usize;
        if !coords.contains(&(cx, cy)) {
            coords.push((cx, cy));
        }
    }
    coords
}

fn direction_of_lowest_variance(esi: &ESIMap, x: isize, y: isize, half: isize) -> usize {
    let mut best = 0;
    let mut best_var = f64::INFINITY;
    for (d, step) in DIRECTIONS.iter().enumerate() {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut n = 0.0;
        for k in -half..=half {
            let v = esi.get_clamped(x + k * step.0, y + k * step.1);
            sum += v;
            sum_sq += v * v;
            n += 1.0;
        }
        let mean = sum / n;
        let var = sum_sq / n - mean * mean;
        if var < best_var - 1e-15 {
            best_var = var;
            best = d;
        }
    }
    best
}

fn perpendicular(direction: usize) -> (isize, isize) {
    match DIRECTIONS[direction] {
        (1, 0) => (0, 1),
        (1, 1) => (1, -1),
        (0, 1) => (1, 0),
        _ => (1, 1),
    }
}

/// Is `(x, y)` the first (row-major) minimum of `esi` over `coords`,
/// restricted to coordinates where `eligible` holds?
fn is_first_minimum(
    esi: &ESIMap,
    coords: &[(usize, usize)],
    x: usize,
    y: usize,
    eligible: impl Fn(usize, usize) -> bool,
) -> bool {
    let mut min = f64::INFINITY;
    for &(cx, cy) in coords {
        if eligible(cx, cy) {
            min = min.min(esi.get(cx, cy));
        }
    }
    let own = esi.get(x, y);
    if own > min {
        return false;
    }
    // Ties keep the first pixel in scan order.
    let mut winner = None;
    for &(cx, cy) in coords {
        if eligible(cx, cy) && esi.get(cx, cy) <= min {
            let key = (cy, cx);
            if winner.map_or(true, |w| key < w) {
                winner = Some(key);
            }
        }
    }
    winner == Some((y, x))
}

/// Non-minimum suppression: each pixel finds the orientation of lowest index
/// variance (the edge runs along it) and survives only as the minimum of the
/// line crossing that orientation; suppressed pixels are set to 1.
pub fn nms_min(esi: &ESIMap, window: usize) -> Result<ESIMap, EdgeError> {
    check_window(window)?;
    let half = (window / 2) as isize;
    let mut values = vec![1.0; esi.values.len()];
    for y in 0..esi.height {
        for x in 0..esi.width {
            let d = direction_of_lowest_variance(esi, x as isize, y as isize, half);
            let coords = line_coords(esi, x as isize, y as isize, perpendicular(d), half);
            if is_first_minimum(esi, &coords, x, y, |_, _| true) {
                values[y * esi.width + x] = esi.get(x, y);
            }
        }
    }
    Ok(ESIMap { width: esi.width, height: esi.height, window: esi.window, values })
}

/// Band threshold: edge iff `alpha_low <= alpha <= alpha_high`.
pub fn threshold_edges(esi: &ESIMap, params: &EdgeParams) -> Result<EdgeMap, EdgeError> {
    params.validate()?;
    Ok(EdgeMap {
        width: esi.width,
        height: esi.height,
        bits: esi
            .values
            .iter()
            .map(|&a| a >= params.alpha_low && a <= params.alpha_high)
            .collect(),
    })
}

/// Full detection result: the binary map plus the compensated index it was
/// thresholded from (corner detection reads strengths at edge pixels).
#[derive(Debug, Clone)]
pub struct EdgeDetection {
    pub edges: EdgeMap,
    pub esi: ESIMap,
}

/// The whole detector: minimum-anchored intensities, 3x3 ESI, blind STVR
/// compensation, candidate-restricted NMS across the edge direction, band
/// threshold.
pub fn detect_edges(img: &GrayImage, params: &EdgeParams) -> Result<EdgeMap, EdgeError> {
    Ok(detect_edges_full(img, params)?.edges)
}

pub fn detect_edges_full(img: &GrayImage, params: &EdgeParams) -> Result<EdgeDetection, EdgeError> {
    params.validate()?;
    // The index is scale-invariant but not shift-invariant; anchoring at the
    // image minimum makes a unit step at 254/255 score like one at 0/1.
    let min = img.min_pixel();
    let shifted = if min != 0.0 { img.map(|p| p - min) } else { img.clone() };

    let raw = esi_map(&shifted, params.esi_window)?;
    let compensated = match params.stvr_source {
        StvrSource::Explicit(stvr) => compensate_esi(&raw, stvr)?,
        StvrSource::Auto => {
            let sigma_n2 = acs_variance(&shifted, &EstimatorConfig::default())
                .map(|est| est.sigma_n2)
                .unwrap_or(0.0);
            compensate_esi_local(&raw, &shifted, sigma_n2)
        }
    };

    // Candidate-restricted suppression: only in-band pixels compete, and the
    // minimum along the line crossing the edge direction survives.
    let half = (params.nms_window / 2) as isize;
    let in_band =
        |a: f64| a >= params.alpha_low && a <= params.alpha_high;
    let mut edges = EdgeMap::new(compensated.width, compensated.height);
    for y in 0..compensated.height {
        for x in 0..compensated.width {
            if !in_band(compensated.get(x, y)) {
                continue;
            }
            let d = direction_of_lowest_variance(&compensated, x as isize, y as isize, half);
            let coords = line_coords(&compensated, x as isize, y as isize, perpendicular(d), half);
            if is_first_minimum(&compensated, &coords, x, y, |cx, cy| in_band(compensated.get(cx, cy)))
            {
                edges.set(x, y, true);
            }
        }
    }
    Ok(EdgeDetection { edges, esi: compensated })
}

/// Index of a Gaussian-statistics region from its entropy (nats) and mean:
/// `alpha = mu^2 / (mu^2 + e^(2H-1) / (2 pi))`.
pub fn esi_from_entropy(entropy_nats: f64, mu: f64) -> f64 {
    let mu_sq = mu * mu;
    mu_sq / (mu_sq + (2.0 * entropy_nats - 1.0).exp() / (2.0 * std::f64::consts::PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagecore::synth::{synth_step_edge, StepBoundary};
    use crate::imagecore::{add_noise, NoiseSpec};

    #[test]
    fn esi_constant_image_is_unity() {
        let img = GrayImage::from_fn(8, 8, |_, _| 64.0);
        let map = esi_map(&img, 3).unwrap();
        for v in &map.values {
            assert_eq!(*v, 1.0);
        }
    }

    #[test]
    fn esi_single_nonzero_attains_floor() {
        let mut img = GrayImage::new(9, 9);
        img.set(4, 4, 200.0);
        let map = esi_map(&img, 3).unwrap();
        assert!((map.get(4, 4) - 1.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn esi_hand_value_two_thirds() {
        // Window [0,0,0,255,255,255,255,255,255]: alpha = 2/3, F^2 = 1.5.
        let img = synth_step_edge(9, 9, 0.0, 255.0, StepBoundary::Vertical(4));
        let map = esi_map(&img, 3).unwrap();
        let alpha = map.get(4, 4);
        assert!((alpha - 2.0 / 3.0).abs() < 1e-12);
        assert!((1.0 / alpha - 1.5).abs() < 1e-12);
    }

    #[test]
    fn esi_range_and_scale_invariance() {
        let (img, _) = crate::imagecore::synth::synth_eye(40, 20, (20.0, 10.0), 4.0, 9.0, 0.25);
        let map = esi_map(&img, 3).unwrap();
        let floor = map.floor_bound();
        for v in &map.values {
            assert!(*v >= floor - 1e-12 && *v <= 1.0 + 1e-12);
        }
        for c in [0.5, 2.0, 17.0] {
            let scaled = img.map(|p| p * c);
            let m2 = esi_map(&scaled, 3).unwrap();
            for (a, b) in map.values.iter().zip(m2.values.iter()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn compensate_endpoints_and_hand_value() {
        let esi = ESIMap { width: 1, height: 1, window: 3, values: vec![0.5] };
        let id = compensate_esi(&esi, 1.0).unwrap();
        assert!((id.values[0] - 0.5).abs() < 1e-12);
        // alpha_g = 0.5, STVR = 0.5 -> alpha_s = 1/sqrt(2.5)
        let half = compensate_esi(&esi, 0.5).unwrap();
        assert!((half.values[0] - 1.0 / 2.5f64.sqrt()).abs() < 1e-12);
        let one = ESIMap { width: 1, height: 1, window: 3, values: vec![1.0] };
        for stvr in [0.0, 0.3, 1.0] {
            assert_eq!(compensate_esi(&one, stvr).unwrap().values[0], 1.0);
        }
    }

    #[test]
    fn compensation_is_dual_to_ff_recovery() {
        // The index compensation and the form-factor recovery are two
        // algebraic routes of one relation: compensating alpha equals
        // recovering 1/alpha as a form factor and inverting back. At the
        // moment level this inverts the additive-noise term exactly.
        use crate::formfactor::{recover_ff_stvr, NoiseRatio};
        for (alpha_g, stvr) in [(0.5, 0.5), (0.8, 0.3), (0.95, 0.9), (0.34, 0.12), (1.0, 0.7)] {
            let esi = ESIMap { width: 1, height: 1, window: 3, values: vec![alpha_g] };
            let compensated = compensate_esi(&esi, stvr).unwrap().values[0];
            let ratio = NoiseRatio::stvr(stvr).unwrap();
            let recovered = recover_ff_stvr(1.0 / alpha_g, &ratio).unwrap().value;
            assert!(
                (compensated - 1.0 / recovered).abs() < 1e-12,
                "alpha_g={alpha_g} stvr={stvr}: {compensated} vs {}",
                1.0 / recovered
            );
        }
    }

    #[test]
    fn nms_keeps_single_pixel_ridge() {
        // One-column low ridge in a uniform field.
        let mut esi = ESIMap { width: 9, height: 9, window: 3, values: vec![1.0; 81] };
        for y in 0..9 {
            esi.values[y * 9 + 4] = 0.4;
        }
        let out = nms_min(&esi, 5).unwrap();
        for y in 0..9 {
            assert_eq!(out.get(4, y), 0.4, "ridge row {y}");
        }
    }

    #[test]
    fn nms_monotone_band_keeps_per_row_minimum() {
        // Three-column band, monotone across: 0.3 | 0.4 | 0.5.
        let mut esi = ESIMap { width: 11, height: 7, window: 3, values: vec![1.0; 77] };
        for y in 0..7 {
            esi.values[y * 11 + 4] = 0.3;
            esi.values[y * 11 + 5] = 0.4;
            esi.values[y * 11 + 6] = 0.5;
        }
        let out = nms_min(&esi, 5).unwrap();
        for y in 0..7 {
            assert_eq!(out.get(4, y), 0.3, "minimum survives at row {y}");
            assert_eq!(out.get(5, y), 1.0, "mid column suppressed");
            assert_eq!(out.get(6, y), 1.0, "high column suppressed");
        }
    }

    #[test]
    fn nms_constant_map_suppresses_interior() {
        let esi = ESIMap { width: 9, height: 9, window: 3, values: vec![0.7; 81] };
        let out = nms_min(&esi, 5).unwrap();
        // Interior pixels all tie and lose to the first coordinate on their
        // suppression line; only border ties survive.
        for y in 2..7 {
            for x in 2..7 {
                assert_eq!(out.get(x, y), 1.0, "interior ({x},{y})");
            }
        }
        assert!(out.values.iter().any(|&v| v != 1.0), "tie rule keeps some border pixels");
    }

    #[test]
    fn threshold_band() {
        let esi = ESIMap { width: 3, height: 1, window: 3, values: vec![1.0, 0.7, 0.95] };
        let params = EdgeParams::default();
        let map = threshold_edges(&esi, &params).unwrap();
        assert!(!map.get(0, 0), "homogeneous is not an edge");
        assert!(map.get(1, 0), "0.7 inside band");
        assert!(!map.get(2, 0), "0.95 above alpha_high");
    }

    #[test]
    fn bad_params_rejected() {
        let esi = ESIMap { width: 1, height: 1, window: 3, values: vec![1.0] };
        let bad = EdgeParams { alpha_low: 0.4, ..EdgeParams::default() };
        assert!(threshold_edges(&esi, &bad).is_err());
        let bad2 = EdgeParams { alpha_high: 1.1, ..EdgeParams::default() };
        assert!(threshold_edges(&esi, &bad2).is_err());
        assert!(nms_min(&esi, 4).is_err());
    }

    fn single_response_per_row(map: &EdgeMap, rows: std::ops::Range<usize>) {
        for y in rows {
            let count = (0..map.width).filter(|&x| map.get(x, y)).count();
            assert_eq!(count, 1, "row {y} has {count} edge pixels");
        }
    }

    #[test]
    fn detects_contrast_one_step_at_low_intensity() {
        let img = synth_step_edge(24, 16, 0.0, 1.0, StepBoundary::Vertical(12));
        let map = detect_edges(&img, &EdgeParams::default()).unwrap();
        assert!(map.edge_count() > 0, "edge detected");
        single_response_per_row(&map, 0..16);
        // The response sits on the bright side of the boundary.
        for y in 0..16 {
            assert!(map.get(12, y));
        }
    }

    #[test]
    fn detects_contrast_one_step_at_high_intensity() {
        let img = synth_step_edge(24, 16, 254.0, 255.0, StepBoundary::Vertical(12));
        let map = detect_edges(&img, &EdgeParams::default()).unwrap();
        assert!(map.edge_count() > 0);
        single_response_per_row(&map, 0..16);
        for y in 0..16 {
            assert!(map.get(12, y));
        }
    }

    #[test]
    fn uniform_image_has_empty_edge_map() {
        let img = GrayImage::from_fn(16, 16, |_, _| 200.0);
        let map = detect_edges(&img, &EdgeParams::default()).unwrap();
        assert_eq!(map.edge_count(), 0);
    }

    #[test]
    fn horizontal_step_single_response_per_column() {
        let img = synth_step_edge(16, 24, 10.0, 210.0, StepBoundary::Horizontal(12));
        let map = detect_edges(&img, &EdgeParams::default()).unwrap();
        for x in 0..16 {
            let count = (0..24).filter(|&y| map.get(x, y)).count();
            assert_eq!(count, 1, "column {x} has {count} edge pixels");
        }
    }

    #[test]
    fn compensation_reduces_alpha_error_under_noise() {
        // Noisy step edges at 10-20 dB: mean |alpha - clean alpha| after
        // local compensation is below the uncompensated error.
        let clean = synth_step_edge(32, 32, 40.0, 200.0, StepBoundary::Vertical(16));
        let clean_esi = esi_map(&clean, 3).unwrap();
        let sigma_s2 = clean.variance();
        for (db, seed) in [(10.0f64, 4u64), (15.0, 5), (20.0, 6)] {
            let var_n = sigma_s2 / 10f64.powf(db / 10.0);
            let noisy = add_noise(&clean, &NoiseSpec::new(var_n, seed));
            let raw = esi_map(&noisy, 3).unwrap();
            let comp = compensate_esi_local(&raw, &noisy, var_n);
            let err = |m: &ESIMap| -> f64 {
                m.values
                    .iter()
                    .zip(clean_esi.values.iter())
                    .map(|(a, b)| (a - b).abs())
                    .sum::<f64>()
                    / m.values.len() as f64
            };
            assert!(
                err(&comp) < err(&raw),
                "{db} dB: compensated {} vs raw {}",
                err(&comp),
                err(&raw)
            );
        }
    }

    #[test]
    fn entropy_relation() {
        // Gaussian region with sigma^2 = mu^2 has H = 0.5 ln(2 pi e sigma^2)
        // and lands exactly at alpha = 1/2.
        let mu = 37.0f64;
        let h = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * mu * mu).ln();
        assert!((esi_from_entropy(h, mu) - 0.5).abs() < 1e-12);
        // Monotone decreasing in H, approaching 1 as H -> -inf.
        assert!(esi_from_entropy(-40.0, mu) > 0.999_999);
        let a = esi_from_entropy(1.0, mu);
        let b = esi_from_entropy(2.0, mu);
        assert!(b < a);
    }
}
