//! Pupil localization and the corner-relative angular position that feeds
//! the saccade tracker.
//!
//! The pupil center is the form-factor-weighted center of mass of the
//! near-peak directional profiles of the gamma-corrected eye image; the
//! diameter comes from the radial profile of the polar-resampled eye, and
//! the eye corners are the edge pixels of the almond outline whose edge
//! strength sits nearest 0.5.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::edges::{detect_edges_full, EdgeError, EdgeParams};
use crate::formfactor::{horizontal_ff, radial_ff, vertical_ff};
use crate::imagecore::{gamma_correct, to_polar, GrayImage, ImageError};

#[derive(Debug, Error)]
pub enum OcularError {
    #[error("no pupil evidence: directional profiles are flat")]
    NoPupilEvidence,
    #[error("flat radial profile: no pupil boundary found")]
    FlatRadialProfile,
    #[error("corner not found in the {0} region")]
    CornerNotFound(&'static str),
    #[error("detected corners are not ordered left-to-right")]
    CornersUnordered,
    #[error("eye corners coincide")]
    CoincidentCorners,
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Edge(#[from] EdgeError),
}

/// Sub-pixel pupil center in eye-image coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PupilLocation {
    pub x: f64,
    pub y: f64,
}

impl PupilLocation {
    pub fn distance_to(&self, other: &PupilLocation) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// Left and right eye-corner pixels, ordered by x.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EyeCorners {
    pub left: (f64, f64),
    pub right: (f64, f64),
}

impl EyeCorners {
    pub fn new(left: (f64, f64), right: (f64, f64)) -> Result<Self, OcularError> {
        if left.0 >= right.0 {
            return Err(OcularError::CornersUnordered);
        }
        Ok(Self { left, right })
    }

    pub fn midpoint(&self) -> (f64, f64) {
        ((self.left.0 + self.right.0) / 2.0, (self.left.1 + self.right.1) / 2.0)
    }

    pub fn half_span(&self) -> f64 {
        let dx = self.right.0 - self.left.0;
        let dy = self.right.1 - self.left.1;
        (dx * dx + dy * dy).sqrt() / 2.0
    }
}

/// Pupil center plus diameter in pixels.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PupilGeometry {
    pub center: PupilLocation,
    pub diameter: f64,
}

/// Detection parameters. Gamma defaults to the gray-scale setting (2.5);
/// use 1.5 for NIR imagery.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OcularParams {
    pub gamma: f64,
    /// Search zone half-width around a profile peak, fraction of the axis.
    pub zone_halfwidth_frac: f64,
    /// Keep profile values within this fraction of the peak.
    pub peak_tolerance_frac: f64,
    /// Corner search region at each horizontal end, fraction of the width.
    pub corner_roi_frac: f64,
    /// Angle spanned from the corner midpoint to either corner, degrees.
    pub half_view_angle: f64,
    /// Radial search band for the diameter, fractions of the smaller image
    /// side; tighten the upper bound when lids or lashes encroach.
    pub radial_zone_frac: (f64, f64),
}

impl Default for OcularParams {
    fn default() -> Self {
        Self {
            gamma: 2.5,
            zone_halfwidth_frac: 0.20,
            peak_tolerance_frac: 0.01,
            corner_roi_frac: 0.02,
            half_view_angle: 60.0,
            radial_zone_frac: (0.05, 0.5),
        }
    }
}

/// Weighted center of mass of the profile values near the peak.
///
/// Restricts to a zone of `+-zone_frac * len` around the argmax, keeps
/// values within `tol` of the peak, and returns the FF-weighted centroid.
fn com_near_peak(values: &[f64], zone_frac: f64, tol: f64) -> Result<f64, OcularError> {
    let mut peak_idx = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[peak_idx] {
            peak_idx = i;
        }
    }
    let peak = values[peak_idx];
    if peak <= 1.0 + 1e-9 {
        return Err(OcularError::NoPupilEvidence);
    }
    let halfwidth = (zone_frac * values.len() as f64).round() as usize;
    let lo = peak_idx.saturating_sub(halfwidth);
    let hi = (peak_idx + halfwidth).min(values.len() - 1);
    let keep = (1.0 - tol) * peak;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &v) in values.iter().enumerate().take(hi + 1).skip(lo) {
        if v >= keep {
            num += v * i as f64;
            den += v;
        }
    }
    Ok(num / den)
}

fn peak_index(values: &[f64]) -> Result<usize, OcularError> {
    let mut peak_idx = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[peak_idx] {
            peak_idx = i;
        }
    }
    if values[peak_idx] <= 1.0 + 1e-9 {
        return Err(OcularError::NoPupilEvidence);
    }
    Ok(peak_idx)
}

/// Pupil center as the center of mass of the near-peak directional form
/// factors of the gamma-corrected image.
pub fn pupil_center(eye: &GrayImage, params: &OcularParams) -> Result<PupilLocation, OcularError> {
    let corrected = gamma_correct(eye, params.gamma)?;
    let h = horizontal_ff(&corrected);
    let v = vertical_ff(&corrected);
    let x = com_near_peak(&h.values, params.zone_halfwidth_frac, params.peak_tolerance_frac)?;
    let y = com_near_peak(&v.values, params.zone_halfwidth_frac, params.peak_tolerance_frac)?;
    Ok(PupilLocation { x, y })
}

/// Baseline variant: the raw profile argmax without center-of-mass
/// refinement.
pub fn pupil_center_peak(
    eye: &GrayImage,
    params: &OcularParams,
) -> Result<PupilLocation, OcularError> {
    let corrected = gamma_correct(eye, params.gamma)?;
    let h = horizontal_ff(&corrected);
    let v = vertical_ff(&corrected);
    Ok(PupilLocation {
        x: peak_index(&h.values)? as f64,
        y: peak_index(&v.values)? as f64,
    })
}

/// Pupil diameter from the radial form factor about a known center: the
/// boundary ring carries the profile peak within the anatomical radial
/// band, and the center of mass of the near-peak rings gives the radius.
pub fn pupil_diameter(
    eye: &GrayImage,
    center: &PupilLocation,
    params: &OcularParams,
) -> Result<PupilGeometry, OcularError> {
    let min_side = eye.width().min(eye.height()) as f64;
    let radii = (params.radial_zone_frac.1 * min_side).floor().max(2.0) as usize;
    let polar = to_polar(eye, (center.x, center.y), radii, 360)?;
    let profile = radial_ff(&polar);

    let r_min =
        (((params.radial_zone_frac.0 * min_side).floor() as usize).max(1)).min(profile.values.len() - 1);
    let zone = &profile.values[r_min..];
    let mut peak_idx = 0;
    for (i, &v) in zone.iter().enumerate() {
        if v > zone[peak_idx] {
            peak_idx = i;
        }
    }
    if zone[peak_idx] <= 1.0 + 1e-9 {
        return Err(OcularError::FlatRadialProfile);
    }
    let peak_idx = peak_idx + r_min;
    let halfwidth = (params.zone_halfwidth_frac * profile.values.len() as f64).round() as usize;
    let lo = peak_idx.saturating_sub(halfwidth).max(r_min);
    let hi = (peak_idx + halfwidth).min(profile.values.len() - 1);
    let keep = (1.0 - params.peak_tolerance_frac) * profile.values[peak_idx];
    let mut num = 0.0;
    let mut den = 0.0;
    for r in lo..=hi {
        let v = profile.values[r];
        if v >= keep {
            num += v * r as f64;
            den += v;
        }
    }
    let radius = num / den;
    let diameter = (2.0 * radius).clamp(f64::MIN_POSITIVE, min_side);
    Ok(PupilGeometry { center: *center, diameter })
}

/// Finds the eye corners: edge pixels inside each horizontal end region
/// whose compensated edge strength lies nearest 0.5.
pub fn eye_corners(eye: &GrayImage, params: &OcularParams) -> Result<EyeCorners, OcularError> {
    let detection = detect_edges_full(eye, &EdgeParams::default())?;
    let edges = &detection.edges;
    let esi = &detection.esi;
    let w = eye.width();
    let roi_w = ((params.corner_roi_frac * w as f64).ceil() as usize).max(1);

    let pick = |x_range: std::ops::Range<usize>, side: &'static str| -> Result<(f64, f64), OcularError> {
        let mut best: Option<(f64, (usize, usize))> = None;
        let mut best_in_band: Option<(f64, (usize, usize))> = None;
        for y in 0..eye.height() {
            for x in x_range.clone() {
                if !edges.get(x, y) {
                    continue;
                }
                let dist = (esi.get(x, y) - 0.5).abs();
                if best.as_ref().is_none_or(|(d, _)| dist < *d) {
                    best = Some((dist, (x, y)));
                }
                // Corner candidates proper sit within 0.1 of the mid index.
                if dist <= 0.1 && best_in_band.as_ref().is_none_or(|(d, _)| dist < *d) {
                    best_in_band = Some((dist, (x, y)));
                }
            }
        }
        let chosen = best_in_band.or(best).ok_or(OcularError::CornerNotFound(side))?;
        Ok((chosen.1 .0 as f64, chosen.1 .1 as f64))
    };

    let left = pick(0..roi_w.min(w), "left")?;
    let right = pick(w.saturating_sub(roi_w)..w, "right")?;
    EyeCorners::new(left, right)
}

/// Signed corner-relative position of the pupil center.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RelativePosition {
    /// Euclidean distance from the corner midpoint, signed by the side of
    /// the midpoint along the corner-to-corner axis.
    pub distance: f64,
    /// The distance mapped linearly onto the view angle, degrees.
    pub angle_deg: f64,
}

/// Distance of the pupil center from the corners' midpoint, signed along the
/// corner axis and scaled so a center at a corner reads the full half view
/// angle.
pub fn relative_position(
    center: &PupilLocation,
    corners: &EyeCorners,
    half_view_angle: f64,
) -> Result<RelativePosition, OcularError> {
    let half_span = corners.half_span();
    if half_span == 0.0 {
        return Err(OcularError::CoincidentCorners);
    }
    let (mx, my) = corners.midpoint();
    let dx = center.x - mx;
    let dy = center.y - my;
    let distance = (dx * dx + dy * dy).sqrt();
    let axis = (corners.right.0 - corners.left.0, corners.right.1 - corners.left.1);
    let projection = dx * axis.0 + dy * axis.1;
    let signed = if projection < 0.0 { -distance } else { distance };
    Ok(RelativePosition { distance: signed, angle_deg: signed / half_span * half_view_angle })
}

/// Hit test against an error circle of radius `r_e` (closed disc).
pub fn hit_test(found: &PupilLocation, truth: &PupilLocation, r_e: f64) -> bool {
    found.distance_to(truth) <= r_e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagecore::synth::synth_eye;
    use crate::imagecore::{add_noise, NoiseSpec};

    #[test]
    fn clean_eye_center_within_one_pixel() {
        let (img, truth) = synth_eye(50, 25, (25.0, 12.0), 5.0, 10.0, 0.0);
        let found = pupil_center(&img, &OcularParams::default()).unwrap();
        assert!((found.x - truth.pupil_center.0).abs() <= 1.0, "x {}", found.x);
        assert!((found.y - truth.pupil_center.1).abs() <= 1.0, "y {}", found.y);
    }

    #[test]
    fn symmetric_eye_centers_exactly() {
        // Odd width so the pupil column is the exact symmetry axis.
        let (img, _) = synth_eye(51, 25, (25.0, 12.0), 5.0, 10.0, 0.0);
        let found = pupil_center(&img, &OcularParams::default()).unwrap();
        assert!((found.x - 25.0).abs() < 1e-9, "x {}", found.x);
    }

    #[test]
    fn partially_occluded_center_within_two_pixels() {
        let (img, truth) = synth_eye(50, 25, (25.0, 12.0), 5.0, 10.0, 0.4);
        let found = pupil_center(&img, &OcularParams::default()).unwrap();
        assert!((found.x - truth.pupil_center.0).abs() <= 2.0);
    }

    #[test]
    fn constant_image_is_an_error() {
        let img = GrayImage::from_fn(30, 20, |_, _| 120.0);
        assert!(matches!(
            pupil_center(&img, &OcularParams::default()),
            Err(OcularError::NoPupilEvidence)
        ));
        assert!(pupil_center_peak(&img, &OcularParams::default()).is_err());
    }

    #[test]
    fn peak_variant_close_on_clean_eye() {
        let (img, truth) = synth_eye(50, 25, (24.0, 13.0), 5.0, 10.0, 0.0);
        let found = pupil_center_peak(&img, &OcularParams::default()).unwrap();
        assert!((found.x - truth.pupil_center.0).abs() <= 2.0);
        assert!((found.y - truth.pupil_center.1).abs() <= 2.0);
    }

    #[test]
    fn com_beats_peak_under_specular_blob() {
        // A bright specular spot inside the pupil shifts the raw peak; the
        // center-of-mass refinement is expected to be at least as accurate
        // on average (paired comparison).
        let params = OcularParams::default();
        let mut com_total = 0.0;
        let mut peak_total = 0.0;
        for seed in 0..12u64 {
            let cx = 22.0 + (seed % 5) as f64;
            let (mut img, truth) = synth_eye(50, 25, (cx, 12.0), 5.0, 10.0, 0.0);
            // Specular blob: a 2x2 bright patch offset inside the pupil.
            let bx = truth.pupil_center.0 as usize - 2 + (seed % 3) as usize;
            let by = truth.pupil_center.1 as usize - 1;
            for dy in 0..2 {
                for dx in 0..2 {
                    img.set(bx + dx, by + dy, 255.0);
                }
            }
            let truth_loc = PupilLocation { x: truth.pupil_center.0, y: truth.pupil_center.1 };
            let com = pupil_center(&img, &params).unwrap();
            let peak = pupil_center_peak(&img, &params).unwrap();
            com_total += com.distance_to(&truth_loc);
            peak_total += peak.distance_to(&truth_loc);
        }
        assert!(com_total <= peak_total, "COM {com_total} vs peak {peak_total}");
    }

    #[test]
    fn intensity_scale_leaves_center_unchanged() {
        let (img, _) = synth_eye(50, 25, (27.0, 11.0), 5.0, 10.0, 0.1);
        let params = OcularParams::default();
        let a = pupil_center(&img, &params).unwrap();
        let b = pupil_center(&img.map(|p| p * 2.0), &params).unwrap();
        assert!((a.x - b.x).abs() < 1e-9 && (a.y - b.y).abs() < 1e-9);
    }

    #[test]
    fn translation_equivariance_within_half_pixel() {
        // Translate the whole raster (skin-padded); the pupil must stay far
        // enough from the borders that the search zone never clips.
        let (img0, _) = synth_eye(56, 28, (26.0, 13.0), 4.0, 8.0, 0.0);
        let params = OcularParams::default();
        let c0 = pupil_center(&img0, &params).unwrap();
        for (dx, dy) in [(2i32, 1i32), (4, 2), (5, -2)] {
            let img = GrayImage::from_fn(56, 28, |x, y| {
                img0.get_clamped(x as isize - dx as isize, y as isize - dy as isize)
            });
            let c = pupil_center(&img, &params).unwrap();
            assert!(
                ((c.x - c0.x) - f64::from(dx)).abs() <= 0.5
                    && ((c.y - c0.y) - f64::from(dy)).abs() <= 0.5,
                "shift ({dx},{dy}) recovered ({}, {})",
                c.x - c0.x,
                c.y - c0.y
            );
        }
    }

    /// Radial band tightened to the synthetic anatomy: the lash outline
    /// sits just inside half the image height and must stay out of the
    /// search zone.
    fn diameter_params() -> OcularParams {
        OcularParams { radial_zone_frac: (0.05, 0.36), ..OcularParams::default() }
    }

    #[test]
    fn diameter_within_ten_percent_clean() {
        let (img, truth) = synth_eye(64, 32, (32.0, 16.0), 6.0, 13.0, 0.0);
        let center = PupilLocation { x: truth.pupil_center.0, y: truth.pupil_center.1 };
        let geom = pupil_diameter(&img, &center, &diameter_params()).unwrap();
        assert!(
            (geom.diameter - 12.0).abs() <= 1.2,
            "diameter {} vs 12 +- 10%",
            geom.diameter
        );
    }

    #[test]
    fn tiny_pupil_hits_quantization_floor() {
        let (img, truth) = synth_eye(40, 24, (20.0, 12.0), 1.0, 9.0, 0.0);
        let center = PupilLocation { x: truth.pupil_center.0, y: truth.pupil_center.1 };
        let geom = pupil_diameter(&img, &center, &diameter_params()).unwrap();
        assert!(geom.diameter >= 2.0 && geom.diameter <= 4.0, "diameter {}", geom.diameter);
    }

    #[test]
    fn diameter_invariant_to_intensity_scale() {
        let (img, truth) = synth_eye(64, 32, (32.0, 16.0), 6.0, 13.0, 0.0);
        let center = PupilLocation { x: truth.pupil_center.0, y: truth.pupil_center.1 };
        let params = diameter_params();
        let a = pupil_diameter(&img, &center, &params).unwrap();
        let b = pupil_diameter(&img.map(|p| p * 2.0), &center, &params).unwrap();
        assert!((a.diameter - b.diameter).abs() < 1e-9);
    }

    #[test]
    fn flat_polar_profile_is_error() {
        let img = GrayImage::from_fn(40, 24, |_, _| 99.0);
        let center = PupilLocation { x: 20.0, y: 12.0 };
        assert!(matches!(
            pupil_diameter(&img, &center, &OcularParams::default()),
            Err(OcularError::FlatRadialProfile)
        ));
    }

    fn corner_params() -> OcularParams {
        // Wider corner search than the on-vehicle default: the synthetic
        // almond tips sit one pixel inside the frame.
        OcularParams { corner_roi_frac: 0.08, ..OcularParams::default() }
    }

    #[test]
    fn corners_found_near_truth() {
        let (img, truth) = synth_eye(64, 32, (32.0, 16.0), 5.0, 11.0, 0.0);
        let corners = eye_corners(&img, &corner_params()).unwrap();
        let dl = ((corners.left.0 - truth.corner_left.0).powi(2)
            + (corners.left.1 - truth.corner_left.1).powi(2))
        .sqrt();
        let dr = ((corners.right.0 - truth.corner_right.0).powi(2)
            + (corners.right.1 - truth.corner_right.1).powi(2))
        .sqrt();
        assert!(dl <= 2.0, "left corner off by {dl}");
        assert!(dr <= 2.0, "right corner off by {dr}");
    }

    #[test]
    fn corners_swap_under_mirror() {
        // A trace of noise breaks the ties that replicated flat regions
        // otherwise produce, making the pipeline mirror-equivariant.
        let (img, _) = synth_eye(64, 32, (30.0, 16.0), 5.0, 11.0, 0.0);
        let img = add_noise(&img, &NoiseSpec::new(1e-4, 13));
        let mirrored = img.mirror_horizontal();
        let params = corner_params();
        let a = eye_corners(&img, &params).unwrap();
        let b = eye_corners(&mirrored, &params).unwrap();
        let w = img.width() as f64;
        assert!((b.left.0 - (w - 1.0 - a.right.0)).abs() < 1e-9);
        assert!((b.left.1 - a.right.1).abs() < 1e-9);
        assert!((b.right.0 - (w - 1.0 - a.left.0)).abs() < 1e-9);
        assert!((b.right.1 - a.left.1).abs() < 1e-9);
    }

    #[test]
    fn blank_image_has_no_corners() {
        let img = GrayImage::from_fn(50, 25, |_, _| 170.0);
        assert!(matches!(
            eye_corners(&img, &corner_params()),
            Err(OcularError::CornerNotFound(_))
        ));
    }

    #[test]
    fn relative_position_zero_at_midpoint() {
        let corners = EyeCorners::new((10.0, 15.0), (50.0, 15.0)).unwrap();
        let center = PupilLocation { x: 30.0, y: 15.0 };
        let rel = relative_position(&center, &corners, 60.0).unwrap();
        assert_eq!(rel.distance, 0.0);
        assert_eq!(rel.angle_deg, 0.0);
    }

    #[test]
    fn relative_position_full_span_at_corner() {
        let corners = EyeCorners::new((10.0, 15.0), (50.0, 15.0)).unwrap();
        let at_right = PupilLocation { x: 50.0, y: 15.0 };
        let rel = relative_position(&at_right, &corners, 60.0).unwrap();
        assert!((rel.angle_deg - 60.0).abs() < 1e-12);
        let at_left = PupilLocation { x: 10.0, y: 15.0 };
        let rel = relative_position(&at_left, &corners, 60.0).unwrap();
        assert!((rel.angle_deg + 60.0).abs() < 1e-12);
    }

    #[test]
    fn relative_position_linear_map() {
        let corners = EyeCorners::new((0.0, 0.0), (40.0, 0.0)).unwrap();
        // 25% of the way from midpoint to the right corner.
        let center = PupilLocation { x: 25.0, y: 0.0 };
        let rel = relative_position(&center, &corners, 60.0).unwrap();
        assert!((rel.angle_deg - 15.0).abs() < 1e-12);
    }

    #[test]
    fn relative_position_rotation_invariant() {
        let theta: f64 = 0.35;
        let (sin, cos) = theta.sin_cos();
        let rot = |p: (f64, f64)| (p.0 * cos - p.1 * sin, p.0 * sin + p.1 * cos);
        let corners = EyeCorners::new((5.0, 10.0), (45.0, 10.0)).unwrap();
        let center = PupilLocation { x: 31.0, y: 13.0 };
        let a = relative_position(&center, &corners, 60.0).unwrap();
        let rl = rot(corners.left);
        let rr = rot(corners.right);
        let rc = rot((center.x, center.y));
        let rot_corners = EyeCorners::new(rl, rr).unwrap();
        let b = relative_position(&PupilLocation { x: rc.0, y: rc.1 }, &rot_corners, 60.0).unwrap();
        assert!((a.distance - b.distance).abs() < 1e-9);
        assert!((a.angle_deg - b.angle_deg).abs() < 1e-9);
    }

    #[test]
    fn hit_test_closed_disc() {
        let truth = PupilLocation { x: 10.0, y: 10.0 };
        assert!(hit_test(&truth, &truth, 4.0));
        let on_rim = PupilLocation { x: 14.0, y: 10.0 };
        assert!(hit_test(&on_rim, &truth, 4.0));
        let outside = PupilLocation { x: 14.1, y: 10.0 };
        assert!(!hit_test(&outside, &truth, 4.0));
    }
}
