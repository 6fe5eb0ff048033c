//! Synthetic test-image generators with machine-readable ground truth.

use serde::{Deserialize, Serialize};

use super::GrayImage;

/// Geometry of the two-region step image.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepBoundary {
    /// Columns left of the index take `low`, the rest `high`.
    Vertical(usize),
    /// Rows above the index take `low`, the rest `high`.
    Horizontal(usize),
    /// `high` square embedded in a `low` background.
    EmbeddedSquare { left: usize, top: usize, side: usize },
}

/// Two-region step image; supports contrast as low as one intensity unit at
/// either end of the range.
pub fn synth_step_edge(
    width: usize,
    height: usize,
    low: f64,
    high: f64,
    boundary: StepBoundary,
) -> GrayImage {
    GrayImage::from_fn(width, height, |x, y| {
        let in_high = match boundary {
            StepBoundary::Vertical(col) => x >= col,
            StepBoundary::Horizontal(row) => y >= row,
            StepBoundary::EmbeddedSquare { left, top, side } => {
                x >= left && x < left + side && y >= top && y < top + side
            }
        };
        if in_high {
            high
        } else {
            low
        }
    })
}

/// Amplitude of the grating profile at column `x`.
pub fn grating_amplitude(x: usize, decay: f64) -> f64 {
    127.5 / (x as f64 + 1.0).powf(decay)
}

/// Square grating along columns whose amplitude decays as `1/(x+1)^decay`
/// about a mid-gray offset. `decay = 0` is a plain periodic grating.
pub fn synth_grating(width: usize, height: usize, period: usize, decay: f64) -> GrayImage {
    let period = period.max(2);
    GrayImage::from_fn(width, height, |x, _| {
        let phase = if (x % period) < period / 2 { 1.0 } else { -1.0 };
        127.5 + grating_amplitude(x, decay) * phase
    })
}

/// Intensity levels used by the synthetic eye.
pub const EYE_SKIN: f64 = 170.0;
pub const EYE_SCLERA: f64 = 230.0;
pub const EYE_IRIS: f64 = 120.0;
pub const EYE_PUPIL: f64 = 40.0;
/// Dark lash line traced along the almond outline.
pub const EYE_LASH: f64 = 60.0;

/// Ground truth recorded alongside a generated eye image.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EyeTruth {
    pub width: usize,
    pub height: usize,
    pub pupil_center: (f64, f64),
    pub pupil_radius: f64,
    pub iris_radius: f64,
    pub lid_coverage: f64,
    /// Left and right tips of the almond outline.
    pub corner_left: (f64, f64),
    pub corner_right: (f64, f64),
}

/// Synthetic eye: almond-shaped opening on skin traced by a dark lash
/// line, bright sclera, mid-gray iris, dark pupil, and a horizontal lid
/// occluding `lid_coverage` of the opening from the top. Returns the image
/// and its ground truth; the truth corners are the outermost visible lash
/// pixels of the outline.
pub fn synth_eye(
    width: usize,
    height: usize,
    pupil_center: (f64, f64),
    pupil_radius: f64,
    iris_radius: f64,
    lid_coverage: f64,
) -> (GrayImage, EyeTruth) {
    let lid_coverage = lid_coverage.clamp(0.0, 1.0);
    let x_left = 1.0;
    let x_right = (width - 2) as f64;
    let y_mid = (height - 1) as f64 / 2.0;
    let h_max = 0.45 * height as f64;
    let span = x_right - x_left;

    // Vertical half-extent of the almond at column x. The sine argument is
    // folded onto [0, 1/2] so mirrored columns get bit-identical heights.
    let half_height = |x: f64| -> f64 {
        if x < x_left || x > x_right || span <= 0.0 {
            return 0.0;
        }
        let u = ((x - x_left) / span).min((x_right - x) / span);
        h_max * (std::f64::consts::PI * u).sin()
    };

    // The lid is a horizontal cut through the almond's full vertical extent.
    let y_lid = (y_mid - h_max) + lid_coverage * 2.0 * h_max;

    let (pcx, pcy) = pupil_center;
    let img = GrayImage::from_fn(width, height, |xi, yi| {
        let x = xi as f64;
        let y = yi as f64;
        let hh = half_height(x);
        let inside = hh > 0.0 && (y - y_mid).abs() <= hh;
        if !inside {
            return EYE_SKIN;
        }
        if (y - y_mid).abs() > hh - 1.0 {
            return EYE_LASH;
        }
        if y < y_lid {
            return EYE_SKIN;
        }
        let d = ((x - pcx).powi(2) + (y - pcy).powi(2)).sqrt();
        if d <= pupil_radius {
            EYE_PUPIL
        } else if d <= iris_radius {
            EYE_IRIS
        } else {
            EYE_SCLERA
        }
    });

    // Outermost columns where the outline is visible.
    let column_visible = |xi: usize| -> bool {
        let hh = half_height(xi as f64);
        hh > 0.0 && (0..height).any(|yi| ((yi as f64) - y_mid).abs() <= hh)
    };
    let corner_left_x = (0..width).find(|&xi| column_visible(xi)).map_or(x_left, |xi| xi as f64);
    let corner_right_x =
        (0..width).rev().find(|&xi| column_visible(xi)).map_or(x_right, |xi| xi as f64);

    let truth = EyeTruth {
        width,
        height,
        pupil_center,
        pupil_radius,
        iris_radius,
        lid_coverage,
        corner_left: (corner_left_x, y_mid),
        corner_right: (corner_right_x, y_mid),
    };
    (img, truth)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_edge_extremes() {
        let lo = synth_step_edge(20, 10, 0.0, 1.0, StepBoundary::Vertical(10));
        assert_eq!(lo.min_pixel(), 0.0);
        assert_eq!(lo.max_pixel(), 1.0);
        let hi = synth_step_edge(20, 10, 254.0, 255.0, StepBoundary::Vertical(10));
        assert_eq!(hi.min_pixel(), 254.0);
        assert_eq!(hi.max_pixel(), 255.0);
    }

    #[test]
    fn step_edge_uniform_when_equal() {
        let img = synth_step_edge(8, 8, 7.0, 7.0, StepBoundary::Horizontal(4));
        assert_eq!(img.min_pixel(), 7.0);
        assert_eq!(img.max_pixel(), 7.0);
    }

    #[test]
    fn step_edge_embedded_square() {
        let img = synth_step_edge(16, 16, 0.0, 1.0, StepBoundary::EmbeddedSquare {
            left: 5,
            top: 5,
            side: 4,
        });
        assert_eq!(img.get(6, 6), 1.0);
        assert_eq!(img.get(4, 6), 0.0);
        assert_eq!(img.get(9, 8), 0.0);
    }

    #[test]
    fn grating_single_cycle_when_period_is_width() {
        let img = synth_grating(16, 4, 16, 0.0);
        for x in 0..8 {
            assert_eq!(img.get(x, 0), 255.0);
        }
        for x in 8..16 {
            assert_eq!(img.get(x, 0), 0.0);
        }
    }

    #[test]
    fn grating_zero_decay_column_constant() {
        let img = synth_grating(24, 8, 6, 0.0);
        for x in 0..24 {
            for y in 1..8 {
                assert_eq!(img.get(x, y), img.get(x, 0));
            }
        }
    }

    #[test]
    fn grating_decay_one_matches_closed_form() {
        let img = synth_grating(32, 2, 8, 1.0);
        for x in 0..32 {
            let phase = if (x % 8) < 4 { 1.0 } else { -1.0 };
            let expected = 127.5 + phase * 127.5 / (x as f64 + 1.0);
            assert!((img.get(x, 0) - expected).abs() < 1e-12);
            // Amplitude proportional to 1/position.
            assert!((grating_amplitude(x, 1.0) * (x as f64 + 1.0) - 127.5).abs() < 1e-12);
        }
    }

    #[test]
    fn eye_fully_closed_hides_iris() {
        let (img, _) = synth_eye(50, 25, (25.0, 12.0), 4.0, 9.0, 1.0);
        for p in img.pixels() {
            assert_ne!(*p, EYE_IRIS);
            assert_ne!(*p, EYE_PUPIL);
        }
    }

    #[test]
    fn eye_unoccluded_centered_is_symmetric() {
        // Odd width, pupil on the exact center column.
        let (img, _) = synth_eye(51, 25, (25.0, 12.0), 5.0, 10.0, 0.0);
        for y in 0..25 {
            for x in 0..51 {
                assert_eq!(img.get(x, y), img.get(50 - x, y), "asymmetry at ({x},{y})");
            }
        }
    }

    #[test]
    fn eye_pupil_area_close_to_disc() {
        let (img, _) = synth_eye(60, 30, (30.0, 15.0), 5.0, 12.0, 0.0);
        let count = img.pixels().iter().filter(|&&p| p == EYE_PUPIL).count() as f64;
        let expected = std::f64::consts::PI * 25.0;
        assert!((count - expected).abs() < 0.15 * expected, "pupil area {count} vs {expected}");
    }
}
