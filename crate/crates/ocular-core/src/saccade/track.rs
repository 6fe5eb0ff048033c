//! End-to-end tracking over eye-image frame sequences: per-frame pupil
//! center, eye corners and corner-relative angle feed the Kalman/EKF
//! tracker, whose velocity estimate drives event detection and the
//! Saccadic Ratio.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use super::kalman::{ekf_step, kf_step, predict_only, Observation, TrackerState};
use super::{detect_saccades, saccadic_ratio, SaccadeEvent, SaccadicRatioResult};
use crate::imagecore::GrayImage;
use crate::ocular::{eye_corners, pupil_center, relative_position, OcularParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackerKind {
    Kf,
    Ekf,
}

/// Tracker configuration; defaults follow the library-wide noise model
/// (degrees and seconds).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrackerConfig {
    pub kind: TrackerKind,
    pub q_pos: f64,
    pub q_vel: f64,
    pub r: f64,
    /// Constant acceleration input; 1 restores the thesis plant.
    pub u: f64,
    /// Velocity floor for event detection, deg/s.
    pub v_floor: f64,
    /// Seed the state with the first measurement instead of zero.
    pub measurement_seeded: bool,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            kind: TrackerKind::Ekf,
            q_pos: 1e-4,
            q_vel: 1e-2,
            r: 0.25,
            u: 0.0,
            v_floor: super::DEFAULT_VELOCITY_FLOOR,
            measurement_seeded: true,
        }
    }
}

impl TrackerConfig {
    pub fn initial_state(&self, first_measurement: f64) -> TrackerState {
        let x0 = if self.measurement_seeded { first_measurement } else { 0.0 };
        TrackerState::new(
            Vector2::new(x0, 0.0),
            Matrix2::identity(),
            Matrix2::new(self.q_pos, 0.0, 0.0, self.q_vel),
            self.r,
            self.u,
        )
        .expect("valid default covariance")
    }

    pub fn step(
        &self,
        state: &TrackerState,
        z: f64,
        dt: f64,
    ) -> Result<TrackerState, super::TrackerError> {
        match self.kind {
            TrackerKind::Kf => kf_step(state, z, dt),
            TrackerKind::Ekf => ekf_step(state, z, dt, &Observation::Position),
        }
    }
}

/// Output of a tracked frame sequence.
#[derive(Debug, Clone)]
pub struct TrackResult {
    /// Measured corner-relative angle per frame; `None` where detection
    /// failed and the tracker coasted on its prediction.
    pub measurements: Vec<Option<f64>>,
    /// `[position, velocity]` estimate per frame.
    pub estimates: Vec<(f64, f64)>,
    pub events: Vec<SaccadeEvent>,
    pub ratio: Option<SaccadicRatioResult>,
    /// Frames where measurement failed.
    pub skipped: usize,
}

/// Tracks the corner-relative pupil angle across frames at `fps`.
///
/// Frames where the pupil or the corners cannot be found contribute a
/// prediction-only step. Frames before the first successful measurement
/// hold the zero state.
pub fn track_frames(
    frames: &[GrayImage],
    ocular_params: &OcularParams,
    config: &TrackerConfig,
    fps: f64,
) -> TrackResult {
    let dt = 1.0 / fps;
    let mut measurements = Vec::with_capacity(frames.len());
    let mut estimates = Vec::with_capacity(frames.len());
    let mut state: Option<TrackerState> = None;
    let mut skipped = 0usize;

    for frame in frames {
        let measured = measure_angle(frame, ocular_params);
        match (state.as_mut(), measured) {
            (None, Some(z)) => {
                let s0 = config.initial_state(z);
                let s1 = config.step(&s0, z, dt).unwrap_or(s0);
                estimates.push((s1.position(), s1.velocity()));
                state = Some(s1);
            }
            (None, None) => {
                skipped += 1;
                estimates.push((0.0, 0.0));
            }
            (Some(s), Some(z)) => {
                if let Ok(next) = config.step(s, z, dt) {
                    *s = next;
                }
                estimates.push((s.position(), s.velocity()));
            }
            (Some(s), None) => {
                skipped += 1;
                *s = predict_only(s, dt);
                estimates.push((s.position(), s.velocity()));
            }
        }
        measurements.push(measured);
    }

    let velocities: Vec<f64> = estimates.iter().map(|e| e.1).collect();
    let events = detect_saccades(&velocities, dt, config.v_floor);
    let ratio = saccadic_ratio(&events).ok();
    TrackResult { measurements, estimates, events, ratio, skipped }
}

fn measure_angle(frame: &GrayImage, params: &OcularParams) -> Option<f64> {
    let center = pupil_center(frame, params).ok()?;
    let corners = eye_corners(frame, params).ok()?;
    let rel = relative_position(&center, &corners, params.half_view_angle).ok()?;
    Some(rel.angle_deg)
}
