//! Saccadic eye-movement simulation, tracking, event detection and the
//! Saccadic Ratio.

mod fir;
mod kalman;
pub mod track;

pub use fir::{fir_velocity, FirError, VelocityTrace};
pub use kalman::{ekf_step, kf_step, predict_only, Observation, TrackerError, TrackerState};
pub use track::{track_frames, TrackResult, TrackerConfig, TrackerKind};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imagecore::NoiseSpec;

#[derive(Debug, Error)]
pub enum SaccadeError {
    #[error("sampling rate must be at least 60 Hz to capture saccades, got {0}")]
    SamplingTooSlow(f64),
    #[error("saccades {gap_ms:.0} ms apart violate the 200 ms refractory interval")]
    RefractoryViolation { gap_ms: f64 },
    #[error("segment durations must be positive")]
    NonPositiveDuration,
    #[error("no saccades detected")]
    NoSaccades,
}

/// Angular position samples at a fixed rate.
#[derive(Debug, Clone)]
pub struct MotionTrace {
    /// Seconds per sample.
    pub dt: f64,
    /// Position in degrees.
    pub samples: Vec<f64>,
}

/// Building blocks of a simulated gaze trace.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Segment {
    /// Hold position with micro-oscillation around the mean.
    Fixation { duration: f64 },
    /// Smooth step of `amplitude` degrees completing within `transition`
    /// seconds.
    Saccade { amplitude: f64, transition: f64 },
    /// Constant-velocity ramp.
    Pursuit { slope: f64, duration: f64 },
}

/// Fixational micro-oscillation: small and slow enough to stay far below
/// any saccade velocity floor.
const FIXATION_OSC_AMPLITUDE_DEG: f64 = 0.01;
const FIXATION_OSC_HZ: f64 = 8.0;

/// Minimum interval between consecutive saccades.
pub const REFRACTORY_SECONDS: f64 = 0.2;

/// Renders a piecewise gaze trace at `fs` Hz with additive measurement
/// noise. Consecutive saccades closer than the refractory interval are
/// rejected. The trace always starts with one sample at position zero.
pub fn simulate_eye_motion(
    segments: &[Segment],
    fs: f64,
    noise: &NoiseSpec,
) -> Result<MotionTrace, SaccadeError> {
    if fs < 60.0 {
        return Err(SaccadeError::SamplingTooSlow(fs));
    }
    let dt = 1.0 / fs;

    // Refractory check on the segment timeline.
    let mut t = 0.0;
    let mut last_saccade_end: Option<f64> = None;
    for segment in segments {
        match *segment {
            Segment::Fixation { duration } | Segment::Pursuit { duration, .. } => {
                if duration <= 0.0 {
                    return Err(SaccadeError::NonPositiveDuration);
                }
                t += duration;
            }
            Segment::Saccade { transition, .. } => {
                if transition <= 0.0 {
                    return Err(SaccadeError::NonPositiveDuration);
                }
                if let Some(end) = last_saccade_end {
                    let gap = t - end;
                    if gap < REFRACTORY_SECONDS {
                        return Err(SaccadeError::RefractoryViolation { gap_ms: gap * 1000.0 });
                    }
                }
                t += transition;
                last_saccade_end = Some(t);
            }
        }
    }

    let mut samples = vec![0.0f64];
    let mut base = 0.0;
    let mut elapsed = 0.0;
    for segment in segments {
        match *segment {
            Segment::Fixation { duration } => {
                let n = (duration * fs).round() as usize;
                for k in 1..=n {
                    let t_abs = elapsed + k as f64 * dt;
                    let osc = FIXATION_OSC_AMPLITUDE_DEG
                        * (2.0 * std::f64::consts::PI * FIXATION_OSC_HZ * t_abs).sin();
                    samples.push(base + osc);
                }
                elapsed += n as f64 * dt;
            }
            Segment::Saccade { amplitude, transition } => {
                let n = ((transition * fs).round() as usize).max(1);
                for k in 1..=n {
                    let tau = k as f64 / n as f64;
                    // Raised-cosine step: zero end-point velocity.
                    samples.push(base + amplitude * 0.5 * (1.0 - (std::f64::consts::PI * tau).cos()));
                }
                base += amplitude;
                elapsed += n as f64 * dt;
            }
            Segment::Pursuit { slope, duration } => {
                let n = (duration * fs).round() as usize;
                for k in 1..=n {
                    samples.push(base + slope * k as f64 * dt);
                }
                base += slope * n as f64 * dt;
                elapsed += n as f64 * dt;
            }
        }
    }

    if noise.variance > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        let normal = Normal::new(0.0, noise.variance.sqrt()).expect("finite std");
        for s in &mut samples {
            *s += normal.sample(&mut rng);
        }
    }
    Ok(MotionTrace { dt, samples })
}

/// One detected saccade on a velocity trace.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SaccadeEvent {
    pub onset_index: usize,
    /// Exclusive end index (first sample back under the floor).
    pub end_index: usize,
    /// Peak absolute velocity, deg/s.
    pub peak_velocity: f64,
    /// `(end - onset) * dt`, seconds.
    pub duration: f64,
}

/// Default velocity floor separating saccades from fixation jitter.
pub const DEFAULT_VELOCITY_FLOOR: f64 = 30.0;

/// Thresholded onset/end detection: an event opens when `|v|` rises above
/// the floor and closes when it falls back; events shorter than two samples
/// are discarded.
pub fn detect_saccades(velocity: &[f64], dt: f64, v_floor: f64) -> Vec<SaccadeEvent> {
    let mut events = Vec::new();
    let mut onset: Option<usize> = None;
    let mut peak = 0.0f64;
    for (i, &v) in velocity.iter().enumerate() {
        if v.abs() > v_floor {
            if onset.is_none() {
                onset = Some(i);
                peak = 0.0;
            }
            peak = peak.max(v.abs());
        } else if let Some(start) = onset.take() {
            push_event(&mut events, start, i, peak, dt);
        }
    }
    if let Some(start) = onset {
        push_event(&mut events, start, velocity.len(), peak, dt);
    }
    events
}

fn push_event(events: &mut Vec<SaccadeEvent>, onset: usize, end: usize, peak: f64, dt: f64) {
    if end - onset >= 2 {
        events.push(SaccadeEvent {
            onset_index: onset,
            end_index: end,
            peak_velocity: peak,
            duration: (end - onset) as f64 * dt,
        });
    }
}

/// Per-event peak-velocity-to-duration ratios with their mean and standard
/// deviation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SaccadicRatioResult {
    /// deg/s per s (deg/s^2); multiply by pi/180 for rad/s^2.
    pub ratios: Vec<f64>,
    pub mean: f64,
    pub std_dev: f64,
}

pub const DEG_TO_RAD: f64 = std::f64::consts::PI / 180.0;

/// Saccadic Ratio: the mean of per-event `peak velocity / duration`.
pub fn saccadic_ratio(events: &[SaccadeEvent]) -> Result<SaccadicRatioResult, SaccadeError> {
    if events.is_empty() {
        return Err(SaccadeError::NoSaccades);
    }
    let ratios: Vec<f64> = events.iter().map(|e| e.peak_velocity / e.duration).collect();
    let n = ratios.len() as f64;
    let mean = ratios.iter().sum::<f64>() / n;
    let var = ratios.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
    Ok(SaccadicRatioResult { ratios, mean, std_dev: var.sqrt() })
}
