//! Constant-acceleration Kalman filter over the relative pupil angle, and
//! the extended variant that linearizes a configurable observation model.
//!
//! State is `[position (deg), velocity (deg/s)]` with transition
//! `F = [[1, dt], [0, 1]]`, acceleration input through
//! `G = [dt^2/2, dt]^T`, and scalar position measurements `H = [1, 0]`.
//! On this linear model the extended filter reproduces the linear one
//! exactly; the saturating observation is the hook for nonlinear use.

use nalgebra::{Matrix2, Vector2};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrackerError {
    #[error("measurement is not finite")]
    NonFiniteMeasurement,
    #[error("measurement noise variance must be positive, got {0}")]
    NonPositiveR(f64),
    #[error("state covariance is not symmetric positive semi-definite")]
    BadCovariance,
}

/// Filter state plus its noise model.
#[derive(Debug, Clone, Copy)]
pub struct TrackerState {
    /// `[position, velocity]` estimate.
    pub x: Vector2<f64>,
    /// State covariance, kept symmetric PSD.
    pub p: Matrix2<f64>,
    /// Process-noise covariance.
    pub q: Matrix2<f64>,
    /// Measurement-noise variance.
    pub r: f64,
    /// Constant acceleration input magnitude (the thesis model drives the
    /// plant with unity; zero is the physically quiet default).
    pub u: f64,
}

impl TrackerState {
    pub fn new(
        x: Vector2<f64>,
        p: Matrix2<f64>,
        q: Matrix2<f64>,
        r: f64,
        u: f64,
    ) -> Result<Self, TrackerError> {
        if r <= 0.0 {
            return Err(TrackerError::NonPositiveR(r));
        }
        if !is_symmetric_psd(&p) {
            return Err(TrackerError::BadCovariance);
        }
        Ok(Self { x, p, q, r, u })
    }

    pub fn position(&self) -> f64 {
        self.x[0]
    }

    pub fn velocity(&self) -> f64 {
        self.x[1]
    }
}

fn is_symmetric_psd(m: &Matrix2<f64>) -> bool {
    let sym = (m[(0, 1)] - m[(1, 0)]).abs() <= 1e-9 * (1.0 + m.amax());
    let diag_ok = m[(0, 0)] >= -1e-9 && m[(1, 1)] >= -1e-9;
    let det_ok = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)] >= -1e-9 * (1.0 + m.amax()).powi(2);
    sym && diag_ok && det_ok
}

fn symmetrize(m: &mut Matrix2<f64>) {
    let off = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    m[(0, 1)] = off;
    m[(1, 0)] = off;
}

fn transition(dt: f64) -> (Matrix2<f64>, Vector2<f64>) {
    (Matrix2::new(1.0, dt, 0.0, 1.0), Vector2::new(0.5 * dt * dt, dt))
}

/// Prediction-only step for frames without a usable measurement.
pub fn predict_only(state: &TrackerState, dt: f64) -> TrackerState {
    let (f, g) = transition(dt);
    let mut p = f * state.p * f.transpose() + state.q;
    symmetrize(&mut p);
    TrackerState { x: f * state.x + g * state.u, p, ..*state }
}

/// One predict-update cycle of the linear Kalman filter.
pub fn kf_step(state: &TrackerState, z: f64, dt: f64) -> Result<TrackerState, TrackerError> {
    if !z.is_finite() {
        return Err(TrackerError::NonFiniteMeasurement);
    }
    let (f, g) = transition(dt);
    let x_pred = f * state.x + g * state.u;
    let p_pred = f * state.p * f.transpose() + state.q;

    // H = [1, 0]: the innovation covariance is scalar.
    let s = p_pred[(0, 0)] + state.r;
    let k = Vector2::new(p_pred[(0, 0)], p_pred[(1, 0)]) / s;
    let x = x_pred + k * (z - x_pred[0]);
    let i_kh = Matrix2::new(1.0 - k[0], 0.0, -k[1], 1.0);
    let mut p = i_kh * p_pred;
    symmetrize(&mut p);
    Ok(TrackerState { x, p, ..*state })
}

/// Observation model for the extended filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observation {
    /// `h(x) = position`; identical to the linear filter.
    Position,
    /// `h(x) = limit * tanh(position / limit)`: a sensor that saturates at
    /// the edge of its range. Desk extension for exercising the Jacobian
    /// machinery; the thesis plant itself is linear.
    Saturating { limit: f64 },
}

impl Observation {
    pub fn measure(&self, x: &Vector2<f64>) -> f64 {
        match *self {
            Observation::Position => x[0],
            Observation::Saturating { limit } => limit * (x[0] / limit).tanh(),
        }
    }

    /// Jacobian row `[dh/dpos, dh/dvel]` at the state.
    pub fn jacobian(&self, x: &Vector2<f64>) -> Vector2<f64> {
        match *self {
            Observation::Position => Vector2::new(1.0, 0.0),
            Observation::Saturating { limit } => {
                let c = (x[0] / limit).cosh();
                Vector2::new(1.0 / (c * c), 0.0)
            }
        }
    }
}

/// One predict-update cycle of the extended Kalman filter: the (linear)
/// motion model predicts, the observation model is linearized at the
/// prediction. With [`Observation::Position`] this equals [`kf_step`]
/// element-wise.
pub fn ekf_step(
    state: &TrackerState,
    z: f64,
    dt: f64,
    observation: &Observation,
) -> Result<TrackerState, TrackerError> {
    if !z.is_finite() {
        return Err(TrackerError::NonFiniteMeasurement);
    }
    let (f, g) = transition(dt);
    // J_f of the constant-acceleration model is F itself.
    let x_pred = f * state.x + g * state.u;
    let p_pred = f * state.p * f.transpose() + state.q;

    let jh = observation.jacobian(&x_pred);
    let s = (jh.transpose() * p_pred * jh)[(0, 0)] + state.r;
    let k = p_pred * jh / s;
    let x = x_pred + k * (z - observation.measure(&x_pred));
    let i_kh = Matrix2::identity() - k * jh.transpose();
    let mut p = i_kh * p_pred;
    symmetrize(&mut p);
    Ok(TrackerState { x, p, ..*state })
}
