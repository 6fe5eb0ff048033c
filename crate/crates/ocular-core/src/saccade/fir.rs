//! Reference FIR differentiators (5- and 7-tap central difference).

use thiserror::Error;

use super::MotionTrace;

#[derive(Debug, Error)]
pub enum FirError {
    #[error("supported tap counts are 5 and 7, got {0}")]
    BadTaps(usize),
    #[error("trace of {got} samples shorter than the {taps}-tap stencil")]
    TraceTooShort { taps: usize, got: usize },
}

/// Velocity estimate with its group delay bookkeeping: `samples[i]`
/// estimates the derivative at input sample `i + delay`, and becomes
/// available only `delay` samples later in a causal reading.
#[derive(Debug, Clone)]
pub struct VelocityTrace {
    pub dt: f64,
    pub delay: usize,
    pub samples: Vec<f64>,
}

/// Central-difference differentiator. Both stencils pass polynomial ramps
/// exactly (degree 4 for 5 taps, degree 6 for 7).
pub fn fir_velocity(trace: &MotionTrace, taps: usize) -> Result<VelocityTrace, FirError> {
    let coeffs: &[f64] = match taps {
        5 => &[1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0],
        7 => &[-1.0 / 60.0, 9.0 / 60.0, -45.0 / 60.0, 0.0, 45.0 / 60.0, -9.0 / 60.0, 1.0 / 60.0],
        other => return Err(FirError::BadTaps(other)),
    };
    let n = trace.samples.len();
    if n < taps {
        return Err(FirError::TraceTooShort { taps, got: n });
    }
    let delay = (taps - 1) / 2;
    let samples = (0..=n - taps)
        .map(|i| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c * trace.samples[i + k])
                .sum::<f64>()
                / trace.dt
        })
        .collect();
    Ok(VelocityTrace { dt: trace.dt, delay, samples })
}
