//! Ocular measurement toolkit.
//!
//! Image-based building blocks for estimating operator alertness from eye
//! images: the form-factor feature and its blind recovery under additive
//! noise, a local-energy edge detector with Baddeley-metric evaluation,
//! pupil center/diameter localization, OT-MACH correlation-filter eye-state
//! classification feeding PERCLOS, and Kalman/EKF tracking of the relative
//! pupil angle for saccadic-ratio estimation.
//!
//! Everything operates on plain grayscale rasters ([`imagecore::GrayImage`])
//! and is verifiable end-to-end on the synthetic generators in
//! [`imagecore::synth`].

pub mod edges;
pub mod eyestate;
pub mod formfactor;
pub mod imagecore;
pub mod noiseblind;
pub mod ocular;
pub mod saccade;
