//! Eyelid-state classification and PERCLOS accumulation.
//!
//! Three eyelid classes (open, partially closed, closed) are separated by
//! OT-MACH correlation filters synthesized in the DCT or DFT domain; each
//! test image is scored per class with PSR, normalized mutual information
//! and the Fisher ratio, and the class winning at least two of the three
//! votes is chosen. A PCA reconstruction-error baseline and the Markov-1
//! decorrelation analysis behind the DCT preference live alongside. The
//! per-frame labels feed a sliding three-minute PERCLOS window that skips
//! blinks.

pub mod bank_io;
mod eigen;
mod markov;
mod otmach;
mod scores;
mod transform;

pub use eigen::{esd_classify, esd_train, ClassSubspace, EigenEyeModel};
pub use markov::{markov1_decorrelation, mean_off_diagonal};
pub use otmach::{
    dct_correlate_images, dct_spatial_equivalent, modulation_surface, synthesize_otmach,
    transform_image, ClassFilter, CorrelationSurface, FilterBank, OtMachParams, TransformDomain,
};
pub use scores::{fisher_ratio, mutual_information, psr};
pub use transform::{dct2, dft2, idct2, idft2};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imagecore::GrayImage;

#[derive(Debug, Error)]
pub enum EyeStateError {
    #[error("no training classes supplied")]
    NoClasses,
    #[error("a training class has no images")]
    EmptyClass,
    #[error("trade-off weights must be non-negative with a + b + c > 0")]
    BadTradeoff,
    #[error("image shape {got:?} does not match expected {expected:?}")]
    ShapeMismatch { expected: (usize, usize), got: (usize, usize) },
    #[error("correlation surface {width}x{height} smaller than the 20x20 sidelobe window")]
    SurfaceTooSmall { width: usize, height: usize },
    #[error("inputs of different lengths: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("degenerate single-bin histogram")]
    DegenerateHistogram,
    #[error("correlation coefficient {0} outside [0, 1]")]
    BadCorrelation(f64),
    #[error("sequence length {0} too short")]
    SequenceTooShort(usize),
    #[error("frame rate must be positive")]
    BadFrameRate,
    #[error("stream of {got} frames shorter than one {needed}-frame window")]
    InsufficientFrames { needed: usize, got: usize },
    #[error("bank persistence: {0}")]
    BankIo(String),
}

/// Eyelid state; class bands are eyelid closure 0-50%, 60-80% and 90-100%.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EyeState {
    Open,
    PartiallyClosed,
    Closed,
}

impl std::fmt::Display for EyeState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            EyeState::Open => "open",
            EyeState::PartiallyClosed => "partially_closed",
            EyeState::Closed => "closed",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for EyeState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "open" => Ok(EyeState::Open),
            "partially_closed" | "partial" => Ok(EyeState::PartiallyClosed),
            "closed" => Ok(EyeState::Closed),
            other => Err(format!("unknown eye state {other:?}")),
        }
    }
}

/// Per-class score triple.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ClassScores {
    pub label: EyeState,
    pub psr: f64,
    pub mi: f64,
    pub fr: f64,
}

/// How the 2-of-3 vote resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoteOutcome {
    Unanimous,
    TwoOfThree,
    /// Three-way split; the PSR winner was taken.
    PsrFallback,
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub state: EyeState,
    pub scores: Vec<ClassScores>,
    pub vote: VoteOutcome,
}

/// Classifies a test image: the winner takes the class where PSR and MI are
/// maximal and FR minimal, or any two of those three agree; a three-way
/// split falls back to the PSR vote.
pub fn classify(test: &GrayImage, bank: &FilterBank) -> Result<Classification, EyeStateError> {
    if bank.classes.is_empty() {
        return Err(EyeStateError::NoClasses);
    }
    let spectrum = transform_image(test, bank.domain);
    let mut scores = Vec::with_capacity(bank.classes.len());
    for class in &bank.classes {
        if test.width() != bank.width || test.height() != bank.height {
            return Err(EyeStateError::ShapeMismatch {
                expected: (bank.width, bank.height),
                got: (test.width(), test.height()),
            });
        }
        let surface = bank.correlate_spectrum(&spectrum, class);
        let psr_score = psr(&surface)?;
        let mi_score = mutual_information(test.pixels(), &surface.values)?;
        let fr_score = fisher_ratio(&spectrum, &class.mean, &class.var);
        scores.push(ClassScores { label: class.label, psr: psr_score, mi: mi_score, fr: fr_score });
    }

    let psr_winner = argbest(&scores, |s| s.psr, true);
    let mi_winner = argbest(&scores, |s| s.mi, true);
    let fr_winner = argbest(&scores, |s| s.fr, false);

    let mut tally = vec![0usize; scores.len()];
    tally[psr_winner] += 1;
    tally[mi_winner] += 1;
    tally[fr_winner] += 1;

    let (winner, vote) = if let Some(idx) = tally.iter().position(|&t| t >= 2) {
        let vote = if tally[idx] == 3 { VoteOutcome::Unanimous } else { VoteOutcome::TwoOfThree };
        (idx, vote)
    } else {
        (psr_winner, VoteOutcome::PsrFallback)
    };
    Ok(Classification { state: scores[winner].label, scores, vote })
}

fn argbest(scores: &[ClassScores], key: impl Fn(&ClassScores) -> f64, maximize: bool) -> usize {
    let mut best = 0;
    for i in 1..scores.len() {
        let better = if maximize {
            key(&scores[i]) > key(&scores[best])
        } else {
            key(&scores[i]) < key(&scores[best])
        };
        if better {
            best = i;
        }
    }
    best
}

/// One frame of an eyelid-state stream with its blink flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameState {
    pub state: EyeState,
    pub blink: bool,
}

/// Default blink ceiling in seconds.
pub const DEFAULT_MAX_BLINK_SECONDS: f64 = 0.4;

/// Flags blinks: a maximal run of non-open states bracketed by open frames
/// on both sides and shorter than `max_blink_frames` counts as a blink.
pub fn blink_filter(
    states: &[EyeState],
    frame_rate: f64,
    max_blink_frames: Option<usize>,
) -> Result<Vec<FrameState>, EyeStateError> {
    if frame_rate <= 0.0 {
        return Err(EyeStateError::BadFrameRate);
    }
    let ceiling =
        max_blink_frames.unwrap_or((DEFAULT_MAX_BLINK_SECONDS * frame_rate).round() as usize);
    let mut out: Vec<FrameState> =
        states.iter().map(|&s| FrameState { state: s, blink: false }).collect();
    let mut i = 0usize;
    while i < states.len() {
        if states[i] == EyeState::Open {
            i += 1;
            continue;
        }
        let start = i;
        while i < states.len() && states[i] != EyeState::Open {
            i += 1;
        }
        let bracketed = start > 0 && i < states.len();
        if bracketed && (i - start) < ceiling {
            for frame in &mut out[start..i] {
                frame.blink = true;
            }
        }
    }
    Ok(out)
}

/// Seconds of stream one PERCLOS window covers.
pub const PERCLOS_WINDOW_SECONDS: f64 = 180.0;
/// Seconds between successive outputs.
pub const PERCLOS_STEP_SECONDS: f64 = 60.0;

/// Sliding three-minute PERCLOS: percentage of non-blink frames with the
/// eyes at least partially closed, one value per minute starting when the
/// first full window is available (the third minute).
pub fn perclos_p3(frames: &[FrameState], frame_rate: f64) -> Result<Vec<f64>, EyeStateError> {
    if frame_rate <= 0.0 {
        return Err(EyeStateError::BadFrameRate);
    }
    let window = (PERCLOS_WINDOW_SECONDS * frame_rate).round() as usize;
    let step = (PERCLOS_STEP_SECONDS * frame_rate).round() as usize;
    if frames.len() < window {
        return Err(EyeStateError::InsufficientFrames { needed: window, got: frames.len() });
    }
    let counts: Vec<u8> = frames
        .iter()
        .map(|f| u8::from(!f.blink && matches!(f.state, EyeState::PartiallyClosed | EyeState::Closed)))
        .collect();
    let mut out = Vec::new();
    let mut end = window;
    while end <= frames.len() {
        let closed: u32 = counts[end - window..end].iter().map(|&c| u32::from(c)).sum();
        out.push(100.0 * f64::from(closed) / window as f64);
        end += step;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagecore::synth::synth_eye;
    use crate::imagecore::{add_noise, NoiseSpec};

    fn eye_class_image(lid: f64, seed: u64) -> GrayImage {
        let jitter = (seed % 5) as f64 - 2.0;
        let (img, _) = synth_eye(48, 24, (24.0 + jitter, 12.0), 4.5, 9.0, lid);
        add_noise(&img, &NoiseSpec::new(15.0, seed))
    }

    fn small_corpus() -> Vec<(EyeState, Vec<GrayImage>)> {
        let open: Vec<GrayImage> = (0..6).map(|i| eye_class_image(0.1, i)).collect();
        let partial: Vec<GrayImage> = (0..6).map(|i| eye_class_image(0.7, 100 + i)).collect();
        let closed: Vec<GrayImage> = (0..6).map(|i| eye_class_image(1.0, 200 + i)).collect();
        vec![
            (EyeState::Open, open),
            (EyeState::PartiallyClosed, partial),
            (EyeState::Closed, closed),
        ]
    }

    #[test]
    fn training_images_classify_into_their_class() {
        let corpus = small_corpus();
        let bank = synthesize_otmach(&corpus, &OtMachParams::default(), TransformDomain::Dct).unwrap();
        for (label, images) in &corpus {
            for img in images {
                let result = classify(img, &bank).unwrap();
                assert_eq!(result.state, *label);
            }
        }
    }

    #[test]
    fn matched_class_dct_surface_peaks_at_origin() {
        // Aligned corpus: lid coverage varies within each class band, the
        // pupil stays put. Misaligned training sets move the peak off the
        // origin, as any correlation method would.
        let aligned = |lid: f64, seed: u64| {
            let (img, _) = synth_eye(48, 24, (24.0, 12.0), 4.5, 9.0, lid);
            add_noise(&img, &NoiseSpec::new(10.0, seed))
        };
        let corpus = vec![
            (EyeState::Open, (0..6).map(|i| aligned(0.05 * i as f64, i)).collect::<Vec<_>>()),
            (
                EyeState::PartiallyClosed,
                (0..6).map(|i| aligned(0.6 + 0.04 * i as f64, 50 + i)).collect(),
            ),
            (EyeState::Closed, (0..6).map(|i| aligned(0.9 + 0.02 * i as f64, 90 + i)).collect()),
        ];
        let bank = synthesize_otmach(&corpus, &OtMachParams::default(), TransformDomain::Dct).unwrap();
        for (label, images) in &corpus {
            let class = bank.class(*label).unwrap();
            for img in images {
                let surface = bank.correlate(img, class).unwrap();
                let (px, py, _) = surface.peak();
                assert_eq!((px, py), (0, 0), "class {label} peak at ({px},{py})");
            }
        }
    }

    #[test]
    fn vote_outcomes_are_reported() {
        let corpus = small_corpus();
        let bank = synthesize_otmach(&corpus, &OtMachParams::default(), TransformDomain::Dct).unwrap();
        let probe = eye_class_image(0.05, 999);
        let result = classify(&probe, &bank).unwrap();
        assert_eq!(result.state, EyeState::Open);
        assert!(matches!(result.vote, VoteOutcome::Unanimous | VoteOutcome::TwoOfThree));
        assert_eq!(result.scores.len(), 3);
    }

    #[test]
    fn blink_run_is_flagged() {
        use EyeState::*;
        let states = [Open, PartiallyClosed, Closed, PartiallyClosed, Open];
        let flags = blink_filter(&states, 30.0, None).unwrap();
        assert!(!flags[0].blink && !flags[4].blink);
        for f in &flags[1..4] {
            assert!(f.blink);
        }
    }

    #[test]
    fn long_closure_is_not_a_blink() {
        use EyeState::*;
        let mut states = vec![Open; 10];
        states.extend(std::iter::repeat_n(Closed, 60));
        states.extend(std::iter::repeat_n(Open, 10));
        let flags = blink_filter(&states, 30.0, None).unwrap();
        assert!(flags.iter().all(|f| !f.blink), "2 s closure exceeds the 0.4 s ceiling");
    }

    #[test]
    fn all_open_stream_has_no_flags() {
        let states = vec![EyeState::Open; 100];
        let flags = blink_filter(&states, 30.0, None).unwrap();
        assert!(flags.iter().all(|f| !f.blink));
    }

    #[test]
    fn unbracketed_runs_are_not_blinks() {
        use EyeState::*;
        let states = [Closed, Closed, Open, Open, Closed];
        let flags = blink_filter(&states, 30.0, None).unwrap();
        assert!(flags.iter().all(|f| !f.blink));
    }

    fn frames_of(states: &[EyeState]) -> Vec<FrameState> {
        states.iter().map(|&s| FrameState { state: s, blink: false }).collect()
    }

    #[test]
    fn perclos_all_open_is_zero() {
        let frames = frames_of(&vec![EyeState::Open; 5400]);
        let out = perclos_p3(&frames, 30.0).unwrap();
        assert_eq!(out, vec![0.0]);
    }

    #[test]
    fn perclos_all_closed_is_hundred() {
        let frames = frames_of(&vec![EyeState::Closed; 5400]);
        let out = perclos_p3(&frames, 30.0).unwrap();
        assert_eq!(out, vec![100.0]);
    }

    #[test]
    fn perclos_ten_percent() {
        let mut states = vec![EyeState::Open; 5400];
        for s in states.iter_mut().take(540) {
            *s = EyeState::PartiallyClosed;
        }
        let frames = frames_of(&states);
        let out = perclos_p3(&frames, 30.0).unwrap();
        assert_eq!(out, vec![10.0]);
    }

    #[test]
    fn perclos_emits_once_per_minute() {
        let frames = frames_of(&vec![EyeState::Open; 30 * 60 * 5]);
        let out = perclos_p3(&frames, 30.0).unwrap();
        // Windows ending at minutes 3, 4, 5.
        assert_eq!(out.len(), 3);
    }

    #[test]
    fn perclos_short_stream_is_error() {
        let frames = frames_of(&vec![EyeState::Open; 100]);
        assert!(matches!(
            perclos_p3(&frames, 30.0),
            Err(EyeStateError::InsufficientFrames { .. })
        ));
    }

    #[test]
    fn perclos_monotone_under_closure_substitution() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let mut states = vec![EyeState::Open; 5400];
        for s in states.iter_mut() {
            if rng.random_bool(0.2) {
                *s = if rng.random_bool(0.5) { EyeState::Closed } else { EyeState::PartiallyClosed };
            }
        }
        let base = perclos_p3(&blink_filter(&states, 30.0, None).unwrap(), 30.0).unwrap()[0];
        for _ in 0..20 {
            let mut altered = states.clone();
            let open_positions: Vec<usize> = altered
                .iter()
                .enumerate()
                .filter(|(_, s)| **s == EyeState::Open)
                .map(|(i, _)| i)
                .collect();
            let pick = open_positions[rng.random_range(0..open_positions.len())];
            altered[pick] = EyeState::Closed;
            let new = perclos_p3(&blink_filter(&altered, 30.0, None).unwrap(), 30.0).unwrap()[0];
            assert!(new >= base - 1e-12, "replacing open with closed lowered PERCLOS");
        }
    }

    #[test]
    fn perclos_excludes_blinks() {
        use EyeState::*;
        // 30 fps, 180 s window. A closure interrupted by sub-0.4 s blinks:
        // 3 blinks of 5 frames and one genuine 300-frame closure.
        let mut states = vec![Open; 5400];
        for start in [100usize, 300, 500] {
            for k in 0..5 {
                states[start + k] = Closed;
            }
        }
        for s in states.iter_mut().skip(1000).take(300) {
            *s = PartiallyClosed;
        }
        let flagged = blink_filter(&states, 30.0, None).unwrap();
        let out = perclos_p3(&flagged, 30.0).unwrap();
        // Only the 300 sustained frames count.
        let expected = 100.0 * 300.0 / 5400.0;
        assert!((out[0] - expected).abs() < 1e-9, "{} vs {expected}", out[0]);
    }
}
