//! Filter-bank persistence: a JSON descriptor next to a raw coefficient
//! blob.
//!
//! The descriptor (`<stem>.json`) records domain, shape, trade-off
//! parameters and class order. The blob (`<stem>.bin`) holds, per class in
//! descriptor order, three row-major `f64` little-endian arrays of
//! `width * height` bins each: the filter `h`, the class mean and the class
//! variance. `h` and the mean are complex, stored as interleaved
//! `re0 im0 re1 im1 ...` pairs (imaginary parts are zero in the DCT
//! domain); the variance is real.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::otmach::{ClassFilter, FilterBank, OtMachParams, TransformDomain};
use super::{EyeState, EyeStateError};

#[derive(Debug, Serialize, Deserialize)]
struct BankDescriptor {
    format: String,
    domain: TransformDomain,
    width: usize,
    height: usize,
    a: f64,
    b: f64,
    c: f64,
    sigma2: f64,
    regularized: bool,
    classes: Vec<EyeState>,
    blob: String,
}

const FORMAT_TAG: &str = "otmach-bank-v1";

fn io_err(e: impl std::fmt::Display) -> EyeStateError {
    EyeStateError::BankIo(e.to_string())
}

/// Writes `<stem>.json` and `<stem>.bin`; returns the descriptor path.
pub fn save_bank(bank: &FilterBank, stem: impl AsRef<Path>) -> Result<PathBuf, EyeStateError> {
    let stem = stem.as_ref();
    let json_path = stem.with_extension("json");
    let blob_path = stem.with_extension("bin");
    let descriptor = BankDescriptor {
        format: FORMAT_TAG.to_string(),
        domain: bank.domain,
        width: bank.width,
        height: bank.height,
        a: bank.params.a,
        b: bank.params.b,
        c: bank.params.c,
        sigma2: bank.params.sigma2,
        regularized: bank.regularized,
        classes: bank.classes.iter().map(|c| c.label).collect(),
        blob: blob_path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
    };
    let mut blob: Vec<u8> = Vec::new();
    for class in &bank.classes {
        for value in &class.h {
            blob.extend_from_slice(&value.re.to_le_bytes());
            blob.extend_from_slice(&value.im.to_le_bytes());
        }
        for value in &class.mean {
            blob.extend_from_slice(&value.re.to_le_bytes());
            blob.extend_from_slice(&value.im.to_le_bytes());
        }
        for value in &class.var {
            blob.extend_from_slice(&value.to_le_bytes());
        }
    }
    fs::write(&blob_path, blob).map_err(io_err)?;
    let json = serde_json::to_string_pretty(&descriptor).map_err(io_err)?;
    fs::write(&json_path, json).map_err(io_err)?;
    Ok(json_path)
}

fn read_f64(bytes: &[u8], cursor: &mut usize) -> Result<f64, EyeStateError> {
    let end = *cursor + 8;
    if end > bytes.len() {
        return Err(EyeStateError::BankIo("blob truncated".into()));
    }
    let v = f64::from_le_bytes(bytes[*cursor..end].try_into().unwrap());
    *cursor = end;
    Ok(v)
}

/// Loads a bank from its `<stem>.json` descriptor (or the stem itself).
pub fn load_bank(path: impl AsRef<Path>) -> Result<FilterBank, EyeStateError> {
    let path = path.as_ref();
    let json_path =
        if path.extension().is_some_and(|e| e == "json") { path.to_path_buf() } else { path.with_extension("json") };
    let text = fs::read_to_string(&json_path).map_err(io_err)?;
    let descriptor: BankDescriptor = serde_json::from_str(&text).map_err(io_err)?;
    if descriptor.format != FORMAT_TAG {
        return Err(EyeStateError::BankIo(format!("unknown format {:?}", descriptor.format)));
    }
    let blob_path = json_path.parent().unwrap_or_else(|| Path::new(".")).join(&descriptor.blob);
    let blob = fs::read(&blob_path).map_err(io_err)?;
    let bins = descriptor.width * descriptor.height;
    let expected = descriptor.classes.len() * bins * 8 * (2 + 2 + 1);
    if blob.len() != expected {
        return Err(EyeStateError::BankIo(format!(
            "blob length {} does not match descriptor ({} expected)",
            blob.len(),
            expected
        )));
    }
    let mut cursor = 0usize;
    let mut classes = Vec::with_capacity(descriptor.classes.len());
    for label in &descriptor.classes {
        let mut h = Vec::with_capacity(bins);
        for _ in 0..bins {
            let re = read_f64(&blob, &mut cursor)?;
            let im = read_f64(&blob, &mut cursor)?;
            h.push(Complex64::new(re, im));
        }
        let mut mean = Vec::with_capacity(bins);
        for _ in 0..bins {
            let re = read_f64(&blob, &mut cursor)?;
            let im = read_f64(&blob, &mut cursor)?;
            mean.push(Complex64::new(re, im));
        }
        let mut var = Vec::with_capacity(bins);
        for _ in 0..bins {
            var.push(read_f64(&blob, &mut cursor)?);
        }
        classes.push(ClassFilter { label: *label, h, mean, var });
    }
    Ok(FilterBank {
        domain: descriptor.domain,
        width: descriptor.width,
        height: descriptor.height,
        params: OtMachParams {
            a: descriptor.a,
            b: descriptor.b,
            c: descriptor.c,
            sigma2: descriptor.sigma2,
        },
        classes,
        regularized: descriptor.regularized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eyestate::{classify, synthesize_otmach};
    use crate::imagecore::synth::synth_eye;

    #[test]
    fn bank_round_trip_preserves_classification() {
        let make = |lid: f64, dx: f64| synth_eye(48, 24, (24.0 + dx, 12.0), 4.0, 9.0, lid).0;
        let corpus = vec![
            (EyeState::Open, vec![make(0.0, 0.0), make(0.2, 1.0)]),
            (EyeState::Closed, vec![make(1.0, 0.0), make(0.95, -1.0)]),
        ];
        for domain in [TransformDomain::Dct, TransformDomain::Dft] {
            let bank = synthesize_otmach(&corpus, &OtMachParams::default(), domain).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let stem = dir.path().join("bank");
            save_bank(&bank, &stem).unwrap();
            let loaded = load_bank(&stem).unwrap();
            assert_eq!(loaded.width, bank.width);
            assert_eq!(loaded.classes.len(), bank.classes.len());
            for (a, b) in bank.classes.iter().zip(loaded.classes.iter()) {
                assert_eq!(a.label, b.label);
                for (x, y) in a.h.iter().zip(b.h.iter()) {
                    assert_eq!(x, y, "coefficients must round-trip bit-exactly");
                }
            }
            let probe = make(0.05, 0.5);
            let before = classify(&probe, &bank).unwrap();
            let after = classify(&probe, &loaded).unwrap();
            assert_eq!(before.state, after.state);
        }
    }

    #[test]
    fn truncated_blob_rejected() {
        let make = |lid: f64| synth_eye(24, 20, (12.0, 10.0), 3.0, 6.0, lid).0;
        let corpus = vec![(EyeState::Open, vec![make(0.0)])];
        let bank =
            synthesize_otmach(&corpus, &OtMachParams::default(), TransformDomain::Dct).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("bank");
        save_bank(&bank, &stem).unwrap();
        let blob_path = stem.with_extension("bin");
        let blob = std::fs::read(&blob_path).unwrap();
        std::fs::write(&blob_path, &blob[..blob.len() - 8]).unwrap();
        assert!(matches!(load_bank(&stem), Err(EyeStateError::BankIo(_))));
    }
}
