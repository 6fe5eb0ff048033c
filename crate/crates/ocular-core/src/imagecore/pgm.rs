//! PGM (P2 ASCII / P5 binary) reading and writing, maxval up to 255, plus
//! helpers for zero-padded numbered frame directories.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::GrayImage;

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),
    #[error("maxval {0} exceeds 255")]
    MaxvalTooLarge(u32),
    #[error("truncated pixel payload: expected {expected} values, got {got}")]
    TruncatedPayload { expected: usize, got: usize },
    #[error("pixel value {0} exceeds declared maxval {1}")]
    PixelAboveMaxval(u32, u32),
}

/// Skips whitespace and `#` comments, returning the next token.
fn next_token<'a>(data: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    loop {
        while *pos < data.len() && data[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < data.len() && data[*pos] == b'#' {
            while *pos < data.len() && data[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    if *pos >= data.len() {
        return None;
    }
    let start = *pos;
    while *pos < data.len() && !data[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    Some(&data[start..*pos])
}

fn parse_number(data: &[u8], pos: &mut usize, what: &str) -> Result<u32, PgmError> {
    let tok = next_token(data, pos)
        .ok_or_else(|| PgmError::MalformedHeader(format!("missing {what}")))?;
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse::<u32>().ok())
        .ok_or_else(|| PgmError::MalformedHeader(format!("invalid {what}")))
}

/// Loads a P2 or P5 PGM file with maxval at most 255.
pub fn load_pgm(path: impl AsRef<Path>) -> Result<GrayImage, PgmError> {
    let data = fs::read(path)?;
    parse_pgm(&data)
}

/// Parses PGM bytes; see [`load_pgm`].
pub fn parse_pgm(data: &[u8]) -> Result<GrayImage, PgmError> {
    let mut pos = 0usize;
    let magic = next_token(data, &mut pos)
        .ok_or_else(|| PgmError::MalformedHeader("empty file".into()))?;
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        other => {
            return Err(PgmError::MalformedHeader(format!(
                "bad magic {:?}",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let width = parse_number(data, &mut pos, "width")? as usize;
    let height = parse_number(data, &mut pos, "height")? as usize;
    let maxval = parse_number(data, &mut pos, "maxval")?;
    if maxval > 255 {
        return Err(PgmError::MaxvalTooLarge(maxval));
    }
    if maxval == 0 {
        return Err(PgmError::MalformedHeader("maxval must be positive".into()));
    }
    let expected = width * height;
    let mut pixels = Vec::with_capacity(expected);
    if binary {
        // Exactly one whitespace byte separates the header from the payload.
        pos += 1;
        if data.len() < pos || data.len() - pos < expected {
            return Err(PgmError::TruncatedPayload {
                expected,
                got: data.len().saturating_sub(pos),
            });
        }
        for &b in &data[pos..pos + expected] {
            if u32::from(b) > maxval {
                return Err(PgmError::PixelAboveMaxval(u32::from(b), maxval));
            }
            pixels.push(f64::from(b));
        }
    } else {
        for i in 0..expected {
            let v = match next_token(data, &mut pos) {
                Some(tok) => std::str::from_utf8(tok)
                    .ok()
                    .and_then(|s| s.parse::<u32>().ok())
                    .ok_or_else(|| PgmError::MalformedHeader(format!("bad pixel token {i}")))?,
                None => return Err(PgmError::TruncatedPayload { expected, got: i }),
            };
            if v > maxval {
                return Err(PgmError::PixelAboveMaxval(v, maxval));
            }
            pixels.push(f64::from(v));
        }
    }
    GrayImage::from_pixels(width, height, pixels)
        .map_err(|e| PgmError::MalformedHeader(e.to_string()))
}

fn quantize(p: f64) -> u8 {
    p.round().clamp(0.0, 255.0) as u8
}

/// Writes binary (P5) PGM, clamping and rounding pixels to `[0, 255]`.
pub fn save_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<(), PgmError> {
    let mut out = Vec::with_capacity(img.pixels().len() + 32);
    write!(out, "P5\n{} {}\n255\n", img.width(), img.height())?;
    out.extend(img.pixels().iter().map(|&p| quantize(p)));
    fs::write(path, out)?;
    Ok(())
}

/// Writes ASCII (P2) PGM.
pub fn save_pgm_ascii(img: &GrayImage, path: impl AsRef<Path>) -> Result<(), PgmError> {
    let mut out = String::new();
    out.push_str(&format!("P2\n{} {}\n255\n", img.width(), img.height()));
    for row in 0..img.height() {
        let line: Vec<String> = (0..img.width())
            .map(|col| quantize(img.get(col, row)).to_string())
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Canonical frame filename, `frame_000001.pgm`.
pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:06}.pgm")
}

/// Writes one frame of a numbered sequence into `dir`.
pub fn save_frame(dir: impl AsRef<Path>, index: usize, img: &GrayImage) -> Result<PathBuf, PgmError> {
    let path = dir.as_ref().join(frame_file_name(index));
    save_pgm(img, &path)?;
    Ok(path)
}

/// Loads every `*.pgm` in `dir`, sorted by filename, as an ordered sequence.
pub fn load_frame_dir(dir: impl AsRef<Path>) -> Result<Vec<(PathBuf, GrayImage)>, PgmError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "pgm"))
        .collect();
    paths.sort();
    let mut frames = Vec::with_capacity(paths.len());
    for p in paths {
        let img = load_pgm(&p)?;
        frames.push((p, img));
    }
    Ok(frames)
}
