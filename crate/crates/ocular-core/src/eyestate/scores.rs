//! Classification scores read off a correlation surface: peak-to-sidelobe
//! ratio, normalized mutual information, and the Fisher ratio in the
//! transform domain.

use num_complex::Complex64;

use super::otmach::CorrelationSurface;
use super::EyeStateError;

/// Sidelobe statistics window: a 20x20 region about the peak minus the
/// central 5x5.
const SIDELOBE_BOX: isize = 20;
const PEAK_EXCLUSION: isize = 5;

/// Peak-to-sidelobe ratio `(peak - mu) / sigma`; a flat sidelobe region
/// returns the infinity sentinel. Adding a constant to the surface leaves
/// the value unchanged.
pub fn psr(surface: &CorrelationSurface) -> Result<f64, EyeStateError> {
    if surface.width < SIDELOBE_BOX as usize || surface.height < SIDELOBE_BOX as usize {
        return Err(EyeStateError::SurfaceTooSmall {
            width: surface.width,
            height: surface.height,
        });
    }
    let (px, py, peak) = surface.peak();
    let (px, py) = (px as isize, py as isize);
    let half = SIDELOBE_BOX / 2;
    let excl = PEAK_EXCLUSION / 2;
    let mut sidelobe = Vec::with_capacity((SIDELOBE_BOX * SIDELOBE_BOX) as usize);
    for y in (py - half).max(0)..(py + half).min(surface.height as isize) {
        for x in (px - half).max(0)..(px + half).min(surface.width as isize) {
            if (x - px).abs() <= excl && (y - py).abs() <= excl {
                continue;
            }
            sidelobe.push(surface.get(x as usize, y as usize));
        }
    }
    let n = sidelobe.len() as f64;
    let mean = sidelobe.iter().sum::<f64>() / n;
    let var = sidelobe.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sigma = var.sqrt();
    if sigma == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((peak - mean) / sigma)
}

fn histogram_bins(data: &[f64]) -> Option<Vec<usize>> {
    let min = data.iter().copied().fold(f64::INFINITY, f64::min);
    let max = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > min) {
        return None;
    }
    let scale = 255.0 / (max - min);
    Some(data.iter().map(|&v| (((v - min) * scale) as usize).min(255)).collect())
}

/// Normalized mutual information `(H(a) + H(b)) / H(a,b)` over 256-bin
/// histograms of the min-max-scaled inputs, natural logarithm.
///
/// Identical inputs give exactly 2; independent ones approach 1.
pub fn mutual_information(a: &[f64], b: &[f64]) -> Result<f64, EyeStateError> {
    if a.len() != b.len() || a.is_empty() {
        return Err(EyeStateError::LengthMismatch { a: a.len(), b: b.len() });
    }
    let bins_a = histogram_bins(a).ok_or(EyeStateError::DegenerateHistogram)?;
    let bins_b = histogram_bins(b).ok_or(EyeStateError::DegenerateHistogram)?;
    let mut marg_a = vec![0u32; 256];
    let mut marg_b = vec![0u32; 256];
    let mut joint = vec![0u32; 256 * 256];
    for (&ba, &bb) in bins_a.iter().zip(bins_b.iter()) {
        marg_a[ba] += 1;
        marg_b[bb] += 1;
        joint[ba * 256 + bb] += 1;
    }
    let n = a.len() as f64;
    let entropy = |counts: &[u32]| -> f64 {
        counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = f64::from(c) / n;
                -p * p.ln()
            })
            .sum()
    };
    let h_a = entropy(&marg_a);
    let h_b = entropy(&marg_b);
    let h_joint = entropy(&joint);
    if h_joint == 0.0 {
        return Err(EyeStateError::DegenerateHistogram);
    }
    Ok((h_a + h_b) / h_joint)
}

/// Fisher ratio of a test transform against a class: sum over coefficients
/// of `|mean - test|^2 / var`, the test treated as spread-free. Zero class
/// variance at a coefficient is floored.
pub fn fisher_ratio(test: &[Complex64], mean: &[Complex64], var: &[f64]) -> f64 {
    const VAR_FLOOR: f64 = 1e-12;
    test.iter()
        .zip(mean.iter())
        .zip(var.iter())
        .map(|((t, m), &v)| (m - t).norm_sqr() / v.max(VAR_FLOOR))
        .sum()
}
