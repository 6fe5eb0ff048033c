//! Baddeley error metric between binary edge maps.
//!
//! `Delta_w^p = [ (1/N) * sum_x |w(d(x,A)) - w(d(x,B))|^p ]^(1/p) / c` with
//! `w(t) = min(t, c)`, summed over the whole raster and normalized by the
//! cap so the default configuration lies in `[0, 1]`. Distances to an empty
//! map are defined as the cap.

use super::{EdgeError, EdgeMap};

/// Default cap: the image diagonal.
pub fn default_cap(width: usize, height: usize) -> f64 {
    ((width * width + height * height) as f64).sqrt()
}

/// Exact Euclidean distance transform (distance to the nearest edge pixel),
/// two-pass lower-envelope construction on squared distances; `inf` where
/// the map has no edge pixels at all.
pub fn distance_transform(map: &EdgeMap) -> Vec<f64> {
    let (w, h) = (map.width, map.height);
    let inf = f64::INFINITY;
    // Column pass: squared distance to nearest edge pixel within each column.
    let mut col_sq = vec![inf; w * h];
    for x in 0..w {
        let mut col: Vec<f64> = (0..h).map(|y| if map.get(x, y) { 0.0 } else { inf }).collect();
        col = dt_1d(&col);
        for (y, v) in col.into_iter().enumerate() {
            col_sq[y * w + x] = v;
        }
    }
    // Row pass over the column results.
    let mut out = vec![inf; w * h];
    for y in 0..h {
        let row: Vec<f64> = (0..w).map(|x| col_sq[y * w + x]).collect();
        let row = dt_1d(&row);
        for (x, v) in row.into_iter().enumerate() {
            out[y * w + x] = v.sqrt();
        }
    }
    out
}

/// 1-D squared-distance transform of a sampled function (lower envelope of
/// parabolas).
fn dt_1d(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        if f[q].is_infinite() && f[v[k]].is_infinite() {
            // Both parabolas at infinity: skip, the envelope is unchanged.
            continue;
        }
        let mut s = intersect(f, q, v[k]);
        while k > 0 && s <= z[k] {
            k -= 1;
            s = intersect(f, q, v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    let mut k = 0usize;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let dx = q as f64 - v[k] as f64;
        d[q] = dx * dx + f[v[k]];
    }
    d
}

fn intersect(f: &[f64], q: usize, p: usize) -> f64 {
    let (qf, pf) = (q as f64, p as f64);
    if f[q].is_infinite() {
        return f64::INFINITY;
    }
    if f[p].is_infinite() {
        return f64::NEG_INFINITY;
    }
    ((f[q] + qf * qf) - (f[p] + pf * pf)) / (2.0 * qf - 2.0 * pf)
}

/// Normalized Baddeley metric between two same-sized binary maps.
pub fn baddeley_metric(
    test: &EdgeMap,
    reference: &EdgeMap,
    p: f64,
    cap: Option<f64>,
) -> Result<f64, EdgeError> {
    if test.width != reference.width || test.height != reference.height {
        return Err(EdgeError::DimensionMismatch(
            test.width,
            test.height,
            reference.width,
            reference.height,
        ));
    }
    if p < 1.0 {
        return Err(EdgeError::BadExponent(p));
    }
    let c = cap.unwrap_or_else(|| default_cap(test.width, test.height));
    let da = distance_transform(test);
    let db = distance_transform(reference);
    let n = (test.width * test.height) as f64;
    let mut acc = 0.0;
    for (a, b) in da.iter().zip(db.iter()) {
        let wa = a.min(c);
        let wb = b.min(c);
        acc += (wa - wb).abs().powf(p);
    }
    Ok((acc / n).powf(1.0 / p) / c)
}
