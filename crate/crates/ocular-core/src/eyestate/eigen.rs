//! Eigen-space decomposition baseline: per-class PCA subspaces, minimum
//! reconstruction error classification.
//!
//! The covariance eigenproblem is solved on the small Gram matrix `A^T A`
//! and lifted through `u = A v`, so the cost scales with the number of
//! training images instead of the pixel count.

use nalgebra::{DMatrix, DVector};

use super::{EyeState, EyeStateError};
use crate::imagecore::GrayImage;

/// One class subspace: mean vector plus an orthonormal basis (columns).
#[derive(Debug, Clone)]
pub struct ClassSubspace {
    pub label: EyeState,
    pub mean: DVector<f64>,
    pub basis: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct EigenEyeModel {
    pub width: usize,
    pub height: usize,
    pub classes: Vec<ClassSubspace>,
    /// Raised when a class had fewer usable eigen-directions than requested.
    pub degenerate: bool,
}

/// Trains one PCA subspace per class, keeping at most `k_e` principal
/// directions each.
pub fn esd_train(
    train: &[(EyeState, Vec<GrayImage>)],
    k_e: usize,
) -> Result<EigenEyeModel, EyeStateError> {
    if train.is_empty() {
        return Err(EyeStateError::NoClasses);
    }
    let first = train.iter().find_map(|(_, imgs)| imgs.first()).ok_or(EyeStateError::EmptyClass)?;
    let (width, height) = (first.width(), first.height());
    let dim = width * height;
    let mut degenerate = false;
    let mut classes = Vec::with_capacity(train.len());

    for (label, images) in train {
        if images.is_empty() {
            return Err(EyeStateError::EmptyClass);
        }
        for img in images {
            if img.width() != width || img.height() != height {
                return Err(EyeStateError::ShapeMismatch {
                    expected: (width, height),
                    got: (img.width(), img.height()),
                });
            }
        }
        let n = images.len();
        let mut mean = DVector::<f64>::zeros(dim);
        for img in images {
            mean += DVector::from_column_slice(img.pixels());
        }
        mean /= n as f64;

        // A holds the mean-subtracted image vectors as columns.
        let mut a = DMatrix::<f64>::zeros(dim, n);
        for (i, img) in images.iter().enumerate() {
            let phi = DVector::from_column_slice(img.pixels()) - &mean;
            a.set_column(i, &phi);
        }

        let gram = a.transpose() * &a;
        let eigen = gram.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eigen.eigenvalues[j].partial_cmp(&eigen.eigenvalues[i]).unwrap());

        let mut kept: Vec<DVector<f64>> = Vec::new();
        for &idx in order.iter().take(k_e) {
            let lambda = eigen.eigenvalues[idx];
            if lambda <= 1e-9 {
                break;
            }
            let v = eigen.eigenvectors.column(idx).clone_owned();
            let u = &a * v;
            let norm = u.norm();
            if norm <= 1e-12 {
                break;
            }
            kept.push(u / norm);
        }
        if kept.len() < k_e.min(n) {
            degenerate = true;
        }
        let mut basis = DMatrix::<f64>::zeros(dim, kept.len());
        for (i, u) in kept.iter().enumerate() {
            basis.set_column(i, u);
        }
        classes.push(ClassSubspace { label: *label, mean, basis });
    }

    Ok(EigenEyeModel { width, height, classes, degenerate })
}

/// Classifies by minimum reconstruction error; returns the winning label and
/// the per-class errors in training order. Ties keep the first class.
pub fn esd_classify(
    test: &GrayImage,
    model: &EigenEyeModel,
) -> Result<(EyeState, Vec<f64>), EyeStateError> {
    if test.width() != model.width || test.height() != model.height {
        return Err(EyeStateError::ShapeMismatch {
            expected: (model.width, model.height),
            got: (test.width(), test.height()),
        });
    }
    let gamma = DVector::from_column_slice(test.pixels());
    let mut errors = Vec::with_capacity(model.classes.len());
    for class in &model.classes {
        let phi = &gamma - &class.mean;
        let weights = class.basis.transpose() * &phi;
        let reconstructed = &class.basis * weights;
        errors.push((phi - reconstructed).norm());
    }
    let mut best = 0;
    for (i, e) in errors.iter().enumerate() {
        if *e < errors[best] {
            best = i;
        }
    }
    Ok((model.classes[best].label, errors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(w: usize, h: usize, rng: &mut ChaCha8Rng) -> GrayImage {
        GrayImage::from_fn(w, h, |_, _| rng.random_range(0.0..255.0))
    }

    #[test]
    fn eigenvectors_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let images: Vec<GrayImage> = (0..5).map(|_| random_image(8, 8, &mut rng)).collect();
        let model = esd_train(&[(EyeState::Open, images)], 4).unwrap();
        let basis = &model.classes[0].basis;
        let gram = basis.transpose() * basis;
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - expected).abs() < 1e-9, "({i},{j}) {}", gram[(i, j)]);
            }
        }
    }

    #[test]
    fn lifted_vectors_match_direct_covariance_eigen() {
        // Oracle: eigendecompose A A^T (36x36) directly on four tiny images
        // and compare the spanned directions.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let images: Vec<GrayImage> = (0..4).map(|_| random_image(6, 6, &mut rng)).collect();
        let model = esd_train(&[(EyeState::Open, images.clone())], 3).unwrap();

        let dim = 36;
        let mut mean = DVector::<f64>::zeros(dim);
        for img in &images {
            mean += DVector::from_column_slice(img.pixels());
        }
        mean /= 4.0;
        let mut a = DMatrix::<f64>::zeros(dim, 4);
        for (i, img) in images.iter().enumerate() {
            a.set_column(i, &(DVector::from_column_slice(img.pixels()) - &mean));
        }
        let cov = &a * a.transpose();
        let eigen = cov.symmetric_eigen();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&i, &j| eigen.eigenvalues[j].partial_cmp(&eigen.eigenvalues[i]).unwrap());

        let basis = &model.classes[0].basis;
        for (k, &idx) in order.iter().take(basis.ncols()).enumerate() {
            let direct = eigen.eigenvectors.column(idx);
            let lifted = basis.column(k);
            // Same direction up to sign.
            let dot = direct.dot(&lifted).abs();
            assert!((dot - 1.0).abs() < 1e-8, "direction {k}: |dot| = {dot}");
        }
    }

    #[test]
    fn identical_training_images_flagged_degenerate() {
        let img = GrayImage::from_fn(8, 8, |x, y| (x * y) as f64);
        let model = esd_train(&[(EyeState::Closed, vec![img.clone(), img])], 2).unwrap();
        assert!(model.degenerate);
        assert_eq!(model.classes[0].basis.ncols(), 0);
    }

    #[test]
    fn class_mean_reconstructs_to_zero_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let a_images: Vec<GrayImage> = (0..4).map(|_| random_image(8, 8, &mut rng)).collect();
        let b_images: Vec<GrayImage> =
            (0..4).map(|_| random_image(8, 8, &mut rng).map(|p| p + 500.0)).collect();
        let model = esd_train(
            &[(EyeState::Open, a_images.clone()), (EyeState::Closed, b_images)],
            3,
        )
        .unwrap();
        // The class mean lies at the subspace origin: zero reconstruction error.
        let mut mean_img = GrayImage::new(8, 8);
        let mean = &model.classes[0].mean;
        for (i, p) in mean_img.pixels_mut().iter_mut().enumerate() {
            *p = mean[i];
        }
        let (label, errors) = esd_classify(&mean_img, &model).unwrap();
        assert_eq!(label, EyeState::Open);
        assert!(errors[0] < 1e-9, "mean error {}", errors[0]);
    }

    #[test]
    fn in_span_vector_classified_into_its_subspace() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let a_images: Vec<GrayImage> = (0..5).map(|_| random_image(8, 8, &mut rng)).collect();
        let b_images: Vec<GrayImage> =
            (0..5).map(|_| random_image(8, 8, &mut rng).map(|p| p * 0.2 + 900.0)).collect();
        let model = esd_train(
            &[(EyeState::Open, a_images), (EyeState::Closed, b_images)],
            4,
        )
        .unwrap();
        // Construct a vector inside class 0's affine span.
        let class0 = &model.classes[0];
        let coeffs = DVector::from_column_slice(&[30.0, -12.0, 4.0, 7.0]);
        let vec = &class0.mean + &class0.basis * coeffs;
        let mut img = GrayImage::new(8, 8);
        for (i, p) in img.pixels_mut().iter_mut().enumerate() {
            *p = vec[i];
        }
        let (label, errors) = esd_classify(&img, &model).unwrap();
        assert_eq!(label, EyeState::Open);
        assert!(errors[0] < 1e-8);
    }

    #[test]
    fn reconstruction_error_non_increasing_in_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let images: Vec<GrayImage> = (0..6).map(|_| random_image(8, 8, &mut rng)).collect();
        let probe = random_image(8, 8, &mut rng);
        let mut last = f64::INFINITY;
        for k in 1..=5 {
            let model = esd_train(&[(EyeState::Open, images.clone())], k).unwrap();
            let (_, errors) = esd_classify(&probe, &model).unwrap();
            assert!(errors[0] <= last + 1e-9, "k={k}: {} > {last}", errors[0]);
            last = errors[0];
        }
    }
}
