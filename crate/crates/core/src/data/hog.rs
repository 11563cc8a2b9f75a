//! Histogram-of-oriented-gradients features for 28x28 grey images.
//!
//! Layout: the image is cropped to its leading 27x27 pixels and tiled into a
//! 3x3 grid of 9x9-pixel cells; each cell accumulates gradient magnitude
//! into 9 unsigned orientation bins over `[0, pi)`, and the whole 81-value
//! block is L2-normalized once. Gradients use clamped central differences,
//! so the features are invariant to adding a constant to every pixel.

use crate::scalar::Scalar;

use super::DataError;

pub const IMAGE_SIDE: usize = 28;
pub const CROP_SIDE: usize = 27;
pub const CELL_SIDE: usize = 9;
pub const GRID_SIDE: usize = 3;
pub const ORIENT_BINS: usize = 9;
/// Output feature count: 3x3 cells x 9 bins.
pub const HOG_DIM: usize = GRID_SIDE * GRID_SIDE * ORIENT_BINS;

const NORM_EPS: f64 = 1e-6;

/// Extracts the 81 orientation-histogram features of one image (length 784).
/// A constant image yields the zero vector. Output values lie in `[0, 1]`.
pub fn hog_features<F: Scalar>(image: &[F]) -> Result<Vec<F>, DataError> {
    if image.len() != IMAGE_SIDE * IMAGE_SIDE {
        return Err(DataError::WrongLength { expected: IMAGE_SIDE * IMAGE_SIDE, got: image.len() });
    }
    let px = |i: usize, j: usize| image[i * IMAGE_SIDE + j].to_f64().unwrap_or(0.0);
    let mut hist = [0.0f64; HOG_DIM];
    for i in 0..CROP_SIDE {
        for j in 0..CROP_SIDE {
            let gx = px(i, (j + 1).min(IMAGE_SIDE - 1)) - px(i, j.saturating_sub(1));
            let gy = px((i + 1).min(IMAGE_SIDE - 1), j) - px(i.saturating_sub(1), j);
            let magnitude = (gx * gx + gy * gy).sqrt();
            if magnitude == 0.0 {
                continue;
            }
            let mut orientation = gy.atan2(gx);
            if orientation < 0.0 {
                orientation += std::f64::consts::PI;
            }
            if orientation >= std::f64::consts::PI {
                orientation = 0.0;
            }
            let bin = ((orientation / (std::f64::consts::PI / ORIENT_BINS as f64)) as usize)
                .min(ORIENT_BINS - 1);
            let cell = (i / CELL_SIDE) * GRID_SIDE + j / CELL_SIDE;
            hist[cell * ORIENT_BINS + bin] += magnitude;
        }
    }
    let norm = (hist.iter().map(|v| v * v).sum::<f64>() + NORM_EPS * NORM_EPS).sqrt();
    Ok(hist.iter().map(|&v| F::from_f64_lossy(v / norm)).collect())
}
