//! Pixel-noise augmentation for image pools.

use crate::rng::RngStream;
use crate::scalar::Scalar;

use super::DataError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    /// Additive zero-mean gaussian noise; the parameter is sigma.
    Gaussian,
    /// Sets a parameter-fraction of pixels to -1 or +1 (equiprobable).
    SaltPepper,
}

/// Noisy copies of `images`, clipped to `[-1, 1]`.
pub fn augment_noise<F: Scalar>(
    images: &[Vec<F>],
    kind: NoiseKind,
    param: f64,
    rng: &mut RngStream,
) -> Result<Vec<Vec<F>>, DataError> {
    match kind {
        NoiseKind::Gaussian if param < 0.0 => {
            return Err(DataError::InvalidParam(format!("gaussian sigma {param} < 0")));
        }
        NoiseKind::SaltPepper if !(0.0..=1.0).contains(&param) => {
            return Err(DataError::InvalidParam(format!("flip fraction {param} outside [0, 1]")));
        }
        _ => {}
    }
    let out = images
        .iter()
        .map(|image| {
            image
                .iter()
                .map(|&v| match kind {
                    NoiseKind::Gaussian => {
                        let noisy = v.to_f64().unwrap_or(0.0) + param * rng.normal();
                        F::from_f64_lossy(noisy.clamp(-1.0, 1.0))
                    }
                    NoiseKind::SaltPepper => {
                        if rng.bernoulli(param) {
                            if rng.bernoulli(0.5) {
                                F::one()
                            } else {
                                -F::one()
                            }
                        } else {
                            v
                        }
                    }
                })
                .collect()
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sigma_is_identity() {
        let images = vec![vec![0.1f64, -0.4, 0.9]];
        let out = augment_noise(&images, NoiseKind::Gaussian, 0.0, &mut RngStream::new(1)).unwrap();
        assert_eq!(out, images);
    }

    #[test]
    fn full_salt_pepper_saturates_every_pixel() {
        let images = vec![vec![0.0f64; 64], vec![0.5f64; 64]];
        let out =
            augment_noise(&images, NoiseKind::SaltPepper, 1.0, &mut RngStream::new(2)).unwrap();
        for img in &out {
            assert!(img.iter().all(|&v| v == 1.0 || v == -1.0));
        }
        // both polarities occur
        let flat: Vec<f64> = out.concat();
        assert!(flat.iter().any(|&v| v == 1.0));
        assert!(flat.iter().any(|&v| v == -1.0));
    }

    #[test]
    fn gaussian_sigma_matches_sample_moments() {
        // mid-grey image keeps the noise away from the clipping region
        let images = vec![vec![0.0f64; 10_000]];
        let out =
            augment_noise(&images, NoiseKind::Gaussian, 0.1, &mut RngStream::new(3)).unwrap();
        let n = out[0].len() as f64;
        let mean = out[0].iter().sum::<f64>() / n;
        let var = out[0].iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let sigma = var.sqrt();
        assert!((sigma - 0.1).abs() < 0.01, "sample sigma {sigma}");
    }

    #[test]
    fn bad_parameters_are_rejected() {
        let images = vec![vec![0.0f64; 4]];
        assert!(augment_noise(&images, NoiseKind::Gaussian, -0.1, &mut RngStream::new(4)).is_err());
        assert!(
            augment_noise(&images, NoiseKind::SaltPepper, 1.5, &mut RngStream::new(4)).is_err()
        );
    }

    #[test]
    fn clipping_keeps_values_in_range() {
        let images = vec![vec![0.95f64; 1000]];
        let out =
            augment_noise(&images, NoiseKind::Gaussian, 0.5, &mut RngStream::new(5)).unwrap();
        assert!(out[0].iter().all(|&v| (-1.0..=1.0).contains(&v)));
    }
}
