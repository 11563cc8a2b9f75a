//! SEA concept generator: three integer attributes in 0..=9, binary label
//! from a threshold on the first two.

use crate::matrix::DenseMatrix;
use crate::model::{one_hot_block, LabeledBatch};
use crate::rng::RngStream;
use crate::scalar::Scalar;

use super::DataError;

/// Per-concept thresholds on `x1 + x2` (raw integer values).
pub const SEA_THRESHOLDS: [f64; 4] = [8.0, 9.0, 7.0, 9.5];

/// Label rule on raw attribute values: class 1 when `x1 + x2 <= theta`.
pub fn sea_label(x1: u32, x2: u32, concept: usize) -> Result<usize, DataError> {
    let theta = *SEA_THRESHOLDS
        .get(concept.wrapping_sub(1))
        .ok_or(DataError::InvalidConcept { family: "sea", index: concept })?;
    Ok(usize::from((x1 + x2) as f64 <= theta))
}

/// Raw stream content: inputs scaled to [-1, 1] (`3 x n`) and class labels.
/// `label_noise` flips each label independently with that probability.
pub fn generate_raw<F: Scalar>(
    n: usize,
    concept: usize,
    label_noise: f64,
    rng: &mut RngStream,
) -> Result<(DenseMatrix<F>, Vec<usize>), DataError> {
    if !(0.0..=0.5).contains(&label_noise) {
        return Err(DataError::InvalidParam(format!("label noise {label_noise} outside [0, 0.5]")));
    }
    if !(1..=SEA_THRESHOLDS.len()).contains(&concept) {
        return Err(DataError::InvalidConcept { family: "sea", index: concept });
    }
    let mut inputs = DenseMatrix::zeros(3, n);
    let mut labels = Vec::with_capacity(n);
    for j in 0..n {
        let raw: [u32; 3] = std::array::from_fn(|_| rng.next_index(10) as u32);
        for (i, &v) in raw.iter().enumerate() {
            inputs.set(i, j, F::from_f64_lossy(v as f64 / 4.5 - 1.0));
        }
        let mut label = sea_label(raw[0], raw[1], concept)?;
        // the noise draw is consumed even at zero noise, so streams with
        // different noise levels stay attribute-aligned under one seed
        if rng.bernoulli(label_noise) {
            label = 1 - label;
        }
        labels.push(label);
    }
    Ok((inputs, labels))
}

/// Labeled batch with one-hot two-class targets.
pub fn gen_sea<F: Scalar>(
    n: usize,
    concept: usize,
    label_noise: f64,
    rng: &mut RngStream,
) -> Result<LabeledBatch<F>, DataError> {
    let (inputs, labels) = generate_raw(n, concept, label_noise, rng)?;
    let targets = one_hot_block(&labels, 0, 2, 2);
    Ok(LabeledBatch::new(inputs, targets).expect("generator shapes are consistent"))
}
