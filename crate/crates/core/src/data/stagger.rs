//! STAGGER concept generator: three categorical attributes (color, size,
//! shape) one-hot encoded to nine binary inputs, with a logical rule per
//! concept.
//!
//! Rules: concept 1 = (red and small), concept 2 = (green or circle),
//! concept 3 = (medium or large).

use crate::matrix::DenseMatrix;
use crate::model::{one_hot_block, LabeledBatch};
use crate::rng::RngStream;
use crate::scalar::Scalar;

use super::DataError;

/// Attribute value names, in encoding order.
pub const COLORS: [&str; 3] = ["red", "green", "blue"];
pub const SIZES: [&str; 3] = ["small", "medium", "large"];
pub const SHAPES: [&str; 3] = ["circle", "square", "triangle"];

/// Label rule on attribute value indices (0-based into the arrays above).
pub fn stagger_label(
    color: usize,
    size: usize,
    shape: usize,
    concept: usize,
) -> Result<usize, DataError> {
    let positive = match concept {
        1 => color == 0 && size == 0,
        2 => color == 1 || shape == 0,
        3 => size == 1 || size == 2,
        _ => return Err(DataError::InvalidConcept { family: "stagger", index: concept }),
    };
    Ok(usize::from(positive))
}

/// One-hot encoding of (color, size, shape) scaled to {-1, +1}, nine inputs.
pub fn encode<F: Scalar>(color: usize, size: usize, shape: usize) -> Vec<F> {
    let mut v = vec![-F::one(); 9];
    v[color] = F::one();
    v[3 + size] = F::one();
    v[6 + shape] = F::one();
    v
}

/// Raw stream content: inputs (`9 x n`) and class labels.
pub fn generate_raw<F: Scalar>(
    n: usize,
    concept: usize,
    rng: &mut RngStream,
) -> Result<(DenseMatrix<F>, Vec<usize>), DataError> {
    if !(1..=3).contains(&concept) {
        return Err(DataError::InvalidConcept { family: "stagger", index: concept });
    }
    let mut inputs = DenseMatrix::zeros(9, n);
    let mut labels = Vec::with_capacity(n);
    for j in 0..n {
        let color = rng.next_index(3);
        let size = rng.next_index(3);
        let shape = rng.next_index(3);
        for (i, v) in encode::<F>(color, size, shape).into_iter().enumerate() {
            inputs.set(i, j, v);
        }
        labels.push(stagger_label(color, size, shape, concept)?);
    }
    Ok((inputs, labels))
}

/// Labeled batch with one-hot two-class targets.
pub fn gen_stagger<F: Scalar>(
    n: usize,
    concept: usize,
    rng: &mut RngStream,
) -> Result<LabeledBatch<F>, DataError> {
    let (inputs, labels) = generate_raw(n, concept, rng)?;
    let targets = one_hot_block(&labels, 0, 2, 2);
    Ok(LabeledBatch::new(inputs, targets).expect("generator shapes are consistent"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concept_rules_on_named_cases() {
        // (red, small, any shape) is positive under concept 1
        for shape in 0..3 {
            assert_eq!(stagger_label(0, 0, shape, 1).unwrap(), 1);
        }
        assert_eq!(stagger_label(0, 1, 0, 1).unwrap(), 0);
        // circle is positive under concept 2 regardless of color/size
        for color in 0..3 {
            for size in 0..3 {
                assert_eq!(stagger_label(color, size, 0, 2).unwrap(), 1);
            }
        }
        assert_eq!(stagger_label(2, 0, 1, 2).unwrap(), 0);
        assert!(stagger_label(0, 0, 0, 4).is_err());
    }

    #[test]
    fn truth_tables_match_exhaustive_enumeration() {
        // all 27 combinations against a direct statement of each rule
        for color in 0..3 {
            for size in 0..3 {
                for shape in 0..3 {
                    let c1 = usize::from(color == 0 && size == 0);
                    let c2 = usize::from(color == 1 || shape == 0);
                    let c3 = usize::from(size != 0);
                    assert_eq!(stagger_label(color, size, shape, 1).unwrap(), c1);
                    assert_eq!(stagger_label(color, size, shape, 2).unwrap(), c2);
                    assert_eq!(stagger_label(color, size, shape, 3).unwrap(), c3);
                }
            }
        }
    }

    #[test]
    fn encoding_is_one_hot_over_three_groups() {
        let v = encode::<f64>(2, 1, 0);
        assert_eq!(v.len(), 9);
        assert_eq!(v.iter().filter(|&&x| x == 1.0).count(), 3);
        assert_eq!(v.iter().filter(|&&x| x == -1.0).count(), 6);
        assert_eq!(v[2], 1.0);
        assert_eq!(v[4], 1.0);
        assert_eq!(v[6], 1.0);
    }

    #[test]
    fn class_prior_matches_enumeration() {
        // concept priors from the 27-point truth table: 3/27, 15/27, 18/27
        let expected = [3.0 / 27.0, 15.0 / 27.0, 18.0 / 27.0];
        for concept in 1..=3usize {
            let n = 20_000;
            let (_, labels) = generate_raw::<f64>(n, concept, &mut RngStream::new(31)).unwrap();
            let got = labels.iter().filter(|&&l| l == 1).count() as f64 / n as f64;
            let expect = expected[concept - 1];
            let sigma = (expect * (1.0 - expect) / n as f64).sqrt();
            assert!(
                (got - expect).abs() <= 3.0 * sigma,
                "concept {concept}: prior {got} vs {expect}"
            );
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = gen_stagger::<f64>(64, 3, &mut RngStream::new(8)).unwrap();
        let b = gen_stagger::<f64>(64, 3, &mut RngStream::new(8)).unwrap();
        assert_eq!(a, b);
    }
}
