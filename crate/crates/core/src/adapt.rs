//! Adaptation operators for streams whose shape changes.
//!
//! Input-space growth appends rows to the input weights and nothing else:
//! zero-padded historical samples therefore produce bit-identical hidden
//! activations. Output-space growth appends zero columns to the output
//! weights, optionally registering a new concept block for output
//! marginalization; existing columns are untouched. The hybrid operator
//! applies both atomically.
//!
//! [`underfit_check`] is the convergence diagnostic for growth steps: it
//! compares the numeric rank of the explicitly formed inverse autocorrelation
//! before and after a growth event and flags a non-positive increment.

use thiserror::Error;

use crate::linalg::{self, random_matrix, LinalgError};
use crate::matrix::DenseMatrix;
use crate::model::{set_gain_internal, ElmModel, ModelError};
use crate::rng::RngStream;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdaptError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("new input dimension {requested} does not exceed current {current}")]
    InputNotGrown { current: usize, requested: usize },
    #[error("output growth needs at least one added column")]
    EmptyOutputGrowth,
    #[error("gain must be positive, got {0}")]
    InvalidGain(f64),
    #[error("gain calibration needs at least one sample")]
    EmptyCalibration,
}

/// Grows the input space to `new_input_dim` attributes.
///
/// The added rows of the input-weight matrix are drawn from the model's
/// initialization scheme distribution; biases, autocorrelation and output
/// weights stay untouched. New attributes are appended at the tail, so
/// historical samples zero-padded at the tail keep their exact predictions.
pub fn adapt_virtual<F: Scalar>(
    model: &mut ElmModel<F>,
    new_input_dim: usize,
    rng: &mut RngStream,
) -> Result<(), AdaptError> {
    let current = model.input_dim();
    if new_input_dim <= current {
        return Err(AdaptError::InputNotGrown { current, requested: new_input_dim });
    }
    let added = new_input_dim - current;
    let new_rows: DenseMatrix<F> =
        random_matrix(rng, added, model.hidden_count(), model.scheme().weight_scheme());
    let grown = model.input_weights().vstack(&new_rows).map_err(ModelError::from)?;
    model.set_input_weights(grown);
    Ok(())
}

/// Grows the output space by `added_outputs` zero columns.
///
/// With `as_new_concept` a fresh concept block of that width is registered
/// (output marginalization); otherwise the last block widens. Scores on
/// pre-existing columns are bit-identical before and after.
pub fn adapt_real<F: Scalar>(
    model: &mut ElmModel<F>,
    added_outputs: usize,
    as_new_concept: bool,
) -> Result<(), AdaptError> {
    if added_outputs == 0 {
        return Err(AdaptError::EmptyOutputGrowth);
    }
    let zeros = DenseMatrix::zeros(model.hidden_count(), added_outputs);
    let grown = model.output_weights().hstack(&zeros).map_err(ModelError::from)?;
    model.set_output_weights(grown);
    if as_new_concept {
        model.push_concept(added_outputs);
    } else {
        model.widen_last_concept(added_outputs);
    }
    Ok(())
}

/// Input and output growth in one atomic step: on any error the model is
/// exactly the input model.
pub fn adapt_hybrid<F: Scalar>(
    model: &mut ElmModel<F>,
    new_input_dim: usize,
    added_outputs: usize,
    as_new_concept: bool,
    rng: &mut RngStream,
) -> Result<(), AdaptError> {
    let mut candidate = model.clone();
    adapt_virtual(&mut candidate, new_input_dim, rng)?;
    adapt_real(&mut candidate, added_outputs, as_new_concept)?;
    *model = candidate;
    Ok(())
}

/// Sets the regression amplification gain of one concept block.
pub fn set_concept_gain<F: Scalar>(
    model: &mut ElmModel<F>,
    concept_id: usize,
    gain: F,
) -> Result<(), AdaptError> {
    if !(gain > F::zero()) || !gain.is_finite() {
        return Err(AdaptError::InvalidGain(gain.to_f64().unwrap_or(f64::NAN)));
    }
    set_gain_internal(model, concept_id, gain)?;
    Ok(())
}

/// Fits a concept's amplification gain by 1-D grid search, minimizing RMSE
/// against `targets` on a calibration set. Three rounds: a coarse geometric
/// grid on [2⁻³, 2⁶] followed by two linear refinements around the best point.
/// Returns the gain without mutating the model.
pub fn fit_concept_gain<F: Scalar>(
    model: &ElmModel<F>,
    concept_id: usize,
    inputs: &DenseMatrix<F>,
    targets: &[F],
) -> Result<F, AdaptError> {
    if targets.is_empty() || inputs.cols() != targets.len() {
        return Err(AdaptError::EmptyCalibration);
    }
    let block = model.concept(concept_id)?;
    let col = block.col_start();
    if block.width() != 1 {
        return Err(ModelError::NotRegression { concept: concept_id, width: block.width() }.into());
    }
    let scores = model.predict_scores(inputs)?;
    let raw: Vec<f64> =
        (0..scores.rows()).map(|i| scores.get(i, col).to_f64().unwrap_or(0.0)).collect();
    let want: Vec<f64> = targets.iter().map(|t| t.to_f64().unwrap_or(0.0)).collect();
    if raw.iter().all(|&v| v == 0.0) {
        return Ok(F::one());
    }
    let rmse = |g: f64| -> f64 {
        let se: f64 = raw.iter().zip(&want).map(|(&r, &w)| (g * r - w) * (g * r - w)).sum();
        (se / raw.len() as f64).sqrt()
    };
    let mut best_g = 1.0;
    let mut best_e = rmse(1.0);
    let coarse = 256;
    for i in 0..=coarse {
        let g = (2.0f64).powf(-3.0 + 9.0 * i as f64 / coarse as f64);
        let e = rmse(g);
        if e < best_e {
            best_e = e;
            best_g = g;
        }
    }
    let mut span = best_g * (9.0 / coarse as f64 * std::f64::consts::LN_2).exp_m1().abs() * 2.0;
    for _ in 0..2 {
        let lo = (best_g - span).max(1e-6);
        let hi = best_g + span;
        for i in 0..=64 {
            let g = lo + (hi - lo) * i as f64 / 64.0;
            let e = rmse(g);
            if e < best_e {
                best_e = e;
                best_g = g;
            }
        }
        span /= 16.0;
    }
    Ok(F::from_f64_lossy(best_g))
}

/// Outcome of the rank-based convergence diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnderfitVerdict {
    pub rank_before: usize,
    pub rank_after: usize,
    /// True when the rank dropped across the growth step, the signature of a
    /// growth that the data could not support: expect degraded accuracy until
    /// enough samples arrive.
    pub flagged: bool,
}

/// Numeric rank of the inverse autocorrelation, the quantity compared before
/// and after a growth step.
///
/// The inverse is formed explicitly through the triangular factorization and
/// then ranked at the default tolerance. On a healthy model this equals the
/// rank of the autocorrelation itself; after an unsupported growth step the
/// inversion loses precision in the unobserved directions and the rank
/// collapses, which is precisely the signal this diagnostic looks for. When
/// the factorization fails outright, the rank of the autocorrelation is
/// reported instead.
pub fn rank_snapshot<F: Scalar>(model: &ElmModel<F>) -> usize {
    rank_of_inverse(model.autocorrelation())
}

fn rank_of_inverse<F: Scalar>(k: &DenseMatrix<F>) -> usize {
    let explicit_inverse = linalg::spd_solve(k, &DenseMatrix::identity(k.rows()));
    match explicit_inverse {
        Ok(p) => linalg::numeric_rank(&p, None).unwrap_or(0),
        Err(LinalgError::NotPositiveDefinite { .. }) => {
            linalg::numeric_rank(k, None).unwrap_or(0)
        }
        Err(_) => 0,
    }
}

/// Compares the current rank against a snapshot taken before a growth step.
/// A growth step is expected to raise the rank; a decrease is flagged. Equal
/// ranks are tolerated so that a degenerate zero-node growth stays quiet.
pub fn underfit_check<F: Scalar>(model: &ElmModel<F>, rank_before: usize) -> UnderfitVerdict {
    let rank_after = rank_snapshot(model);
    UnderfitVerdict { rank_before, rank_after, flagged: rank_after < rank_before }
}
