//! Sequential training without data retention.
//!
//! [`oselm_update`] is the recursive least-squares step: the autocorrelation
//! accumulates `HᵀH` and the output weights move by `K⁻¹Hᵀ(T - Hβ)`. A run
//! of updates therefore reproduces the offline ridge solution on the
//! concatenation of every batch seen, while storing only `K` and `beta`.
//!
//! [`ceoselm_update`] additionally appends hidden nodes. New nodes never saw
//! past data, so their block row/column in the grown autocorrelation is built
//! from this batch alone, which is algebraically the same as inserting a zero
//! activation block for all earlier samples. The grown system is solved as
//! one SPD system over the expanded basis.

use thiserror::Error;

use crate::linalg::{random_matrix, spd_solve, LinalgError, RandomScheme};
use crate::matrix::DenseMatrix;
use crate::model::{ElmModel, LabeledBatch, ModelError};
use crate::rng::RngStream;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("solver failed during sequential update: {0}")]
    Solver(#[source] LinalgError),
    #[error(
        "solver failed during hidden-node growth (rank {rank_before} -> {rank_after}): {source}"
    )]
    GrowthSolver {
        rank_before: usize,
        rank_after: usize,
        #[source]
        source: LinalgError,
    },
    #[error("growth step requires at least one new node")]
    EmptyGrowth,
}

/// Hidden-node growth request fused to the next batch.
#[derive(Debug)]
pub struct GrowthSpec {
    /// Number of hidden nodes to append. Zero means a plain sequential step.
    pub added_nodes: usize,
    /// Stream for drawing the new input weights and biases (uniform [-1, 1]).
    pub rng: RngStream,
}

impl GrowthSpec {
    pub fn new(added_nodes: usize, rng: RngStream) -> Self {
        Self { added_nodes, rng }
    }
}

fn check_batch<F: Scalar>(
    model: &ElmModel<F>,
    batch: &LabeledBatch<F>,
) -> Result<(), TrainError> {
    if batch.inputs().rows() != model.input_dim() {
        return Err(ModelError::InputDim {
            expected: model.input_dim(),
            got: batch.inputs().rows(),
        }
        .into());
    }
    if batch.targets().cols() != model.output_dim() {
        return Err(ModelError::TargetDim {
            expected: model.output_dim(),
            got: batch.targets().cols(),
        }
        .into());
    }
    Ok(())
}

/// One recursive least-squares step. On error the model is left untouched.
pub fn oselm_update<F: Scalar>(
    model: &mut ElmModel<F>,
    batch: &LabeledBatch<F>,
) -> Result<(), TrainError> {
    check_batch(model, batch)?;
    let h = model.hidden_activations(batch.inputs())?;
    let mut k_new = model.autocorrelation().clone();
    h.accumulate_gram(&mut k_new);
    // innovation = T - H beta
    let predicted = h.matmul(model.output_weights()).map_err(ModelError::from)?;
    let innovation = batch.targets().sub(&predicted).map_err(ModelError::from)?;
    let rhs = h.t_mul(&innovation).map_err(ModelError::from)?;
    let delta = spd_solve(&k_new, &rhs).map_err(TrainError::Solver)?;
    let beta = model.output_weights().add(&delta).map_err(ModelError::from)?;
    k_new.symmetrize();
    model.set_autocorr_and_beta(k_new, beta);
    Ok(())
}

/// Sequential step with hidden-node growth fused to this batch.
///
/// Draws the new input-weight block and biases uniform on `[-1, 1]` from
/// `growth.rng` (weights first, row major, then biases), expands the
/// autocorrelation with an `I/c` ridge on the new diagonal block, and
/// refreshes all output weights through one SPD solve over the grown basis.
/// On error the model is left untouched.
pub fn ceoselm_update<F: Scalar>(
    model: &mut ElmModel<F>,
    batch: &LabeledBatch<F>,
    growth: &mut GrowthSpec,
) -> Result<(), TrainError> {
    if growth.added_nodes == 0 {
        return Err(TrainError::EmptyGrowth);
    }
    check_batch(model, batch)?;
    let d = model.input_dim();
    let hidden = model.hidden_count();
    let added = growth.added_nodes;

    let delta_weights: DenseMatrix<F> =
        random_matrix(&mut growth.rng, d, added, RandomScheme::Uniform);
    let delta_bias: Vec<F> =
        (0..added).map(|_| F::from_f64_lossy(growth.rng.uniform(-1.0, 1.0))).collect();

    let h = model.hidden_activations(batch.inputs())?;
    // activations of the new nodes on this batch
    let g = model.activation();
    let mut dh = batch.inputs().t_mul(&delta_weights).map_err(ModelError::from)?;
    for i in 0..dh.rows() {
        for (v, &b) in dh.row_mut(i).iter_mut().zip(&delta_bias) {
            *v = g.apply(*v + b);
        }
    }

    // grown autocorrelation
    //   [ K + HᵀH    HᵀΔH          ]
    //   [ ΔHᵀH       ΔHᵀΔH + I/c   ]
    let total = hidden + added;
    let mut k_grown = DenseMatrix::<F>::zeros(total, total);
    let mut top_left = model.autocorrelation().clone();
    h.accumulate_gram(&mut top_left);
    k_grown.copy_block(0, 0, &top_left);
    let cross = h.t_mul(&dh).map_err(ModelError::from)?;
    k_grown.copy_block(0, hidden, &cross);
    k_grown.copy_block(hidden, 0, &cross.transpose());
    let mut bottom_right = dh.gram();
    bottom_right.add_diag(F::one() / model.ridge());
    k_grown.copy_block(hidden, hidden, &bottom_right);

    // expanded weights and innovation (new rows are zero, so H_full beta_exp = H beta)
    let beta_expanded = model
        .output_weights()
        .vstack(&DenseMatrix::zeros(added, model.output_dim()))
        .map_err(ModelError::from)?;
    let predicted = h.matmul(model.output_weights()).map_err(ModelError::from)?;
    let innovation = batch.targets().sub(&predicted).map_err(ModelError::from)?;
    let rhs_top = h.t_mul(&innovation).map_err(ModelError::from)?;
    let rhs_bottom = dh.t_mul(&innovation).map_err(ModelError::from)?;
    let rhs = rhs_top.vstack(&rhs_bottom).map_err(ModelError::from)?;

    let delta = match spd_solve(&k_grown, &rhs) {
        Ok(delta) => delta,
        Err(source) => {
            // attach rank diagnostics so the caller can tell an ill-posed
            // growth step apart from a plain numeric failure
            let rank_before =
                crate::linalg::numeric_rank(model.autocorrelation(), None).unwrap_or(0);
            let rank_after = crate::linalg::numeric_rank(&k_grown, None).unwrap_or(0);
            return Err(TrainError::GrowthSolver { rank_before, rank_after, source });
        }
    };
    let beta = beta_expanded.add(&delta).map_err(ModelError::from)?;

    let input_weights =
        model.input_weights().hstack(&delta_weights).map_err(ModelError::from)?;
    let mut bias = model.bias().to_vec();
    bias.extend_from_slice(&delta_bias);
    k_grown.symmetrize();
    model.replace_core(input_weights, bias, k_grown, beta);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ridge_solve;
    use crate::model::{one_hot_block, InitScheme};
    use crate::Mat;

    fn random_batch(
        model: &ElmModel<f64>,
        n: usize,
        rng: &mut RngStream,
    ) -> LabeledBatch<f64> {
        let x: Mat = random_matrix(rng, model.input_dim(), n, RandomScheme::Uniform);
        let labels: Vec<usize> =
            (0..n).map(|_| rng.next_index(model.output_dim())).collect();
        let t = one_hot_block(&labels, 0, model.output_dim(), model.output_dim());
        LabeledBatch::new(x, t).unwrap()
    }

    /// Independent oracle: offline ridge solution on the concatenated data.
    fn offline_beta(model: &ElmModel<f64>, batches: &[LabeledBatch<f64>]) -> Mat {
        let mut h_all: Option<Mat> = None;
        let mut t_all: Option<Mat> = None;
        for b in batches {
            let h = model.hidden_activations(b.inputs()).unwrap();
            h_all = Some(match h_all {
                None => h,
                Some(acc) => acc.vstack(&h).unwrap(),
            });
            t_all = Some(match t_all {
                None => b.targets().clone(),
                Some(acc) => acc.vstack(b.targets()).unwrap(),
            });
        }
        ridge_solve(&h_all.unwrap(), &t_all.unwrap(), model.ridge()).unwrap()
    }

    #[test]
    fn sequential_matches_offline_ridge() {
        let mut rng = RngStream::new(100);
        for trial in 0..5 {
            let d = 2 + rng.next_index(6);
            let hidden = 3 + rng.next_index(20);
            let m = 2 + rng.next_index(3);
            let c = [1.0, 10.0, 100.0][trial % 3];
            let mut model =
                ElmModel::init(d, hidden, m, InitScheme::Ros, c, &mut rng).unwrap();
            let frozen = model.clone();
            let batches: Vec<_> =
                (0..4).map(|_| random_batch(&model, 5 + rng.next_index(40), &mut rng)).collect();
            for b in &batches {
                oselm_update(&mut model, b).unwrap();
            }
            let offline = offline_beta(&frozen, &batches);
            let err = model.output_weights().sub(&offline).unwrap().max_abs();
            let scale = offline.max_abs().max(1e-12);
            assert!(err / scale <= 1e-8, "trial {trial}: relative error {}", err / scale);
        }
    }

    #[test]
    fn zero_innovation_leaves_beta_unchanged() {
        let mut rng = RngStream::new(200);
        let mut model = ElmModel::init(3, 8, 2, InitScheme::Ros, 5.0, &mut rng).unwrap();
        // establish nonzero weights first
        let b0 = random_batch(&model, 20, &mut rng);
        oselm_update(&mut model, &b0).unwrap();
        let x: Mat = random_matrix(&mut rng, 3, 7, RandomScheme::Uniform);
        let t = model.predict_scores(&x).unwrap();
        let beta_before = model.output_weights().clone();
        oselm_update(&mut model, &LabeledBatch::new(x, t).unwrap()).unwrap();
        let drift = model.output_weights().sub(&beta_before).unwrap().max_abs();
        assert!(drift < 1e-10, "beta moved by {drift}");
    }

    #[test]
    fn autocorrelation_accumulates_gram_plus_prime() {
        let mut rng = RngStream::new(300);
        let c = 4.0;
        let mut model = ElmModel::init(4, 6, 2, InitScheme::Norm, c, &mut rng).unwrap();
        let frozen = model.clone();
        let batches: Vec<_> = (0..3).map(|_| random_batch(&model, 10, &mut rng)).collect();
        for b in &batches {
            oselm_update(&mut model, b).unwrap();
        }
        let mut expected = Mat::zeros(6, 6);
        expected.add_diag(1.0 / c);
        for b in &batches {
            let h = frozen.hidden_activations(b.inputs()).unwrap();
            expected = expected.add(&h.gram()).unwrap();
        }
        let err = model.autocorrelation().sub(&expected).unwrap().max_abs();
        assert!(err < 1e-10, "accumulation deviates by {err}");
    }

    #[test]
    fn single_row_batches_equal_one_block_batch() {
        let mut rng = RngStream::new(400);
        let model0 = ElmModel::init(3, 10, 2, InitScheme::Ros, 2.0, &mut rng).unwrap();
        let block = random_batch(&model0, 12, &mut rng);

        let mut whole = model0.clone();
        oselm_update(&mut whole, &block).unwrap();

        let mut stepwise = model0.clone();
        for n in 0..block.len() {
            let x = Mat::from_fn(3, 1, |i, _| block.inputs().get(i, n));
            let t = Mat::from_fn(1, 2, |_, j| block.targets().get(n, j));
            oselm_update(&mut stepwise, &LabeledBatch::new(x, t).unwrap()).unwrap();
        }
        let num = whole.output_weights().sub(stepwise.output_weights()).unwrap().max_abs();
        let den = whole.output_weights().max_abs().max(1e-12);
        assert!(num / den <= 1e-8, "relative gap {}", num / den);
    }

    #[test]
    fn autocorrelation_stays_symmetric() {
        let mut rng = RngStream::new(500);
        let mut model = ElmModel::init(3, 7, 2, InitScheme::Ros, 1.0, &mut rng).unwrap();
        for round in 0..10 {
            let b = random_batch(&model, 9, &mut rng);
            if round == 5 {
                let mut growth = GrowthSpec::new(3, rng.split());
                ceoselm_update(&mut model, &b, &mut growth).unwrap();
            } else {
                oselm_update(&mut model, &b).unwrap();
            }
            let asym = model.autocorrelation().asymmetry();
            assert!(asym <= 1e-12, "asymmetry {asym} after round {round}");
        }
    }

    #[test]
    fn growth_shapes_and_old_columns_preserved() {
        let mut rng = RngStream::new(600);
        let mut model = ElmModel::init(4, 5, 3, InitScheme::Ros, 2.0, &mut rng).unwrap();
        let before = model.input_weights().clone();
        let bias_before = model.bias().to_vec();
        let b = random_batch(&model, 8, &mut rng);
        let mut growth = GrowthSpec::new(4, rng.split());
        ceoselm_update(&mut model, &b, &mut growth).unwrap();
        assert_eq!(model.hidden_count(), 9);
        assert_eq!(model.input_weights().shape(), (4, 9));
        assert_eq!(model.output_weights().shape(), (9, 3));
        assert_eq!(model.autocorrelation().shape(), (9, 9));
        for i in 0..4 {
            for j in 0..5 {
                assert_eq!(model.input_weights().get(i, j), before.get(i, j));
            }
        }
        assert_eq!(&model.bias()[..5], bias_before.as_slice());
        // predictions adapt to the new shape
        let x: Mat = random_matrix(&mut rng, 4, 3, RandomScheme::Uniform);
        assert_eq!(model.predict_scores(&x).unwrap().shape(), (3, 3));
    }

    #[test]
    fn growth_with_no_innovation_keeps_old_block() {
        let mut rng = RngStream::new(700);
        let mut model = ElmModel::init(3, 6, 2, InitScheme::Ros, 10.0, &mut rng).unwrap();
        for _ in 0..3 {
            let b = random_batch(&model, 15, &mut rng);
            oselm_update(&mut model, &b).unwrap();
        }
        let beta_before = model.output_weights().clone();
        // one sample whose target equals the current prediction
        let x: Mat = random_matrix(&mut rng, 3, 1, RandomScheme::Uniform);
        let t = model.predict_scores(&x).unwrap();
        let batch = LabeledBatch::new(x, t).unwrap();
        let mut growth = GrowthSpec::new(2, rng.split());
        ceoselm_update(&mut model, &batch, &mut growth).unwrap();
        let scale = beta_before.max_abs().max(1e-12);
        for i in 0..6 {
            for j in 0..2 {
                let gap = (model.output_weights().get(i, j) - beta_before.get(i, j)).abs();
                assert!(gap / scale <= 1e-8, "old block moved by {gap} at ({i},{j})");
            }
        }
        for i in 6..8 {
            for j in 0..2 {
                assert!(model.output_weights().get(i, j).abs() <= 1e-8);
            }
        }
    }

    /// Brute-force oracle: replay all history with the grown basis, where the
    /// new nodes contribute zero activation on past data, and solve offline.
    #[test]
    fn growth_matches_direct_grown_solution() {
        let mut rng = RngStream::new(800);
        for trial in 0..4 {
            let c = [5.0, 20.0][trial % 2];
            let added = 2 + trial % 3;
            let mut model = ElmModel::init(3, 4 + trial, 2, InitScheme::Ros, c, &mut rng).unwrap();
            let hist1 = random_batch(&model, 20, &mut rng);
            let hist2 = random_batch(&model, 15, &mut rng);
            oselm_update(&mut model, &hist1).unwrap();
            oselm_update(&mut model, &hist2).unwrap();
            let growth_batch = random_batch(&model, 10, &mut rng);
            let old_model = model.clone();
            let mut growth = GrowthSpec::new(added, rng.split());
            ceoselm_update(&mut model, &growth_batch, &mut growth).unwrap();

            // direct solution on the full grown hidden matrix
            let l0 = old_model.hidden_count();
            let h1 = old_model.hidden_activations(hist1.inputs()).unwrap();
            let h2 = old_model.hidden_activations(hist2.inputs()).unwrap();
            let h3_full = model.hidden_activations(growth_batch.inputs()).unwrap();
            let zeros1 = Mat::zeros(h1.rows(), added);
            let zeros2 = Mat::zeros(h2.rows(), added);
            let h_full = h1
                .hstack(&zeros1)
                .unwrap()
                .vstack(&h2.hstack(&zeros2).unwrap())
                .unwrap()
                .vstack(&h3_full)
                .unwrap();
            let t_full = hist1
                .targets()
                .clone()
                .vstack(hist2.targets())
                .unwrap()
                .vstack(growth_batch.targets())
                .unwrap();
            let direct = ridge_solve(&h_full, &t_full, c).unwrap();

            let err = model.output_weights().sub(&direct).unwrap().max_abs();
            let scale = direct.max_abs().max(1e-12);
            assert!(err / scale <= 1e-8, "trial {trial}: relative gap {}", err / scale);

            // grown autocorrelation equals HᵀH + I/c of the full matrix
            let mut k_direct = h_full.gram();
            k_direct.add_diag(1.0 / c);
            let k_err = model.autocorrelation().sub(&k_direct).unwrap().max_abs();
            let k_scale = k_direct.max_abs();
            assert!(k_err / k_scale <= 1e-12, "trial {trial}: K gap {}", k_err / k_scale);

            // check hidden width actually grew
            assert_eq!(model.hidden_count(), l0 + added);
        }
    }

    #[test]
    fn errors_leave_model_untouched() {
        let mut rng = RngStream::new(900);
        let mut model = ElmModel::init(3, 5, 2, InitScheme::Ros, 1.0, &mut rng).unwrap();
        let reference = model.clone();
        let bad_x = Mat::zeros(4, 2);
        let t = Mat::zeros(2, 2);
        let err = oselm_update(&mut model, &LabeledBatch::new(bad_x, t).unwrap());
        assert!(err.is_err());
        assert_eq!(model, reference);

        let bad_t = Mat::zeros(2, 5);
        let x = Mat::zeros(3, 2);
        let err = oselm_update(&mut model, &LabeledBatch::new(x, bad_t).unwrap());
        assert!(matches!(err, Err(TrainError::Model(ModelError::TargetDim { .. }))));
        assert_eq!(model, reference);

        let b = random_batch(&model, 2, &mut rng);
        let mut growth = GrowthSpec::new(0, rng.split());
        assert!(matches!(
            ceoselm_update(&mut model, &b, &mut growth),
            Err(TrainError::EmptyGrowth)
        ));
        assert_eq!(model, reference);
    }
}
