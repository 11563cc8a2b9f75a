//! The experiment driver: one code path for every learner family.
//!
//! Each trial streams its schedule through a predict–observe–train loop.
//! Every classification sample is predicted (marginalized to its emitting
//! concept's block) before it is trained on, feeding the accuracy trace and
//! the drift monitor. Drift markers arrive before the first batch of the new
//! shape; depending on the learner they trigger input/output adaptation
//! and/or queue a hidden-node growth that fuses with the next batch. At the
//! end the held-out test sets are scored per concept.

use std::collections::HashSet;
use std::time::Instant;

use aoselm::adapt::{
    adapt_hybrid, adapt_real, adapt_virtual, fit_concept_gain, rank_snapshot, set_concept_gain,
    underfit_check, AdaptError,
};
use aoselm::data::{
    compose_schedule, BatchTargets, DataError, DriftMarker, StreamBatch, StreamEvent,
};
use aoselm::matrix::MatrixError;
use aoselm::metrics::{AccuracyTrace, ConfusionMatrix, Kappa, MetricsError};
use aoselm::model::{ConceptScope, ElmModel, LabeledBatch, ModelError};
use aoselm::monitor::{DriftMonitor, MonitorError, MonitorState};
use aoselm::sequential::{ceoselm_update, oselm_update, GrowthSpec, TrainError};
use aoselm::{Mat, Model, RngStream};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ExperimentConfig, LearnerKind};
use crate::scenario::{Scenario, TestSet, TestTruth, TrialPlan};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration: {0}")]
    Config(#[from] crate::config::ConfigError),
    #[error("data: {0}")]
    Data(#[from] DataError),
    #[error("training: {0}")]
    Train(#[from] TrainError),
    #[error("adaptation: {0}")]
    Adapt(#[from] AdaptError),
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error("matrix: {0}")]
    Matrix(#[from] MatrixError),
    #[error("monitor: {0}")]
    Monitor(#[from] MonitorError),
    #[error("metrics: {0}")]
    Metrics(#[from] MetricsError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("scenario: {0}")]
    Scenario(String),
}

#[derive(Debug, Clone)]
pub enum ConceptScore {
    Classification { accuracy: f64, kappa: Option<Kappa>, tested: usize },
    Regression { rmse: f64, gain: f64, tested: usize },
}

#[derive(Debug, Clone)]
pub struct ConceptOutcome {
    pub concept_id: usize,
    pub name: String,
    pub score: ConceptScore,
}

#[derive(Debug, Clone, Copy)]
pub struct RankEvent {
    pub position: u64,
    pub rank_before: usize,
    pub rank_after: usize,
    pub flagged: bool,
}

#[derive(Debug)]
pub struct TrialResult {
    pub label: String,
    pub concepts: Vec<ConceptOutcome>,
    /// Accuracy of the latest concept minus each previous concept's.
    pub forgetting: Vec<f64>,
    pub rank_events: Vec<RankEvent>,
    /// Stream positions where the monitor raised a drift signal.
    pub drift_positions: Vec<u64>,
    pub trace: Vec<(u64, f64)>,
    pub wall_ms: u128,
    pub model: Model,
}

#[derive(Debug, Clone)]
pub struct ConceptSummary {
    pub name: String,
    pub mean: f64,
    pub std: f64,
    pub mean_kappa: Option<f64>,
    pub mean_kappa_error: Option<f64>,
    pub trials: usize,
    /// True when `mean`/`std` are RMSE values instead of accuracies.
    pub regression: bool,
}

#[derive(Debug)]
pub struct Report {
    pub scenario: String,
    pub resolved: String,
    pub trials: Vec<TrialResult>,
    pub summary: Vec<ConceptSummary>,
}

/// Runs every trial of `scenario` under `cfg`. Trials execute in parallel
/// and join in deterministic order.
pub fn run_experiment(cfg: &ExperimentConfig, scenario: &Scenario) -> Result<Report, RunError> {
    cfg.validate()?;
    let plans = scenario.build_plans(cfg)?;
    let trials: Vec<TrialResult> = plans
        .par_iter()
        .map(|plan| run_trial(cfg, plan))
        .collect::<Result<_, _>>()?;
    let summary = summarize(&trials);
    Ok(Report {
        scenario: scenario.name().to_string(),
        resolved: cfg.resolved_text(&scenario.describe()),
        trials,
        summary,
    })
}

fn summarize(trials: &[TrialResult]) -> Vec<ConceptSummary> {
    let mut names: Vec<String> = Vec::new();
    for t in trials {
        for c in &t.concepts {
            if !names.contains(&c.name) {
                names.push(c.name.clone());
            }
        }
    }
    names
        .into_iter()
        .map(|name| {
            let mut values = Vec::new();
            let mut kappas = Vec::new();
            let mut kappa_errors = Vec::new();
            let mut regression = false;
            for t in trials {
                for c in t.concepts.iter().filter(|c| c.name == name) {
                    match &c.score {
                        ConceptScore::Classification { accuracy, kappa, .. } => {
                            values.push(*accuracy);
                            if let Some(k) = kappa {
                                kappas.push(k.value);
                                kappa_errors.push(k.std_error);
                            }
                        }
                        ConceptScore::Regression { rmse, .. } => {
                            values.push(*rmse);
                            regression = true;
                        }
                    }
                }
            }
            let n = values.len().max(1) as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            ConceptSummary {
                name,
                mean,
                std: var.sqrt(),
                mean_kappa: (!kappas.is_empty())
                    .then(|| kappas.iter().sum::<f64>() / kappas.len() as f64),
                mean_kappa_error: (!kappa_errors.is_empty())
                    .then(|| kappa_errors.iter().sum::<f64>() / kappa_errors.len() as f64),
                trials: values.len(),
                regression,
            }
        })
        .collect()
}

fn run_trial(cfg: &ExperimentConfig, plan: &TrialPlan) -> Result<TrialResult, RunError> {
    let start = Instant::now();
    let mut init_rng = RngStream::new(plan.init_seed);
    let mut model = ElmModel::init(
        plan.input_dim,
        cfg.hidden_nodes,
        plan.initial_outputs,
        cfg.scheme,
        cfg.ridge,
        &mut init_rng,
    )?
    .with_activation(cfg.activation);

    // blocks materialized in the initial output layer
    let mut known_blocks: HashSet<usize> = HashSet::new();
    known_blocks.insert(0);

    let mut stream_rng = RngStream::new(plan.stream_seed);
    let mut growth_rng = RngStream::new(plan.growth_seed);
    let stream = compose_schedule(&plan.schedule, &mut stream_rng)?;

    let mut monitor = DriftMonitor::new(cfg.monitor)?;
    let mut trace = AccuracyTrace::new(cfg.trace_window);
    let mut rank_events = Vec::new();
    let mut drift_positions = Vec::new();
    let mut pending_growth = 0usize;
    let mut position = 0u64;

    for event in stream {
        match event {
            StreamEvent::Drift(marker) => {
                apply_marker(cfg, &mut model, &marker, &mut known_blocks, &mut growth_rng)?;
                pending_growth = cfg.learner.growth_at_drift(cfg.added_nodes);
            }
            StreamEvent::Batch(batch) => {
                prequential_observe(
                    &model,
                    &batch,
                    &mut trace,
                    &mut monitor,
                    &mut drift_positions,
                    position,
                )?;
                let targets = build_targets(&batch, &model)?;
                let labeled = LabeledBatch::new(batch.inputs, targets)?;
                if pending_growth > 0 {
                    let mut growth = GrowthSpec::new(pending_growth, growth_rng.split());
                    if cfg.rank_diagnostics {
                        let before = rank_snapshot(&model);
                        ceoselm_update(&mut model, &labeled, &mut growth)?;
                        let verdict = underfit_check(&model, before);
                        rank_events.push(RankEvent {
                            position,
                            rank_before: verdict.rank_before,
                            rank_after: verdict.rank_after,
                            flagged: verdict.flagged,
                        });
                    } else {
                        ceoselm_update(&mut model, &labeled, &mut growth)?;
                    }
                    pending_growth = 0;
                } else {
                    oselm_update(&mut model, &labeled)?;
                }
                position += labeled.len() as u64;
            }
        }
    }

    let concepts = evaluate_tests(&model, &plan.tests)?;
    let forgetting = forgetting_deltas(&concepts);
    Ok(TrialResult {
        label: plan.label.clone(),
        concepts,
        forgetting,
        rank_events,
        drift_positions,
        trace: trace.finish(),
        wall_ms: start.elapsed().as_millis(),
        model,
    })
}

/// Applies a drift marker to the model according to the learner family.
fn apply_marker(
    cfg: &ExperimentConfig,
    model: &mut Model,
    marker: &DriftMarker,
    known_blocks: &mut HashSet<usize>,
    rng: &mut RngStream,
) -> Result<(), RunError> {
    if !cfg.learner.adapts_shape() {
        // non-adaptive learners must already fit the incoming shape
        if marker.input_dim != model.input_dim() {
            return Err(RunError::Scenario(format!(
                "{} cannot follow an input change to {} attributes",
                cfg.learner.name(),
                marker.input_dim
            )));
        }
        for c in &marker.incoming {
            if c.classes != model.output_dim() {
                return Err(RunError::Scenario(format!(
                    "{} cannot follow an output change to {} classes",
                    cfg.learner.name(),
                    c.classes
                )));
            }
        }
        return Ok(());
    }
    let grow_inputs = marker.input_dim > model.input_dim();
    let mut new_blocks: Vec<(usize, usize)> = marker
        .incoming
        .iter()
        .filter(|c| !known_blocks.contains(&c.block))
        .map(|c| (c.block, c.classes))
        .collect();
    new_blocks.sort_unstable();
    new_blocks.dedup();

    if grow_inputs && new_blocks.len() == 1 {
        adapt_hybrid(model, marker.input_dim, new_blocks[0].1, true, rng)?;
    } else {
        // compose the primitives atomically
        let mut candidate = model.clone();
        if grow_inputs {
            adapt_virtual(&mut candidate, marker.input_dim, rng)?;
        }
        for &(_, classes) in &new_blocks {
            adapt_real(&mut candidate, classes, true)?;
        }
        *model = candidate;
    }
    for (block, _) in new_blocks {
        known_blocks.insert(block);
    }
    Ok(())
}

/// Test-then-train bookkeeping for classification batches.
fn prequential_observe(
    model: &Model,
    batch: &StreamBatch<f64>,
    trace: &mut AccuracyTrace,
    monitor: &mut DriftMonitor,
    drift_positions: &mut Vec<u64>,
    position: u64,
) -> Result<(), RunError> {
    let BatchTargets::Classes(labels) = &batch.targets else {
        return Ok(());
    };
    let scores = model.predict_scores(&batch.inputs)?;
    for (row, (&label, &block)) in labels.iter().zip(&batch.blocks).enumerate() {
        let cols = model.concept(block)?.columns();
        let slice = &scores.row(row)[cols.clone()];
        let pred = slice
            .iter()
            .enumerate()
            .rev()
            .fold((0usize, f64::NEG_INFINITY), |best, (j, &v)| {
                if v >= best.1 {
                    (j, v)
                } else {
                    best
                }
            })
            .0;
        let correct = pred == label;
        trace.record(correct);
        if monitor.observe(correct) == MonitorState::Drift {
            drift_positions.push(position + row as u64);
            monitor.reset_after_drift();
        }
    }
    Ok(())
}

/// One-hot (or value-at-column) targets at the model's current width.
fn build_targets(batch: &StreamBatch<f64>, model: &Model) -> Result<Mat, RunError> {
    let n = batch.len();
    let m = model.output_dim();
    let mut targets = Mat::zeros(n, m);
    match &batch.targets {
        BatchTargets::Classes(labels) => {
            for (row, (&label, &block)) in labels.iter().zip(&batch.blocks).enumerate() {
                let col = model.concept(block)?.col_start() + label;
                targets.set(row, col, 1.0);
            }
        }
        BatchTargets::Values(values) => {
            for (row, (&value, &block)) in values.iter().zip(&batch.blocks).enumerate() {
                let col = model.concept(block)?.col_start();
                targets.set(row, col, value);
            }
        }
    }
    Ok(targets)
}

fn zero_pad_inputs(inputs: &Mat, dim: usize) -> Mat {
    if inputs.rows() == dim {
        return inputs.clone();
    }
    let mut padded = Mat::zeros(dim, inputs.cols());
    padded.copy_block(0, 0, inputs);
    padded
}

fn evaluate_tests(model: &Model, tests: &[TestSet]) -> Result<Vec<ConceptOutcome>, RunError> {
    let mut outcomes = Vec::with_capacity(tests.len());
    for test in tests {
        let inputs = zero_pad_inputs(&test.inputs, model.input_dim());
        let score = match &test.truth {
            TestTruth::Classes(labels) => {
                let preds = model.classify(&inputs, ConceptScope::Concept(test.block))?;
                let width = model.concept(test.block)?.width();
                let mut confusion = ConfusionMatrix::new(width);
                for (&truth, &pred) in labels.iter().zip(&preds) {
                    confusion.record(truth, pred)?;
                }
                ConceptScore::Classification {
                    accuracy: confusion.accuracy()?,
                    kappa: confusion.cohen_kappa().ok(),
                    tested: labels.len(),
                }
            }
            TestTruth::Regression { calib_inputs, calib_targets, targets } => {
                let calib = zero_pad_inputs(calib_inputs, model.input_dim());
                let calib_t: Vec<f64> = calib_targets.clone();
                let gain = fit_concept_gain(model, test.block, &calib, &calib_t)?;
                let mut tuned = model.clone();
                set_concept_gain(&mut tuned, test.block, gain)?;
                let preds = tuned.predict_regression(&inputs, test.block)?;
                let se: f64 =
                    preds.iter().zip(targets).map(|(p, t)| (p - t) * (p - t)).sum();
                ConceptScore::Regression {
                    rmse: (se / targets.len() as f64).sqrt(),
                    gain,
                    tested: targets.len(),
                }
            }
        };
        outcomes.push(ConceptOutcome {
            concept_id: test.concept_id,
            name: test.name.clone(),
            score,
        });
    }
    Ok(outcomes)
}

/// Latest classification concept's accuracy minus each earlier concept's.
fn forgetting_deltas(concepts: &[ConceptOutcome]) -> Vec<f64> {
    let accuracies: Vec<(usize, f64)> = concepts
        .iter()
        .filter_map(|c| match c.score {
            ConceptScore::Classification { accuracy, .. } => Some((c.concept_id, accuracy)),
            ConceptScore::Regression { .. } => None,
        })
        .collect();
    let Some(&(latest_id, latest_acc)) = accuracies.iter().max_by_key(|(id, _)| *id) else {
        return Vec::new();
    };
    aoselm::metrics::forgetting_capability(
        latest_acc,
        &accuracies
            .iter()
            .filter(|(id, _)| *id != latest_id)
            .map(|&(_, acc)| acc)
            .collect::<Vec<_>>(),
    )
}

/// Convenience accessors used by the benchmarks and the acceptance suite.
impl Report {
    pub fn concept_mean(&self, name: &str) -> Option<f64> {
        self.summary.iter().find(|s| s.name == name).map(|s| s.mean)
    }

    pub fn learner(&self) -> LearnerKind {
        // the resolved text always carries the learner line
        for line in self.resolved.lines() {
            if let Some(value) = line.strip_prefix("learner = ") {
                if let Some(kind) = LearnerKind::parse(value.trim()) {
                    return kind;
                }
            }
        }
        LearnerKind::Aoselm1
    }
}
