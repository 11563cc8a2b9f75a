//! Benchmark scenarios: how each experiment family turns into per-trial
//! drift schedules, test sets and seeds.
//!
//! Cross-validated scenarios generate one sample pool per concept and slice
//! it into folds, keeping stream order inside every training fold and
//! sharing the learner initialization across folds. Holdout scenarios
//! regenerate (or re-split) the data per trial seed.

use std::path::PathBuf;
use std::sync::Arc;

use aoselm::data::digits::SyntheticDigits;
use aoselm::data::{
    gen_regression, sea, stagger, BatchTargets, ConceptSpec, DriftKind, DriftSchedule,
    DriftType, FeatureSet, FixedPool, ImageSet, RegressionFn, Segment, StreamConcept,
};
use aoselm::{Mat, RngStream};

use crate::config::{EvalProtocol, ExperimentConfig};
use crate::runner::RunError;

#[derive(Debug, Clone)]
pub enum ImageSource {
    /// Seeded stroke-digit generator (default when no image files are given).
    Synthetic { base_seed: u64, per_class: usize },
    /// IDX image/label pair on disk.
    Idx { images: PathBuf, labels: PathBuf },
}

impl ImageSource {
    fn load(&self, trial_rng: &mut RngStream) -> Result<ImageSet<f64>, RunError> {
        match self {
            ImageSource::Synthetic { base_seed, per_class } => {
                let digits = SyntheticDigits::new(*base_seed, 10);
                let mut sample_rng = RngStream::new(base_seed ^ trial_rng.next_u64());
                Ok(digits.image_set(*per_class, &mut sample_rng))
            }
            ImageSource::Idx { images, labels } => {
                let mut set = ImageSet::from_idx(images, labels)?;
                // per-trial shuffle so holdout splits differ across trials
                let mut order: Vec<usize> = (0..set.len()).collect();
                trial_rng.shuffle(&mut order);
                set.images = order.iter().map(|&i| std::mem::take(&mut set.images[i])).collect();
                set.labels = order.iter().map(|&i| set.labels[i]).collect();
                Ok(set)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Composition {
    /// Sudden drift: the new concept replaces the old one.
    Split,
    /// Recurring context: old and new concepts interleave.
    Shuffled,
}

#[derive(Debug, Clone)]
pub enum Scenario {
    /// Four threshold concepts, sudden real drift between them.
    Sea { samples_per_concept: usize, label_noise: f64 },
    /// Three rule concepts, sudden real drift between them.
    Stagger { samples_per_concept: usize },
    /// Grey phase, then virtual drift to grey-plus-orientation features.
    /// With `fused = false` the stream stays grey throughout (the baseline
    /// trained identically).
    ImageVd { source: ImageSource, train: usize, test: usize, fused: bool },
    /// First six classes, then real drift to the remaining four.
    ImageRd {
        source: ImageSource,
        composition: Composition,
        train_first: usize,
        train_second: usize,
        test_per_concept: usize,
    },
    /// Hybrid drift: grey first-six, then shuffled fused-feature concepts
    /// covering first-six and last-four classes.
    ImageHd { source: ImageSource, train_per_concept: usize, test_per_concept: usize },
    /// Scalar regression concepts with output amplification.
    RegressionRd {
        functions: Vec<RegressionFn>,
        train_per_concept: usize,
        test_per_concept: usize,
        calibration: usize,
    },
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Sea { .. } => "sea",
            Scenario::Stagger { .. } => "stagger",
            Scenario::ImageVd { fused: true, .. } => "image-vd",
            Scenario::ImageVd { fused: false, .. } => "image-grey-baseline",
            Scenario::ImageRd { composition: Composition::Split, .. } => "image-rd-split",
            Scenario::ImageRd { composition: Composition::Shuffled, .. } => "image-rd-shuffled",
            Scenario::ImageHd { .. } => "image-hd",
            Scenario::RegressionRd { .. } => "regression-rd",
        }
    }

    pub fn describe(&self) -> Vec<(String, String)> {
        let mut kv = vec![("dataset".to_string(), self.name().to_string())];
        match self {
            Scenario::Sea { samples_per_concept, label_noise } => {
                kv.push(("samples_per_concept".into(), samples_per_concept.to_string()));
                kv.push(("label_noise".into(), label_noise.to_string()));
            }
            Scenario::Stagger { samples_per_concept } => {
                kv.push(("samples_per_concept".into(), samples_per_concept.to_string()));
            }
            Scenario::ImageVd { train, test, source, .. } => {
                kv.push(("train".into(), train.to_string()));
                kv.push(("test".into(), test.to_string()));
                kv.push(("source".into(), source_tag(source)));
            }
            Scenario::ImageRd { train_first, train_second, test_per_concept, source, .. } => {
                kv.push(("train_first".into(), train_first.to_string()));
                kv.push(("train_second".into(), train_second.to_string()));
                kv.push(("test_per_concept".into(), test_per_concept.to_string()));
                kv.push(("source".into(), source_tag(source)));
            }
            Scenario::ImageHd { train_per_concept, test_per_concept, source } => {
                kv.push(("train_per_concept".into(), train_per_concept.to_string()));
                kv.push(("test_per_concept".into(), test_per_concept.to_string()));
                kv.push(("source".into(), source_tag(source)));
            }
            Scenario::RegressionRd { functions, train_per_concept, test_per_concept, calibration } => {
                let names: Vec<&str> = functions
                    .iter()
                    .map(|f| match f {
                        RegressionFn::Sinc => "sinc",
                        RegressionFn::Sinus => "sinus",
                        RegressionFn::Gaussian => "gaussian",
                    })
                    .collect();
                kv.push(("functions".into(), names.join(",")));
                kv.push(("train_per_concept".into(), train_per_concept.to_string()));
                kv.push(("test_per_concept".into(), test_per_concept.to_string()));
                kv.push(("calibration".into(), calibration.to_string()));
            }
        }
        kv
    }

    pub fn build_plans(&self, cfg: &ExperimentConfig) -> Result<Vec<TrialPlan>, RunError> {
        match self {
            Scenario::Sea { samples_per_concept, label_noise } => {
                let gen = |concept: usize, n: usize, rng: &mut RngStream| {
                    let (inputs, labels) = sea::generate_raw::<f64>(n, concept, *label_noise, rng)?;
                    Ok((inputs, labels))
                };
                synthetic_classification_plans(cfg, 4, 2, *samples_per_concept, gen)
            }
            Scenario::Stagger { samples_per_concept } => {
                let gen = |concept: usize, n: usize, rng: &mut RngStream| {
                    let (inputs, labels) = stagger::generate_raw::<f64>(n, concept, rng)?;
                    Ok((inputs, labels))
                };
                synthetic_classification_plans(cfg, 3, 2, *samples_per_concept, gen)
            }
            Scenario::ImageVd { source, train, test, fused } => {
                image_vd_plans(cfg, source, *train, *test, *fused)
            }
            Scenario::ImageRd { source, composition, train_first, train_second, test_per_concept } => {
                image_rd_plans(cfg, source, *composition, *train_first, *train_second, *test_per_concept)
            }
            Scenario::ImageHd { source, train_per_concept, test_per_concept } => {
                image_hd_plans(cfg, source, *train_per_concept, *test_per_concept)
            }
            Scenario::RegressionRd { functions, train_per_concept, test_per_concept, calibration } => {
                regression_plans(cfg, functions, *train_per_concept, *test_per_concept, *calibration)
            }
        }
    }
}

fn source_tag(source: &ImageSource) -> String {
    match source {
        ImageSource::Synthetic { base_seed, per_class } => {
            format!("synthetic:{base_seed}:{per_class}")
        }
        ImageSource::Idx { images, .. } => format!("idx:{}", images.display()),
    }
}

/// Ground truth of one held-out test set.
#[derive(Debug, Clone)]
pub enum TestTruth {
    Classes(Vec<usize>),
    Regression { calib_inputs: Mat, calib_targets: Vec<f64>, targets: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct TestSet {
    pub concept_id: usize,
    pub name: String,
    pub block: usize,
    pub inputs: Mat,
    pub truth: TestTruth,
}

/// Everything one trial needs: a schedule, its test sets and derived seeds.
#[derive(Debug, Clone)]
pub struct TrialPlan {
    pub label: String,
    pub init_seed: u64,
    pub stream_seed: u64,
    pub growth_seed: u64,
    pub input_dim: usize,
    pub initial_outputs: usize,
    pub schedule: DriftSchedule<f64>,
    pub tests: Vec<TestSet>,
}

fn block_for(cfg: &ExperimentConfig, concept_index: usize) -> usize {
    if cfg.learner.adapts_shape() {
        concept_index
    } else {
        0
    }
}

fn fixed_concept(
    concept_id: usize,
    block: usize,
    inputs: Mat,
    targets: BatchTargets<f64>,
    width: usize,
) -> StreamConcept<f64> {
    let samples = Some(inputs.cols());
    StreamConcept {
        concept_id,
        block,
        spec: ConceptSpec::Fixed { pool: Arc::new(FixedPool { inputs, targets, width }) },
        samples,
    }
}

fn columns_subset(inputs: &Mat, keep: impl Iterator<Item = usize> + Clone) -> Mat {
    let count = keep.clone().count();
    let indices: Vec<usize> = keep.collect();
    Mat::from_fn(inputs.rows(), count, |i, j| inputs.get(i, indices[j]))
}

/// Plans for generator-backed classification streams (SEA / STAGGER) where
/// every concept shares the input space and emits the same label set.
fn synthetic_classification_plans(
    cfg: &ExperimentConfig,
    concepts: usize,
    classes: usize,
    samples_per_concept: usize,
    mut gen: impl FnMut(usize, usize, &mut RngStream) -> Result<(Mat, Vec<usize>), RunError>,
) -> Result<Vec<TrialPlan>, RunError> {
    // non-adaptive learners reuse block 0 for every concept here; the label
    // widths agree, so that stream is always bridgeable
    match cfg.evaluation {
        EvalProtocol::KFold { folds } => {
            let master_seed = cfg.seeds[0];
            let mut master = RngStream::new(master_seed);
            // pools first, then the shared init seed, then per-fold seeds
            let pools: Vec<(Mat, Vec<usize>)> = (1..=concepts)
                .map(|c| {
                    let mut rng = master.split();
                    gen(c, samples_per_concept, &mut rng)
                })
                .collect::<Result<_, _>>()?;
            let init_seed = master.next_u64();
            let fold_len = samples_per_concept / folds;
            let mut plans = Vec::with_capacity(folds);
            for fold in 0..folds {
                let stream_seed = master.next_u64();
                let growth_seed = master.next_u64();
                let test_range = fold * fold_len..(fold + 1) * fold_len;
                let mut segments = Vec::with_capacity(concepts);
                let mut tests = Vec::with_capacity(concepts);
                for (idx, (inputs, labels)) in pools.iter().enumerate() {
                    let block = block_for(cfg, idx);
                    let train_cols =
                        (0..samples_per_concept).filter(|j| !test_range.contains(j));
                    let train_x = columns_subset(inputs, train_cols.clone());
                    let train_l: Vec<usize> =
                        train_cols.map(|j| labels[j]).collect();
                    let n_train = train_l.len();
                    segments.push(Segment {
                        concepts: vec![fixed_concept(
                            idx,
                            block,
                            train_x,
                            BatchTargets::Classes(train_l),
                            classes,
                        )],
                        samples: n_train,
                        kind: DriftKind::Sudden,
                        transition: (idx > 0).then_some(DriftType::Real),
                    });
                    tests.push(TestSet {
                        concept_id: idx,
                        name: format!("C{}", idx + 1),
                        block,
                        inputs: columns_subset(inputs, test_range.clone()),
                        truth: TestTruth::Classes(
                            test_range.clone().map(|j| labels[j]).collect(),
                        ),
                    });
                }
                plans.push(TrialPlan {
                    label: format!("fold{fold}"),
                    init_seed,
                    stream_seed,
                    growth_seed,
                    input_dim: pools[0].0.rows(),
                    initial_outputs: classes,
                    schedule: DriftSchedule { segments, batch_size: cfg.batch_size },
                    tests,
                });
            }
            Ok(plans)
        }
        EvalProtocol::Holdout { trials } => {
            let mut plans = Vec::with_capacity(trials);
            for trial in 0..trials {
                let seed = *cfg.seeds.get(trial).unwrap_or(&(cfg.seeds[0] + trial as u64));
                let mut rng = RngStream::new(seed);
                let test_n = (samples_per_concept / 5).max(1);
                let train_n = samples_per_concept - test_n;
                let mut segments = Vec::new();
                let mut tests = Vec::new();
                let mut dim = 0;
                for idx in 0..concepts {
                    let block = block_for(cfg, idx);
                    let (inputs, labels) = gen(idx + 1, samples_per_concept, &mut rng)?;
                    dim = inputs.rows();
                    let train_x = columns_subset(&inputs, 0..train_n);
                    segments.push(Segment {
                        concepts: vec![fixed_concept(
                            idx,
                            block,
                            train_x,
                            BatchTargets::Classes(labels[..train_n].to_vec()),
                            classes,
                        )],
                        samples: train_n,
                        kind: DriftKind::Sudden,
                        transition: (idx > 0).then_some(DriftType::Real),
                    });
                    tests.push(TestSet {
                        concept_id: idx,
                        name: format!("C{}", idx + 1),
                        block,
                        inputs: columns_subset(&inputs, train_n..samples_per_concept),
                        truth: TestTruth::Classes(labels[train_n..].to_vec()),
                    });
                }
                plans.push(TrialPlan {
                    label: format!("seed{seed}"),
                    init_seed: rng.next_u64(),
                    stream_seed: rng.next_u64(),
                    growth_seed: rng.next_u64(),
                    input_dim: dim,
                    initial_outputs: classes,
                    schedule: DriftSchedule { segments, batch_size: cfg.batch_size },
                    tests,
                });
            }
            Ok(plans)
        }
    }
}

/// Materializes feature vectors of `set` images at `indices`.
fn image_pool(
    set: &ImageSet<f64>,
    indices: &[usize],
    features: FeatureSet,
    class_list: &[usize],
) -> Result<(Mat, Vec<usize>), RunError> {
    let feats: Vec<Vec<f64>> = indices
        .iter()
        .map(|&i| features.features_of(&set.images[i]))
        .collect::<Result<_, _>>()?;
    let dim = features.dim(set.dim());
    let inputs = Mat::from_fn(dim, indices.len(), |r, j| feats[j][r]);
    let labels: Vec<usize> = indices
        .iter()
        .map(|&i| {
            class_list
                .iter()
                .position(|&c| c == set.labels[i])
                .expect("indices filtered by class list")
        })
        .collect();
    Ok((inputs, labels))
}

fn holdout_seeds(cfg: &ExperimentConfig) -> Result<Vec<u64>, RunError> {
    match cfg.evaluation {
        EvalProtocol::Holdout { trials } => Ok((0..trials)
            .map(|t| *cfg.seeds.get(t).unwrap_or(&(cfg.seeds[0] + t as u64)))
            .collect()),
        EvalProtocol::KFold { .. } => Err(RunError::Scenario(
            "image and regression scenarios use the holdout protocol".into(),
        )),
    }
}

fn image_vd_plans(
    cfg: &ExperimentConfig,
    source: &ImageSource,
    train: usize,
    test: usize,
    fused: bool,
) -> Result<Vec<TrialPlan>, RunError> {
    if fused && !cfg.learner.adapts_shape() {
        return Err(RunError::Scenario(format!(
            "{} cannot follow an input-dimension change",
            cfg.learner.name()
        )));
    }
    let classes: Vec<usize> = (0..10).collect();
    let mut plans = Vec::new();
    for seed in holdout_seeds(cfg)? {
        let mut rng = RngStream::new(seed);
        let set = source.load(&mut rng)?;
        if set.len() < train + test {
            return Err(RunError::Scenario(format!(
                "image pool holds {} samples, need {}",
                set.len(),
                train + test
            )));
        }
        let phase1 = train / 2;
        let idx_all: Vec<usize> = (0..train + test).collect();
        let (grey_x, grey_l) =
            image_pool(&set, &idx_all[..phase1], FeatureSet::Grey, &classes)?;
        let final_features = if fused { FeatureSet::GreyHog } else { FeatureSet::Grey };
        let (late_x, late_l) =
            image_pool(&set, &idx_all[phase1..train], final_features, &classes)?;
        let (test_x, test_l) =
            image_pool(&set, &idx_all[train..], final_features, &classes)?;

        let mut segments = vec![Segment {
            concepts: vec![fixed_concept(
                0,
                0,
                grey_x,
                BatchTargets::Classes(grey_l),
                10,
            )],
            samples: phase1,
            kind: DriftKind::Sudden,
            transition: None,
        }];
        segments.push(Segment {
            concepts: vec![fixed_concept(
                if fused { 1 } else { 0 },
                0,
                late_x,
                BatchTargets::Classes(late_l),
                10,
            )],
            samples: train - phase1,
            kind: DriftKind::Sudden,
            transition: Some(if fused { DriftType::Virtual } else { DriftType::Real }),
        });
        let tests = vec![TestSet {
            concept_id: if fused { 1 } else { 0 },
            name: "holdout".into(),
            block: 0,
            inputs: test_x,
            truth: TestTruth::Classes(test_l),
        }];
        plans.push(TrialPlan {
            label: format!("seed{seed}"),
            init_seed: rng.next_u64(),
            stream_seed: rng.next_u64(),
            growth_seed: rng.next_u64(),
            input_dim: 784,
            initial_outputs: 10,
            schedule: DriftSchedule { segments, batch_size: cfg.batch_size },
            tests,
        });
    }
    Ok(plans)
}

fn split_class_indices(set: &ImageSet<f64>, classes: &[usize], budget: usize) -> Vec<usize> {
    set_indices(set, classes).into_iter().take(budget).collect()
}

fn set_indices(set: &ImageSet<f64>, classes: &[usize]) -> Vec<usize> {
    (0..set.len()).filter(|&i| classes.contains(&set.labels[i])).collect()
}

fn image_rd_plans(
    cfg: &ExperimentConfig,
    source: &ImageSource,
    composition: Composition,
    train_first: usize,
    train_second: usize,
    test_per_concept: usize,
) -> Result<Vec<TrialPlan>, RunError> {
    if !cfg.learner.adapts_shape() {
        return Err(RunError::Scenario(format!(
            "{} cannot widen its output space for new classes",
            cfg.learner.name()
        )));
    }
    let first: Vec<usize> = (0..6).collect();
    let second: Vec<usize> = (6..10).collect();
    let mut plans = Vec::new();
    for seed in holdout_seeds(cfg)? {
        let mut rng = RngStream::new(seed);
        let set = source.load(&mut rng)?;
        let first_budget = train_first + test_per_concept;
        let second_budget = train_second + test_per_concept;
        let first_idx = split_class_indices(&set, &first, first_budget);
        let second_idx = split_class_indices(&set, &second, second_budget);
        if first_idx.len() < first_budget || second_idx.len() < second_budget {
            return Err(RunError::Scenario("image pool too small for class split".into()));
        }
        let (c1_train_x, c1_train_l) =
            image_pool(&set, &first_idx[..train_first], FeatureSet::Grey, &first)?;
        let (c2_train_x, c2_train_l) =
            image_pool(&set, &second_idx[..train_second], FeatureSet::Grey, &second)?;
        let (c1_test_x, c1_test_l) =
            image_pool(&set, &first_idx[train_first..first_budget], FeatureSet::Grey, &first)?;
        let (c2_test_x, c2_test_l) =
            image_pool(&set, &second_idx[train_second..second_budget], FeatureSet::Grey, &second)?;

        let c1_full =
            fixed_concept(0, 0, c1_train_x.clone(), BatchTargets::Classes(c1_train_l.clone()), 6);
        let c2 = fixed_concept(1, 1, c2_train_x, BatchTargets::Classes(c2_train_l), 4);
        let segments = match composition {
            Composition::Split => vec![
                Segment {
                    concepts: vec![c1_full],
                    samples: train_first,
                    kind: DriftKind::Sudden,
                    transition: None,
                },
                Segment {
                    concepts: vec![c2],
                    samples: train_second,
                    kind: DriftKind::Sudden,
                    transition: Some(DriftType::Real),
                },
            ],
            Composition::Shuffled => {
                // recurring context: the first concept keeps appearing
                // interleaved with the second
                let half = train_first / 2;
                let c1_early = fixed_concept(
                    0,
                    0,
                    columns_subset(&c1_train_x, 0..half),
                    BatchTargets::Classes(c1_train_l[..half].to_vec()),
                    6,
                );
                let c1_late = fixed_concept(
                    0,
                    0,
                    columns_subset(&c1_train_x, half..train_first),
                    BatchTargets::Classes(c1_train_l[half..].to_vec()),
                    6,
                );
                vec![
                    Segment {
                        concepts: vec![c1_early],
                        samples: half,
                        kind: DriftKind::Sudden,
                        transition: None,
                    },
                    Segment {
                        concepts: vec![c1_late, c2],
                        samples: (train_first - half) + train_second,
                        kind: DriftKind::RecurringShuffled,
                        transition: Some(DriftType::Real),
                    },
                ]
            }
        };
        let tests = vec![
            TestSet {
                concept_id: 0,
                name: "C1".into(),
                block: 0,
                inputs: c1_test_x,
                truth: TestTruth::Classes(c1_test_l),
            },
            TestSet {
                concept_id: 1,
                name: "C2".into(),
                block: 1,
                inputs: c2_test_x,
                truth: TestTruth::Classes(c2_test_l),
            },
        ];
        plans.push(TrialPlan {
            label: format!("seed{seed}"),
            init_seed: rng.next_u64(),
            stream_seed: rng.next_u64(),
            growth_seed: rng.next_u64(),
            input_dim: 784,
            initial_outputs: 6,
            schedule: DriftSchedule { segments, batch_size: cfg.batch_size },
            tests,
        });
    }
    Ok(plans)
}

fn image_hd_plans(
    cfg: &ExperimentConfig,
    source: &ImageSource,
    train_per_concept: usize,
    test_per_concept: usize,
) -> Result<Vec<TrialPlan>, RunError> {
    if !cfg.learner.adapts_shape() {
        return Err(RunError::Scenario(format!(
            "{} cannot follow a hybrid drift",
            cfg.learner.name()
        )));
    }
    let first: Vec<usize> = (0..6).collect();
    let second: Vec<usize> = (6..10).collect();
    let mut plans = Vec::new();
    for seed in holdout_seeds(cfg)? {
        let mut rng = RngStream::new(seed);
        let set = source.load(&mut rng)?;
        let first_budget = 2 * train_per_concept + test_per_concept;
        let second_budget = train_per_concept + test_per_concept;
        let first_idx = split_class_indices(&set, &first, first_budget);
        let second_idx = split_class_indices(&set, &second, second_budget);
        if first_idx.len() < first_budget || second_idx.len() < second_budget {
            return Err(RunError::Scenario("image pool too small for class split".into()));
        }
        // C1: grey first-six; C3/C4: fused features after the hybrid drift
        let (c1_x, c1_l) =
            image_pool(&set, &first_idx[..train_per_concept], FeatureSet::Grey, &first)?;
        let (c3_x, c3_l) = image_pool(
            &set,
            &first_idx[train_per_concept..2 * train_per_concept],
            FeatureSet::GreyHog,
            &first,
        )?;
        let (c4_x, c4_l) = image_pool(
            &set,
            &second_idx[..train_per_concept],
            FeatureSet::GreyHog,
            &second,
        )?;
        let (c3_test_x, c3_test_l) = image_pool(
            &set,
            &first_idx[2 * train_per_concept..first_budget],
            FeatureSet::GreyHog,
            &first,
        )?;
        let (c4_test_x, c4_test_l) = image_pool(
            &set,
            &second_idx[train_per_concept..second_budget],
            FeatureSet::GreyHog,
            &second,
        )?;

        let segments = vec![
            Segment {
                concepts: vec![fixed_concept(0, 0, c1_x, BatchTargets::Classes(c1_l), 6)],
                samples: train_per_concept,
                kind: DriftKind::Sudden,
                transition: None,
            },
            Segment {
                concepts: vec![
                    fixed_concept(1, 0, c3_x, BatchTargets::Classes(c3_l), 6),
                    fixed_concept(2, 1, c4_x, BatchTargets::Classes(c4_l), 4),
                ],
                samples: 2 * train_per_concept,
                kind: DriftKind::RecurringShuffled,
                transition: Some(DriftType::Hybrid),
            },
        ];
        let tests = vec![
            TestSet {
                concept_id: 1,
                name: "C3".into(),
                block: 0,
                inputs: c3_test_x,
                truth: TestTruth::Classes(c3_test_l),
            },
            TestSet {
                concept_id: 2,
                name: "C4".into(),
                block: 1,
                inputs: c4_test_x,
                truth: TestTruth::Classes(c4_test_l),
            },
        ];
        plans.push(TrialPlan {
            label: format!("seed{seed}"),
            init_seed: rng.next_u64(),
            stream_seed: rng.next_u64(),
            growth_seed: rng.next_u64(),
            input_dim: 784,
            initial_outputs: 6,
            schedule: DriftSchedule { segments, batch_size: cfg.batch_size },
            tests,
        });
    }
    Ok(plans)
}

fn regression_plans(
    cfg: &ExperimentConfig,
    functions: &[RegressionFn],
    train_per_concept: usize,
    test_per_concept: usize,
    calibration: usize,
) -> Result<Vec<TrialPlan>, RunError> {
    if functions.is_empty() {
        return Err(RunError::Scenario("at least one regression concept is required".into()));
    }
    if !cfg.learner.adapts_shape() && functions.len() > 1 {
        return Err(RunError::Scenario(format!(
            "{} cannot add output nodes for new regression concepts",
            cfg.learner.name()
        )));
    }
    let mut plans = Vec::new();
    for seed in holdout_seeds(cfg)? {
        let mut rng = RngStream::new(seed);
        let mut segments = Vec::new();
        let mut tests = Vec::new();
        for (idx, &function) in functions.iter().enumerate() {
            let mut gen_rng = rng.split();
            let (xs, ys) = gen_regression::<f64>(function, train_per_concept, &mut gen_rng);
            let inputs = Mat::from_fn(1, train_per_concept, |_, j| xs[j]);
            segments.push(Segment {
                concepts: vec![fixed_concept(idx, idx, inputs, BatchTargets::Values(ys), 1)],
                samples: train_per_concept,
                kind: DriftKind::Sudden,
                transition: (idx > 0).then_some(DriftType::Real),
            });
            let (cal_x, cal_y) = gen_regression::<f64>(function, calibration, &mut gen_rng);
            let (test_x, test_y) = gen_regression::<f64>(function, test_per_concept, &mut gen_rng);
            tests.push(TestSet {
                concept_id: idx,
                name: match function {
                    RegressionFn::Sinc => "sinc".into(),
                    RegressionFn::Sinus => "sinus".into(),
                    RegressionFn::Gaussian => "gaussian".into(),
                },
                block: idx,
                inputs: Mat::from_fn(1, test_per_concept, |_, j| test_x[j]),
                truth: TestTruth::Regression {
                    calib_inputs: Mat::from_fn(1, calibration, |_, j| cal_x[j]),
                    calib_targets: cal_y,
                    targets: test_y,
                },
            });
        }
        plans.push(TrialPlan {
            label: format!("seed{seed}"),
            init_seed: rng.next_u64(),
            stream_seed: rng.next_u64(),
            growth_seed: rng.next_u64(),
            input_dim: 1,
            initial_outputs: 1,
            schedule: DriftSchedule { segments, batch_size: cfg.batch_size },
            tests,
        });
    }
    Ok(plans)
}
