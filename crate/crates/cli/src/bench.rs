//! Named benchmark presets.
//!
//! Each preset expands into one or more (config, scenario) runs. Desk-scale
//! parameters are the defaults; `--full` restores publication-scale
//! parameters (the image benchmarks then require real IDX data, since the
//! built-in synthetic source is meant for desk-scale verification).

use std::path::PathBuf;

use aoselm::data::RegressionFn;

use crate::config::{EvalProtocol, ExperimentConfig, LearnerKind};
use crate::runner::RunError;
use crate::scenario::{Composition, ImageSource, Scenario};

/// Default master seed for the cross-validated synthetic benchmarks and the
/// holdout seed base for the image benchmarks.
pub const DEFAULT_SEED: u64 = 3;
/// Seed of the built-in synthetic digit templates.
pub const SYNTH_TEMPLATE_SEED: u64 = 4242;
/// Per-class pool size of the built-in synthetic image source.
pub const SYNTH_PER_CLASS: usize = 1600;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchName {
    Sea,
    Stagger,
    MnistVd,
    MnistRd,
    MnistHd,
    RegressionRd,
}

impl BenchName {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sea" => Some(Self::Sea),
            "stagger" => Some(Self::Stagger),
            "mnist-vd" => Some(Self::MnistVd),
            "mnist-rd" => Some(Self::MnistRd),
            "mnist-hd" => Some(Self::MnistHd),
            "regression-rd" => Some(Self::RegressionRd),
            _ => None,
        }
    }

    pub const ALL: [&'static str; 6] =
        ["sea", "stagger", "mnist-vd", "mnist-rd", "mnist-hd", "regression-rd"];
}

#[derive(Debug, Clone, Default)]
pub struct BenchOptions {
    pub full: bool,
    /// Directory holding `train-images-idx3-ubyte` / `train-labels-idx1-ubyte`.
    pub data_dir: Option<PathBuf>,
    pub learners: Option<Vec<LearnerKind>>,
    pub seeds: Option<Vec<u64>>,
    pub overrides: Vec<(String, String)>,
}

#[derive(Debug)]
pub struct BenchRun {
    pub tag: String,
    pub config: ExperimentConfig,
    pub scenario: Scenario,
}

fn image_source(opts: &BenchOptions) -> ImageSource {
    match &opts.data_dir {
        Some(dir) => ImageSource::Idx {
            images: dir.join("train-images-idx3-ubyte"),
            labels: dir.join("train-labels-idx1-ubyte"),
        },
        None => ImageSource::Synthetic {
            base_seed: SYNTH_TEMPLATE_SEED,
            per_class: if opts.full { 7000 } else { SYNTH_PER_CLASS },
        },
    }
}

/// Keys consumed by scenarios rather than the learner config.
const SCENARIO_KEYS: [&str; 7] =
    ["train", "test", "samples", "noise", "calibration", "train1", "train2"];

fn apply_common(
    cfg: &mut ExperimentConfig,
    opts: &BenchOptions,
) -> Result<(), RunError> {
    if let Some(seeds) = &opts.seeds {
        cfg.seeds = seeds.clone();
    }
    for (key, value) in &opts.overrides {
        if !SCENARIO_KEYS.contains(&key.as_str()) {
            cfg.set(key, value)?;
        }
    }
    Ok(())
}

fn scenario_override(opts: &BenchOptions, key: &str, default: usize) -> Result<usize, RunError> {
    match opts.overrides.iter().rev().find(|(k, _)| k == key) {
        None => Ok(default),
        Some((_, v)) => v
            .parse()
            .map_err(|e| RunError::Scenario(format!("bad scenario override {key}={v}: {e}"))),
    }
}

fn scenario_override_f64(opts: &BenchOptions, key: &str, default: f64) -> Result<f64, RunError> {
    match opts.overrides.iter().rev().find(|(k, _)| k == key) {
        None => Ok(default),
        Some((_, v)) => v
            .parse()
            .map_err(|e| RunError::Scenario(format!("bad scenario override {key}={v}: {e}"))),
    }
}

fn learners_or(opts: &BenchOptions, default: &[LearnerKind]) -> Vec<LearnerKind> {
    opts.learners.clone().unwrap_or_else(|| default.to_vec())
}

/// Expands a named benchmark into its runs.
pub fn bench_runs(name: BenchName, opts: &BenchOptions) -> Result<Vec<BenchRun>, RunError> {
    let mut runs = Vec::new();
    match name {
        BenchName::Sea => {
            let scenario = Scenario::Sea {
                samples_per_concept: scenario_override(opts, "samples", 20_000)?,
                label_noise: scenario_override_f64(opts, "noise", 0.1)?,
            };
            for learner in learners_or(
                opts,
                &[
                    LearnerKind::Oselm,
                    LearnerKind::Ceoselm,
                    LearnerKind::Aoselm1,
                    LearnerKind::Aoselm2,
                ],
            ) {
                let mut cfg = ExperimentConfig {
                    learner,
                    hidden_nodes: if opts.full { 3000 } else { 1000 },
                    added_nodes: learner.growth_at_drift(500),
                    ridge: 100.0,
                    batch_size: 1000,
                    seeds: vec![DEFAULT_SEED],
                    evaluation: EvalProtocol::KFold { folds: 5 },
                    ..ExperimentConfig::default()
                };
                apply_common(&mut cfg, opts)?;
                runs.push(BenchRun { tag: learner.name().into(), config: cfg, scenario: scenario.clone() });
            }
        }
        BenchName::Stagger => {
            let scenario = Scenario::Stagger {
                samples_per_concept: scenario_override(opts, "samples", 4_400)?,
            };
            for learner in learners_or(
                opts,
                &[
                    LearnerKind::Oselm,
                    LearnerKind::Ceoselm,
                    LearnerKind::Aoselm1,
                    LearnerKind::Aoselm2,
                ],
            ) {
                let mut cfg = ExperimentConfig {
                    learner,
                    hidden_nodes: 9,
                    added_nodes: learner.growth_at_drift(5),
                    ridge: 100.0,
                    batch_size: 440,
                    seeds: vec![DEFAULT_SEED],
                    evaluation: EvalProtocol::KFold { folds: 5 },
                    ..ExperimentConfig::default()
                };
                apply_common(&mut cfg, opts)?;
                runs.push(BenchRun { tag: learner.name().into(), config: cfg, scenario: scenario.clone() });
            }
        }
        BenchName::MnistVd => {
            let source = image_source(opts);
            let (train, test, l0) = if opts.full { (60_000, 10_000, 2000) } else { (10_000, 2_000, 500) };
            let train = scenario_override(opts, "train", train)?;
            let test = scenario_override(opts, "test", test)?;
            for (tag, fused) in [("vd-fused", true), ("grey-baseline", false)] {
                let mut cfg = ExperimentConfig {
                    learner: LearnerKind::Aoselm1,
                    hidden_nodes: l0,
                    ridge: 100.0,
                    batch_size: 1000,
                    seeds: (0..5).map(|t| DEFAULT_SEED + t).collect(),
                    evaluation: EvalProtocol::Holdout { trials: 5 },
                    ..ExperimentConfig::default()
                };
                apply_common(&mut cfg, opts)?;
                runs.push(BenchRun {
                    tag: tag.into(),
                    config: cfg,
                    scenario: Scenario::ImageVd { source: source.clone(), train, test, fused },
                });
            }
        }
        BenchName::MnistRd => {
            let source = image_source(opts);
            let (train, test, l0) = if opts.full { (30_000, 5_000, 2000) } else { (4_000, 1_000, 500) };
            let train = scenario_override(opts, "train", train)?;
            let train_first = scenario_override(opts, "train1", train)?;
            let train_second = scenario_override(opts, "train2", train)?;
            let test = scenario_override(opts, "test", test)?;
            for composition in [Composition::Split, Composition::Shuffled] {
                for learner in learners_or(opts, &[LearnerKind::Aoselm1, LearnerKind::Aoselm2]) {
                    let mut cfg = ExperimentConfig {
                        learner,
                        hidden_nodes: l0,
                        added_nodes: learner.growth_at_drift(l0 / 4),
                        ridge: 100.0,
                        batch_size: 1000,
                        seeds: (0..5).map(|t| DEFAULT_SEED + t).collect(),
                        evaluation: EvalProtocol::Holdout { trials: 5 },
                        ..ExperimentConfig::default()
                    };
                    apply_common(&mut cfg, opts)?;
                    let comp_tag = match composition {
                        Composition::Split => "split",
                        Composition::Shuffled => "shuffled",
                    };
                    runs.push(BenchRun {
                        tag: format!("{comp_tag}-{}", learner.name()),
                        config: cfg,
                        scenario: Scenario::ImageRd {
                            source: source.clone(),
                            composition,
                            train_first,
                            train_second,
                            test_per_concept: test,
                        },
                    });
                }
            }
        }
        BenchName::MnistHd => {
            let source = image_source(opts);
            let (train, test, l0) = if opts.full { (20_000, 5_000, 2000) } else { (3_000, 1_000, 500) };
            let train = scenario_override(opts, "train", train)?;
            let test = scenario_override(opts, "test", test)?;
            let mut cfg = ExperimentConfig {
                learner: LearnerKind::Aoselm1,
                hidden_nodes: l0,
                ridge: 100.0,
                batch_size: 1000,
                seeds: (0..5).map(|t| DEFAULT_SEED + t).collect(),
                evaluation: EvalProtocol::Holdout { trials: 5 },
                ..ExperimentConfig::default()
            };
            apply_common(&mut cfg, opts)?;
            runs.push(BenchRun {
                tag: "hd-aoselm1".into(),
                config: cfg,
                scenario: Scenario::ImageHd {
                    source,
                    train_per_concept: train,
                    test_per_concept: test,
                },
            });
        }
        BenchName::RegressionRd => {
            let (train, test) = if opts.full { (50_000, 5_000) } else { (20_000, 2_000) };
            let train = scenario_override(opts, "train", train)?;
            let test = scenario_override(opts, "test", test)?;
            let calibration = scenario_override(opts, "calibration", 1_000)?;
            let mut cfg = ExperimentConfig {
                learner: LearnerKind::Aoselm1,
                hidden_nodes: 100,
                ridge: 10_000.0,
                batch_size: 1000,
                seeds: vec![DEFAULT_SEED, DEFAULT_SEED + 1, DEFAULT_SEED + 2],
                evaluation: EvalProtocol::Holdout { trials: 3 },
                ..ExperimentConfig::default()
            };
            apply_common(&mut cfg, opts)?;
            runs.push(BenchRun {
                tag: "regression-rd".into(),
                config: cfg,
                scenario: Scenario::RegressionRd {
                    functions: vec![
                        RegressionFn::Sinc,
                        RegressionFn::Sinus,
                        RegressionFn::Gaussian,
                    ],
                    train_per_concept: train,
                    test_per_concept: test,
                    calibration,
                },
            });
        }
    }
    Ok(runs)
}
