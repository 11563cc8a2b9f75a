//! Acceptance suite: one test per criterion, each printing a pass line.
//!
//! Run with `cargo test -p aoselm-cli --test acceptance -- --nocapture`
//! (tests are independent; the heavier streams take minutes on one core).

use aoselm::adapt::{adapt_real, adapt_virtual, rank_snapshot, underfit_check};
use aoselm::data::digits::SyntheticDigits;
use aoselm::data::RegressionFn;
use aoselm::linalg::{random_matrix, ridge_solve, RandomScheme};
use aoselm::matrix::DenseMatrix;
use aoselm::model::{one_hot_block, ConceptScope, ElmModel, InitScheme, LabeledBatch};
use aoselm::monitor::{DriftMonitor, MonitorState};
use aoselm::sequential::{ceoselm_update, oselm_update, GrowthSpec};
use aoselm::{Mat, Model, RngStream};
use aoselm_cli::bench::{bench_runs, BenchName, BenchOptions};
use aoselm_cli::config::{EvalProtocol, ExperimentConfig, LearnerKind};
use aoselm_cli::model_io::{load_model, save_model};
use aoselm_cli::runner::{run_experiment, ConceptScore, Report};
use aoselm_cli::scenario::{Composition, ImageSource, Scenario};

fn pass(number: u32, name: &str) {
    println!("acceptance {number:02} ({name}): PASS");
}

fn random_model(rng: &mut RngStream, d: usize, l: usize, m: usize, c: f64) -> Model {
    ElmModel::init(d, l, m, InitScheme::Ros, c, rng).unwrap()
}

fn random_batch(model: &Model, n: usize, rng: &mut RngStream) -> LabeledBatch<f64> {
    let x: Mat = random_matrix(rng, model.input_dim(), n, RandomScheme::Uniform);
    let labels: Vec<usize> = (0..n).map(|_| rng.next_index(model.output_dim())).collect();
    let t = one_hot_block(&labels, 0, model.output_dim(), model.output_dim());
    LabeledBatch::new(x, t).unwrap()
}

/// Criterion 1: a run of sequential updates equals the offline ridge
/// solution on the concatenated data.
#[test]
fn c01_sequential_matches_offline_ridge() {
    let start = std::time::Instant::now();
    let mut rng = RngStream::new(101);
    for instance in 0..20 {
        let d = 2 + rng.next_index(8);
        let l = 5 + rng.next_index(46); // <= 50
        let m = 1 + rng.next_index(5);
        let c = [1.0, 10.0, 100.0, 1000.0][instance % 4];
        let total = 50 + rng.next_index(451); // <= 500
        let mut model = random_model(&mut rng, d, l, m, c);
        let frozen = model.clone();

        // random batch split of the stream
        let mut remaining = total;
        let mut h_all: Option<Mat> = None;
        let mut t_all: Option<Mat> = None;
        while remaining > 0 {
            let n = (1 + rng.next_index(120)).min(remaining);
            remaining -= n;
            let batch = random_batch(&model, n, &mut rng);
            let h = frozen.hidden_activations(batch.inputs()).unwrap();
            h_all = Some(match h_all {
                None => h,
                Some(acc) => acc.vstack(&h).unwrap(),
            });
            t_all = Some(match t_all {
                None => batch.targets().clone(),
                Some(acc) => acc.vstack(batch.targets()).unwrap(),
            });
            oselm_update(&mut model, &batch).unwrap();
        }
        let offline = ridge_solve(&h_all.unwrap(), &t_all.unwrap(), c).unwrap();
        let err = model.output_weights().sub(&offline).unwrap().max_abs();
        let scale = offline.max_abs().max(1e-12);
        assert!(
            err / scale <= 1e-8,
            "instance {instance}: relative error {:.3e}",
            err / scale
        );
    }
    assert!(start.elapsed().as_secs_f64() < 5.0, "took {:?}", start.elapsed());
    pass(1, "sequential equals offline ridge");
}

/// Criterion 2: hidden-node growth matches the direct solve over the grown
/// hidden matrix with history replayed (zero block for past data).
#[test]
fn c02_growth_matches_direct_grown_solve() {
    let start = std::time::Instant::now();
    let mut rng = RngStream::new(202);
    for instance in 0..12 {
        let d = 2 + rng.next_index(5);
        let l0 = 2 + rng.next_index(7); // <= 8
        let added = 1 + rng.next_index(4); // <= 4
        let m = 1 + rng.next_index(3);
        let c = [5.0, 50.0, 500.0][instance % 3];
        let mut model = random_model(&mut rng, d, l0, m, c);
        let frozen = model.clone();

        let hist = random_batch(&model, 10 + rng.next_index(30), &mut rng);
        oselm_update(&mut model, &hist).unwrap();
        let growth_batch = random_batch(&model, 2 + rng.next_index(10), &mut rng);
        let mut growth = GrowthSpec::new(added, rng.split());
        ceoselm_update(&mut model, &growth_batch, &mut growth).unwrap();

        // replay all history on the grown basis
        let h1 = frozen.hidden_activations(hist.inputs()).unwrap();
        let h2 = model.hidden_activations(growth_batch.inputs()).unwrap();
        let h_full = h1
            .hstack(&Mat::zeros(h1.rows(), added))
            .unwrap()
            .vstack(&h2)
            .unwrap();
        let t_full = hist.targets().clone().vstack(growth_batch.targets()).unwrap();
        let direct_beta = ridge_solve(&h_full, &t_full, c).unwrap();
        let mut direct_k = h_full.gram();
        direct_k.add_diag(1.0 / c);

        let beta_err = model.output_weights().sub(&direct_beta).unwrap().max_abs()
            / direct_beta.max_abs().max(1e-12);
        let k_err = model.autocorrelation().sub(&direct_k).unwrap().max_abs()
            / direct_k.max_abs().max(1e-12);
        assert!(beta_err <= 1e-8, "instance {instance}: beta error {beta_err:.3e}");
        assert!(k_err <= 1e-8, "instance {instance}: K error {k_err:.3e}");
    }
    assert!(start.elapsed().as_secs_f64() < 5.0, "took {:?}", start.elapsed());
    pass(2, "growth equals direct grown solve");
}

fn stagger_config(learner: LearnerKind) -> (ExperimentConfig, Scenario) {
    let cfg = ExperimentConfig {
        learner,
        hidden_nodes: 9,
        added_nodes: learner.growth_at_drift(5),
        ridge: 100.0,
        batch_size: 440,
        seeds: vec![3],
        evaluation: EvalProtocol::KFold { folds: 5 },
        ..ExperimentConfig::default()
    };
    (cfg, Scenario::Stagger { samples_per_concept: 4_400 })
}

fn concept_accuracy(report: &Report, name: &str) -> f64 {
    report.concept_mean(name).unwrap_or_else(|| panic!("missing concept {name}"))
}

/// Criterion 3: STAGGER reproduction with nine hidden nodes.
#[test]
fn c03_stagger_reproduction() {
    let start = std::time::Instant::now();
    let (cfg, scenario) = stagger_config(LearnerKind::Aoselm1);
    let adaptive = run_experiment(&cfg, &scenario).unwrap();
    for name in ["C1", "C2", "C3"] {
        let mean = concept_accuracy(&adaptive, name);
        assert!(mean >= 0.99, "{name} mean accuracy {mean:.4} below 0.99");
    }
    let (cfg, scenario) = stagger_config(LearnerKind::Oselm);
    let plain = run_experiment(&cfg, &scenario).unwrap();
    let c1 = concept_accuracy(&plain, "C1");
    assert!(c1 <= 0.60, "non-adaptive C1 accuracy {c1:.4} above 0.60");
    assert!(start.elapsed().as_secs_f64() < 120.0, "took {:?}", start.elapsed());
    pass(3, "stagger reproduction");
}

fn sea_config(learner: LearnerKind) -> (ExperimentConfig, Scenario) {
    let cfg = ExperimentConfig {
        learner,
        hidden_nodes: 1000,
        added_nodes: learner.growth_at_drift(500),
        ridge: 100.0,
        batch_size: 1000,
        seeds: vec![3],
        evaluation: EvalProtocol::KFold { folds: 5 },
        ..ExperimentConfig::default()
    };
    (cfg, Scenario::Sea { samples_per_concept: 20_000, label_noise: 0.1 })
}

/// Criterion 4: SEA reproduction at the desk preset.
#[test]
fn c04_sea_reproduction() {
    let start = std::time::Instant::now();
    let (cfg, scenario) = sea_config(LearnerKind::Aoselm1);
    let adaptive = run_experiment(&cfg, &scenario).unwrap();
    let c4 = concept_accuracy(&adaptive, "C4");
    assert!(
        (c4 - 0.9034).abs() <= 0.015,
        "adaptive C4 accuracy {c4:.4} outside 0.9034 +/- 0.015"
    );
    let (cfg, scenario) = sea_config(LearnerKind::Oselm);
    let plain = run_experiment(&cfg, &scenario).unwrap();
    let adaptive_c3 = concept_accuracy(&adaptive, "C3");
    let plain_c3 = concept_accuracy(&plain, "C3");
    assert!(
        plain_c3 <= adaptive_c3 - 0.04,
        "non-adaptive C3 {plain_c3:.4} not 4 points below adaptive {adaptive_c3:.4}"
    );
    assert!(start.elapsed().as_secs_f64() < 900.0, "took {:?}", start.elapsed());
    pass(4, "sea reproduction");
}

fn synth_source() -> ImageSource {
    ImageSource::Synthetic {
        base_seed: aoselm_cli::bench::SYNTH_TEMPLATE_SEED,
        per_class: aoselm_cli::bench::SYNTH_PER_CLASS,
    }
}

fn image_config(learner: LearnerKind, delta_l: usize) -> ExperimentConfig {
    ExperimentConfig {
        learner,
        hidden_nodes: 500,
        added_nodes: delta_l,
        ridge: 100.0,
        batch_size: 1000,
        seeds: vec![3, 4, 5, 6, 7],
        evaluation: EvalProtocol::Holdout { trials: 5 },
        ..ExperimentConfig::default()
    }
}

/// Criterion 5: training through the feature-space growth strictly beats the
/// grey-only model trained identically, on every seed.
#[test]
fn c05_virtual_drift_ordering() {
    let start = std::time::Instant::now();
    let cfg = image_config(LearnerKind::Aoselm1, 0);
    let fused = run_experiment(
        &cfg,
        &Scenario::ImageVd { source: synth_source(), train: 10_000, test: 2_000, fused: true },
    )
    .unwrap();
    let grey = run_experiment(
        &cfg,
        &Scenario::ImageVd { source: synth_source(), train: 10_000, test: 2_000, fused: false },
    )
    .unwrap();
    assert_eq!(fused.trials.len(), 5);
    for (f, g) in fused.trials.iter().zip(&grey.trials) {
        let fa = match f.concepts[0].score {
            ConceptScore::Classification { accuracy, .. } => accuracy,
            _ => unreachable!(),
        };
        let ga = match g.concepts[0].score {
            ConceptScore::Classification { accuracy, .. } => accuracy,
            _ => unreachable!(),
        };
        assert!(
            fa > ga,
            "trial {}: fused {fa:.4} not strictly above grey {ga:.4}",
            f.label
        );
    }
    assert!(start.elapsed().as_secs_f64() < 600.0, "took {:?}", start.elapsed());
    pass(5, "virtual-drift ordering");
}

/// Criterion 6: sudden-drift forgetting pattern.
#[test]
fn c06_sudden_drift_forgetting_pattern() {
    let start = std::time::Instant::now();
    let split = |learner: LearnerKind, delta_l: usize| {
        run_experiment(
            &image_config(learner, delta_l),
            &Scenario::ImageRd {
                source: synth_source(),
                composition: Composition::Split,
                train_first: 4_000,
                train_second: 4_000,
                test_per_concept: 1_000,
            },
        )
        .unwrap()
    };
    let keep = split(LearnerKind::Aoselm1, 0);
    let grow = split(LearnerKind::Aoselm2, 125); // delta_L = L0 / 4

    let keep_c1 = concept_accuracy(&keep, "C1");
    let grow_c1 = concept_accuracy(&grow, "C1");
    let keep_c2 = concept_accuracy(&keep, "C2");
    let grow_c2 = concept_accuracy(&grow, "C2");
    assert!(
        (keep_c2 - grow_c2).abs() <= 0.03,
        "new-concept accuracies diverge: {keep_c2:.4} vs {grow_c2:.4}"
    );

    let shuffled = run_experiment(
        &image_config(LearnerKind::Aoselm1, 0),
        &Scenario::ImageRd {
            source: synth_source(),
            composition: Composition::Shuffled,
            train_first: 4_000,
            train_second: 4_000,
            test_per_concept: 1_000,
        },
    )
    .unwrap();
    let sc1 = concept_accuracy(&shuffled, "C1");
    let sc2 = concept_accuracy(&shuffled, "C2");
    assert!(
        (sc1 - sc2).abs() <= 0.05,
        "recurring composition spreads concepts: {sc1:.4} vs {sc2:.4}"
    );

    assert!(start.elapsed().as_secs_f64() < 600.0, "took {:?}", start.elapsed());
    // The growth-induced forgetting clause. The sequential update is pinned
    // (by criterion 2) to reproduce the offline ridge solution exactly, and
    // that solution provably retains the old concept: its loss term touches
    // only the old weight rows, so added nodes absorb the new concept's
    // cancellation instead of erasing old-concept memory. The measured
    // differential stays near six points under every legitimate
    // parameterization tried; thirty points would require a growth step that
    // forgets accumulated cross-correlation, which criterion 2 forbids.
    assert!(
        grow_c1 <= keep_c1 - 0.30,
        "growth reduced old-concept accuracy by {:.1} points ({keep_c1:.4} -> {grow_c1:.4}); \
         the thirty-point reduction is unattainable with the exact sequential update \
         (see decisions ledger)",
        (keep_c1 - grow_c1) * 100.0
    );
    pass(6, "sudden-drift forgetting pattern");
}

/// Criterion 7: rank diagnostic flags growth steps the batch cannot support.
#[test]
fn c07_rank_diagnostic() {
    let start = std::time::Instant::now();
    let l0 = 150;
    let added = 120;
    let c = 1e13;
    let mut flagged_small = 0;
    let mut unflagged_large = 0;
    let seeds = [900u64, 901, 902, 903, 904];
    for &seed in &seeds {
        for (batch_n, want_flag) in [(30usize, true), (240, false)] {
            let mut rng = RngStream::new(seed);
            let mut model = random_model(&mut rng, 20, l0, 4, c);
            for _ in 0..2 {
                let batch = random_batch(&model, 1000, &mut rng);
                oselm_update(&mut model, &batch).unwrap();
            }
            let before = rank_snapshot(&model);
            let batch = random_batch(&model, batch_n, &mut rng);
            let mut growth = GrowthSpec::new(added, rng.split());
            ceoselm_update(&mut model, &batch, &mut growth).unwrap();
            let verdict = underfit_check(&model, before);
            if want_flag && verdict.flagged {
                flagged_small += 1;
            }
            if !want_flag && !verdict.flagged {
                unflagged_large += 1;
            }
        }
    }
    assert!(flagged_small >= 4, "small-batch growth flagged on {flagged_small}/5 seeds");
    assert!(unflagged_large >= 4, "large-batch growth unflagged on {unflagged_large}/5 seeds");
    assert!(start.elapsed().as_secs_f64() < 300.0, "took {:?}", start.elapsed());
    pass(7, "rank diagnostic");
}

fn regression_scenario(functions: Vec<RegressionFn>) -> Scenario {
    Scenario::RegressionRd {
        functions,
        train_per_concept: 20_000,
        test_per_concept: 2_000,
        calibration: 1_000,
    }
}

fn regression_outcome(report: &Report, name: &str) -> (f64, f64) {
    for trial in &report.trials {
        for c in &trial.concepts {
            if c.name == name {
                if let ConceptScore::Regression { rmse, gain, .. } = c.score {
                    return (rmse, gain);
                }
            }
        }
    }
    panic!("missing regression concept {name}");
}

/// Criterion 8: regression drift recovery through amplification gains that
/// grow as more drifts dilute each concept.
#[test]
fn c08_regression_recovery_and_gain_monotonicity() {
    let start = std::time::Instant::now();
    let cfg = ExperimentConfig {
        learner: LearnerKind::Aoselm1,
        hidden_nodes: 100,
        ridge: 10_000.0,
        batch_size: 1000,
        seeds: vec![3],
        evaluation: EvalProtocol::Holdout { trials: 1 },
        ..ExperimentConfig::default()
    };
    let one_drift = run_experiment(
        &cfg,
        &regression_scenario(vec![RegressionFn::Sinc, RegressionFn::Sinus]),
    )
    .unwrap();
    let (sinc_rmse_1, sinc_gain_1) = regression_outcome(&one_drift, "sinc");
    let (sinus_rmse_1, sinus_gain_1) = regression_outcome(&one_drift, "sinus");
    assert!(sinc_rmse_1 <= 0.10, "sinc after one drift: rmse {sinc_rmse_1:.4}");
    assert!(sinus_rmse_1 <= 0.05, "sinus after one drift: rmse {sinus_rmse_1:.4}");

    let two_drifts = run_experiment(
        &cfg,
        &regression_scenario(vec![
            RegressionFn::Sinc,
            RegressionFn::Sinus,
            RegressionFn::Gaussian,
        ]),
    )
    .unwrap();
    for name in ["sinc", "sinus", "gaussian"] {
        let (rmse, _) = regression_outcome(&two_drifts, name);
        assert!(rmse <= 0.15, "{name} after two drifts: rmse {rmse:.4}");
    }
    let (_, sinc_gain_2) = regression_outcome(&two_drifts, "sinc");
    let (_, sinus_gain_2) = regression_outcome(&two_drifts, "sinus");
    assert!(
        sinc_gain_2 > sinc_gain_1,
        "sinc gain must grow across drifts: {sinc_gain_1:.3} -> {sinc_gain_2:.3}"
    );
    assert!(
        sinus_gain_2 > sinus_gain_1,
        "sinus gain must grow across drifts: {sinus_gain_1:.3} -> {sinus_gain_2:.3}"
    );
    assert!(start.elapsed().as_secs_f64() < 300.0, "took {:?}", start.elapsed());
    pass(8, "regression recovery and gain monotonicity");
}

/// Criterion 9: invariance posse over random instances.
#[test]
fn c09_invariance_suite() {
    let start = std::time::Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut rng = RngStream::new(909);
    for instance in 0..100 {
        let d = 2 + rng.next_index(6);
        let l = 3 + rng.next_index(10);
        let m = 2 + rng.next_index(4);
        let mut model = random_model(&mut rng, d, l, m, 10.0);
        let batch = random_batch(&model, 10 + rng.next_index(20), &mut rng);
        oselm_update(&mut model, &batch).unwrap();

        // K symmetry
        assert!(model.autocorrelation().asymmetry() <= 1e-12);

        let x: Mat = random_matrix(&mut rng, d, 7, RandomScheme::Uniform);
        let scores_before = model.predict_scores(&x).unwrap();
        let h_before = model.hidden_activations(&x).unwrap();

        // VD zero-pad identity (exact)
        let mut grown = model.clone();
        let new_d = d + 1 + rng.next_index(4);
        adapt_virtual(&mut grown, new_d, &mut rng).unwrap();
        let mut padded = Mat::zeros(new_d, 7);
        padded.copy_block(0, 0, &x);
        assert_eq!(grown.hidden_activations(&padded).unwrap(), h_before);
        assert_eq!(grown.predict_scores(&padded).unwrap(), scores_before);

        // RD old-column identity (exact) and marginalization isolation
        let labels_before = model.classify(&x, ConceptScope::Concept(0)).unwrap();
        let mut widened = model.clone();
        adapt_real(&mut widened, 1 + rng.next_index(3), true).unwrap();
        let wide_scores = widened.predict_scores(&x).unwrap();
        for i in 0..7 {
            for j in 0..m {
                assert_eq!(wide_scores.get(i, j), scores_before.get(i, j));
            }
        }
        assert_eq!(widened.classify(&x, ConceptScope::Concept(0)).unwrap(), labels_before);

        // save/load bitwise round trip
        if instance < 25 {
            let path = dir.path().join(format!("m{instance}.bin"));
            save_model(&widened, &[instance as u64], &path).unwrap();
            let (loaded, _) = load_model(&path).unwrap();
            assert_eq!(loaded, widened);
            assert_eq!(loaded.predict_scores(&x).unwrap(), wide_scores);
        }
    }
    assert!(start.elapsed().as_secs_f64() < 120.0, "took {:?}", start.elapsed());
    pass(9, "invariance suite");
}

/// Criterion 10: drift monitor fires within one window of a real change and
/// never on a stationary stream.
#[test]
fn c10_drift_monitor() {
    // step 0.9 -> 0.5 detected within one window of the change point
    for seed in 0..10u64 {
        let mut rng = RngStream::new(1000 + seed);
        let mut monitor = DriftMonitor::with_defaults();
        let change_at = 3_000usize;
        let mut fired = None;
        for i in 0..(change_at + 2_000) {
            let p = if i < change_at { 0.9 } else { 0.5 };
            if monitor.observe(rng.bernoulli(p)) == MonitorState::Drift {
                fired = Some(i);
                break;
            }
        }
        let fired = fired.expect("drift must fire after the step");
        assert!(fired >= change_at, "seed {seed}: fired before the change at {fired}");
        assert!(
            fired < change_at + monitor.config().window,
            "seed {seed}: fired at {fired}, later than one window after {change_at}"
        );
    }
    // stationary stream: no drift over 1e5 observations
    for seed in 0..10u64 {
        let mut rng = RngStream::new(2000 + seed);
        let mut monitor = DriftMonitor::with_defaults();
        for i in 0..100_000 {
            assert_ne!(
                monitor.observe(rng.bernoulli(0.9)),
                MonitorState::Drift,
                "seed {seed}: false alarm at {i}"
            );
        }
    }
    pass(10, "drift monitor");
}

/// The named benchmarks stay wired to the acceptance parameters.
#[test]
fn bench_presets_expand() {
    let opts = BenchOptions::default();
    for name in BenchName::ALL {
        let runs = bench_runs(BenchName::parse(name).unwrap(), &opts).unwrap();
        assert!(!runs.is_empty(), "{name} expanded to no runs");
        for run in &runs {
            run.config.validate().unwrap();
        }
    }
    let digits = SyntheticDigits::new(aoselm_cli::bench::SYNTH_TEMPLATE_SEED, 10);
    assert_eq!(digits.classes(), 10);

    // non-adaptive learners are rejected on shape-changing scenarios
    let cfg = image_config(LearnerKind::Oselm, 0);
    let err = run_experiment(
        &cfg,
        &Scenario::ImageVd { source: synth_source(), train: 2_000, test: 500, fused: true },
    );
    assert!(err.is_err());
    // the pinned DenseMatrix alias stays exported for downstream users
    let _: DenseMatrix<f64> = Mat::zeros(1, 1);
}
