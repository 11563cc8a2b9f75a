//! End-to-end checks of the command-line surface and report plumbing.

use std::path::Path;
use std::process::Command;

use aoselm_cli::config::{EvalProtocol, ExperimentConfig, LearnerKind};
use aoselm_cli::report::{aggregate_csv, report_csv};
use aoselm_cli::runner::run_experiment;
use aoselm_cli::scenario::Scenario;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aoselm"))
}

fn small_stagger() -> (ExperimentConfig, Scenario) {
    let cfg = ExperimentConfig {
        learner: LearnerKind::Aoselm1,
        hidden_nodes: 9,
        ridge: 100.0,
        batch_size: 200,
        seeds: vec![3],
        evaluation: EvalProtocol::KFold { folds: 5 },
        ..ExperimentConfig::default()
    };
    (cfg, Scenario::Stagger { samples_per_concept: 1_000 })
}

#[test]
fn gen_eval_roundtrip_through_binary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("stagger.csv");
    let out = dir.path().join("run");

    let status = bin()
        .args(["gen", "--dataset", "stagger", "--concept", "1", "--n", "400", "--seed", "11"])
        .arg("--out")
        .arg(&csv)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(csv.exists());

    // train a small preset and save artifacts
    let status = bin()
        .args(["train", "--bench", "stagger", "--set", "samples=1000", "--set", "batch=200"])
        .args(["--learners", "aoselm1"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    for artifact in ["report.csv", "config_resolved.txt", "model_fold0.bin", "trace_fold0.csv"] {
        assert!(out.join(artifact).exists(), "missing {artifact}");
    }

    // evaluate the saved model on the generated csv (concept 0 block)
    let output = bin()
        .arg("eval")
        .arg("--model")
        .arg(out.join("model_fold4.bin"))
        .arg("--data")
        .arg(&csv)
        .args(["--concept", "0"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("accuracy"), "unexpected eval output: {text}");

    // aggregate the report
    let agg = dir.path().join("agg.csv");
    let status = bin()
        .args(["report", "--inputs"])
        .arg(out.join("report.csv"))
        .arg("--out")
        .arg(&agg)
        .status()
        .unwrap();
    assert!(status.success());
    let agg_text = std::fs::read_to_string(&agg).unwrap();
    assert!(agg_text.starts_with("concept,metric,mean,std,n"));
    assert!(agg_text.contains("C1,accuracy"));
}

#[test]
fn failures_exit_nonzero_with_error_line() {
    let output = bin().args(["bench", "no-such-bench"]).output().unwrap();
    assert!(!output.status.success());
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.starts_with("error:"), "stderr was: {err}");

    let output = bin()
        .args(["eval", "--model", "/nonexistent.bin", "--data", "/nonexistent.csv"])
        .output()
        .unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).starts_with("error:"));
}

#[test]
fn reports_are_reproducible_modulo_timings() {
    let (cfg, scenario) = small_stagger();
    let a = run_experiment(&cfg, &scenario).unwrap();
    let b = run_experiment(&cfg, &scenario).unwrap();
    let strip = |report| {
        report_csv(report)
            .lines()
            .filter(|l| !l.contains("wall_ms"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(a.resolved, b.resolved);
    // models are identical too
    for (ta, tb) in a.trials.iter().zip(&b.trials) {
        assert_eq!(ta.model, tb.model);
    }
}

#[test]
fn drift_markers_precede_dimension_changes() {
    // the driver must never feed a batch the model cannot accept; a passing
    // run across a virtual drift demonstrates the ordering
    let cfg = ExperimentConfig {
        learner: LearnerKind::Aoselm1,
        hidden_nodes: 50,
        ridge: 100.0,
        batch_size: 500,
        seeds: vec![5, 6],
        evaluation: EvalProtocol::Holdout { trials: 2 },
        ..ExperimentConfig::default()
    };
    let report = run_experiment(
        &cfg,
        &Scenario::ImageVd {
            source: aoselm_cli::scenario::ImageSource::Synthetic {
                base_seed: aoselm_cli::bench::SYNTH_TEMPLATE_SEED,
                per_class: 300,
            },
            train: 2_000,
            test: 400,
            fused: true,
        },
    )
    .unwrap();
    for trial in &report.trials {
        assert_eq!(trial.model.input_dim(), 865);
    }
}

#[test]
fn aggregate_handles_multiple_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, scenario) = small_stagger();
    let report = run_experiment(&cfg, &scenario).unwrap();
    let p1 = dir.path().join("r1.csv");
    let p2 = dir.path().join("r2.csv");
    std::fs::write(&p1, report_csv(&report)).unwrap();
    std::fs::write(&p2, report_csv(&report)).unwrap();
    let agg = aggregate_csv(&[p1, p2]).unwrap();
    let line = agg
        .lines()
        .find(|l| l.starts_with("C1,accuracy"))
        .expect("aggregated accuracy row");
    let n: usize = line.rsplit(',').next().unwrap().parse().unwrap();
    assert_eq!(n, 10); // 5 folds x 2 files
}
