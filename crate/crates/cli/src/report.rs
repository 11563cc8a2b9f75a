//! Report rendering: per-trial metric rows, accuracy traces, summary text
//! and cross-file aggregation.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use aoselm::metrics::AccuracyTrace;

use crate::model_io::save_model;
use crate::runner::{ConceptScore, Report, RunError};

/// One row per (trial, concept, metric).
pub fn report_csv(report: &Report) -> String {
    let mut out = String::from("trial,concept,metric,value\n");
    for trial in &report.trials {
        for concept in &trial.concepts {
            match &concept.score {
                ConceptScore::Classification { accuracy, kappa, tested } => {
                    let _ = writeln!(
                        out,
                        "{},{},accuracy,{:.6}",
                        trial.label, concept.name, accuracy
                    );
                    if let Some(k) = kappa {
                        let _ = writeln!(
                            out,
                            "{},{},kappa,{:.6}",
                            trial.label, concept.name, k.value
                        );
                        let _ = writeln!(
                            out,
                            "{},{},kappa_error,{:.6}",
                            trial.label, concept.name, k.std_error
                        );
                    }
                    let _ =
                        writeln!(out, "{},{},tested,{}", trial.label, concept.name, tested);
                }
                ConceptScore::Regression { rmse, gain, tested } => {
                    let _ = writeln!(out, "{},{},rmse,{:.6}", trial.label, concept.name, rmse);
                    let _ = writeln!(out, "{},{},gain,{:.6}", trial.label, concept.name, gain);
                    let _ =
                        writeln!(out, "{},{},tested,{}", trial.label, concept.name, tested);
                }
            }
        }
        for (idx, delta) in trial.forgetting.iter().enumerate() {
            let _ = writeln!(out, "{},C{},forgetting_delta,{:.6}", trial.label, idx + 1, delta);
        }
        for event in &trial.rank_events {
            let _ = writeln!(
                out,
                "{},stream,rank_before@{},{}",
                trial.label, event.position, event.rank_before
            );
            let _ = writeln!(
                out,
                "{},stream,rank_after@{},{}",
                trial.label, event.position, event.rank_after
            );
            let _ = writeln!(
                out,
                "{},stream,underfit_flag@{},{}",
                trial.label,
                event.position,
                u8::from(event.flagged)
            );
        }
        for pos in &trial.drift_positions {
            let _ = writeln!(out, "{},stream,drift_detected,{}", trial.label, pos);
        }
        let _ = writeln!(out, "{},all,wall_ms,{}", trial.label, trial.wall_ms);
    }
    out
}

/// Human-readable summary table.
pub fn summary_text(report: &Report) -> String {
    let mut out = format!("scenario: {}\n", report.scenario);
    for row in &report.summary {
        if row.regression {
            let _ = write!(out, "  {:<12} rmse {:.4} +/- {:.4}", row.name, row.mean, row.std);
        } else {
            let _ =
                write!(out, "  {:<12} {:.2} +/- {:.2}", row.name, row.mean * 100.0, row.std * 100.0);
            if let (Some(k), Some(e)) = (row.mean_kappa, row.mean_kappa_error) {
                let _ = write!(out, "   kappa {:.2} ({:.2})", k * 100.0, e * 100.0);
            }
        }
        let _ = writeln!(out, "   [{} trials]", row.trials);
    }
    out
}

/// Writes `report.csv`, per-trial `trace_*.csv`, per-trial `model_*.bin`
/// and `config_resolved.txt` under `dir`.
pub fn write_artifacts(report: &Report, dir: &Path, seeds: &[u64]) -> Result<(), RunError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.csv"), report_csv(report))?;
    std::fs::write(dir.join("config_resolved.txt"), &report.resolved)?;
    for trial in &report.trials {
        if !trial.trace.is_empty() {
            std::fs::write(
                dir.join(format!("trace_{}.csv", trial.label)),
                AccuracyTrace::to_csv(&trial.trace),
            )?;
        }
        save_model(&trial.model, seeds, dir.join(format!("model_{}.bin", trial.label)))
            .map_err(|e| RunError::Scenario(format!("saving model: {e}")))?;
    }
    Ok(())
}

/// Aggregates rows of several `report.csv` files: mean and standard
/// deviation per (concept, metric) over all numeric rows.
pub fn aggregate_csv(paths: &[std::path::PathBuf]) -> Result<String, RunError> {
    let mut groups: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for path in paths {
        let text = std::fs::read_to_string(path)?;
        for (idx, line) in text.lines().enumerate() {
            if idx == 0 || line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(RunError::Scenario(format!(
                    "{}:{}: expected 4 fields",
                    path.display(),
                    idx + 1
                )));
            }
            if let Ok(value) = fields[3].parse::<f64>() {
                groups
                    .entry((fields[1].to_string(), fields[2].to_string()))
                    .or_default()
                    .push(value);
            }
        }
    }
    let mut out = String::from("concept,metric,mean,std,n\n");
    for ((concept, metric), values) in groups {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let _ = writeln!(out, "{concept},{metric},{mean:.6},{:.6},{}", var.sqrt(), values.len());
    }
    Ok(out)
}
