//! Experiment configuration: learner family, capacity, stream parameters,
//! evaluation protocol and monitor thresholds.
//!
//! A config can be populated from a plain `key = value` text file and
//! overridden field by field from command-line flags; `resolved_text`
//! echoes the final values so every report records exactly what ran.

use std::collections::BTreeMap;
use std::path::Path;

use aoselm::model::{Activation, InitScheme};
use aoselm::monitor::MonitorConfig;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("bad value for {key}: {message}")]
    BadValue { key: String, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Learner family driven by the experiment loop. All four share one code
/// path; they differ only in what happens at drift markers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LearnerKind {
    /// Plain sequential updates; ignores drift markers.
    Oselm,
    /// Grows hidden nodes at drift markers but never adapts shape.
    Ceoselm,
    /// Shape adaptation at drift markers, no hidden-node growth.
    Aoselm1,
    /// Shape adaptation plus hidden-node growth at drift markers.
    Aoselm2,
}

impl LearnerKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "oselm" => Some(Self::Oselm),
            "ceoselm" => Some(Self::Ceoselm),
            "aoselm1" => Some(Self::Aoselm1),
            "aoselm2" => Some(Self::Aoselm2),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Oselm => "oselm",
            Self::Ceoselm => "ceoselm",
            Self::Aoselm1 => "aoselm1",
            Self::Aoselm2 => "aoselm2",
        }
    }

    /// Whether drift markers register new concept blocks (output
    /// marginalization) for this learner.
    pub fn adapts_shape(self) -> bool {
        matches!(self, Self::Aoselm1 | Self::Aoselm2)
    }

    /// Hidden nodes added at each drift marker.
    pub fn growth_at_drift(self, delta_l: usize) -> usize {
        match self {
            Self::Oselm | Self::Aoselm1 => 0,
            Self::Ceoselm | Self::Aoselm2 => delta_l,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalProtocol {
    /// k folds over each concept's sample pool; one trial per fold, with the
    /// learner initialization shared across folds.
    KFold { folds: usize },
    /// Independent trials, one per configured seed.
    Holdout { trials: usize },
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub learner: LearnerKind,
    pub hidden_nodes: usize,
    pub added_nodes: usize,
    pub ridge: f64,
    pub scheme: InitScheme,
    pub activation: Activation,
    pub batch_size: usize,
    pub seeds: Vec<u64>,
    pub evaluation: EvalProtocol,
    pub monitor: MonitorConfig,
    pub trace_window: usize,
    /// Record rank diagnostics at every growth step (costs an SVD per
    /// growth; leave off for large hidden layers).
    pub rank_diagnostics: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            learner: LearnerKind::Aoselm1,
            hidden_nodes: 100,
            added_nodes: 0,
            ridge: 100.0,
            scheme: InitScheme::Ros,
            activation: Activation::Sigmoid,
            batch_size: 1000,
            seeds: vec![1],
            evaluation: EvalProtocol::Holdout { trials: 1 },
            monitor: MonitorConfig::default(),
            trace_window: 500,
            rank_diagnostics: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.hidden_nodes == 0 {
            return Err(ConfigError::Invalid("l0 must be at least 1".into()));
        }
        if !(self.ridge > 0.0) || !self.ridge.is_finite() {
            return Err(ConfigError::Invalid(format!("c must be positive, got {}", self.ridge)));
        }
        if self.batch_size == 0 {
            return Err(ConfigError::Invalid("batch size must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(ConfigError::Invalid("at least one seed is required".into()));
        }
        if self.learner == LearnerKind::Aoselm2 && self.added_nodes == 0 {
            return Err(ConfigError::Invalid("aoselm2 requires delta_l >= 1".into()));
        }
        if self.learner == LearnerKind::Ceoselm && self.added_nodes == 0 {
            return Err(ConfigError::Invalid("ceoselm requires delta_l >= 1".into()));
        }
        match self.evaluation {
            EvalProtocol::KFold { folds } if folds < 2 => {
                Err(ConfigError::Invalid("kfold needs at least 2 folds".into()))
            }
            EvalProtocol::Holdout { trials } if trials == 0 => {
                Err(ConfigError::Invalid("holdout needs at least 1 trial".into()))
            }
            _ => Ok(()),
        }
    }

    /// Applies `key = value` pairs from a config file.
    pub fn apply_file(&mut self, path: impl AsRef<Path>) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)?;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or(ConfigError::Syntax { line: idx + 1 })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Sets a single field by key name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |message: String| ConfigError::BadValue { key: key.to_string(), message };
        match key {
            "learner" => {
                self.learner =
                    LearnerKind::parse(value).ok_or_else(|| bad(format!("unknown {value:?}")))?;
            }
            "l0" => self.hidden_nodes = parse(key, value)?,
            "delta_l" => self.added_nodes = parse(key, value)?,
            "c" => self.ridge = parse(key, value)?,
            "scheme" => {
                self.scheme = match value.to_ascii_lowercase().as_str() {
                    "norm" => InitScheme::Norm,
                    "ros" => InitScheme::Ros,
                    _ => return Err(bad(format!("expected norm|ros, got {value:?}"))),
                };
            }
            "activation" => {
                self.activation = match value.to_ascii_lowercase().as_str() {
                    "sigmoid" => Activation::Sigmoid,
                    "tanh" => Activation::Tanh,
                    _ => return Err(bad(format!("expected sigmoid|tanh, got {value:?}"))),
                };
            }
            "batch" => self.batch_size = parse(key, value)?,
            "seeds" => {
                self.seeds = value
                    .split(',')
                    .map(|s| s.trim().parse::<u64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| bad(e.to_string()))?;
            }
            "eval" => {
                self.evaluation = match value.split_once(':') {
                    Some(("kfold", n)) => {
                        EvalProtocol::KFold { folds: n.parse().map_err(|e| bad(format!("{e}")))? }
                    }
                    Some(("holdout", n)) => EvalProtocol::Holdout {
                        trials: n.parse().map_err(|e| bad(format!("{e}")))?,
                    },
                    _ => return Err(bad(format!("expected kfold:K or holdout:N, got {value:?}"))),
                };
            }
            "monitor_window" => self.monitor.window = parse(key, value)?,
            "warn_threshold" => self.monitor.warn_threshold = parse(key, value)?,
            "drift_threshold" => self.monitor.drift_threshold = parse(key, value)?,
            "commit_margin" => self.monitor.commit_margin = parse(key, value)?,
            "trace_window" => self.trace_window = parse(key, value)?,
            "rank_diagnostics" => {
                self.rank_diagnostics = value
                    .parse()
                    .map_err(|_| bad(format!("expected true|false, got {value:?}")))?;
            }
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Full `key = value` echo of the resolved configuration.
    pub fn resolved_text(&self, extra: &[(String, String)]) -> String {
        let mut map = BTreeMap::new();
        map.insert("learner", self.learner.name().to_string());
        map.insert("l0", self.hidden_nodes.to_string());
        map.insert("delta_l", self.added_nodes.to_string());
        map.insert("c", format!("{}", self.ridge));
        map.insert(
            "scheme",
            match self.scheme {
                InitScheme::Norm => "norm".into(),
                InitScheme::Ros => "ros".into(),
            },
        );
        map.insert(
            "activation",
            match self.activation {
                Activation::Sigmoid => "sigmoid".into(),
                Activation::Tanh => "tanh".into(),
            },
        );
        map.insert("batch", self.batch_size.to_string());
        map.insert(
            "seeds",
            self.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
        );
        map.insert(
            "eval",
            match self.evaluation {
                EvalProtocol::KFold { folds } => format!("kfold:{folds}"),
                EvalProtocol::Holdout { trials } => format!("holdout:{trials}"),
            },
        );
        map.insert("monitor_window", self.monitor.window.to_string());
        map.insert("warn_threshold", self.monitor.warn_threshold.to_string());
        map.insert("drift_threshold", format!("{}", self.monitor.drift_threshold));
        map.insert("commit_margin", format!("{}", self.monitor.commit_margin));
        map.insert("trace_window", self.trace_window.to_string());
        map.insert("rank_diagnostics", self.rank_diagnostics.to_string());

        let mut out = String::new();
        for (k, v) in &map {
            out.push_str(&format!("{k} = {v}\n"));
        }
        for (k, v) in extra {
            out.push_str(&format!("{k} = {v}\n"));
        }
        // folding is over each concept's sample pool, stream order is kept
        // inside every training fold
        out.push_str("kfold_axis = per-concept sample pool (stream order preserved)\n");
        out
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::BadValue {
        key: key.to_string(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn file_then_flag_override() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.conf");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "# experiment").unwrap();
        writeln!(f, "learner = aoselm2").unwrap();
        writeln!(f, "l0 = 500").unwrap();
        writeln!(f, "delta_l = 125").unwrap();
        writeln!(f, "seeds = 1, 2, 3").unwrap();
        writeln!(f, "eval = kfold:5").unwrap();
        drop(f);

        let mut cfg = ExperimentConfig::default();
        cfg.apply_file(&path).unwrap();
        assert_eq!(cfg.learner, LearnerKind::Aoselm2);
        assert_eq!(cfg.hidden_nodes, 500);
        assert_eq!(cfg.seeds, vec![1, 2, 3]);
        assert_eq!(cfg.evaluation, EvalProtocol::KFold { folds: 5 });
        // flags override the file
        cfg.set("l0", "1000").unwrap();
        assert_eq!(cfg.hidden_nodes, 1000);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let mut cfg = ExperimentConfig::default();
        assert!(matches!(cfg.set("no_such_key", "1"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(cfg.set("l0", "abc"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(cfg.set("scheme", "magic"), Err(ConfigError::BadValue { .. })));
    }

    #[test]
    fn validation_rules() {
        let mut cfg = ExperimentConfig::default();
        cfg.learner = LearnerKind::Aoselm2;
        cfg.added_nodes = 0;
        assert!(cfg.validate().is_err());
        cfg.added_nodes = 10;
        cfg.validate().unwrap();
        cfg.ridge = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn resolved_text_is_complete() {
        let cfg = ExperimentConfig::default();
        let text = cfg.resolved_text(&[("dataset".into(), "sea".into())]);
        for key in
            ["learner", "l0", "delta_l", "c", "scheme", "activation", "batch", "seeds", "eval"]
        {
            assert!(text.contains(&format!("{key} = ")), "missing {key} in\n{text}");
        }
        assert!(text.contains("dataset = sea"));
        assert!(text.contains("kfold_axis"));
    }
}
