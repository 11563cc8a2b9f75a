//! Loss-estimation drift detection and commit-or-rollback model management.
//!
//! The monitor watches a stream of per-sample prediction outcomes. A run of
//! consecutive misses raises a warning; a windowed-accuracy drop below the
//! best accuracy seen so far (minus a configured margin) raises a drift
//! signal. Detection is deliberately decoupled from adaptation: the monitor
//! only emits states, and the driving loop decides which adaptation operator
//! to invoke.

use std::collections::VecDeque;

use thiserror::Error;

use crate::model::ElmModel;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonitorError {
    #[error("accuracy trace must not be empty")]
    EmptyTrace,
    #[error("accuracy traces differ in length: {prev} vs {new}")]
    LengthMismatch { prev: usize, new: usize },
    #[error("accuracy {0} outside [0, 1]")]
    AccuracyRange(f64),
    #[error("monitor window must be at least 1")]
    EmptyWindow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonitorState {
    Stable,
    Warning,
    Drift,
}

/// Monitor parameters. The defaults are pinned so experiment reports are
/// reproducible: window 200, warning after 30 consecutive misses, drift on a
/// 0.2 absolute windowed-accuracy drop, commit margin 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorConfig {
    pub window: usize,
    pub warn_threshold: usize,
    pub drift_threshold: f64,
    pub commit_margin: f64,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self { window: 200, warn_threshold: 30, drift_threshold: 0.2, commit_margin: 0.0 }
    }
}

/// Windowed loss estimator with stable/warning/drift states.
#[derive(Debug, Clone)]
pub struct DriftMonitor {
    config: MonitorConfig,
    recent: VecDeque<bool>,
    correct_in_window: usize,
    best_windowed: Option<f64>,
    consecutive_misses: usize,
    state: MonitorState,
}

impl DriftMonitor {
    pub fn new(config: MonitorConfig) -> Result<Self, MonitorError> {
        if config.window == 0 {
            return Err(MonitorError::EmptyWindow);
        }
        Ok(Self {
            config,
            recent: VecDeque::with_capacity(config.window),
            correct_in_window: 0,
            best_windowed: None,
            consecutive_misses: 0,
            state: MonitorState::Stable,
        })
    }

    pub fn with_defaults() -> Self {
        Self::new(MonitorConfig::default()).expect("default window is nonzero")
    }

    pub fn config(&self) -> &MonitorConfig {
        &self.config
    }

    pub fn state(&self) -> MonitorState {
        self.state
    }

    /// Windowed accuracy once a full window has been observed.
    pub fn windowed_accuracy(&self) -> Option<f64> {
        (self.recent.len() == self.config.window)
            .then(|| self.correct_in_window as f64 / self.config.window as f64)
    }

    pub fn best_accuracy(&self) -> Option<f64> {
        self.best_windowed
    }

    /// Feeds one prediction outcome and returns the updated state.
    ///
    /// Warning fires on `warn_threshold` consecutive misses and clears by
    /// itself on recovery; drift fires when the windowed accuracy falls more
    /// than `drift_threshold` below the best windowed accuracy seen, and
    /// stays latched until [`DriftMonitor::reset_after_drift`].
    pub fn observe(&mut self, correct: bool) -> MonitorState {
        if correct {
            self.consecutive_misses = 0;
        } else {
            self.consecutive_misses += 1;
        }
        self.recent.push_back(correct);
        if correct {
            self.correct_in_window += 1;
        }
        if self.recent.len() > self.config.window {
            if self.recent.pop_front().unwrap_or(false) {
                self.correct_in_window -= 1;
            }
        }
        if self.state == MonitorState::Drift {
            return self.state;
        }
        if let Some(acc) = self.windowed_accuracy() {
            if let Some(best) = self.best_windowed {
                if acc < best - self.config.drift_threshold {
                    self.state = MonitorState::Drift;
                    return self.state;
                }
            }
            let best = self.best_windowed.get_or_insert(acc);
            if acc > *best {
                *best = acc;
            }
        }
        self.state = if self.consecutive_misses >= self.config.warn_threshold {
            MonitorState::Warning
        } else {
            MonitorState::Stable
        };
        self.state
    }

    /// Clears the window, counters and best accuracy after a drift has been
    /// handled, returning the monitor to the stable state.
    pub fn reset_after_drift(&mut self) {
        self.recent.clear();
        self.correct_in_window = 0;
        self.best_windowed = None;
        self.consecutive_misses = 0;
        self.state = MonitorState::Stable;
    }
}

/// Immutable copy of a model taken at a known stream position.
#[derive(Debug, Clone)]
pub struct ModelSnapshot<F> {
    model: ElmModel<F>,
    position: u64,
}

impl<F: Scalar> ModelSnapshot<F> {
    pub fn take(model: &ElmModel<F>, position: u64) -> Self {
        Self { model: model.clone(), position }
    }

    pub fn model(&self) -> &ElmModel<F> {
        &self.model
    }

    pub fn position(&self) -> u64 {
        self.position
    }

    pub fn into_model(self) -> ElmModel<F> {
        self.model
    }
}

/// Keeps the candidate when its accuracy is within `margin` of the previous
/// accuracy (ties favor the candidate), otherwise restores the snapshot.
pub fn commit_or_rollback<F: Scalar>(
    snapshot: &ModelSnapshot<F>,
    candidate: ElmModel<F>,
    candidate_accuracy: f64,
    previous_accuracy: f64,
    margin: f64,
) -> Result<ElmModel<F>, MonitorError> {
    for acc in [candidate_accuracy, previous_accuracy] {
        if !(0.0..=1.0).contains(&acc) {
            return Err(MonitorError::AccuracyRange(acc));
        }
    }
    if candidate_accuracy >= previous_accuracy - margin {
        Ok(candidate)
    } else {
        Ok(snapshot.model().clone())
    }
}

/// First index at which the new concept's accuracy trace reaches the
/// previous concept's (ties count); `None` when it never crosses.
pub fn change_point_estimate(
    trace_prev: &[f64],
    trace_new: &[f64],
) -> Result<Option<usize>, MonitorError> {
    if trace_prev.is_empty() || trace_new.is_empty() {
        return Err(MonitorError::EmptyTrace);
    }
    if trace_prev.len() != trace_new.len() {
        return Err(MonitorError::LengthMismatch {
            prev: trace_prev.len(),
            new: trace_new.len(),
        });
    }
    Ok(trace_prev.iter().zip(trace_new).position(|(p, n)| n >= p))
}
