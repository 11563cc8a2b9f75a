//! Evaluation measures: accuracy, Cohen's kappa with its standard error,
//! windowed predictive-accuracy traces, and forgetting deltas.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("confusion matrix holds no observations")]
    Empty,
    #[error("degenerate marginals: chance agreement is 1, kappa undefined")]
    DegenerateKappa,
    #[error("label {label} outside {classes} classes")]
    LabelRange { label: usize, classes: usize },
}

/// Square count matrix; rows are ground truth, columns are predictions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<u64>,
    total: u64,
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        Self { classes, counts: vec![0; classes * classes], total: 0 }
    }

    pub fn from_pairs(
        classes: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, MetricsError> {
        let mut m = Self::new(classes);
        for (truth, pred) in pairs {
            m.record(truth, pred)?;
        }
        Ok(m)
    }

    pub fn record(&mut self, truth: usize, pred: usize) -> Result<(), MetricsError> {
        for label in [truth, pred] {
            if label >= self.classes {
                return Err(MetricsError::LabelRange { label, classes: self.classes });
            }
        }
        self.counts[truth * self.classes + pred] += 1;
        self.total += 1;
        Ok(())
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn count(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth * self.classes + pred]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Fraction of correctly classified instances.
    pub fn accuracy(&self) -> Result<f64, MetricsError> {
        if self.total == 0 {
            return Err(MetricsError::Empty);
        }
        let trace: u64 = (0..self.classes).map(|i| self.count(i, i)).sum();
        Ok(trace as f64 / self.total as f64)
    }

    /// Cohen's kappa and its standard error.
    ///
    /// Chance agreement comes from the marginal products; the error is
    /// `sqrt(p_o (1 - p_o) / (N (1 - p_e)^2))`.
    pub fn cohen_kappa(&self) -> Result<Kappa, MetricsError> {
        if self.total == 0 {
            return Err(MetricsError::Empty);
        }
        let n = self.total as f64;
        let p_o = self.accuracy()?;
        let mut p_e = 0.0;
        for k in 0..self.classes {
            let row: u64 = (0..self.classes).map(|j| self.count(k, j)).sum();
            let col: u64 = (0..self.classes).map(|i| self.count(i, k)).sum();
            p_e += (row as f64 / n) * (col as f64 / n);
        }
        if (1.0 - p_e).abs() < f64::EPSILON {
            return Err(MetricsError::DegenerateKappa);
        }
        let value = (p_o - p_e) / (1.0 - p_e);
        let std_error = (p_o * (1.0 - p_o) / (n * (1.0 - p_e) * (1.0 - p_e))).sqrt();
        Ok(Kappa { value, std_error })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kappa {
    pub value: f64,
    pub std_error: f64,
}

/// Accuracy drop on each previous concept relative to the latest one:
/// positive deltas mean the learner forgot, negative deltas mean it retained.
pub fn forgetting_capability(acc_latest: f64, acc_previous: &[f64]) -> Vec<f64> {
    acc_previous.iter().map(|prev| acc_latest - prev).collect()
}

/// Windowed predictive-accuracy recorder for the test-then-train protocol.
///
/// Emits one point per completed window of `window` samples (default 500),
/// plus a final partial-window point on [`AccuracyTrace::finish`], so a
/// stream of `N` samples yields `ceil(N / window)` points.
#[derive(Debug, Clone)]
pub struct AccuracyTrace {
    window: usize,
    seen: u64,
    correct_in_window: u64,
    samples_in_window: u64,
    points: Vec<(u64, f64)>,
}

impl Default for AccuracyTrace {
    fn default() -> Self {
        Self::new(500)
    }
}

impl AccuracyTrace {
    pub fn new(window: usize) -> Self {
        assert!(window > 0, "trace window must be positive");
        Self { window, seen: 0, correct_in_window: 0, samples_in_window: 0, points: Vec::new() }
    }

    pub fn record(&mut self, correct: bool) {
        self.seen += 1;
        self.samples_in_window += 1;
        if correct {
            self.correct_in_window += 1;
        }
        if self.samples_in_window == self.window as u64 {
            self.flush();
        }
    }

    fn flush(&mut self) {
        if self.samples_in_window > 0 {
            self.points
                .push((self.seen, self.correct_in_window as f64 / self.samples_in_window as f64));
            self.correct_in_window = 0;
            self.samples_in_window = 0;
        }
    }

    /// Closes the trailing partial window and returns the points.
    pub fn finish(mut self) -> Vec<(u64, f64)> {
        self.flush();
        self.points
    }

    pub fn points(&self) -> &[(u64, f64)] {
        &self.points
    }

    /// CSV rendering with a `position,accuracy` header.
    pub fn to_csv(points: &[(u64, f64)]) -> String {
        let mut out = String::from("position,accuracy\n");
        for (pos, acc) in points {
            out.push_str(&format!("{pos},{acc:.6}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn accuracy_trivial_cases() {
        let m = ConfusionMatrix::from_pairs(2, [(0, 0), (1, 1)]).unwrap();
        assert_eq!(m.accuracy().unwrap(), 1.0);
        let m = ConfusionMatrix::from_pairs(2, [(0, 1), (1, 0)]).unwrap();
        assert_eq!(m.accuracy().unwrap(), 0.0);
        assert!(matches!(ConfusionMatrix::new(2).accuracy(), Err(MetricsError::Empty)));
    }

    fn matrix_40_10_20_30() -> ConfusionMatrix {
        let mut m = ConfusionMatrix::new(2);
        for _ in 0..40 {
            m.record(0, 0).unwrap();
        }
        for _ in 0..10 {
            m.record(0, 1).unwrap();
        }
        for _ in 0..20 {
            m.record(1, 0).unwrap();
        }
        for _ in 0..30 {
            m.record(1, 1).unwrap();
        }
        m
    }

    #[test]
    fn accuracy_hand_count() {
        assert!((matrix_40_10_20_30().accuracy().unwrap() - 0.70).abs() < 1e-12);
    }

    #[test]
    fn kappa_perfect_chance_and_hand_computed() {
        let perfect = ConfusionMatrix::from_pairs(3, [(0, 0), (1, 1), (2, 2)]).unwrap();
        assert!((perfect.cohen_kappa().unwrap().value - 1.0).abs() < 1e-12);

        let mut chance = ConfusionMatrix::new(2);
        for _ in 0..25 {
            chance.record(0, 0).unwrap();
            chance.record(0, 1).unwrap();
            chance.record(1, 0).unwrap();
            chance.record(1, 1).unwrap();
        }
        assert!(chance.cohen_kappa().unwrap().value.abs() < 1e-12);

        // p_o = 0.7, p_e = 0.5 -> kappa = 0.4
        let kappa = matrix_40_10_20_30().cohen_kappa().unwrap();
        assert!((kappa.value - 0.4).abs() < 1e-12);
        let expect_se = (0.7_f64 * 0.3 / (100.0 * 0.25)).sqrt();
        assert!((kappa.std_error - expect_se).abs() < 1e-12);
    }

    #[test]
    fn kappa_degenerate_marginals_reported() {
        let m = ConfusionMatrix::from_pairs(2, [(0, 0), (0, 0)]).unwrap();
        assert!(matches!(m.cohen_kappa(), Err(MetricsError::DegenerateKappa)));
    }

    #[test]
    fn kappa_is_one_iff_off_diagonal_empty() {
        let mut m = matrix_40_10_20_30();
        assert!(m.cohen_kappa().unwrap().value < 1.0);
        m.record(0, 1).unwrap();
        assert!(m.cohen_kappa().unwrap().value < 1.0);
        let diag = ConfusionMatrix::from_pairs(2, [(0, 0), (1, 1), (1, 1)]).unwrap();
        assert_eq!(diag.cohen_kappa().unwrap().value, 1.0);
    }

    #[test]
    fn kappa_invariant_under_simultaneous_permutation() {
        let m = ConfusionMatrix::from_pairs(
            3,
            [(0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (2, 0), (0, 0), (1, 1), (2, 2), (2, 2)],
        )
        .unwrap();
        // permute labels by sigma = (2, 0, 1)
        let sigma = [2usize, 0, 1];
        let mut permuted = ConfusionMatrix::new(3);
        for t in 0..3 {
            for p in 0..3 {
                for _ in 0..m.count(t, p) {
                    permuted.record(sigma[t], sigma[p]).unwrap();
                }
            }
        }
        let a = m.cohen_kappa().unwrap();
        let b = permuted.cohen_kappa().unwrap();
        assert!((a.value - b.value).abs() < 1e-12);
    }

    #[test]
    fn accuracy_and_kappa_value_scale_invariant() {
        let base = matrix_40_10_20_30();
        let mut scaled = ConfusionMatrix::new(2);
        for t in 0..2 {
            for p in 0..2 {
                for _ in 0..base.count(t, p) * 3 {
                    scaled.record(t, p).unwrap();
                }
            }
        }
        assert!((base.accuracy().unwrap() - scaled.accuracy().unwrap()).abs() < 1e-12);
        assert!(
            (base.cohen_kappa().unwrap().value - scaled.cohen_kappa().unwrap().value).abs()
                < 1e-12
        );
    }

    #[test]
    fn forgetting_deltas() {
        assert_eq!(forgetting_capability(0.9, &[0.9, 0.9]), vec![0.0, 0.0]);
        let strong = forgetting_capability(0.97, &[0.18]);
        assert!((strong[0] - 0.79).abs() < 1e-12);
        let retention = forgetting_capability(0.94, &[0.96]);
        assert!((retention[0] + 0.02).abs() < 1e-12);
    }

    #[test]
    fn trace_has_ceil_n_over_w_points() {
        let mut trace = AccuracyTrace::new(100);
        for i in 0..250 {
            trace.record(i % 2 == 0);
        }
        let points = trace.finish();
        assert_eq!(points.len(), 3);
        assert_eq!(points[0].0, 100);
        assert_eq!(points[2].0, 250);
    }

    #[test]
    fn perfect_learner_has_flat_unit_trace() {
        let mut trace = AccuracyTrace::new(50);
        for _ in 0..200 {
            trace.record(true);
        }
        assert!(trace.finish().iter().all(|&(_, acc)| acc == 1.0));
    }

    #[test]
    fn random_guesser_hovers_at_half() {
        let mut rng = RngStream::new(2024);
        let mut trace = AccuracyTrace::new(1000);
        for _ in 0..20_000 {
            trace.record(rng.bernoulli(0.5));
        }
        let points = trace.finish();
        // binomial noise: 3 sigma of a 1000-sample window is ~0.047
        for (pos, acc) in points {
            assert!((acc - 0.5).abs() < 0.06, "window at {pos} had accuracy {acc}");
        }
    }

    #[test]
    fn trace_csv_format() {
        let csv = AccuracyTrace::to_csv(&[(500, 0.91), (1000, 0.87)]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("position,accuracy"));
        assert_eq!(lines.next(), Some("500,0.910000"));
        assert_eq!(lines.next(), Some("1000,0.870000"));
    }
}
