//! Scalar regression concepts on `[-1, 1]`, each affinely mapped so the
//! targets span `[0, 1]`.
//!
//! The inner constants are chosen so the targets are expressible by a
//! sigmoid hidden layer whose single input and weights both live in
//! `[-1, 1]`: pre-activations then span only about `[-2, 2]`, which bounds
//! the frequency content such a layer can represent.

use crate::rng::RngStream;
use crate::scalar::Scalar;

/// `exp(-2)`, the boundary value of the gaussian concept.
const GAUSS_MIN: f64 = 0.135_335_283_236_612_7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegressionFn {
    /// `sin(pi x) / (pi x)`, peak 1 at the origin, zero at the edges.
    Sinc,
    /// `sin(pi x)`, one period, odd around the origin.
    Sinus,
    /// `exp(-2 x^2)`, peak 1 at the origin.
    Gaussian,
}

impl RegressionFn {
    /// Target value at `x`, scaled into `[0, 1]`.
    pub fn value(self, x: f64) -> f64 {
        let scaled = match self {
            RegressionFn::Sinc => {
                let t = std::f64::consts::PI * x;
                if t.abs() < 1e-12 {
                    1.0
                } else {
                    t.sin() / t
                }
            }
            RegressionFn::Sinus => ((std::f64::consts::PI * x).sin() + 1.0) / 2.0,
            RegressionFn::Gaussian => {
                let raw = (-2.0 * x * x).exp();
                (raw - GAUSS_MIN) / (1.0 - GAUSS_MIN)
            }
        };
        scaled.clamp(0.0, 1.0)
    }
}

/// Samples `n` points, `x` uniform on `[-1, 1]`.
pub fn gen_regression<F: Scalar>(
    function: RegressionFn,
    n: usize,
    rng: &mut RngStream,
) -> (Vec<F>, Vec<F>) {
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let x = rng.uniform(-1.0, 1.0);
        xs.push(F::from_f64_lossy(x));
        ys.push(F::from_f64_lossy(function.value(x)));
    }
    (xs, ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchor_values() {
        assert!((RegressionFn::Sinc.value(0.0) - 1.0).abs() < 1e-12);
        assert!((RegressionFn::Sinus.value(0.0) - 0.5).abs() < 1e-12);
        assert!((RegressionFn::Gaussian.value(0.0) - 1.0).abs() < 1e-12);
        assert!(RegressionFn::Gaussian.value(1.0).abs() < 1e-12);
    }

    #[test]
    fn outputs_span_unit_interval() {
        for f in [RegressionFn::Sinc, RegressionFn::Sinus, RegressionFn::Gaussian] {
            let mut lo = f64::MAX;
            let mut hi = f64::MIN;
            for i in 0..=10_000 {
                let x = -1.0 + 2.0 * i as f64 / 10_000.0;
                let y = f.value(x);
                assert!((0.0..=1.0).contains(&y), "{f:?}({x}) = {y}");
                lo = lo.min(y);
                hi = hi.max(y);
            }
            assert!(lo < 0.05, "{f:?} never approaches 0 (min {lo})");
            assert!(hi > 0.95, "{f:?} never approaches 1 (max {hi})");
        }
    }

    #[test]
    fn samples_replay_under_fixed_seed() {
        let (xa, ya) = gen_regression::<f64>(RegressionFn::Sinc, 50, &mut RngStream::new(4));
        let (xb, yb) = gen_regression::<f64>(RegressionFn::Sinc, 50, &mut RngStream::new(4));
        assert_eq!(xa, xb);
        assert_eq!(ya, yb);
        assert!(xa.iter().all(|x| (-1.0..=1.0).contains(x)));
    }
}
