//! Seeded synthetic handwritten-digit-like images.
//!
//! Each class is a fixed template of 2-4 quadratic strokes rasterized with a
//! gaussian pen on a 28x28 canvas; samples jitter the template with integer
//! shifts, intensity scaling and pixel noise. The generator exists so the
//! image benchmarks run out of the box; pass real IDX files to use actual
//! handwriting instead.

use crate::rng::RngStream;
use crate::scalar::Scalar;

use super::ImageSet;

const SIDE: usize = 28;
const PEN_SIGMA: f64 = 1.3;
const MAX_SHIFT: i64 = 3;
const MAX_ROTATION: f64 = 0.35;
const PIXEL_NOISE: f64 = 0.08;
/// Fraction of samples rendered ink-on-bright instead of bright-on-dark.
/// Raw grey values scatter under polarity inversion while gradient
/// orientations (unsigned) are exactly invariant to it.
const INVERT_PROB: f64 = 0.18;

/// Deterministic multi-class image source.
#[derive(Debug, Clone)]
pub struct SyntheticDigits {
    base_seed: u64,
    templates: Vec<Vec<f64>>,
}

impl SyntheticDigits {
    pub fn new(base_seed: u64, classes: usize) -> Self {
        // two strokes are shared by every class, like the common stroke
        // statistics of real handwriting; the rest are class-specific
        let mut shared_rng = RngStream::new(base_seed ^ 0xA5A5_5A5A_C0FF_EE00);
        let shared: Vec<[(f64, f64); 3]> = (0..2).map(|_| stroke_points(&mut shared_rng)).collect();
        let templates = (0..classes)
            .map(|class| {
                let seed =
                    base_seed ^ (class as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                class_template(&mut RngStream::new(seed), &shared)
            })
            .collect();
        Self { base_seed, templates }
    }

    pub fn classes(&self) -> usize {
        self.templates.len()
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    /// One jittered instance of `class` (shift, rotation, intensity and
    /// pixel noise), pixels scaled to `[-1, 1]`.
    pub fn sample<F: Scalar>(&self, class: usize, rng: &mut RngStream) -> Vec<F> {
        let template = &self.templates[class];
        let dx = rng.next_index((2 * MAX_SHIFT + 1) as usize) as f64 - MAX_SHIFT as f64;
        let dy = rng.next_index((2 * MAX_SHIFT + 1) as usize) as f64 - MAX_SHIFT as f64;
        let angle = rng.uniform(-MAX_ROTATION, MAX_ROTATION);
        let intensity = rng.uniform(0.75, 1.0);
        let inverted = rng.bernoulli(INVERT_PROB);
        let (sin, cos) = angle.sin_cos();
        let center = (SIDE as f64 - 1.0) / 2.0;
        let mut out = Vec::with_capacity(SIDE * SIDE);
        for i in 0..SIDE {
            for j in 0..SIDE {
                // inverse transform: undo the shift, then the rotation
                let y = i as f64 - center - dy;
                let x = j as f64 - center - dx;
                let sy = center + (sin * x + cos * y);
                let sx = center + (cos * x - sin * y);
                let mut value = bilinear(template, sy, sx) * intensity;
                if inverted {
                    value = 1.0 - value;
                }
                let noisy = (value + PIXEL_NOISE * rng.normal()).clamp(0.0, 1.0);
                out.push(F::from_f64_lossy(noisy * 2.0 - 1.0));
            }
        }
        out
    }

    /// Balanced shuffled pool of `per_class` instances of every class.
    pub fn image_set<F: Scalar>(&self, per_class: usize, rng: &mut RngStream) -> ImageSet<F> {
        let classes = self.classes();
        let mut order: Vec<usize> =
            (0..classes * per_class).map(|k| k % classes).collect();
        rng.shuffle(&mut order);
        let mut images = Vec::with_capacity(order.len());
        let mut labels = Vec::with_capacity(order.len());
        for class in order {
            images.push(self.sample(class, rng));
            labels.push(class);
        }
        ImageSet { images, labels, classes }
    }
}

fn bilinear(canvas: &[f64], y: f64, x: f64) -> f64 {
    if !(0.0..=(SIDE - 1) as f64).contains(&y) || !(0.0..=(SIDE - 1) as f64).contains(&x) {
        return 0.0;
    }
    let i0 = y.floor() as usize;
    let j0 = x.floor() as usize;
    let i1 = (i0 + 1).min(SIDE - 1);
    let j1 = (j0 + 1).min(SIDE - 1);
    let fy = y - i0 as f64;
    let fx = x - j0 as f64;
    let at = |i: usize, j: usize| canvas[i * SIDE + j];
    at(i0, j0) * (1.0 - fy) * (1.0 - fx)
        + at(i0, j1) * (1.0 - fy) * fx
        + at(i1, j0) * fy * (1.0 - fx)
        + at(i1, j1) * fy * fx
}

fn stroke_points(rng: &mut RngStream) -> [(f64, f64); 3] {
    std::array::from_fn(|_| (rng.uniform(5.0, 23.0), rng.uniform(5.0, 23.0)))
}

fn class_template(rng: &mut RngStream, shared: &[[(f64, f64); 3]]) -> Vec<f64> {
    let mut canvas = vec![0.0f64; SIDE * SIDE];
    let own = 2 + rng.next_index(2);
    let strokes: Vec<[(f64, f64); 3]> = shared
        .iter()
        .copied()
        .chain((0..own).map(|_| stroke_points(rng)))
        .collect();
    for pts in strokes {
        for step in 0..=48 {
            let t = step as f64 / 48.0;
            let u = 1.0 - t;
            let x = u * u * pts[0].0 + 2.0 * u * t * pts[1].0 + t * t * pts[2].0;
            let y = u * u * pts[0].1 + 2.0 * u * t * pts[1].1 + t * t * pts[2].1;
            stamp(&mut canvas, x, y);
        }
    }
    let peak = canvas.iter().cloned().fold(0.0f64, f64::max).max(1e-9);
    for v in &mut canvas {
        *v = (*v / peak).min(1.0);
    }
    canvas
}

fn stamp(canvas: &mut [f64], cx: f64, cy: f64) {
    let radius = (3.0 * PEN_SIGMA).ceil() as i64;
    let ci = cy.round() as i64;
    let cj = cx.round() as i64;
    for i in (ci - radius).max(0)..=(ci + radius).min(SIDE as i64 - 1) {
        for j in (cj - radius).max(0)..=(cj + radius).min(SIDE as i64 - 1) {
            let dy = i as f64 - cy;
            let dx = j as f64 - cx;
            let w = (-(dx * dx + dy * dy) / (2.0 * PEN_SIGMA * PEN_SIGMA)).exp();
            canvas[(i as usize) * SIDE + j as usize] += w;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let gen_a = SyntheticDigits::new(11, 10);
        let gen_b = SyntheticDigits::new(11, 10);
        let a: Vec<f64> = gen_a.sample(3, &mut RngStream::new(5));
        let b: Vec<f64> = gen_b.sample(3, &mut RngStream::new(5));
        assert_eq!(a, b);
        let c: Vec<f64> = gen_a.sample(3, &mut RngStream::new(6));
        assert_ne!(a, c);
    }

    #[test]
    fn samples_are_in_range_and_structured() {
        let digits = SyntheticDigits::new(7, 10);
        let mut rng = RngStream::new(1);
        for class in 0..10 {
            let img: Vec<f64> = digits.sample(class, &mut rng);
            assert_eq!(img.len(), 784);
            assert!(img.iter().all(|&v| (-1.0..=1.0).contains(&v)));
            // strokes are the minority polarity regardless of inversion;
            // guards against blank or saturated canvases
            let bright = img.iter().filter(|&&v| v > 0.0).count();
            let inked = bright.min(784 - bright);
            assert!(inked > 5, "class {class} has {inked} stroke pixels");
            assert!(inked < 500, "class {class} has {inked} stroke pixels");
        }
    }

    #[test]
    fn classes_are_visually_distinct() {
        // distinct templates should differ substantially in pixel space
        let digits = SyntheticDigits::new(3, 10);
        let mut rng = RngStream::new(2);
        let samples: Vec<Vec<f64>> = (0..10).map(|c| digits.sample(c, &mut rng)).collect();
        for a in 0..10 {
            for b in (a + 1)..10 {
                let dist: f64 = samples[a]
                    .iter()
                    .zip(&samples[b])
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                assert!(dist > 1.0, "classes {a} and {b} nearly coincide ({dist})");
            }
        }
    }

    #[test]
    fn image_set_is_balanced() {
        let digits = SyntheticDigits::new(5, 4);
        let set: ImageSet<f64> = digits.image_set(25, &mut RngStream::new(9));
        assert_eq!(set.len(), 100);
        assert_eq!(set.classes, 4);
        for class in 0..4 {
            assert_eq!(set.labels.iter().filter(|&&l| l == class).count(), 25);
        }
    }
}
