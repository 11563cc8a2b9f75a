//! Stream sources: synthetic concept generators, drift-schedule composition,
//! image ingestion and feature augmentation.
//!
//! A [`DriftSchedule`] is an ordered list of segments, each holding one or
//! more concepts, a sample budget and the drift marker that introduces it.
//! [`compose_schedule`] turns a schedule into a deterministic stream of
//! fixed-size batches with drift markers at segment boundaries, so a driver
//! can adapt the learner before the first differently-shaped batch arrives.
//!
//! Every generator is a pure function of its parameters and its seed.

pub mod csvio;
pub mod digits;
pub mod hog;
pub mod idx;
pub mod noise;
pub mod regression;
pub mod sea;
pub mod stagger;

use std::collections::VecDeque;
use std::sync::Arc;

use thiserror::Error;

use crate::matrix::DenseMatrix;
use crate::rng::RngStream;
use crate::scalar::Scalar;

pub use regression::{gen_regression, RegressionFn};
pub use sea::{gen_sea, SEA_THRESHOLDS};
pub use stagger::gen_stagger;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic number {got:#010x}, expected {expected:#010x}")]
    BadMagic { expected: u32, got: u32 },
    #[error("file truncated: {0}")]
    Truncated(&'static str),
    #[error("dimension overflow in header")]
    Overflow,
    #[error("unknown concept index {index} for {family}")]
    InvalidConcept { family: &'static str, index: usize },
    #[error("parameter out of range: {0}")]
    InvalidParam(String),
    #[error("expected {expected} values, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("csv parse error at line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("schedule error: {0}")]
    Schedule(String),
}

/// Feature representation of an image concept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureSet {
    /// Raw grey levels scaled to [-1, 1].
    Grey,
    /// Grey levels with the 81 orientation-histogram features appended.
    GreyHog,
}

/// Stretch applied to the appended orientation-histogram block when fusing
/// it with grey attributes. The block is L2-normalized as a whole, so its
/// raw per-attribute magnitude is an order below the grey attributes;
/// stretching (with clamping) and centering rebalances the two blocks while
/// keeping every attribute inside the `[-1, 1]` input domain.
pub const HOG_FUSION_STRETCH: f64 = 8.0;

/// Maps one orientation-histogram value into the fused input domain.
pub fn hog_fusion_scale<F: Scalar>(v: F) -> F {
    let stretched = (v.to_f64().unwrap_or(0.0) * HOG_FUSION_STRETCH).min(1.0);
    F::from_f64_lossy(stretched * 2.0 - 1.0)
}

impl FeatureSet {
    pub fn dim(self, base: usize) -> usize {
        match self {
            FeatureSet::Grey => base,
            FeatureSet::GreyHog => base + hog::HOG_DIM,
        }
    }

    /// Materializes the feature vector of one grey image.
    pub fn features_of<F: Scalar>(self, grey: &[F]) -> Result<Vec<F>, DataError> {
        match self {
            FeatureSet::Grey => Ok(grey.to_vec()),
            FeatureSet::GreyHog => {
                let mut v = grey.to_vec();
                v.extend(hog::hog_features(grey)?.into_iter().map(hog_fusion_scale));
                Ok(v)
            }
        }
    }
}

/// In-memory image pool with integer class labels.
#[derive(Debug, Clone)]
pub struct ImageSet<F> {
    pub images: Vec<Vec<F>>,
    pub labels: Vec<usize>,
    pub classes: usize,
}

impl<F: Scalar> ImageSet<F> {
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// Pixel dimension of one image.
    pub fn dim(&self) -> usize {
        self.images.first().map_or(0, Vec::len)
    }
}

/// Pre-materialized sample pool emitted in stored order. This is how
/// cross-validation folds and holdout splits enter a schedule: the caller
/// slices the pool, and the stream replays it deterministically.
#[derive(Debug, Clone)]
pub struct FixedPool<F> {
    pub inputs: DenseMatrix<F>,
    pub targets: BatchTargets<F>,
    /// Output width of the emitting concept (class count, or 1).
    pub width: usize,
}

impl<F: Scalar> FixedPool<F> {
    pub fn len(&self) -> usize {
        self.inputs.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Fully determines one concept's joint distribution over inputs and targets.
#[derive(Debug, Clone)]
pub enum ConceptSpec<F> {
    Sea { concept: usize, label_noise: f64 },
    Stagger { concept: usize },
    Regression { function: RegressionFn },
    Images { set: Arc<ImageSet<F>>, classes: Vec<usize>, features: FeatureSet },
    Fixed { pool: Arc<FixedPool<F>> },
}

impl<F: Scalar> ConceptSpec<F> {
    pub fn input_dim(&self) -> usize {
        match self {
            ConceptSpec::Sea { .. } => 3,
            ConceptSpec::Stagger { .. } => 9,
            ConceptSpec::Regression { .. } => 1,
            ConceptSpec::Images { set, features, .. } => features.dim(set.dim()),
            ConceptSpec::Fixed { pool } => pool.inputs.rows(),
        }
    }

    /// Output width the concept needs: class count, or 1 for regression.
    pub fn class_count(&self) -> usize {
        match self {
            ConceptSpec::Sea { .. } | ConceptSpec::Stagger { .. } => 2,
            ConceptSpec::Regression { .. } => 1,
            ConceptSpec::Images { classes, .. } => classes.len(),
            ConceptSpec::Fixed { pool } => pool.width,
        }
    }

    fn is_regression(&self) -> bool {
        match self {
            ConceptSpec::Regression { .. } => true,
            ConceptSpec::Fixed { pool } => matches!(pool.targets, BatchTargets::Values(_)),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftKind {
    Sudden,
    RecurringShuffled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftType {
    Virtual,
    Real,
    Hybrid,
}

/// One concept's appearance in a segment. `concept_id` identifies the
/// concept across the whole schedule (for bookkeeping and evaluation);
/// `block` is the output block its targets live in. Distinct concepts may
/// share a block when they emit the same label set.
#[derive(Debug, Clone)]
pub struct StreamConcept<F> {
    pub concept_id: usize,
    pub block: usize,
    pub spec: ConceptSpec<F>,
    /// Explicit sample budget within the segment; concepts without one split
    /// the remaining budget evenly.
    pub samples: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Segment<F> {
    pub concepts: Vec<StreamConcept<F>>,
    pub samples: usize,
    pub kind: DriftKind,
    /// Drift marker announcing this segment; `None` only for the first.
    pub transition: Option<DriftType>,
}

#[derive(Debug, Clone)]
pub struct DriftSchedule<F> {
    pub segments: Vec<Segment<F>>,
    pub batch_size: usize,
}

impl<F: Scalar> DriftSchedule<F> {
    pub fn total_samples(&self) -> usize {
        self.segments.iter().map(|s| s.samples).sum()
    }

    fn validate(&self) -> Result<(), DataError> {
        let fail = |msg: String| Err(DataError::Schedule(msg));
        if self.segments.is_empty() {
            return fail("schedule has no segments".into());
        }
        if self.batch_size == 0 {
            return fail("batch size must be positive".into());
        }
        let mut prev_dim: Option<usize> = None;
        let mut blocks_seen = 0usize;
        for (idx, seg) in self.segments.iter().enumerate() {
            if seg.concepts.is_empty() || seg.samples == 0 {
                return fail(format!("segment {idx} is empty"));
            }
            let explicit: usize = seg.concepts.iter().filter_map(|c| c.samples).sum();
            let free = seg.concepts.iter().filter(|c| c.samples.is_none()).count();
            if explicit > seg.samples || (free == 0 && explicit != seg.samples) {
                return fail(format!(
                    "segment {idx}: explicit budgets ({explicit}) disagree with total ({})",
                    seg.samples
                ));
            }
            if idx == 0 && seg.transition.is_some() {
                return fail("first segment must not carry a drift marker".into());
            }
            if idx > 0 && seg.transition.is_none() {
                return fail(format!("segment {idx} is missing its drift marker"));
            }
            let dim = seg.concepts[0].spec.input_dim();
            let regression = seg.concepts[0].spec.is_regression();
            for c in &seg.concepts {
                if c.spec.input_dim() != dim {
                    return fail(format!("segment {idx} mixes input dimensions"));
                }
                if c.spec.is_regression() != regression {
                    return fail(format!("segment {idx} mixes regression and classification"));
                }
            }
            if let Some(prev) = prev_dim {
                let grows = dim > prev;
                let marker = seg.transition;
                if dim < prev {
                    return fail(format!("segment {idx} shrinks the input space"));
                }
                if grows
                    && !matches!(marker, Some(DriftType::Virtual) | Some(DriftType::Hybrid))
                {
                    return fail(format!(
                        "segment {idx} grows inputs without a virtual/hybrid marker"
                    ));
                }
            }
            let mut new_block = false;
            for c in &seg.concepts {
                if c.block > blocks_seen {
                    return fail(format!(
                        "segment {idx}: block {} introduced out of order",
                        c.block
                    ));
                }
                if c.block == blocks_seen {
                    blocks_seen += 1;
                    new_block = true;
                }
            }
            if idx > 0
                && new_block
                && !matches!(seg.transition, Some(DriftType::Real) | Some(DriftType::Hybrid))
            {
                return fail(format!(
                    "segment {idx} introduces output blocks without a real/hybrid marker"
                ));
            }
            prev_dim = Some(dim);
        }
        Ok(())
    }
}

/// Targets carried by a stream batch.
#[derive(Debug, Clone, PartialEq)]
pub enum BatchTargets<F> {
    /// Within-concept class indices.
    Classes(Vec<usize>),
    /// Regression values.
    Values(Vec<F>),
}

/// A batch of samples in stream order: inputs column-per-sample plus the
/// emitting concept and output block of every sample.
#[derive(Debug, Clone)]
pub struct StreamBatch<F> {
    pub inputs: DenseMatrix<F>,
    pub targets: BatchTargets<F>,
    pub concepts: Vec<usize>,
    pub blocks: Vec<usize>,
}

impl<F: Scalar> StreamBatch<F> {
    pub fn len(&self) -> usize {
        self.inputs.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Announces the next segment so the driver can adapt the learner before
/// the first batch of the new shape arrives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DriftMarker {
    pub drift_type: DriftType,
    pub kind: DriftKind,
    pub input_dim: usize,
    pub incoming: Vec<IncomingConcept>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncomingConcept {
    pub concept_id: usize,
    pub block: usize,
    pub classes: usize,
}

#[derive(Debug, Clone)]
pub enum StreamEvent<F> {
    Drift(DriftMarker),
    Batch(StreamBatch<F>),
}

/// Deterministic event stream over a drift schedule.
///
/// Rng consumption per segment is fixed: one child stream per concept in
/// declaration order, then one child stream for the interleave order of
/// shuffled segments. Segments are materialized lazily, one at a time.
pub struct ScheduleStream<F> {
    segments: std::vec::IntoIter<Segment<F>>,
    batch_size: usize,
    rng: RngStream,
    queue: VecDeque<StreamEvent<F>>,
}

pub fn compose_schedule<F: Scalar>(
    schedule: &DriftSchedule<F>,
    rng: &mut RngStream,
) -> Result<ScheduleStream<F>, DataError> {
    schedule.validate()?;
    Ok(ScheduleStream {
        segments: schedule.segments.clone().into_iter(),
        batch_size: schedule.batch_size,
        rng: rng.split(),
        queue: VecDeque::new(),
    })
}

impl<F: Scalar> Iterator for ScheduleStream<F> {
    type Item = StreamEvent<F>;

    fn next(&mut self) -> Option<StreamEvent<F>> {
        loop {
            if let Some(event) = self.queue.pop_front() {
                return Some(event);
            }
            let segment = self.segments.next()?;
            materialize_segment(&segment, self.batch_size, &mut self.rng, &mut self.queue);
        }
    }
}

struct RawSample<F> {
    features: Vec<F>,
    class: usize,
    value: F,
    concept: usize,
    block: usize,
}

fn materialize_segment<F: Scalar>(
    segment: &Segment<F>,
    batch_size: usize,
    rng: &mut RngStream,
    queue: &mut VecDeque<StreamEvent<F>>,
) {
    if let Some(drift_type) = segment.transition {
        queue.push_back(StreamEvent::Drift(DriftMarker {
            drift_type,
            kind: segment.kind,
            input_dim: segment.concepts[0].spec.input_dim(),
            incoming: segment
                .concepts
                .iter()
                .map(|c| IncomingConcept {
                    concept_id: c.concept_id,
                    block: c.block,
                    classes: c.spec.class_count(),
                })
                .collect(),
        }));
    }

    // per-concept budgets: explicit shares first, the rest split as evenly
    // as possible with the remainder toward the front
    let k = segment.concepts.len();
    let explicit: usize = segment.concepts.iter().filter_map(|c| c.samples).sum();
    let free = segment.concepts.iter().filter(|c| c.samples.is_none()).count();
    let leftover = segment.samples.saturating_sub(explicit);
    let base = if free > 0 { leftover / free } else { 0 };
    let remainder = if free > 0 { leftover % free } else { 0 };
    let mut streams: Vec<Vec<RawSample<F>>> = Vec::with_capacity(k);
    let mut free_seen = 0usize;
    for concept in &segment.concepts {
        let n = concept.samples.unwrap_or_else(|| {
            let n = base + usize::from(free_seen < remainder);
            free_seen += 1;
            n
        });
        let mut sub_rng = rng.split();
        let mut stream = Vec::with_capacity(n);
        generate_concept(concept, n, &mut sub_rng, &mut stream);
        streams.push(stream);
    }
    let mut order_rng = rng.split();
    let samples: Vec<RawSample<F>> = if segment.kind == DriftKind::RecurringShuffled && k > 1 {
        // order-preserving interleave: permute which concept emits next, so
        // sorting the result by origin recovers each pure stream exactly
        let mut tags: Vec<usize> = streams
            .iter()
            .enumerate()
            .flat_map(|(i, s)| std::iter::repeat(i).take(s.len()))
            .collect();
        order_rng.shuffle(&mut tags);
        let mut cursors: Vec<std::vec::IntoIter<RawSample<F>>> =
            streams.into_iter().map(Vec::into_iter).collect();
        tags.into_iter()
            .map(|tag| cursors[tag].next().expect("tag counts match stream lengths"))
            .collect()
    } else {
        streams.into_iter().flatten().collect()
    };

    let regression = segment.concepts[0].spec.is_regression();
    let dim = segment.concepts[0].spec.input_dim();
    for chunk in samples.chunks(batch_size) {
        let inputs = DenseMatrix::from_fn(dim, chunk.len(), |i, j| chunk[j].features[i]);
        let targets = if regression {
            BatchTargets::Values(chunk.iter().map(|s| s.value).collect())
        } else {
            BatchTargets::Classes(chunk.iter().map(|s| s.class).collect())
        };
        queue.push_back(StreamEvent::Batch(StreamBatch {
            inputs,
            targets,
            concepts: chunk.iter().map(|s| s.concept).collect(),
            blocks: chunk.iter().map(|s| s.block).collect(),
        }));
    }
}


fn generate_concept<F: Scalar>(
    concept: &StreamConcept<F>,
    n: usize,
    rng: &mut RngStream,
    out: &mut Vec<RawSample<F>>,
) {
    match &concept.spec {
        ConceptSpec::Sea { concept: index, label_noise } => {
            let (features, labels) =
                sea::generate_raw::<F>(n, *index, *label_noise, rng).expect("validated spec");
            push_classified(features, labels, concept, out);
        }
        ConceptSpec::Stagger { concept: index } => {
            let (features, labels) =
                stagger::generate_raw::<F>(n, *index, rng).expect("validated spec");
            push_classified(features, labels, concept, out);
        }
        ConceptSpec::Regression { function } => {
            let (xs, ys) = gen_regression::<F>(*function, n, rng);
            for (x, y) in xs.into_iter().zip(ys) {
                out.push(RawSample {
                    features: vec![x],
                    class: 0,
                    value: y,
                    concept: concept.concept_id,
                    block: concept.block,
                });
            }
        }
        ConceptSpec::Images { set, classes, features } => {
            let pool: Vec<usize> = (0..set.len())
                .filter(|&i| classes.contains(&set.labels[i]))
                .collect();
            assert!(!pool.is_empty(), "image concept has an empty class pool");
            let picks: Vec<usize> = if pool.len() >= n {
                // sample without replacement
                let mut indices = pool;
                rng.shuffle(&mut indices);
                indices.truncate(n);
                indices
            } else {
                (0..n).map(|_| pool[rng.next_index(pool.len())]).collect()
            };
            for idx in picks {
                let feat = features
                    .features_of(&set.images[idx])
                    .expect("image length checked by set");
                let class = classes
                    .iter()
                    .position(|&c| c == set.labels[idx])
                    .expect("pool filtered by class membership");
                out.push(RawSample {
                    features: feat,
                    class,
                    value: F::zero(),
                    concept: concept.concept_id,
                    block: concept.block,
                });
            }
        }
        ConceptSpec::Fixed { pool } => {
            let len = pool.len();
            assert!(len > 0, "fixed pool is empty");
            for i in 0..n {
                let idx = i % len;
                let (class, value) = match &pool.targets {
                    BatchTargets::Classes(ls) => (ls[idx], F::zero()),
                    BatchTargets::Values(vs) => (0, vs[idx]),
                };
                out.push(RawSample {
                    features: (0..pool.inputs.rows()).map(|r| pool.inputs.get(r, idx)).collect(),
                    class,
                    value,
                    concept: concept.concept_id,
                    block: concept.block,
                });
            }
        }
    }
}

fn push_classified<F: Scalar>(
    features: DenseMatrix<F>,
    labels: Vec<usize>,
    concept: &StreamConcept<F>,
    out: &mut Vec<RawSample<F>>,
) {
    for (j, class) in labels.into_iter().enumerate() {
        out.push(RawSample {
            features: (0..features.rows()).map(|i| features.get(i, j)).collect(),
            class,
            value: F::zero(),
            concept: concept.concept_id,
            block: concept.block,
        });
    }
}
