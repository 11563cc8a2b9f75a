//! Learner state, initialization and prediction.
//!
//! The model is a single hidden layer of `L` random nodes. Input weights and
//! biases are drawn once and never tuned; only the output weights `beta` are
//! learned. The autocorrelation matrix `K` accumulates `HᵀH` over every batch
//! seen so far and is primed with `I/c` at initialization so each solve is
//! well posed from the first batch onward.
//!
//! Output columns are partitioned into concept blocks. Classification can be
//! marginalized to one block (ignoring every other concept's columns), and a
//! single-column block can act as a regression head with a multiplicative
//! gain that compensates dilution after drift events.

use thiserror::Error;

use crate::linalg::{random_matrix, RandomScheme};
use crate::matrix::{DenseMatrix, MatrixError};
use crate::rng::RngStream;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Shape(#[from] MatrixError),
    #[error("input has {got} attributes, model expects {expected}")]
    InputDim { expected: usize, got: usize },
    #[error("unknown concept id {0}")]
    UnknownConcept(usize),
    #[error("concept {concept} has width {width}; regression needs a single output column")]
    NotRegression { concept: usize, width: usize },
    #[error("ridge factor must be positive, got {0}")]
    InvalidRidge(f64),
    #[error("model dimensions must be at least 1")]
    EmptyDimension,
    #[error("targets have {got} columns, model expects {expected}")]
    TargetDim { expected: usize, got: usize },
    #[error("batch contains no samples")]
    EmptyBatch,
}

/// Hidden-node activation function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Sigmoid,
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply<F: Scalar>(self, z: F) -> F {
        match self {
            Activation::Sigmoid => F::one() / (F::one() + (-z).exp()),
            Activation::Tanh => z.tanh(),
        }
    }
}

/// Weight initialization scheme.
///
/// `Norm` draws input weights from a standard normal; `Ros` draws them
/// uniform on `[-1, 1]`. Both prime the autocorrelation with `I/c`, which is
/// the regularizing part that makes the early solves robust.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitScheme {
    Norm,
    Ros,
}

impl InitScheme {
    /// Distribution the input weights are drawn from.
    pub fn weight_scheme(self) -> RandomScheme {
        match self {
            InitScheme::Norm => RandomScheme::Normal,
            InitScheme::Ros => RandomScheme::Uniform,
        }
    }
}

/// Contiguous run of output columns owned by one concept.
#[derive(Debug, Clone, PartialEq)]
pub struct ConceptBlock<F> {
    col_start: usize,
    width: usize,
    gain: F,
}

impl<F: Scalar> ConceptBlock<F> {
    pub fn col_start(&self) -> usize {
        self.col_start
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn columns(&self) -> std::ops::Range<usize> {
        self.col_start..self.col_start + self.width
    }

    pub fn gain(&self) -> F {
        self.gain
    }
}

/// Which output columns a classification should consider.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConceptScope {
    /// Argmax over every output column; returned labels are global column
    /// indices.
    All,
    /// Argmax restricted to one concept's block; returned labels are indices
    /// within that block.
    Concept(usize),
}

/// Complete learner state.
#[derive(Debug, Clone, PartialEq)]
pub struct ElmModel<F> {
    input_weights: DenseMatrix<F>, // d x L
    bias: Vec<F>,                  // L
    autocorr: DenseMatrix<F>,      // L x L
    output_weights: DenseMatrix<F>, // L x m
    ridge: F,
    activation: Activation,
    scheme: InitScheme,
    concepts: Vec<ConceptBlock<F>>,
}

impl<F: Scalar> ElmModel<F> {
    /// Fresh model with zero output weights and one concept block covering
    /// all `outputs` columns. Consumes `rng` deterministically: first the
    /// input weights (row major), then the biases.
    pub fn init(
        inputs: usize,
        hidden: usize,
        outputs: usize,
        scheme: InitScheme,
        ridge: F,
        rng: &mut RngStream,
    ) -> Result<Self, ModelError> {
        if inputs == 0 || hidden == 0 || outputs == 0 {
            return Err(ModelError::EmptyDimension);
        }
        if !(ridge > F::zero()) || !ridge.is_finite() {
            return Err(ModelError::InvalidRidge(ridge.to_f64().unwrap_or(f64::NAN)));
        }
        let input_weights = random_matrix(rng, inputs, hidden, scheme.weight_scheme());
        let bias: Vec<F> =
            (0..hidden).map(|_| F::from_f64_lossy(rng.uniform(-1.0, 1.0))).collect();
        let mut autocorr = DenseMatrix::zeros(hidden, hidden);
        autocorr.add_diag(F::one() / ridge);
        Ok(Self {
            input_weights,
            bias,
            autocorr,
            output_weights: DenseMatrix::zeros(hidden, outputs),
            ridge,
            activation: Activation::Sigmoid,
            scheme,
            concepts: vec![ConceptBlock { col_start: 0, width: outputs, gain: F::one() }],
        })
    }

    pub fn with_activation(mut self, activation: Activation) -> Self {
        self.activation = activation;
        self
    }

    pub fn input_dim(&self) -> usize {
        self.input_weights.rows()
    }

    pub fn hidden_count(&self) -> usize {
        self.input_weights.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.output_weights.cols()
    }

    pub fn ridge(&self) -> F {
        self.ridge
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn scheme(&self) -> InitScheme {
        self.scheme
    }

    pub fn concepts(&self) -> &[ConceptBlock<F>] {
        &self.concepts
    }

    pub fn concept(&self, id: usize) -> Result<&ConceptBlock<F>, ModelError> {
        self.concepts.get(id).ok_or(ModelError::UnknownConcept(id))
    }

    pub fn input_weights(&self) -> &DenseMatrix<F> {
        &self.input_weights
    }

    pub fn bias(&self) -> &[F] {
        &self.bias
    }

    pub fn autocorrelation(&self) -> &DenseMatrix<F> {
        &self.autocorr
    }

    pub fn output_weights(&self) -> &DenseMatrix<F> {
        &self.output_weights
    }

    /// Hidden-layer response for a `d x N` input batch: the `N x L` matrix
    /// with `H[n][l] = g(a_l . x_n + b_l)`. Depends only on the input
    /// weights, biases and activation.
    pub fn hidden_activations(&self, x: &DenseMatrix<F>) -> Result<DenseMatrix<F>, ModelError> {
        if x.rows() != self.input_dim() {
            return Err(ModelError::InputDim { expected: self.input_dim(), got: x.rows() });
        }
        let mut h = x.t_mul(&self.input_weights)?;
        let g = self.activation;
        for i in 0..h.rows() {
            let row = h.row_mut(i);
            for (v, &b) in row.iter_mut().zip(&self.bias) {
                *v = g.apply(*v + b);
            }
        }
        Ok(h)
    }

    /// Raw output scores `H * beta`, `N x m`.
    pub fn predict_scores(&self, x: &DenseMatrix<F>) -> Result<DenseMatrix<F>, ModelError> {
        let h = self.hidden_activations(x)?;
        Ok(h.matmul(&self.output_weights)?)
    }

    /// Per-sample argmax labels, optionally marginalized to one concept
    /// block. Ties break toward the lowest index.
    pub fn classify(&self, x: &DenseMatrix<F>, scope: ConceptScope) -> Result<Vec<usize>, ModelError> {
        let scores = self.predict_scores(x)?;
        self.classify_scores(&scores, scope)
    }

    /// Argmax over already-computed scores; used by drivers that keep the
    /// score matrix around.
    pub fn classify_scores(
        &self,
        scores: &DenseMatrix<F>,
        scope: ConceptScope,
    ) -> Result<Vec<usize>, ModelError> {
        let cols = match scope {
            ConceptScope::All => 0..self.output_dim(),
            ConceptScope::Concept(id) => self.concept(id)?.columns(),
        };
        let mut labels = Vec::with_capacity(scores.rows());
        for i in 0..scores.rows() {
            let row = scores.row(i);
            let mut best = cols.start;
            for j in cols.clone() {
                if row[j] > row[best] {
                    best = j;
                }
            }
            labels.push(best - cols.start);
        }
        Ok(labels)
    }

    /// Regression output of a single-column concept block: gain times the
    /// raw score of that column.
    pub fn predict_regression(
        &self,
        x: &DenseMatrix<F>,
        concept_id: usize,
    ) -> Result<Vec<F>, ModelError> {
        let block = self.concept(concept_id)?;
        if block.width != 1 {
            return Err(ModelError::NotRegression { concept: concept_id, width: block.width });
        }
        let col = block.col_start;
        let gain = block.gain;
        let scores = self.predict_scores(x)?;
        Ok((0..scores.rows()).map(|i| scores.get(i, col) * gain).collect())
    }

    // Crate-internal mutators used by the sequential and adaptation operators.

    pub(crate) fn replace_core(
        &mut self,
        input_weights: DenseMatrix<F>,
        bias: Vec<F>,
        autocorr: DenseMatrix<F>,
        output_weights: DenseMatrix<F>,
    ) {
        self.input_weights = input_weights;
        self.bias = bias;
        self.autocorr = autocorr;
        self.output_weights = output_weights;
    }

    pub(crate) fn set_autocorr_and_beta(
        &mut self,
        autocorr: DenseMatrix<F>,
        output_weights: DenseMatrix<F>,
    ) {
        self.autocorr = autocorr;
        self.output_weights = output_weights;
    }

    pub(crate) fn set_input_weights(&mut self, input_weights: DenseMatrix<F>) {
        self.input_weights = input_weights;
    }

    pub(crate) fn set_output_weights(&mut self, output_weights: DenseMatrix<F>) {
        self.output_weights = output_weights;
    }

    pub(crate) fn concepts_mut(&mut self) -> &mut Vec<ConceptBlock<F>> {
        &mut self.concepts
    }

    pub(crate) fn push_concept(&mut self, width: usize) {
        let col_start = self.output_dim() - width;
        self.concepts.push(ConceptBlock { col_start, width, gain: F::one() });
    }

    pub(crate) fn widen_last_concept(&mut self, added: usize) {
        let block = self.concepts.last_mut().expect("models always hold one block");
        block.width += added;
    }

    /// Rebuilds a model from raw parts, re-validating every structural
    /// invariant. This is the entry point for deserialization.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        input_weights: DenseMatrix<F>,
        bias: Vec<F>,
        autocorr: DenseMatrix<F>,
        output_weights: DenseMatrix<F>,
        ridge: F,
        activation: Activation,
        scheme: InitScheme,
        blocks: Vec<(usize, usize, F)>,
    ) -> Result<Self, ModelError> {
        let hidden = input_weights.cols();
        let outputs = output_weights.cols();
        if input_weights.rows() == 0 || hidden == 0 || outputs == 0 {
            return Err(ModelError::EmptyDimension);
        }
        if bias.len() != hidden
            || autocorr.shape() != (hidden, hidden)
            || output_weights.rows() != hidden
        {
            return Err(ModelError::Shape(MatrixError::ShapeMismatch {
                op: "from_parts",
                lhs_rows: hidden,
                lhs_cols: hidden,
                rhs_rows: autocorr.rows(),
                rhs_cols: autocorr.cols(),
            }));
        }
        if !(ridge > F::zero()) || !ridge.is_finite() {
            return Err(ModelError::InvalidRidge(ridge.to_f64().unwrap_or(f64::NAN)));
        }
        let mut cursor = 0usize;
        let mut concepts = Vec::with_capacity(blocks.len());
        for (col_start, width, gain) in blocks {
            if col_start != cursor || width == 0 || !(gain > F::zero()) {
                return Err(ModelError::UnknownConcept(concepts.len()));
            }
            cursor += width;
            concepts.push(ConceptBlock { col_start, width, gain });
        }
        if cursor != outputs || concepts.is_empty() {
            return Err(ModelError::TargetDim { expected: outputs, got: cursor });
        }
        Ok(Self {
            input_weights,
            bias,
            autocorr,
            output_weights,
            ridge,
            activation,
            scheme,
            concepts,
        })
    }
}

pub(crate) fn set_gain_internal<F: Scalar>(
    model: &mut ElmModel<F>,
    concept_id: usize,
    gain: F,
) -> Result<(), ModelError> {
    let n = model.concepts.len();
    let block = model.concepts_mut().get_mut(concept_id).ok_or_else(|| {
        debug_assert!(concept_id >= n);
        ModelError::UnknownConcept(concept_id)
    })?;
    block.gain = gain;
    Ok(())
}

/// A training batch: inputs as columns (`d x N`, scaled to `[-1, 1]` by the
/// caller) and targets as rows (`N x m`, one-hot within the emitting
/// concept's block for classification).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledBatch<F> {
    inputs: DenseMatrix<F>,
    targets: DenseMatrix<F>,
}

impl<F: Scalar> LabeledBatch<F> {
    pub fn new(inputs: DenseMatrix<F>, targets: DenseMatrix<F>) -> Result<Self, ModelError> {
        if inputs.cols() != targets.rows() {
            return Err(ModelError::Shape(MatrixError::ShapeMismatch {
                op: "labeled_batch",
                lhs_rows: inputs.rows(),
                lhs_cols: inputs.cols(),
                rhs_rows: targets.rows(),
                rhs_cols: targets.cols(),
            }));
        }
        if inputs.cols() == 0 {
            return Err(ModelError::EmptyBatch);
        }
        Ok(Self { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn inputs(&self) -> &DenseMatrix<F> {
        &self.inputs
    }

    pub fn targets(&self) -> &DenseMatrix<F> {
        &self.targets
    }

    pub fn into_parts(self) -> (DenseMatrix<F>, DenseMatrix<F>) {
        (self.inputs, self.targets)
    }
}

/// One-hot target matrix for labels placed inside a single block of an
/// `m`-wide output layer.
pub fn one_hot_block<F: Scalar>(
    labels: &[usize],
    block_start: usize,
    block_width: usize,
    total_outputs: usize,
) -> DenseMatrix<F> {
    let mut t = DenseMatrix::zeros(labels.len(), total_outputs);
    for (i, &label) in labels.iter().enumerate() {
        assert!(label < block_width, "label {label} outside block width {block_width}");
        t.set(i, block_start + label, F::one());
    }
    t
}
