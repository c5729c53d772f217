//! Mention-wise attention BiLSTM classifier for sub-level relations.
//!
//! Tokens are embedded as a word vector plus one relative-position vector per
//! mention (the event, and for E-T links also the timex). A bidirectional
//! LSTM produces one state `h̄_s` per token. For each mention with state
//! `h_m`, attention scores `h_mᵀ W_a h̄_s` are normalized by softmax into
//! weights `a_m`, the context `c_m = Σ a_m(s) h̄_s` is formed, and the mention
//! representation is `[h_m; c_m]`. The concatenated representations feed a
//! 16-way linear layer read as four 4-way softmax groups, one per SR.
//!
//! In baseline mode the representation is the final forward state and the
//! first backward state instead; the attention matrices are unused.

mod embedding;
mod io;
mod lstm;
mod optim;
mod tensor;
mod train;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{LinkInstance, LinkKind, TokenSpan};
use crate::sralgebra::{SrLabel, SrVector};

pub use embedding::{EmbeddingFileError, EmbeddingTable, PretrainedVectors, Vocabulary, UNKNOWN_ROW};
pub use io::{ModelFileError, MODEL_FORMAT_VERSION};
pub use lstm::LstmParams;
pub use optim::Adam;
pub use tensor::Matrix;
pub use train::{
    complete_match_accuracy, split_validation, train, train_with_validation, EpochRecord,
    TrainConfig, TrainError, TrainOutcome,
};

use tensor::{axpy, dot, softmax};

/// Number of sub-level relations per link.
pub const SR_COUNT: usize = 4;
/// Labels per sub-level relation.
pub const LABEL_COUNT: usize = 4;
/// Width of the output layer.
pub const OUTPUT_DIM: usize = SR_COUNT * LABEL_COUNT;
/// Upper bound on any configured dimension.
pub const MAX_DIM: usize = 1 << 16;
/// Probabilities are floored here before taking logs.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("model is configured for {expected} links but got a {found} link")]
    KindMismatch { expected: LinkKind, found: LinkKind },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("link {doc}/{event}->{target}: {message}")]
    BadLink {
        doc: String,
        event: String,
        target: String,
        message: String,
    },
}

/// Which token of a multi-token mention supplies its state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MentionHead {
    First,
    #[default]
    Last,
}

impl MentionHead {
    fn position(self, span: TokenSpan) -> usize {
        match self {
            MentionHead::First => span.start,
            MentionHead::Last => span.last(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: LinkKind,
    pub word_dim: usize,
    pub position_dim: usize,
    pub hidden_dim: usize,
    pub max_offset: usize,
    pub attention: bool,
    #[serde(default)]
    pub mention_head: MentionHead,
}

impl ModelConfig {
    pub fn new(kind: LinkKind) -> Self {
        ModelConfig {
            kind,
            word_dim: 200,
            position_dim: 16,
            hidden_dim: 64,
            max_offset: 30,
            attention: true,
            mention_head: MentionHead::Last,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in [
            ("word_dim", self.word_dim),
            ("position_dim", self.position_dim),
            ("hidden_dim", self.hidden_dim),
        ] {
            if v == 0 || v > MAX_DIM {
                return Err(ModelError::Config(format!("{name} must be in 1..={MAX_DIM}")));
            }
        }
        if self.max_offset > MAX_DIM {
            return Err(ModelError::Config("max_offset too large".into()));
        }
        Ok(())
    }

    pub fn mentions(&self) -> usize {
        self.kind.mention_count()
    }

    /// Per-token input width: word vector plus one position vector per mention.
    pub fn input_dim(&self) -> usize {
        self.word_dim + self.mentions() * self.position_dim
    }

    /// Width of the vector fed to the output layer.
    pub fn representation_dim(&self) -> usize {
        if self.attention {
            self.mentions() * 4 * self.hidden_dim
        } else {
            2 * self.hidden_dim
        }
    }
}

/// Trainable weights other than the embedding table.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParameters {
    pub forward: LstmParams,
    pub backward: LstmParams,
    /// One `2H × 2H` matrix per mention role (event, then timex).
    pub attention: Vec<Matrix>,
    /// `16 × R`
    pub output: Matrix,
    /// `16 × 1`
    pub output_bias: Matrix,
}

impl ModelParameters {
    pub fn init(config: &ModelConfig, rng: &mut ChaCha8Rng) -> Self {
        let h = config.hidden_dim;
        let forward = LstmParams::init(config.input_dim(), h, rng);
        let backward = LstmParams::init(config.input_dim(), h, rng);
        let attention = (0..config.mentions())
            .map(|_| Matrix::uniform(2 * h, 2 * h, 1.0 / (2.0 * h as f64).sqrt(), rng))
            .collect();
        let r = config.representation_dim();
        let output = Matrix::uniform(OUTPUT_DIM, r, (6.0 / (r + OUTPUT_DIM) as f64).sqrt(), rng);
        ModelParameters {
            forward,
            backward,
            attention,
            output,
            output_bias: Matrix::zeros(OUTPUT_DIM, 1),
        }
    }

    pub fn zeros_like(&self) -> Self {
        ModelParameters {
            forward: self.forward.zeros_like(),
            backward: self.backward.zeros_like(),
            attention: self.attention.iter().map(Matrix::zeros_like).collect(),
            output: self.output.zeros_like(),
            output_bias: self.output_bias.zeros_like(),
        }
    }

    /// Named tensors in serialization order.
    pub fn tensors(&self) -> Vec<(String, &Matrix)> {
        let mut out = vec![
            ("lstm_fwd.w".to_string(), &self.forward.w),
            ("lstm_fwd.u".to_string(), &self.forward.u),
            ("lstm_fwd.b".to_string(), &self.forward.b),
            ("lstm_bwd.w".to_string(), &self.backward.w),
            ("lstm_bwd.u".to_string(), &self.backward.u),
            ("lstm_bwd.b".to_string(), &self.backward.b),
        ];
        out.extend(self.attention.iter().enumerate().map(|(i, m)| (format!("attention.{i}"), m)));
        out.push(("output.w".to_string(), &self.output));
        out.push(("output.b".to_string(), &self.output_bias));
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        let mut out = vec![
            &mut self.forward.w,
            &mut self.forward.u,
            &mut self.forward.b,
            &mut self.backward.w,
            &mut self.backward.u,
            &mut self.backward.b,
        ];
        out.extend(self.attention.iter_mut());
        out.push(&mut self.output);
        out.push(&mut self.output_bias);
        out
    }
}

/// Encoder output for one link.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceEncoding {
    /// `[forward; backward]` state per token, `2H` each.
    pub states: Vec<Vec<f64>>,
    /// Token index of each mention's state (event first).
    pub mention_positions: Vec<usize>,
}

impl SequenceEncoding {
    pub fn mention_state(&self, m: usize) -> &[f64] {
        &self.states[self.mention_positions[m]]
    }
}

/// Attention result for one mention.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionOutput {
    /// One non-negative weight per time step; sums to 1.
    pub weights: Vec<f64>,
    pub context: Vec<f64>,
    /// `[h_m; c_m]`
    pub representation: Vec<f64>,
}

/// Attention of mention state `h_m` over `states` with `score = h_mᵀ W_a h̄_s`.
pub fn attend(mention: &[f64], states: &[Vec<f64>], w_a: &Matrix) -> AttentionOutput {
    let mut projected = vec![0.0; w_a.cols()];
    w_a.t_matvec_acc(mention, &mut projected);
    let scores: Vec<f64> = states.iter().map(|s| dot(&projected, s)).collect();
    let weights = softmax(&scores);
    let mut context = vec![0.0; mention.len()];
    for (a, s) in weights.iter().zip(states) {
        axpy(*a, s, &mut context);
    }
    let mut representation = mention.to_vec();
    representation.extend_from_slice(&context);
    AttentionOutput {
        weights,
        context,
        representation,
    }
}

/// Per-SR label distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct SrPrediction {
    pub probs: [[f64; LABEL_COUNT]; SR_COUNT],
}

impl SrPrediction {
    /// Groupwise softmax over 16 logits.
    pub fn from_logits(logits: &[f64]) -> Self {
        let mut probs = [[0.0; LABEL_COUNT]; SR_COUNT];
        for (i, group) in logits.chunks_exact(LABEL_COUNT).enumerate() {
            probs[i].copy_from_slice(&softmax(group));
        }
        SrPrediction { probs }
    }

    /// Argmax per SR; ties go to the earliest label in equal, after, before, vague.
    pub fn argmax(&self) -> SrVector {
        let mut labels = [SrLabel::Vague; SR_COUNT];
        for (i, dist) in self.probs.iter().enumerate() {
            let mut best = 0;
            for j in 1..LABEL_COUNT {
                if dist[j] > dist[best] {
                    best = j;
                }
            }
            labels[i] = SrLabel::from_index(best).expect("label index in range");
        }
        SrVector(labels)
    }
}

/// Summed negative log-likelihood of the gold label of every SR.
pub fn loss(pred: &SrPrediction, gold: &SrVector) -> f64 {
    gold.labels()
        .iter()
        .enumerate()
        .map(|(i, l)| -pred.probs[i][l.index()].max(PROB_FLOOR).ln())
        .sum()
}

/// Gradients shaped like a [`Model`]. Word-embedding rows are sparse.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub params: ModelParameters,
    pub words: BTreeMap<usize, Vec<f64>>,
    pub positions: Matrix,
}

impl Gradients {
    pub fn zeros_like(model: &Model) -> Self {
        Gradients {
            params: model.params.zeros_like(),
            words: BTreeMap::new(),
            positions: model.embeddings.positions.zeros_like(),
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.params.tensors_mut().into_iter().zip(other.params.tensors()) {
            a.add_assign(b.1);
        }
        for (row, g) in &other.words {
            let dst = self.words.entry(*row).or_insert_with(|| vec![0.0; g.len()]);
            axpy(1.0, g, dst);
        }
        self.positions.add_assign(&other.positions);
    }

    pub fn scale(&mut self, k: f64) {
        for t in self.params.tensors_mut() {
            t.scale(k);
        }
        for g in self.words.values_mut() {
            g.iter_mut().for_each(|v| *v *= k);
        }
        self.positions.scale(k);
    }

    pub fn norm(&self) -> f64 {
        let params: f64 = self.params.tensors().iter().map(|(_, t)| t.sum_squares()).sum();
        let words: f64 = self.words.values().map(|g| dot(g, g)).sum();
        (params + words + self.positions.sum_squares()).sqrt()
    }
}

/// A classifier for one link kind: configuration, embeddings and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub embeddings: EmbeddingTable,
    pub params: ModelParameters,
}

/// Everything the backward pass needs from a forward pass.
struct Trace {
    word_rows: Vec<usize>,
    /// `position_rows[m][t]`
    position_rows: Vec<Vec<usize>>,
    inputs: Vec<Vec<f64>>,
    forward: lstm::LstmTrace,
    backward: lstm::LstmTrace,
    encoding: SequenceEncoding,
    attention: Vec<AttentionOutput>,
    representation: Vec<f64>,
    prediction: SrPrediction,
}

impl Model {
    /// Fresh model with deterministic initialization from `seed`.
    pub fn new(
        config: ModelConfig,
        vocabulary: Vocabulary,
        pretrained: Option<&PretrainedVectors>,
        seed: u64,
    ) -> Result<Self, ModelError> {
        config.validate()?;
        if let Some(p) = pretrained {
            if p.dim != config.word_dim {
                return Err(ModelError::Config(format!(
                    "embedding file has dimension {} but word_dim is {}",
                    p.dim, config.word_dim
                )));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let embeddings = EmbeddingTable::init(
            vocabulary,
            config.word_dim,
            config.position_dim,
            config.max_offset,
            pretrained,
            &mut rng,
        );
        let params = ModelParameters::init(&config, &mut rng);
        Ok(Model {
            config,
            embeddings,
            params,
        })
    }

    fn mention_spans(&self, link: &LinkInstance) -> Result<Vec<TokenSpan>, ModelError> {
        let bad = |message: &str| ModelError::BadLink {
            doc: link.doc.clone(),
            event: link.event.clone(),
            target: link.target.clone(),
            message: message.to_string(),
        };
        if link.kind != self.config.kind {
            return Err(ModelError::KindMismatch {
                expected: self.config.kind,
                found: link.kind,
            });
        }
        if link.tokens.is_empty() {
            return Err(bad("no tokens"));
        }
        let mut spans = vec![link.event_span];
        if link.kind == LinkKind::EventTimex {
            spans.push(link.timex_span.ok_or_else(|| bad("missing timex span"))?);
        }
        if spans.iter().any(|s| s.is_empty() || s.end > link.tokens.len()) {
            return Err(bad("mention span outside tokens"));
        }
        Ok(spans)
    }

    /// Input vectors for every token of `link`.
    pub fn embed(&self, link: &LinkInstance) -> Result<Vec<Vec<f64>>, ModelError> {
        Ok(self.embed_rows(link)?.2)
    }

    #[allow(clippy::type_complexity)]
    fn embed_rows(
        &self,
        link: &LinkInstance,
    ) -> Result<(Vec<usize>, Vec<Vec<usize>>, Vec<Vec<f64>>, Vec<usize>), ModelError> {
        let spans = self.mention_spans(link)?;
        let heads: Vec<usize> = spans.iter().map(|s| self.config.mention_head.position(*s)).collect();
        let table = &self.embeddings;
        let word_rows: Vec<usize> = link.tokens.iter().map(|t| table.vocabulary.row(t)).collect();
        let position_rows: Vec<Vec<usize>> = heads
            .iter()
            .map(|&k| (0..link.tokens.len()).map(|i| table.position_row(i, k)).collect())
            .collect();
        let inputs = (0..link.tokens.len())
            .map(|t| {
                let mut x = Vec::with_capacity(self.config.input_dim());
                x.extend_from_slice(table.words.row(word_rows[t]));
                for rows in &position_rows {
                    x.extend_from_slice(table.positions.row(rows[t]));
                }
                x
            })
            .collect();
        Ok((word_rows, position_rows, inputs, heads))
    }

    fn trace(&self, link: &LinkInstance) -> Result<Trace, ModelError> {
        let (word_rows, position_rows, inputs, heads) = self.embed_rows(link)?;
        let forward = lstm::forward(&self.params.forward, &inputs, false);
        let backward = lstm::forward(&self.params.backward, &inputs, true);
        let states: Vec<Vec<f64>> = forward
            .hidden
            .iter()
            .zip(&backward.hidden)
            .map(|(f, b)| [f.as_slice(), b.as_slice()].concat())
            .collect();
        let encoding = SequenceEncoding {
            states,
            mention_positions: heads,
        };
        let h = self.config.hidden_dim;
        let (attention, representation) = if self.config.attention {
            let outs: Vec<AttentionOutput> = (0..self.config.mentions())
                .map(|m| attend(encoding.mention_state(m), &encoding.states, &self.params.attention[m]))
                .collect();
            let r = outs.iter().flat_map(|o| o.representation.iter().copied()).collect();
            (outs, r)
        } else {
            let last = encoding.states.len() - 1;
            let mut r = encoding.states[last][..h].to_vec();
            r.extend_from_slice(&encoding.states[0][h..]);
            (Vec::new(), r)
        };
        let mut logits = self.params.output_bias.data().to_vec();
        self.params.output.matvec_acc(&representation, &mut logits);
        Ok(Trace {
            word_rows,
            position_rows,
            inputs,
            forward,
            backward,
            encoding,
            attention,
            representation,
            prediction: SrPrediction::from_logits(&logits),
        })
    }

    pub fn encode(&self, link: &LinkInstance) -> Result<SequenceEncoding, ModelError> {
        Ok(self.trace(link)?.encoding)
    }

    /// Attention outputs per mention; empty in baseline mode.
    pub fn attention(&self, link: &LinkInstance) -> Result<Vec<AttentionOutput>, ModelError> {
        Ok(self.trace(link)?.attention)
    }

    pub fn forward(&self, link: &LinkInstance) -> Result<SrPrediction, ModelError> {
        Ok(self.trace(link)?.prediction)
    }

    pub fn predict(&self, link: &LinkInstance) -> Result<SrVector, ModelError> {
        Ok(self.forward(link)?.argmax())
    }

    /// Loss and exact gradients for one labeled link.
    pub fn gradients(&self, link: &LinkInstance, gold: &SrVector) -> Result<(f64, Gradients), ModelError> {
        let trace = self.trace(link)?;
        let loss_value = loss(&trace.prediction, gold);
        let mut grads = Gradients::zeros_like(self);
        let h = self.config.hidden_dim;

        let mut d_logits = vec![0.0; OUTPUT_DIM];
        for (i, label) in gold.labels().iter().enumerate() {
            for j in 0..LABEL_COUNT {
                let target = if j == label.index() { 1.0 } else { 0.0 };
                d_logits[i * LABEL_COUNT + j] = trace.prediction.probs[i][j] - target;
            }
        }
        grads.params.output.add_outer(&d_logits, &trace.representation);
        axpy(1.0, &d_logits, grads.params.output_bias.data_mut());
        let mut d_repr = vec![0.0; trace.representation.len()];
        self.params.output.t_matvec_acc(&d_logits, &mut d_repr);

        let states = &trace.encoding.states;
        let mut d_states = vec![vec![0.0; 2 * h]; states.len()];
        if self.config.attention {
            for (m, att) in trace.attention.iter().enumerate() {
                let chunk = &d_repr[m * 4 * h..(m + 1) * 4 * h];
                let (d_mention_direct, d_context) = chunk.split_at(2 * h);
                let head = trace.encoding.mention_positions[m];
                let mention = &states[head];
                let w_a = &self.params.attention[m];

                let d_weights: Vec<f64> = states.iter().map(|s| dot(d_context, s)).collect();
                let mean = dot(&att.weights, &d_weights);
                let mut d_mention = d_mention_direct.to_vec();
                let mut w_h = vec![0.0; 2 * h];
                let mut wt_m = vec![0.0; 2 * h];
                w_a.t_matvec_acc(mention, &mut wt_m);
                for (s, state) in states.iter().enumerate() {
                    axpy(att.weights[s], d_context, &mut d_states[s]);
                    let d_score = att.weights[s] * (d_weights[s] - mean);
                    if d_score == 0.0 {
                        continue;
                    }
                    grads.params.attention[m].add_outer(
                        &mention.iter().map(|v| v * d_score).collect::<Vec<_>>(),
                        state,
                    );
                    w_h.iter_mut().for_each(|v| *v = 0.0);
                    w_a.matvec_acc(state, &mut w_h);
                    axpy(d_score, &w_h, &mut d_mention);
                    axpy(d_score, &wt_m, &mut d_states[s]);
                }
                axpy(1.0, &d_mention, &mut d_states[head]);
            }
        } else {
            let last = states.len() - 1;
            axpy(1.0, &d_repr[..h], &mut d_states[last][..h]);
            axpy(1.0, &d_repr[h..], &mut d_states[0][h..]);
        }

        let d_forward: Vec<Vec<f64>> = d_states.iter().map(|d| d[..h].to_vec()).collect();
        let d_backward: Vec<Vec<f64>> = d_states.iter().map(|d| d[h..].to_vec()).collect();
        let mut d_inputs = vec![vec![0.0; self.config.input_dim()]; trace.inputs.len()];
        lstm::backward(
            &self.params.forward,
            &trace.forward,
            &trace.inputs,
            &d_forward,
            &mut grads.params.forward,
            &mut d_inputs,
        );
        lstm::backward(
            &self.params.backward,
            &trace.backward,
            &trace.inputs,
            &d_backward,
            &mut grads.params.backward,
            &mut d_inputs,
        );

        let d_w = self.config.word_dim;
        let d_p = self.config.position_dim;
        for (t, dx) in d_inputs.iter().enumerate() {
            let row = grads
                .words
                .entry(trace.word_rows[t])
                .or_insert_with(|| vec![0.0; d_w]);
            axpy(1.0, &dx[..d_w], row);
            for (m, rows) in trace.position_rows.iter().enumerate() {
                let start = d_w + m * d_p;
                axpy(1.0, &dx[start..start + d_p], grads.positions.row_mut(rows[t]));
            }
        }
        Ok((loss_value, grads))
    }

    /// Serializes to the binary model container.
    pub fn to_bytes(&self) -> Vec<u8> {
        io::encode(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ModelFileError> {
        io::decode(bytes)
    }

    pub fn is_finite(&self) -> bool {
        self.params.tensors().iter().all(|(_, t)| t.is_finite())
            && self.embeddings.words.is_finite()
            && self.embeddings.positions.is_finite()
    }
}
