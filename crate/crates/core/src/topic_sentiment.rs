//! Word-level convolutional classifier shared by the topic and sentiment
//! tasks.
//!
//! Tokens are embedded, convolved with one filter bank per window size,
//! max-pooled over time and concatenated. A ReLU layer compresses the
//! features before the softmax output. Dropout acts on the concatenated
//! features and on the compressed layer during training.

use std::collections::{BTreeMap, HashMap};
use std::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{SentimentLabel, TopicLabel};
use crate::nn::{
    self, conv1d_backward, conv1d_forward, dense_backward_batch, dense_forward_batch,
    embedding_backward, embedding_lookup, glorot_limit, max_over_time, Activation, DropoutMask,
    GradientSet, Matrix, ModelRng, Pooled, TrainConfig, Trainable,
};
use crate::text::tokenize;

pub const MAX_WORDS: usize = 50;
pub const PAD_INDEX: usize = 0;
pub const OOV_INDEX: usize = 1;
pub const PAD_TOKEN: &str = "<pad>";
pub const OOV_TOKEN: &str = "<oov>";

/// Lowercased, punctuation-trimmed tokens, at most [`MAX_WORDS`].
pub fn tokenize_words(text: &str) -> Vec<String> {
    let mut tokens = tokenize(text);
    tokens.truncate(MAX_WORDS);
    tokens
}

/// Word vocabulary with the padding token at index 0 and the
/// out-of-vocabulary token at index 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordVocab {
    terms: Vec<String>,
    index: HashMap<String, usize>,
}

impl WordVocab {
    /// Terms seen at least `min_count` times, by count descending then
    /// alphabetically.
    pub fn build<S: AsRef<str>>(sequences: &[Vec<S>], min_count: usize) -> Self {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for seq in sequences {
            for t in seq {
                *counts.entry(t.as_ref()).or_insert(0) += 1;
            }
        }
        let mut ranked: Vec<(&str, usize)> = counts
            .into_iter()
            .filter(|&(t, c)| c >= min_count.max(1) && t != PAD_TOKEN && t != OOV_TOKEN)
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let terms = [PAD_TOKEN, OOV_TOKEN]
            .into_iter()
            .chain(ranked.into_iter().map(|(t, _)| t))
            .map(String::from)
            .collect();
        Self::from_terms(terms).expect("reserved tokens lead")
    }

    /// Rebuilds a vocabulary from its serialized term order.
    pub fn from_terms(terms: Vec<String>) -> Result<Self> {
        if terms.len() < 2 || terms[PAD_INDEX] != PAD_TOKEN || terms[OOV_INDEX] != OOV_TOKEN {
            return Err(Error::Corrupt(format!(
                "word vocabulary must start with {PAD_TOKEN} and {OOV_TOKEN}"
            )));
        }
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::Corrupt(format!("duplicate vocabulary term {t:?}")));
            }
        }
        Ok(WordVocab { terms, index })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(OOV_INDEX)
    }

    pub fn encode(&self, text: &str) -> Vec<usize> {
        tokenize_words(text).iter().map(|t| self.id(t)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TsNetConfig {
    pub max_words: usize,
    pub embedding_dim: usize,
    pub windows: Vec<usize>,
    pub filters: usize,
    pub hidden: usize,
    pub classes: usize,
    /// Dropout on the concatenated features and on the hidden layer.
    pub dropout_rate: f64,
    /// Share of training tokens replaced by the OOV token.
    pub word_dropout: f64,
    /// Embeddings start uniform in `[-embedding_init, embedding_init]`.
    pub embedding_init: f64,
    /// Class predicted for texts without tokens.
    pub fallback_class: usize,
}

impl TsNetConfig {
    fn preset(embedding_dim: usize, hidden: usize, classes: usize, fallback_class: usize) -> Self {
        TsNetConfig {
            max_words: MAX_WORDS,
            embedding_dim,
            windows: vec![2, 3, 4],
            filters: 200,
            hidden,
            classes,
            dropout_rate: 0.5,
            word_dropout: 0.01,
            embedding_init: 0.25,
            fallback_class,
        }
    }

    pub fn topic() -> Self {
        Self::preset(300, 256, TopicLabel::ALL.len(), TopicLabel::Other.index())
    }

    pub fn sentiment() -> Self {
        Self::preset(200, 128, SentimentLabel::ALL.len(), SentimentLabel::Neutral.index())
    }

    pub fn features(&self) -> usize {
        self.filters * self.windows.len()
    }

    fn max_window(&self) -> usize {
        self.windows.iter().copied().max().unwrap_or(1)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.max_words == 0 || self.embedding_dim == 0 || self.filters == 0 || self.hidden == 0 {
            return fail("sizes must be positive".into());
        }
        if self.windows.is_empty() || self.windows.iter().any(|&w| w == 0 || w > self.max_words) {
            return fail(format!("invalid window sizes {:?}", self.windows));
        }
        if self.classes < 2 {
            return fail("need at least two classes".into());
        }
        if self.fallback_class >= self.classes {
            return fail(format!("fallback class {} out of range", self.fallback_class));
        }
        for (name, rate) in [("dropout", self.dropout_rate), ("word dropout", self.word_dropout)] {
            if !(0.0..1.0).contains(&rate) {
                return fail(format!("{name} rate must lie in [0, 1), got {rate}"));
            }
        }
        if !(self.embedding_init >= 0.0 && self.embedding_init.is_finite()) {
            return fail("embedding init range must be finite and non-negative".into());
        }
        Ok(())
    }
}

/// An encoded training text with its class index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TsExample {
    pub tokens: Vec<usize>,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub class: usize,
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TsNet {
    config: TsNetConfig,
    vocab: WordVocab,
    embeddings: Matrix,
    conv_weights: Vec<Matrix>,
    conv_bias: Vec<Matrix>,
    hidden_weights: Matrix,
    hidden_bias: Matrix,
    output_weights: Matrix,
    output_bias: Matrix,
}

struct FeatureTrace {
    /// Padded embedded input.
    embedded: Matrix,
    /// Per window: the input rows it saw and its post-ReLU map and pooling.
    maps: Vec<(Matrix, Matrix, Pooled)>,
    features: Vec<f64>,
}

impl TsNet {
    pub fn new(config: TsNetConfig, vocab: WordVocab, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ModelRng::seed_from_u64(seed);
        let d = config.embedding_dim;
        let mut embeddings = Matrix::uniform(vocab.len(), d, config.embedding_init, &mut rng);
        embeddings.row_mut(PAD_INDEX).fill(0.0);
        let conv_weights = config
            .windows
            .iter()
            .map(|&l| {
                Matrix::uniform(config.filters, l * d, glorot_limit(l * d, l * config.filters), &mut rng)
            })
            .collect();
        let conv_bias = config.windows.iter().map(|_| Matrix::zeros(1, config.filters)).collect();
        let features = config.features();
        let hidden_weights =
            Matrix::uniform(config.hidden, features, glorot_limit(features, config.hidden), &mut rng);
        let output_weights = Matrix::uniform(
            config.classes,
            config.hidden,
            glorot_limit(config.hidden, config.classes),
            &mut rng,
        );
        Ok(TsNet {
            hidden_bias: Matrix::zeros(1, config.hidden),
            output_bias: Matrix::zeros(1, config.classes),
            config,
            vocab,
            embeddings,
            conv_weights,
            conv_bias,
            hidden_weights,
            output_weights,
        })
    }

    /// Rebuilds a network from tensors in [`Self::tensor_names`] order.
    pub fn from_tensors(config: TsNetConfig, vocab: WordVocab, tensors: Vec<Matrix>) -> Result<Self> {
        let mut net = TsNet::new(config, vocab, 0)?;
        let expected: Vec<(usize, usize)> = net.parameters().iter().map(|p| p.shape()).collect();
        if tensors.len() != expected.len() {
            return Err(Error::Shape(format!(
                "word classifier needs {} tensors, got {}",
                expected.len(),
                tensors.len()
            )));
        }
        let names = net.tensor_names();
        for ((t, want), name) in tensors.iter().zip(&expected).zip(&names) {
            if t.shape() != *want || !t.is_finite() {
                return Err(Error::Shape(format!(
                    "tensor {name} is {:?}, expected finite {want:?}",
                    t.shape()
                )));
            }
        }
        for (slot, t) in net.parameters_mut().into_iter().zip(tensors) {
            *slot = t;
        }
        Ok(net)
    }

    pub fn config(&self) -> &TsNetConfig {
        &self.config
    }

    pub fn vocab(&self) -> &WordVocab {
        &self.vocab
    }

    pub fn embeddings(&self) -> &Matrix {
        &self.embeddings
    }

    pub fn output_weights_mut(&mut self) -> (&mut Matrix, &mut Matrix) {
        (&mut self.output_weights, &mut self.output_bias)
    }

    pub fn tensor_names(&self) -> Vec<String> {
        let mut names = vec!["embedding".to_string()];
        for l in &self.config.windows {
            names.push(format!("conv{l}.weight"));
            names.push(format!("conv{l}.bias"));
        }
        names.extend(["hidden.weight", "hidden.bias", "output.weight", "output.bias"].map(String::from));
        names
    }

    /// Encodes `text` and labels it, rejecting texts without tokens.
    pub fn example(&self, text: &str, label: usize) -> Result<TsExample> {
        if label >= self.config.classes {
            return Err(Error::Parameter(format!(
                "label {label} outside {} classes",
                self.config.classes
            )));
        }
        let tokens = self.vocab.encode(text);
        if tokens.is_empty() {
            return Err(Error::EmptyInput(format!("no tokens in {text:?}")));
        }
        Ok(TsExample { tokens, label })
    }

    fn features(&self, tokens: &[usize]) -> Result<FeatureTrace> {
        if tokens.is_empty() {
            return Err(Error::EmptyInput("no tokens".into()));
        }
        let tokens = &tokens[..tokens.len().min(self.config.max_words)];
        // Inputs shorter than a window are padded up to it.
        let rows = tokens.len().max(self.config.max_window());
        let mut padded = tokens.to_vec();
        padded.resize(rows, PAD_INDEX);
        let mut embedded = embedding_lookup(&self.embeddings, &padded)?;
        for (r, &t) in padded.iter().enumerate() {
            if t == PAD_INDEX {
                embedded.row_mut(r).fill(0.0);
            }
        }
        let mut maps = Vec::with_capacity(self.config.windows.len());
        let mut features = Vec::with_capacity(self.config.features());
        for (i, &l) in self.config.windows.iter().enumerate() {
            let used = tokens.len().max(l);
            let input = if used == rows {
                embedded.clone()
            } else {
                Matrix::new(used, embedded.cols(), embedded.as_slice()[..used * embedded.cols()].to_vec())?
            };
            let map = conv1d_forward(&input, &self.conv_weights[i], self.conv_bias[i].as_slice())?;
            let pooled = max_over_time(&map)?;
            features.extend_from_slice(pooled.output.as_slice());
            maps.push((input, map, pooled));
        }
        Ok(FeatureTrace {
            embedded,
            maps,
            features,
        })
    }

    fn head(&self, features: Matrix) -> Result<Matrix> {
        let h = dense_forward_batch(
            &features,
            &self.hidden_weights,
            self.hidden_bias.as_slice(),
            Activation::Relu,
        )?;
        dense_forward_batch(&h, &self.output_weights, self.output_bias.as_slice(), Activation::Softmax)
    }

    /// Class distribution for encoded tokens (dropout inactive).
    pub fn forward_tokens(&self, tokens: &[usize]) -> Result<Vec<f64>> {
        let trace = self.features(tokens)?;
        Ok(self.head(Matrix::row_vector(trace.features))?.into_vec())
    }

    /// Class distributions for several encoded inputs at once.
    pub fn forward_batch(&self, inputs: &[Vec<usize>]) -> Result<Vec<Vec<f64>>> {
        if inputs.is_empty() {
            return Ok(Vec::new());
        }
        let feats = inputs
            .iter()
            .map(|t| self.features(t).map(|f| f.features))
            .collect::<Result<Vec<_>>>()?;
        let probs = self.head(Matrix::stack_rows(
            self.config.features(),
            feats.iter().map(Vec::as_slice),
        )?)?;
        Ok((0..probs.rows()).map(|r| probs.row(r).to_vec()).collect())
    }

    pub fn forward_ts(&self, text: &str) -> Result<Vec<f64>> {
        self.forward_tokens(&self.vocab.encode(text))
    }

    /// Most probable class; texts without tokens get the fallback class and
    /// a uniform distribution.
    pub fn predict(&self, text: &str) -> Prediction {
        let tokens = self.vocab.encode(text);
        if tokens.is_empty() {
            let k = self.config.classes;
            return Prediction {
                class: self.config.fallback_class,
                probabilities: vec![1.0 / k as f64; k],
            };
        }
        let probabilities = self.forward_tokens(&tokens).expect("nonempty input");
        Prediction {
            class: argmax(&probabilities),
            probabilities,
        }
    }

    /// Vocabulary terms ranked by the probability `class` gets when the term
    /// is the whole input. Reserved tokens are not ranked.
    pub fn top_terms_per_class(&self, class: usize, k: usize) -> Result<Vec<(String, f64)>> {
        if class >= self.config.classes {
            return Err(Error::Parameter(format!(
                "class {class} outside {} classes",
                self.config.classes
            )));
        }
        let ids: Vec<usize> = (OOV_INDEX + 1..self.vocab.len()).collect();
        let mut scored = Vec::with_capacity(ids.len());
        for chunk in ids.chunks(256) {
            let inputs: Vec<Vec<usize>> = chunk.iter().map(|&i| vec![i]).collect();
            for (&i, p) in chunk.iter().zip(self.forward_batch(&inputs)?) {
                scored.push((self.vocab.terms()[i].clone(), p[class]));
            }
        }
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        scored.truncate(k);
        Ok(scored)
    }
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

impl Trainable for TsNet {
    type Example = TsExample;

    fn parameters(&self) -> Vec<&Matrix> {
        let mut p = vec![&self.embeddings];
        for (w, b) in self.conv_weights.iter().zip(&self.conv_bias) {
            p.push(w);
            p.push(b);
        }
        p.extend([&self.hidden_weights, &self.hidden_bias, &self.output_weights, &self.output_bias]);
        p
    }

    fn parameters_mut(&mut self) -> Vec<&mut Matrix> {
        let mut p = vec![&mut self.embeddings];
        for (w, b) in self.conv_weights.iter_mut().zip(self.conv_bias.iter_mut()) {
            p.push(w);
            p.push(b);
        }
        p.extend([
            &mut self.hidden_weights,
            &mut self.hidden_bias,
            &mut self.output_weights,
            &mut self.output_bias,
        ]);
        p
    }

    fn batch_gradients(&self, batch: &[&TsExample], rng: &mut ModelRng) -> Result<(f64, GradientSet)> {
        if batch.is_empty() {
            return Err(Error::EmptyInput("empty training batch".into()));
        }
        let n = batch.len();
        let cfg = &self.config;
        let mut grads = GradientSet::zeros_like(&self.parameters());

        let mut inputs = Vec::with_capacity(n);
        for ex in batch {
            if ex.label >= cfg.classes {
                return Err(Error::Parameter(format!("label {} outside {} classes", ex.label, cfg.classes)));
            }
            let tokens: Vec<usize> = ex
                .tokens
                .iter()
                .map(|&t| {
                    if cfg.word_dropout > 0.0 && rng.gen::<f64>() < cfg.word_dropout {
                        OOV_INDEX
                    } else {
                        t
                    }
                })
                .collect();
            inputs.push(tokens);
        }
        let traces = inputs
            .iter()
            .map(|t| self.features(t))
            .collect::<Result<Vec<_>>>()?;

        let features = cfg.features();
        let concat = Matrix::stack_rows(features, traces.iter().map(|t| t.features.as_slice()))?;
        let mut dropped = concat.clone();
        let mut hidden_masks = Vec::with_capacity(n);
        let mut concat_masks = Vec::with_capacity(n);
        for r in 0..n {
            let m = DropoutMask::sample(features, cfg.dropout_rate, rng)?;
            m.apply_in_place(dropped.row_mut(r));
            concat_masks.push(m);
        }
        let hidden = dense_forward_batch(
            &dropped,
            &self.hidden_weights,
            self.hidden_bias.as_slice(),
            Activation::Relu,
        )?;
        let mut hidden_dropped = hidden.clone();
        for r in 0..n {
            let m = DropoutMask::sample(cfg.hidden, cfg.dropout_rate, rng)?;
            m.apply_in_place(hidden_dropped.row_mut(r));
            hidden_masks.push(m);
        }
        let probs = dense_forward_batch(
            &hidden_dropped,
            &self.output_weights,
            self.output_bias.as_slice(),
            Activation::Softmax,
        )?;

        let mut loss = 0.0;
        let mut grad = probs.clone();
        for (r, ex) in batch.iter().enumerate() {
            loss -= probs.get(r, ex.label).max(nn::LOSS_EPS).ln();
            let v = grad.get(r, ex.label) - 1.0;
            grad.set(r, ex.label, v);
        }
        grad.as_mut_slice().iter_mut().for_each(|g| *g /= n as f64);
        loss /= n as f64;

        let n_conv = cfg.windows.len();
        let head = 1 + 2 * n_conv;
        let tensors = grads.tensors_mut();
        let (hidden_grads, output_grads) = tensors[head..].split_at_mut(2);
        let (gw, gb) = output_grads.split_at_mut(1);
        let mut g = dense_backward_batch(
            &hidden_dropped,
            &self.output_weights,
            &probs,
            &grad,
            Activation::None,
            &mut gw[0],
            gb[0].as_mut_slice(),
            true,
        )?
        .expect("input gradient requested");
        for (r, m) in hidden_masks.iter().enumerate() {
            m.apply_in_place(g.row_mut(r));
        }
        let (gw, gb) = hidden_grads.split_at_mut(1);
        let mut g = dense_backward_batch(
            &dropped,
            &self.hidden_weights,
            &hidden,
            &g,
            Activation::Relu,
            &mut gw[0],
            gb[0].as_mut_slice(),
            true,
        )?
        .expect("input gradient requested");
        for (r, m) in concat_masks.iter().enumerate() {
            m.apply_in_place(g.row_mut(r));
        }

        let (table_grad, conv_grads) = tensors[..head].split_at_mut(1);
        for (r, trace) in traces.iter().enumerate() {
            let mut grad_embedded = Matrix::zeros(trace.embedded.rows(), trace.embedded.cols());
            let row = g.row(r);
            for (i, (input, map, pooled)) in trace.maps.iter().enumerate() {
                let slice = &row[i * cfg.filters..(i + 1) * cfg.filters];
                let g_map = pooled.backward(&Matrix::row_vector(slice.to_vec()), map.rows())?;
                let (gw, gb) = conv_grads[2 * i..].split_at_mut(1);
                let g_in = conv1d_backward(
                    input,
                    &self.conv_weights[i],
                    map,
                    &g_map,
                    &mut gw[0],
                    gb[0].as_mut_slice(),
                    true,
                )?
                .expect("input gradient requested");
                for (acc, v) in grad_embedded.as_mut_slice().iter_mut().zip(g_in.as_slice()) {
                    *acc += v;
                }
            }
            let mut padded = inputs[r].clone();
            padded.truncate(cfg.max_words);
            padded.resize(trace.embedded.rows(), PAD_INDEX);
            embedding_backward(&grad_embedded, &padded, &mut table_grad[0], Some(PAD_INDEX))?;
        }
        Ok((loss, grads))
    }
}

/// Trains with mini-batch Adam on cross-entropy. Returns per-epoch mean loss.
pub fn train_ts(net: &mut TsNet, dataset: &[TsExample], config: &TrainConfig) -> Result<Vec<f64>> {
    train_ts_with(net, dataset, config, |_, _, _| ControlFlow::Continue(()))
}

/// [`train_ts`] with a per-epoch callback that may stop training.
pub fn train_ts_with<F>(
    net: &mut TsNet,
    dataset: &[TsExample],
    config: &TrainConfig,
    on_epoch: F,
) -> Result<Vec<f64>>
where
    F: FnMut(usize, f64, &TsNet) -> ControlFlow<()>,
{
    if dataset.is_empty() {
        return Err(Error::EmptyInput("training set is empty".into()));
    }
    let classes = net.config().classes;
    if let Some(bad) = dataset.iter().find(|e| e.label >= classes) {
        return Err(Error::Parameter(format!("label {} outside {classes} classes", bad.label)));
    }
    let mut present: Vec<usize> = dataset.iter().map(|e| e.label).collect();
    present.sort_unstable();
    present.dedup();
    if present.len() < 2 {
        return Err(Error::Parameter("training set needs at least two classes".into()));
    }
    nn::fit(net, dataset, config, on_epoch)
}
