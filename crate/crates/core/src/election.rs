//! Character-level convolutional election classifier.
//!
//! Five valid convolutions (ReLU, optional non-overlapping max pooling) over
//! the one-hot character matrix, flattened into three fully connected layers
//! ending in a single sigmoid unit. Dropout follows the first dense layer.

use std::ops::ControlFlow;

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::char_text::{Alphabet, CharMatrix, ALPHABET_SIZE, MAX_CHARS};
use crate::error::{Error, Result};
use crate::nn::{
    self, conv1d_backward, conv1d_forward, conv1d_onehot_backward, conv1d_onehot_forward,
    dense_backward_batch, dense_forward_batch, glorot_limit, maxpool1d, Activation,
    ConvLayerSpec, DenseLayerSpec, DropoutMask, GradientSet, Matrix, ModelRng, Pooled,
    TrainConfig, Trainable,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectionNetConfig {
    /// Leading rows of the character matrix fed to the network.
    pub input_len: usize,
    pub alphabet_size: usize,
    pub conv: Vec<ConvLayerSpec>,
    pub dense: Vec<DenseLayerSpec>,
}

impl Default for ElectionNetConfig {
    /// Five convolutions `(l, f, p)`: `(7, 256, 3)`, `(7, 256, 3)`, then three
    /// `(3, 256, -)`; dense `2048 -> 1024 -> 512 -> 1` with dropout 0.5 after
    /// the first.
    fn default() -> Self {
        let conv = |window, in_channels, pool| ConvLayerSpec {
            window,
            filters: 256,
            pool,
            in_channels,
        };
        let dense = |in_size, out_size, activation, dropout_rate| DenseLayerSpec {
            in_size,
            out_size,
            activation,
            dropout_rate,
        };
        ElectionNetConfig {
            input_len: MAX_CHARS,
            alphabet_size: ALPHABET_SIZE,
            conv: vec![
                conv(7, ALPHABET_SIZE, Some(3)),
                conv(7, 256, Some(3)),
                conv(3, 256, None),
                conv(3, 256, None),
                conv(3, 256, None),
            ],
            dense: vec![
                dense(2048, 1024, Activation::Relu, 0.5),
                dense(1024, 512, Activation::Relu, 0.0),
                dense(512, 1, Activation::Sigmoid, 0.0),
            ],
        }
    }
}

/// Feature-map sizes through the network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShapeChain {
    /// `(rows, channels)` of the input, then after every convolution and
    /// every pooling step, in order.
    pub maps: Vec<(usize, usize)>,
    pub flatten: usize,
    /// Output width of each dense layer.
    pub dense: Vec<usize>,
}

impl ElectionNetConfig {
    /// Computes the shape chain, rejecting any inconsistent geometry.
    pub fn shape_chain(&self) -> Result<ShapeChain> {
        if self.input_len == 0 || self.input_len > MAX_CHARS {
            return Err(Error::Config(format!(
                "input length must be in 1..={MAX_CHARS}, got {}",
                self.input_len
            )));
        }
        if self.alphabet_size != ALPHABET_SIZE {
            return Err(Error::Config(format!(
                "alphabet size must be {ALPHABET_SIZE}, got {}",
                self.alphabet_size
            )));
        }
        if self.conv.is_empty() || self.dense.is_empty() {
            return Err(Error::Config(
                "need at least one convolution and one dense layer".into(),
            ));
        }
        let mut maps = vec![(self.input_len, self.alphabet_size)];
        let (mut rows, mut channels) = (self.input_len, self.alphabet_size);
        for (i, spec) in self.conv.iter().enumerate() {
            spec.validate()?;
            if spec.in_channels != channels {
                return Err(Error::Config(format!(
                    "conv layer {} expects {} channels but receives {channels}",
                    i + 1,
                    spec.in_channels
                )));
            }
            if rows < spec.window {
                return Err(Error::Config(format!(
                    "conv layer {} window {} exceeds {rows} input rows",
                    i + 1,
                    spec.window
                )));
            }
            rows = rows - spec.window + 1;
            channels = spec.filters;
            maps.push((rows, channels));
            if let Some(p) = spec.pool {
                if rows < p {
                    return Err(Error::Config(format!(
                        "conv layer {} pool {p} exceeds {rows} rows",
                        i + 1
                    )));
                }
                rows /= p;
                maps.push((rows, channels));
            }
        }
        let flatten = rows * channels;
        let mut width = flatten;
        for (j, spec) in self.dense.iter().enumerate() {
            spec.validate()?;
            if spec.in_size != width {
                return Err(Error::Config(format!(
                    "dense layer {} expects {} inputs but receives {width}",
                    j + 1,
                    spec.in_size
                )));
            }
            if spec.activation == Activation::Softmax {
                return Err(Error::Config("softmax has no place in a binary classifier".into()));
            }
            width = spec.out_size;
        }
        let last = self.dense.last().expect("nonempty");
        if last.out_size != 1 || last.activation != Activation::Sigmoid || last.dropout_rate != 0.0 {
            return Err(Error::Config(
                "the final dense layer must be a single sigmoid unit without dropout".into(),
            ));
        }
        Ok(ShapeChain {
            maps,
            flatten,
            dense: self.dense.iter().map(|d| d.out_size).collect(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElectionLabel {
    Election,
    NonElection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectionDecision {
    pub label: ElectionLabel,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElectionExample {
    pub input: CharMatrix,
    pub election: bool,
}

impl ElectionExample {
    pub fn new(text: &str, election: bool) -> Self {
        ElectionExample {
            input: Alphabet::new().encode(text),
            election,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElectionNet {
    config: ElectionNetConfig,
    chain: ShapeChain,
    conv_weights: Vec<Matrix>,
    conv_bias: Vec<Matrix>,
    dense_weights: Vec<Matrix>,
    dense_bias: Vec<Matrix>,
}

struct ConvTrace {
    /// Input of each convolution after the first.
    inputs: Vec<Matrix>,
    /// Post-ReLU output of each convolution.
    outputs: Vec<Matrix>,
    pools: Vec<Option<Pooled>>,
    flat: Vec<f64>,
}

impl ElectionNet {
    /// Glorot-uniform weights and zero biases drawn from `seed`.
    pub fn new(config: ElectionNetConfig, seed: u64) -> Result<Self> {
        let chain = config.shape_chain()?;
        let mut rng = ModelRng::seed_from_u64(seed);
        let conv_weights = config
            .conv
            .iter()
            .map(|c| {
                let limit = glorot_limit(c.fan_in(), c.window * c.filters);
                Matrix::uniform(c.filters, c.fan_in(), limit, &mut rng)
            })
            .collect();
        let conv_bias = config.conv.iter().map(|c| Matrix::zeros(1, c.filters)).collect();
        let dense_weights = config
            .dense
            .iter()
            .map(|d| {
                let limit = glorot_limit(d.in_size, d.out_size);
                Matrix::uniform(d.out_size, d.in_size, limit, &mut rng)
            })
            .collect();
        let dense_bias = config.dense.iter().map(|d| Matrix::zeros(1, d.out_size)).collect();
        Ok(ElectionNet {
            config,
            chain,
            conv_weights,
            conv_bias,
            dense_weights,
            dense_bias,
        })
    }

    /// Rebuilds a network from tensors in [`Self::tensor_names`] order.
    pub fn from_tensors(config: ElectionNetConfig, tensors: Vec<Matrix>) -> Result<Self> {
        let mut net = ElectionNet::new(config, 0)?;
        let expected: Vec<(usize, usize)> = net.parameters().iter().map(|p| p.shape()).collect();
        if tensors.len() != expected.len() {
            return Err(Error::Shape(format!(
                "election net needs {} tensors, got {}",
                expected.len(),
                tensors.len()
            )));
        }
        for (i, (t, want)) in tensors.iter().zip(&expected).enumerate() {
            if t.shape() != *want || !t.is_finite() {
                return Err(Error::Shape(format!(
                    "tensor {} is {:?}, expected finite {:?}",
                    net.tensor_names()[i],
                    t.shape(),
                    want
                )));
            }
        }
        for (slot, t) in net.parameters_mut().into_iter().zip(tensors) {
            *slot = t;
        }
        Ok(net)
    }

    pub fn config(&self) -> &ElectionNetConfig {
        &self.config
    }

    pub fn shape_chain(&self) -> &ShapeChain {
        &self.chain
    }

    pub fn tensor_names(&self) -> Vec<String> {
        let conv = (0..self.conv_weights.len())
            .flat_map(|i| [format!("conv{i}.weight"), format!("conv{i}.bias")]);
        let dense = (0..self.dense_weights.len())
            .flat_map(|j| [format!("dense{j}.weight"), format!("dense{j}.bias")]);
        conv.chain(dense).collect()
    }

    fn conv_forward(&self, input: &CharMatrix, first_t: &Matrix) -> Result<ConvTrace> {
        let active = input.active_columns();
        let active = &active[..self.config.input_len];
        let mut inputs = Vec::with_capacity(self.config.conv.len() - 1);
        let mut outputs = Vec::with_capacity(self.config.conv.len());
        let mut pools = Vec::with_capacity(self.config.conv.len());
        let mut current: Option<Matrix> = None;
        for (i, spec) in self.config.conv.iter().enumerate() {
            let bias = self.conv_bias[i].as_slice();
            let out = match current.take() {
                None => conv1d_onehot_forward(active, self.config.alphabet_size, first_t, bias)?,
                Some(x) => {
                    let out = conv1d_forward(&x, &self.conv_weights[i], bias)?;
                    inputs.push(x);
                    out
                }
            };
            let (next, pool) = match spec.pool {
                Some(p) => {
                    let pooled = maxpool1d(&out, p)?;
                    (pooled.output.clone(), Some(pooled))
                }
                None => (out.clone(), None),
            };
            outputs.push(out);
            pools.push(pool);
            current = Some(next);
        }
        let flat = current.expect("at least one conv layer").into_vec();
        Ok(ConvTrace {
            inputs,
            outputs,
            pools,
            flat,
        })
    }

    /// Election probability of one encoded tweet (dropout inactive).
    pub fn forward(&self, input: &CharMatrix) -> f64 {
        self.forward_batch(std::slice::from_ref(input))[0]
    }

    /// Probabilities for several inputs; each result depends only on its own
    /// input.
    pub fn forward_batch(&self, inputs: &[CharMatrix]) -> Vec<f64> {
        if inputs.is_empty() {
            return Vec::new();
        }
        let first_t = self.conv_weights[0].transpose();
        let flats: Vec<Vec<f64>> = inputs
            .iter()
            .map(|x| {
                self.conv_forward(x, &first_t)
                    .expect("shape chain validated at construction")
                    .flat
            })
            .collect();
        let mut h = Matrix::stack_rows(self.chain.flatten, flats.iter().map(Vec::as_slice))
            .expect("flatten width validated");
        for (j, spec) in self.config.dense.iter().enumerate() {
            h = dense_forward_batch(
                &h,
                &self.dense_weights[j],
                self.dense_bias[j].as_slice(),
                spec.activation,
            )
            .expect("dense shapes validated");
        }
        h.into_vec()
    }

    /// Labels `text` as election-related when its score reaches `threshold`.
    pub fn classify(&self, text: &str, threshold: f64) -> Result<ElectionDecision> {
        let score = self.forward(&Alphabet::new().encode(text));
        decide(score, threshold)
    }
}

/// Thresholds a score; `threshold` must lie strictly inside `(0, 1)`.
pub fn decide(score: f64, threshold: f64) -> Result<ElectionDecision> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Parameter(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    let label = if score >= threshold {
        ElectionLabel::Election
    } else {
        ElectionLabel::NonElection
    };
    Ok(ElectionDecision { label, score })
}

impl Trainable for ElectionNet {
    type Example = ElectionExample;

    fn parameters(&self) -> Vec<&Matrix> {
        let conv = self.conv_weights.iter().zip(&self.conv_bias).flat_map(|(w, b)| [w, b]);
        let dense = self.dense_weights.iter().zip(&self.dense_bias).flat_map(|(w, b)| [w, b]);
        conv.chain(dense).collect()
    }

    fn parameters_mut(&mut self) -> Vec<&mut Matrix> {
        let conv = self
            .conv_weights
            .iter_mut()
            .zip(self.conv_bias.iter_mut())
            .flat_map(|(w, b)| [w, b]);
        let dense = self
            .dense_weights
            .iter_mut()
            .zip(self.dense_bias.iter_mut())
            .flat_map(|(w, b)| [w, b]);
        conv.chain(dense).collect()
    }

    fn batch_gradients(
        &self,
        batch: &[&ElectionExample],
        rng: &mut ModelRng,
    ) -> Result<(f64, GradientSet)> {
        if batch.is_empty() {
            return Err(Error::EmptyInput("empty training batch".into()));
        }
        let n = batch.len();
        let n_conv = self.config.conv.len();
        let mut grads = GradientSet::zeros_like(&self.parameters());

        // Convolutional stack, one example at a time.
        let first_t = self.conv_weights[0].transpose();
        let traces = batch
            .iter()
            .map(|ex| self.conv_forward(&ex.input, &first_t))
            .collect::<Result<Vec<_>>>()?;
        let flat = Matrix::stack_rows(self.chain.flatten, traces.iter().map(|t| t.flat.as_slice()))?;

        // Dense stack for the whole batch.
        let mut inputs = vec![flat];
        let mut outputs = Vec::with_capacity(self.config.dense.len());
        let mut masks = Vec::with_capacity(self.config.dense.len());
        for (j, spec) in self.config.dense.iter().enumerate() {
            let out = dense_forward_batch(
                inputs.last().expect("nonempty"),
                &self.dense_weights[j],
                self.dense_bias[j].as_slice(),
                spec.activation,
            )?;
            let mut next = out.clone();
            let mask = if spec.dropout_rate > 0.0 {
                let per_row = (0..n)
                    .map(|_| DropoutMask::sample(spec.out_size, spec.dropout_rate, rng))
                    .collect::<Result<Vec<_>>>()?;
                for (r, m) in per_row.iter().enumerate() {
                    m.apply_in_place(next.row_mut(r));
                }
                Some(per_row)
            } else {
                None
            };
            outputs.push(out);
            masks.push(mask);
            inputs.push(next);
        }

        let probs = outputs.last().expect("nonempty");
        let mut loss = 0.0;
        let mut grad = Matrix::zeros(n, 1);
        for (r, ex) in batch.iter().enumerate() {
            let o = probs.get(r, 0);
            let t = if ex.election { 1.0 } else { 0.0 };
            loss += nn::bce_loss(o, t)?;
            // d(BCE(sigmoid(z)))/dz, taken before the probability clamp.
            grad.set(r, 0, (o - t) / n as f64);
        }
        loss /= n as f64;

        let dense_offset = 2 * n_conv;
        for j in (0..self.config.dense.len()).rev() {
            let spec = &self.config.dense[j];
            if let Some(per_row) = &masks[j] {
                for (r, m) in per_row.iter().enumerate() {
                    m.apply_in_place(grad.row_mut(r));
                }
            }
            let last = j + 1 == self.config.dense.len();
            let activation = if last { Activation::None } else { spec.activation };
            let (gw, gb) = pair_mut(grads.tensors_mut(), dense_offset + 2 * j);
            grad = dense_backward_batch(
                &inputs[j],
                &self.dense_weights[j],
                &outputs[j],
                &grad,
                activation,
                gw,
                gb.as_mut_slice(),
                true,
            )?
            .expect("input gradient requested");
        }

        // Back through the convolutions, one example at a time.
        let mut first_grad_t = Matrix::zeros(first_t.rows(), first_t.cols());
        let (last_rows, last_channels) = *self.chain.maps.last().expect("nonempty");
        for (r, (trace, ex)) in traces.iter().zip(batch).enumerate() {
            let mut g = Matrix::new(last_rows, last_channels, grad.row(r).to_vec())?;
            for i in (0..n_conv).rev() {
                let out = &trace.outputs[i];
                if let Some(pooled) = &trace.pools[i] {
                    g = pooled.backward(&g, out.rows())?;
                }
                if i == 0 {
                    let active = ex.input.active_columns();
                    let gb = grads.tensors_mut()[1].as_mut_slice();
                    conv1d_onehot_backward(
                        &active[..self.config.input_len],
                        self.config.alphabet_size,
                        out,
                        &g,
                        &mut first_grad_t,
                        gb,
                    )?;
                } else {
                    let (gw, gb) = pair_mut(grads.tensors_mut(), 2 * i);
                    g = conv1d_backward(
                        &trace.inputs[i - 1],
                        &self.conv_weights[i],
                        out,
                        &g,
                        gw,
                        gb.as_mut_slice(),
                        true,
                    )?
                    .expect("input gradient requested");
                }
            }
        }
        grads.tensors_mut()[0] = first_grad_t.transpose();
        Ok((loss, grads))
    }
}

fn pair_mut(tensors: &mut [Matrix], at: usize) -> (&mut Matrix, &mut Matrix) {
    let (a, b) = tensors[at..].split_at_mut(1);
    (&mut a[0], &mut b[0])
}

/// Trains `net` with mini-batch Adam on BCE. Returns the per-epoch mean loss.
pub fn train_election(
    net: &mut ElectionNet,
    dataset: &[ElectionExample],
    config: &TrainConfig,
) -> Result<Vec<f64>> {
    train_election_with(net, dataset, config, |_, _, _| ControlFlow::Continue(()))
}

/// [`train_election`] with a per-epoch callback that may stop training.
pub fn train_election_with<F>(
    net: &mut ElectionNet,
    dataset: &[ElectionExample],
    config: &TrainConfig,
    on_epoch: F,
) -> Result<Vec<f64>>
where
    F: FnMut(usize, f64, &ElectionNet) -> ControlFlow<()>,
{
    if dataset.is_empty() {
        return Err(Error::EmptyInput("election training set is empty".into()));
    }
    let positives = dataset.iter().filter(|e| e.election).count();
    if positives == 0 || positives == dataset.len() {
        log::warn!(
            "election training set has a single class ({positives} of {} positive)",
            dataset.len()
        );
    }
    nn::fit(net, dataset, config, on_epoch)
}
