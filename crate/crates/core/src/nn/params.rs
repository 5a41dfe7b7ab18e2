use std::ops::ControlFlow;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{AdamConfig, AdamState};
use super::matrix::Matrix;
use crate::error::{Error, Result};

/// RNG used for initialization, shuffling and dropout masks.
pub type ModelRng = ChaCha8Rng;

/// One gradient tensor per parameter tensor, in parameter order.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    tensors: Vec<Matrix>,
}

impl GradientSet {
    pub fn new(tensors: Vec<Matrix>) -> Self {
        GradientSet { tensors }
    }

    pub fn zeros_like(params: &[&Matrix]) -> Self {
        GradientSet {
            tensors: params.iter().map(|p| Matrix::zeros(p.rows(), p.cols())).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Matrix> {
        self.tensors.iter()
    }

    pub fn tensors(&self) -> &[Matrix] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Matrix] {
        &mut self.tensors
    }

    pub fn scale(&mut self, factor: f64) {
        for t in &mut self.tensors {
            t.as_mut_slice().iter_mut().for_each(|v| *v *= factor);
        }
    }

    /// Flattened view of every gradient value, in parameter order.
    pub fn flat(&self) -> Vec<f64> {
        self.tensors.iter().flat_map(|t| t.as_slice().iter().copied()).collect()
    }
}

/// Models whose parameters can be read, written and differentiated.
pub trait Trainable {
    type Example;

    fn parameters(&self) -> Vec<&Matrix>;

    fn parameters_mut(&mut self) -> Vec<&mut Matrix>;

    /// Mean loss over `batch` and its exact gradient. Dropout masks are drawn
    /// from `rng` once per example and layer.
    fn batch_gradients(
        &self,
        batch: &[&Self::Example],
        rng: &mut ModelRng,
    ) -> Result<(f64, GradientSet)>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 32,
            adam: AdamConfig::default(),
            seed: 42,
        }
    }
}

/// Mini-batch Adam training. Examples are reshuffled every epoch from a
/// generator seeded with `config.seed`. Returns the mean training loss of
/// each completed epoch; `on_epoch` may stop training early.
pub fn fit<M, F>(
    model: &mut M,
    examples: &[M::Example],
    config: &TrainConfig,
    mut on_epoch: F,
) -> Result<Vec<f64>>
where
    M: Trainable,
    F: FnMut(usize, f64, &M) -> ControlFlow<()>,
{
    if examples.is_empty() {
        return Err(Error::EmptyInput("cannot train on an empty dataset".into()));
    }
    if config.batch_size == 0 {
        return Err(Error::Parameter("batch size must be >= 1".into()));
    }
    let mut adam = AdamState::new(config.adam)?;
    let mut rng = ModelRng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut trace = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&M::Example> = chunk.iter().map(|&i| &examples[i]).collect();
            let (loss, grads) = model.batch_gradients(&batch, &mut rng)?;
            if !loss.is_finite() {
                return Err(Error::Parameter(format!(
                    "training diverged: non-finite loss in epoch {epoch}"
                )));
            }
            total += loss * chunk.len() as f64;
            adam.step(&mut model.parameters_mut(), &grads)?;
        }
        let mean = total / examples.len() as f64;
        log::debug!("epoch {epoch}: mean loss {mean:.6}");
        trace.push(mean);
        if on_epoch(epoch, mean, model).is_break() {
            break;
        }
    }
    Ok(trace)
}

/// Glorot-uniform limit `sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}
