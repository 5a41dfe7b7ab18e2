use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Inference,
}

fn check_rate(rate: f64) -> Result<()> {
    if (0.0..1.0).contains(&rate) {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "dropout rate must lie in [0, 1), got {rate}"
        )))
    }
}

/// Inverted dropout: in training each unit is zeroed with probability `rate`
/// and survivors are scaled by `1 / (1 - rate)`; inference is the identity.
pub fn dropout_apply<R: Rng + ?Sized>(
    input: &[f64],
    rate: f64,
    mode: Mode,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_rate(rate)?;
    match mode {
        Mode::Inference => Ok(input.to_vec()),
        Mode::Train => {
            let mask = DropoutMask::sample(input.len(), rate, rng)?;
            Ok(mask.apply(input))
        }
    }
}

/// A sampled dropout pattern, kept so the backward pass reuses it.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMask {
    scale: Vec<f64>,
}

impl DropoutMask {
    pub fn sample<R: Rng + ?Sized>(len: usize, rate: f64, rng: &mut R) -> Result<Self> {
        check_rate(rate)?;
        let keep = 1.0 / (1.0 - rate);
        let scale = (0..len)
            .map(|_| {
                if rate > 0.0 && rng.gen::<f64>() < rate {
                    0.0
                } else {
                    keep
                }
            })
            .collect();
        Ok(DropoutMask { scale })
    }

    pub fn from_scales(scale: Vec<f64>) -> Self {
        DropoutMask { scale }
    }

    pub fn len(&self) -> usize {
        self.scale.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scale.is_empty()
    }

    pub fn apply(&self, input: &[f64]) -> Vec<f64> {
        input.iter().zip(&self.scale).map(|(x, s)| x * s).collect()
    }

    pub fn apply_in_place(&self, values: &mut [f64]) {
        values.iter_mut().zip(&self.scale).for_each(|(x, s)| *x *= s);
    }
}
