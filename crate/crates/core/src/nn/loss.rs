use crate::error::{Error, Result};

/// Probability floor used by both losses to keep `log` finite.
pub const LOSS_EPS: f64 = 1e-7;

/// Numerically stable softmax (shifted by the maximum logit).
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>> {
    if logits.is_empty() {
        return Err(Error::Shape("softmax of an empty vector".into()));
    }
    Ok(softmax_unchecked(logits))
}

pub(crate) fn softmax_unchecked(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&x| (x - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= sum);
    out
}

/// Binary cross-entropy `-t ln(o) - (1 - t) ln(1 - o)` with `o` clamped to
/// `[LOSS_EPS, 1 - LOSS_EPS]`.
pub fn bce_loss(predicted: f64, target: f64) -> Result<f64> {
    if target != 0.0 && target != 1.0 {
        return Err(Error::Parameter(format!(
            "binary target must be 0 or 1, got {target}"
        )));
    }
    let o = predicted.clamp(LOSS_EPS, 1.0 - LOSS_EPS);
    Ok(-target * o.ln() - (1.0 - target) * (1.0 - o).ln())
}

/// `-sum p(x) ln q(x)` with `q` floored at `LOSS_EPS`.
pub fn cross_entropy_loss(true_dist: &[f64], predicted: &[f64]) -> Result<f64> {
    if true_dist.len() != predicted.len() {
        return Err(Error::Shape(format!(
            "cross-entropy over {} true and {} predicted classes",
            true_dist.len(),
            predicted.len()
        )));
    }
    Ok(true_dist
        .iter()
        .zip(predicted)
        .filter(|(&p, _)| p != 0.0)
        .map(|(&p, &q)| -p * q.max(LOSS_EPS).ln())
        .sum())
}
