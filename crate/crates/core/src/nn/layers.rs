//! Forward and backward passes for the fixed layer kinds used by both
//! classifiers: valid 1-d convolution with ReLU, non-overlapping max pooling,
//! max-over-time pooling, fully connected layers and embedding lookup.
//!
//! Sequences are matrices with one row per position and one column per
//! channel. A convolution filter bank is an `f x (l * in_channels)` matrix;
//! row `k` of a filter covers window offsets in order, each offset spanning
//! all input channels, so a window is a contiguous slice of the input.

use serde::{Deserialize, Serialize};

use super::matrix::{gemm, Matrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvLayerSpec {
    pub window: usize,
    pub filters: usize,
    pub pool: Option<usize>,
    pub in_channels: usize,
}

impl ConvLayerSpec {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || self.filters == 0 || self.in_channels == 0 {
            return Err(Error::Config(format!(
                "convolution needs window, filters and channels >= 1, got {self:?}"
            )));
        }
        if matches!(self.pool, Some(p) if p < 2) {
            return Err(Error::Config(format!("pool size must be >= 2, got {self:?}")));
        }
        Ok(())
    }

    /// Rows after convolution and pooling of an input with `len` rows.
    pub fn output_len(&self, len: usize) -> Option<usize> {
        let conv = len.checked_sub(self.window)? + 1;
        match self.pool {
            Some(p) if conv < p => None,
            Some(p) => Some(conv / p),
            None => Some(conv),
        }
    }

    pub fn fan_in(&self) -> usize {
        self.window * self.in_channels
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
    Softmax,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenseLayerSpec {
    pub in_size: usize,
    pub out_size: usize,
    pub activation: Activation,
    /// Dropout applied to this layer's output during training.
    pub dropout_rate: f64,
}

impl DenseLayerSpec {
    pub fn validate(&self) -> Result<()> {
        if self.in_size == 0 || self.out_size == 0 {
            return Err(Error::Config(format!(
                "dense layer sizes must be >= 1, got {self:?}"
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::Config(format!(
                "dropout rate must lie in [0, 1), got {}",
                self.dropout_rate
            )));
        }
        Ok(())
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn relu_in_place(values: &mut [f64]) {
    for v in values {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}

fn check_conv(
    input_rows: usize,
    input_cols: usize,
    (filters, width): (usize, usize),
    bias: &[f64],
) -> Result<usize> {
    if input_cols == 0 || width % input_cols != 0 {
        return Err(Error::Shape(format!(
            "filter width {width} is not a multiple of {input_cols} input channels"
        )));
    }
    if bias.len() != filters {
        return Err(Error::Shape(format!(
            "{filters} filters but {} biases",
            bias.len()
        )));
    }
    let window = width / input_cols;
    if window == 0 {
        return Err(Error::Shape("empty convolution window".into()));
    }
    if input_rows < window {
        return Err(Error::Shape(format!(
            "sequence length {input_rows} is shorter than window {window}"
        )));
    }
    Ok(window)
}

/// Convolution without the ReLU: `out[i, f] = w_f . x[i..i+l] + b_f`.
pub fn conv1d_linear(input: &Matrix, weights: &Matrix, bias: &[f64]) -> Result<Matrix> {
    let channels = input.cols();
    let window = check_conv(input.rows(), channels, weights.shape(), bias)?;
    let (filters, width) = weights.shape();
    let out_rows = input.rows() - window + 1;
    let mut out = Matrix::zeros(out_rows, filters);
    for r in 0..out_rows {
        out.row_mut(r).copy_from_slice(bias);
    }
    gemm(
        out_rows,
        width,
        filters,
        1.0,
        input.as_slice(),
        (channels as isize, 1),
        weights.as_slice(),
        (1, width as isize),
        1.0,
        out.as_mut_slice(),
        (filters as isize, 1),
    );
    Ok(out)
}

/// Valid stride-1 convolution followed by ReLU.
pub fn conv1d_forward(input: &Matrix, weights: &Matrix, bias: &[f64]) -> Result<Matrix> {
    let mut out = conv1d_linear(input, weights, bias)?;
    relu_in_place(out.as_mut_slice());
    Ok(out)
}

/// Backward pass of [`conv1d_forward`]. `output` is the post-ReLU forward
/// result; gradients are accumulated into `grad_weights` and `grad_bias`.
/// Returns the input gradient when `need_input` is set.
pub fn conv1d_backward(
    input: &Matrix,
    weights: &Matrix,
    output: &Matrix,
    grad_output: &Matrix,
    grad_weights: &mut Matrix,
    grad_bias: &mut [f64],
    need_input: bool,
) -> Result<Option<Matrix>> {
    let grad_pre = relu_backward(output, grad_output)?;
    conv1d_linear_backward(input, weights, &grad_pre, grad_weights, grad_bias, need_input)
}

pub(crate) fn relu_backward(output: &Matrix, grad_output: &Matrix) -> Result<Matrix> {
    if output.shape() != grad_output.shape() {
        return Err(Error::Shape(format!(
            "gradient {:?} does not match output {:?}",
            grad_output.shape(),
            output.shape()
        )));
    }
    let mut grad = grad_output.clone();
    for (g, &o) in grad.as_mut_slice().iter_mut().zip(output.as_slice()) {
        if o <= 0.0 {
            *g = 0.0;
        }
    }
    Ok(grad)
}

/// Backward pass of [`conv1d_linear`].
pub fn conv1d_linear_backward(
    input: &Matrix,
    weights: &Matrix,
    grad_pre: &Matrix,
    grad_weights: &mut Matrix,
    grad_bias: &mut [f64],
    need_input: bool,
) -> Result<Option<Matrix>> {
    let channels = input.cols();
    let window = check_conv(input.rows(), channels, weights.shape(), grad_bias)?;
    let (filters, width) = weights.shape();
    let out_rows = input.rows() - window + 1;
    if grad_pre.shape() != (out_rows, filters) {
        return Err(Error::Shape(format!(
            "convolution gradient is {:?}, expected {:?}",
            grad_pre.shape(),
            (out_rows, filters)
        )));
    }
    if grad_weights.shape() != weights.shape() {
        return Err(Error::Shape("weight gradient shape mismatch".into()));
    }
    gemm(
        filters,
        out_rows,
        width,
        1.0,
        grad_pre.as_slice(),
        (1, filters as isize),
        input.as_slice(),
        (channels as isize, 1),
        1.0,
        grad_weights.as_mut_slice(),
        (width as isize, 1),
    );
    for r in 0..out_rows {
        for (b, g) in grad_bias.iter_mut().zip(grad_pre.row(r)) {
            *b += g;
        }
    }
    if !need_input {
        return Ok(None);
    }
    let mut windows = Matrix::zeros(out_rows, width);
    gemm(
        out_rows,
        filters,
        width,
        1.0,
        grad_pre.as_slice(),
        (filters as isize, 1),
        weights.as_slice(),
        (width as isize, 1),
        0.0,
        windows.as_mut_slice(),
        (width as isize, 1),
    );
    let mut grad_input = Matrix::zeros(input.rows(), channels);
    let gi = grad_input.as_mut_slice();
    for r in 0..out_rows {
        let dst = &mut gi[r * channels..r * channels + width];
        for (d, s) in dst.iter_mut().zip(windows.row(r)) {
            *d += s;
        }
    }
    Ok(Some(grad_input))
}

/// Convolution plus ReLU over a one-hot sequence given as the active column
/// of each row (`None` for an all-zero row). `weights_t` is the filter bank
/// transposed to `(l * channels) x f`.
pub fn conv1d_onehot_forward(
    active: &[Option<usize>],
    channels: usize,
    weights_t: &Matrix,
    bias: &[f64],
) -> Result<Matrix> {
    let (width, filters) = weights_t.shape();
    let window = check_conv(active.len(), channels, (filters, width), bias)?;
    let out_rows = active.len() - window + 1;
    let mut out = Matrix::zeros(out_rows, filters);
    for r in 0..out_rows {
        let row = out.row_mut(r);
        row.copy_from_slice(bias);
        for (k, a) in active[r..r + window].iter().enumerate() {
            if let Some(c) = *a {
                debug_assert!(c < channels);
                for (o, w) in row.iter_mut().zip(weights_t.row(k * channels + c)) {
                    *o += w;
                }
            }
        }
        relu_in_place(row);
    }
    Ok(out)
}

/// Weight and bias gradients of [`conv1d_onehot_forward`], accumulated into
/// a transposed weight gradient `(l * channels) x f`.
pub fn conv1d_onehot_backward(
    active: &[Option<usize>],
    channels: usize,
    output: &Matrix,
    grad_output: &Matrix,
    grad_weights_t: &mut Matrix,
    grad_bias: &mut [f64],
) -> Result<()> {
    let grad_pre = relu_backward(output, grad_output)?;
    let (width, filters) = grad_weights_t.shape();
    let window = width / channels;
    if grad_pre.shape() != (active.len() + 1 - window, filters) {
        return Err(Error::Shape("one-hot convolution gradient shape mismatch".into()));
    }
    for r in 0..grad_pre.rows() {
        let g = grad_pre.row(r);
        for (b, v) in grad_bias.iter_mut().zip(g) {
            *b += v;
        }
        for (k, a) in active[r..r + window].iter().enumerate() {
            if let Some(c) = *a {
                for (w, v) in grad_weights_t.row_mut(k * channels + c).iter_mut().zip(g) {
                    *w += v;
                }
            }
        }
    }
    Ok(())
}

/// Pooled values plus, for every output element, the input row it came from.
#[derive(Debug, Clone)]
pub struct Pooled {
    pub output: Matrix,
    pub argmax: Vec<usize>,
}

impl Pooled {
    /// Routes `grad_output` back to the winning input rows.
    pub fn backward(&self, grad_output: &Matrix, input_rows: usize) -> Result<Matrix> {
        if grad_output.shape() != self.output.shape() {
            return Err(Error::Shape(format!(
                "pool gradient {:?} does not match output {:?}",
                grad_output.shape(),
                self.output.shape()
            )));
        }
        let cols = self.output.cols();
        let mut grad = Matrix::zeros(input_rows, cols);
        for (i, (&src, &g)) in self.argmax.iter().zip(grad_output.as_slice()).enumerate() {
            let c = i % cols;
            let v = grad.get(src, c) + g;
            grad.set(src, c, v);
        }
        Ok(grad)
    }
}

/// Non-overlapping max pooling over windows of `pool` rows; the trailing
/// `rows % pool` rows are dropped.
pub fn maxpool1d(input: &Matrix, pool: usize) -> Result<Pooled> {
    if pool == 0 {
        return Err(Error::Parameter("pool size must be >= 1".into()));
    }
    if input.rows() < pool {
        return Err(Error::Shape(format!(
            "cannot pool {} rows with pool size {pool}",
            input.rows()
        )));
    }
    let cols = input.cols();
    let out_rows = input.rows() / pool;
    let mut output = Matrix::zeros(out_rows, cols);
    let mut argmax = vec![0; out_rows * cols];
    for o in 0..out_rows {
        let start = o * pool;
        let out_row = output.row_mut(o);
        out_row.copy_from_slice(input.row(start));
        let idx = &mut argmax[o * cols..(o + 1) * cols];
        idx.iter_mut().for_each(|i| *i = start);
        for r in start + 1..start + pool {
            for ((best, at), &v) in out_row.iter_mut().zip(idx.iter_mut()).zip(input.row(r)) {
                if v > *best {
                    *best = v;
                    *at = r;
                }
            }
        }
    }
    Ok(Pooled { output, argmax })
}

/// Column-wise maximum over all rows; the output is a single row.
pub fn max_over_time(input: &Matrix) -> Result<Pooled> {
    if input.rows() == 0 || input.cols() == 0 {
        return Err(Error::Shape("max-over-time pooling of an empty map".into()));
    }
    maxpool1d(input, input.rows())
}

fn check_dense(in_size: usize, weights: &Matrix, bias: &[f64]) -> Result<()> {
    if weights.cols() != in_size {
        return Err(Error::Shape(format!(
            "dense input has {in_size} features, weights expect {}",
            weights.cols()
        )));
    }
    if bias.len() != weights.rows() {
        return Err(Error::Shape(format!(
            "dense layer has {} outputs but {} biases",
            weights.rows(),
            bias.len()
        )));
    }
    Ok(())
}

/// Affine map `weights * input + bias` followed by the layer activation.
/// `weights` is `out_size x in_size`.
pub fn dense_forward(
    input: &[f64],
    spec: &DenseLayerSpec,
    weights: &Matrix,
    bias: &[f64],
) -> Result<Vec<f64>> {
    if input.len() != spec.in_size || weights.shape() != (spec.out_size, spec.in_size) {
        return Err(Error::Shape(format!(
            "dense layer {}->{} got input of {} and weights {:?}",
            spec.in_size,
            spec.out_size,
            input.len(),
            weights.shape()
        )));
    }
    let batch = Matrix::row_vector(input.to_vec());
    Ok(dense_forward_batch(&batch, weights, bias, spec.activation)?.into_vec())
}

/// Batched dense layer: one example per row of `input`.
pub fn dense_forward_batch(
    input: &Matrix,
    weights: &Matrix,
    bias: &[f64],
    activation: Activation,
) -> Result<Matrix> {
    check_dense(input.cols(), weights, bias)?;
    let (out_size, in_size) = weights.shape();
    let mut out = Matrix::zeros(input.rows(), out_size);
    for r in 0..input.rows() {
        out.row_mut(r).copy_from_slice(bias);
    }
    gemm(
        input.rows(),
        in_size,
        out_size,
        1.0,
        input.as_slice(),
        (in_size as isize, 1),
        weights.as_slice(),
        (1, in_size as isize),
        1.0,
        out.as_mut_slice(),
        (out_size as isize, 1),
    );
    for r in 0..out.rows() {
        activate(out.row_mut(r), activation);
    }
    Ok(out)
}

fn activate(row: &mut [f64], activation: Activation) {
    match activation {
        Activation::Relu => relu_in_place(row),
        Activation::Sigmoid => row.iter_mut().for_each(|v| *v = sigmoid(*v)),
        Activation::Softmax => {
            let probs = super::loss::softmax_unchecked(row);
            row.copy_from_slice(&probs);
        }
        Activation::None => {}
    }
}

/// Backward pass of [`dense_forward_batch`]. `output` is the post-activation
/// forward result and `grad_output` the loss gradient with respect to it.
#[allow(clippy::too_many_arguments)]
pub fn dense_backward_batch(
    input: &Matrix,
    weights: &Matrix,
    output: &Matrix,
    grad_output: &Matrix,
    activation: Activation,
    grad_weights: &mut Matrix,
    grad_bias: &mut [f64],
    need_input: bool,
) -> Result<Option<Matrix>> {
    check_dense(input.cols(), weights, grad_bias)?;
    let (out_size, in_size) = weights.shape();
    let batch = input.rows();
    if output.shape() != (batch, out_size) || grad_output.shape() != (batch, out_size) {
        return Err(Error::Shape(format!(
            "dense gradient {:?} / output {:?} do not match {batch}x{out_size}",
            grad_output.shape(),
            output.shape()
        )));
    }
    if grad_weights.shape() != weights.shape() {
        return Err(Error::Shape("dense weight gradient shape mismatch".into()));
    }
    let mut grad_pre = grad_output.clone();
    for r in 0..batch {
        let out = output.row(r);
        let g = grad_pre.row_mut(r);
        match activation {
            Activation::Relu => g.iter_mut().zip(out).for_each(|(g, &o)| {
                if o <= 0.0 {
                    *g = 0.0
                }
            }),
            Activation::Sigmoid => g.iter_mut().zip(out).for_each(|(g, &o)| *g *= o * (1.0 - o)),
            Activation::Softmax => {
                let dot: f64 = g.iter().zip(out).map(|(g, o)| g * o).sum();
                g.iter_mut().zip(out).for_each(|(g, &o)| *g = o * (*g - dot));
            }
            Activation::None => {}
        }
    }
    gemm(
        out_size,
        batch,
        in_size,
        1.0,
        grad_pre.as_slice(),
        (1, out_size as isize),
        input.as_slice(),
        (in_size as isize, 1),
        1.0,
        grad_weights.as_mut_slice(),
        (in_size as isize, 1),
    );
    for r in 0..batch {
        for (b, g) in grad_bias.iter_mut().zip(grad_pre.row(r)) {
            *b += g;
        }
    }
    if !need_input {
        return Ok(None);
    }
    let mut grad_input = Matrix::zeros(batch, in_size);
    gemm(
        batch,
        out_size,
        in_size,
        1.0,
        grad_pre.as_slice(),
        (out_size as isize, 1),
        weights.as_slice(),
        (in_size as isize, 1),
        0.0,
        grad_input.as_mut_slice(),
        (in_size as isize, 1),
    );
    Ok(Some(grad_input))
}

/// Gathers rows of `table`.
pub fn embedding_lookup(table: &Matrix, indices: &[usize]) -> Result<Matrix> {
    let mut out = Matrix::zeros(indices.len(), table.cols());
    for (r, &i) in indices.iter().enumerate() {
        if i >= table.rows() {
            return Err(Error::Shape(format!(
                "embedding index {i} out of range for {} rows",
                table.rows()
            )));
        }
        out.row_mut(r).copy_from_slice(table.row(i));
    }
    Ok(out)
}

/// Scatter-adds `grad_output` rows into `grad_table`, skipping `frozen`.
pub fn embedding_backward(
    grad_output: &Matrix,
    indices: &[usize],
    grad_table: &mut Matrix,
    frozen: Option<usize>,
) -> Result<()> {
    if grad_output.rows() != indices.len() || grad_output.cols() != grad_table.cols() {
        return Err(Error::Shape("embedding gradient shape mismatch".into()));
    }
    for (r, &i) in indices.iter().enumerate() {
        if Some(i) == frozen {
            continue;
        }
        for (t, g) in grad_table.row_mut(i).iter_mut().zip(grad_output.row(r)) {
            *t += g;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(values: &[f64]) -> Matrix {
        Matrix::new(values.len(), 1, values.to_vec()).unwrap()
    }

    #[test]
    fn conv_zero_input_zero_bias_is_zero() {
        let input = Matrix::zeros(10, 3);
        let w = Matrix::from_fn(4, 6, |r, c| (r + c) as f64 * 0.1 - 0.3);
        let out = conv1d_forward(&input, &w, &[0.0; 4]).unwrap();
        assert_eq!(out.shape(), (9, 4));
        assert!(out.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn conv_hand_example_clipped_by_relu() {
        let w = Matrix::new(1, 2, vec![1.0, 1.0]).unwrap();
        let out = conv1d_forward(&col(&[1.0, 2.0, 3.0]), &w, &[-10.0]).unwrap();
        assert_eq!(out.as_slice(), &[0.0, 0.0]);
        let lin = conv1d_linear(&col(&[1.0, 2.0, 3.0]), &w, &[-10.0]).unwrap();
        assert_eq!(lin.as_slice(), &[-7.0, -5.0]);
    }

    #[test]
    fn conv_output_shape_matches_first_election_layer() {
        let input = Matrix::zeros(150, 70);
        let w = Matrix::zeros(256, 7 * 70);
        let out = conv1d_forward(&input, &w, &vec![0.0; 256]).unwrap();
        assert_eq!(out.shape(), (144, 256));
    }

    #[test]
    fn conv_rejects_short_sequence() {
        let w = Matrix::zeros(2, 7 * 3);
        let err = conv1d_forward(&Matrix::zeros(5, 3), &w, &[0.0; 2]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains('5') && msg.contains('7'), "{msg}");
    }

    #[test]
    fn onehot_conv_matches_dense_conv() {
        let channels = 5;
        let active = [Some(1), None, Some(4), Some(0), Some(1), None, Some(2)];
        let dense = Matrix::from_fn(active.len(), channels, |r, c| {
            if active[r] == Some(c) {
                1.0
            } else {
                0.0
            }
        });
        let w = Matrix::from_fn(3, 3 * channels, |r, c| ((r * 7 + c * 3) % 11) as f64 * 0.1 - 0.5);
        let bias = [0.1, -0.2, 0.05];
        let a = conv1d_forward(&dense, &w, &bias).unwrap();
        let b = conv1d_onehot_forward(&active, channels, &w.transpose(), &bias).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn maxpool_examples() {
        let p = maxpool1d(&col(&[1.0, 5.0, 2.0, 4.0, 3.0, 6.0]), 3).unwrap();
        assert_eq!(p.output.as_slice(), &[5.0, 6.0]);
        assert_eq!(p.argmax, vec![1, 5]);
        assert_eq!(maxpool1d(&Matrix::zeros(144, 256), 3).unwrap().output.shape(), (48, 256));
        assert_eq!(maxpool1d(&Matrix::zeros(7, 2), 3).unwrap().output.shape(), (2, 2));
        let constant = maxpool1d(&col(&[2.5; 9]), 4).unwrap();
        assert!(constant.output.as_slice().iter().all(|&v| v == 2.5));
        assert!(maxpool1d(&Matrix::zeros(2, 1), 3).is_err());
    }

    #[test]
    fn max_over_time_examples() {
        let row = Matrix::new(1, 3, vec![0.5, -1.0, 2.0]).unwrap();
        assert_eq!(max_over_time(&row).unwrap().output.as_slice(), row.as_slice());
        assert_eq!(max_over_time(&col(&[-3.0, -1.0, -2.0])).unwrap().output.as_slice(), &[-1.0]);
        let map = Matrix::zeros(49, 200);
        assert_eq!(max_over_time(&map).unwrap().output.shape(), (1, 200));
        assert!(max_over_time(&Matrix::zeros(0, 3)).is_err());
    }

    #[test]
    fn dense_examples() {
        let spec = DenseLayerSpec {
            in_size: 3,
            out_size: 3,
            activation: Activation::None,
            dropout_rate: 0.0,
        };
        let eye = Matrix::from_fn(3, 3, |r, c| if r == c { 1.0 } else { 0.0 });
        let x = [0.3, -2.0, 7.5];
        assert_eq!(dense_forward(&x, &spec, &eye, &[0.0; 3]).unwrap(), x.to_vec());

        let big = DenseLayerSpec {
            in_size: 2048,
            out_size: 1024,
            activation: Activation::Relu,
            dropout_rate: 0.5,
        };
        let out = dense_forward(&vec![0.1; 2048], &big, &Matrix::zeros(1024, 2048), &vec![0.0; 1024])
            .unwrap();
        assert_eq!(out.len(), 1024);

        let sig = DenseLayerSpec {
            activation: Activation::Sigmoid,
            ..spec
        };
        let w = Matrix::from_fn(3, 3, |r, c| (r as f64 - c as f64) * 3.0);
        let out = dense_forward(&x, &sig, &w, &[5.0, -5.0, 0.0]).unwrap();
        assert!(out.iter().all(|&v| v > 0.0 && v < 1.0));

        assert!(dense_forward(&[1.0, 2.0], &spec, &eye, &[0.0; 3]).is_err());
    }

    #[test]
    fn sigmoid_is_stable_at_extremes() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
        assert!(sigmoid(-800.0).is_finite());
    }

    #[test]
    fn embedding_lookup_and_scatter() {
        let table = Matrix::from_fn(4, 2, |r, c| (r * 2 + c) as f64);
        let out = embedding_lookup(&table, &[3, 0, 3]).unwrap();
        assert_eq!(out.as_slice(), &[6.0, 7.0, 0.0, 1.0, 6.0, 7.0]);
        let mut grad = Matrix::zeros(4, 2);
        embedding_backward(&Matrix::from_fn(3, 2, |_, _| 1.0), &[3, 0, 3], &mut grad, Some(0)).unwrap();
        assert_eq!(grad.row(3), &[2.0, 2.0]);
        assert_eq!(grad.row(0), &[0.0, 0.0]);
        assert!(embedding_lookup(&table, &[4]).is_err());
    }
}
