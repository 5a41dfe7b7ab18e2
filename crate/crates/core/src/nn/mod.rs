//! Numerical core: a dense matrix type, the layer kinds needed by the two
//! convolutional classifiers with hand-written backward passes, losses,
//! inverted dropout and the Adam optimizer.

mod adam;
mod dropout;
mod layers;
mod loss;
mod matrix;
mod params;

pub use adam::{AdamConfig, AdamState};
pub use dropout::{dropout_apply, DropoutMask, Mode};
pub use layers::{
    conv1d_backward, conv1d_forward, conv1d_linear, conv1d_linear_backward,
    conv1d_onehot_backward, conv1d_onehot_forward, dense_backward_batch, dense_forward,
    dense_forward_batch, embedding_backward, embedding_lookup, max_over_time, maxpool1d,
    sigmoid, Activation, ConvLayerSpec, DenseLayerSpec, Pooled,
};
pub use loss::{bce_loss, cross_entropy_loss, softmax, LOSS_EPS};
pub use matrix::Matrix;
pub use params::{fit, glorot_limit, GradientSet, ModelRng, TrainConfig, Trainable};
