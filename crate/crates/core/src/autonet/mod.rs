//! Dense feed-forward autoencoder written against `ndarray`.
//!
//! The network maps the two input features through a shrinking ReLU
//! encoder, a sigmoid bottleneck whose width equals the number of clusters,
//! a mirrored ReLU decoder and a final linear layer with a single output that
//! is trained to regress the integer cluster label.

mod adam;
mod io;
mod network;
mod predict;
mod train;

use thiserror::Error;

pub use adam::{Adam, AdamConfig};
pub use io::{load_model, parse_model, save_model, write_model, MODEL_HEADER};
pub use network::{
    backward, build_autoencoder, count_parameters, forward, mse_loss, Activation, AutoencoderSpec, DenseLayer,
    DenseNetwork, ForwardCache, Gradients, LayerGradient, LayerSpec,
};
pub use predict::{label_from_output, predict_labels, round_half_even, Predictions};
pub use train::{train, TrainConfig, TrainHistory};

#[derive(Debug, Error)]
pub enum NetError {
    #[error("layer {index}: widths must be at least 1")]
    BadWidth { index: usize },
    #[error("{what}: expected {expected}, found {found}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("input contains a non-finite value")]
    NonFiniteInput,
    #[error("network produced a non-finite output at row {row}")]
    NonFiniteOutput { row: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid training setting: {0}")]
    BadConfig(&'static str),
    #[error("number of clusters must be at least 2, got {0}")]
    BadClusterCount(usize),
    #[error("model file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
