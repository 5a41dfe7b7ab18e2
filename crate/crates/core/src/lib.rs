//! Event-related short-text detection and categorization.
//!
//! The pipeline captures texts with seed terms widened by embedding-based
//! query expansion, filters them with a character-level convolutional
//! classifier and labels the survivors with word-level convolutional topic
//! and sentiment classifiers. Training data comes from distant supervision.

pub mod char_text;
pub mod dataset;
pub mod election;
pub mod embeddings;
pub mod error;
pub mod labels;
pub mod nn;
pub mod persist;
pub mod pipeline;
pub mod query_expansion;
pub mod text;
pub mod topic_sentiment;

pub use error::{Error, Result};
