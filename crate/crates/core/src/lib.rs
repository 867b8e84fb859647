//! Sense embeddings learned from dictionary glosses.
//!
//! The pipeline: load a sense inventory ([`lexicon`]) and fixed pretrained
//! word vectors ([`embeddings`]), train a recurrent definition encoder
//! ([`neuralnet`]) that maps a gloss to the embedding of the sense it
//! defines ([`trainer`]), then query and evaluate the learned sense
//! embeddings ([`disambig`], [`evalkit`]).
//!
//! Hot loops (mini-batch gradients, nearest-neighbor scans, evaluation
//! items) fan out over rayon when the default `parallel` feature is
//! enabled; see [`exec`]. Reductions always happen in a fixed order, so
//! results are bit-identical across thread counts.

pub mod checkpoint;
pub mod disambig;
pub mod embeddings;
pub mod error;
pub mod evalkit;
pub mod exec;
pub mod lexicon;
pub mod neuralnet;
pub mod trainer;

pub use error::{Error, Result};

/// Dense real vector. All internal arithmetic is double precision;
/// only file formats carry single precision.
pub type Vector = ndarray::Array1<f64>;
