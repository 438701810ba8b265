//! Lossless log compression built on a unified redundancy tree.
//!
//! The pipeline mines redundancy in three stages: a structural prefix tree
//! over stable tokens, per-group variable subtrees capturing frequent
//! structure+variable combinations, and just-in-time templatization of the
//! remaining long-tail values into columnar streams. A self-describing
//! archive container holds the result, framed per chunk and finished with a
//! general-purpose codec.

pub mod archive;
pub mod codec;
pub mod decompress;
pub mod error;
pub mod patterns;
pub mod pipeline;
pub mod preprocess;
pub mod residual;
pub mod struct_tree;
pub mod synth;
pub mod token;
pub mod var_subtree;
pub mod wire;

pub use archive::{Archive, FinalCodec, Mode};
pub use error::{Error, Result};
pub use patterns::PatternSet;
pub use pipeline::{CompressConfig, RunMetrics};
