//! Desk-scale video object segmentation laboratory.
//!
//! The crate covers the full pipeline: a deterministic synthetic benchmark of
//! moving textured shapes ([`synth`]), a small fully-convolutional network
//! with foreground and contour heads ([`nnet`]), the three-stage training
//! protocol (base init → parent → per-sequence one-shot fine-tune) with its
//! experiment recipes ([`protocol`]), contour-driven boundary snapping and
//! superpixel oracle bounds ([`snap`]), region/contour/temporal metrics
//! ([`metrics`]), and error decomposition plus tracker-style evaluation and
//! report assembly ([`analysis`]).
//!
//! All operations are deterministic: a fixed seed reproduces every weight,
//! mask, and report byte for byte.

pub mod analysis;
pub mod dist;
pub mod error;
pub mod frame;
pub mod io;
pub mod mask;
pub mod metrics;
pub mod nnet;
pub mod probmap;
pub mod protocol;
pub mod snap;
pub mod synth;

pub use error::{Error, Result};
pub use frame::{Attribute, Frame, VideoSequence};
pub use mask::{BoundingBox, Mask};
pub use probmap::ProbMap;
