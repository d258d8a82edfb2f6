//! Character-based neural word segmentation.
//!
//! Each character of an unsegmented sentence is classified independently
//! into a boundary label (B/I/E/S, B/I/E or B/I). The classifier is a
//! feed-forward, simple recurrent or LSTM network over windowed character
//! and character-type n-gram embeddings, optionally extended with a sparse
//! dictionary-match vector placed right before the output layer.
//!
//! The crate is organised as:
//!
//! * [`corpus`]: corpus I/O, label encoding, vocabularies and dictionaries.
//! * [`features`]: character types, n-gram ids, window assembly, dictionary vectors.
//! * [`nn`]: dense kernels, recurrent cells, loss, AdaGrad and gradient checking.
//! * [`model`]: network assembly, training and the model file format.
//! * [`decode`]: label prediction, segmentation repair and raw-text segmentation.
//! * [`eval`]: token precision/recall/F1, sentence accuracy, per-domain reports.

pub mod corpus;
pub mod decode;
pub mod error;
pub mod eval;
pub mod features;
pub mod model;
pub mod nn;

pub use corpus::{Label, LabelScheme, LabelSequence, SegDictionary, Sentence, Span, Vocabulary};
pub use error::{Error, LoadError, Result};
pub use features::{CharType, DictVector};
pub use model::{Arch, ModelConfig, SegmenterModel};
