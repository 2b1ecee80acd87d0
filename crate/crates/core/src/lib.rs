//! Information-theoretic analysis of symbolic melody corpora.
//!
//! Melodies are parsed into [`Corpus`] values, turned into viewpoint
//! sequences, and measured with unigram entropy, Gini coefficients,
//! repetition removal, a PPM sequence model, generative null models and
//! supporting statistics.

pub mod corpus;
pub mod error;
pub mod genmodel;
pub mod info;
pub mod ppm;
pub mod repetition;
pub mod seeding;
pub mod stats;
pub mod summary;
pub mod table;
pub mod viewpoints;

pub use corpus::{
    parse_canonical, parse_kern_subset, to_canonical, Corpus, CorpusMeta, CorpusType, Melody,
    NoteEvent,
};
pub use error::{Error, Result};
pub use info::Distribution;
pub use num_rational::Rational64;
pub use summary::{run_summary, Summary, SummaryRecord};
pub use table::{write_table, Cell, Record, TableFormat};
pub use viewpoints::{extract_viewpoint, Symbol, ViewpointKind, ViewpointSequence};
