//! Corpus files and output rendering.

mod corpus_file;
mod layout;
mod structured;

pub use corpus_file::{parse_corpus, parse_pattern_line, render_corpus, CorpusFile, PatternLine};
pub use layout::{render_horizontal, render_vertical};
pub use structured::{
    alignment_layout, render_structured, AlignmentDoc, ColumnDoc, GroupDoc, RowDoc, RunDoc,
    SCHEMA_VERSION,
};
