//! On-disk formats. Grammar and worked examples are in `FORMATS.md`.

pub mod config;
pub mod embeddings;
pub mod obj;
pub mod report;
pub mod scores;
