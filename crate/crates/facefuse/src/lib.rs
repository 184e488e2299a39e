//! File formats, rendering output and the command-line interface built on
//! `facefuse-core`.

pub mod cli;
pub mod error;
pub mod formats;
pub mod fs;
pub mod image_io;
pub mod numfmt;
pub mod render;
pub mod svg;

pub use error::{Error, Result};
