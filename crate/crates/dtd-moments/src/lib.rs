//! File formats, configuration, parallel Monte-Carlo experiments and the
//! command handlers of the `dtdm` tool.
//!
//! Units are fixed everywhere: diffusivities in µm²/ms, b-values in
//! ms/µm², V[D_iso] in µm⁴/ms².

pub mod commands;
pub mod config;
pub mod error;
pub mod experiment;
pub mod formats;
pub mod manifest;
pub mod mc;
pub mod validate;

pub use error::{Error, ExitStatus, Result};
