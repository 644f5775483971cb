//! Batch pipeline around the least-squares preprocessing library:
//! configuration handling, the extract/classify/run-all stages, and the
//! reproducibility manifest.

pub mod config;
pub mod error;
pub mod manifest;
pub mod stages;

pub use config::{build_config, ConfigOverrides, RunConfig, VariantChoice};
pub use error::{ErrorKind, StageError, StageResult};
pub use manifest::Manifest;
pub use stages::{run_all, run_classify, run_extract, run_report, run_synth_gen};
