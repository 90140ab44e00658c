//! File formats, configuration, a rayon task runner and the end-to-end
//! pipeline for [`skel_core`].

pub mod config;
pub mod io;
pub mod pipeline;
pub mod runner;

pub use config::{apply_env_overrides, ProblemSpec, RunConfig, SEED_ENV};
pub use pipeline::{run, solve, write_artifacts, RunOutput};
pub use runner::RayonRunner;

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum SkelError {
    #[error("{stage}: {source}")]
    Core { stage: &'static str, source: skel_core::Error },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid configuration: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("matrix market: {0}")]
    MatrixMarket(String),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

pub type Result<T, E = SkelError> = std::result::Result<T, E>;

pub(crate) trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> Stage<T> for skel_core::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|source| SkelError::Core { stage, source })
    }
}
