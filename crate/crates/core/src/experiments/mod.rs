//! Figure presets, configuration files, run manifests and plot data.

mod config;
mod plot;
mod presets;
mod run;

use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, Formulation, CONFIG_KEYS};
pub use plot::{emit_plot_data, PLOT_HEADER};
pub use presets::{preset_description, resolve_preset, DEFAULT_SEED, PRESET_NAMES};
pub use run::{
    manifest_path, run_experiment, simulate, ExperimentOutput, RunManifest, SeriesOutput,
    SeriesRecord, SeriesRole, SeriesStatus, MANIFEST_FILE, REFERENCE_FILE, SUMMARY_FILE,
};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Sim(#[from] crate::Error),
    #[error("configuration: {0}")]
    Config(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("missing file {}", .0.display())]
    MissingFile(PathBuf),
}

impl ExperimentError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
