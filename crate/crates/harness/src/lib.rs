//! Closed-loop experiments, sweeps, verification and file output for the
//! spiking PID in `npid-core`.

use std::path::{Path, PathBuf};

pub mod bench;
pub mod config;
pub mod emit;
pub mod experiment;
pub mod metrics;
pub mod netlist_io;
pub mod sweep;
pub mod verify;

pub use bench::{bench, BenchReport};
pub use config::{Controller, ExperimentConfig};
pub use experiment::{run_step_response, Run, TraceRecord};
pub use metrics::RunMetrics;
pub use sweep::{compare, sweep, SummaryRow};
pub use verify::{verify_adder, AdderReport, AdderSetup};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Npid(#[from] npid_core::NpidError),
    #[error(transparent)]
    Unit(#[from] npid_core::UnitError),
    #[error(transparent)]
    Grid(#[from] npid_core::GridError),
    #[error(transparent)]
    Netlist(#[from] npid_core::NetlistError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
