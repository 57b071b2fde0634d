//! Experiment drivers: clean-up timing, storage capacity and mutable memory.
//!
//! Each driver takes an [`ExperimentConfig`] and returns an
//! [`ExperimentReport`] holding one record per CSV row plus a summary.
//! Randomness comes from sub-streams of the config seed keyed by the cell
//! coordinates, so results do not depend on the thread count.

mod capacity;
mod config;
mod mutable;
mod report;
mod timing;

pub use capacity::run_capacity;
pub use config::{ExperimentConfig, ExperimentKind, Family, MemoryShape, OutputFormat};
pub use mutable::run_mutable;
pub use report::{
    median, summarize_capacity, summarize_mutable, Agreement, CapacityCell, CapacityRecord,
    CellMean, Environment, ExperimentReport, MaterializeTime, Method, MutableRecord, Record,
    StepMean, SuccessCell, Summary, TimingRecord, CAPACITY_HEADER, MUTABLE_HEADER, TIMING_HEADER,
};
pub use timing::run_timing;

use crate::codebook::{krop_params, KropParams, ThetaScheme};
use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Runs the experiment named by `config.experiment`.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    match config.experiment {
        ExperimentKind::Timing => run_timing(config),
        ExperimentKind::Capacity => run_capacity(config),
        ExperimentKind::Mutable => run_mutable(config),
    }
}

fn check_kind(config: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if config.experiment != kind {
        return Err(Error::Config(format!(
            "config is for the {} experiment, not {}",
            config.experiment.as_str(),
            kind.as_str()
        )));
    }
    config.validate()
}

fn params_for(config: &ExperimentConfig, k: usize, rng: &mut SeededRng) -> Result<KropParams> {
    match config.theta_scheme {
        ThetaScheme::EvenlySpaced => krop_params(k, ThetaScheme::EvenlySpaced, None),
        ThetaScheme::UniformRandom => krop_params(k, ThetaScheme::UniformRandom, Some(rng)),
    }
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))
}
