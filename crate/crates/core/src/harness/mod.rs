//! Experiment orchestration: configuration, run directories, the
//! train → extract → classify pipeline, reports and error documents.

mod config;
mod io;
mod paths;
mod report;
mod run;

pub use config::{
    arch_label, arch_name, DataPaths, ExperimentConfig, Scale, SvmSettings, ENV_IMAGES, ENV_LABELS,
    ENV_OUT, ENV_THREADS, EXPERIMENT_LEARNING_RATE, GRID_C, GRID_SIGMA_FACTORS, SCHEMA_VERSION,
};
pub use io::{atomic_write, read_string, write_json, ErrorDocument};
pub use paths::RunPaths;
pub use report::{
    build_report, read_predictions, score, write_predictions, ArchTable, ArtifactVersions,
    FeatureChecksums, LayerSummary, PredictionRow, RunReport, VariantRow, REPORT_FORMAT,
    REPORT_VERSION,
};
pub use run::{accuracy_from_predictions, report_dir, ClassifyRecord, Run, Timings};

use crate::autoencoder::gradcheck::{run_gradcheck, GradCheckConfig, GradCheckReport};
use crate::error::{Error, Result};

/// Thread count from the argument, else `CDAE_THREADS`, else all cores.
pub fn thread_count(requested: Option<usize>) -> Result<Option<usize>> {
    let n = match requested {
        Some(n) => Some(n),
        None => match std::env::var(ENV_THREADS) {
            Ok(v) => Some(v.parse::<usize>().map_err(|_| {
                Error::Config(format!("{ENV_THREADS} must be a positive integer, got {v:?}"))
            })?),
            Err(_) => None,
        },
    };
    if n == Some(0) {
        return Err(Error::Config("thread count must be >= 1".into()));
    }
    Ok(n)
}

/// Sizes the global worker pool; a no-op when it already exists.
pub fn configure_threads(requested: Option<usize>) -> Result<()> {
    if let Some(n) = thread_count(requested)? {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Runs the gradient check; a failing check is returned as an error that
/// names the worst coordinate.
pub fn gradcheck(cfg: &GradCheckConfig) -> Result<GradCheckReport> {
    let report = run_gradcheck(cfg)?;
    if report.passed() {
        Ok(report)
    } else {
        let worst = report.worst().expect("failed report has cases");
        Err(Error::GradCheck(format!(
            "{} {:?} {:?} restart {}: {} analytic {:e} numeric {:e} relative error {:e} >= {:e}",
            worst.variant,
            worst.activation,
            worst.loss,
            worst.restart,
            worst.worst.slot,
            worst.worst.analytic,
            worst.worst.numeric,
            worst.worst.relative_error,
            report.tolerance
        )))
    }
}
