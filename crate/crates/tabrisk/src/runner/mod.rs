//! Experiment orchestration: prepare → train → evaluate →
//! external-validate → report, with every artifact written into one
//! self-describing bundle directory.
//!
//! The bundle is deterministic: a config plus its data files fully
//! determine every byte of every artifact, so reruns are diffable.

mod config;
mod evaluate;
mod report;
mod train;

pub use config::{
    load_config, BootstrapSection, EvalMode, EvalSection, ExperimentConfig, LearnerSection,
    SmoteScope, SmoteSection, SplitSection, WeightsSection,
};
pub use evaluate::{
    cmd_evaluate, cmd_external_validate, load_bundle, CohortReport, DelongReport, EvalOverrides,
    LoadedBundle, McnemarReport, ModelReport, TestsReport, ThresholdedReport,
};
pub use report::{cmd_report, AttenuationTable, ReportSummary};
pub use train::{
    cmd_prepare, cmd_train, CohortSummary, EnsembleSpec, EnsemblesFile, FileRecord, Manifest,
    MemberSpec, PreparedSummary, SmoteRecord, SplitSummary, SubsampleRecord,
};

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ensemble::EnsembleError;
use crate::learners::LearnerError;
use crate::metrics::MetricsError;
use crate::preprocess::PreprocessError;
use crate::smote::SmoteError;
use crate::stats::StatsError;
use crate::tabular::TabularError;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("leakage guard: {0}")]
    Leakage(String),
    #[error("bundle: {0}")]
    Bundle(String),
    #[error("no evaluation reports found under {0}; run evaluate first")]
    MissingReports(PathBuf),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Tabular(#[from] TabularError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Smote(#[from] SmoteError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

impl RunnerError {
    /// Process exit code: 0 success, 2 config error, 3 data error,
    /// 4 leakage-guard abort.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunnerError::Config(_) => 2,
            RunnerError::Learner(LearnerError::InvalidHyperparameter(_)) => 2,
            RunnerError::Leakage(_) => 4,
            _ => 3,
        }
    }
}

/// Canonical file layout of an experiment bundle directory.
#[derive(Debug, Clone)]
pub struct BundlePaths {
    root: PathBuf,
}

impl BundlePaths {
    pub fn new(root: &Path) -> Self {
        BundlePaths { root: root.to_path_buf() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn prepared(&self) -> PathBuf {
        self.root.join("prepared.json")
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn pipeline(&self) -> PathBuf {
        self.root.join("pipeline.json")
    }

    pub fn split_indices(&self) -> PathBuf {
        self.root.join("split_indices.json")
    }

    pub fn models_dir(&self) -> PathBuf {
        self.root.join("models")
    }

    pub fn model(&self, kind: &str) -> PathBuf {
        self.models_dir().join(format!("{kind}.json"))
    }

    pub fn ensembles(&self) -> PathBuf {
        self.root.join("ensembles.json")
    }

    pub fn reports_dir(&self) -> PathBuf {
        self.root.join("reports")
    }

    pub fn report(&self, cohort: &str) -> PathBuf {
        self.reports_dir().join(format!("{cohort}.json"))
    }

    pub fn curves_dir(&self) -> PathBuf {
        self.root.join("curves")
    }

    pub fn curve(&self, cohort: &str, model: &str, kind: &str) -> PathBuf {
        self.curves_dir().join(format!("{cohort}_{model}_{kind}.csv"))
    }

    pub fn plots_dir(&self) -> PathBuf {
        self.root.join("plots")
    }

    pub fn plot(&self, cohort: &str, kind: &str) -> PathBuf {
        self.plots_dir().join(format!("{cohort}_{kind}.svg"))
    }

    pub fn attenuation(&self) -> PathBuf {
        self.plots_dir().join("attenuation.json")
    }

    pub fn summary(&self) -> PathBuf {
        self.plots_dir().join("summary.md")
    }
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunnerError + '_ {
    move |source| RunnerError::Io { path: path.to_path_buf(), source }
}

pub(crate) fn sha256_bytes(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    format!("{:x}", h.finalize())
}

pub(crate) fn sha256_file(path: &Path) -> Result<String, RunnerError> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    Ok(sha256_bytes(&bytes))
}

/// Serialize as pretty JSON and write atomically with a trailing newline.
pub(crate) fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), RunnerError> {
    let json = serde_json::to_string_pretty(value).expect("runner artifacts serialize");
    crate::preprocess::atomic_write(path, (json + "\n").as_bytes()).map_err(io_err(path))
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, RunnerError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text)
        .map_err(|e| RunnerError::Bundle(format!("{}: {e}", path.display())))
}
