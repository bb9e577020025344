//! Experiment configuration: a single JSON document holding data paths,
//! split and resampling settings, per-learner hyperparameters, ensemble
//! weights, and evaluation options. Every field has a default except the
//! primary CSV path, so a minimal config is `{"primary_csv": "..."}`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::RunnerError;
use crate::learners::{ForestParams, GbtParams, LogisticParams, SvmParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSection {
    pub fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSection {
    fn default() -> Self {
        SplitSection { fraction: 0.7, seed: 42, stratified: true }
    }
}

/// Which rows SMOTE may touch. Anything but `train` is refused at the
/// leakage guard before any work happens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmoteScope {
    Train,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoteSection {
    pub scope: SmoteScope,
    pub k_neighbors: usize,
    pub target_ratio: f64,
    pub seed: u64,
}

impl Default for SmoteSection {
    fn default() -> Self {
        SmoteSection { scope: SmoteScope::Train, k_neighbors: 5, target_ratio: 1.0, seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSection {
    #[serde(default)]
    pub logistic: LogisticParams,
    #[serde(default)]
    pub svm: SvmParams,
    #[serde(default)]
    pub forest: ForestParams,
    #[serde(default)]
    pub boosting: GbtParams,
    /// Exact SMO is infeasible on the full oversampled training fold, so
    /// the SVM-LR pair trains on this many rows, drawn stratified.
    #[serde(default = "default_svm_subsample")]
    pub svm_subsample: usize,
    #[serde(default = "default_svm_subsample_seed")]
    pub svm_subsample_seed: u64,
    #[serde(default = "default_platt_tol")]
    pub platt_tol: f64,
}

fn default_svm_subsample() -> usize {
    20_000
}

fn default_svm_subsample_seed() -> u64 {
    5
}

fn default_platt_tol() -> f64 {
    1e-8
}

impl Default for LearnerSection {
    fn default() -> Self {
        LearnerSection {
            logistic: LogisticParams::default(),
            svm: SvmParams::default(),
            forest: ForestParams::default(),
            boosting: GbtParams::default(),
            svm_subsample: default_svm_subsample(),
            svm_subsample_seed: default_svm_subsample_seed(),
            platt_tol: default_platt_tol(),
        }
    }
}

/// Member weights per hybrid, in member order: `xgb_rf` is (boosting,
/// forest) and `svm_lr` is (svm, logistic). Normalized at ensemble
/// construction, so only proportions matter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsSection {
    pub xgb_rf: [f64; 2],
    pub svm_lr: [f64; 2],
}

impl Default for WeightsSection {
    fn default() -> Self {
        WeightsSection { xgb_rf: [0.5, 0.5], svm_lr: [0.5, 0.5] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BootstrapSection {
    pub resamples: usize,
    pub seed: u64,
}

impl Default for BootstrapSection {
    fn default() -> Self {
        BootstrapSection { resamples: 1000, seed: 7 }
    }
}

/// Internal-test evaluation mode. `balanced` undersamples the majority
/// class of the test split (test split only) to a 50/50 mix, which puts
/// the precision-recall baseline at 0.5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    Natural,
    Balanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    pub mode: EvalMode,
    pub balanced_seed: u64,
    /// Reliability-diagram resolution.
    pub bins: usize,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection { mode: EvalMode::Natural, balanced_seed: 17, bins: 10 }
    }
}

fn default_zeros_as_missing() -> Vec<String> {
    ["Glucose", "BloodPressure", "SkinThickness", "Insulin", "BMI"]
        .into_iter()
        .map(String::from)
        .collect()
}

fn default_tau() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub primary_csv: PathBuf,
    #[serde(default)]
    pub external_csv: Option<PathBuf>,
    /// Schema JSON paths; `None` uses the built-in schemas.
    #[serde(default)]
    pub primary_schema: Option<PathBuf>,
    #[serde(default)]
    pub external_schema: Option<PathBuf>,
    /// Feature-mapping JSON path; `None` uses the built-in external
    /// column crosswalk.
    #[serde(default)]
    pub mapping: Option<PathBuf>,
    /// Columns whose literal zeros are physiologically implausible and
    /// treated as missing.
    #[serde(default = "default_zeros_as_missing")]
    pub zeros_as_missing: Vec<String>,
    #[serde(default)]
    pub split: SplitSection,
    #[serde(default)]
    pub smote: SmoteSection,
    #[serde(default)]
    pub learners: LearnerSection,
    #[serde(default)]
    pub weights: WeightsSection,
    /// Decision threshold for the thresholded metrics.
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default)]
    pub bootstrap: BootstrapSection,
    #[serde(default)]
    pub eval: EvalSection,
}

impl ExperimentConfig {
    /// A config pointing at one primary CSV, everything else default.
    pub fn for_primary(primary_csv: &Path) -> Self {
        serde_json::from_value(
            serde_json::json!({ "primary_csv": primary_csv.to_string_lossy() }),
        )
        .expect("minimal config deserializes")
    }

    /// Checks invariants that do not require reading the data files.
    /// A SMOTE scope other than `train` is a leakage abort, not a plain
    /// config error.
    pub fn validate(&self) -> Result<(), RunnerError> {
        if self.smote.scope != SmoteScope::Train {
            return Err(RunnerError::Leakage(
                "smote scope must be \"train\"; resampling evaluation rows is refused".into(),
            ));
        }
        let bad = |msg: String| Err(RunnerError::Config(msg));
        if !(self.split.fraction > 0.0 && self.split.fraction < 1.0) {
            return bad(format!("split.fraction must be in (0, 1), got {}", self.split.fraction));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return bad(format!("tau must be in (0, 1), got {}", self.tau));
        }
        if self.bootstrap.resamples == 0 {
            return bad("bootstrap.resamples must be at least 1".into());
        }
        if self.smote.k_neighbors == 0 {
            return bad("smote.k_neighbors must be at least 1".into());
        }
        if !(self.smote.target_ratio > 0.0 && self.smote.target_ratio <= 1.0) {
            return bad(format!(
                "smote.target_ratio must be in (0, 1], got {}",
                self.smote.target_ratio
            ));
        }
        if self.learners.svm_subsample < 2 {
            return bad("learners.svm_subsample must be at least 2".into());
        }
        if self.eval.bins < 2 {
            return bad("eval.bins must be at least 2".into());
        }
        for (name, w) in [("xgb_rf", self.weights.xgb_rf), ("svm_lr", self.weights.svm_lr)] {
            if w.iter().any(|v| *v < 0.0 || !v.is_finite()) || w.iter().sum::<f64>() <= 0.0 {
                return bad(format!(
                    "weights.{name} must be non-negative with a positive sum, got {w:?}"
                ));
            }
        }
        for (label, path) in self.referenced_files() {
            if !path.exists() {
                return bad(format!("{label} file not found: {}", path.display()));
            }
        }
        Ok(())
    }

    fn referenced_files(&self) -> Vec<(&'static str, &Path)> {
        let mut files: Vec<(&'static str, &Path)> = vec![("primary_csv", &self.primary_csv)];
        if let Some(p) = &self.external_csv {
            files.push(("external_csv", p));
        }
        if let Some(p) = &self.primary_schema {
            files.push(("primary_schema", p));
        }
        if let Some(p) = &self.external_schema {
            files.push(("external_schema", p));
        }
        if let Some(p) = &self.mapping {
            files.push(("mapping", p));
        }
        files
    }

    /// Command-line flags override the file values; `None` keeps them.
    pub fn apply_overrides(
        &mut self,
        seed: Option<u64>,
        tau: Option<f64>,
        bootstrap: Option<usize>,
        eval_mode: Option<EvalMode>,
        mapping: Option<&Path>,
    ) {
        if let Some(s) = seed {
            self.split.seed = s;
        }
        if let Some(t) = tau {
            self.tau = t;
        }
        if let Some(b) = bootstrap {
            self.bootstrap.resamples = b;
        }
        if let Some(m) = eval_mode {
            self.eval.mode = m;
        }
        if let Some(p) = mapping {
            self.mapping = Some(p.to_path_buf());
        }
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, RunnerError> {
    let text = std::fs::read_to_string(path).map_err(super::io_err(path))?;
    serde_json::from_str(&text)
        .map_err(|e| RunnerError::Config(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_all_defaults() {
        let c: ExperimentConfig =
            serde_json::from_str(r#"{"primary_csv": "data/primary.csv"}"#).unwrap();
        assert_eq!(c.split.fraction, 0.7);
        assert_eq!(c.split.seed, 42);
        assert_eq!(c.tau, 0.5);
        assert_eq!(c.bootstrap.resamples, 1000);
        assert_eq!(c.smote.scope, SmoteScope::Train);
        assert_eq!(c.learners.svm_subsample, 20_000);
        assert_eq!(c.weights.xgb_rf, [0.5, 0.5]);
        assert_eq!(c.eval.mode, EvalMode::Natural);
        assert_eq!(c.zeros_as_missing.len(), 5);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let r: Result<ExperimentConfig, _> =
            serde_json::from_str(r#"{"primary_csv": "x.csv", "splits": {}}"#);
        assert!(r.is_err());
    }

    #[test]
    fn smote_scope_all_is_a_leakage_abort() {
        let mut c = ExperimentConfig::for_primary(Path::new("x.csv"));
        c.smote.scope = SmoteScope::All;
        let err = c.validate().unwrap_err();
        assert!(matches!(err, RunnerError::Leakage(_)));
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn out_of_range_values_are_config_errors() {
        let tmp = tempfile::NamedTempFile::new().unwrap();
        let mut c = ExperimentConfig::for_primary(tmp.path());
        c.tau = 1.0;
        let err = c.validate().unwrap_err();
        assert!(matches!(err, RunnerError::Config(_)));
        assert_eq!(err.exit_code(), 2);

        let mut c = ExperimentConfig::for_primary(tmp.path());
        c.split.fraction = 0.0;
        assert!(c.validate().is_err());

        let mut c = ExperimentConfig::for_primary(tmp.path());
        c.weights.svm_lr = [0.0, 0.0];
        assert!(c.validate().is_err());

        let mut c = ExperimentConfig::for_primary(tmp.path());
        c.bootstrap.resamples = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn missing_referenced_file_is_a_config_error() {
        let c = ExperimentConfig::for_primary(Path::new("definitely/not/here.csv"));
        let err = c.validate().unwrap_err();
        assert!(err.to_string().contains("not found"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn overrides_replace_only_given_fields() {
        let mut c = ExperimentConfig::for_primary(Path::new("x.csv"));
        c.apply_overrides(Some(9), None, Some(250), Some(EvalMode::Balanced), None);
        assert_eq!(c.split.seed, 9);
        assert_eq!(c.tau, 0.5);
        assert_eq!(c.bootstrap.resamples, 250);
        assert_eq!(c.eval.mode, EvalMode::Balanced);
    }

    #[test]
    fn config_round_trips_through_json() {
        let c = ExperimentConfig::for_primary(Path::new("a.csv"));
        let json = serde_json::to_string_pretty(&c).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(c, back);
    }
}
