//! The `prepare` and `train` commands: data preflight, then the frozen
//! training protocol: split, fit pipeline on the training split, apply,
//! oversample the training fold, train the four base learners, calibrate
//! the SVM, assemble both hybrids, and write the bundle.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::index::sample as index_sample;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, SmoteScope};
use super::{io_err, sha256_bytes, sha256_file, write_json, BundlePaths, RunnerError};
use crate::learners::{
    fit_platt, svm_decision_value, train_gbt, train_logistic, train_random_forest, train_svm,
    TrainedModel,
};
use crate::math::seeded_stream;
use crate::matrix::Matrix;
use crate::preprocess::{
    apply_pipeline, fit_pipeline, save_pipeline, FeatureBlock, FeatureMapping, PreprocessConfig,
    PIPELINE_VERSION,
};
use crate::smote::{smote_oversample, SmoteConfig};
use crate::tabular::{
    class_distribution, load_csv, normalize_token, split_train_test, Dataset, Role, Schema, Source,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSummary {
    pub path: String,
    pub sha256: String,
    pub rows: usize,
    pub negatives: usize,
    pub positives: usize,
    pub prevalence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub seed: u64,
    pub fraction: f64,
    pub train_rows: usize,
    pub test_rows: usize,
    pub train_prevalence: f64,
    pub test_prevalence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedSummary {
    pub primary: CohortSummary,
    pub external: Option<CohortSummary>,
    pub split: SplitSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
    pub rows: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoteRecord {
    pub applied: bool,
    pub rows_before: usize,
    pub rows_after: usize,
}

/// Which rows of the processed training fold the SVM-LR pair saw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsampleRecord {
    pub requested: usize,
    pub taken: usize,
    pub seed: u64,
    pub indices_sha256: String,
}

/// The run record: config echo, tool and pipeline versions, data
/// fingerprints, and what each stage produced. Deliberately contains no
/// timestamps so identical runs are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub pipeline_version: String,
    pub config: ExperimentConfig,
    pub primary_data: FileRecord,
    pub external_data: Option<FileRecord>,
    pub schema_fingerprint: String,
    pub split: SplitSummary,
    pub smote: SmoteRecord,
    pub svm_subsample: SubsampleRecord,
    pub model_files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberSpec {
    /// File stem under `models/`.
    pub model: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub members: Vec<MemberSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsemblesFile {
    pub xgb_rf: EnsembleSpec,
    pub svm_lr: EnsembleSpec,
}

fn resolve_schema(path: Option<&Path>, builtin: fn() -> Schema) -> Result<Schema, RunnerError> {
    match path {
        Some(p) => Ok(Schema::load(p)?),
        None => Ok(builtin()),
    }
}

fn resolve_mapping(config: &ExperimentConfig) -> Result<FeatureMapping, RunnerError> {
    match &config.mapping {
        Some(p) => Ok(FeatureMapping::load(p)?),
        None => Ok(FeatureMapping::pima_default()),
    }
}

/// The zeros-as-missing list may name measurements from either cohort's
/// vocabulary. Only names the model actually sees (primary features or
/// crosswalk sources) go into the pipeline; names that exist solely as
/// unmapped external columns are dropped since those columns never feed
/// the model. Names found nowhere are treated as typos.
fn effective_zero_columns(
    config: &ExperimentConfig,
    primary: &Schema,
    mapping: &FeatureMapping,
) -> Result<BTreeSet<String>, RunnerError> {
    let external = resolve_schema(config.external_schema.as_deref(), Schema::pima)?;
    let mut keep = BTreeSet::new();
    for z in &config.zeros_as_missing {
        let want = normalize_token(z);
        if primary.column_index(z).is_some()
            || mapping.map.keys().any(|k| normalize_token(k) == want)
        {
            keep.insert(z.clone());
        } else if external.column_index(z).is_some() {
            log::debug!("zeros_as_missing `{z}` is an unmapped external column; ignored");
        } else {
            return Err(RunnerError::Config(format!(
                "zeros_as_missing names unknown column `{z}`"
            )));
        }
    }
    Ok(keep)
}

fn cohort_summary(ds: &Dataset, path: &Path) -> Result<CohortSummary, RunnerError> {
    let (negatives, positives, prevalence) = class_distribution(ds);
    Ok(CohortSummary {
        path: path.display().to_string(),
        sha256: sha256_file(path)?,
        rows: ds.n_rows(),
        negatives,
        positives,
        prevalence,
    })
}

fn load_primary(config: &ExperimentConfig) -> Result<Dataset, RunnerError> {
    let schema = resolve_schema(config.primary_schema.as_deref(), Schema::primary_diabetes)?;
    Ok(load_csv(&config.primary_csv, &schema, Source::Primary)?)
}

pub(super) fn load_external(config: &ExperimentConfig) -> Result<Option<Dataset>, RunnerError> {
    let Some(path) = &config.external_csv else { return Ok(None) };
    let schema = resolve_schema(config.external_schema.as_deref(), Schema::pima)?;
    Ok(Some(load_csv(path, &schema, Source::External)?))
}

/// Preflight: loads the configured cohorts, computes the seeded split,
/// and records row counts, class balance, and file fingerprints. Writes
/// `prepared.json` and `split_indices.json`.
pub fn cmd_prepare(config: &ExperimentConfig, out: &Path) -> Result<PreparedSummary, RunnerError> {
    config.validate()?;
    let paths = BundlePaths::new(out);
    std::fs::create_dir_all(out).map_err(io_err(out))?;

    let primary = load_primary(config)?;
    let split =
        split_train_test(&primary, config.split.fraction, config.split.seed, config.split.stratified)?;
    let (_, _, train_prev) = class_distribution(&split.train);
    let (_, _, test_prev) = class_distribution(&split.test);

    let summary = PreparedSummary {
        primary: cohort_summary(&primary, &config.primary_csv)?,
        external: match (load_external(config)?, &config.external_csv) {
            (Some(ds), Some(path)) => Some(cohort_summary(&ds, path)?),
            _ => None,
        },
        split: SplitSummary {
            seed: split.seed,
            fraction: split.fraction,
            train_rows: split.train.n_rows(),
            test_rows: split.test.n_rows(),
            train_prevalence: train_prev,
            test_prevalence: test_prev,
        },
    };
    write_json(&paths.split_indices(), &split.indices())?;
    write_json(&paths.prepared(), &summary)?;
    Ok(summary)
}

/// Refuses to oversample anything but the training fold. The config
/// scope was already checked; this guards the call site itself.
fn oversample_train_only(
    block: &FeatureBlock,
    role: Role,
    cfg: &SmoteConfig,
) -> Result<(Matrix, Vec<u8>), RunnerError> {
    if role != Role::Train {
        return Err(RunnerError::Leakage(format!(
            "SMOTE requested on rows with role {role:?}; only training rows may be resampled"
        )));
    }
    Ok(smote_oversample(&block.features, &block.labels, cfg)?)
}

/// Stratified draw of `want` row indices without replacement; per-class
/// counts follow the class proportions with largest-remainder rounding.
/// Returned indices are ascending. Deterministic in `(labels, want, seed)`.
pub(super) fn stratified_subsample(labels: &[u8], want: usize, seed: u64) -> Vec<usize> {
    let n = labels.len();
    if want >= n {
        return (0..n).collect();
    }
    let by_class: [Vec<usize>; 2] = labels.iter().enumerate().fold(
        [Vec::new(), Vec::new()],
        |mut acc, (i, &y)| {
            acc[y as usize].push(i);
            acc
        },
    );
    let frac = want as f64 / n as f64;
    let mut take = [
        (frac * by_class[0].len() as f64).floor() as usize,
        (frac * by_class[1].len() as f64).floor() as usize,
    ];
    let rem0 = frac * by_class[0].len() as f64 - take[0] as f64;
    let rem1 = frac * by_class[1].len() as f64 - take[1] as f64;
    let mut leftover = want - take[0] - take[1];
    let order = if rem1 > rem0 { [1usize, 0] } else { [0usize, 1] };
    for c in order {
        while leftover > 0 && take[c] < by_class[c].len() {
            take[c] += 1;
            leftover -= 1;
        }
    }

    let mut chosen = Vec::with_capacity(want);
    for (c, members) in by_class.iter().enumerate() {
        if take[c] == 0 {
            continue;
        }
        let mut rng = seeded_stream(seed, c as u64);
        for k in index_sample(&mut rng, members.len(), take[c]) {
            chosen.push(members[k]);
        }
    }
    chosen.sort_unstable();
    chosen
}

/// Runs the training protocol in its frozen order and writes the bundle:
/// `manifest.json`, `pipeline.json`, `split_indices.json`, four model
/// files, and `ensembles.json`. Identical configs and data produce
/// byte-identical bundles.
pub fn cmd_train(config: &ExperimentConfig, out: &Path) -> Result<Manifest, RunnerError> {
    config.validate()?;
    debug_assert_eq!(config.smote.scope, SmoteScope::Train);
    let paths = BundlePaths::new(out);
    std::fs::create_dir_all(paths.models_dir()).map_err(io_err(&paths.models_dir()))?;

    let primary = load_primary(config)?;
    let split =
        split_train_test(&primary, config.split.fraction, config.split.seed, config.split.stratified)?;
    let (_, _, train_prev) = class_distribution(&split.train);
    let (_, _, test_prev) = class_distribution(&split.test);

    let mapping = resolve_mapping(config)?;
    let pre_config = PreprocessConfig {
        zeros_as_missing: effective_zero_columns(config, primary.schema(), &mapping)?,
        mapping: Some(mapping),
    };
    let pipeline = fit_pipeline(&split.train, &pre_config)?;
    let train_block = apply_pipeline(&pipeline, &split.train)?;

    let smote_cfg = SmoteConfig {
        k_neighbors: config.smote.k_neighbors,
        target_ratio: config.smote.target_ratio,
        seed: config.smote.seed,
    };
    let role = split.train.provenance().role;
    let (bal_x, bal_y) = oversample_train_only(&train_block, role, &smote_cfg)?;

    let gbt = train_gbt(&bal_x, &bal_y, &config.learners.boosting)?;
    let forest = train_random_forest(&bal_x, &bal_y, &config.learners.forest)?;

    let sub_idx = stratified_subsample(
        &bal_y,
        config.learners.svm_subsample,
        config.learners.svm_subsample_seed,
    );
    let sub_x = bal_x.select_rows(&sub_idx);
    let sub_y: Vec<u8> = sub_idx.iter().map(|&i| bal_y[i]).collect();

    let svm = train_svm(&sub_x, &sub_y, &config.learners.svm)?;
    let logistic = train_logistic(&sub_x, &sub_y, &config.learners.logistic)?;
    let margins = svm_decision_value(&svm, &sub_x)?;
    let platt = fit_platt(&margins, &sub_y, config.learners.platt_tol)?;

    let pipeline = pipeline.with_calibration(platt);
    save_pipeline(&pipeline, &paths.pipeline())?;
    write_json(&paths.split_indices(), &split.indices())?;

    let models = [
        TrainedModel::GradientBoosting(gbt),
        TrainedModel::RandomForest(forest),
        TrainedModel::SvmPlatt { model: svm, calibrator: platt },
        TrainedModel::Logistic(logistic),
    ];
    let mut model_files = Vec::new();
    for m in &models {
        write_json(&paths.model(m.kind_name()), m)?;
        model_files.push(m.kind_name().to_string());
    }

    let w = &config.weights;
    let ensembles = EnsemblesFile {
        xgb_rf: EnsembleSpec {
            members: vec![
                MemberSpec { model: "gradient_boosting".into(), weight: w.xgb_rf[0] },
                MemberSpec { model: "random_forest".into(), weight: w.xgb_rf[1] },
            ],
        },
        svm_lr: EnsembleSpec {
            members: vec![
                MemberSpec { model: "svm_platt".into(), weight: w.svm_lr[0] },
                MemberSpec { model: "logistic".into(), weight: w.svm_lr[1] },
            ],
        },
    };
    write_json(&paths.ensembles(), &ensembles)?;

    let manifest = Manifest {
        tool: format!("tabrisk {}", env!("CARGO_PKG_VERSION")),
        pipeline_version: PIPELINE_VERSION.to_string(),
        config: config.clone(),
        primary_data: FileRecord {
            path: config.primary_csv.display().to_string(),
            sha256: sha256_file(&config.primary_csv)?,
            rows: primary.n_rows(),
        },
        external_data: match &config.external_csv {
            Some(p) => Some(FileRecord {
                path: p.display().to_string(),
                sha256: sha256_file(p)?,
                rows: load_external(config)?.map(|d| d.n_rows()).unwrap_or(0),
            }),
            None => None,
        },
        schema_fingerprint: primary.schema().fingerprint(),
        split: SplitSummary {
            seed: split.seed,
            fraction: split.fraction,
            train_rows: split.train.n_rows(),
            test_rows: split.test.n_rows(),
            train_prevalence: train_prev,
            test_prevalence: test_prev,
        },
        smote: SmoteRecord {
            applied: bal_y.len() > train_block.labels.len(),
            rows_before: train_block.labels.len(),
            rows_after: bal_y.len(),
        },
        svm_subsample: SubsampleRecord {
            requested: config.learners.svm_subsample,
            taken: sub_idx.len(),
            seed: config.learners.svm_subsample_seed,
            indices_sha256: sha256_bytes(&serde_json::to_vec(&sub_idx).expect("indices serialize")),
        },
        model_files,
    };
    write_json(&paths.manifest(), &manifest)?;
    Ok(manifest)
}
