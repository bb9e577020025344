//! The `evaluate` and `external-validate` commands: score a frozen
//! bundle on a cohort, compute discrimination, calibration, thresholded
//! metrics and paired tests, and write the per-cohort report plus curve
//! CSV exports. Nothing in the bundle is refit or rewritten.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::index::sample as index_sample;
use serde::{Deserialize, Serialize};

use super::config::{EvalMode, ExperimentConfig};
use super::train::{load_external, EnsembleSpec, EnsemblesFile, Manifest};
use super::{io_err, sha256_file, write_json, BundlePaths, RunnerError};
use crate::ensemble::VotingEnsemble;
use crate::learners::TrainedModel;
use crate::math::seeded_stream;
use crate::metrics::{
    auprc, auroc, calibration_summary, confusion_at_threshold, pr_curve, roc_curve,
    thresholded_metrics, CurveSeries, ReliabilityBin, ScoredPredictions,
};
use crate::preprocess::{apply_pipeline, load_pipeline, FeatureMapping, FrozenPipeline};
use crate::stats::{bootstrap_ci, delong_test, mcnemar_test, Effect};
use crate::tabular::{load_csv, Role, Schema, Source, SplitIndices};

/// Command-line overrides applied on top of the manifest's config echo.
#[derive(Debug, Clone, Default)]
pub struct EvalOverrides {
    pub tau: Option<f64>,
    pub bootstrap: Option<usize>,
    pub mode: Option<EvalMode>,
    pub mapping: Option<PathBuf>,
}

#[derive(Debug)]
pub struct LoadedBundle {
    pub paths: BundlePaths,
    pub manifest: Manifest,
    pub pipeline: FrozenPipeline,
    pub models: BTreeMap<String, TrainedModel>,
    pub ensembles: EnsemblesFile,
    pub split: SplitIndices,
}

pub fn load_bundle(out: &Path) -> Result<LoadedBundle, RunnerError> {
    let paths = BundlePaths::new(out);
    let manifest: Manifest = super::read_json(&paths.manifest())?;
    let pipeline = load_pipeline(&paths.pipeline())?;
    let ensembles: EnsemblesFile = super::read_json(&paths.ensembles())?;
    let split: SplitIndices = super::read_json(&paths.split_indices())?;
    let mut models = BTreeMap::new();
    for kind in &manifest.model_files {
        let m: TrainedModel = super::read_json(&paths.model(kind))?;
        if m.kind_name() != kind {
            return Err(RunnerError::Bundle(format!(
                "model file {kind}.json holds a {} model",
                m.kind_name()
            )));
        }
        models.insert(kind.clone(), m);
    }
    Ok(LoadedBundle { paths, manifest, pipeline, models, ensembles, split })
}

fn build_ensemble(
    spec: &EnsembleSpec,
    models: &BTreeMap<String, TrainedModel>,
) -> Result<VotingEnsemble, RunnerError> {
    let mut members = Vec::with_capacity(spec.members.len());
    for m in &spec.members {
        let model = models
            .get(&m.model)
            .ok_or_else(|| RunnerError::Bundle(format!("ensemble member {} not in bundle", m.model)))?;
        members.push((model.clone(), m.weight));
    }
    Ok(VotingEnsemble::new(members)?)
}

/// (xgb_rf, svm_lr) reconstructed from the bundle's member references.
pub(super) fn hybrids(b: &LoadedBundle) -> Result<(VotingEnsemble, VotingEnsemble), RunnerError> {
    Ok((
        build_ensemble(&b.ensembles.xgb_rf, &b.models)?,
        build_ensemble(&b.ensembles.svm_lr, &b.models)?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdedReport {
    pub tau: f64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub auroc: f64,
    pub auroc_ci: [f64; 2],
    pub auprc: f64,
    pub auprc_ci: [f64; 2],
    pub brier: f64,
    pub cal_slope: f64,
    pub cal_intercept: f64,
    pub thresholded: ThresholdedReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelongReport {
    /// AUROC(xgb_rf) minus AUROC(svm_lr).
    pub delta_auc: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McnemarReport {
    /// Cases xgb_rf got right and svm_lr got wrong, and vice versa.
    pub b: usize,
    pub c: usize,
    pub statistic: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestsReport {
    pub delong: DelongReport,
    pub mcnemar: McnemarReport,
}

/// One cohort's evaluation: the stable report schema written to
/// `reports/<cohort>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortReport {
    pub cohort: String,
    pub prevalence: f64,
    pub models: BTreeMap<String, ModelReport>,
    pub tests: TestsReport,
}

fn write_curve_csv(path: &Path, curve: &CurveSeries) -> Result<(), RunnerError> {
    let (hx, hy) = curve.headers();
    let mut text = format!("{hx},{hy}\n");
    for p in &curve.points {
        text.push_str(&format!("{},{}\n", p.x, p.y));
    }
    crate::preprocess::atomic_write(path, text.as_bytes()).map_err(io_err(path))
}

fn write_reliability_csv(path: &Path, bins: &[ReliabilityBin]) -> Result<(), RunnerError> {
    let mut text = String::from("lower,upper,mean_predicted,observed_frequency,count\n");
    for b in bins {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            b.lower, b.upper, b.mean_predicted, b.observed_frequency, b.count
        ));
    }
    crate::preprocess::atomic_write(path, text.as_bytes()).map_err(io_err(path))
}

fn model_report(
    sp: &ScoredPredictions,
    cfg: &ExperimentConfig,
) -> Result<(ModelReport, CurveSeries, CurveSeries, Vec<ReliabilityBin>), RunnerError> {
    let roc = roc_curve(sp)?;
    let pr = pr_curve(sp)?;
    let cal = calibration_summary(sp, cfg.eval.bins)?;
    let auroc_ci = bootstrap_ci(auroc, sp, cfg.bootstrap.resamples, cfg.bootstrap.seed)?;
    let auprc_ci = bootstrap_ci(auprc, sp, cfg.bootstrap.resamples, cfg.bootstrap.seed)?;
    let counts = confusion_at_threshold(sp, cfg.tau);
    let t = thresholded_metrics(&counts);
    let report = ModelReport {
        auroc: auroc_ci.point,
        auroc_ci: [auroc_ci.lower, auroc_ci.upper],
        auprc: auprc_ci.point,
        auprc_ci: [auprc_ci.lower, auprc_ci.upper],
        brier: cal.brier,
        cal_slope: cal.slope,
        cal_intercept: cal.intercept,
        thresholded: ThresholdedReport {
            tau: cfg.tau,
            accuracy: t.accuracy,
            precision: t.precision,
            recall: t.recall,
            f1: t.f1,
        },
    };
    Ok((report, roc, pr, cal.bins))
}

/// Scores both hybrids on one prepared cohort and writes the report and
/// curve exports.
fn evaluate_cohort(
    bundle: &LoadedBundle,
    cfg: &ExperimentConfig,
    cohort: &str,
    features: &crate::matrix::Matrix,
    labels: &[u8],
) -> Result<CohortReport, RunnerError> {
    let (xgb_rf, svm_lr) = hybrids(bundle)?;
    let scores_a = xgb_rf.predict_proba(features)?;
    let scores_b = svm_lr.predict_proba(features)?;
    let sp_a = ScoredPredictions::new(scores_a.clone(), labels.to_vec(), cohort)?;
    let sp_b = ScoredPredictions::new(scores_b.clone(), labels.to_vec(), cohort)?;

    std::fs::create_dir_all(bundle.paths.curves_dir())
        .map_err(io_err(&bundle.paths.curves_dir()))?;
    std::fs::create_dir_all(bundle.paths.reports_dir())
        .map_err(io_err(&bundle.paths.reports_dir()))?;

    let mut models = BTreeMap::new();
    for (name, sp) in [("xgb_rf", &sp_a), ("svm_lr", &sp_b)] {
        let (report, roc, pr, bins) = model_report(sp, cfg)?;
        write_curve_csv(&bundle.paths.curve(cohort, name, "roc"), &roc)?;
        write_curve_csv(&bundle.paths.curve(cohort, name, "pr"), &pr)?;
        write_reliability_csv(&bundle.paths.curve(cohort, name, "reliability"), &bins)?;
        models.insert(name.to_string(), report);
    }

    let delong = delong_test(&scores_a, &scores_b, labels)?;
    let Effect::DeltaAuc(delta_auc) = delong.effect else {
        return Err(RunnerError::Bundle("paired AUC test returned a foreign effect".into()));
    };
    let pred_a: Vec<u8> = scores_a.iter().map(|&p| u8::from(p >= cfg.tau)).collect();
    let pred_b: Vec<u8> = scores_b.iter().map(|&p| u8::from(p >= cfg.tau)).collect();
    let mcnemar = mcnemar_test(&pred_a, &pred_b, labels)?;
    let Effect::Discordant { b, c } = mcnemar.effect else {
        return Err(RunnerError::Bundle("discordant-count test returned a foreign effect".into()));
    };

    let report = CohortReport {
        cohort: cohort.to_string(),
        prevalence: sp_a.prevalence(),
        models,
        tests: TestsReport {
            delong: DelongReport { delta_auc, p: delong.p_value },
            mcnemar: McnemarReport { b, c, statistic: mcnemar.statistic, p: mcnemar.p_value },
        },
    };
    write_json(&bundle.paths.report(cohort), &report)?;
    Ok(report)
}

/// All minority rows plus a seeded draw of equally many majority rows,
/// ascending. Gives an exactly balanced cohort.
fn balanced_indices(labels: &[u8], seed: u64) -> Vec<usize> {
    let by_class: [Vec<usize>; 2] = labels.iter().enumerate().fold(
        [Vec::new(), Vec::new()],
        |mut acc, (i, &y)| {
            acc[y as usize].push(i);
            acc
        },
    );
    let (minority, majority) =
        if by_class[1].len() <= by_class[0].len() { (1, 0) } else { (0, 1) };
    let mut keep = by_class[minority].clone();
    let mut rng = seeded_stream(seed, 0);
    for k in index_sample(&mut rng, by_class[majority].len(), by_class[minority].len()) {
        keep.push(by_class[majority][k]);
    }
    keep.sort_unstable();
    keep
}

/// Fingerprints of every bundle artifact, for asserting that evaluation
/// wrote no parameters back.
fn bundle_hashes(b: &LoadedBundle) -> Result<Vec<(PathBuf, String)>, RunnerError> {
    let mut files = vec![
        b.paths.manifest(),
        b.paths.pipeline(),
        b.paths.split_indices(),
        b.paths.ensembles(),
    ];
    for kind in &b.manifest.model_files {
        files.push(b.paths.model(kind));
    }
    files
        .into_iter()
        .map(|p| sha256_file(&p).map(|h| (p, h)))
        .collect()
}

fn verify_untouched(b: &LoadedBundle, before: &[(PathBuf, String)]) -> Result<(), RunnerError> {
    let after = bundle_hashes(b)?;
    for ((path, h0), (_, h1)) in before.iter().zip(&after) {
        if h0 != h1 {
            return Err(RunnerError::Bundle(format!(
                "evaluation modified frozen artifact {}",
                path.display()
            )));
        }
    }
    Ok(())
}

fn check_data_unchanged(path: &Path, recorded: &str) -> Result<(), RunnerError> {
    let now = sha256_file(path)?;
    if now != recorded {
        return Err(RunnerError::Bundle(format!(
            "{} changed since training (fingerprint mismatch); retrain or restore the file",
            path.display()
        )));
    }
    Ok(())
}

/// Scores the held-out internal test split. `balanced` mode undersamples
/// the majority class of the test split (only) to a 50/50 mix.
pub fn cmd_evaluate(out: &Path, overrides: &EvalOverrides) -> Result<CohortReport, RunnerError> {
    let bundle = load_bundle(out)?;
    let before = bundle_hashes(&bundle)?;
    let mut cfg = bundle.manifest.config.clone();
    cfg.apply_overrides(None, overrides.tau, overrides.bootstrap, overrides.mode, None);
    cfg.validate()?;

    check_data_unchanged(&cfg.primary_csv, &bundle.manifest.primary_data.sha256)?;
    let schema = match &cfg.primary_schema {
        Some(p) => Schema::load(p)?,
        None => Schema::primary_diabetes(),
    };
    let primary = load_csv(&cfg.primary_csv, &schema, Source::Primary)?;
    let test = primary.select(&bundle.split.test_indices, Role::Test);

    let test = match cfg.eval.mode {
        EvalMode::Natural => test,
        EvalMode::Balanced => {
            let keep = balanced_indices(&test.labels(), cfg.eval.balanced_seed);
            test.select(&keep, Role::Test)
        }
    };
    let block = apply_pipeline(&bundle.pipeline, &test)?;
    let report = evaluate_cohort(&bundle, &cfg, "internal_test", &block.features, &block.labels)?;
    verify_untouched(&bundle, &before)?;
    Ok(report)
}

/// Harmonizes the configured external cohort through the frozen pipeline
/// and scores it at natural prevalence.
pub fn cmd_external_validate(
    out: &Path,
    overrides: &EvalOverrides,
) -> Result<CohortReport, RunnerError> {
    let bundle = load_bundle(out)?;
    let before = bundle_hashes(&bundle)?;
    let mut cfg = bundle.manifest.config.clone();
    cfg.apply_overrides(None, overrides.tau, overrides.bootstrap, None, None);
    cfg.validate()?;

    let Some(external_path) = cfg.external_csv.clone() else {
        return Err(RunnerError::Config(
            "external_csv is not configured; nothing to validate against".into(),
        ));
    };
    if let Some(rec) = &bundle.manifest.external_data {
        check_data_unchanged(&external_path, &rec.sha256)?;
    }
    let external = load_external(&cfg)?.expect("external_csv checked above");

    // The crosswalk is declarative (column names only), so overriding it
    // is a sensitivity analysis, not a refit; fitted parameters stay as
    // loaded.
    let pipeline = match &overrides.mapping {
        Some(p) => {
            log::warn!("overriding the frozen feature mapping with {}", p.display());
            let mut alt = bundle.pipeline.clone();
            alt.mapping = Some(FeatureMapping::load(p)?);
            alt
        }
        None => bundle.pipeline.clone(),
    };
    let block = apply_pipeline(&pipeline, &external)?;
    let report = evaluate_cohort(&bundle, &cfg, "external", &block.features, &block.labels)?;
    verify_untouched(&bundle, &before)?;
    Ok(report)
}
