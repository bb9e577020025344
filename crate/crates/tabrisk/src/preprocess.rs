//! Frozen preprocessing: categorical encoding, schema harmonization,
//! median/mode imputation, and min-max scaling, all fit on a training
//! split once and then applied unchanged everywhere else.
//!
//! The fitted state serializes to a single JSON document with top-level
//! keys `{version, encoder, imputer, scaler, mapping, calibration,
//! fingerprint}` so a freeze is auditable and diffable.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::learners::PlattCalibrator;
use crate::math::quantile_sorted;
use crate::matrix::Matrix;
use crate::tabular::{normalize_token, Cell, ColumnKind, Dataset, Role, Schema};

pub const PIPELINE_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("training split is empty")]
    EmptyTrain,
    #[error("training outcome is constant; nothing to learn")]
    ConstantOutcome,
    #[error("configuration references column `{0}` absent from the schema and mapping")]
    MissingColumn(String),
    #[error("fitting requires a dataset with the train role, got {got:?}")]
    TrainRoleRequired { got: Role },
    #[error("column `{column}`: token `{token}` not present in the frozen encoder")]
    UnseenCategory { column: String, token: String },
    #[error("mapping references column `{0}` that cannot be resolved")]
    UnmappableColumn(String),
    #[error("column `{column}`: declared unit `{got}` differs from frozen unit `{expected}`")]
    UnitMismatch { column: String, expected: String, got: String },
    #[error("pipeline file version `{got}` does not match supported version `{expected}`")]
    VersionMismatch { expected: String, got: String },
    #[error("pipeline file unreadable: {0}")]
    CorruptFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Token → code tables for every categorical input column. Tokens are
/// stored normalized (trimmed, lowercased) and matched the same way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderMap {
    pub columns: BTreeMap<String, BTreeMap<String, u32>>,
}

impl EncoderMap {
    pub fn from_schema(schema: &Schema) -> Self {
        let mut columns = BTreeMap::new();
        for c in &schema.columns {
            if let ColumnKind::Categorical { levels } = &c.kind {
                let normed: BTreeMap<String, u32> =
                    levels.iter().map(|(k, v)| (normalize_token(k), *v)).collect();
                columns.insert(c.name.clone(), normed);
            }
        }
        EncoderMap { columns }
    }

    fn levels_of(&self, column: &str) -> Option<&BTreeMap<String, u32>> {
        let want = normalize_token(column);
        self.columns.iter().find(|(k, _)| normalize_token(k) == want).map(|(_, v)| v)
    }

    /// Encodes one cell of a categorical column. Numeric cells must carry
    /// a code the encoder knows; unknown tokens are rejected outright.
    fn encode_cell(&self, column: &str, cell: &Cell) -> Result<Cell, PreprocessError> {
        let levels = match self.levels_of(column) {
            Some(l) => l,
            None => return Ok(cell.clone()),
        };
        match cell {
            Cell::Missing => Ok(Cell::Missing),
            Cell::Token(t) => match levels.get(&normalize_token(t)) {
                Some(code) => Ok(Cell::Num(*code as f64)),
                None => Err(PreprocessError::UnseenCategory {
                    column: column.to_string(),
                    token: t.clone(),
                }),
            },
            Cell::Num(v) => {
                let is_code = v.fract() == 0.0
                    && *v >= 0.0
                    && levels.values().any(|&c| c as f64 == *v);
                if is_code {
                    Ok(Cell::Num(*v))
                } else {
                    Err(PreprocessError::UnseenCategory {
                        column: column.to_string(),
                        token: format!("{v}"),
                    })
                }
            }
        }
    }
}

/// Train-split fill values: medians for continuous and count columns,
/// most-frequent codes for binary and categorical columns, plus the set
/// of column names whose zeros are read as missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputerParams {
    pub medians: BTreeMap<String, f64>,
    pub modes: BTreeMap<String, f64>,
    pub zeros_as_missing: BTreeSet<String>,
}

impl ImputerParams {
    /// Fill value for a model input column: mode if the column is
    /// discrete, median otherwise.
    pub fn fill_value(&self, column: &str) -> Option<f64> {
        let want = normalize_token(column);
        let find = |m: &BTreeMap<String, f64>| {
            m.iter().find(|(k, _)| normalize_token(k) == want).map(|(_, v)| *v)
        };
        find(&self.modes).or_else(|| find(&self.medians))
    }

    fn zero_marked(&self, column: &str) -> bool {
        let want = normalize_token(column);
        self.zeros_as_missing.iter().any(|z| normalize_token(z) == want)
    }
}

/// Coarse value family of a model input column, kept so a frozen pipeline
/// can rebuild the input schema without the original schema file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    Continuous,
    Count,
    Binary,
    Categorical,
}

impl ValueKind {
    fn of(kind: &ColumnKind) -> Self {
        match kind {
            ColumnKind::Continuous => ValueKind::Continuous,
            ColumnKind::Count => ValueKind::Count,
            ColumnKind::Binary => ValueKind::Binary,
            ColumnKind::Categorical { .. } => ValueKind::Categorical,
            ColumnKind::Outcome => unreachable!("outcome is not a model input"),
        }
    }
}

/// Per-column training range, in model input order. Also records name,
/// unit, and kind, which makes the frozen pipeline self-describing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledColumn {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    pub kind: ValueKind,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub columns: Vec<ScaledColumn>,
}

impl ScalerParams {
    /// Min-max scaling without clipping; a degenerate column (min = max)
    /// maps every value to 0.0.
    pub fn scale(&self, column_idx: usize, v: f64) -> f64 {
        let c = &self.columns[column_idx];
        if c.min == c.max {
            0.0
        } else {
            (v - c.min) / (c.max - c.min)
        }
    }
}

/// How unmapped model inputs are completed on external data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillPolicy {
    /// Training-split median (continuous) or mode (discrete).
    TrainImpute,
}

/// External column → model input column renames plus the fill policy for
/// model inputs the external cohort does not provide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMapping {
    pub map: BTreeMap<String, String>,
    pub fill_policy: FillPolicy,
}

impl FeatureMapping {
    /// Shipped default for the external cohort: glucose, body-mass index,
    /// and age carry over; every other model input is train-imputed and
    /// the remaining external predictors are dropped.
    pub fn pima_default() -> Self {
        let map = [
            ("Glucose", "blood_glucose_level"),
            ("BMI", "bmi"),
            ("Age", "age"),
        ]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
        FeatureMapping { map, fill_policy: FillPolicy::TrainImpute }
    }

    pub fn load(path: &Path) -> Result<Self, PreprocessError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| PreprocessError::CorruptFile(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<(), PreprocessError> {
        let json = serde_json::to_string_pretty(self).expect("mapping serializes");
        atomic_write(path, (json + "\n").as_bytes())?;
        Ok(())
    }
}

/// What a fit run is told: which columns treat zero as missing, and how
/// external columns map onto the model inputs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    #[serde(default)]
    pub zeros_as_missing: BTreeSet<String>,
    #[serde(default)]
    pub mapping: Option<FeatureMapping>,
}

/// Immutable preprocessing state. Every parameter inside comes from one
/// training split; application never mutates it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrozenPipeline {
    pub version: String,
    pub encoder: EncoderMap,
    pub imputer: ImputerParams,
    pub scaler: ScalerParams,
    pub mapping: Option<FeatureMapping>,
    pub calibration: Option<PlattCalibrator>,
    pub fingerprint: String,
}

impl FrozenPipeline {
    pub fn feature_names(&self) -> Vec<String> {
        self.scaler.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn n_features(&self) -> usize {
        self.scaler.columns.len()
    }

    /// Functional update attaching fitted calibration parameters; the
    /// original value is consumed, never mutated in place.
    pub fn with_calibration(mut self, params: PlattCalibrator) -> Self {
        self.calibration = Some(params);
        self
    }
}

/// Scaled feature matrix with labels and application metadata.
#[derive(Debug, Clone)]
pub struct FeatureBlock {
    pub features: Matrix,
    pub labels: Vec<u8>,
    pub feature_names: Vec<String>,
    /// Fraction of scaled cells outside [0, 1] (unclipped pass-through).
    pub oor_fraction: f64,
    pub dropped_columns: Vec<String>,
    pub filled_columns: Vec<String>,
}

/// Harmonized dataset plus the bookkeeping of what was dropped or filled.
#[derive(Debug, Clone)]
pub struct Harmonized {
    pub dataset: Dataset,
    pub dropped_columns: Vec<String>,
    pub filled_columns: Vec<String>,
}

fn is_missing_token(imputer: &ImputerParams, column: &str, cell: &Cell) -> bool {
    match cell {
        Cell::Missing => true,
        Cell::Num(v) => *v == 0.0 && imputer.zero_marked(column),
        Cell::Token(_) => false,
    }
}

/// Estimates encoder, imputer, and scaler parameters from one training
/// split and freezes them together with the schema fingerprint.
pub fn fit_pipeline(
    train: &Dataset,
    config: &PreprocessConfig,
) -> Result<FrozenPipeline, PreprocessError> {
    let role = train.provenance().role;
    if role != Role::Train {
        return Err(PreprocessError::TrainRoleRequired { got: role });
    }
    if train.n_rows() == 0 {
        return Err(PreprocessError::EmptyTrain);
    }
    let labels = train.labels();
    if labels.iter().all(|&y| y == labels[0]) {
        return Err(PreprocessError::ConstantOutcome);
    }

    let schema = train.schema();
    if let Some(m) = &config.mapping {
        for target in m.map.values() {
            match schema.column_index(target) {
                Some(i) if schema.columns[i].kind != ColumnKind::Outcome => {}
                _ => return Err(PreprocessError::MissingColumn(target.clone())),
            }
        }
    }
    for z in &config.zeros_as_missing {
        let in_schema = schema.column_index(z).is_some();
        let in_mapping = config
            .mapping
            .as_ref()
            .is_some_and(|m| m.map.keys().any(|k| normalize_token(k) == normalize_token(z)));
        if !in_schema && !in_mapping {
            return Err(PreprocessError::MissingColumn(z.clone()));
        }
    }

    let encoder = EncoderMap::from_schema(schema);
    let zero_set: BTreeSet<String> = config.zeros_as_missing.clone();
    let probe_imputer = ImputerParams {
        medians: BTreeMap::new(),
        modes: BTreeMap::new(),
        zeros_as_missing: zero_set.clone(),
    };

    let mut medians = BTreeMap::new();
    let mut modes = BTreeMap::new();
    let mut scaled_columns = Vec::new();

    for &ci in &schema.feature_indices() {
        let col = &schema.columns[ci];
        let mut values: Vec<f64> = Vec::new();
        for row in train.rows() {
            let cell = encoder.encode_cell(&col.name, &row[ci])?;
            if is_missing_token(&probe_imputer, &col.name, &cell) {
                continue;
            }
            if let Cell::Num(v) = cell {
                values.push(v);
            }
        }
        let discrete = matches!(col.kind, ColumnKind::Binary | ColumnKind::Categorical { .. });
        let (fill, min, max) = if values.is_empty() {
            log::warn!("column `{}` has no observed training values; fill and range default to 0", col.name);
            (0.0, 0.0, 0.0)
        } else if discrete {
            let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
            for &v in &values {
                *counts.entry(v as i64).or_insert(0) += 1;
            }
            let best = counts
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                .map(|(k, _)| *k as f64)
                .unwrap();
            let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (best, min, max)
        } else {
            let mut sorted = values.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            (quantile_sorted(&sorted, 0.5), sorted[0], sorted[sorted.len() - 1])
        };
        if discrete {
            modes.insert(col.name.clone(), fill);
        } else {
            medians.insert(col.name.clone(), fill);
        }
        scaled_columns.push(ScaledColumn {
            name: col.name.clone(),
            unit: col.unit.clone(),
            kind: ValueKind::of(&col.kind),
            min,
            max,
        });
    }

    Ok(FrozenPipeline {
        version: PIPELINE_VERSION.to_string(),
        encoder,
        imputer: ImputerParams { medians, modes, zeros_as_missing: zero_set },
        scaler: ScalerParams { columns: scaled_columns },
        mapping: config.mapping.clone(),
        calibration: None,
        fingerprint: schema.fingerprint(),
    })
}

/// Rewrites categorical cells of `ds` to their frozen codes. Columns are
/// matched through the mapping first, then by name.
fn encode_dataset(
    p: &FrozenPipeline,
    ds: &Dataset,
    mapping: Option<&FeatureMapping>,
) -> Result<Vec<Vec<Cell>>, PreprocessError> {
    let schema = ds.schema();
    let resolved: Vec<String> = schema
        .columns
        .iter()
        .map(|c| {
            mapping
                .and_then(|m| {
                    m.map
                        .iter()
                        .find(|(k, _)| normalize_token(k) == normalize_token(&c.name))
                        .map(|(_, v)| v.clone())
                })
                .unwrap_or_else(|| c.name.clone())
        })
        .collect();

    let mut out = Vec::with_capacity(ds.n_rows());
    for row in ds.rows() {
        let mut encoded = Vec::with_capacity(row.len());
        for (j, cell) in row.iter().enumerate() {
            encoded.push(p.encoder.encode_cell(&resolved[j], cell)?);
        }
        out.push(encoded);
    }
    Ok(out)
}

fn columns_identical(ds: &Dataset, p: &FrozenPipeline) -> bool {
    let schema = ds.schema();
    let features = schema.feature_indices();
    if features.len() != p.scaler.columns.len() {
        return false;
    }
    features.iter().zip(&p.scaler.columns).all(|(&i, sc)| {
        normalize_token(&schema.columns[i].name) == normalize_token(&sc.name)
    })
}

/// Reshapes a dataset into the pipeline's model input schema: mapped
/// columns are renamed into model order, unmapped model inputs are filled
/// from the frozen imputer, surplus columns are dropped and listed.
/// Zero-as-missing columns are blanked here, before imputation.
pub fn harmonize(
    ds: &Dataset,
    mapping: Option<&FeatureMapping>,
    p: &FrozenPipeline,
) -> Result<Harmonized, PreprocessError> {
    let schema = ds.schema();
    let out_idx = schema.outcome_index();

    if let Some(m) = mapping {
        for (ext, model) in &m.map {
            if schema.column_index(ext).is_none() || schema.column_index(ext) == Some(out_idx) {
                return Err(PreprocessError::UnmappableColumn(ext.clone()));
            }
            let target = normalize_token(model);
            if !p.scaler.columns.iter().any(|c| normalize_token(&c.name) == target) {
                return Err(PreprocessError::UnmappableColumn(model.clone()));
            }
        }
    }

    // Source dataset column index for each model input, if any.
    let mut sources: Vec<Option<usize>> = Vec::with_capacity(p.scaler.columns.len());
    for sc in &p.scaler.columns {
        let want = normalize_token(&sc.name);
        let via_map = mapping.and_then(|m| {
            m.map
                .iter()
                .find(|(_, v)| normalize_token(v) == want)
                .and_then(|(k, _)| schema.column_index(k))
        });
        let direct = schema.column_index(&sc.name).filter(|&i| i != out_idx);
        let src = via_map.or(direct);
        if let Some(i) = src {
            let (got, expected) = (&schema.columns[i].unit, &sc.unit);
            if let (Some(g), Some(e)) = (got, expected) {
                if normalize_token(g) != normalize_token(e) {
                    return Err(PreprocessError::UnitMismatch {
                        column: sc.name.clone(),
                        expected: e.clone(),
                        got: g.clone(),
                    });
                }
            }
        }
        sources.push(src);
    }

    let used: BTreeSet<usize> = sources.iter().flatten().copied().collect();
    let dropped_columns: Vec<String> = schema
        .columns
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != out_idx && !used.contains(i))
        .map(|(_, c)| c.name.clone())
        .collect();
    let filled_columns: Vec<String> = sources
        .iter()
        .zip(&p.scaler.columns)
        .filter(|(s, _)| s.is_none())
        .map(|(_, c)| c.name.clone())
        .collect();

    let feature_idx = schema.feature_indices();
    let identity = columns_identical(ds, p)
        && sources.iter().enumerate().all(|(k, s)| *s == Some(feature_idx[k]))
        && p.imputer.zeros_as_missing.iter().all(|z| schema.column_index(z).is_none());
    if identity {
        return Ok(Harmonized { dataset: ds.clone(), dropped_columns, filled_columns });
    }

    let fills: Vec<Cell> = p
        .scaler
        .columns
        .iter()
        .map(|sc| Cell::Num(p.imputer.fill_value(&sc.name).unwrap_or(0.0)))
        .collect();

    let mut rows: Vec<Vec<Cell>> = Vec::with_capacity(ds.n_rows());
    for row in ds.rows() {
        let mut out = Vec::with_capacity(p.scaler.columns.len() + 1);
        for (k, src) in sources.iter().enumerate() {
            let cell = match src {
                Some(i) => {
                    let c = &row[*i];
                    if is_missing_token(&p.imputer, &schema.columns[*i].name, c) {
                        Cell::Missing
                    } else {
                        c.clone()
                    }
                }
                None => fills[k].clone(),
            };
            out.push(cell);
        }
        out.push(row[out_idx].clone());
        rows.push(out);
    }

    let mut columns: Vec<crate::tabular::Column> = p
        .scaler
        .columns
        .iter()
        .map(|sc| {
            let kind = match sc.kind {
                ValueKind::Continuous => ColumnKind::Continuous,
                ValueKind::Count => ColumnKind::Count,
                ValueKind::Binary => ColumnKind::Binary,
                ValueKind::Categorical => ColumnKind::Categorical {
                    levels: p
                        .encoder
                        .levels_of(&sc.name)
                        .cloned()
                        .unwrap_or_default(),
                },
            };
            crate::tabular::Column { name: sc.name.clone(), kind, unit: sc.unit.clone() }
        })
        .collect();
    columns.push(crate::tabular::Column::new(
        &schema.columns[out_idx].name,
        ColumnKind::Outcome,
    ));
    let out_schema = Schema { columns, positive_label: schema.positive_label, notes: Vec::new() };
    let dataset = Dataset::new(out_schema, rows, ds.provenance())
        .map_err(|e| PreprocessError::CorruptFile(format!("harmonized rows invalid: {e}")))?;

    Ok(Harmonized { dataset, dropped_columns, filled_columns })
}

/// Replaces missing cells with the frozen fill values. Idempotent.
pub(crate) fn impute_rows(p: &FrozenPipeline, rows: &mut [Vec<Cell>]) {
    for row in rows.iter_mut() {
        for (k, sc) in p.scaler.columns.iter().enumerate() {
            let missing = is_missing_token(&p.imputer, &sc.name, &row[k]);
            if missing {
                row[k] = Cell::Num(p.imputer.fill_value(&sc.name).unwrap_or(0.0));
            }
        }
    }
}

/// Runs the frozen chain encode → harmonize → impute → scale and returns
/// the scaled matrix, labels, and application metadata. Pure in
/// `(pipeline, dataset)`; the pipeline is never modified.
pub fn apply_pipeline(p: &FrozenPipeline, ds: &Dataset) -> Result<FeatureBlock, PreprocessError> {
    // The mapping is for cohorts that actually carry its external
    // columns; a dataset already in model schema bypasses it.
    let mapping = p.mapping.as_ref().filter(|_| !columns_identical(ds, p));
    let encoded_rows = encode_dataset(p, ds, mapping)?;
    let encoded = Dataset::new(ds.schema().clone(), encoded_rows, ds.provenance())
        .map_err(|e| PreprocessError::CorruptFile(format!("encoded rows invalid: {e}")))?;
    let harmonized = harmonize(&encoded, mapping, p)?;

    let model_ds = harmonized.dataset;
    let mut rows: Vec<Vec<Cell>> = model_ds.rows().to_vec();
    // Identity harmonization may keep zero-marked or missing cells; the
    // imputer resolves both.
    impute_rows(p, &mut rows);

    let d = p.scaler.columns.len();
    let n = rows.len();
    let mut features = Matrix::zeros(n, d);
    let mut oor = 0usize;
    for (i, row) in rows.iter().enumerate() {
        for k in 0..d {
            let v = match row[k] {
                Cell::Num(v) => v,
                _ => unreachable!("imputation fills every input cell"),
            };
            let s = p.scaler.scale(k, v);
            if !(0.0..=1.0).contains(&s) {
                oor += 1;
            }
            features.set(i, k, s);
        }
    }

    Ok(FeatureBlock {
        features,
        labels: model_ds.labels(),
        feature_names: p.feature_names(),
        oor_fraction: oor as f64 / (n * d) as f64,
        dropped_columns: harmonized.dropped_columns,
        filled_columns: harmonized.filled_columns,
    })
}

/// Writes bytes to a sibling temp file and renames it into place, so a
/// crash never leaves a half-written artifact.
pub(crate) fn atomic_write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = match (path.parent(), path.file_name()) {
        (Some(dir), Some(name)) => dir.join(format!(".{}.tmp", name.to_string_lossy())),
        _ => path.with_extension("tmp"),
    };
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}

pub fn save_pipeline(p: &FrozenPipeline, path: &Path) -> Result<(), PreprocessError> {
    let json = serde_json::to_string_pretty(p).expect("pipeline serializes");
    atomic_write(path, (json + "\n").as_bytes())?;
    Ok(())
}

pub fn load_pipeline(path: &Path) -> Result<FrozenPipeline, PreprocessError> {
    let text = std::fs::read_to_string(path)?;
    let p: FrozenPipeline =
        serde_json::from_str(&text).map_err(|e| PreprocessError::CorruptFile(e.to_string()))?;
    if p.version != PIPELINE_VERSION {
        return Err(PreprocessError::VersionMismatch {
            expected: PIPELINE_VERSION.to_string(),
            got: p.version,
        });
    }
    Ok(p)
}
