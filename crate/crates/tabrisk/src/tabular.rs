//! Dataset representation: typed schemas, CSV ingestion, seeded
//! stratified splitting, and class-distribution accounting.
//!
//! CSV dialect: comma-delimited, first row header, UTF-8, `.` decimal
//! point. Empty cells and `NA` are missing at ingestion; domain-specific
//! zeros stay untouched here and are a pipeline policy (see
//! [`crate::preprocess`]).

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::math::seeded_stream;

#[derive(Debug, Error)]
pub enum TabularError {
    #[error("column `{0}` required by the schema is missing from the file")]
    MissingColumn(String),
    #[error("outcome is not a 0/1 value at data row {row}")]
    OutcomeNotBinary { row: usize },
    #[error("file contains a header but no data rows")]
    EmptyFile,
    #[error("class {label} has no rows; stratified split impossible")]
    ClassAbsent { label: u8 },
    #[error("train fraction must be in (0, 1), got {0}")]
    InvalidFraction(f64),
    #[error("invalid schema: {0}")]
    SchemaInvalid(String),
    #[error("dataset must contain at least one row")]
    EmptyDataset,
    #[error("row {row} has {got} cells, schema expects {expected}")]
    RowWidth { row: usize, got: usize, expected: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Trims and lowercases a token for case-insensitive matching of headers,
/// categorical levels, and units.
pub fn normalize_token(s: &str) -> String {
    s.trim().to_lowercase()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum ColumnKind {
    /// Real-valued measurement.
    Continuous,
    /// Non-negative integer count or integer-valued measurement.
    Count,
    /// 0/1 flag.
    Binary,
    /// Token column with a fixed token → code assignment.
    Categorical { levels: BTreeMap<String, u32> },
    /// The 0/1 label column.
    Outcome,
}

impl ColumnKind {
    pub fn is_categorical(&self) -> bool {
        matches!(self, ColumnKind::Categorical { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

impl Column {
    pub fn new(name: &str, kind: ColumnKind) -> Self {
        Column { name: name.to_string(), kind, unit: None }
    }

    pub fn with_unit(mut self, unit: &str) -> Self {
        self.unit = Some(unit.to_string());
        self
    }
}

/// Ordered column declaration for one dataset, with exactly one outcome
/// column and injective categorical level maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<Column>,
    /// Outcome code treated as the positive class.
    #[serde(default = "default_positive_label")]
    pub positive_label: u8,
    /// Free-form caveats carried with the schema (unit discrepancies etc.).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

fn default_positive_label() -> u8 {
    1
}

impl Schema {
    pub fn new(columns: Vec<Column>) -> Result<Self, TabularError> {
        let s = Schema { columns, positive_label: 1, notes: Vec::new() };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), TabularError> {
        let mut seen = BTreeSet::new();
        for c in &self.columns {
            if !seen.insert(normalize_token(&c.name)) {
                return Err(TabularError::SchemaInvalid(format!("duplicate column `{}`", c.name)));
            }
            if let ColumnKind::Categorical { levels } = &c.kind {
                if levels.is_empty() {
                    return Err(TabularError::SchemaInvalid(format!(
                        "categorical column `{}` has no levels",
                        c.name
                    )));
                }
                let codes: BTreeSet<u32> = levels.values().copied().collect();
                if codes.len() != levels.len() {
                    return Err(TabularError::SchemaInvalid(format!(
                        "level map of `{}` assigns one code to several tokens",
                        c.name
                    )));
                }
                let normed: BTreeSet<String> = levels.keys().map(|k| normalize_token(k)).collect();
                if normed.len() != levels.len() {
                    return Err(TabularError::SchemaInvalid(format!(
                        "level map of `{}` has tokens that collide case-insensitively",
                        c.name
                    )));
                }
            }
        }
        let outcomes = self.columns.iter().filter(|c| c.kind == ColumnKind::Outcome).count();
        if outcomes != 1 {
            return Err(TabularError::SchemaInvalid(format!(
                "schema must declare exactly one outcome column, found {outcomes}"
            )));
        }
        Ok(())
    }

    pub fn outcome_index(&self) -> usize {
        self.columns
            .iter()
            .position(|c| c.kind == ColumnKind::Outcome)
            .expect("validated schema has an outcome column")
    }

    /// Indices of all non-outcome columns, in schema order.
    pub fn feature_indices(&self) -> Vec<usize> {
        let out = self.outcome_index();
        (0..self.columns.len()).filter(|&i| i != out).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        let want = normalize_token(name);
        self.columns.iter().position(|c| normalize_token(&c.name) == want)
    }

    /// Hex SHA-256 of the canonical JSON form; identifies the schema a
    /// frozen pipeline was fit against.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(self).expect("schema serializes");
        let digest = Sha256::digest(&json);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn load(path: &Path) -> Result<Self, TabularError> {
        let text = std::fs::read_to_string(path)?;
        let schema: Schema = serde_json::from_str(&text)
            .map_err(|e| TabularError::SchemaInvalid(format!("{}: {e}", path.display())))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn save(&self, path: &Path) -> Result<(), TabularError> {
        let json = serde_json::to_string_pretty(self).expect("schema serializes");
        std::fs::write(path, json + "\n")?;
        Ok(())
    }

    /// Schema of the primary cohort file: eight risk variables plus a 0/1
    /// diabetes label.
    ///
    /// Age is recorded in years as distributed; an upstream data
    /// description lists days, which is flagged in `notes` and not
    /// converted. The smoking column enumerates six codes although the
    /// same description counts five levels; the six-code map is used.
    pub fn primary_diabetes() -> Self {
        let gender: BTreeMap<String, u32> =
            [("female", 0u32), ("male", 1), ("other", 2)].iter().map(|(k, v)| (k.to_string(), *v)).collect();
        let smoking: BTreeMap<String, u32> = [
            ("no info", 0u32),
            ("current", 1),
            ("ever", 2),
            ("former", 3),
            ("never", 4),
            ("not current", 5),
        ]
        .iter()
        .map(|(k, v)| (k.to_string(), *v))
        .collect();
        Schema {
            columns: vec![
                Column::new("gender", ColumnKind::Categorical { levels: gender }),
                Column::new("age", ColumnKind::Continuous).with_unit("years"),
                Column::new("hypertension", ColumnKind::Binary),
                Column::new("heart_disease", ColumnKind::Binary),
                Column::new("smoking_history", ColumnKind::Categorical { levels: smoking }),
                Column::new("bmi", ColumnKind::Continuous).with_unit("kg/m^2"),
                Column::new("HbA1c_level", ColumnKind::Continuous).with_unit("%"),
                Column::new("blood_glucose_level", ColumnKind::Count).with_unit("mg/dL"),
                Column::new("diabetes", ColumnKind::Outcome),
            ],
            positive_label: 1,
            notes: vec![
                "age: distributed in years; an upstream description lists days; recorded, not converted".into(),
                "smoking_history: six enumerated codes; the upstream description counts five levels".into(),
            ],
        }
    }

    /// Schema of the external validation cohort file: eight predictors and
    /// a 0/1 outcome.
    pub fn pima() -> Self {
        Schema {
            columns: vec![
                Column::new("Pregnancies", ColumnKind::Count),
                Column::new("Glucose", ColumnKind::Count).with_unit("mg/dL"),
                Column::new("BloodPressure", ColumnKind::Count).with_unit("mmHg"),
                Column::new("SkinThickness", ColumnKind::Count).with_unit("mm"),
                Column::new("Insulin", ColumnKind::Count).with_unit("muU/mL"),
                Column::new("BMI", ColumnKind::Continuous).with_unit("kg/m^2"),
                Column::new("DiabetesPedigreeFunction", ColumnKind::Continuous),
                Column::new("Age", ColumnKind::Count).with_unit("years"),
                Column::new("Outcome", ColumnKind::Outcome),
            ],
            positive_label: 1,
            notes: Vec::new(),
        }
    }
}

/// One raw cell: a parsed number, an unresolved categorical token, or a
/// missing value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Cell {
    Num(f64),
    Token(String),
    Missing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Primary,
    External,
}

/// Which part of the experiment a dataset belongs to. Fit and resampling
/// operations only accept `Train`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Full,
    Train,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: Source,
    pub role: Role,
}

impl Provenance {
    pub fn new(source: Source, role: Role) -> Self {
        Provenance { source, role }
    }
}

/// Immutable labeled cohort: a schema plus one row of cells per record.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Schema,
    rows: Vec<Vec<Cell>>,
    provenance: Provenance,
}

impl Dataset {
    pub fn new(
        schema: Schema,
        rows: Vec<Vec<Cell>>,
        provenance: Provenance,
    ) -> Result<Self, TabularError> {
        schema.validate()?;
        if rows.is_empty() {
            return Err(TabularError::EmptyDataset);
        }
        let width = schema.columns.len();
        let out = schema.outcome_index();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(TabularError::RowWidth { row: i, got: row.len(), expected: width });
            }
            match row[out] {
                Cell::Num(v) if v == 0.0 || v == 1.0 => {}
                _ => return Err(TabularError::OutcomeNotBinary { row: i }),
            }
        }
        Ok(Dataset { schema, rows, provenance })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Same data under a different provenance tag.
    pub fn with_provenance(&self, provenance: Provenance) -> Self {
        Dataset { schema: self.schema.clone(), rows: self.rows.clone(), provenance }
    }

    pub fn labels(&self) -> Vec<u8> {
        let out = self.schema.outcome_index();
        self.rows
            .iter()
            .map(|r| match r[out] {
                Cell::Num(v) => v as u8,
                _ => unreachable!("outcome validated at construction"),
            })
            .collect()
    }

    /// Dataset restricted to the given row indices, preserving their order.
    pub fn select(&self, idx: &[usize], role: Role) -> Self {
        Dataset {
            schema: self.schema.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            provenance: Provenance { source: self.provenance.source, role },
        }
    }
}

fn parse_numeric_cell(raw: &str) -> Cell {
    let t = raw.trim();
    if t.is_empty() || t.eq_ignore_ascii_case("na") {
        return Cell::Missing;
    }
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Cell::Num(v),
        _ => Cell::Missing,
    }
}

/// Loads a comma-separated file against a schema. Header names are matched
/// case-insensitively after trimming; file columns not named by the schema
/// are ignored. Unparseable numeric cells become missing values; a
/// non-0/1 outcome is an error.
pub fn load_csv(path: &Path, schema: &Schema, source: Source) -> Result<Dataset, TabularError> {
    schema.validate()?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_path(path)?;
    let headers = reader.headers()?.clone();
    let lookup: BTreeMap<String, usize> = headers
        .iter()
        .enumerate()
        .map(|(i, h)| (normalize_token(h), i))
        .collect();

    let mut col_src = Vec::with_capacity(schema.columns.len());
    for c in &schema.columns {
        match lookup.get(&normalize_token(&c.name)) {
            Some(&i) => col_src.push(i),
            None => return Err(TabularError::MissingColumn(c.name.clone())),
        }
    }

    let mut rows: Vec<Vec<Cell>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row_idx = rows.len();
        let mut row = Vec::with_capacity(schema.columns.len());
        for (c, &src) in schema.columns.iter().zip(&col_src) {
            let raw = record.get(src).unwrap_or("");
            let cell = match &c.kind {
                ColumnKind::Categorical { .. } => {
                    let t = raw.trim();
                    if t.is_empty() || t.eq_ignore_ascii_case("na") {
                        Cell::Missing
                    } else {
                        Cell::Token(t.to_string())
                    }
                }
                ColumnKind::Outcome => match parse_numeric_cell(raw) {
                    Cell::Num(v) if v == 0.0 || v == 1.0 => Cell::Num(v),
                    _ => return Err(TabularError::OutcomeNotBinary { row: row_idx }),
                },
                _ => parse_numeric_cell(raw),
            };
            row.push(cell);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(TabularError::EmptyFile);
    }
    Dataset::new(schema.clone(), rows, Provenance::new(source, Role::Full))
}

/// Writes a dataset back to CSV in schema column order. Missing cells are
/// written as empty strings, so `load_csv ∘ save_csv` is the identity on
/// well-formed datasets.
pub fn save_csv(ds: &Dataset, path: &Path) -> Result<(), TabularError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(ds.schema.columns.iter().map(|c| c.name.as_str()))?;
    for row in &ds.rows {
        let fields: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Num(v) => format!("{v}"),
                Cell::Token(t) => t.clone(),
                Cell::Missing => String::new(),
            })
            .collect();
        writer.write_record(&fields)?;
    }
    writer.flush()?;
    Ok(())
}

/// `(count_negative, count_positive, prevalence)` of a cohort.
pub fn class_distribution(ds: &Dataset) -> (usize, usize, f64) {
    let labels = ds.labels();
    let pos = labels.iter().filter(|&&y| y == 1).count();
    let neg = labels.len() - pos;
    (neg, pos, pos as f64 / labels.len() as f64)
}

/// A deterministic train/test partition with its reproduction record.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub train: Dataset,
    pub test: Dataset,
    pub seed: u64,
    pub fraction: f64,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Serializable record of a split, sufficient to reproduce it exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub seed: u64,
    pub fraction: f64,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

impl SplitPair {
    pub fn indices(&self) -> SplitIndices {
        SplitIndices {
            seed: self.seed,
            fraction: self.fraction,
            train_indices: self.train_indices.clone(),
            test_indices: self.test_indices.clone(),
        }
    }
}

/// Splits per-class targets so the train part totals `round(fraction * N)`
/// and per-class counts deviate from exact proportionality by at most one
/// row (largest-remainder rounding, ties to the lower class code).
fn per_class_train_counts(counts: &[usize], fraction: f64) -> Vec<usize> {
    let total: usize = counts.iter().sum();
    let target = (fraction * total as f64).round() as usize;
    let mut take: Vec<usize> = counts.iter().map(|&c| (fraction * c as f64).floor() as usize).collect();
    let mut leftover = target.saturating_sub(take.iter().sum::<usize>());
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = fraction * counts[a] as f64 - (fraction * counts[a] as f64).floor();
        let rb = fraction * counts[b] as f64 - (fraction * counts[b] as f64).floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for &c in &order {
        if leftover == 0 {
            break;
        }
        if take[c] < counts[c] {
            take[c] += 1;
            leftover -= 1;
        }
    }
    take
}

/// Seeded train/test split. With `stratified` set, outcome proportions are
/// preserved in both parts within one row per class. Row order inside each
/// part follows the original file order.
pub fn split_train_test(
    ds: &Dataset,
    fraction: f64,
    seed: u64,
    stratified: bool,
) -> Result<SplitPair, TabularError> {
    use rand::seq::SliceRandom;

    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(TabularError::InvalidFraction(fraction));
    }
    let labels = ds.labels();
    let mut train_indices: Vec<usize>;

    if stratified {
        let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        for (i, &y) in labels.iter().enumerate() {
            by_class[y as usize].push(i);
        }
        for (label, members) in by_class.iter().enumerate() {
            if members.is_empty() {
                return Err(TabularError::ClassAbsent { label: label as u8 });
            }
        }
        let counts = [by_class[0].len(), by_class[1].len()];
        let take = per_class_train_counts(&counts, fraction);
        train_indices = Vec::new();
        for (class, members) in by_class.iter().enumerate() {
            let mut shuffled = members.clone();
            shuffled.shuffle(&mut seeded_stream(seed, class as u64));
            train_indices.extend_from_slice(&shuffled[..take[class]]);
        }
    } else {
        let mut all: Vec<usize> = (0..ds.n_rows()).collect();
        all.shuffle(&mut seeded_stream(seed, 0));
        let target = (fraction * ds.n_rows() as f64).round() as usize;
        train_indices = all[..target].to_vec();
    }

    train_indices.sort_unstable();
    let in_train: BTreeSet<usize> = train_indices.iter().copied().collect();
    let test_indices: Vec<usize> = (0..ds.n_rows()).filter(|i| !in_train.contains(i)).collect();

    Ok(SplitPair {
        train: ds.select(&train_indices, Role::Train),
        test: ds.select(&test_indices, Role::Test),
        seed,
        fraction,
        train_indices,
        test_indices,
    })
}
