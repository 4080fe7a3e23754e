//! Ingestion of the steel-plant energy table: CSV parsing, null detection,
//! categorical encoding and seeded train/test splitting.

use std::collections::{BTreeSet, HashSet};
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Header names of the public steel-industry energy file.
pub mod columns {
    pub const DATE: &str = "date";
    pub const USAGE: &str = "Usage_kWh";
    pub const LAGGING_KVARH: &str = "Lagging_Current_Reactive.Power_kVarh";
    pub const LEADING_KVARH: &str = "Leading_Current_Reactive_Power_kVarh";
    pub const CO2: &str = "CO2(tCO2)";
    pub const LAGGING_PF: &str = "Lagging_Current_Power_Factor";
    pub const LEADING_PF: &str = "Leading_Current_Power_Factor";
    pub const NSM: &str = "NSM";
    pub const WEEK_STATUS: &str = "WeekStatus";
    pub const DAY_OF_WEEK: &str = "Day_of_week";
    pub const LOAD_TYPE: &str = "Load_Type";
}

/// One-hot column order for the day of week (alphabetical).
pub const DAY_COLUMNS: [&str; 7] = [
    "Friday",
    "Monday",
    "Saturday",
    "Sunday",
    "Thursday",
    "Tuesday",
    "Wednesday",
];

/// Load-type class names, indexed by label id.
pub const LOAD_TYPES: [&str; 3] = ["Light_Load", "Medium_Load", "Maximum_Load"];

/// Parsed but unencoded table. `None` cells matched a null marker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawTable {
    headers: Vec<String>,
    rows: Vec<Vec<Option<String>>>,
}

impl RawTable {
    pub fn new(headers: Vec<String>, rows: Vec<Vec<Option<String>>>) -> Result<Self> {
        let mut seen = HashSet::new();
        for h in &headers {
            if !seen.insert(h.as_str()) {
                return Err(Error::Schema(format!("duplicate header `{h}`")));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != headers.len() {
                return Err(Error::Parse {
                    row: i,
                    message: format!("expected {} cells, found {}", headers.len(), row.len()),
                });
            }
        }
        Ok(Self { headers, rows })
    }

    pub fn headers(&self) -> &[String] {
        &self.headers
    }

    pub fn rows(&self) -> &[Vec<Option<String>>] {
        &self.rows
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    /// Keeps only the listed rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        Self {
            headers: self.headers.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// Writes the table back out as CSV, with nulls as empty cells.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.as_deref().unwrap_or("")))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Encoding(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Encoding(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnRole {
    Target,
    Numeric,
    Categorical,
    Date,
    Label,
}

impl std::str::FromStr for ColumnRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "target" => Ok(ColumnRole::Target),
            "numeric" => Ok(ColumnRole::Numeric),
            "categorical" => Ok(ColumnRole::Categorical),
            "date" => Ok(ColumnRole::Date),
            "label" => Ok(ColumnRole::Label),
            other => Err(Error::Schema(format!("unknown column role `{other}`"))),
        }
    }
}

/// Column roles plus the strings that count as missing values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaConfig {
    columns: Vec<(String, ColumnRole)>,
    null_markers: Vec<String>,
}

impl Default for SchemaConfig {
    fn default() -> Self {
        use columns::*;
        let columns = [
            (DATE, ColumnRole::Date),
            (USAGE, ColumnRole::Target),
            (LAGGING_KVARH, ColumnRole::Numeric),
            (LEADING_KVARH, ColumnRole::Numeric),
            (CO2, ColumnRole::Numeric),
            (LAGGING_PF, ColumnRole::Numeric),
            (LEADING_PF, ColumnRole::Numeric),
            (NSM, ColumnRole::Numeric),
            (WEEK_STATUS, ColumnRole::Categorical),
            (DAY_OF_WEEK, ColumnRole::Categorical),
            (LOAD_TYPE, ColumnRole::Label),
        ]
        .into_iter()
        .map(|(n, r)| (n.to_string(), r))
        .collect();
        Self::new(columns, Self::default_null_markers()).expect("default schema is valid")
    }
}

impl SchemaConfig {
    pub fn new(columns: Vec<(String, ColumnRole)>, null_markers: Vec<String>) -> Result<Self> {
        let count = |role| columns.iter().filter(|(_, r)| *r == role).count();
        if count(ColumnRole::Target) != 1 {
            return Err(Error::Schema(
                "schema must declare exactly one target column".into(),
            ));
        }
        if count(ColumnRole::Label) != 1 {
            return Err(Error::Schema(
                "schema must declare exactly one label column".into(),
            ));
        }
        let mut seen = HashSet::new();
        for (name, _) in &columns {
            if !seen.insert(name.as_str()) {
                return Err(Error::Schema(format!("column `{name}` mapped twice")));
            }
        }
        Ok(Self {
            columns,
            null_markers,
        })
    }

    pub fn default_null_markers() -> Vec<String> {
        vec![String::new(), "?".to_string()]
    }

    /// Parses `column = role` lines. The reserved key `null_markers` takes a
    /// comma-separated list (an empty entry stands for the empty cell).
    /// Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut columns = Vec::new();
        let mut null_markers = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Schema(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            if key == "null_markers" {
                null_markers = Some(value.split(',').map(|m| m.trim().to_string()).collect());
            } else {
                columns.push((key.to_string(), value.parse()?));
            }
        }
        Self::new(
            columns,
            null_markers.unwrap_or_else(Self::default_null_markers),
        )
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn columns(&self) -> &[(String, ColumnRole)] {
        &self.columns
    }

    pub fn null_markers(&self) -> &[String] {
        &self.null_markers
    }

    pub fn role_of(&self, column: &str) -> Option<ColumnRole> {
        self.columns
            .iter()
            .find(|(n, _)| n == column)
            .map(|(_, r)| *r)
    }

    pub fn target(&self) -> &str {
        self.column_with(ColumnRole::Target)
    }

    pub fn label(&self) -> &str {
        self.column_with(ColumnRole::Label)
    }

    fn column_with(&self, role: ColumnRole) -> &str {
        self.columns
            .iter()
            .find(|(_, r)| *r == role)
            .map(|(n, _)| n.as_str())
            .expect("role presence checked at construction")
    }

    fn is_null(&self, cell: &str) -> bool {
        self.null_markers.iter().any(|m| m == cell)
    }
}

/// Reads delimiter-separated text with a header row. Every column named in
/// the schema must be present; other columns are carried along untouched.
pub fn parse_csv<R: Read>(reader: R, schema: &SchemaConfig) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let missing: Vec<&str> = schema
        .columns()
        .iter()
        .map(|(n, _)| n.as_str())
        .filter(|n| !headers.iter().any(|h| h == n))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Schema(format!(
            "missing required column(s): {}",
            missing.join(", ")
        )));
    }
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            row: i,
            message: e.to_string(),
        })?;
        if record.len() != headers.len() {
            return Err(Error::Parse {
                row: i,
                message: format!("expected {} cells, found {}", headers.len(), record.len()),
            });
        }
        rows.push(
            record
                .iter()
                .map(|c| (!schema.is_null(c)).then(|| c.to_string()))
                .collect(),
        );
    }
    RawTable::new(headers, rows)
}

pub fn read_csv_file(path: &Path, schema: &SchemaConfig) -> Result<RawTable> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_csv(std::io::BufReader::new(file), schema)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnNulls {
    pub column: String,
    pub nulls: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NullReport {
    pub total_rows: usize,
    pub columns: Vec<ColumnNulls>,
}

impl NullReport {
    pub fn total_nulls(&self) -> usize {
        self.columns.iter().map(|c| c.nulls).sum()
    }

    pub fn count(&self, column: &str) -> Option<usize> {
        self.columns
            .iter()
            .find(|c| c.column == column)
            .map(|c| c.nulls)
    }
}

pub fn detect_nulls(table: &RawTable) -> NullReport {
    let mut counts = vec![0usize; table.headers.len()];
    for row in &table.rows {
        for (count, cell) in counts.iter_mut().zip(row) {
            if cell.is_none() {
                *count += 1;
            }
        }
    }
    NullReport {
        total_rows: table.nrows(),
        columns: table
            .headers
            .iter()
            .zip(counts)
            .map(|(column, nulls)| ColumnNulls {
                column: column.clone(),
                nulls,
            })
            .collect(),
    }
}

/// Rows (0-based) holding a null in any column the schema uses.
pub fn null_rows(table: &RawTable, schema: &SchemaConfig) -> Vec<usize> {
    let used: Vec<usize> = schema
        .columns()
        .iter()
        .filter_map(|(n, _)| table.column_index(n))
        .collect();
    table
        .rows
        .iter()
        .enumerate()
        .filter(|(_, row)| used.iter().any(|&j| row[j].is_none()))
        .map(|(i, _)| i)
        .collect()
}

/// Removes rows with nulls in schema columns; returns the table and the
/// number of rows dropped.
pub fn drop_null_rows(table: &RawTable, schema: &SchemaConfig) -> (RawTable, usize) {
    let bad: BTreeSet<usize> = null_rows(table, schema).into_iter().collect();
    let keep: Vec<usize> = (0..table.nrows()).filter(|i| !bad.contains(i)).collect();
    (table.select_rows(&keep), bad.len())
}

/// Encoded design matrix, regression target and load-type labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    x: Matrix,
    y: Vec<f64>,
    labels: Vec<u32>,
    feature_names: Vec<String>,
    /// Column of `x` that duplicates the label, if present.
    label_feature: Option<usize>,
    /// Row of the source table each sample came from.
    row_ids: Vec<usize>,
}

impl Dataset {
    pub fn new(
        x: Matrix,
        y: Vec<f64>,
        labels: Vec<u32>,
        feature_names: Vec<String>,
        label_feature: Option<usize>,
    ) -> Result<Self> {
        let n = x.nrows();
        if n == 0 {
            return Err(Error::Empty("dataset has no rows"));
        }
        if x.ncols() == 0 {
            return Err(Error::Empty("dataset has no features"));
        }
        for len in [y.len(), labels.len()] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: len,
                });
            }
        }
        if feature_names.len() != x.ncols() {
            return Err(Error::DimensionMismatch {
                expected: x.ncols(),
                actual: feature_names.len(),
            });
        }
        let mut seen = HashSet::new();
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::Encoding(format!("duplicate feature name `{name}`")));
            }
        }
        if !x.is_finite() || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Encoding("non-finite value in dataset".into()));
        }
        if let Some(bad) = labels.iter().find(|&&l| l as usize >= LOAD_TYPES.len()) {
            return Err(Error::Encoding(format!("label id {bad} out of range")));
        }
        if label_feature.is_some_and(|j| j >= x.ncols()) {
            return Err(Error::InvalidArgument(
                "label feature index out of range".into(),
            ));
        }
        Ok(Self {
            x,
            y,
            labels,
            feature_names,
            label_feature,
            row_ids: (0..n).collect(),
        })
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn label_feature(&self) -> Option<usize> {
        self.label_feature
    }

    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    pub fn nrows(&self) -> usize {
        self.x.nrows()
    }

    pub fn nfeatures(&self) -> usize {
        self.x.ncols()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    /// Rows at `indices`, in that order. Source row ids are preserved.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            x: self.x.select_rows(indices),
            y: indices.iter().map(|&i| self.y[i]).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
            label_feature: self.label_feature,
            row_ids: indices.iter().map(|&i| self.row_ids[i]).collect(),
        }
    }

    /// Same rows with `x` replaced (e.g. after standardization).
    pub fn with_x(&self, x: Matrix) -> Result<Self> {
        if x.nrows() != self.nrows() || x.ncols() != self.nfeatures() {
            return Err(Error::DimensionMismatch {
                expected: self.nfeatures(),
                actual: x.ncols(),
            });
        }
        Ok(Self { x, ..self.clone() })
    }

    /// Design matrix for classifying the label: the label's own feature
    /// column is removed.
    pub fn knn_features(&self) -> (Matrix, Vec<String>) {
        match self.label_feature {
            Some(j) => {
                let mut names = self.feature_names.clone();
                names.remove(j);
                (self.x.drop_column(j), names)
            }
            None => (self.x.clone(), self.feature_names.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum CategoricalKind {
    WeekStatus,
    DayOfWeek,
}

fn normalize(value: &str) -> String {
    value
        .chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .collect::<String>()
        .to_ascii_lowercase()
}

fn week_status_code(value: &str) -> Option<f64> {
    match normalize(value).as_str() {
        "weekday" => Some(0.0),
        "weekend" => Some(1.0),
        _ => None,
    }
}

fn day_slot(value: &str) -> Option<usize> {
    let v = normalize(value);
    DAY_COLUMNS.iter().position(|d| d.to_ascii_lowercase() == v)
}

/// Ordinal load-type id: Light = 0, Medium = 1, Maximum = 2.
pub fn load_type_id(value: &str) -> Option<u32> {
    let v = normalize(value);
    let v = v.strip_suffix("load").unwrap_or(&v);
    match v {
        "light" => Some(0),
        "medium" => Some(1),
        "maximum" => Some(2),
        _ => None,
    }
}

const DATE_FORMATS: [&str; 5] = [
    "%d/%m/%Y %H:%M",
    "%d/%m/%Y %H:%M:%S",
    "%d-%m-%Y %H:%M",
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%d %H:%M",
];

fn valid_date(value: &str) -> bool {
    DATE_FORMATS
        .iter()
        .any(|f| chrono::NaiveDateTime::parse_from_str(value, f).is_ok())
        || chrono::NaiveDate::parse_from_str(value, "%Y-%m-%d").is_ok()
        || chrono::NaiveDate::parse_from_str(value, "%d/%m/%Y").is_ok()
}

enum Encoder {
    Numeric,
    Binary,
    Label,
    OneHot,
}

/// Encodes the table into a numeric dataset.
///
/// Numeric columns pass through; week status becomes 0/1
/// (Weekday/Weekend); the day of week expands into seven one-hot columns
/// appended after all other features; the load type becomes an ordinal
/// feature and the label vector. The date column is validated and dropped.
pub fn encode_features(table: &RawTable, schema: &SchemaConfig) -> Result<Dataset> {
    let nulls = null_rows(table, schema);
    if !nulls.is_empty() {
        return Err(Error::NullsPresent { rows: nulls });
    }
    if table.nrows() == 0 {
        return Err(Error::Empty("table has no data rows"));
    }
    let col = |name: &str| {
        table
            .column_index(name)
            .ok_or_else(|| Error::Schema(format!("missing required column: {name}")))
    };
    let target_col = col(schema.target())?;
    let label_col = col(schema.label())?;

    let mut encoders: Vec<(usize, Encoder)> = Vec::new();
    let mut feature_names = Vec::new();
    let mut onehot_cols = Vec::new();
    let mut date_cols = Vec::new();
    let mut label_feature = None;
    for (j, header) in table.headers().iter().enumerate() {
        let Some(role) = schema.role_of(header) else {
            continue;
        };
        match role {
            ColumnRole::Target => {}
            ColumnRole::Date => date_cols.push(j),
            ColumnRole::Numeric => {
                encoders.push((j, Encoder::Numeric));
                feature_names.push(header.clone());
            }
            ColumnRole::Label => {
                label_feature = Some(feature_names.len());
                encoders.push((j, Encoder::Label));
                feature_names.push(header.clone());
            }
            ColumnRole::Categorical => {
                let first = table.rows()[0][j].as_deref().unwrap_or_default();
                match categorical_kind(first) {
                    Some(CategoricalKind::WeekStatus) => {
                        encoders.push((j, Encoder::Binary));
                        feature_names.push(header.clone());
                    }
                    Some(CategoricalKind::DayOfWeek) => onehot_cols.push(j),
                    None => {
                        return Err(Error::UnseenCategory {
                            column: header.clone(),
                            value: first.to_string(),
                        })
                    }
                }
            }
        }
    }
    for _ in &onehot_cols {
        feature_names.extend(DAY_COLUMNS.iter().map(|d| d.to_string()));
    }
    for &j in &onehot_cols {
        encoders.push((j, Encoder::OneHot));
    }

    let p = feature_names.len();
    let n = table.nrows();
    let mut data = Vec::with_capacity(n * p);
    let mut y = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for (i, row) in table.rows().iter().enumerate() {
        let cell = |j: usize| row[j].as_deref().expect("nulls rejected above");
        for &j in &date_cols {
            if !valid_date(cell(j)) {
                return Err(Error::Parse {
                    row: i,
                    message: format!(
                        "column `{}`: unparseable date `{}`",
                        table.headers()[j],
                        cell(j)
                    ),
                });
            }
        }
        y.push(parse_number(
            cell(target_col),
            i,
            &table.headers()[target_col],
        )?);
        let label = label_id(cell(label_col), &table.headers()[label_col])?;
        labels.push(label);
        for (j, enc) in &encoders {
            let value = cell(*j);
            let header = &table.headers()[*j];
            match enc {
                Encoder::Numeric => data.push(parse_number(value, i, header)?),
                Encoder::Label => data.push(label_id(value, header)? as f64),
                Encoder::Binary => {
                    data.push(
                        week_status_code(value).ok_or_else(|| Error::UnseenCategory {
                            column: header.clone(),
                            value: value.to_string(),
                        })?,
                    )
                }
                Encoder::OneHot => {
                    let slot = day_slot(value).ok_or_else(|| Error::UnseenCategory {
                        column: header.clone(),
                        value: value.to_string(),
                    })?;
                    data.extend((0..DAY_COLUMNS.len()).map(|k| if k == slot { 1.0 } else { 0.0 }));
                }
            }
        }
    }
    let x = Matrix::from_row_major(n, p, data)?;
    Dataset::new(x, y, labels, feature_names, label_feature)
}

fn categorical_kind(value: &str) -> Option<CategoricalKind> {
    if week_status_code(value).is_some() {
        Some(CategoricalKind::WeekStatus)
    } else if day_slot(value).is_some() {
        Some(CategoricalKind::DayOfWeek)
    } else {
        None
    }
}

fn label_id(value: &str, column: &str) -> Result<u32> {
    load_type_id(value).ok_or_else(|| Error::UnseenCategory {
        column: column.to_string(),
        value: value.to_string(),
    })
}

fn parse_number(value: &str, row: usize, column: &str) -> Result<f64> {
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            row,
            message: format!("column `{column}`: `{value}` is not a finite number"),
        }),
    }
}

/// Row indices of a seeded shuffle split: `(train, test)`.
///
/// The test part takes the first `round(n · test_fraction)` positions of a
/// ChaCha8 shuffle of `0..n`; the train part takes the rest.
pub fn split_indices(n: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test fraction {test_fraction} is outside (0, 1)"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "cannot split {n} row(s) into two non-empty parts"
        )));
    }
    let n_test = (n as f64 * test_fraction).round() as usize;
    if n_test == 0 || n_test == n {
        return Err(Error::InvalidArgument(format!(
            "test fraction {test_fraction} leaves an empty part for {n} rows"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let train = order.split_off(n_test);
    Ok((train, order))
}

pub fn split(data: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(data.nrows(), test_fraction, seed)?;
    Ok((data.subset(&train), data.subset(&test)))
}
