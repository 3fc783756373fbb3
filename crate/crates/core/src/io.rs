//! CSV ingestion and report output.
//!
//! Exposure files have the header `user_id,item_id,label`, prediction files
//! `user_id,item_id,score`. Ids in files are arbitrary strings; they are
//! remapped to dense 1-based ids through an [`IdSpace`], which can be written
//! next to any output so results stay joinable with the source data.
//!
//! Reports are written as pretty JSON or as flat CSV. CSV files start with
//! their header row and end with `#` comment lines carrying provenance.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::domain::{
    validate_dataset, Catalog, ExposureKind, ExposureRecord, ItemId, LabeledExposure, PredictionTable, UserId,
};
use crate::error::{Error, Result};
use crate::experiments::{CorrelationCurve, CrossCorrelation, SweepCurve};
use crate::metrics::EvalReport;

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXPOSURE_HEADER: [&str; 3] = ["user_id", "item_id", "label"];
pub const PREDICTION_HEADER: [&str; 3] = ["user_id", "item_id", "score"];

/// Bijection between external id strings and dense ids `1..=len`.
///
/// Dense ids follow a numeric-aware order: ids that parse as integers come
/// first in numeric order, the rest follow lexicographically. A file whose ids
/// are already `1..=n` therefore maps onto itself.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IdMap {
    external: Vec<String>,
    dense: HashMap<String, u32>,
}

fn id_order(a: &str, b: &str) -> Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

impl IdMap {
    pub fn from_external<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut external: Vec<String> = ids.into_iter().map(Into::into).collect();
        external.sort_by(|a, b| id_order(a, b));
        external.dedup();
        let dense = external.iter().enumerate().map(|(i, s)| (s.clone(), i as u32 + 1)).collect();
        Self { external, dense }
    }

    /// The map `"1" -> 1, ..., "n" -> n`.
    pub fn identity(n: usize) -> Self {
        Self::from_external((1..=n).map(|i| i.to_string()))
    }

    pub fn len(&self) -> usize {
        self.external.len()
    }

    pub fn is_empty(&self) -> bool {
        self.external.is_empty()
    }

    pub fn dense(&self, external: &str) -> Option<u32> {
        self.dense.get(external).copied()
    }

    pub fn external(&self, dense: u32) -> Option<&str> {
        self.external.get((dense as usize).checked_sub(1)?).map(String::as_str)
    }

    /// `(dense, external)` pairs in dense order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, &str)> {
        self.external.iter().enumerate().map(|(i, s)| (i as u32 + 1, s.as_str()))
    }
}

/// User and item id maps of one dataset.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IdSpace {
    pub users: IdMap,
    pub items: IdMap,
}

impl IdSpace {
    pub fn identity(user_count: usize, item_count: usize) -> Self {
        Self { users: IdMap::identity(user_count), items: IdMap::identity(item_count) }
    }

    pub fn catalog(&self) -> Result<Catalog> {
        Catalog::new(self.items.len())
    }

    fn user_label(&self, user: UserId) -> String {
        self.users.external(user.0).map_or_else(|| user.to_string(), str::to_owned)
    }

    fn item_label(&self, item: ItemId) -> String {
        self.items.external(item.0).map_or_else(|| item.to_string(), str::to_owned)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExposureData {
    pub ids: IdSpace,
    pub catalog: Catalog,
    /// One entry per user, in dense user order.
    pub exposures: Vec<LabeledExposure>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredictionData {
    pub ids: IdSpace,
    pub catalog: Catalog,
    /// One table per user, in dense user order.
    pub tables: Vec<PredictionTable>,
}

struct Row {
    line: u64,
    user: String,
    item: String,
    value: String,
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    match err.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        kind => Error::Parse { path: path.to_path_buf(), line, message: csv_kind_message(kind) },
    }
}

fn csv_kind_message(kind: csv::ErrorKind) -> String {
    match kind {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            format!("expected {expected_len} fields, found {len}")
        }
        csv::ErrorKind::Utf8 { err, .. } => format!("invalid UTF-8: {err}"),
        other => format!("{other:?}"),
    }
}

fn read_rows(path: &Path, header: [&str; 3]) -> Result<Vec<Row>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file);
    let found = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected header `{}`, found `{}`", header.join(","), found.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or_default().to_owned();
        let row = Row { line, user: field(0), item: field(1), value: field(2) };
        if row.user.is_empty() || row.item.is_empty() {
            return Err(Error::Parse { path: path.to_path_buf(), line, message: "empty user_id or item_id".into() });
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse { path: path.to_path_buf(), line: 1, message: "no data rows".into() });
    }
    Ok(rows)
}

/// Builds the id space from the rows, or checks the rows' users against `given`.
fn resolve_ids(path: &Path, rows: &[Row], given: Option<&IdSpace>) -> Result<IdSpace> {
    match given {
        Some(ids) => {
            if let Some(row) = rows.iter().find(|r| ids.users.dense(&r.user).is_none()) {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: row.line,
                    message: format!("user {} is not in the id map", row.user),
                });
            }
            Ok(ids.clone())
        }
        None => Ok(IdSpace {
            users: IdMap::from_external(rows.iter().map(|r| r.user.as_str())),
            items: IdMap::from_external(rows.iter().map(|r| r.item.as_str())),
        }),
    }
}

/// Reads an exposure file of the given kind.
///
/// With `ids`, users and items are resolved against the given maps (an item
/// outside them is an error). Without, the maps are built from the file and
/// the catalog is the set of items it mentions.
pub fn read_exposure_csv(path: impl AsRef<Path>, kind: ExposureKind, ids: Option<&IdSpace>) -> Result<ExposureData> {
    let path = path.as_ref();
    let rows = read_rows(path, EXPOSURE_HEADER)?;
    let ids = resolve_ids(path, &rows, ids)?;
    let catalog = ids.catalog()?;

    // Unknown items get the first id past the catalog so validation flags them.
    let outside = ItemId(catalog.item_count() as u32 + 1);
    let mut records = Vec::with_capacity(rows.len());
    for row in &rows {
        let label = row.value.parse::<i64>().map_err(|_| Error::InvalidLabel {
            path: path.to_path_buf(),
            line: row.line,
            label: row.value.clone(),
        })?;
        records.push(ExposureRecord {
            line: row.line,
            user: UserId(ids.users.dense(&row.user).expect("resolved")),
            item: ids.items.dense(&row.item).map_or(outside, ItemId),
            label,
        });
    }

    let summary = validate_dataset(&records, &catalog);
    let first_issue = [
        summary.duplicates.first().map(|i| (i.line, 0)),
        summary.out_of_range.first().map(|i| (i.line, 1)),
        summary.invalid_labels.first().map(|i| (i.line, 2)),
    ]
    .into_iter()
    .flatten()
    .min();
    if let Some((line, what)) = first_issue {
        let row = rows.iter().find(|r| r.line == line).expect("issue line comes from a row");
        let path = path.to_path_buf();
        return Err(match what {
            0 => Error::DuplicatePair { path, line, user: row.user.clone(), item: row.item.clone() },
            1 => Error::UnknownItem { path, line, item: row.item.clone() },
            _ => Error::InvalidLabel { path, line, label: row.value.clone() },
        });
    }

    let mut by_user: BTreeMap<UserId, Vec<(ItemId, bool)>> = BTreeMap::new();
    for rec in &records {
        by_user.entry(rec.user).or_default().push((rec.item, rec.label == 1));
    }
    let mut exposures = Vec::with_capacity(by_user.len());
    for (user, entries) in by_user {
        if kind == ExposureKind::Full && entries.len() != catalog.item_count() {
            return Err(Error::IncompleteFullExposureFile {
                path: path.to_path_buf(),
                user: ids.user_label(user),
                labeled: entries.len(),
                item_count: catalog.item_count(),
            });
        }
        exposures.push(LabeledExposure::new(user, kind, entries, &catalog)?);
    }
    Ok(ExposureData { ids, catalog, exposures })
}

/// Reads a prediction file. Every user present must score every catalog item.
pub fn read_predictions_csv(path: impl AsRef<Path>, ids: Option<&IdSpace>) -> Result<PredictionData> {
    let path = path.as_ref();
    let rows = read_rows(path, PREDICTION_HEADER)?;
    let ids = resolve_ids(path, &rows, ids)?;
    let catalog = ids.catalog()?;
    let n = catalog.item_count();

    let mut dense: BTreeMap<u32, Vec<Option<f64>>> = BTreeMap::new();
    for row in &rows {
        let user = ids.users.dense(&row.user).expect("resolved");
        let item = ids.items.dense(&row.item).ok_or_else(|| Error::UnknownItem {
            path: path.to_path_buf(),
            line: row.line,
            item: row.item.clone(),
        })?;
        let score = row.value.parse::<f64>().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: row.line,
            message: format!("score `{}` is not a number", row.value),
        })?;
        if !score.is_finite() {
            return Err(Error::InvalidScoreRow {
                path: path.to_path_buf(),
                line: row.line,
                user: row.user.clone(),
                item: row.item.clone(),
                score: row.value.clone(),
            });
        }
        let slot = &mut dense.entry(user).or_insert_with(|| vec![None; n])[item as usize - 1];
        if slot.is_some() {
            return Err(Error::DuplicatePair {
                path: path.to_path_buf(),
                line: row.line,
                user: row.user.clone(),
                item: row.item.clone(),
            });
        }
        *slot = Some(score);
    }

    let mut tables = Vec::with_capacity(dense.len());
    for (user, scores) in dense {
        let user = UserId(user);
        let scores = scores
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                s.ok_or_else(|| Error::MissingPredictionRow {
                    path: path.to_path_buf(),
                    user: ids.user_label(user),
                    item: ids.item_label(ItemId::from_index(i)),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        tables.push(PredictionTable::from_dense(user, scores)?);
    }
    Ok(PredictionData { ids, catalog, tables })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::WriterBuilder::new().from_writer(create(path)?))
}

fn finish(path: &Path, writer: csv::Writer<BufWriter<File>>) -> Result<()> {
    let mut inner = writer.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    inner.flush().map_err(|e| Error::io(path, e))
}

fn write_record<const N: usize>(path: &Path, w: &mut csv::Writer<BufWriter<File>>, fields: [&str; N]) -> Result<()> {
    w.write_record(fields).map_err(|e| csv_error(path, e))
}

/// Writes exposures sorted by user then item, using external ids from `ids` when given.
pub fn write_exposure_csv(path: impl AsRef<Path>, exposures: &[LabeledExposure], ids: Option<&IdSpace>) -> Result<()> {
    let path = path.as_ref();
    let ids = ids.cloned().unwrap_or_default();
    let mut sorted: Vec<&LabeledExposure> = exposures.iter().collect();
    sorted.sort_by_key(|e| e.user());
    let mut w = csv_writer(path)?;
    write_record(path, &mut w, EXPOSURE_HEADER)?;
    for exposure in sorted {
        let user = ids.user_label(exposure.user());
        for &(item, label) in exposure.entries() {
            write_record(path, &mut w, [&user, &ids.item_label(item), if label { "1" } else { "0" }])?;
        }
    }
    finish(path, w)
}

/// Writes predictions with scores in shortest round-trip form, so reading
/// the file back gives bit-identical scores.
pub fn write_predictions_csv(path: impl AsRef<Path>, tables: &[PredictionTable], ids: Option<&IdSpace>) -> Result<()> {
    let path = path.as_ref();
    let ids = ids.cloned().unwrap_or_default();
    let mut sorted: Vec<&PredictionTable> = tables.iter().collect();
    sorted.sort_by_key(|t| t.user());
    let mut w = csv_writer(path)?;
    write_record(path, &mut w, PREDICTION_HEADER)?;
    for table in sorted {
        let user = ids.user_label(table.user());
        for (i, score) in table.scores().iter().enumerate() {
            write_record(path, &mut w, [&user, &ids.item_label(ItemId::from_index(i)), &score.to_string()])?;
        }
    }
    finish(path, w)
}

/// Writes `dense_id,external_id` rows.
pub fn write_id_map(path: impl AsRef<Path>, map: &IdMap) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv_writer(path)?;
    write_record(path, &mut w, ["dense_id", "external_id"])?;
    for (dense, external) in map.iter() {
        write_record(path, &mut w, [&dense.to_string(), external])?;
    }
    finish(path, w)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format `{other}` (expected json or csv)")),
        }
    }
}

/// What produced a report: embedded in every output file.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: Option<u64>,
    pub config: Value,
}

impl Provenance {
    pub fn new(command: impl Into<String>, seed: Option<u64>, config: &impl Serialize) -> Result<Self> {
        Ok(Self {
            tool: TOOL_NAME,
            version: TOOL_VERSION,
            command: command.into(),
            seed,
            config: serde_json::to_value(config)?,
        })
    }
}

/// Anything `write_report` can emit.
#[derive(Clone, Copy, Debug)]
pub enum Report<'a> {
    Eval { report: &'a EvalReport, ids: Option<&'a IdSpace> },
    Curve(&'a CorrelationCurve),
    Sweep(&'a [SweepCurve]),
    Matrix(&'a CrossCorrelation),
    /// Any serializable result; CSV output flattens it into `field,value` rows.
    Record { kind: &'static str, value: &'a Value },
}

impl Report<'_> {
    fn kind(&self) -> &'static str {
        match self {
            Report::Eval { .. } => "eval",
            Report::Curve(_) => "curve",
            Report::Sweep(_) => "sweep",
            Report::Matrix(_) => "matrix",
            Report::Record { kind, .. } => kind,
        }
    }

    fn body(&self) -> Result<Value> {
        Ok(match self {
            Report::Eval { report, ids } => {
                let mut value = serde_json::to_value(report)?;
                if let Some(ids) = ids {
                    let users: BTreeMap<u32, &str> = report
                        .per_user
                        .keys()
                        .chain(report.skipped_users.iter().map(|s| &s.user))
                        .filter_map(|u| ids.users.external(u.0).map(|e| (u.0, e)))
                        .collect();
                    value["user_ids"] = serde_json::to_value(users)?;
                }
                value
            }
            Report::Curve(c) => serde_json::to_value(c)?,
            Report::Sweep(s) => serde_json::to_value(s)?,
            Report::Matrix(m) => serde_json::to_value(m)?,
            Report::Record { value, .. } => (*value).clone(),
        })
    }
}

/// Writes `report` to `path`. Output is a pure function of the arguments.
pub fn write_report(report: Report<'_>, provenance: &Provenance, path: impl AsRef<Path>, format: Format) -> Result<()> {
    let path = path.as_ref();
    match format {
        Format::Json => {
            let doc = serde_json::json!({
                "tool": provenance.tool,
                "version": provenance.version,
                "command": provenance.command,
                "seed": provenance.seed,
                "config": provenance.config,
                "kind": report.kind(),
                "result": report.body()?,
            });
            let mut out = create(path)?;
            serde_json::to_writer_pretty(&mut out, &doc)?;
            out.write_all(b"\n").and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
        }
        Format::Csv => write_csv_report(report, provenance, path),
    }
}

fn opt_cell(r: Option<f64>) -> String {
    r.map(|v| v.to_string()).unwrap_or_default()
}

fn write_csv_report(report: Report<'_>, provenance: &Provenance, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut trailer: Vec<(String, String)> = Vec::new();
    match report {
        Report::Eval { report, ids } => {
            let ids = ids.cloned().unwrap_or_default();
            write_record(path, &mut w, ["scheme", "k", "user_id", "value", "status"])?;
            let (scheme, k) = (report.scheme.to_string(), report.k.to_string());
            let mut rows: Vec<(UserId, String, String)> = report
                .per_user
                .iter()
                .map(|(u, v)| (*u, v.to_string(), "ok".to_owned()))
                .collect();
            for z in &report.zero_filled_users {
                if let Some(row) = rows.iter_mut().find(|r| r.0 == z.user) {
                    row.2 = format!("zero_filled:{}", z.reason);
                }
            }
            rows.extend(report.skipped_users.iter().map(|s| (s.user, String::new(), format!("skipped:{}", s.reason))));
            rows.sort_by_key(|r| r.0);
            for (user, value, status) in rows {
                write_record(path, &mut w, [&scheme, &k, &ids.user_label(user), &value, &status])?;
            }
            trailer.push(("skip_policy".into(), report.policy.to_string()));
            trailer.push(("macro_mean".into(), report.macro_mean.to_string()));
            trailer.push(("evaluated_users".into(), report.per_user.len().to_string()));
            trailer.push(("skipped_users".into(), report.skipped_users.len().to_string()));
        }
        Report::Curve(curve) => {
            write_record(path, &mut w, ["k", "pearson_r"])?;
            for p in &curve.points {
                write_record(path, &mut w, [&p.k.to_string(), &opt_cell(p.pearson_r)])?;
            }
            trailer.push(("fixed".into(), curve.fixed.to_string()));
            trailer.push(("k_max".into(), curve.k_max.to_string()));
            trailer.push(("r_max".into(), curve.r_max.to_string()));
        }
        Report::Sweep(curves) => {
            write_record(path, &mut w, ["nbar", "kbar", "k", "pearson_r"])?;
            for c in curves {
                let (nbar, kbar) = (c.nbar.to_string(), c.kbar.to_string());
                for p in &c.curve.points {
                    write_record(path, &mut w, [&nbar, &kbar, &p.k.to_string(), &opt_cell(p.pearson_r)])?;
                }
                trailer.push((format!("k_max nbar={} kbar={}", c.nbar, c.kbar), c.curve.k_max.to_string()));
            }
        }
        Report::Matrix(m) => {
            write_record(path, &mut w, ["ure_k", "full_k", "pearson_r"])?;
            for (row, &ure_k) in m.matrix.iter().zip(&m.k_targets) {
                for (r, &full_k) in row.iter().zip(&m.k_targets) {
                    write_record(path, &mut w, [&ure_k.to_string(), &full_k.to_string(), &opt_cell(*r)])?;
                }
            }
            for (&k, arg) in m.k_targets.iter().zip(&m.row_argmax) {
                trailer.push((format!("row_argmax ure_k={k}"), arg.map(|a| a.to_string()).unwrap_or_default()));
            }
            trailer.push(("diagonal_dominant".into(), m.diagonal_dominant.to_string()));
        }
        Report::Record { value, .. } => {
            write_record(path, &mut w, ["field", "value"])?;
            let mut rows = Vec::new();
            flatten("", value, &mut rows);
            for (field, value) in rows {
                write_record(path, &mut w, [&field, &value])?;
            }
        }
    }
    finish(path, w)?;

    let mut out = std::fs::OpenOptions::new().append(true).open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = vec![
        format!("# kind {}", report.kind()),
        format!("# tool {} {}", provenance.tool, provenance.version),
        format!("# command {}", provenance.command),
        format!("# seed {}", provenance.seed.map(|s| s.to_string()).unwrap_or_else(|| "none".into())),
        format!("# config {}", serde_json::to_string(&provenance.config)?),
    ];
    lines.extend(trailer.into_iter().map(|(k, v)| format!("# {k} {v}")));
    writeln!(out, "{}", lines.join("\n")).map_err(|e| Error::io(path, e))
}

/// Dot-path flattening of a JSON value into `(field, scalar)` rows.
fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    let join = |key: &str| if prefix.is_empty() { key.to_owned() } else { format!("{prefix}.{key}") };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&join(k), v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), v, out);
            }
        }
        Value::Null => out.push((prefix.to_owned(), String::new())),
        Value::String(s) => out.push((prefix.to_owned(), s.clone())),
        other => out.push((prefix.to_owned(), other.to_string())),
    }
}

/// Path of the id map written next to `path` (`<stem>.<what>_ids.csv`).
pub fn id_map_path(path: &Path, what: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}.{what}_ids.csv"))
}

#[cfg(test)]
mod tests {
    use std::fs;

    use super::*;
    use crate::metrics::{evaluate_scheme, Scheme, SkipPolicy};

    fn file(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
        let path = dir.path().join(name);
        fs::write(&path, body).unwrap();
        path
    }

    #[test]
    fn numeric_aware_id_order() {
        let map = IdMap::from_external(["10", "2", "b", "1", "a", "2"]);
        assert_eq!(map.iter().map(|(_, e)| e).collect::<Vec<_>>(), ["1", "2", "10", "a", "b"]);
        assert_eq!(map.dense("10"), Some(3));
        assert_eq!(map.external(4), Some("a"));
        assert_eq!(map.external(0), None);
    }

    #[test]
    fn reads_small_full_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = file(&dir, "full.csv", "user_id,item_id,label\n1,1,1\n1,2,0\n");
        let data = read_exposure_csv(&path, ExposureKind::Full, None).unwrap();
        assert_eq!(data.exposures.len(), 1);
        let e = &data.exposures[0];
        assert_eq!(e.label(ItemId(1)), Some(true));
        assert_eq!(e.label(ItemId(2)), Some(false));
    }

    #[test]
    fn full_file_must_cover_the_catalog() {
        let dir = tempfile::tempdir().unwrap();
        let path = file(&dir, "full.csv", "user_id,item_id,label\n1,1,1\n1,2,0\n");
        let ids = IdSpace::identity(1, 3);
        let err = read_exposure_csv(&path, ExposureKind::Full, Some(&ids)).unwrap_err();
        assert!(matches!(err, Error::IncompleteFullExposureFile { labeled: 2, item_count: 3, .. }), "{err}");
    }

    #[test]
    fn duplicate_reported_at_second_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = file(&dir, "d.csv", "user_id,item_id,label\n1,1,1\n1,2,0\n1,1,0\n");
        let err = read_exposure_csv(&path, ExposureKind::Random, None).unwrap_err();
        assert!(matches!(err, Error::DuplicatePair { line: 4, .. }), "{err}");
        assert!(err.to_string().contains("d.csv:4"));
    }

    #[test]
    fn label_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = file(&dir, "l.csv", "user_id,item_id,label\n1,1,1\n1,2,2\n");
        assert!(matches!(
            read_exposure_csv(&path, ExposureKind::Random, None),
            Err(Error::InvalidLabel { line: 3, .. })
        ));
        let path = file(&dir, "l2.csv", "user_id,item_id,label\n1,1,yes\n");
        assert!(matches!(
            read_exposure_csv(&path, ExposureKind::Random, None),
            Err(Error::InvalidLabel { line: 2, .. })
        ));
    }

    #[test]
    fn header_and_shape_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = file(&dir, "h.csv", "user,item,label\n1,1,1\n");
        assert!(matches!(read_exposure_csv(&path, ExposureKind::Random, None), Err(Error::Parse { line: 1, .. })));
        let path = file(&dir, "s.csv", "user_id,item_id,label\n1,1,1\n1,2\n");
        assert!(matches!(read_exposure_csv(&path, ExposureKind::Random, None), Err(Error::Parse { line: 3, .. })));
        let missing = dir.path().join("nope.csv");
        assert!(matches!(read_exposure_csv(&missing, ExposureKind::Random, None), Err(Error::Io { .. })));
    }

    #[test]
    fn unknown_item_against_given_ids() {
        let dir = tempfile::tempdir().unwrap();
        let path = file(&dir, "r.csv", "user_id,item_id,label\n1,1,1\n1,9,0\n");
        let ids = IdSpace::identity(1, 3);
        assert!(matches!(
            read_exposure_csv(&path, ExposureKind::Random, Some(&ids)),
            Err(Error::UnknownItem { line: 3, .. })
        ));
    }

    #[test]
    fn reads_complete_predictions() {
        let dir = tempfile::tempdir().unwrap();
        let path = file(
            &dir,
            "p.csv",
            "user_id,item_id,score\nu1,a,0.3\nu1,b,0.1\nu1,c,0.2\nu2,a,1\nu2,b,2\nu2,c,3\n",
        );
        let data = read_predictions_csv(&path, None).unwrap();
        assert_eq!(data.tables.len(), 2);
        assert_eq!(data.tables[1].scores(), &[1.0, 2.0, 3.0]);
        assert_eq!(data.ids.users.external(2), Some("u2"));
    }

    #[test]
    fn nan_score_has_location() {
        let dir = tempfile::tempdir().unwrap();
        let path = file(&dir, "p.csv", "user_id,item_id,score\n1,1,0.5\n1,2,NaN\n");
        let err = read_predictions_csv(&path, None).unwrap_err();
        assert!(matches!(&err, Error::InvalidScoreRow { line: 3, user, item, .. } if user == "1" && item == "2"));
    }

    #[test]
    fn missing_prediction_names_the_pair() {
        let dir = tempfile::tempdir().unwrap();
        let path = file(
            &dir,
            "p.csv",
            "user_id,item_id,score\nu1,i1,1\nu1,i2,1\nu1,i3,1\nu2,i1,1\nu2,i2,1\n",
        );
        let err = read_predictions_csv(&path, None).unwrap_err();
        assert!(matches!(&err, Error::MissingPredictionRow { user, item, .. } if user == "u2" && item == "i3"));
    }

    fn sample_report() -> EvalReport {
        let full: Vec<LabeledExposure> = [[true, false], [false, true]]
            .iter()
            .enumerate()
            .map(|(u, l)| LabeledExposure::full_from_labels(UserId(u as u32 + 1), l).unwrap())
            .collect();
        let preds = vec![
            PredictionTable::from_dense(UserId(1), vec![0.9, 0.1]).unwrap(),
            PredictionTable::from_dense(UserId(2), vec![0.9, 0.1]).unwrap(),
        ];
        evaluate_scheme(Scheme::GoldFull, &full, &preds, 1, SkipPolicy::Skip).unwrap()
    }

    #[test]
    fn json_report_contains_macro_mean_and_is_stable() {
        let mut report = sample_report();
        report.macro_mean = 0.4;
        let prov = Provenance::new("eval", Some(3), &serde_json::json!({"k": 1})).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
        write_report(Report::Eval { report: &report, ids: None }, &prov, &a, Format::Json).unwrap();
        write_report(Report::Eval { report: &report, ids: None }, &prov, &b, Format::Json).unwrap();
        let text = fs::read_to_string(&a).unwrap();
        assert!(text.contains("\"macro_mean\": 0.4"), "{text}");
        assert!(text.contains(TOOL_VERSION));
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    }

    #[test]
    fn curve_csv_has_header_and_one_row_per_point() {
        use crate::experiments::{CurvePoint, MetricId};
        let curve = CorrelationCurve {
            fixed: MetricId::Rand(5),
            points: vec![
                CurvePoint { k: 1, pearson_r: None },
                CurvePoint { k: 5, pearson_r: Some(0.5) },
                CurvePoint { k: 10, pearson_r: Some(0.75) },
            ],
            k_max: 10,
            r_max: 0.75,
        };
        let prov = Provenance::new("correlate", Some(7), &serde_json::json!({})).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        write_report(Report::Curve(&curve), &prov, &path, Format::Csv).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data, ["k,pearson_r", "1,", "5,0.5", "10,0.75"]);
        assert!(text.contains("# seed 7"));
        assert!(text.contains("# fixed rand@5"));
    }

    #[test]
    fn eval_csv_marks_skipped_users() {
        let report = sample_report();
        let prov = Provenance::new("eval", None, &serde_json::json!({})).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.csv");
        write_report(Report::Eval { report: &report, ids: None }, &prov, &path, Format::Csv).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("scheme,k,user_id,value,status\nfull,1,1,1,ok\nfull,1,2,0,ok\n"), "{text}");
    }

    #[test]
    fn record_csv_flattens_nested_values() {
        let value = serde_json::json!({"a": {"b": 1, "c": [true, null]}, "d": "x"});
        let prov = Provenance::new("verify", None, &serde_json::json!({})).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_report(Report::Record { kind: "verify", value: &value }, &prov, &path, Format::Csv).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("field,value\na.b,1\na.c.0,true\na.c.1,\nd,x\n"), "{text}");
    }
}
