//! File formats: measurement CSV, prior/expert/truth JSON, and the
//! versioned results document.
//!
//! All JSON documents reject unknown fields so that typos in hand-written
//! priors fail loudly instead of being silently ignored. Graph files
//! reference variables by column name; resolution to indices happens here
//! against the columns actually present.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tcam_core::prior::PriorKnowledge;
use tcam_core::Dag;

use crate::error::CliError;

pub const RESULTS_VERSION: &str = "1";

// ---------------------------------------------------------------------
// Results document
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultsDoc {
    pub version: String,
    /// Column names after preprocessing, in data order.
    pub columns: Vec<String>,
    /// Edges of the pruned graph, sorted by (source, target) index.
    pub edges: Vec<EdgeOut>,
    /// Column names in the discovered topological order.
    pub ordering: Vec<String>,
    pub scores: Scores,
    /// Greedy acceptances in the order they happened.
    pub trace: Vec<TraceOut>,
    pub provenance: ProvenanceOut,
    /// Wall-clock stage times; null when a seed was pinned on the
    /// command line, so that fixed-seed runs are byte-identical.
    pub timings: Option<TimingsOut>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeOut {
    pub source: String,
    pub target: String,
    /// Score gain recorded when the greedy loop accepted this edge;
    /// null for edges placed by the tier initialization.
    pub gain: Option<f64>,
    pub p_value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scores {
    pub initial: f64,
    #[serde(rename = "final")]
    pub final_: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceOut {
    pub source: String,
    pub target: String,
    pub gain: f64,
    pub score_after: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProvenanceOut {
    /// Search variant that ran: "cam" or "tcam".
    pub mode: String,
    pub seed: u64,
    pub n_rows: usize,
    /// Columns that had missing values filled with their mean.
    pub imputed: Vec<ImputedOut>,
    /// Columns removed before fitting.
    pub dropped: Vec<DroppedOut>,
    /// Tier per surviving column (1 when no prior was given).
    pub tiers: BTreeMap<String, usize>,
    pub roots: Vec<String>,
    /// Candidate-parent count per column after screening.
    pub candidate_counts: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImputedOut {
    pub column: String,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DroppedOut {
    pub column: String,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingsOut {
    pub preprocess_ms: f64,
    pub discovery_ms: f64,
    pub total_ms: f64,
}

// ---------------------------------------------------------------------
// Prior, expert, and truth files
// ---------------------------------------------------------------------

/// User-supplied prior knowledge, all sections optional. A non-empty
/// tier map must cover every column of the dataset.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PriorFile {
    pub tiers: BTreeMap<String, usize>,
    pub forbidden: Vec<(String, String)>,
    pub roots: Vec<String>,
}

/// Expert annotations: edges known to exist and edges merely plausible.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExpertFile {
    pub sure: Vec<(String, String)>,
    pub possible: Vec<(String, String)>,
}

/// Ground truth emitted next to a simulated dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthFile {
    pub columns: Vec<String>,
    pub edges: Vec<(String, String)>,
    /// Omitted entirely for single-tier models.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tiers: Option<BTreeMap<String, usize>>,
    /// Human-readable edge functions, keyed "source->target".
    pub functions: BTreeMap<String, String>,
    pub noise_sd: Vec<f64>,
}

// ---------------------------------------------------------------------
// Evaluation and benchmark reports
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluateReport {
    pub runs: Vec<RunMetrics>,
    /// Present when more than one run was scored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<SummaryMetrics>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetrics {
    pub estimated: String,
    pub reference: String,
    /// "truth" or "expert".
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shd: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ashd: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recall: Option<f64>,
    pub edges_estimated: usize,
    pub edges_reference: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryMetrics {
    pub runs: usize,
    /// Mean/sd of the active distance (SHD in truth mode, aSHD in
    /// expert mode).
    pub mean_distance: f64,
    pub sd_distance: f64,
    pub mean_edges: f64,
    pub sd_edges: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: BenchConfig,
    pub methods: Vec<MethodSummary>,
    pub runs: Vec<BenchRun>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchConfig {
    pub p: usize,
    pub tiers: usize,
    pub n: usize,
    pub edge_prob: f64,
    pub runs: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub mean_ashd: f64,
    pub sd_ashd: f64,
    pub mean_edges: f64,
    pub sd_edges: f64,
    /// Within-tier greedy acceptances.
    pub mean_iterations: f64,
    pub sd_iterations: f64,
    pub mean_time_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRun {
    pub seed: u64,
    pub method: String,
    pub ashd: usize,
    pub edges: usize,
    pub iterations: usize,
    pub time_s: f64,
}

// ---------------------------------------------------------------------
// JSON helpers
// ---------------------------------------------------------------------

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::in_file(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::in_file(path, e))
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("documents contain no non-finite floats");
    out.push(b'\n');
    out
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    fs::write(path, to_json_bytes(value)).map_err(|e| CliError::in_file(path, e))
}

// ---------------------------------------------------------------------
// Measurement CSV
// ---------------------------------------------------------------------

fn parse_cell(text: &str, row: usize, column: &str) -> Result<f64, CliError> {
    if text.is_empty() || text.eq_ignore_ascii_case("na") || text.eq_ignore_ascii_case("nan") {
        return Ok(f64::NAN);
    }
    text.parse().map_err(|_| {
        CliError::validation(format!(
            "column '{column}', data row {row}: cannot parse '{text}' as a number"
        ))
    })
}

/// Reads a headed CSV of numeric columns; empty cells, `NA`, and `NaN`
/// (case-insensitive) become missing values.
pub fn read_measurement_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::in_file(path, e))?;
    let names: Vec<String> =
        reader.headers().map_err(|e| CliError::in_file(path, e))?.iter().map(String::from).collect();
    if names.is_empty() {
        return Err(CliError::in_file(path, "no columns in header"));
    }
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::in_file(path, e))?;
        if record.len() != names.len() {
            return Err(CliError::in_file(
                path,
                format!("data row {row} has {} fields, expected {}", record.len(), names.len()),
            ));
        }
        for (j, cell) in record.iter().enumerate() {
            columns[j]
                .push(parse_cell(cell, row, &names[j]).map_err(|e| CliError::in_file(path, e))?);
        }
    }
    Ok((names, columns))
}

fn format_cell(v: f64) -> String {
    if v.is_nan() {
        "NA".to_string()
    } else {
        format!("{v}")
    }
}

/// Writes columns as headed CSV; missing values become `NA`. Finite
/// values round-trip exactly (shortest-representation formatting).
pub fn write_measurement_csv(
    path: &Path,
    names: &[String],
    columns: &[Vec<f64>],
    n_rows: usize,
) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| CliError::in_file(path, e))?;
    writer.write_record(names).map_err(|e| CliError::in_file(path, e))?;
    for i in 0..n_rows {
        let record: Vec<String> = columns.iter().map(|c| format_cell(c[i])).collect();
        writer.write_record(&record).map_err(|e| CliError::in_file(path, e))?;
    }
    writer.flush().map_err(|e| CliError::in_file(path, e))?;
    Ok(())
}

// ---------------------------------------------------------------------
// Name resolution
// ---------------------------------------------------------------------

/// Maps column names to indices; unknown names are validation errors.
pub struct NameIndex<'a> {
    columns: &'a [String],
    index: BTreeMap<&'a str, usize>,
}

impl<'a> NameIndex<'a> {
    pub fn new(columns: &'a [String]) -> Self {
        let index = columns.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        Self { columns, index }
    }

    pub fn get(&self, name: &str) -> Result<usize, CliError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| CliError::validation(format!("unknown column '{name}'")))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn name(&self, i: usize) -> &str {
        &self.columns[i]
    }
}

/// Resolves a prior file against the dataset. Names are checked against
/// the raw CSV header (so entries for preprocessing-dropped columns are
/// accepted but unused); a non-empty tier map must assign every raw
/// column a tier.
pub fn resolve_prior(
    file: &PriorFile,
    raw_columns: &[String],
    surviving: &[String],
) -> Result<PriorKnowledge, CliError> {
    let raw: BTreeSet<&str> = raw_columns.iter().map(String::as_str).collect();
    let check = |name: &str| -> Result<(), CliError> {
        if raw.contains(name) {
            Ok(())
        } else {
            Err(CliError::validation(format!("prior references unknown column '{name}'")))
        }
    };
    for name in file.tiers.keys() {
        check(name)?;
    }
    for (a, b) in &file.forbidden {
        check(a)?;
        check(b)?;
    }
    for name in &file.roots {
        check(name)?;
    }
    if !file.tiers.is_empty() {
        for name in raw_columns {
            if !file.tiers.contains_key(name) {
                return Err(CliError::validation(format!(
                    "prior tier map is partial: column '{name}' has no tier"
                )));
            }
        }
    }

    let live = NameIndex::new(surviving);
    let tiers: Vec<usize> =
        surviving.iter().map(|n| file.tiers.get(n).copied().unwrap_or(1)).collect();
    let mut forbidden = Vec::new();
    for (a, b) in &file.forbidden {
        if live.contains(a) && live.contains(b) {
            forbidden.push((live.get(a)?, live.get(b)?));
        }
    }
    let mut roots = Vec::new();
    for name in &file.roots {
        if live.contains(name) {
            roots.push(live.get(name)?);
        }
    }
    PriorKnowledge::new(tiers, &forbidden, &roots).map_err(|e| CliError::validation(e.to_string()))
}

/// Builds a DAG from named edges over the given columns.
pub fn dag_from_named_edges(
    columns: &[String],
    edges: &[(String, String)],
) -> Result<Dag, CliError> {
    let index = NameIndex::new(columns);
    let mut pairs = Vec::with_capacity(edges.len());
    for (a, b) in edges {
        pairs.push((index.get(a)?, index.get(b)?));
    }
    Dag::from_edges(columns.len(), pairs).map_err(|e| CliError::validation(e.to_string()))
}
