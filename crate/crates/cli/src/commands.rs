//! Subcommand definitions and implementations.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use tcam_core::dataset::Dataset;
use tcam_core::metrics::{ashd, edge_precision_recall, shd, ExpertGraph};
use tcam_core::parallel::derive_seed;
use tcam_core::pipeline::{run_discovery, Discovery, DiscoveryConfig, ModeChoice};
use tcam_core::ordering::SearchMode;
use tcam_core::prior::PriorKnowledge;
use tcam_core::semgen::{random_sem, sample, SemSpec};
use tcam_core::table::{merge_bom, BomRow, MergeWarning, PartTable};
use tcam_core::Dag;

use crate::dot::render_dot;
use crate::error::CliError;
use crate::formats::{
    dag_from_named_edges, read_json, read_measurement_csv, resolve_prior, to_json_bytes,
    write_json, write_measurement_csv, BenchConfig, BenchRun, BenchmarkReport, DroppedOut,
    EdgeOut, EvaluateReport, ExpertFile, ImputedOut, MethodSummary, NameIndex, PriorFile,
    ProvenanceOut, ResultsDoc, RunMetrics, Scores, SummaryMetrics, TimingsOut, TraceOut,
    TruthFile, RESULTS_VERSION,
};
use crate::par::RayonPar;

/// Cause-and-effect graph discovery for tiered process data.
#[derive(Debug, Parser)]
#[command(name = "tcam", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Seed for all randomized stages. Passing a seed also suppresses
    /// the timings block, making output byte-identical across runs.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for regression fits (0 = all cores). The result
    /// does not depend on this.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,

    /// Significance level for the edge-pruning stage.
    #[arg(long, global = true, default_value_t = 0.001)]
    pub prune_alpha: f64,

    /// Minimum absolute LASSO coefficient for a screened candidate.
    #[arg(long, global = true, default_value_t = 0.01)]
    pub pns_threshold: f64,

    /// Force the search variant instead of inferring it from the prior.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Ignore prior knowledge entirely.
    Cam,
    /// Pre-place screened across-tier edges before the greedy search.
    Tcam,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn a cause-and-effect graph from a CSV of measurements.
    Discover {
        /// Measurement CSV; one named numeric column per characteristic.
        data: PathBuf,
        /// Prior knowledge JSON (tiers, forbidden edges, roots).
        #[arg(long)]
        prior: Option<PathBuf>,
        /// Results JSON destination (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also render the discovered graph as Graphviz DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Generate a synthetic dataset with known ground truth.
    Simulate {
        /// Number of variables.
        #[arg(long, default_value_t = 10)]
        p: usize,
        /// Probability of each candidate edge.
        #[arg(long, default_value_t = 0.3)]
        edge_prob: f64,
        /// Number of tiers the variables are split into.
        #[arg(long, default_value_t = 1)]
        tiers: usize,
        /// Number of rows to sample.
        #[arg(long, default_value_t = 500)]
        n: usize,
        /// Dataset CSV destination.
        #[arg(long)]
        out: PathBuf,
        /// Ground-truth JSON destination (defaults to <out>.truth.json).
        #[arg(long)]
        truth_out: Option<PathBuf>,
    },
    /// Score estimated graphs against ground truth or expert annotations.
    Evaluate {
        /// Results JSON files produced by `discover`.
        #[arg(required = true)]
        estimated: Vec<PathBuf>,
        /// Ground-truth JSON files (one per estimate, or one shared).
        #[arg(long)]
        truth: Vec<PathBuf>,
        /// Expert annotation JSON files (one per estimate, or one shared).
        #[arg(long)]
        expert: Vec<PathBuf>,
        /// Report destination (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a results document as Graphviz DOT.
    ExportDot {
        /// Results JSON produced by `discover`.
        results: PathBuf,
        /// DOT destination (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run simulate -> discover -> evaluate over many seeds and compare
    /// the plain and tier-aware searches.
    Benchmark {
        #[arg(long, default_value_t = 10)]
        p: usize,
        #[arg(long, default_value_t = 3)]
        tiers: usize,
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 0.3)]
        edge_prob: f64,
        /// Number of independent simulated datasets.
        #[arg(long, default_value_t = 20)]
        runs: usize,
        /// Report destination (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge mother and child part tables along bill-of-material
    /// placements into one row-per-mother CSV.
    Merge {
        /// Mother part CSV; first column is the part id.
        mother: PathBuf,
        /// Child part CSV (repeatable); first column is the part id.
        #[arg(long, required = true)]
        child: Vec<PathBuf>,
        /// Bill of materials CSV with child_id, mother_id, position.
        #[arg(long)]
        bom: PathBuf,
        /// Merged CSV destination (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    if !(cli.prune_alpha > 0.0 && cli.prune_alpha <= 1.0) {
        return Err(CliError::validation(format!(
            "--prune-alpha must lie in (0, 1], got {}",
            cli.prune_alpha
        )));
    }
    if !(cli.pns_threshold >= 0.0 && cli.pns_threshold.is_finite()) {
        return Err(CliError::validation(format!(
            "--pns-threshold must be a finite non-negative number, got {}",
            cli.pns_threshold
        )));
    }
    match &cli.command {
        Command::Discover { data, prior, out, dot } => {
            cmd_discover(&cli, data, prior.as_deref(), out.as_deref(), dot.as_deref())
        }
        Command::Simulate { p, edge_prob, tiers, n, out, truth_out } => {
            cmd_simulate(&cli, *p, *edge_prob, *tiers, *n, out, truth_out.as_deref())
        }
        Command::Evaluate { estimated, truth, expert, out } => {
            cmd_evaluate(estimated, truth, expert, out.as_deref())
        }
        Command::ExportDot { results, out } => cmd_export_dot(results, out.as_deref()),
        Command::Benchmark { p, tiers, n, edge_prob, runs, out } => {
            cmd_benchmark(&cli, *p, *tiers, *n, *edge_prob, *runs, out.as_deref())
        }
        Command::Merge { mother, child, bom, out } => cmd_merge(mother, child, bom, out.as_deref()),
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, bytes).map_err(|e| CliError::in_file(path, e))
        }
        None => {
            std::io::stdout().write_all(bytes).map_err(|e| CliError::validation(e.to_string()))
        }
    }
}

// ---------------------------------------------------------------------
// discover
// ---------------------------------------------------------------------

fn mode_choice(cli: &Cli) -> ModeChoice {
    match cli.mode {
        Some(ModeArg::Cam) => ModeChoice::Cam,
        Some(ModeArg::Tcam) => ModeChoice::Tcam,
        None => ModeChoice::Auto,
    }
}

fn discovery_config(cli: &Cli) -> DiscoveryConfig {
    DiscoveryConfig {
        seed: cli.seed.unwrap_or(0),
        pns_threshold: cli.pns_threshold,
        prune_alpha: cli.prune_alpha,
        mode: mode_choice(cli),
        ..DiscoveryConfig::default()
    }
}

fn build_results_doc(
    discovery: &Discovery,
    seed: u64,
    timings: Option<TimingsOut>,
) -> ResultsDoc {
    let columns = discovery.dataset.column_names().to_vec();
    let name = |i: usize| columns[i].clone();

    let mut gains: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for entry in &discovery.ordering.trace {
        gains.insert((entry.source, entry.target), entry.gain);
    }
    let mut p_values: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for decision in &discovery.pruned.decisions {
        p_values.insert((decision.source, decision.target), decision.p_value);
    }
    let edges = discovery
        .pruned
        .dag
        .edges()
        .into_iter()
        .map(|(k, l)| EdgeOut {
            source: name(k),
            target: name(l),
            gain: gains.get(&(k, l)).copied(),
            p_value: p_values[&(k, l)],
        })
        .collect();

    let provenance = discovery.dataset.provenance();
    let tiers = columns
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), discovery.prior.tier(i)))
        .collect();
    let candidate_counts = columns
        .iter()
        .cloned()
        .zip(discovery.neighbor_counts())
        .collect();

    ResultsDoc {
        version: RESULTS_VERSION.to_string(),
        columns: columns.clone(),
        edges,
        ordering: discovery.ordering.ordering.nodes().iter().map(|&i| name(i)).collect(),
        scores: Scores {
            initial: discovery.ordering.initial_score,
            final_: discovery.ordering.final_score,
        },
        trace: discovery
            .ordering
            .trace
            .iter()
            .map(|t| TraceOut {
                source: name(t.source),
                target: name(t.target),
                gain: t.gain,
                score_after: t.score_after,
            })
            .collect(),
        provenance: ProvenanceOut {
            mode: match discovery.mode {
                SearchMode::Cam => "cam".to_string(),
                SearchMode::Tcam => "tcam".to_string(),
            },
            seed,
            n_rows: discovery.dataset.n_rows(),
            imputed: provenance
                .imputed
                .iter()
                .map(|(c, n)| ImputedOut { column: c.clone(), count: *n })
                .collect(),
            dropped: provenance
                .dropped
                .iter()
                .map(|(c, r)| DroppedOut { column: c.clone(), reason: r.as_str().to_string() })
                .collect(),
            tiers,
            roots: discovery.prior.roots().into_iter().map(name).collect(),
            candidate_counts,
        },
        timings,
    }
}

fn cmd_discover(
    cli: &Cli,
    data: &Path,
    prior: Option<&Path>,
    out: Option<&Path>,
    dot: Option<&Path>,
) -> Result<(), CliError> {
    let t_total = Instant::now();
    let (raw_names, raw_columns) = read_measurement_csv(data)?;
    let dataset =
        Dataset::new(raw_names.clone(), raw_columns).map_err(|e| CliError::in_file(data, e))?;
    let t_prep = Instant::now();
    let dataset = dataset.preprocess().map_err(|e| CliError::in_file(data, e))?;
    let preprocess_ms = t_prep.elapsed().as_secs_f64() * 1e3;

    let prior_knowledge = match prior {
        Some(path) => {
            let file: PriorFile = read_json(path)?;
            resolve_prior(&file, &raw_names, dataset.column_names())?
        }
        None => PriorKnowledge::trivial(dataset.n_cols()),
    };

    let config = discovery_config(cli);
    let t_disc = Instant::now();
    let discovery = run_discovery(&dataset, &prior_knowledge, &config, &RayonPar)?;
    let discovery_ms = t_disc.elapsed().as_secs_f64() * 1e3;

    // A pinned seed promises byte-identical output, so wall-clock times
    // are only reported for unpinned runs.
    let timings = cli.seed.is_none().then(|| TimingsOut {
        preprocess_ms,
        discovery_ms,
        total_ms: t_total.elapsed().as_secs_f64() * 1e3,
    });
    let doc = build_results_doc(&discovery, config.seed, timings);
    if let Some(dot_path) = dot {
        std::fs::write(dot_path, render_dot(&doc)).map_err(|e| CliError::in_file(dot_path, e))?;
    }
    emit(out, &to_json_bytes(&doc))
}

// ---------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------

fn truth_from_spec(spec: &SemSpec, tier_count: usize) -> TruthFile {
    let columns = spec.column_names();
    let edges: Vec<(String, String)> = spec
        .dag()
        .edges()
        .into_iter()
        .map(|(k, l)| (columns[k].clone(), columns[l].clone()))
        .collect();
    let functions = spec
        .dag()
        .edges()
        .into_iter()
        .map(|(k, l)| {
            let f = spec.function(k, l).expect("every edge has a function");
            (format!("{}->{}", columns[k], columns[l]), f.describe())
        })
        .collect();
    let tiers = (tier_count > 1).then(|| {
        let assigned = spec.tiers().expect("multi-tier spec carries tiers");
        columns.iter().cloned().zip(assigned.iter().copied()).collect()
    });
    TruthFile { columns, edges, tiers, functions, noise_sd: spec.noise_sd().to_vec() }
}

fn cmd_simulate(
    cli: &Cli,
    p: usize,
    edge_prob: f64,
    tiers: usize,
    n: usize,
    out: &Path,
    truth_out: Option<&Path>,
) -> Result<(), CliError> {
    if p == 0 {
        return Err(CliError::validation("--p must be at least 1"));
    }
    if tiers == 0 || tiers > p {
        return Err(CliError::validation(format!("--tiers must lie in 1..={p}, got {tiers}")));
    }
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(CliError::validation(format!(
            "--edge-prob must lie in [0, 1], got {edge_prob}"
        )));
    }
    if n == 0 {
        return Err(CliError::validation("--n must be at least 1"));
    }

    let seed = cli.seed.unwrap_or(0);
    let spec = random_sem(p, edge_prob, tiers, seed);
    let data = sample(&spec, n, derive_seed(seed, 1));
    let columns: Vec<Vec<f64>> = (0..data.n_cols()).map(|j| data.column(j).to_vec()).collect();
    write_measurement_csv(out, data.column_names(), &columns, data.n_rows())?;

    let truth_path = truth_out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| out.with_extension("truth.json"));
    write_json(&truth_path, &truth_from_spec(&spec, tiers))
}

// ---------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------

fn load_results(path: &Path) -> Result<ResultsDoc, CliError> {
    let doc: ResultsDoc = read_json(path)?;
    if doc.version != RESULTS_VERSION {
        return Err(CliError::in_file(
            path,
            format!("unsupported results version '{}', expected '{RESULTS_VERSION}'", doc.version),
        ));
    }
    Ok(doc)
}

fn estimated_dag(doc: &ResultsDoc) -> Result<Dag, CliError> {
    let named: Vec<(String, String)> =
        doc.edges.iter().map(|e| (e.source.clone(), e.target.clone())).collect();
    dag_from_named_edges(&doc.columns, &named)
}

fn same_column_set(a: &[String], b: &[String]) -> bool {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort();
    b.sort();
    a == b
}

fn pair_refs<'a>(
    estimated: &'a [PathBuf],
    refs: &'a [PathBuf],
    flag: &str,
) -> Result<Vec<(&'a PathBuf, &'a PathBuf)>, CliError> {
    if refs.len() == estimated.len() {
        Ok(estimated.iter().zip(refs.iter()).collect())
    } else if refs.len() == 1 {
        Ok(estimated.iter().map(|e| (e, &refs[0])).collect())
    } else {
        Err(CliError::validation(format!(
            "{} {flag} files for {} estimates; provide one per estimate or a single shared file",
            refs.len(),
            estimated.len()
        )))
    }
}

fn cmd_evaluate(
    estimated: &[PathBuf],
    truth: &[PathBuf],
    expert: &[PathBuf],
    out: Option<&Path>,
) -> Result<(), CliError> {
    if truth.is_empty() == expert.is_empty() {
        return Err(CliError::validation("provide exactly one of --truth or --expert"));
    }

    let mut runs = Vec::new();
    if !truth.is_empty() {
        for (est_path, truth_path) in pair_refs(estimated, truth, "--truth")? {
            let doc = load_results(est_path)?;
            let est = estimated_dag(&doc)?;
            let truth_file: TruthFile = read_json(truth_path)?;
            if !same_column_set(&doc.columns, &truth_file.columns) {
                return Err(CliError::validation(format!(
                    "node mismatch between {} and {}",
                    est_path.display(),
                    truth_path.display()
                )));
            }
            let truth_dag = dag_from_named_edges(&doc.columns, &truth_file.edges)?;
            let distance = shd(&est, &truth_dag).map_err(|e| CliError::validation(e.to_string()))?;
            let (precision, recall) = edge_precision_recall(&est, &truth_dag)
                .map_err(|e| CliError::validation(e.to_string()))?;
            runs.push(RunMetrics {
                estimated: est_path.display().to_string(),
                reference: truth_path.display().to_string(),
                mode: "truth".to_string(),
                shd: Some(distance),
                ashd: None,
                precision: Some(precision),
                recall: Some(recall),
                edges_estimated: est.edge_count(),
                edges_reference: truth_dag.edge_count(),
            });
        }
    } else {
        for (est_path, expert_path) in pair_refs(estimated, expert, "--expert")? {
            let doc = load_results(est_path)?;
            let est = estimated_dag(&doc)?;
            let expert_file: ExpertFile = read_json(expert_path)?;
            let index = NameIndex::new(&doc.columns);
            let mut sure = Vec::new();
            for (a, b) in &expert_file.sure {
                sure.push((index.get(a)?, index.get(b)?));
            }
            let mut possible = Vec::new();
            for (a, b) in &expert_file.possible {
                possible.push((index.get(a)?, index.get(b)?));
            }
            let expert_graph = ExpertGraph::new(doc.columns.len(), &sure, &possible)
                .map_err(|e| CliError::validation(e.to_string()))?;
            let distance =
                ashd(&est, &expert_graph).map_err(|e| CliError::validation(e.to_string()))?;
            runs.push(RunMetrics {
                estimated: est_path.display().to_string(),
                reference: expert_path.display().to_string(),
                mode: "expert".to_string(),
                shd: None,
                ashd: Some(distance),
                precision: None,
                recall: None,
                edges_estimated: est.edge_count(),
                edges_reference: sure.len(),
            });
        }
    }

    let summary = (runs.len() > 1).then(|| {
        let distances: Vec<f64> =
            runs.iter().map(|r| r.shd.or(r.ashd).unwrap() as f64).collect();
        let edges: Vec<f64> = runs.iter().map(|r| r.edges_estimated as f64).collect();
        SummaryMetrics {
            runs: runs.len(),
            mean_distance: mean(&distances),
            sd_distance: sd(&distances),
            mean_edges: mean(&edges),
            sd_edges: sd(&edges),
        }
    });
    emit(out, &to_json_bytes(&EvaluateReport { runs, summary }))
}

// ---------------------------------------------------------------------
// export-dot
// ---------------------------------------------------------------------

fn cmd_export_dot(results: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let doc = load_results(results)?;
    // Re-validate the edge list so malformed documents fail here rather
    // than producing unreadable DOT.
    estimated_dag(&doc)?;
    emit(out, render_dot(&doc).as_bytes())
}

// ---------------------------------------------------------------------
// benchmark
// ---------------------------------------------------------------------

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn cmd_benchmark(
    cli: &Cli,
    p: usize,
    tiers: usize,
    n: usize,
    edge_prob: f64,
    runs: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if p < 2 {
        return Err(CliError::validation("--p must be at least 2"));
    }
    if tiers == 0 || tiers > p {
        return Err(CliError::validation(format!("--tiers must lie in 1..={p}, got {tiers}")));
    }
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(CliError::validation(format!(
            "--edge-prob must lie in [0, 1], got {edge_prob}"
        )));
    }
    if n < 20 {
        return Err(CliError::validation("--n must be at least 20 to fit regressions"));
    }
    if runs == 0 {
        return Err(CliError::validation("--runs must be at least 1"));
    }

    let base_seed = cli.seed.unwrap_or(0);
    let mut bench_runs: Vec<BenchRun> = Vec::new();
    for r in 0..runs {
        let run_seed = base_seed.wrapping_add(r as u64);
        let spec = random_sem(p, edge_prob, tiers, run_seed);
        let data = sample(&spec, n, derive_seed(run_seed, 1));
        let dataset = data.preprocess().map_err(|e| CliError::validation(e.to_string()))?;
        if dataset.n_cols() != p {
            return Err(CliError::validation(
                "simulated dataset lost columns during preprocessing",
            ));
        }
        let prior = match spec.tiers() {
            Some(t) => PriorKnowledge::from_tiers(t)
                .map_err(|e| CliError::validation(e.to_string()))?,
            None => PriorKnowledge::trivial(p),
        };
        let expert = ExpertGraph::new(p, &spec.dag().edges(), &[])
            .map_err(|e| CliError::validation(e.to_string()))?;

        for (mode, label) in [(ModeChoice::Cam, "cam"), (ModeChoice::Tcam, "tcam")] {
            let config = DiscoveryConfig {
                seed: derive_seed(run_seed, 2),
                pns_threshold: cli.pns_threshold,
                prune_alpha: cli.prune_alpha,
                mode,
                ..DiscoveryConfig::default()
            };
            let start = Instant::now();
            let discovery = run_discovery(&dataset, &prior, &config, &RayonPar)?;
            let time_s = start.elapsed().as_secs_f64();
            let distance = ashd(&discovery.pruned.dag, &expert)
                .map_err(|e| CliError::validation(e.to_string()))?;
            bench_runs.push(BenchRun {
                seed: run_seed,
                method: label.to_string(),
                ashd: distance,
                edges: discovery.pruned.dag.edge_count(),
                iterations: discovery.ordering.trace.len(),
                time_s,
            });
        }
    }

    let methods = ["cam", "tcam"]
        .into_iter()
        .map(|label| {
            let rows: Vec<&BenchRun> =
                bench_runs.iter().filter(|r| r.method == label).collect();
            let ashds: Vec<f64> = rows.iter().map(|r| r.ashd as f64).collect();
            let edges: Vec<f64> = rows.iter().map(|r| r.edges as f64).collect();
            let iterations: Vec<f64> = rows.iter().map(|r| r.iterations as f64).collect();
            let times: Vec<f64> = rows.iter().map(|r| r.time_s).collect();
            MethodSummary {
                method: label.to_string(),
                mean_ashd: mean(&ashds),
                sd_ashd: sd(&ashds),
                mean_edges: mean(&edges),
                sd_edges: sd(&edges),
                mean_iterations: mean(&iterations),
                sd_iterations: sd(&iterations),
                mean_time_s: mean(&times),
            }
        })
        .collect();

    let report = BenchmarkReport {
        config: BenchConfig { p, tiers, n, edge_prob, runs, seed: base_seed },
        methods,
        runs: bench_runs,
    };
    emit(out, &to_json_bytes(&report))
}

// ---------------------------------------------------------------------
// merge
// ---------------------------------------------------------------------

fn parse_measurement_cell(text: &str, row: usize, column: &str) -> Result<f64, CliError> {
    if text.is_empty() || text.eq_ignore_ascii_case("na") || text.eq_ignore_ascii_case("nan") {
        return Ok(f64::NAN);
    }
    text.parse().map_err(|_| {
        CliError::validation(format!(
            "column '{column}', data row {row}: cannot parse '{text}' as a number"
        ))
    })
}

/// Reads a part table: first CSV column holds part ids, the rest are
/// numeric measurements.
fn read_part_csv(path: &Path) -> Result<PartTable, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::in_file(path, e))?;
    let headers: Vec<String> =
        reader.headers().map_err(|e| CliError::in_file(path, e))?.iter().map(String::from).collect();
    if headers.len() < 2 {
        return Err(CliError::in_file(path, "need an id column plus at least one measurement"));
    }
    let names: Vec<String> = headers[1..].to_vec();
    let mut ids = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::in_file(path, e))?;
        if record.len() != headers.len() {
            return Err(CliError::in_file(
                path,
                format!("data row {row} has {} fields, expected {}", record.len(), headers.len()),
            ));
        }
        ids.push(record[0].to_string());
        for (j, cell) in record.iter().skip(1).enumerate() {
            columns[j].push(
                parse_measurement_cell(cell, row, &names[j])
                    .map_err(|e| CliError::in_file(path, e))?,
            );
        }
    }
    PartTable::new(ids, names, columns).map_err(|e| CliError::in_file(path, e))
}

fn read_bom_csv(path: &Path) -> Result<Vec<BomRow>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::in_file(path, e))?;
    let headers = reader.headers().map_err(|e| CliError::in_file(path, e))?.clone();
    let position_of = |name: &str| -> Result<usize, CliError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::in_file(path, format!("missing column '{name}'")))
    };
    let child_idx = position_of("child_id")?;
    let mother_idx = position_of("mother_id")?;
    let pos_idx = position_of("position")?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::in_file(path, e))?;
        rows.push(BomRow {
            child_id: record[child_idx].to_string(),
            mother_id: record[mother_idx].to_string(),
            position: record[pos_idx].to_string(),
        });
    }
    Ok(rows)
}

fn cmd_merge(
    mother: &Path,
    children: &[PathBuf],
    bom: &Path,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let mother_table = read_part_csv(mother)?;
    let child_tables: Vec<PartTable> =
        children.iter().map(|p| read_part_csv(p)).collect::<Result<_, _>>()?;
    let child_refs: Vec<&PartTable> = child_tables.iter().collect();
    let bom_rows = read_bom_csv(bom)?;
    let (merged, warnings) = merge_bom(&mother_table, &child_refs, &bom_rows)
        .map_err(|e| CliError::validation(e.to_string()))?;
    for warning in &warnings {
        match warning {
            MergeWarning::OrphanChild { id } => {
                eprintln!("warning: child part '{id}' is never placed; its measurements were excluded");
            }
        }
    }

    let mut buffer = Vec::new();
    {
        let mut writer = csv::Writer::from_writer(&mut buffer);
        let mut header = vec!["id".to_string()];
        header.extend(merged.column_names().iter().cloned());
        writer.write_record(&header).map_err(|e| CliError::validation(e.to_string()))?;
        for i in 0..merged.n_rows() {
            let mut record = vec![merged.ids()[i].clone()];
            for j in 0..merged.column_names().len() {
                let v = merged.column(j)[i];
                record.push(if v.is_nan() { "NA".to_string() } else { format!("{v}") });
            }
            writer.write_record(&record).map_err(|e| CliError::validation(e.to_string()))?;
        }
        writer.flush().map_err(|e| CliError::validation(e.to_string()))?;
    }
    emit(out, &buffer)
}
