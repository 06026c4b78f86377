//! `dlc` — spectral timelines, directional Laplacian centralities, THeLMa
//! sequence generation, and seeded injection experiments.
//!
//! Every run writes its outputs plus a `manifest.json` recording the
//! command, parameters, seed, and input digests; reruns with the same
//! manifest produce byte-identical report files. Exit codes: 0 success,
//! 1 runtime/numeric failure, 2 usage or input error.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use dlc::anomaly::{
    inject_ordered, inject_ordered_up_to, inject_random_star, select_core_anomaly,
    temporal_experiment, AnomalyError, AnomalyKind, DEFAULT_COHORT_WIDTH,
};
use dlc::centrality::{CentralityError, Measure};
use dlc::flow::{
    parse_flow_csv, spectral_timeline, window_graphs, FlowSchema, TimelineScope, WindowSpec,
};
use dlc::graph::Graph;
use dlc::spectra::LaplacianKind;
use dlc::thelma::{self, ThelmaParams};

#[derive(Parser)]
#[command(
    name = "dlc",
    version,
    about = "Spectral importance analysis for network-flow graphs"
)]
struct Cli {
    /// Worker threads for window/trial parallelism (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for every random decision in the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-window extremal Laplacian eigenvalues from a flow CSV.
    Timeline(TimelineArgs),
    /// Score the vertices of an edge-list graph.
    Centrality(CentralityArgs),
    /// Generate a THeLMa temporal graph sequence.
    Thelma(ThelmaArgs),
    /// Run an injection experiment from a config file.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct TimelineArgs {
    /// Flow CSV file.
    #[arg(long)]
    flow: PathBuf,
    /// Window length in seconds.
    #[arg(long, default_value_t = 60)]
    window: u64,
    /// Window step in seconds (may be smaller than the length).
    #[arg(long, default_value_t = 60)]
    step: u64,
    /// Eigenvalues per window.
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Laplacian matrix: combinatorial or normalized.
    #[arg(long, value_enum, default_value_t = KindArg::L)]
    kind: KindArg,
    /// Compute on the giant component or the full window graph.
    #[arg(long, value_enum, default_value_t = ScopeArg::Giant)]
    scope: ScopeArg,
    /// Report the k smallest nontrivial eigenvalues instead of the largest.
    #[arg(long)]
    smallest: bool,
    /// JSON file overriding the flow column schema.
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Restrict window starts to [START, END).
    #[arg(long, value_parser = parse_range)]
    range: Option<(u64, u64)>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CentralityArgs {
    /// Edge-list graph file.
    #[arg(long)]
    graph: PathBuf,
    /// Measure: dlc, ndlc, lc, nlc, pagerank, katz, closeness, betweenness.
    #[arg(long)]
    measure: String,
    /// Eigenvalue count for dlc/ndlc.
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Use the k largest eigenvalues (default for dlc).
    #[arg(long)]
    top: bool,
    /// Use the k smallest nontrivial eigenvalues (default for ndlc).
    #[arg(long)]
    bottom: bool,
    /// Restrict to the giant component before scoring.
    #[arg(long)]
    giant: bool,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ThelmaArgs {
    /// Generator parameter file (JSON).
    #[arg(long)]
    params: PathBuf,
    /// Output directory for the edge-list sequence and manifest.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment family.
    #[arg(long, value_enum)]
    kind: ExperimentKind,
    /// Experiment config file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for report files.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, ValueEnum)]
enum KindArg {
    /// Combinatorial Laplacian.
    L,
    /// Normalized Laplacian.
    Nl,
}

impl From<KindArg> for LaplacianKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::L => LaplacianKind::Combinatorial,
            KindArg::Nl => LaplacianKind::Normalized,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum ScopeArg {
    Giant,
    Full,
}

#[derive(Copy, Clone, ValueEnum)]
enum ExperimentKind {
    Ordered,
    Random,
    Temporal,
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once(':').ok_or("expected START:END")?;
    let start = a.parse().map_err(|_| "bad start")?;
    let end = b.parse().map_err(|_| "bad end")?;
    if start >= end {
        return Err("start must be below end".into());
    }
    Ok((start, end))
}

/// Errors split by exit code.
enum AppError {
    /// Exit 2: bad flags, configs, or input files.
    Usage(String),
    /// Exit 1: runtime or numeric failure.
    Runtime(String),
}

impl AppError {
    fn usage(e: impl std::fmt::Display) -> AppError {
        AppError::Usage(e.to_string())
    }
    fn runtime(e: impl std::fmt::Display) -> AppError {
        AppError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Runtime(e.to_string())
    }
}

impl From<CentralityError> for AppError {
    fn from(e: CentralityError) -> Self {
        match e {
            CentralityError::Disconnected { .. } => {
                AppError::Usage(format!("{e}; pass --giant to restrict automatically"))
            }
            CentralityError::IndexOutOfRange { .. }
            | CentralityError::IndexSetTooLarge { .. }
            | CentralityError::EmptyIndexSet
            | CentralityError::ZeroEnergy
            | CentralityError::AttenuationTooLarge { .. } => AppError::Usage(e.to_string()),
            _ => AppError::Runtime(e.to_string()),
        }
    }
}

impl From<AnomalyError> for AppError {
    fn from(e: AnomalyError) -> Self {
        match e {
            AnomalyError::Centrality(inner) => inner.into(),
            AnomalyError::SizeOutOfRange { .. }
            | AnomalyError::KTooSmall(..)
            | AnomalyError::NoTrials
            | AnomalyError::EmptySequence
            | AnomalyError::NotEnoughCandidates { .. }
            | AnomalyError::NotScored(_) => AppError::Usage(e.to_string()),
            _ => AppError::Runtime(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global();
        dlc::spectra::set_blas_threads(1);
    }
    let result = match &cli.command {
        Command::Timeline(args) => cmd_timeline(args, cli.seed),
        Command::Centrality(args) => cmd_centrality(args, cli.seed),
        Command::Thelma(args) => cmd_thelma(args, cli.seed),
        Command::Experiment(args) => cmd_experiment(args, cli.seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Resolves a path against `DLC_DATA_DIR` when it does not exist as given.
fn resolve_input(path: &Path) -> PathBuf {
    if path.exists() {
        return path.to_path_buf();
    }
    if let Ok(base) = std::env::var("DLC_DATA_DIR") {
        let candidate = Path::new(&base).join(path);
        if candidate.exists() {
            return candidate;
        }
    }
    path.to_path_buf()
}

#[derive(Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    parameters: serde_json::Value,
    seed: u64,
    inputs: Vec<InputDigest>,
    tool_version: String,
    wall_clock_unix: u64,
}

fn digest(path: &Path) -> Result<InputDigest, AppError> {
    let bytes = std::fs::read(path)
        .map_err(|e| AppError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: format!("{:x}", hasher.finalize()),
    })
}

/// Collected outputs, flushed atomically (write to temp, rename) at run end.
struct OutputSet {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl OutputSet {
    fn new(dir: &Path) -> OutputSet {
        OutputSet {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    fn manifest(
        &mut self,
        command: &str,
        parameters: serde_json::Value,
        seed: u64,
        inputs: Vec<InputDigest>,
    ) {
        let manifest = RunManifest {
            command: command.to_string(),
            parameters,
            seed,
            inputs,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        bytes.push(b'\n');
        self.add("manifest.json", bytes);
    }

    fn flush(self) -> Result<(), AppError> {
        std::fs::create_dir_all(&self.dir)?;
        for (name, bytes) in self.files {
            let tmp = self.dir.join(format!(".{name}.tmp"));
            std::fs::write(&tmp, &bytes)?;
            std::fs::rename(&tmp, self.dir.join(&name))?;
            println!("wrote {}", self.dir.join(&name).display());
        }
        Ok(())
    }
}

fn cmd_timeline(args: &TimelineArgs, seed: u64) -> Result<(), AppError> {
    let flow_path = resolve_input(&args.flow);
    let schema: FlowSchema = match &args.schema {
        None => FlowSchema::default(),
        Some(path) => {
            let text = std::fs::read_to_string(resolve_input(path))
                .map_err(|e| AppError::Usage(format!("cannot read schema: {e}")))?;
            serde_json::from_str(&text).map_err(|e| AppError::Usage(format!("bad schema: {e}")))?
        }
    };
    let file = std::fs::File::open(&flow_path)
        .map_err(|e| AppError::Usage(format!("cannot open {}: {e}", flow_path.display())))?;
    let (records, summary) =
        parse_flow_csv(std::io::BufReader::new(file), &schema).map_err(AppError::usage)?;
    if summary.skipped > 0 {
        eprintln!("warning: skipped {} malformed rows", summary.skipped);
    }
    if records.is_empty() {
        eprintln!("warning: no flow records parsed; timeline will be empty");
    }
    let spec = WindowSpec {
        window_len: args.window,
        step: args.step,
        range: args.range,
    };
    let seq = window_graphs(&records, &spec).map_err(AppError::usage)?;
    let scope = match args.scope {
        ScopeArg::Giant => TimelineScope::Giant,
        ScopeArg::Full => TimelineScope::Full,
    };
    let timeline = spectral_timeline(&seq, args.k, args.kind.into(), scope, !args.smallest);

    let mut out = OutputSet::new(&args.out);
    let mut csv = Vec::new();
    timeline.write_csv(&mut csv)?;
    out.add("timeline.csv", csv);
    let mut json = serde_json::to_vec_pretty(&timeline.to_json()).expect("timeline json");
    json.push(b'\n');
    out.add("timeline.json", json);
    out.manifest(
        "timeline",
        serde_json::json!({
            "flow": flow_path.display().to_string(),
            "window": args.window,
            "step": args.step,
            "k": args.k,
            "kind": matches!(args.kind, KindArg::Nl).then_some("normalized").unwrap_or("combinatorial"),
            "scope": matches!(args.scope, ScopeArg::Full).then_some("full").unwrap_or("giant"),
            "largest": !args.smallest,
            "range": args.range,
            "schema": schema,
            "parsed": summary.parsed,
            "skipped": summary.skipped,
        }),
        seed,
        vec![digest(&flow_path)?],
    );
    out.flush()
}

fn parse_measure(name: &str, k: usize, top: bool, bottom: bool) -> Result<Measure, AppError> {
    if top && bottom {
        return Err(AppError::Usage(
            "--top and --bottom are mutually exclusive".into(),
        ));
    }
    let m = match name {
        // direction defaults follow the usual pairing: top of L, bottom of NL
        "dlc" => Measure::Dlc { k, top: !bottom },
        "ndlc" => Measure::Ndlc { k, top },
        "lc" => Measure::LaplacianCentrality,
        "nlc" => Measure::NormalizedLaplacianCentrality,
        "pagerank" => Measure::Pagerank,
        "katz" => Measure::Katz,
        "closeness" => Measure::Closeness,
        "betweenness" => Measure::Betweenness,
        other => {
            return Err(AppError::Usage(format!(
                "unknown measure {other:?} (expected dlc, ndlc, lc, nlc, pagerank, katz, closeness, betweenness)"
            )))
        }
    };
    Ok(m)
}

fn load_graph(path: &Path, giant: bool) -> Result<Graph, AppError> {
    let g = Graph::read_edge_list(path)
        .map_err(|e| AppError::Usage(format!("{}: {e}", path.display())))?;
    if giant {
        let (g, _) = g.giant_component().map_err(AppError::usage)?;
        Ok(g)
    } else {
        Ok(g)
    }
}

fn cmd_centrality(args: &CentralityArgs, seed: u64) -> Result<(), AppError> {
    let path = resolve_input(&args.graph);
    let measure = parse_measure(&args.measure, args.k, args.top, args.bottom)?;
    let g = load_graph(&path, args.giant)?;
    let table = measure.score(&g)?;

    let mut out = OutputSet::new(&args.out);
    let mut csv = Vec::new();
    table.write_csv(&mut csv)?;
    out.add("scores.csv", csv);
    let mut json = serde_json::to_vec_pretty(&table.to_json()).expect("score json");
    json.push(b'\n');
    out.add("scores.json", json);
    out.manifest(
        "centrality",
        serde_json::json!({
            "graph": path.display().to_string(),
            "measure": measure,
            "giant": args.giant,
            "vertices": g.vertex_count(),
            "edges": g.edge_count(),
        }),
        seed,
        vec![digest(&path)?],
    );
    out.flush()
}

/// THeLMa parameter file: weights and tau either explicit or generated.
#[derive(Deserialize, Serialize)]
struct ThelmaParamsFile {
    weights: WeightsSpec,
    tau: TauSpec,
    alpha: f64,
}

#[derive(Deserialize, Serialize)]
#[serde(untagged)]
enum WeightsSpec {
    Explicit(Vec<f64>),
    PowerLaw { power_law: PowerLawSpec },
}

#[derive(Deserialize, Serialize)]
struct PowerLawSpec {
    n: usize,
    exponent: f64,
    max_weight: usize,
    seed: u64,
    /// Optionally pin the first weight (a dominant hub).
    #[serde(default)]
    pin_first: Option<f64>,
}

#[derive(Deserialize, Serialize)]
#[serde(untagged)]
enum TauSpec {
    Explicit(Vec<f64>),
    Circadian { circadian: CircadianSpec },
    Constant { constant: ConstantTauSpec },
}

#[derive(Deserialize, Serialize)]
struct CircadianSpec {
    steps: usize,
    cycles: f64,
}

#[derive(Deserialize, Serialize)]
struct ConstantTauSpec {
    steps: usize,
    value: f64,
}

fn build_thelma_params(file: &ThelmaParamsFile) -> Result<ThelmaParams, AppError> {
    let w = match &file.weights {
        WeightsSpec::Explicit(w) => w.clone(),
        WeightsSpec::PowerLaw { power_law } => {
            let mut w = thelma::power_law_weights(
                power_law.n,
                power_law.exponent,
                power_law.max_weight,
                power_law.seed,
            );
            if let (Some(pin), Some(first)) = (power_law.pin_first, w.first_mut()) {
                *first = pin;
            }
            w
        }
    };
    let tau = match &file.tau {
        TauSpec::Explicit(tau) => tau.clone(),
        TauSpec::Circadian { circadian } => {
            thelma::circadian_tau(circadian.steps, circadian.cycles)
        }
        TauSpec::Constant { constant } => vec![constant.value; constant.steps],
    };
    ThelmaParams::new(w, tau, file.alpha).map_err(AppError::usage)
}

fn cmd_thelma(args: &ThelmaArgs, seed: u64) -> Result<(), AppError> {
    let path = resolve_input(&args.params);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| AppError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let file: ThelmaParamsFile =
        serde_json::from_str(&text).map_err(|e| AppError::Usage(format!("bad params: {e}")))?;
    let params = build_thelma_params(&file)?;
    let seq = thelma::generate(&params, seed);
    thelma::write_sequence(&args.out, &seq, &params, seed).map_err(AppError::runtime)?;

    let mut out = OutputSet::new(&args.out);
    out.manifest(
        "thelma",
        serde_json::json!({
            "params_file": path.display().to_string(),
            "vertices": params.vertex_count(),
            "steps": params.steps(),
            "alpha": params.alpha(),
        }),
        seed,
        vec![digest(&path)?],
    );
    out.flush()?;
    println!(
        "generated {} steps over {} vertices",
        params.steps(),
        params.vertex_count()
    );
    Ok(())
}

#[derive(Deserialize)]
struct OrderedConfig {
    graph: PathBuf,
    #[serde(default)]
    giant: bool,
    measure: Measure,
    kind: AnomalyKind,
    #[serde(default)]
    sizes: Option<Vec<usize>>,
    #[serde(default)]
    max_size: Option<usize>,
}

#[derive(Deserialize)]
struct RandomConfig {
    graph: PathBuf,
    #[serde(default)]
    giant: bool,
    measure: Measure,
    k_percents: Vec<f64>,
    trials: usize,
}

#[derive(Deserialize)]
struct TemporalConfig {
    /// Directory produced by `dlc thelma` (or the same layout).
    sequence: PathBuf,
    measures: Vec<Measure>,
    leaves: usize,
    #[serde(default = "default_width")]
    width: f64,
}

fn default_width() -> f64 {
    DEFAULT_COHORT_WIDTH
}

fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| AppError::Usage(format!("bad config: {e}")))
}

fn cmd_experiment(args: &ExperimentArgs, seed: u64) -> Result<(), AppError> {
    let config_path = resolve_input(&args.config);
    let raw_config: serde_json::Value = read_config(&config_path)?;
    let mut out = OutputSet::new(&args.out);
    match args.kind {
        ExperimentKind::Ordered => {
            let cfg: OrderedConfig = read_config(&config_path)?;
            let graph_path = resolve_input(&cfg.graph);
            let g = load_graph(&graph_path, cfg.giant)?;
            let rows = match (&cfg.sizes, cfg.max_size) {
                (Some(sizes), _) => inject_ordered(&g, &cfg.measure, cfg.kind, sizes)?,
                (None, Some(max)) => inject_ordered_up_to(&g, &cfg.measure, cfg.kind, max)?,
                (None, None) => {
                    return Err(AppError::Usage("config needs `sizes` or `max_size`".into()))
                }
            };
            let mut csv = Vec::new();
            writeln!(csv, "size,root_percentile,participant_percentile").expect("write to vec");
            for r in &rows {
                writeln!(
                    csv,
                    "{},{},{}",
                    r.size,
                    r.root_percentile.map(fmt_f64).unwrap_or_default(),
                    fmt_f64(r.participant_percentile)
                )
                .expect("write to vec");
            }
            out.add("curve.csv", csv);
            out.manifest(
                "experiment-ordered",
                serde_json::json!({"config": raw_config, "graph_vertices": g.vertex_count()}),
                seed,
                vec![digest(&config_path)?, digest(&graph_path)?],
            );
        }
        ExperimentKind::Random => {
            let cfg: RandomConfig = read_config(&config_path)?;
            let graph_path = resolve_input(&cfg.graph);
            let g = load_graph(&graph_path, cfg.giant)?;
            let summary = inject_random_star(&g, &cfg.measure, &cfg.k_percents, cfg.trials, seed)?;
            let mut csv = Vec::new();
            summary.write_csv(&mut csv)?;
            out.add("summary.csv", csv);
            out.manifest(
                "experiment-random",
                serde_json::json!({"config": raw_config, "graph_vertices": g.vertex_count()}),
                seed,
                vec![digest(&config_path)?, digest(&graph_path)?],
            );
        }
        ExperimentKind::Temporal => {
            let cfg: TemporalConfig = read_config(&config_path)?;
            let seq_dir = resolve_input(&cfg.sequence);
            let (seq, seq_manifest) = thelma::read_sequence(&seq_dir).map_err(AppError::usage)?;
            let weights: Vec<(String, f64)> = seq_manifest
                .params
                .weights()
                .iter()
                .enumerate()
                .map(|(i, &w)| (i.to_string(), w))
                .collect();
            let anomaly = select_core_anomaly(&seq, Some(&weights), cfg.leaves, seed)?;
            let report = temporal_experiment(&seq, &anomaly, &cfg.measures, cfg.width)?;
            let mut samples = Vec::new();
            report.write_samples_csv(&mut samples)?;
            out.add("gap_samples.csv", samples);
            let mut cdf = Vec::new();
            report.write_cdf_csv(&mut cdf)?;
            out.add("gap_cdf.csv", cdf);
            let mut anomaly_json = serde_json::to_vec_pretty(&serde_json::json!({
                "anomaly": anomaly,
                "mean_cohort_size": report.mean_cohort_size,
            }))
            .expect("anomaly json");
            anomaly_json.push(b'\n');
            out.add("anomaly.json", anomaly_json);
            out.manifest(
                "experiment-temporal",
                serde_json::json!({"config": raw_config, "steps": seq.len()}),
                seed,
                vec![digest(&config_path)?],
            );
        }
    }
    out.flush()
}

fn fmt_f64(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{x:.1}")
    } else {
        format!("{x}")
    }
}
