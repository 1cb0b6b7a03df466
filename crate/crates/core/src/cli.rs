//! Batch front-end: configuration, replicate runs and output files.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use crate::config::{floor_power, GeneratorParams, ValidationErrors, WeightMatrix, WeightModel};
use crate::error::Error;
use crate::generation::{generate, Generated, RewireSummary};
use crate::io::{write_assignment, write_edges};
use crate::metrics::{
    ccdf_report, hypergraph_modularity, two_section_modularity, type_histogram, CcdfReport,
    Partition, TypeCounts, TypeWeights,
};
use crate::rewiring::RewireWarning;

/// Default output directory when `out` is not given.
pub const OUTPUT_DIR_ENV: &str = "HABCD_OUTPUT_DIR";
pub const DEFAULT_PREFIX: &str = "habcd";

pub const DEFAULT_ZETA: f64 = 0.5;
pub const DEFAULT_TAU: f64 = 0.75;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid parameters: {0}")]
    Validation(#[from] ValidationErrors),
    #[error("generation failed: {0}")]
    Generation(Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Generation(_) => 3,
            CliError::Io(_) => 5,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Validation(v) => CliError::Validation(v),
            other => CliError::Generation(other),
        }
    }
}

/// Exit status of a run that produced all its outputs.
pub const EXIT_REWIRING_EXHAUSTED: u8 = 4;

/// Generate hypergraphs with power-law degrees and ground-truth communities.
///
/// Flags override entries of the `--config` file. Keys: n, gamma, delta, D or
/// zeta, beta, s, S or tau, xi, L, q, w_model, simple, seed, replicates, out.
#[derive(Debug, Default, Parser)]
#[command(name = "habcd", version)]
pub struct Args {
    /// key=value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of nodes.
    #[arg(long)]
    pub n: Option<usize>,
    /// Degree power-law exponent.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Minimum degree.
    #[arg(long)]
    pub delta: Option<u32>,
    /// Maximum degree.
    #[arg(long = "D", conflicts_with = "zeta")]
    pub max_degree: Option<u32>,
    /// Maximum degree as floor(n^zeta).
    #[arg(long)]
    pub zeta: Option<f64>,
    /// Community size power-law exponent.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Minimum community size.
    #[arg(long = "s")]
    pub min_community: Option<usize>,
    /// Maximum community size.
    #[arg(long = "S", conflicts_with = "tau")]
    pub max_community: Option<usize>,
    /// Maximum community size as floor(n^tau).
    #[arg(long)]
    pub tau: Option<f64>,
    /// Background noise level.
    #[arg(long)]
    pub xi: Option<f64>,
    /// Largest hyperedge size; volume is uniform over 2..=L unless q is given.
    #[arg(long = "L")]
    pub max_edge_size: Option<usize>,
    /// Comma-separated volume shares q_1,...,q_L.
    #[arg(long)]
    pub q: Option<String>,
    /// majority, linear, strict, or a path to a triangular matrix file.
    #[arg(long = "w-model")]
    pub w_model: Option<String>,
    /// Produce a multi-hypergraph (skip rewiring).
    #[arg(long)]
    pub multi: bool,
    /// Base seed; replicate r uses seed + r.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of independent replicates.
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Output path prefix.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Omit degree, community-size and volume-share tables from the report.
    #[arg(long)]
    pub no_stats: bool,
    /// Omit modularity values from the report.
    #[arg(long)]
    pub no_modularity: bool,
    /// Omit type histograms from the report.
    #[arg(long)]
    pub no_histograms: bool,
}

/// Fully resolved run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Parameters of replicate 0; replicate `r` adds `r` to the seed.
    pub params: GeneratorParams,
    pub replicates: usize,
    pub out: PathBuf,
    pub stats: bool,
    pub modularity: bool,
    pub histograms: bool,
}

const KEYS: &[&str] = &[
    "n",
    "gamma",
    "delta",
    "D",
    "zeta",
    "beta",
    "s",
    "S",
    "tau",
    "xi",
    "L",
    "q",
    "w_model",
    "simple",
    "seed",
    "replicates",
    "out",
];

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", i + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(CliError::Usage(format!(
                "config line {}: unknown key `{key}`",
                i + 1
            )));
        }
        if map
            .insert(key.to_string(), value.trim().to_string())
            .is_some()
        {
            return Err(CliError::Usage(format!(
                "config line {}: repeated key `{key}`",
                i + 1
            )));
        }
    }
    Ok(map)
}

fn set(
    map: &mut BTreeMap<String, String>,
    key: &str,
    value: Option<impl ToString>,
    displaces: Option<&str>,
) {
    if let Some(v) = value {
        map.insert(key.to_string(), v.to_string());
        if let Some(other) = displaces {
            map.remove(other);
        }
    }
}

fn parse<T: std::str::FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    map.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|e| CliError::Usage(format!("bad value `{v}` for {key}: {e}")))
        })
        .transpose()
}

fn parse_bool(map: &BTreeMap<String, String>, key: &str) -> Result<Option<bool>, CliError> {
    map.get(key)
        .map(|v| match v.to_ascii_lowercase().as_str() {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => Err(CliError::Usage(format!(
                "bad value `{v}` for {key}: expected true or false"
            ))),
        })
        .transpose()
}

fn parse_q(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Usage(format!("bad entry `{t}` in q: {e}")))
        })
        .collect()
}

/// Reads a triangular matrix file: line `k` holds `w[c, k]` for the
/// majority counts `c` of size `k`, separated by spaces or commas.
pub fn read_weight_matrix(path: &Path) -> Result<WeightMatrix, CliError> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>().map_err(|e| {
                    CliError::Usage(format!("bad entry `{t}` in {}: {e}", path.display()))
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    Ok(WeightMatrix::from_rows(&rows)?)
}

fn default_out() -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir).join(DEFAULT_PREFIX),
        _ => PathBuf::from(DEFAULT_PREFIX),
    }
}

impl RunConfig {
    /// Resolves merged `key=value` entries into a run description.
    pub fn from_map(map: &BTreeMap<String, String>, base_dir: &Path) -> Result<Self, CliError> {
        if map.contains_key("D") && map.contains_key("zeta") {
            return Err(CliError::Usage("give either D or zeta, not both".into()));
        }
        if map.contains_key("S") && map.contains_key("tau") {
            return Err(CliError::Usage("give either S or tau, not both".into()));
        }
        let n: usize =
            parse(map, "n")?.ok_or_else(|| CliError::Usage("missing required key n".into()))?;
        let mut params = GeneratorParams::standard(n);
        if let Some(v) = parse(map, "gamma")? {
            params.gamma = v;
        }
        if let Some(v) = parse(map, "delta")? {
            params.min_degree = v;
        }
        params.max_degree = match parse::<u32>(map, "D")? {
            Some(d) => d,
            None => floor_power(n, parse(map, "zeta")?.unwrap_or(DEFAULT_ZETA)) as u32,
        };
        if let Some(v) = parse(map, "beta")? {
            params.beta = v;
        }
        if let Some(v) = parse(map, "s")? {
            params.min_community = v;
        }
        params.max_community = match parse::<usize>(map, "S")? {
            Some(s) => s,
            None => floor_power(n, parse(map, "tau")?.unwrap_or(DEFAULT_TAU)),
        };
        if let Some(v) = parse(map, "xi")? {
            params.xi = v;
        }
        let max_size: Option<usize> = parse(map, "L")?;
        match (map.get("q"), max_size) {
            (Some(q), l) => {
                params.q = parse_q(q)?;
                if let Some(l) = l.filter(|&l| l != params.q.len()) {
                    return Err(CliError::Usage(format!(
                        "L = {l} but q has {} entries",
                        params.q.len()
                    )));
                }
            }
            (None, Some(l)) => params.q = GeneratorParams::uniform_sizes(l),
            (None, None) => {}
        }
        let max_size = params.max_edge_size();
        let w_model = map.get("w_model").map_or("majority", String::as_str);
        params.w = match w_model.parse::<WeightModel>() {
            Ok(model) => WeightMatrix::standard(model, max_size),
            Err(_) => read_weight_matrix(&base_dir.join(w_model))?,
        };
        if let Some(v) = parse_bool(map, "simple")? {
            params.simple = v;
        }
        if let Some(v) = parse(map, "seed")? {
            params.seed = v;
        }
        let replicates = parse(map, "replicates")?.unwrap_or(1);
        if replicates == 0 {
            return Err(CliError::Usage("replicates must be at least 1".into()));
        }
        let out = map.get("out").map_or_else(default_out, PathBuf::from);
        Ok(Self {
            params,
            replicates,
            out,
            stats: true,
            modularity: true,
            histograms: true,
        })
    }

    pub fn from_args(args: &Args) -> Result<Self, CliError> {
        let (mut map, base_dir) = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
                (parse_config_text(&text)?, dir)
            }
            None => (BTreeMap::new(), PathBuf::new()),
        };
        set(&mut map, "n", args.n, None);
        set(&mut map, "gamma", args.gamma, None);
        set(&mut map, "delta", args.delta, None);
        set(&mut map, "D", args.max_degree, Some("zeta"));
        set(&mut map, "zeta", args.zeta, Some("D"));
        set(&mut map, "beta", args.beta, None);
        set(&mut map, "s", args.min_community, None);
        set(&mut map, "S", args.max_community, Some("tau"));
        set(&mut map, "tau", args.tau, Some("S"));
        set(&mut map, "xi", args.xi, None);
        set(&mut map, "L", args.max_edge_size, None);
        set(&mut map, "q", args.q.as_ref(), None);
        if args.max_edge_size.is_some() && args.q.is_none() {
            map.remove("q");
        }
        set(&mut map, "w_model", args.w_model.as_ref(), None);
        if args.multi {
            map.insert("simple".into(), "false".into());
        }
        set(&mut map, "seed", args.seed, None);
        set(&mut map, "replicates", args.replicates, None);
        set(
            &mut map,
            "out",
            args.out.as_ref().map(|p| p.display()),
            None,
        );
        let mut config = Self::from_map(&map, &base_dir)?;
        config.stats = !args.no_stats;
        config.modularity = !args.no_modularity;
        config.histograms = !args.no_histograms;
        Ok(config)
    }

    fn output_path(&self, replicate: usize, suffix: &str) -> PathBuf {
        let mut name = self
            .out
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| DEFAULT_PREFIX.to_string());
        if self.replicates > 1 {
            name.push_str(&format!("_r{replicate}"));
        }
        name.push('_');
        name.push_str(suffix);
        self.out.with_file_name(name)
    }

    pub fn edges_path(&self, replicate: usize) -> PathBuf {
        self.output_path(replicate, "edges.txt")
    }

    pub fn assignment_path(&self, replicate: usize) -> PathBuf {
        self.output_path(replicate, "assignment.txt")
    }

    pub fn report_path(&self) -> PathBuf {
        let mut name = self
            .out
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| DEFAULT_PREFIX.to_string());
        name.push_str("_report.json");
        self.out.with_file_name(name)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModularityValues {
    pub majority: f64,
    pub linear: f64,
    pub strict: f64,
    pub two_section: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TypeRow {
    pub c: usize,
    pub d: usize,
    pub count: u64,
    pub fraction: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplicateReport {
    pub replicate: usize,
    pub seed: u64,
    pub communities: usize,
    pub edges: usize,
    pub volume: u64,
    pub edges_by_size: Vec<u64>,
    pub rewiring: Option<RewireSummary>,
    pub warning: Option<RewireWarning>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modularity: Option<ModularityValues>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub types: Option<Vec<TypeRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distributions: Option<CcdfReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation (zero for a single value).
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub communities: MeanStd,
    pub edges: MeanStd,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub params: GeneratorParams,
    pub replicates: Vec<ReplicateReport>,
    pub summary: Summary,
}

fn type_rows(counts: &TypeCounts) -> Vec<TypeRow> {
    counts
        .iter()
        .filter(|&(_, d, _)| counts.size_total(d) > 0)
        .map(|(c, d, count)| TypeRow {
            c,
            d,
            count,
            fraction: counts.fraction(c, d),
        })
        .collect()
}

pub fn replicate_report(
    config: &RunConfig,
    replicate: usize,
    params: &GeneratorParams,
    g: &Generated,
) -> Result<ReplicateReport, CliError> {
    let h = &g.hypergraph;
    let modularity = if config.modularity && !h.edges.is_empty() {
        let truth = Partition::from(&g.assignment);
        let max_size = h.max_edge_size();
        let q = |model| hypergraph_modularity(h, &truth, &TypeWeights::standard(model, max_size));
        Some(ModularityValues {
            majority: q(WeightModel::Majority)?,
            linear: q(WeightModel::Linear)?,
            strict: q(WeightModel::Strict)?,
            two_section: two_section_modularity(h, &truth).unwrap_or(0.0),
        })
    } else {
        None
    };
    let types = config
        .histograms
        .then(|| type_rows(&type_histogram(h, &g.assignment)));
    let distributions = if config.stats {
        Some(ccdf_report(h, &g.assignment, params)?)
    } else {
        None
    };
    Ok(ReplicateReport {
        replicate,
        seed: params.seed,
        communities: g.assignment.community_count(),
        edges: h.edge_count(),
        volume: h.volume(),
        edges_by_size: h.size_counts(),
        rewiring: g.rewiring,
        warning: g.warning.clone(),
        modularity,
        types,
        distributions,
    })
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Runs every replicate, writing edges and assignment files per replicate
/// and one report. Returns whether any replicate ended with unrepaired
/// hyperedges.
pub fn run(config: &RunConfig) -> Result<bool, CliError> {
    config.params.clone().normalized()?;
    let mut reports = Vec::with_capacity(config.replicates);
    let mut exhausted = false;
    for r in 0..config.replicates {
        let mut params = config.params.clone();
        params.seed = config.params.seed.wrapping_add(r as u64);
        let g = generate(&params)?;
        log::info!(
            "replicate {r}: {} communities, {} hyperedges in {:.3?}",
            g.assignment.community_count(),
            g.hypergraph.edge_count(),
            g.timings.total
        );
        write_edges(&g.hypergraph, create(&config.edges_path(r))?)?;
        write_assignment(&g.assignment, create(&config.assignment_path(r))?)?;
        exhausted |= g.warning.is_some();
        reports.push(replicate_report(config, r, &params, &g)?);
    }
    let communities: Vec<f64> = reports.iter().map(|r| r.communities as f64).collect();
    let edges: Vec<f64> = reports.iter().map(|r| r.edges as f64).collect();
    let report = Report {
        params: config.params.clone(),
        summary: Summary {
            communities: MeanStd::of(&communities),
            edges: MeanStd::of(&edges),
        },
        replicates: reports,
    };
    let mut out = create(&config.report_path())?;
    serde_json::to_writer_pretty(&mut out, &report).map_err(io::Error::from)?;
    io::Write::write_all(&mut out, b"\n")?;
    io::Write::flush(&mut out)?;
    Ok(exhausted)
}

/// Parses the command line, runs, and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = RunConfig::from_args(&args).and_then(|config| run(&config));
    match outcome {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(EXIT_REWIRING_EXHAUSTED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
