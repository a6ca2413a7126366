//! Command-line interface. Each command writes its outputs and a
//! `manifest.json` into `--output-dir`.

use std::collections::HashMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::aggregate::{self, EditionComponents, DEFAULT_K_TOP};
use crate::error::{Error, Result};
use crate::friendship::{self, ExportFormat, DEFAULT_FRIENDS};
use crate::google::{self, IterationParams, DEFAULT_ALPHA, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::graph::{load_edge_list, read_subset_entries, DirectedGraph, LabelMap, LoadOptions};
use crate::io;
use crate::manifest::RunManifest;
use crate::ordering;
use crate::regomax::{self, ReducedGoogleMatrix, ReductionParams};
use crate::sensitivity::{self, Scheme, SensitivityContext, SensitivityParams, DEFAULT_DELTA};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNCONVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "regomax",
    version,
    about = "PageRank, CheiRank, 2DRank and reduced Google matrix analysis"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Damping factor, in (0.5, 1).
    #[arg(long, global = true, default_value_t = DEFAULT_ALPHA, value_parser = parse_alpha)]
    pub alpha: f64,
    /// L1 residual bound of the power iterations.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL, value_parser = parse_positive)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_ITER, value_parser = parse_count)]
    pub max_iter: usize,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_parser = parse_count)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value = "regomax-out")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank the nodes of a graph.
    Rank(RankArgs),
    /// Reduce the Google matrix onto a node subset.
    Reduce(ReduceArgs),
    /// Link sensitivities of a reduced PageRank.
    Sens(SensArgs),
    /// Aggregate rank tables or reduced matrices over editions.
    Aggregate(AggregateArgs),
    /// Friendship network of a reduced matrix.
    Friends(FriendsArgs),
}

#[derive(Debug, Args)]
pub struct GraphInput {
    /// Edge list, `src<TAB>dst` per line.
    #[arg(long)]
    pub graph: PathBuf,
    /// Node names, `index<TAB>name` per line.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Pagerank,
    Cheirank,
    #[value(name = "2drank")]
    TwoDRank,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub input: GraphInput,
    #[arg(long, value_enum, default_value = "pagerank")]
    pub algorithm: Algorithm,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub input: GraphInput,
    /// Subset file, one name or index per line, in basis order.
    #[arg(long)]
    pub subset: PathBuf,
    #[arg(long, value_parser = parse_positive)]
    pub series_tol: Option<f64>,
    #[arg(long, value_parser = parse_count)]
    pub series_max: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SensArgs {
    /// Directory written by `reduce`.
    #[arg(long)]
    pub reduced: PathBuf,
    /// Source node `u` of the perturbed links.
    #[arg(long)]
    pub source: String,
    /// Comma-separated link targets (default: every node `u` links to).
    #[arg(long, value_delimiter = ',')]
    pub targets: Vec<String>,
    /// Comma-separated observed nodes (default: the whole basis).
    #[arg(long, value_delimiter = ',')]
    pub observe: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_DELTA, value_parser = parse_delta)]
    pub delta: f64,
    #[arg(long, default_value = "central", value_parser = parse_scheme)]
    pub scheme: Scheme,
    /// One row per link target, observed on the target itself.
    #[arg(long)]
    pub diagonal_only: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AggregateMode {
    Theta,
    Average,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    #[arg(long, value_enum)]
    pub mode: AggregateMode,
    /// Theta: edition table file, or a directory of `.tsv` tables.
    #[arg(long)]
    pub tables: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_K_TOP, value_parser = parse_count)]
    pub k_top: usize,
    /// Average: one `reduce` directory per edition (named after the directory).
    #[arg(long)]
    pub reduced: Vec<PathBuf>,
    /// Average: canonical basis, one name per line (default: first edition's basis).
    #[arg(long)]
    pub basis: Option<PathBuf>,
    /// Average: `edition<TAB>local_name<TAB>canonical_name` mapping.
    #[arg(long)]
    pub name_map: Option<PathBuf>,
    /// Average: `edition<TAB>canonical_name<TAB>present{0,1}` mask.
    #[arg(long)]
    pub presence: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FriendsFormat {
    Dot,
    Json,
    Both,
}

#[derive(Debug, Args)]
pub struct FriendsArgs {
    #[arg(long)]
    pub reduced: PathBuf,
    /// `canonical_name<TAB>group<TAB>leader{0,1}` per line.
    #[arg(long)]
    pub groups: PathBuf,
    /// Friends kept per expanded node.
    #[arg(long = "f", default_value_t = DEFAULT_FRIENDS, value_parser = parse_count)]
    pub friends: usize,
    #[arg(long, value_enum, default_value = "both")]
    pub format: FriendsFormat,
}

fn parse_alpha(s: &str) -> std::result::Result<f64, String> {
    let alpha: f64 = s.parse().map_err(|e| format!("{e}"))?;
    google::check_alpha(alpha).map_err(|e| e.to_string())?;
    Ok(alpha)
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        Ok(x) => Err(format!("must be a positive number, got {x}")),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_count(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be >= 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_delta(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x < 1.0 => Ok(x),
        Ok(x) => Err(format!("must lie in (0, 1), got {x}")),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_scheme(s: &str) -> std::result::Result<Scheme, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.threads.unwrap_or(0))
        .build()
        .expect("thread pool");
    match pool.install(|| execute(&cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotConverged { .. } => EXIT_UNCONVERGED,
        Error::InvalidParameter(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

pub fn execute(cli: &Cli) -> Result<i32> {
    let g = &cli.global;
    let iteration = IterationParams::new(g.tol, g.max_iter)?;
    match &cli.command {
        Command::Rank(a) => cmd_rank(g, iteration, a),
        Command::Reduce(a) => cmd_reduce(g, iteration, a),
        Command::Sens(a) => cmd_sens(g, iteration, a),
        Command::Aggregate(a) => cmd_aggregate(g, iteration, a),
        Command::Friends(a) => cmd_friends(g, a),
    }
}

fn base_manifest(command: &str, g: &GlobalArgs) -> RunManifest {
    let mut m = RunManifest::new(command);
    m.param("alpha", g.alpha)
        .param("tol", g.tol)
        .param("max_iter", g.max_iter);
    m
}

fn prepare_output(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))
}

fn load_graph(input: &GraphInput, manifest: &mut RunManifest) -> Result<DirectedGraph> {
    let (graph, report) = load_edge_list(io::open(&input.graph)?, LoadOptions::default())?;
    log::info!(
        "loaded {} nodes, {} edges ({} self-loops dropped, {} duplicates collapsed)",
        graph.node_count(),
        graph.edge_count(),
        report.self_loops_dropped,
        report.duplicates_collapsed
    );
    manifest.add_input(&input.graph)?;
    match &input.labels {
        Some(path) => {
            let labels = LabelMap::read(io::open(path)?)?;
            manifest.add_input(path)?;
            graph.with_labels(labels)
        }
        None => Ok(graph),
    }
}

fn cmd_rank(g: &GlobalArgs, params: IterationParams, a: &RankArgs) -> Result<i32> {
    let mut manifest = base_manifest("rank", g);
    let graph = load_graph(&a.input, &mut manifest)?;
    let algorithm = a
        .algorithm
        .to_possible_value()
        .expect("named")
        .get_name()
        .to_owned();
    manifest.param("algorithm", &algorithm);

    let op = google::GoogleOperator::new(&graph, g.alpha)?;
    let (order, probabilities, converged) = match a.algorithm {
        Algorithm::Pagerank => {
            let pr = google::pagerank(&op, params);
            (pr.ordering, pr.probabilities, pr.converged)
        }
        Algorithm::Cheirank => {
            let cr = google::cheirank(&graph, g.alpha, params)?;
            (cr.ordering, cr.probabilities, cr.converged)
        }
        Algorithm::TwoDRank => {
            let pr = google::pagerank(&op, params);
            let cr = google::cheirank(&graph, g.alpha, params)?;
            let order = ordering::two_d_rank(&pr.ordering, &cr.ordering)?;
            (order, pr.probabilities, pr.converged && cr.converged)
        }
    };

    prepare_output(&g.output_dir)?;
    let path = g.output_dir.join("rank.tsv");
    io::write_rank_table(io::create(&path)?, &order, &probabilities, |k| {
        graph.display_name(k)
    })?;
    manifest.write(&g.output_dir)?;
    if converged {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "warning: {algorithm} did not converge to tol {:e} in {} iterations",
            g.tol, g.max_iter
        );
        Ok(EXIT_UNCONVERGED)
    }
}

fn cmd_reduce(g: &GlobalArgs, iteration: IterationParams, a: &ReduceArgs) -> Result<i32> {
    let mut manifest = base_manifest("reduce", g);
    let graph = load_graph(&a.input, &mut manifest)?;
    let entries = read_subset_entries(io::open(&a.subset)?)?;
    manifest.add_input(&a.subset)?;
    let subset = graph.resolve_subset(&entries)?;

    let mut params = ReductionParams::with_alpha(g.alpha);
    params.eigen = iteration;
    if let Some(tol) = a.series_tol {
        params.series_tol = tol;
    }
    if let Some(max) = a.series_max {
        params.series_max = max;
    }
    manifest
        .param("series_tol", params.series_tol)
        .param("series_max", params.series_max)
        .param("block_width", params.block_width);

    let m = regomax::compute_components(&graph, &subset, params)?;
    if !m.diagnostics.series_unconverged.is_empty() {
        log::warn!(
            "{} G_qr columns reached series_max before series_tol",
            m.diagnostics.series_unconverged.len()
        );
    }
    io::export_reduced(&m, &g.output_dir)?;
    manifest.write(&g.output_dir)?;
    Ok(EXIT_OK)
}

/// Position of a name (or, failing that, a decimal position) in a basis.
fn resolve_in_basis(names: &[String], entry: &str) -> Result<usize> {
    let entry = entry.trim();
    if let Some(k) = names.iter().position(|n| n == entry) {
        return Ok(k);
    }
    match entry.parse::<usize>() {
        Ok(k) if k < names.len() => Ok(k),
        Ok(k) => Err(Error::IndexOutOfRange {
            index: k,
            node_count: names.len(),
        }),
        Err(_) => Err(Error::UnknownName(entry.to_owned())),
    }
}

fn cmd_sens(g: &GlobalArgs, iteration: IterationParams, a: &SensArgs) -> Result<i32> {
    let mut manifest = base_manifest("sens", g);
    let m = io::import_reduced(&a.reduced)?;
    manifest.add_input(&a.reduced)?;
    let n = m.n_r();
    let u = resolve_in_basis(&m.names, &a.source)?;
    let g_r = m.g_r();
    let targets = if a.targets.is_empty() {
        (0..n).filter(|&c| c != u && g_r[(c, u)] > 0.0).collect()
    } else {
        a.targets
            .iter()
            .map(|t| resolve_in_basis(&m.names, t))
            .collect::<Result<Vec<_>>>()?
    };
    let observe = if a.observe.is_empty() {
        (0..n).collect()
    } else {
        a.observe
            .iter()
            .map(|t| resolve_in_basis(&m.names, t))
            .collect::<Result<Vec<_>>>()?
    };
    manifest
        .param("source", &m.names[u])
        .param(
            "targets",
            targets.iter().map(|&c| &m.names[c]).collect::<Vec<_>>(),
        )
        .param("delta", a.delta)
        .param("scheme", a.scheme)
        .param("diagonal_only", a.diagonal_only);

    let params = SensitivityParams {
        delta: a.delta,
        scheme: a.scheme,
        pagerank: iteration,
    };
    let ctx = SensitivityContext::new(g_r, params)?;
    let observe = if a.diagonal_only { vec![u] } else { observe };
    let results = sensitivity::sensitivity_table(&ctx, u, &targets, &observe)?;

    prepare_output(&g.output_dir)?;
    let path = g.output_dir.join("sensitivity.tsv");
    io::write_sensitivity(io::create(&path)?, &results, &m.names, a.diagonal_only)?;
    manifest.write(&g.output_dir)?;
    Ok(EXIT_OK)
}

fn read_tables(
    path: &Path,
    manifest: &mut RunManifest,
) -> Result<Vec<aggregate::EditionRankTable>> {
    if !path.is_dir() {
        manifest.add_input(path)?;
        return aggregate::read_edition_tables(io::open(path)?);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| Error::file(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tsv"))
        .collect();
    files.sort();
    let mut tables = Vec::new();
    for file in files {
        manifest.add_input(&file)?;
        tables.extend(aggregate::read_edition_tables(io::open(&file)?)?);
    }
    Ok(tables)
}

fn cmd_aggregate(g: &GlobalArgs, iteration: IterationParams, a: &AggregateArgs) -> Result<i32> {
    let mut manifest = base_manifest("aggregate", g);
    match a.mode {
        AggregateMode::Theta => {
            let path = a
                .tables
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("--mode theta needs --tables".into()))?;
            manifest.param("mode", "theta").param("k_top", a.k_top);
            let tables = read_tables(path, &mut manifest)?;
            let scores = aggregate::theta_scores(&tables, a.k_top)?;
            prepare_output(&g.output_dir)?;
            aggregate::write_theta(io::create(&g.output_dir.join("theta.tsv"))?, &scores)?;
        }
        AggregateMode::Average => {
            if a.reduced.is_empty() {
                return Err(Error::InvalidParameter(
                    "--mode average needs --reduced".into(),
                ));
            }
            manifest.param("mode", "average");
            let mut matrices = Vec::new();
            for dir in &a.reduced {
                let edition = dir
                    .file_name()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| dir.display().to_string());
                matrices.push((edition, io::import_reduced(dir)?));
                manifest.add_input(dir)?;
            }
            let basis = match &a.basis {
                Some(path) => {
                    manifest.add_input(path)?;
                    read_subset_entries(io::open(path)?)?
                }
                None => matrices[0].1.names.clone(),
            };
            let name_map = match &a.name_map {
                Some(path) => {
                    manifest.add_input(path)?;
                    aggregate::read_name_map(io::open(path)?)?
                }
                None => HashMap::new(),
            };
            let presence = match &a.presence {
                Some(path) => {
                    manifest.add_input(path)?;
                    aggregate::read_presence(io::open(path)?)?
                }
                None => HashMap::new(),
            };
            let editions = matrices
                .iter()
                .map(|(edition, m)| embed_edition(edition, m, &basis, &name_map, &presence))
                .collect::<Result<Vec<_>>>()?;
            let avg = aggregate::average_reduced(&basis, &editions)?;
            let pr = aggregate::pagerank_of_average(&avg, iteration)?
                .require_converged("averaged pagerank")?;

            prepare_output(&g.output_dir)?;
            for (file, matrix) in [
                ("G_R.csv", &avg.matrix),
                ("G_rr.csv", &avg.g_rr),
                ("G_pr.csv", &avg.g_pr),
                ("G_qr.csv", &avg.g_qr),
            ] {
                io::write_matrix_csv(io::create(&g.output_dir.join(file))?, &basis, matrix)?;
            }
            io::write_rank_table(
                io::create(&g.output_dir.join("pagerank.tsv"))?,
                &pr.ordering,
                &pr.probabilities,
                |k| basis[k].clone(),
            )?;
        }
    }
    manifest.write(&g.output_dir)?;
    Ok(EXIT_OK)
}

fn embed_edition(
    edition: &str,
    m: &ReducedGoogleMatrix,
    basis: &[String],
    name_map: &HashMap<(String, String), String>,
    presence: &HashMap<(String, String), bool>,
) -> Result<EditionComponents> {
    let canonical = |local: &str| {
        name_map
            .get(&(edition.to_owned(), local.to_owned()))
            .cloned()
            .unwrap_or_else(|| local.to_owned())
    };
    let mut e = EditionComponents::embed(edition, m, basis, Some(&canonical))?;
    for (k, name) in basis.iter().enumerate() {
        if presence.get(&(edition.to_owned(), name.clone())) == Some(&false) {
            e.presence[k] = false;
        }
    }
    Ok(e)
}

fn cmd_friends(g: &GlobalArgs, a: &FriendsArgs) -> Result<i32> {
    let mut manifest = RunManifest::new("friends");
    let m = io::import_reduced(&a.reduced)?;
    manifest.add_input(&a.reduced)?;
    let rows = friendship::read_groups(io::open(&a.groups)?)?;
    manifest.add_input(&a.groups)?;
    let format = a
        .format
        .to_possible_value()
        .expect("named")
        .get_name()
        .to_owned();
    manifest.param("f", a.friends).param("format", format);

    let (groups, leaders) = friendship::assign_groups(&m.names, &rows)?;
    let network = friendship::network_of_reduced(&m, &groups, &leaders, a.friends)?;

    prepare_output(&g.output_dir)?;
    if matches!(a.format, FriendsFormat::Dot | FriendsFormat::Both) {
        let path = g.output_dir.join("friendship.dot");
        network.export(ExportFormat::Dot, io::create(&path)?)?;
    }
    if matches!(a.format, FriendsFormat::Json | FriendsFormat::Both) {
        let path = g.output_dir.join("friendship.json");
        network.export(ExportFormat::Json, io::create(&path)?)?;
    }
    manifest.write(&g.output_dir)?;
    Ok(EXIT_OK)
}

/// Parses a rank table into `(index, name, probability)` rows.
pub fn read_rank_table(text: &str) -> Result<Vec<(usize, String, f64)>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate().skip(1) {
        let fields: Vec<&str> = line.split('\t').collect();
        let [_, index, name, p] = fields[..] else {
            return Err(Error::Parse {
                line: lineno + 1,
                reason: "expected rank<TAB>index<TAB>name<TAB>probability".into(),
            });
        };
        let parse_err = |reason: String| Error::Parse {
            line: lineno + 1,
            reason,
        };
        rows.push((
            index.parse().map_err(|e| parse_err(format!("{e}")))?,
            name.to_owned(),
            p.parse().map_err(|e| parse_err(format!("{e}")))?,
        ));
    }
    Ok(rows)
}
