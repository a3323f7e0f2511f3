//! Command-line interface: argument definitions and dispatch.
//!
//! Node indices are 0-based everywhere. Tabular output is CSV with a header
//! row and LF line endings; see [`crate::table`].

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use torus_spectra_core::bounds::{self, DEFAULT_TERMS};
use torus_spectra_core::deletion::{self, Removal, ROOT_TOL};
use torus_spectra_core::sis::{self, Mode, Seeds, SisParams, DEFAULT_RNG_SEED};
use torus_spectra_core::spectral::{self, Spectrum, MULTIPLICITY_TOL};
use torus_spectra_core::topology::build_torus;
use torus_spectra_core::walks;
use torus_spectra_core::{Graph, TorusSpec};

use crate::edgelist;
use crate::manifest::RunManifest;
use crate::sweeps::{self, SisScenario, WalkKey};
use crate::table::{num, opt, Table};

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "torus-spectra",
    version,
    about = "Spectra, walk counts, node/edge deletion and SIS spreading on torus networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Adjacency or Laplacian eigenvalues.
    Spectra(SpectraArgs),
    /// det(xI - A) of a torus, optionally with nodes or an edge removed.
    Charpoly(CharpolyArgs),
    /// Closed and point-to-point walk counts on the torus or the square lattice.
    Walks(WalksArgs),
    /// Spectral radius after removing nodes or an edge.
    ///
    /// CSV columns: removal,rho_analytic,rho_oracle,discrepancy.
    Remove(RemoveArgs),
    /// Lattice and Stirling lower bounds, torus vs lattice walk tables.
    ///
    /// Percent differences are 100 (torus - lattice) / torus.
    Bounds(BoundsArgs),
    /// SIS spreading trajectory. CSV columns: t,infected_mean[,infected_std].
    Sis(SisArgs),
    /// Epidemic threshold verdict rho(A) < delta/beta.
    Threshold(ThresholdArgs),
    /// Data series for figures 1 and 3 to 8.
    Figures(FiguresArgs),
    /// Export a torus, optionally with nodes or an edge removed, as an edge list.
    Graph(GraphArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
}

#[derive(Debug, Args, Serialize)]
pub struct OutputArgs {
    /// Write output here instead of stdout; a run manifest goes to `<path>.manifest.json`.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, global = true, alias = "report")]
    pub format: Option<Format>,
}

/// A torus given by dimension and side length, or a graph read from an edge list.
#[derive(Debug, Args, Serialize)]
pub struct GraphSource {
    /// Torus dimension.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Torus side length.
    #[arg(long, conflicts_with = "edgelist")]
    pub len: Option<usize>,
    /// Edge-list file (`n <count>` header, then `i j` per line).
    #[arg(long)]
    pub edgelist: Option<PathBuf>,
}

enum Source {
    Torus(TorusSpec),
    File(Graph),
}

impl Source {
    fn graph(&self) -> Graph {
        match self {
            Self::Torus(spec) => build_torus(*spec),
            Self::File(g) => g.clone(),
        }
    }
}

impl GraphSource {
    fn resolve(&self) -> Result<Source, CliError> {
        match (&self.edgelist, self.len) {
            (Some(path), _) => {
                Ok(Source::File(edgelist::read_path(path).with_context(|| format!("reading {}", path.display()))?))
            }
            (None, Some(len)) => Ok(Source::Torus(TorusSpec::new(self.dim, len).map_err(anyhow::Error::from)?)),
            (None, None) => Err(CliError::Usage("give --len or --edgelist".into())),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct TorusArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long)]
    pub len: usize,
}

impl TorusArgs {
    fn spec(&self) -> Result<TorusSpec, CliError> {
        Ok(TorusSpec::new(self.dim, self.len).map_err(anyhow::Error::from)?)
    }
}

#[derive(Debug, Args, Serialize)]
#[group(multiple = false)]
pub struct RemovalArgs {
    /// Remove one node.
    #[arg(long)]
    pub node: Option<usize>,
    /// Remove several nodes, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub nodes: Option<Vec<usize>>,
    /// Remove the edge `i:j`.
    #[arg(long, value_parser = parse_edge)]
    pub edge: Option<(usize, usize)>,
}

fn parse_edge(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected i:j, got `{s}`"))?;
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("`{t}` is not a node index"));
    Ok((parse(a)?, parse(b)?))
}

impl RemovalArgs {
    fn removal(&self) -> Option<Removal> {
        if let Some(i) = self.node {
            Some(Removal::Node(i))
        } else if let Some(set) = &self.nodes {
            Some(Removal::Nodes(set.clone()))
        } else {
            self.edge.map(|(i, j)| Removal::Edge(i, j))
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SpectraArgs {
    #[command(flatten)]
    pub source: GraphSource,
    /// Laplacian instead of adjacency.
    #[arg(long)]
    pub laplacian: bool,
    /// Group equal eigenvalues: columns eigenvalue,multiplicity.
    #[arg(long)]
    pub multiplicities: bool,
    /// Use the dense eigensolver even for a torus.
    #[arg(long)]
    pub oracle: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CharpolyArgs {
    #[command(flatten)]
    pub torus: TorusArgs,
    /// Evaluation points.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub x: Vec<f64>,
    #[command(flatten)]
    pub removal: RemovalArgs,
    /// Add the dense determinant and the relative error.
    #[arg(long)]
    pub oracle: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct WalksArgs {
    /// Walk length (for --lattice --closed, rows run over half lengths up to len/2).
    #[arg(long)]
    pub len: usize,
    /// Torus dimension.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Torus side length.
    #[arg(long, conflicts_with = "lattice")]
    pub side: Option<usize>,
    /// Count on the infinite square lattice.
    #[arg(long)]
    pub lattice: bool,
    /// Closed walks.
    #[arg(long)]
    pub closed: bool,
    /// Start node on the torus.
    #[arg(long, requires = "to")]
    pub from: Option<usize>,
    /// End node on the torus.
    #[arg(long, requires = "from")]
    pub to: Option<usize>,
    /// Lattice target point `a,b` (walks start at the origin).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "lattice")]
    pub target: Option<Vec<i64>>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct RemoveArgs {
    #[command(flatten)]
    pub torus: TorusArgs,
    #[command(flatten)]
    pub removal: RemovalArgs,
    /// Bisection tolerance.
    #[arg(long, default_value_t = ROOT_TOL)]
    pub tol: f64,
    /// Skip the dense cross-check.
    #[arg(long)]
    pub no_oracle: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundsTable {
    /// x,torus_resolvent,lattice_truncated,lattice_tail,stirling_lower,stirling_truncated,torus_gap,stirling_gap,chain_holds
    Chain,
    /// half_length,stirling_lower,central_binomial,ratio
    Stirling,
    /// length,torus,lattice,percent_difference for even lengths on one torus
    Walks,
    /// m,torus,lattice,percent_difference for one length across tori
    WalksVsM,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundsArgs {
    #[arg(long, value_enum, default_value_t = BoundsTable::Chain)]
    pub table: BoundsTable,
    /// Torus side length (chain, walks).
    #[arg(long, default_value_t = 5)]
    pub len: usize,
    /// Evaluation points, all > 4 (chain).
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = [6.0, 8.0, 10.0])]
    pub x: Vec<f64>,
    /// Series terms (chain).
    #[arg(long, default_value_t = DEFAULT_TERMS)]
    pub terms: usize,
    /// Largest walk length (walks) or half length (stirling).
    #[arg(long, default_value_t = 20)]
    pub max_length: usize,
    /// Walk length (walks-vs-m).
    #[arg(long, default_value_t = 10)]
    pub length: usize,
    /// Torus side lengths (walks-vs-m).
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = [3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15])]
    pub lens: Vec<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Meanfield,
    Mc,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Meanfield => Mode::MeanField,
            ModeArg::Mc => Mode::MonteCarlo,
        }
    }
}

/// A count (`20`) or an explicit node list (`3,17` or `5,`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SeedsArg {
    Count(usize),
    Nodes(Vec<usize>),
}

fn parse_seeds(s: &str) -> Result<SeedsArg, String> {
    if !s.contains(',') {
        return s.trim().parse().map(SeedsArg::Count).map_err(|_| format!("`{s}` is not a seed count"));
    }
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| format!("`{t}` is not a node index")))
        .collect::<Result<Vec<_>, _>>()
        .map(SeedsArg::Nodes)
}

impl From<&SeedsArg> for Seeds {
    fn from(s: &SeedsArg) -> Self {
        match s {
            SeedsArg::Count(k) => Seeds::Count(*k),
            SeedsArg::Nodes(v) => Seeds::Nodes(v.clone()),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SisArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long, value_enum, default_value_t = ModeArg::Meanfield)]
    pub mode: ModeArg,
    /// Infection probability per attempt.
    #[arg(long)]
    pub beta: f64,
    /// Recovery probability per step.
    #[arg(long)]
    pub delta: f64,
    /// Seed count, or comma-separated seed nodes.
    #[arg(long, value_parser = parse_seeds, default_value = "20")]
    pub seeds: SeedsArg,
    /// Time steps.
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    /// Monte Carlo replicas.
    #[arg(long, default_value_t = 100)]
    pub replicas: usize,
    #[arg(long, default_value_t = DEFAULT_RNG_SEED)]
    pub rng_seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub delta: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct FiguresArgs {
    /// Figure number: 1, 3, 4, 5, 6, 7 or 8.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(["1", "3", "4", "5", "6", "7", "8"]))]
    pub which: String,
    /// Torus side lengths (3, 7, 8).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub lens: Option<Vec<usize>>,
    /// Torus side length (1: default 30, 4: default 7, 5 and 6: default 5).
    #[arg(long)]
    pub len: Option<usize>,
    /// Largest walk length (5, 6).
    #[arg(long, default_value_t = 20)]
    pub max_length: usize,
    /// Walk length (7, 8).
    #[arg(long, default_value_t = 10)]
    pub length: usize,
    /// Skip the dense cross-check (3, 4).
    #[arg(long)]
    pub no_oracle: bool,
    /// Infection probability (1).
    #[arg(long, default_value_t = 0.1)]
    pub beta: f64,
    /// Recovery probabilities (1).
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = [0.2, 0.6])]
    pub deltas: Vec<f64>,
    /// Seed count (1).
    #[arg(long, default_value_t = 20)]
    pub seeds: usize,
    /// Time steps (1).
    #[arg(long, default_value_t = 500)]
    pub steps: usize,
    /// Monte Carlo replicas (1).
    #[arg(long, default_value_t = 100)]
    pub replicas: usize,
    #[arg(long, default_value_t = DEFAULT_RNG_SEED)]
    pub rng_seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct GraphArgs {
    #[command(flatten)]
    pub torus: TorusArgs,
    #[command(flatten)]
    pub removal: RemovalArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Domain(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Domain(_) => 1,
        }
    }
}

macro_rules! domain {
    ($e:expr) => {
        $e.map_err(|e| CliError::Domain(anyhow::Error::from(e)))
    };
}

struct Produced {
    body: String,
    rng_seed: Option<u64>,
}

impl From<Table> for Produced {
    fn from(t: Table) -> Self {
        Self { body: t.to_csv_string(), rng_seed: None }
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Spectra(_) => "spectra",
            Self::Charpoly(_) => "charpoly",
            Self::Walks(_) => "walks",
            Self::Remove(_) => "remove",
            Self::Bounds(_) => "bounds",
            Self::Sis(_) => "sis",
            Self::Threshold(_) => "threshold",
            Self::Figures(_) => "figures",
            Self::Graph(_) => "graph",
        }
    }

    fn output(&self) -> &OutputArgs {
        match self {
            Self::Spectra(a) => &a.out,
            Self::Charpoly(a) => &a.out,
            Self::Walks(a) => &a.out,
            Self::Remove(a) => &a.out,
            Self::Bounds(a) => &a.out,
            Self::Sis(a) => &a.out,
            Self::Threshold(a) => &a.out,
            Self::Figures(a) => &a.out,
            Self::Graph(a) => &a.out,
        }
    }
}

/// Runs one command, writes its output and manifest, and returns the manifest.
pub fn run(cli: &Cli, argv: Vec<String>) -> Result<RunManifest, CliError> {
    let start = Instant::now();
    let produced = match &cli.command {
        Command::Spectra(a) => spectra(a)?,
        Command::Charpoly(a) => charpoly(a)?,
        Command::Walks(a) => walks_cmd(a)?,
        Command::Remove(a) => remove(a)?,
        Command::Bounds(a) => bounds_cmd(a)?,
        Command::Sis(a) => sis_cmd(a)?,
        Command::Threshold(a) => threshold(a)?,
        Command::Figures(a) => figures(a)?,
        Command::Graph(a) => graph(a)?,
    };
    let flags = serde_json::to_value(&cli.command).unwrap_or(serde_json::Value::Null);
    let mut manifest = RunManifest::new(cli.command.name(), argv, flags);
    manifest.rng_seed = produced.rng_seed;
    match &cli.command.output().output {
        Some(path) => {
            write_file(path, &produced.body)?;
            manifest.outputs.push(path.clone());
            manifest.finish(start.elapsed());
            domain!(manifest.write_beside(path))?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            domain!(stdout.write_all(produced.body.as_bytes()).and_then(|_| stdout.flush()))?;
            manifest.finish(start.elapsed());
            eprintln!("manifest: {}", manifest.to_line());
        }
    }
    Ok(manifest)
}

fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn spectra(a: &SpectraArgs) -> Result<Produced, CliError> {
    let spectrum: Spectrum = match a.source.resolve()? {
        Source::Torus(spec) if !a.oracle => {
            if a.laplacian {
                spectral::laplacian_spectrum(spec)
            } else {
                spectral::torus_eigenvalues(spec)
            }
        }
        source => {
            let g = source.graph();
            if a.laplacian {
                domain!(spectral::dense_laplacian_spectrum(&g))?
            } else {
                domain!(spectral::dense_spectrum(&g))?
            }
        }
    };
    let table = if a.multiplicities {
        let mut t = Table::new(["eigenvalue", "multiplicity"]);
        for (value, count) in spectrum.multiplicities(MULTIPLICITY_TOL) {
            t.push([num(value), count.to_string()]);
        }
        t
    } else {
        let mut t = Table::new(["index", "eigenvalue"]);
        for (k, value) in spectrum.eigenvalues().iter().enumerate() {
            t.push([k.to_string(), num(*value)]);
        }
        t
    };
    Ok(table.into())
}

fn removed_graph(spec: TorusSpec, removal: Option<&Removal>) -> Result<Graph, CliError> {
    let torus = build_torus(spec);
    Ok(match removal {
        None => torus,
        Some(Removal::Edge(i, j)) => domain!(torus.delete_edge(*i, *j))?,
        Some(other) => domain!(torus.delete_nodes(&other.removed_nodes()))?.graph,
    })
}

fn charpoly(a: &CharpolyArgs) -> Result<Produced, CliError> {
    let spec = a.torus.spec()?;
    let removal = a.removal.removal();
    let oracle_graph = if a.oracle { Some(removed_graph(spec, removal.as_ref())?) } else { None };
    let mut header = vec!["x", "sign", "log_abs", "value"];
    if a.oracle {
        header.extend(["oracle_value", "relative_error"]);
    }
    let mut table = Table::new(header);
    for &x in &a.x {
        let value = match &removal {
            None => spectral::charpoly_eval_torus(spec, x),
            Some(r) => domain!(deletion::charpoly_after(spec, r, x))?,
        };
        let mut row = vec![value.sign().to_string(), num(value.log_magnitude()), num(value.value())];
        row.insert(0, num(x));
        if let Some(g) = &oracle_graph {
            let reference = domain!(spectral::charpoly_dense(g, x))?;
            row.push(num(reference.value()));
            row.push(num(value.relative_error(reference)));
        }
        table.push(row);
    }
    Ok(table.into())
}

fn walks_cmd(a: &WalksArgs) -> Result<Produced, CliError> {
    if a.lattice {
        if let Some(target) = &a.target {
            let &[x, y] = target.as_slice() else {
                return Err(CliError::Usage("--target takes two coordinates a,b".into()));
            };
            let mut t = Table::new(["length", "count", "parity_mismatch"]);
            for length in 0..=a.len {
                let w = walks::lattice_walks_to(x, y, length);
                t.push([length.to_string(), w.count.to_string(), w.parity_mismatch.to_string()]);
            }
            return Ok(t.into());
        }
        if !a.closed {
            return Err(CliError::Usage("--lattice needs --closed or --target a,b".into()));
        }
        let mut t = Table::new(["length", "half_length", "count"]);
        for half in 0..=a.len / 2 {
            t.push([(2 * half).to_string(), half.to_string(), walks::lattice_closed_walks(half).count.to_string()]);
        }
        return Ok(t.into());
    }
    let side = a.side.ok_or_else(|| CliError::Usage("give --side for a torus or --lattice".into()))?;
    let spec = domain!(TorusSpec::new(a.dim, side))?;
    let mut t = Table::new(["length", "count"]);
    match (a.from, a.to, a.closed) {
        (Some(i), Some(j), false) => {
            for length in 0..=a.len {
                let w = domain!(walks::torus_walks_between_or_exact(spec, i, j, length))?;
                t.push([length.to_string(), w.count.to_string()]);
            }
        }
        (None, None, true) => {
            for length in 0..=a.len {
                t.push([length.to_string(), walks::torus_closed_walks_or_exact(spec, length).count.to_string()]);
            }
        }
        _ => return Err(CliError::Usage("give either --closed or --from i --to j".into())),
    }
    Ok(t.into())
}

fn remove(a: &RemoveArgs) -> Result<Produced, CliError> {
    let spec = a.torus.spec()?;
    let removal = a.removal.removal().ok_or_else(|| CliError::Usage("give --node, --nodes or --edge".into()))?;
    let result = if a.no_oracle {
        domain!(deletion::analytic_result(spec, removal, a.tol))?
    } else {
        domain!(deletion::spectral_radius_after_deletion(spec, removal, a.tol))?
    };
    let mut t = Table::new(["removal", "rho_analytic", "rho_oracle", "discrepancy"]);
    t.push([
        result.removal.to_string(),
        num(result.spectral_radius),
        opt(result.oracle_radius),
        opt(result.discrepancy),
    ]);
    Ok(t.into())
}

fn bounds_cmd(a: &BoundsArgs) -> Result<Produced, CliError> {
    let table = match a.table {
        BoundsTable::Chain => {
            let spec = domain!(TorusSpec::new(2, a.len))?;
            let mut t = Table::new([
                "x",
                "torus_resolvent",
                "lattice_truncated",
                "lattice_tail",
                "stirling_lower",
                "stirling_truncated",
                "torus_gap",
                "stirling_gap",
                "chain_holds",
            ]);
            for &x in &a.x {
                let r = domain!(bounds::bound_chain(spec, x, a.terms))?;
                let s = domain!(bounds::lattice_wgf_lower(x, a.terms))?;
                t.push([
                    num(x),
                    num(r.exact_value),
                    num(r.lattice_value),
                    num(r.lattice_tail),
                    num(r.stirling_value),
                    num(s.truncated),
                    num(r.torus_gap),
                    num(r.stirling_gap),
                    r.chain_holds().to_string(),
                ]);
            }
            t
        }
        BoundsTable::Stirling => {
            let mut t = Table::new(["half_length", "stirling_lower", "central_binomial", "ratio"]);
            for half in 1..=a.max_length.max(1) {
                let bound = domain!(bounds::stirling_binomial_lower(half))?;
                let exact = walks::central_binomial(half);
                let ratio = bound / exact.to_string().parse::<f64>().unwrap_or(f64::INFINITY);
                t.push([half.to_string(), num(bound), exact.to_string(), num(ratio)]);
            }
            t
        }
        BoundsTable::Walks => {
            sweeps::walk_count_table(&domain!(sweeps::walks_by_length(a.len, a.max_length))?, WalkKey::Length)
        }
        BoundsTable::WalksVsM => {
            sweeps::walk_count_table(&domain!(sweeps::walks_by_side(a.length, &a.lens))?, WalkKey::Side)
        }
    };
    Ok(table.into())
}

fn sis_cmd(a: &SisArgs) -> Result<Produced, CliError> {
    let g = a.source.resolve()?.graph();
    let params = domain!(SisParams::new(a.beta, a.delta, a.steps, Seeds::from(&a.seeds)))?;
    let traj = domain!(sweeps::run_sis(&g, &params, a.mode.into(), a.replicas, a.rng_seed))?;
    Ok(Produced { body: sweeps::trajectory_table(&traj).to_csv_string(), rng_seed: Some(a.rng_seed) })
}

/// Rounds to 10 decimals so that e.g. `0.6 / 0.1` prints as `6.0`.
fn tidy(value: f64) -> f64 {
    if value.is_finite() {
        (value * 1e10).round() / 1e10
    } else {
        value
    }
}

fn threshold(a: &ThresholdArgs) -> Result<Produced, CliError> {
    let params = domain!(SisParams::rates(a.beta, a.delta))?;
    let verdict = match a.source.resolve()? {
        Source::Torus(spec) => sis::torus_threshold(spec, &params),
        Source::File(g) => domain!(sis::jacobian_spectral_test(&g, &params))?,
    };
    let (rho, ratio) = (tidy(verdict.rho), tidy(verdict.ratio));
    let body = match a.out.format {
        None => format!("rho={rho:?},ratio={ratio:?},stable={}\n", verdict.stable),
        Some(Format::Csv) => {
            let mut t = Table::new(["rho", "ratio", "stable", "jacobian_top"]);
            t.push([num(rho), num(ratio), verdict.stable.to_string(), num(tidy(verdict.jacobian_top))]);
            t.to_csv_string()
        }
    };
    Ok(Produced { body, rng_seed: None })
}

fn figures(a: &FiguresArgs) -> Result<Produced, CliError> {
    let oracle = !a.no_oracle;
    let table = match a.which.as_str() {
        "1" => {
            let scenario = SisScenario {
                len: a.len.unwrap_or(30),
                beta: a.beta,
                deltas: a.deltas.clone(),
                seeds: a.seeds,
                steps: a.steps,
                replicas: a.replicas,
                rng_seed: a.rng_seed,
            };
            let runs = domain!(sweeps::sis_scenarios(&scenario))?;
            return Ok(Produced {
                body: sweeps::sis_scenarios_table(&runs).to_csv_string(),
                rng_seed: Some(a.rng_seed),
            });
        }
        "3" => {
            let lens = a.lens.clone().unwrap_or_else(|| vec![5, 7, 9, 11, 13, 15]);
            sweeps::single_node_table(&domain!(sweeps::single_node_reductions(2, &lens, oracle))?)
        }
        "4" => sweeps::heatmap_table(&domain!(sweeps::pair_heatmap(a.len.unwrap_or(7), oracle))?),
        "5" => sweeps::walk_count_table(
            &domain!(sweeps::walks_by_length(a.len.unwrap_or(5), a.max_length))?,
            WalkKey::Length,
        ),
        "6" => sweeps::walk_percent_table(
            &domain!(sweeps::walks_by_length(a.len.unwrap_or(5), a.max_length))?,
            WalkKey::Length,
        ),
        "7" | "8" => {
            let lens = a.lens.clone().unwrap_or_else(|| (3..=15).collect());
            let rows = domain!(sweeps::walks_by_side(a.length, &lens))?;
            if a.which == "7" {
                sweeps::walk_count_table(&rows, WalkKey::Side)
            } else {
                sweeps::walk_percent_table(&rows, WalkKey::Side)
            }
        }
        other => return Err(CliError::Usage(format!("no figure {other}"))),
    };
    Ok(table.into())
}

fn graph(a: &GraphArgs) -> Result<Produced, CliError> {
    let g = removed_graph(a.torus.spec()?, a.removal.removal().as_ref())?;
    let mut buf = Vec::new();
    domain!(edgelist::write(&g, &mut buf))?;
    Ok(Produced { body: String::from_utf8(buf).expect("edge lists are ascii"), rng_seed: None })
}
