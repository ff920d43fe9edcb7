//! Command-line front end: argument parsing, graph loading and the five
//! subcommands. `main.rs` only forwards to [`run`].

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use signedcore::algorithms::{community_in, run as run_algo, AlgoConfig, Algorithm, RunReport};
use signedcore::core_decomp::{core_profile, coreness_all};
use signedcore::followers::oracle_max_pncore;
use signedcore::io::{
    convert_weighted_temporal, inject_negatives, load_signed_edgelist, load_unsigned_edgelist,
    write_result_to, GenSpec, ResultFormat, ResultRecord,
};
use signedcore::{Error, NodeId, SignedGraph};

pub mod stats;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_CAP: i32 = 4;
pub const EXIT_OTHER: i32 = 1;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "SIGNEDCORE_THREADS";

#[derive(Parser, Debug)]
#[command(name = "signedcore", version, about = "(p,n)-cores of signed networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one algorithm and write its report.
    Core(CoreArgs),
    /// Find the community of the query nodes in an algorithm's result.
    Search(SearchArgs),
    /// Sweep p, n and algorithms; one CSV row per cell.
    Bench(BenchArgs),
    /// Core profile per p, or per-iteration follower ratios with --pruning.
    Stats(StatsArgs),
    /// Exact maximum (p,n)-cores of a small graph.
    Oracle(OracleArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    /// Whitespace-separated `u v sign` lines.
    Edgelist,
    /// `u,v,rating,time` rows; latest row per pair decides the sign.
    TemporalCsv,
    /// `u v` lines, all positive; combine with --alpha to add negatives.
    Unsigned,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct GraphArgs {
    /// Input graph file.
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Edgelist)]
    pub format: InputFormat,
    /// Add round(alpha * |E+|) random negative edges after loading.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Seed for --alpha sampling.
    #[arg(long, default_value_t = 0)]
    pub gen_seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct AlgoArgs {
    #[arg(long)]
    pub p: u32,
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value = "dfba", value_parser = parse_algo)]
    pub algo: Algorithm,
    /// Ball radius used by fca.
    #[arg(long, default_value_t = 2)]
    pub r: u32,
    #[arg(long, default_value_t = 7)]
    pub hll_bits: u8,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub budget_secs: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to csv for `.csv` paths, json otherwise.
    #[arg(long, value_enum)]
    pub out_format: Option<OutFormat>,
    /// Report wall time as 0 so repeated runs are byte-identical.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Args, Debug)]
pub struct CoreArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub algo: AlgoArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub algo: AlgoArgs,
    /// Query node label; repeat for several.
    #[arg(long, required = true)]
    pub query: Vec<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// p values: `3`, `2,3,5` or `2..6` (inclusive).
    #[arg(long)]
    pub p: String,
    /// n values, same syntax as `--p`.
    #[arg(long)]
    pub n: String,
    /// Comma-separated algorithms.
    #[arg(long, default_value = "fba,dfba,fca")]
    pub algo: String,
    /// Add exact-solver rows (graphs of at most 22 nodes).
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, default_value_t = 2)]
    pub r: u32,
    #[arg(long, default_value_t = 7)]
    pub hll_bits: u8,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-cell wall-clock limit.
    #[arg(long)]
    pub budget_secs: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Emit per-iteration follower ratios of dfba and fba instead.
    #[arg(long, requires_all = ["p", "n"])]
    pub pruning: bool,
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long)]
    pub n: Option<u32>,
    /// Extend the profile up to this p even past the largest coreness.
    #[arg(long)]
    pub p_max: Option<u32>,
    /// Print graph-level statistics as JSON instead.
    #[arg(long, conflicts_with = "pruning")]
    pub summary: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub p: u32,
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_algo(s: &str) -> std::result::Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
    Write(PathBuf, std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Write(..) => EXIT_IO,
            CliError::Core(e) => match e {
                Error::Io { .. } | Error::Parse { .. } | Error::Csv(_) | Error::Json(_) => EXIT_IO,
                Error::OracleCap { .. } => EXIT_CAP,
                Error::InvalidConfig(_)
                | Error::UnknownNode(_)
                | Error::NodeOutOfRange(_)
                | Error::TooManyNegatives { .. } => EXIT_USAGE,
                _ => EXIT_OTHER,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Write(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Output without `--out` goes to `stdout`; messages go
/// to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    limit_threads();
    match dispatch(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn limit_threads() {
    if let Some(n) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn dispatch(cmd: Command, stdout: &mut dyn Write) -> CliResult<()> {
    match cmd {
        Command::Core(a) => cmd_core(a, stdout),
        Command::Search(a) => cmd_search(a, stdout),
        Command::Bench(a) => cmd_bench(a, stdout),
        Command::Stats(a) => cmd_stats(a, stdout),
        Command::Oracle(a) => cmd_oracle(a, stdout),
    }
}

pub fn load_graph(a: &GraphArgs) -> CliResult<SignedGraph> {
    let g = match a.format {
        InputFormat::Edgelist => load_signed_edgelist(&a.graph)?.0,
        InputFormat::TemporalCsv => convert_weighted_temporal(&a.graph)?.0,
        InputFormat::Unsigned => load_unsigned_edgelist(&a.graph)?.0,
    };
    match a.alpha {
        Some(alpha) => Ok(inject_negatives(
            &g,
            &GenSpec {
                alpha,
                seed: a.gen_seed,
            },
        )?),
        None => Ok(g),
    }
}

fn budget(secs: Option<f64>) -> CliResult<Option<Duration>> {
    match secs {
        None => Ok(None),
        Some(s) if s.is_finite() && s >= 0.0 => Ok(Some(Duration::from_secs_f64(s))),
        Some(s) => Err(CliError::Usage(format!("invalid --budget-secs {s}"))),
    }
}

fn config(a: &AlgoArgs) -> CliResult<AlgoConfig> {
    let cfg = AlgoConfig {
        algorithm: a.algo,
        p: a.p,
        n: a.n,
        radius: a.r,
        hll_bits: a.hll_bits,
        seed: a.seed,
        budget: budget(a.budget_secs)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Runs `f` against the `--out` file or stdout.
fn emit(
    out: Option<&Path>,
    stdout: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> CliResult<()>,
) -> CliResult<()> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::Write(path.to_path_buf(), e))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush().map_err(|e| CliError::Write(path.to_path_buf(), e))
        }
        None => {
            f(stdout)?;
            stdout
                .flush()
                .map_err(|e| CliError::Write(PathBuf::from("<stdout>"), e))
        }
    }
}

fn out_format(o: &OutputArgs) -> ResultFormat {
    match (o.out_format, &o.out) {
        (Some(OutFormat::Json), _) => ResultFormat::Json,
        (Some(OutFormat::Csv), _) => ResultFormat::Csv,
        (None, Some(p)) => ResultFormat::from_path(p),
        (None, None) => ResultFormat::Json,
    }
}

fn record(report: &RunReport, g: &SignedGraph, no_timing: bool) -> ResultRecord {
    let mut rec = ResultRecord::from_report(report, g);
    if no_timing {
        rec.wall_ms = 0.0;
    }
    rec
}

fn cmd_core(a: CoreArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let cfg = config(&a.algo)?;
    let g = load_graph(&a.graph)?;
    let report = run_algo(&g, &cfg)?;
    let rec = record(&report, &g, a.output.no_timing);
    let fmt = out_format(&a.output);
    emit(a.output.out.as_deref(), stdout, |w| Ok(write_result_to(&rec, w, fmt)?))
}

#[derive(Serialize)]
struct SearchOutput<'a> {
    query: &'a [String],
    algorithm: Algorithm,
    p: u32,
    n: u32,
    r: u32,
    nodes: Vec<String>,
    stats: stats::SubgraphStats,
    core_size: usize,
    valid: bool,
    timed_out: bool,
    wall_ms: f64,
}

fn cmd_search(a: SearchArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let cfg = config(&a.algo)?;
    let g = load_graph(&a.graph)?;
    let query: Vec<NodeId> = a
        .query
        .iter()
        .map(|l| g.node_by_label(l).ok_or_else(|| Error::UnknownNode(l.clone())))
        .collect::<Result<_, _>>()?;
    let report = run_algo(&g, &cfg)?;
    let comm = community_in(&g, &report.result, &query);
    let out = SearchOutput {
        query: &a.query,
        algorithm: cfg.algorithm,
        p: cfg.p,
        n: cfg.n,
        r: cfg.radius,
        nodes: comm.iter().map(|&v| g.label(v).to_string()).collect(),
        stats: stats::subgraph_stats(&g, &comm),
        core_size: report.result.len(),
        valid: report.valid,
        timed_out: report.timed_out,
        wall_ms: if a.output.no_timing {
            0.0
        } else {
            report.wall.as_secs_f64() * 1000.0
        },
    };
    emit(a.output.out.as_deref(), stdout, |w| {
        serde_json::to_writer_pretty(&mut *w, &out).map_err(Error::from)?;
        writeln!(w).map_err(|e| CliError::Write(PathBuf::from("<output>"), e))
    })
}

/// `3`, `2,3,5`, `2..6` or mixes such as `1,4..6`.
pub fn parse_values(spec: &str) -> CliResult<Vec<u32>> {
    let bad = || CliError::Usage(format!("cannot parse value list `{spec}`"));
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
            let hi: u32 = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
            if lo > hi {
                return Err(bad());
            }
            out.extend(lo..=hi);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub algorithm: String,
    pub p: u32,
    pub n: u32,
    pub r: u32,
    pub size: usize,
    pub wall_ms: f64,
    pub iterations: usize,
    pub followers_computed: u64,
    pub valid: bool,
    pub timeout: bool,
}

enum Cell {
    Algo(Algorithm, u32, u32),
    Oracle(u32, u32),
}

fn cmd_bench(a: BenchArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let ps = parse_values(&a.p)?;
    let ns = parse_values(&a.n)?;
    let algos: Vec<Algorithm> = a
        .algo
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Algorithm>())
        .collect::<Result<_, _>>()?;
    let limit = budget(a.budget_secs)?;
    let g = load_graph(&a.graph)?;
    let mut cells = Vec::new();
    for &p in &ps {
        for &n in &ns {
            for &al in &algos {
                cells.push(Cell::Algo(al, p, n));
            }
            if a.oracle {
                cells.push(Cell::Oracle(p, n));
            }
        }
    }
    let rows: Vec<CliResult<BenchRow>> = cells
        .par_iter()
        .map(|cell| match *cell {
            Cell::Algo(al, p, n) => {
                let cfg = AlgoConfig {
                    algorithm: al,
                    p,
                    n,
                    radius: a.r,
                    hll_bits: a.hll_bits,
                    seed: a.seed,
                    budget: limit,
                };
                let rep = run_algo(&g, &cfg)?;
                Ok(BenchRow {
                    algorithm: al.name().to_string(),
                    p,
                    n,
                    r: a.r,
                    size: rep.result.len(),
                    wall_ms: if a.no_timing {
                        0.0
                    } else {
                        rep.wall.as_secs_f64() * 1000.0
                    },
                    iterations: rep.iterations,
                    followers_computed: rep.followers_computed,
                    valid: rep.valid,
                    timeout: rep.timed_out,
                })
            }
            Cell::Oracle(p, n) => {
                let start = std::time::Instant::now();
                let sol = oracle_max_pncore(&g, p, n)?;
                Ok(BenchRow {
                    algorithm: "oracle".to_string(),
                    p,
                    n,
                    r: a.r,
                    size: sol.max_size,
                    wall_ms: if a.no_timing {
                        0.0
                    } else {
                        start.elapsed().as_secs_f64() * 1000.0
                    },
                    iterations: 0,
                    followers_computed: 0,
                    valid: true,
                    timeout: false,
                })
            }
        })
        .collect();
    let rows: Vec<BenchRow> = rows.into_iter().collect::<CliResult<_>>()?;
    emit(a.out.as_deref(), stdout, |w| {
        let mut cw = csv::Writer::from_writer(w);
        for row in &rows {
            cw.serialize(row).map_err(Error::from)?;
        }
        cw.flush()
            .map_err(|e| CliError::Write(PathBuf::from("<output>"), e))
    })
}

#[derive(Serialize)]
struct ProfileRow {
    p: u32,
    components: usize,
    node_ratio: f64,
}

#[derive(Serialize)]
struct PruningRow {
    algorithm: &'static str,
    iteration: usize,
    alive: usize,
    followers_computed: usize,
    ratio: f64,
}

fn cmd_stats(a: StatsArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let g = load_graph(&a.graph)?;
    if a.summary {
        let all: Vec<NodeId> = g.alive_nodes().collect();
        let mut s = stats::subgraph_stats(&g, &all);
        s.cmax = Some(coreness_all(&g).cmax());
        return emit(a.out.as_deref(), stdout, |w| {
            serde_json::to_writer_pretty(&mut *w, &s).map_err(Error::from)?;
            writeln!(w).map_err(|e| CliError::Write(PathBuf::from("<output>"), e))
        });
    }
    if a.pruning {
        let (p, n) = (a.p.unwrap_or(1), a.n.unwrap_or(1));
        let mut rows = Vec::new();
        for al in [Algorithm::Dfba, Algorithm::Fba] {
            let cfg = AlgoConfig::new(al, p, n);
            cfg.validate()?;
            let rep = run_algo(&g, &cfg)?;
            for (i, it) in rep.per_iteration.iter().enumerate() {
                rows.push(PruningRow {
                    algorithm: al.name(),
                    iteration: i + 1,
                    alive: it.alive,
                    followers_computed: it.followers_computed,
                    ratio: it.follower_ratio(),
                });
            }
        }
        return emit(a.out.as_deref(), stdout, |w| {
            let mut cw = csv::Writer::from_writer(w);
            for r in &rows {
                cw.serialize(r).map_err(Error::from)?;
            }
            cw.flush()
                .map_err(|e| CliError::Write(PathBuf::from("<output>"), e))
        });
    }
    let cs = coreness_all(&g);
    let prof = core_profile(&g, &cs);
    let total = g.alive_count();
    let top = a.p_max.unwrap_or(0).max(cs.cmax());
    let rows: Vec<ProfileRow> = (1..=top)
        .map(|p| {
            let lvl = prof.get(p as usize - 1);
            let nodes = lvl.map_or(0, |l| l.nodes);
            ProfileRow {
                p,
                components: lvl.map_or(0, |l| l.components),
                node_ratio: if total == 0 {
                    0.0
                } else {
                    nodes as f64 / total as f64
                },
            }
        })
        .collect();
    emit(a.out.as_deref(), stdout, |w| {
        let mut cw = csv::Writer::from_writer(w);
        if rows.is_empty() {
            cw.write_record(["p", "components", "node_ratio"]).map_err(Error::from)?;
        }
        for r in &rows {
            cw.serialize(r).map_err(Error::from)?;
        }
        cw.flush()
            .map_err(|e| CliError::Write(PathBuf::from("<output>"), e))
    })
}

fn cmd_oracle(a: OracleArgs, stdout: &mut dyn Write) -> CliResult<()> {
    if a.p == 0 || a.n == 0 {
        return Err(CliError::Usage("p and n must be at least 1".into()));
    }
    let g = load_graph(&a.graph)?;
    let sol = oracle_max_pncore(&g, a.p, a.n)?;
    emit(a.out.as_deref(), stdout, |w| {
        let io = |e| CliError::Write(PathBuf::from("<output>"), e);
        writeln!(w, "max_size {}", sol.max_size).map_err(io)?;
        writeln!(w, "solutions {}", sol.solutions.len()).map_err(io)?;
        for s in &sol.solutions {
            let labels: Vec<&str> = s.iter().map(|&v| g.label(v)).collect();
            writeln!(w, "{}", labels.join(" ")).map_err(io)?;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_lists() {
        assert_eq!(parse_values("3").unwrap(), vec![3]);
        assert_eq!(parse_values("2,3,5").unwrap(), vec![2, 3, 5]);
        assert_eq!(parse_values("2..4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_values("1, 4..=5").unwrap(), vec![1, 4, 5]);
        assert!(parse_values("").is_err());
        assert!(parse_values("5..2").is_err());
        assert!(parse_values("x").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), EXIT_USAGE);
        assert_eq!(
            CliError::Core(Error::OracleCap { nodes: 30, cap: 22 }).exit_code(),
            EXIT_CAP
        );
        assert_eq!(
            CliError::Core(Error::UnknownNode("q".into())).exit_code(),
            EXIT_USAGE
        );
    }

    #[test]
    fn help_is_not_an_error() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["signedcore", "--help"], &mut o, &mut e), EXIT_OK);
        assert!(!o.is_empty());
        assert_eq!(run(["signedcore", "core"], &mut o, &mut e), EXIT_USAGE);
        assert_eq!(
            run(["signedcore", "bogus-subcommand"], &mut o, &mut e),
            EXIT_USAGE
        );
    }
}
