//! Edge-list loading, temporal rating conversion, synthetic negative edges
//! and result files.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algorithms::{Algorithm, IterationStat, RunReport};
use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, Layer, NodeId, Sign, SignedGraph};

/// Line accounting for text loaders: every line is a comment/blank line,
/// or a record; records split into accepted edges, duplicates and
/// self-loops.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ParseReport {
    pub lines: usize,
    pub skipped: usize,
    pub records: usize,
    pub accepted: usize,
    pub duplicates: usize,
    pub self_loops: usize,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn parse_sign(tok: &str) -> Option<Sign> {
    match tok {
        "+1" | "1" | "+" => Some(Sign::Positive),
        "-1" | "-" => Some(Sign::Negative),
        _ => None,
    }
}

fn is_comment(line: &str) -> bool {
    let t = line.trim_start();
    t.is_empty() || t.starts_with('#') || t.starts_with('%')
}

/// Parses whitespace-separated `u v s` lines. `origin` only labels errors.
pub fn parse_signed_edgelist<R: BufRead>(
    reader: R,
    origin: &Path,
) -> Result<(SignedGraph, ParseReport)> {
    let mut b = GraphBuilder::new();
    let mut rep = ParseReport::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        rep.lines += 1;
        if is_comment(&line) {
            rep.skipped += 1;
            continue;
        }
        let mut toks = line.split_whitespace();
        let (Some(u), Some(v), Some(s)) = (toks.next(), toks.next(), toks.next()) else {
            return Err(parse_error(origin, i + 1, "expected `u v sign`"));
        };
        let sign = parse_sign(s)
            .ok_or_else(|| parse_error(origin, i + 1, &format!("bad sign `{s}`")))?;
        b.add_edge(u, v, sign);
    }
    let (g, br) = b.build();
    rep.records = br.records;
    rep.accepted = br.accepted;
    rep.duplicates = br.duplicates;
    rep.self_loops = br.self_loops;
    Ok((g, rep))
}

pub fn load_signed_edgelist(path: impl AsRef<Path>) -> Result<(SignedGraph, ParseReport)> {
    let path = path.as_ref();
    parse_signed_edgelist(open(path)?, path)
}

/// Parses `u v` lines (further columns ignored) into an all-positive graph.
pub fn parse_unsigned_edgelist<R: BufRead>(
    reader: R,
    origin: &Path,
) -> Result<(SignedGraph, ParseReport)> {
    let mut b = GraphBuilder::new();
    let mut rep = ParseReport::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        rep.lines += 1;
        if is_comment(&line) {
            rep.skipped += 1;
            continue;
        }
        let mut toks = line.split_whitespace();
        let (Some(u), Some(v)) = (toks.next(), toks.next()) else {
            return Err(parse_error(origin, i + 1, "expected `u v`"));
        };
        b.add_edge(u, v, Sign::Positive);
    }
    let (g, br) = b.build();
    rep.records = br.records;
    rep.accepted = br.accepted;
    rep.duplicates = br.duplicates;
    rep.self_loops = br.self_loops;
    Ok((g, rep))
}

pub fn load_unsigned_edgelist(path: impl AsRef<Path>) -> Result<(SignedGraph, ParseReport)> {
    let path = path.as_ref();
    parse_unsigned_edgelist(open(path)?, path)
}

fn parse_error(path: &Path, line: usize, msg: &str) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.to_string(),
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TemporalReport {
    pub rows: usize,
    pub header: bool,
    pub zero_rating: usize,
    pub self_loops: usize,
    /// Distinct unordered pairs after keeping the latest row of each.
    pub pairs: usize,
    pub positive: usize,
    pub negative: usize,
}

/// Reads `u,v,rating,time` rows and keeps, per unordered pair, the row
/// with the largest time (larger rating on equal time). Positive ratings
/// give positive edges, negative ones negative edges; rating 0 rows carry
/// no sign and are skipped, though their endpoints still become nodes.
pub fn parse_weighted_temporal<R: Read>(
    reader: R,
    origin: &Path,
) -> Result<(SignedGraph, TemporalReport)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rep = TemporalReport::default();
    let mut b = GraphBuilder::new();
    let mut latest: HashMap<(String, String), (f64, f64)> = HashMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(i + 1, |p| p.line() as usize);
        if rec.len() < 4 {
            return Err(parse_error(origin, line, "expected `u,v,rating,time`"));
        }
        let rating = rec[2].parse::<f64>();
        if i == 0 && rating.is_err() {
            rep.header = true;
            continue;
        }
        rep.rows += 1;
        let rating = rating
            .ok()
            .filter(|r| r.is_finite())
            .ok_or_else(|| parse_error(origin, line, &format!("bad rating `{}`", &rec[2])))?;
        let time = rec[3]
            .parse::<f64>()
            .ok()
            .filter(|t| t.is_finite())
            .ok_or_else(|| parse_error(origin, line, &format!("bad time `{}`", &rec[3])))?;
        let (u, v) = (&rec[0], &rec[1]);
        b.add_node(u);
        b.add_node(v);
        if rating == 0.0 {
            rep.zero_rating += 1;
            continue;
        }
        if u == v {
            rep.self_loops += 1;
            continue;
        }
        let key = if u <= v {
            (u.to_string(), v.to_string())
        } else {
            (v.to_string(), u.to_string())
        };
        let entry = latest.entry(key).or_insert((time, rating));
        if (time, rating) > *entry {
            *entry = (time, rating);
        }
    }
    rep.pairs = latest.len();
    for ((u, v), (_, rating)) in latest {
        let sign = if rating > 0.0 {
            rep.positive += 1;
            Sign::Positive
        } else {
            rep.negative += 1;
            Sign::Negative
        };
        b.add_edge(&u, &v, sign);
    }
    Ok((b.build().0, rep))
}

pub fn convert_weighted_temporal(path: impl AsRef<Path>) -> Result<(SignedGraph, TemporalReport)> {
    let path = path.as_ref();
    parse_weighted_temporal(open(path)?, path)
}

/// Negative edges to add, as a ratio of the positive edge count.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct GenSpec {
    pub alpha: f64,
    pub seed: u64,
}

/// `round(alpha * positive_edges)`.
pub fn negatives_for(alpha: f64, positive_edges: u64) -> u64 {
    (alpha * positive_edges as f64).round() as u64
}

/// Adds `round(alpha * |E+|)` distinct negative edges between uniformly
/// drawn node pairs. Self-loops and pairs that are already negative are
/// redrawn; a pair may be both positive and negative. The positive layer
/// is kept as is.
pub fn inject_negatives(base: &SignedGraph, spec: &GenSpec) -> Result<SignedGraph> {
    if !(spec.alpha > 0.0 && spec.alpha.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "alpha must be positive, got {}",
            spec.alpha
        )));
    }
    let n = base.node_count() as u64;
    let want = negatives_for(spec.alpha, base.pos_edge_count() as u64);
    let existing = base.neg_edge_count() as u64;
    let available = (n * n.saturating_sub(1) / 2).saturating_sub(existing);
    if want > available {
        return Err(Error::TooManyNegatives {
            requested: want,
            available,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut extra: Vec<(u32, u32, Sign)> = Vec::with_capacity(want as usize);
    if want * 2 > available {
        // dense request: shuffle the free pairs instead of rejection sampling
        let mut free = Vec::with_capacity(available as usize);
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                if !base.has_edge(Layer::Negative, NodeId(u), NodeId(v)) {
                    free.push((u, v));
                }
            }
        }
        free.shuffle(&mut rng);
        extra.extend(
            free.into_iter()
                .take(want as usize)
                .map(|(u, v)| (u, v, Sign::Negative)),
        );
    } else {
        let mut taken: HashSet<(u32, u32)> = HashSet::with_capacity(want as usize);
        while (extra.len() as u64) < want {
            let a = rng.gen_range(0..n as u32);
            let b = rng.gen_range(0..n as u32);
            if a == b {
                continue;
            }
            let pair = (a.min(b), a.max(b));
            if base.has_edge(Layer::Negative, NodeId(pair.0), NodeId(pair.1)) || !taken.insert(pair) {
                continue;
            }
            extra.push((pair.0, pair.1, Sign::Negative));
        }
    }
    Ok(base.with_extra_edges(&extra).0)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ResultFormat {
    Json,
    Csv,
}

impl ResultFormat {
    /// `.csv` means CSV, anything else JSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => ResultFormat::Csv,
            _ => ResultFormat::Json,
        }
    }
}

impl FromStr for ResultFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ResultFormat::Json),
            "csv" => Ok(ResultFormat::Csv),
            other => Err(Error::InvalidConfig(format!("unknown result format `{other}`"))),
        }
    }
}

/// A run report with node labels, as stored on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub nodes: Vec<String>,
    pub size: usize,
    pub p: u32,
    pub n: u32,
    pub algorithm: Algorithm,
    pub r: u32,
    pub iterations: usize,
    pub followers_computed: u64,
    pub sketch_refreshes: u64,
    pub wall_ms: f64,
    pub valid: bool,
    pub timed_out: bool,
    #[serde(default)]
    pub per_iteration: Vec<IterationStat>,
}

impl ResultRecord {
    pub fn from_report(report: &RunReport, g: &SignedGraph) -> Self {
        ResultRecord {
            nodes: report.result.iter().map(|&v| g.label(v).to_string()).collect(),
            size: report.result.len(),
            p: report.p,
            n: report.n,
            algorithm: report.algorithm,
            r: report.radius,
            iterations: report.iterations,
            followers_computed: report.followers_computed,
            sketch_refreshes: report.sketch_refreshes,
            wall_ms: report.wall.as_secs_f64() * 1000.0,
            valid: report.valid,
            timed_out: report.timed_out,
            per_iteration: report.per_iteration.clone(),
        }
    }
}

const CSV_HEADER: [&str; 12] = [
    "algorithm",
    "p",
    "n",
    "r",
    "size",
    "iterations",
    "followers_computed",
    "sketch_refreshes",
    "wall_ms",
    "valid",
    "timed_out",
    "nodes",
];

/// Serialises a record; CSV holds one header and one row with the node
/// labels space-separated in the last column and no per-iteration data.
pub fn write_result_to<W: Write>(rec: &ResultRecord, out: W, format: ResultFormat) -> Result<()> {
    match format {
        ResultFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rec)?;
            writeln!(out).map_err(|e| Error::io(PathBuf::from("<output>"), e))?;
        }
        ResultFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_HEADER)?;
            w.write_record([
                rec.algorithm.name().to_string(),
                rec.p.to_string(),
                rec.n.to_string(),
                rec.r.to_string(),
                rec.size.to_string(),
                rec.iterations.to_string(),
                rec.followers_computed.to_string(),
                rec.sketch_refreshes.to_string(),
                rec.wall_ms.to_string(),
                rec.valid.to_string(),
                rec.timed_out.to_string(),
                rec.nodes.join(" "),
            ])?;
            w.flush().map_err(|e| Error::io(PathBuf::from("<output>"), e))?;
        }
    }
    Ok(())
}

pub fn write_result(rec: &ResultRecord, path: impl AsRef<Path>, format: ResultFormat) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_result_to(rec, &mut w, format)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_result(path: impl AsRef<Path>, format: ResultFormat) -> Result<ResultRecord> {
    let path = path.as_ref();
    let reader = open(path)?;
    match format {
        ResultFormat::Json => Ok(serde_json::from_reader(reader)?),
        ResultFormat::Csv => {
            let mut rdr = csv::Reader::from_reader(reader);
            let row = rdr
                .records()
                .next()
                .ok_or_else(|| parse_error(path, 2, "missing result row"))??;
            if row.len() != CSV_HEADER.len() {
                return Err(parse_error(path, 2, "wrong column count"));
            }
            let bad = |col: &str| parse_error(path, 2, &format!("bad `{col}`"));
            macro_rules! field {
                ($i:expr) => {
                    row[$i].parse().map_err(|_| bad(CSV_HEADER[$i]))?
                };
            }
            Ok(ResultRecord {
                algorithm: field!(0),
                p: field!(1),
                n: field!(2),
                r: field!(3),
                size: field!(4),
                iterations: field!(5),
                followers_computed: field!(6),
                sketch_refreshes: field!(7),
                wall_ms: field!(8),
                valid: field!(9),
                timed_out: field!(10),
                nodes: row[11].split_whitespace().map(str::to_string).collect(),
                per_iteration: Vec::new(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{run, AlgoConfig};
    use crate::fixtures::{nine_node_edgelist, nine_node_example};
    use std::io::Cursor;

    fn signed(text: &str) -> Result<(SignedGraph, ParseReport)> {
        parse_signed_edgelist(Cursor::new(text), Path::new("mem"))
    }

    fn temporal(text: &str) -> Result<(SignedGraph, TemporalReport)> {
        parse_weighted_temporal(Cursor::new(text), Path::new("mem"))
    }

    #[test]
    fn signed_edgelist_examples() {
        let (g, rep) = signed("0 1 +1\n1 2 -1").unwrap();
        assert_eq!((g.pos_edge_count(), g.neg_edge_count()), (1, 1));
        assert_eq!(rep.records, 2);

        let (g, rep) = signed("0 1 +1\n0 1 +1\n").unwrap();
        assert_eq!(g.pos_edge_count(), 1);
        assert_eq!(rep.duplicates, 1);

        let (g, rep) = signed("# only\n# comments\n\n").unwrap();
        assert_eq!(g.node_count(), 0);
        assert_eq!(rep.skipped, 3);

        let (g, _) = signed("a b +\nb c -\nc a 1\n").unwrap();
        assert_eq!((g.pos_edge_count(), g.neg_edge_count()), (2, 1));
    }

    #[test]
    fn signed_edgelist_errors_carry_line_numbers() {
        match signed("0 1 +1\n# c\n1 2 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(signed("0 1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            load_signed_edgelist("/definitely/not/here.sel"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn line_accounting_reconciles() {
        let text = "# h\n0 1 +1\n0 1 +1\n2 2 -1\n\n1 2 -1\n";
        let (_, rep) = signed(text).unwrap();
        assert_eq!(rep.lines, rep.skipped + rep.records);
        assert_eq!(rep.records, rep.accepted + rep.duplicates + rep.self_loops);
        assert_eq!(rep.self_loops, 1);
    }

    #[test]
    fn fixture_round_trip() {
        let (g, _) = signed(&nine_node_edgelist()).unwrap();
        let h = nine_node_example();
        assert_eq!(g.labels(), h.labels());
        for l in [Layer::Positive, Layer::Negative] {
            assert_eq!(g.edges(l).collect::<Vec<_>>(), h.edges(l).collect::<Vec<_>>());
        }
    }

    #[test]
    fn temporal_most_recent_wins() {
        let (g, rep) = temporal("1,2,5,1\n2,1,-2,9\n").unwrap();
        assert_eq!((g.pos_edge_count(), g.neg_edge_count()), (0, 1));
        assert_eq!(rep.pairs, 1);
        let (g, _) = temporal("7,8,-10,100\n").unwrap();
        assert_eq!(g.neg_edge_count(), 1);
    }

    #[test]
    fn temporal_header_zero_and_errors() {
        let (g, rep) = temporal("source,target,rating,time\n1,2,0,5\n2,3,3,6\n").unwrap();
        assert!(rep.header);
        assert_eq!(rep.zero_rating, 1);
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.pos_edge_count(), 1);
        match temporal("1,2,3,4\n1,3,abc,5\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(temporal("1,2,3\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn temporal_is_order_insensitive() {
        let rows = [
            "1,2,4,10", "2,1,-3,12", "3,4,-1,1", "4,3,2,1", "5,1,9,3", "1,5,-9,3", "6,7,0,2",
            "2,3,1,8",
        ];
        let (a, _) = temporal(&rows.join("\n")).unwrap();
        let mut rev: Vec<&str> = rows.to_vec();
        rev.reverse();
        rev.swap(1, 4);
        let (b, _) = temporal(&rev.join("\n")).unwrap();
        assert_eq!(a.labels(), b.labels());
        for l in [Layer::Positive, Layer::Negative] {
            assert_eq!(a.edges(l).collect::<Vec<_>>(), b.edges(l).collect::<Vec<_>>());
        }
    }

    fn ring(n: u32) -> SignedGraph {
        let e: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, Sign::Positive)).collect();
        SignedGraph::from_edges(n as usize, &e).unwrap().0
    }

    #[test]
    fn injection_counts_and_determinism() {
        let base = ring(10);
        let spec = GenSpec { alpha: 0.5, seed: 3 };
        let g = inject_negatives(&base, &spec).unwrap();
        assert_eq!(g.neg_edge_count(), 5);
        assert_eq!(
            g.edges(Layer::Positive).collect::<Vec<_>>(),
            base.edges(Layer::Positive).collect::<Vec<_>>()
        );
        let h = inject_negatives(&base, &spec).unwrap();
        assert_eq!(
            g.edges(Layer::Negative).collect::<Vec<_>>(),
            h.edges(Layer::Negative).collect::<Vec<_>>()
        );
        assert_eq!(negatives_for(2.0, 1_049_866), 2_099_732);
    }

    #[test]
    fn injection_limits() {
        let base = ring(5);
        // 10 pairs in total
        let g = inject_negatives(&base, &GenSpec { alpha: 2.0, seed: 1 }).unwrap();
        assert_eq!(g.neg_edge_count(), 10);
        assert!(matches!(
            inject_negatives(&base, &GenSpec { alpha: 2.2, seed: 1 }),
            Err(Error::TooManyNegatives { requested: 11, available: 10 })
        ));
        assert!(inject_negatives(&base, &GenSpec { alpha: 0.0, seed: 1 }).is_err());
    }

    #[test]
    fn result_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let g = nine_node_example();
        let rep = run(&g, &AlgoConfig::new(Algorithm::Dfba, 2, 2)).unwrap();
        let rec = ResultRecord::from_report(&rep, &g);
        for fmt in [ResultFormat::Json, ResultFormat::Csv] {
            let path = dir.path().join(match fmt {
                ResultFormat::Json => "r.json",
                ResultFormat::Csv => "r.csv",
            });
            assert_eq!(ResultFormat::from_path(&path), fmt);
            write_result(&rec, &path, fmt).unwrap();
            let back = read_result(&path, fmt).unwrap();
            assert_eq!(back.nodes, rec.nodes);
            assert_eq!(back.size, 6);
            if fmt == ResultFormat::Json {
                assert_eq!(back, rec);
            }
        }
    }

    #[test]
    fn empty_result_file() {
        let dir = tempfile::tempdir().unwrap();
        let g = SignedGraph::from_edges(3, &[(0, 1, Sign::Positive)]).unwrap().0;
        let rep = run(&g, &AlgoConfig::new(Algorithm::Fba, 2, 1)).unwrap();
        let rec = ResultRecord::from_report(&rep, &g);
        let path = dir.path().join("e.json");
        write_result(&rec, &path, ResultFormat::Json).unwrap();
        let back = read_result(&path, ResultFormat::Json).unwrap();
        assert_eq!(back.size, 0);
        assert!(back.nodes.is_empty());
        let bad = dir.path().join("missing/dir/out.json");
        assert!(matches!(write_result(&rec, bad, ResultFormat::Json), Err(Error::Io { .. })));
    }

    #[test]
    fn json_field_order_is_stable() {
        let g = nine_node_example();
        let rep = run(&g, &AlgoConfig::new(Algorithm::Fca, 2, 2)).unwrap();
        let mut buf = Vec::new();
        write_result_to(&ResultRecord::from_report(&rep, &g), &mut buf, ResultFormat::Json).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let keys = ["\"nodes\"", "\"size\"", "\"p\"", "\"n\"", "\"algorithm\"", "\"r\"", "\"iterations\""];
        let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
    }
}
