use std::fs;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use signedcore::algorithms::{community_search, run, AlgoConfig, Algorithm};
use signedcore::core_decomp::coreness_all;
use signedcore::io::{
    convert_weighted_temporal, inject_negatives, load_signed_edgelist, load_unsigned_edgelist,
    read_result, write_result, GenSpec, ResultFormat, ResultRecord,
};
use signedcore::{is_valid_pncore, oracle_max_pncore, Layer, NodeId};

fn random_edgelist(n: u32, pp: f64, pn: f64, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::from("# generated\n");
    for i in 0..n {
        for j in i + 1..n {
            let x: f64 = rng.gen();
            if x < pp {
                out.push_str(&format!("{i}\t{j}\t+1\n"));
            } else if x < pp + pn {
                out.push_str(&format!("{i}\t{j}\t-1\n"));
            }
        }
    }
    out
}

#[test]
fn file_to_result_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.sel");
    fs::write(&path, random_edgelist(60, 0.12, 0.05, 3)).unwrap();
    let (g, rep) = load_signed_edgelist(&path).unwrap();
    assert_eq!(rep.accepted, g.pos_edge_count() + g.neg_edge_count());
    for algo in Algorithm::ALL {
        let cfg = AlgoConfig::new(algo, 2, 2);
        let report = run(&g, &cfg).unwrap();
        assert!(report.valid);
        assert!(is_valid_pncore(&g, &report.result, 2, 2));
        let rec = ResultRecord::from_report(&report, &g);
        for fmt in [ResultFormat::Json, ResultFormat::Csv] {
            let out = dir.path().join(format!("{algo}.{fmt:?}"));
            write_result(&rec, &out, fmt).unwrap();
            let back = read_result(&out, fmt).unwrap();
            assert_eq!(back.nodes, rec.nodes);
            assert_eq!(back.algorithm, algo);
        }
    }
}

#[test]
fn heuristics_stay_below_the_exact_maximum() {
    for seed in 0..30 {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.sel");
        fs::write(&path, random_edgelist(14, 0.45, 0.2, 100 + seed)).unwrap();
        let (g, _) = load_signed_edgelist(&path).unwrap();
        let best = oracle_max_pncore(&g, 2, 2).unwrap().max_size;
        for algo in Algorithm::ALL {
            let got = run(&g, &AlgoConfig::new(algo, 2, 2)).unwrap().result.len();
            assert!(got <= best, "seed {seed} {algo}: {got} > {best}");
        }
    }
}

#[test]
fn temporal_csv_to_core() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ratings.csv");
    let mut rows = String::from("source,target,rating,time\n");
    // two positive 4-cliques, one negative edge between them, and an older
    // positive rating that a later negative one overrides
    for base in [0, 10] {
        for a in 0..4 {
            for b in a + 1..4 {
                rows.push_str(&format!("{},{},5,1.0\n", base + a, base + b));
            }
        }
    }
    rows.push_str("0,10,3,1.0\n0,10,-4,2.0\n");
    fs::write(&path, rows).unwrap();
    let (g, rep) = convert_weighted_temporal(&path).unwrap();
    assert!(rep.header);
    assert_eq!((rep.positive, rep.negative), (12, 1));
    let a = g.node_by_label("0").unwrap();
    let b = g.node_by_label("10").unwrap();
    assert!(g.has_edge(Layer::Negative, a, b));
    assert_eq!(coreness_all(&g).cmax(), 3);
    let report = run(&g, &AlgoConfig::new(Algorithm::Dfba, 3, 1)).unwrap();
    assert_eq!(report.result.len(), 4);
    assert!(report.valid);
}

#[test]
fn unsigned_input_with_injected_negatives() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.txt");
    let mut text = String::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..200u32 {
        for _ in 0..3 {
            let j = rng.gen_range(0..200u32);
            if j != i {
                text.push_str(&format!("{i} {j}\n"));
            }
        }
    }
    fs::write(&path, text).unwrap();
    let (base, _) = load_unsigned_edgelist(&path).unwrap();
    let g = inject_negatives(&base, &GenSpec { alpha: 0.5, seed: 1 }).unwrap();
    let want = (base.pos_edge_count() as f64 * 0.5).round() as usize;
    assert_eq!(g.neg_edge_count(), want);
    assert_eq!(g.pos_edge_count(), base.pos_edge_count());
    let again = inject_negatives(&base, &GenSpec { alpha: 0.5, seed: 1 }).unwrap();
    for v in g.alive_nodes() {
        assert_eq!(
            g.adjacency(Layer::Negative, v),
            again.adjacency(Layer::Negative, v)
        );
    }
    for algo in Algorithm::ALL {
        assert!(run(&g, &AlgoConfig::new(algo, 2, 2)).unwrap().valid);
    }
}

#[test]
fn community_contains_the_query() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.sel");
    fs::write(&path, random_edgelist(80, 0.1, 0.03, 11)).unwrap();
    let (g, _) = load_signed_edgelist(&path).unwrap();
    let cfg = AlgoConfig::new(Algorithm::Dfba, 2, 3);
    let report = run(&g, &cfg).unwrap();
    let Some(&q) = report.result.first() else {
        return;
    };
    let (_, comm) = community_search(&g, &cfg, &[q]).unwrap();
    assert!(comm.contains(&q));
    assert!(comm.iter().all(|v| report.result.contains(v)));
    assert!(community_search(&g, &cfg, &[NodeId(10_000)]).is_err());
}
