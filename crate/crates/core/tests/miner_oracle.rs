mod common;

use common::{compare_patterns, random_dataset, PatternOracle};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use skelcomp::graph::{are_isomorphic, Graph, GraphDataset};
use skelcomp::miner::{mine_frequent, pattern_to_graph, ComponentTable, MinerConfig};

#[test]
fn matches_brute_force_on_random_datasets() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..40 {
        let ds = random_dataset(&mut rng);
        let max_edges = 1 + case % 4;
        let oracle = PatternOracle::new(&ds, max_edges);
        for theta in [0.3, 0.5, 1.0] {
            let mined = mine_frequent(&ds, &MinerConfig::new(theta, max_edges)).unwrap();
            if let Some(diff) = compare_patterns(&mined, &oracle.frequent(theta), ds.len()) {
                panic!("case {case}, theta {theta}, max_edges {max_edges}: {diff}");
            }
        }
    }
}

/// Connected graphs obtained by deleting one edge (and a node left isolated).
fn one_edge_smaller(g: &Graph) -> Vec<Graph> {
    let mut out = Vec::new();
    for skip in 0..g.edge_count() {
        let kept: Vec<_> = g.edges().iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, e)| e.clone()).collect();
        let mut used: Vec<usize> = kept.iter().flat_map(|e| [e.u, e.v]).collect();
        used.sort_unstable();
        used.dedup();
        let index = |v: usize| used.binary_search(&v).unwrap();
        let labels: Vec<i32> = used.iter().map(|&v| g.node_label(v)).collect();
        let edges: Vec<(usize, usize, i32)> = kept.iter().map(|e| (index(e.u), index(e.v), e.label)).collect();
        let sub = Graph::labeled(labels, &edges).unwrap();
        if sub.is_connected() {
            out.push(sub);
        }
    }
    out
}

fn find<'a>(table: &'a ComponentTable, g: &Graph) -> Option<&'a skelcomp::miner::FrequentSubgraph> {
    table.vocabulary.iter().find(|p| {
        let pg = pattern_to_graph(&p.code).unwrap();
        pg.edge_count() == g.edge_count() && are_isomorphic(&pg, g).unwrap()
    })
}

#[test]
fn anti_monotone_supports() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..15 {
        let ds = random_dataset(&mut rng);
        let mined = mine_frequent(&ds, &MinerConfig::new(0.3, 4)).unwrap();
        for p in &mined.vocabulary {
            for sub in one_edge_smaller(&pattern_to_graph(&p.code).unwrap()) {
                let parent = find(&mined, &sub).unwrap_or_else(|| panic!("sub-pattern of {} missing", p.code));
                assert!(parent.support >= p.support);
            }
        }
    }
}

#[test]
fn raising_theta_shrinks_the_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..15 {
        let ds = random_dataset(&mut rng);
        let codes = |theta| -> Vec<_> {
            mine_frequent(&ds, &MinerConfig::new(theta, 4)).unwrap().vocabulary.into_iter().map(|p| p.code).collect()
        };
        let (low, high) = (codes(0.25), codes(0.6));
        assert!(high.iter().all(|c| low.contains(c)));
    }
}

#[test]
fn deterministic_across_thread_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let graphs = (0..20).map(|_| common::random_graph(&mut rng, 9, 0.3, 3, 2)).collect();
    let ds = GraphDataset::from_graphs("threads", graphs).unwrap();
    let mine = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| mine_frequent(&ds, &MinerConfig::new(0.2, 4)).unwrap())
    };
    let one = mine(1);
    assert_eq!(one.patterns_text(), mine(4).patterns_text());
    assert_eq!(one.incidence, mine(3).incidence);
    // ascending minimum-code order
    assert!(one.vocabulary.windows(2).all(|w| w[0].code < w[1].code));
}
