//! `is_minimal` against exhaustive enumeration of every DFS code of small
//! graphs.

mod common;

use common::random_connected_graph;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use skelcomp::graph::{are_isomorphic, Graph, GraphDataset};
use skelcomp::miner::{is_minimal, mine_frequent, pattern_to_graph, DfsCode, DfsEdge, MinerConfig};

/// Every code produced by some depth-first traversal: any start node, any
/// order of unvisited neighbors. On discovering a node, its edges back to
/// already discovered nodes are listed first, by ascending target index.
fn all_codes(g: &Graph) -> Vec<DfsCode> {
    struct State {
        index: Vec<Option<usize>>,
        used: Vec<bool>,
        stack: Vec<usize>,
        code: Vec<DfsEdge>,
    }
    fn edge(g: &Graph, s: &State, a: usize, b: usize, e: usize) -> DfsEdge {
        DfsEdge {
            from: s.index[a].unwrap(),
            to: s.index[b].unwrap(),
            from_label: g.node_label(a),
            edge_label: g.edge(e).label,
            to_label: g.node_label(b),
        }
    }
    fn discover(g: &Graph, s: &mut State, v: usize, out: &mut Vec<DfsCode>) {
        let mut back: Vec<(usize, usize, usize)> = g
            .adjacency(v)
            .iter()
            .filter(|&&(u, e)| s.index[u].is_some() && !s.used[e])
            .map(|&(u, e)| (s.index[u].unwrap(), u, e))
            .collect();
        back.sort_unstable();
        for &(_, u, e) in &back {
            s.used[e] = true;
            let de = edge(g, s, v, u, e);
            s.code.push(de);
        }
        s.stack.push(v);
        advance(g, s, out);
        s.stack.pop();
        for &(_, _, e) in back.iter().rev() {
            s.used[e] = false;
            s.code.pop();
        }
    }
    fn advance(g: &Graph, s: &mut State, out: &mut Vec<DfsCode>) {
        // deepest stack node with an undiscovered neighbor
        let Some(depth) = (0..s.stack.len()).rev().find(|&d| g.neighbors(s.stack[d]).any(|u| s.index[u].is_none())) else {
            if s.code.len() == g.edge_count() {
                out.push(DfsCode(s.code.clone()));
            }
            return;
        };
        let saved: Vec<usize> = s.stack.drain(depth + 1..).collect();
        let v = s.stack[depth];
        let next = s.index.iter().flatten().count();
        for &(u, e) in g.adjacency(v) {
            if s.index[u].is_some() {
                continue;
            }
            s.index[u] = Some(next);
            s.used[e] = true;
            let de = edge(g, s, v, u, e);
            s.code.push(de);
            discover(g, s, u, out);
            s.code.pop();
            s.used[e] = false;
            s.index[u] = None;
        }
        s.stack.extend(saved);
    }
    let mut out = Vec::new();
    for start in 0..g.node_count() {
        let mut s = State { index: vec![None; g.node_count()], used: vec![false; g.edge_count()], stack: vec![], code: vec![] };
        s.index[start] = Some(0);
        discover(g, &mut s, start, &mut out);
    }
    out.sort();
    out.dedup();
    out
}

#[test]
fn enumeration_finds_triangle_codes() {
    let tri = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
    let codes = all_codes(&tri);
    assert_eq!(codes.len(), 1);
    assert_eq!(codes[0].to_string(), "(0,1,0,0,0)(1,2,0,0,0)(2,0,0,0,0)");
}

#[test]
fn only_the_smallest_code_is_minimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    for case in 0..150 {
        let n = 2 + case % 4;
        let g = random_connected_graph(&mut rng, n, case % 3, 2, 2);
        let codes = all_codes(&g);
        assert!(!codes.is_empty());
        for (k, c) in codes.iter().enumerate() {
            assert_eq!(is_minimal(c).unwrap(), k == 0, "graph {case}: code {c}");
            checked += 1;
        }
    }
    assert!(checked > 300);
}

#[test]
fn mined_codes_are_the_enumerated_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let graphs = (0..6).map(|_| random_connected_graph(&mut rng, 6, 2, 2, 1)).collect();
    let ds = GraphDataset::from_graphs("codes", graphs).unwrap();
    for p in mine_frequent(&ds, &MinerConfig::new(0.3, 4)).unwrap().vocabulary {
        let g = pattern_to_graph(&p.code).unwrap();
        let min = all_codes(&g).remove(0);
        assert_eq!(min, p.code);
        assert!(are_isomorphic(&pattern_to_graph(&min).unwrap(), &g).unwrap());
    }
}
