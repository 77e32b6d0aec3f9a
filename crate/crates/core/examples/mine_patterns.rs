//! Frequent connected subgraphs of MUTAG with gSpan.
//!
//! `cargo run --release --example mine_patterns -- [THETA] [MAX_EDGES]`

use skelcomp::graph::load_tu_dataset;
use skelcomp::miner::{mine_frequent, pattern_to_graph, MinerConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let theta: f64 = args.next().map_or(Ok(0.15), |s| s.parse())?;
    let max_edges: usize = args.next().map_or(Ok(5), |s| s.parse())?;

    let ds = load_tu_dataset(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/MUTAG"), "MUTAG")?;
    let started = std::time::Instant::now();
    let table = mine_frequent(&ds, &MinerConfig::new(theta, max_edges))?;
    println!("{} patterns at theta={theta} (<= {max_edges} edges) in {:.2?}", table.len(), started.elapsed());

    let mut by_size = vec![0; max_edges + 1];
    for p in &table.vocabulary {
        by_size[p.code.len()] += 1;
    }
    for (edges, n) in by_size.iter().enumerate().skip(1) {
        println!("  {edges} edges: {n}");
    }
    if let Some(p) = table.vocabulary.iter().max_by(|a, b| {
        (a.code.len(), a.support).partial_cmp(&(b.code.len(), b.support)).unwrap()
    }) {
        let g = pattern_to_graph(&p.code)?;
        println!("largest, most frequent: {} support {:.3} ({} nodes)", p.code, p.support, g.node_count());
    }
    Ok(())
}
