//! Load a TU-format dataset and print its statistics.
//!
//! `cargo run --example load_dataset -- [DATA_DIR] [NAME]`

use skelcomp::graph::load_tu_dataset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/MUTAG").into());
    let name = args.next().unwrap_or_else(|| "MUTAG".into());

    let ds = load_tu_dataset(&dir, &name)?;
    println!("{}: {} graphs, {} classes {:?}", ds.name(), ds.len(), ds.class_count(), {
        let mut c = ds.class_labels();
        c.sort_unstable();
        c.dedup();
        c
    });
    println!("mean nodes {:.2}, mean edges {:.2}", ds.mean_node_count(), ds.mean_edge_count());
    println!("node labels: {}, edge labels: {}", ds.has_node_labels(), ds.has_edge_labels());

    let g = ds.graph(0);
    println!("graph 0: {} nodes, {} edges, class {}", g.node_count(), g.edge_count(), g.class_label());
    for e in g.edges().iter().take(5) {
        println!("  {} -[{}]- {}", e.u, e.label, e.v);
    }
    Ok(())
}
