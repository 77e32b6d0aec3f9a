//! Learn graph embeddings from walk and subgraph features and look at the
//! training objective and nearest neighbors.

use skelcomp::embed::{train, TrainConfig};
use skelcomp::graph::load_tu_dataset;
use skelcomp::miner::{mine_frequent, MinerConfig};
use skelcomp::walks::{build_skeletons, WalkConfig};

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (norm(a) * norm(b))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ds = load_tu_dataset(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/MUTAG"), "MUTAG")?;
    let skeletons = build_skeletons(&ds, &WalkConfig::default())?;
    let components = mine_frequent(&ds, &MinerConfig::new(0.15, 5))?;
    let out = train(&skeletons, &components, &TrainConfig::default())?;

    for (epoch, value) in out.epoch_objective.iter().enumerate().step_by(10) {
        println!("epoch {epoch:>3}: mean objective {value:.4}");
    }
    let x = out.model.graphs.to_rows();
    let labels = ds.class_labels();
    // how often the nearest neighbor shares the class label
    let hits = (0..x.len())
        .filter(|&i| {
            let nearest = (0..x.len())
                .filter(|&j| j != i)
                .max_by(|&a, &b| cosine(&x[i], &x[a]).total_cmp(&cosine(&x[i], &x[b])))
                .unwrap();
            labels[nearest] == labels[i]
        })
        .count();
    println!("1-NN label agreement: {:.3}", hits as f64 / x.len() as f64);
    Ok(())
}
