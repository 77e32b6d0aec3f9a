//! Anonymous walks: the anonymization map, the sample-size bound and the
//! skeleton table of a real dataset.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use skelcomp::graph::{load_tu_dataset, Graph};
use skelcomp::walks::{anonymize, build_skeletons, random_walk, sample_bound, WalkConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for walk in [["A", "B", "C", "D"], ["B", "C", "D", "A"], ["A", "A", "B", "C"], ["A", "A", "D", "C"]] {
        println!("{walk:?} -> {}", anonymize(&walk));
    }

    for (lambda, eps, delta) in [(4, 1.0, 0.05), (2, 1.0, 1.0), (10, 0.5, 0.05)] {
        println!("walks needed for lambda={lambda} eps={eps} delta={delta}: {}", sample_bound(lambda, eps, delta)?);
    }

    let square = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)])?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let walk = random_walk(&square, 0, 6, &mut rng)?;
    println!("walk on a 4-cycle: {walk:?} -> {}", anonymize(&walk));

    let ds = load_tu_dataset(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/MUTAG"), "MUTAG")?;
    let table = build_skeletons(&ds, &WalkConfig::default())?;
    let sizes: Vec<usize> = table.incidence.rows().iter().map(Vec::len).collect();
    println!(
        "MUTAG skeletons: {} distinct walks of length 10, {:.1} present per graph",
        table.len(),
        sizes.iter().sum::<usize>() as f64 / sizes.len() as f64
    );
    let counts = table.incidence.column_sums();
    let mut common: Vec<usize> = (0..table.len()).collect();
    common.sort_by_key(|&c| std::cmp::Reverse(counts[c]));
    for &c in common.iter().take(3) {
        println!("  {} in {} graphs", table.vocabulary[c], counts[c]);
    }
    Ok(())
}
