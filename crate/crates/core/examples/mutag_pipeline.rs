//! The full pipeline on MUTAG at the reference operating point
//! (min support 0.15, 128 dimensions, walks of length 10).
//!
//! `cargo run --release --example mutag_pipeline -- [OUT_DIR]`

use skelcomp::pipeline::{run, PipelineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out/mutag".into());
    let mut cfg = PipelineConfig::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data"), "MUTAG");
    cfg.min_support = 0.15;
    cfg.train.dim = 128;
    cfg.walk.length = 10;
    cfg.out = out.into();

    let outcome = run(&cfg)?;
    println!("{}", outcome.report.summary_line());
    println!("per-repeat means: {:.3?}", outcome.report.evaluation.repeat_means());
    println!("finished in {:.1}s, artifacts in {}", outcome.wall_time_secs, cfg.out.display());
    Ok(())
}
