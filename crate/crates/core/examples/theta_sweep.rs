//! Sensitivity of accuracy to the minimum support threshold.
//!
//! `cargo run --release --example theta_sweep -- [SPEC]`, where SPEC is e.g.
//! `theta=0.05:0.95:0.05` or `dim=16,32,64,128`. Writes
//! `out/sweep/sweep_summary.tsv`.

use skelcomp::pipeline::{run_sweep, PipelineConfig, Sweep};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = std::env::args().nth(1).unwrap_or_else(|| "theta=0.15,0.35,0.55,0.75,0.95".into());
    let sweep: Sweep = spec.parse()?;
    let mut cfg = PipelineConfig::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data"), "MUTAG");
    cfg.out = "out/sweep".into();
    cfg.eval.repeats = 3;

    for (value, outcome) in run_sweep(&cfg, &sweep)? {
        let e = &outcome.report.evaluation;
        println!("{value:>6}  {:.4} ± {:.4}  ({} patterns)", e.mean, e.std, outcome.report.pattern_vocabulary);
    }
    Ok(())
}
