use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use skelcomp::pipeline::{self, PipelineConfig, Sweep};
use skelcomp::Error;

/// Graph classification from anonymous-walk and frequent-subgraph features.
#[derive(Parser)]
#[command(name = "skelcomp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample anonymous walks and write the skeleton vocabulary and incidence.
    Skeleton(Opts),
    /// Mine frequent subgraphs and write the pattern vocabulary and incidence.
    Mine(Opts),
    /// Skeleton, mine, train and evaluate; `--sweep` repeats over a grid.
    Run(Opts),
}

#[derive(Args)]
struct Opts {
    /// TOML file with pipeline settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dataset_dir: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    min_sup: Option<f64>,
    #[arg(long)]
    max_edges: Option<usize>,
    #[arg(long)]
    walk_length: Option<usize>,
    #[arg(long)]
    walks_per_node: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    neg_walks: Option<usize>,
    #[arg(long)]
    neg_subgraphs: Option<usize>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    repeats: Option<usize>,
    /// Comma-separated kernel parameters, e.g. `0.01,0.1,1`.
    #[arg(long, value_delimiter = ',')]
    sigma_grid: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// `theta=START:STOP:STEP`, `theta=a,b,c` or `dim=a,b,c`.
    #[arg(long)]
    sweep: Option<String>,
    /// Train graph rows only; feature rows keep their initial values.
    #[arg(long)]
    freeze_features: bool,
    /// Skip mining and train on walk features alone.
    #[arg(long)]
    skeleton_only: bool,
    #[arg(long)]
    no_cache: bool,
    #[arg(long)]
    threads: Option<usize>,
}

impl Opts {
    fn config(&self) -> Result<PipelineConfig, Error> {
        let mut c = match &self.config {
            Some(p) => PipelineConfig::from_toml_file(p)?,
            None => PipelineConfig::default(),
        };
        macro_rules! set {
            ($flag:ident => $($field:tt)+) => {
                if let Some(v) = self.$flag.clone() {
                    c.$($field)+ = v;
                }
            };
        }
        set!(dataset_dir => dataset_dir);
        set!(dataset => dataset);
        set!(min_sup => min_support);
        set!(max_edges => max_edges);
        set!(walk_length => walk.length);
        set!(walks_per_node => walk.walks_per_node);
        set!(dim => train.dim);
        set!(epochs => train.epochs);
        set!(lr => train.learning_rate);
        set!(neg_walks => train.neg_walks);
        set!(neg_subgraphs => train.neg_subgraphs);
        set!(folds => eval.folds);
        set!(repeats => eval.repeats);
        set!(sigma_grid => eval.sigma_grid);
        set!(seed => seed);
        set!(out => out);
        if self.threads.is_some() {
            c.threads = self.threads;
        }
        c.train.freeze_features |= self.freeze_features;
        c.components &= !self.skeleton_only;
        c.cache &= !self.no_cache;
        Ok(c)
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Skeleton(o) => {
            let s = pipeline::cmd_skeleton(&o.config()?)?;
            println!("{} anonymous walks -> {}", s.value.len(), s.dir.display());
        }
        Command::Mine(o) => {
            let s = pipeline::cmd_mine(&o.config()?)?;
            println!("{} frequent patterns -> {}", s.value.len(), s.dir.display());
        }
        Command::Run(o) => {
            let cfg = o.config()?;
            match &o.sweep {
                Some(spec) => {
                    let sweep: Sweep = spec.parse()?;
                    for (v, r) in pipeline::run_sweep(&cfg, &sweep)? {
                        println!("{v}\t{}", r.report.summary_line());
                    }
                    println!("summary -> {}", cfg.out.join("sweep_summary.tsv").display());
                }
                None => {
                    let r = pipeline::run(&cfg)?;
                    println!("{}", r.report.summary_line());
                    println!("report -> {}", cfg.out.join("report.txt").display());
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
