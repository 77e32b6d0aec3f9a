//! End-to-end orchestration: skeleton → mine → train → evaluate.
//!
//! Every stage writes its artifacts into a content-addressed directory
//! `<cache>/<stage>-<hash>/` together with a `manifest.json`. The hash is a
//! SHA-256 over the canonical JSON of everything that can change a byte of
//! the stage output (including the hashes of upstream stages and of the
//! dataset files), so a matching directory is reused as is and any change
//! forces a recompute.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::classify::{cross_validate, EvalConfig, EvalReport};
use crate::embed::{self, EmbeddingModel, TrainConfig, TrainOutput};
use crate::error::Error;
use crate::graph::{load_tu_dataset_with, GraphDataset, LoadOptions};
use crate::miner::{mine_frequent, ComponentTable, MinerConfig};
use crate::walks::{build_skeletons, SkeletonTable, WalkConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub dataset_dir: PathBuf,
    pub dataset: String,
    /// Master seed; copied into the walk, train and eval configs.
    pub seed: u64,
    pub min_support: f64,
    pub max_edges: usize,
    pub node_budget: usize,
    /// `false` skips mining and trains on skeleton features only.
    pub components: bool,
    pub allow_self_loops: bool,
    pub walk: WalkConfig,
    pub train: TrainConfig,
    pub eval: EvalConfig,
    pub out: PathBuf,
    /// Reuse stage directories whose hash matches.
    pub cache: bool,
    /// Defaults to `<out>/cache`.
    pub cache_dir: Option<PathBuf>,
    /// Worker threads; `None` uses all cores. Never changes results.
    pub threads: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            dataset_dir: PathBuf::from("data"),
            dataset: "MUTAG".into(),
            seed: 0,
            min_support: 0.15,
            max_edges: 5,
            node_budget: MinerConfig::default().node_budget,
            components: true,
            allow_self_loops: false,
            walk: WalkConfig::default(),
            train: TrainConfig::default(),
            eval: EvalConfig::default(),
            out: PathBuf::from("out"),
            cache: true,
            cache_dir: None,
            threads: None,
        }
    }
}

impl PipelineConfig {
    pub fn new(dataset_dir: impl Into<PathBuf>, dataset: &str) -> Self {
        PipelineConfig { dataset_dir: dataset_dir.into(), dataset: dataset.into(), ..Default::default() }
    }

    pub fn from_toml(text: &str) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))
    }

    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<Self, Error> {
        let text = fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.resolved()).expect("config serializes")
    }

    pub fn miner_config(&self) -> MinerConfig {
        MinerConfig { min_support: self.min_support, max_edges: self.max_edges, node_budget: self.node_budget }
    }

    /// Copy with the master seed pushed into every sub-config.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        c.walk.seed = self.seed;
        c.train.seed = self.seed;
        c.eval.seed = self.seed;
        c
    }

    pub fn cache_root(&self) -> PathBuf {
        self.cache_dir.clone().unwrap_or_else(|| self.out.join("cache"))
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.dataset.is_empty() {
            return Err(Error::Config("dataset name is empty".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be >= 1".into()));
        }
        self.miner_config().validate()?;
        self.walk.validate()?;
        self.train.validate()?;
        self.eval.validate()?;
        Ok(())
    }
}

/// Result of one stage, either freshly computed or read back from the cache.
#[derive(Clone, Debug)]
pub struct StageOutput<T> {
    pub value: T,
    pub dir: PathBuf,
    pub hash: String,
    pub cached: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub dataset: String,
    pub graphs: usize,
    pub walk_vocabulary: usize,
    pub pattern_vocabulary: usize,
    pub config_hash: String,
    pub evaluation: EvalReport,
}

impl RunReport {
    pub fn summary_line(&self) -> String {
        format!(
            "{}: {} (walks {}, patterns {})",
            self.dataset,
            self.evaluation.summary_line(),
            self.walk_vocabulary,
            self.pattern_vocabulary
        )
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "dataset = {}", self.dataset);
        let _ = writeln!(out, "graphs = {}", self.graphs);
        let _ = writeln!(out, "walk_vocabulary = {}", self.walk_vocabulary);
        let _ = writeln!(out, "pattern_vocabulary = {}", self.pattern_vocabulary);
        let _ = writeln!(out, "config_hash = {}", self.config_hash);
        out + &self.evaluation.to_text()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn same_results(&self, other: &RunReport) -> bool {
        self.dataset == other.dataset
            && self.graphs == other.graphs
            && self.walk_vocabulary == other.walk_vocabulary
            && self.pattern_vocabulary == other.pattern_vocabulary
            && self.config_hash == other.config_hash
            && self.evaluation.same_results(&other.evaluation)
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub skeleton: StageOutput<()>,
    pub components: Option<StageOutput<()>>,
    pub embedding: StageOutput<()>,
    pub epoch_objective: Vec<f64>,
    pub wall_time_secs: f64,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Canonical hash of a JSON value (object keys are sorted by `serde_json`).
pub fn config_hash(key: &Value) -> String {
    sha256_hex(&serde_json::to_vec(key).expect("json serializes"))
}

/// Hash over the dataset's `<name>_*.txt` files, names included.
fn dataset_fingerprint(dir: &Path, name: &str) -> Result<String, Error> {
    let prefix = format!("{name}_");
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name().and_then(|f| f.to_str()).is_some_and(|f| f.starts_with(&prefix) && f.ends_with(".txt"))
        })
        .collect();
    files.sort();
    let mut h = Sha256::new();
    for f in files {
        let bytes = fs::read(&f).map_err(|e| Error::io(&f, e))?;
        h.update(f.file_name().unwrap().to_string_lossy().as_bytes());
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(&bytes);
    }
    Ok(hex::encode(h.finalize()))
}

struct Context {
    cfg: PipelineConfig,
    dataset: GraphDataset,
    dataset_hash: String,
}

impl Context {
    fn open(cfg: &PipelineConfig) -> Result<Self, Error> {
        cfg.validate()?;
        let cfg = cfg.resolved();
        let dir = cfg.dataset_dir.join(&cfg.dataset);
        let dir = if dir.is_dir() { dir } else { cfg.dataset_dir.clone() };
        let opts = LoadOptions { allow_self_loops: cfg.allow_self_loops };
        let dataset = load_tu_dataset_with(&dir, &cfg.dataset, opts).map_err(|e| Error::from(e).in_stage("load"))?;
        let dataset_hash = dataset_fingerprint(&dir, &cfg.dataset)?;
        log::info!(
            "loaded {} graphs from {} (mean {:.2} nodes)",
            dataset.len(),
            dir.display(),
            dataset.mean_node_count()
        );
        Ok(Context { cfg, dataset, dataset_hash })
    }

    fn skeleton_key(&self) -> Value {
        json!({
            "stage": "skeleton",
            "version": VERSION,
            "dataset": self.dataset_hash,
            "allow_self_loops": self.cfg.allow_self_loops,
            "walk": self.cfg.walk,
        })
    }

    fn mine_key(&self) -> Value {
        json!({
            "stage": "mine",
            "version": VERSION,
            "dataset": self.dataset_hash,
            "allow_self_loops": self.cfg.allow_self_loops,
            "miner": {
                "min_support": self.cfg.min_support,
                "max_edges": self.cfg.max_edges,
                "node_budget": self.cfg.node_budget,
            },
        })
    }

    fn train_key(&self, skeleton: &str, components: Option<&str>) -> Value {
        json!({
            "stage": "train",
            "version": VERSION,
            "skeleton": skeleton,
            "components": components,
            "train": self.cfg.train,
        })
    }

    /// Runs `compute` unless a matching cache directory can be loaded.
    fn stage<T>(
        &self,
        stage: &'static str,
        key: &Value,
        files: &[&str],
        load: impl Fn(&Path) -> Result<T, Error>,
        compute: impl FnOnce() -> Result<T, Error>,
        write: impl Fn(&T, &Path) -> Result<(), Error>,
    ) -> Result<StageOutput<T>, Error> {
        let hash = config_hash(key);
        let root = self.cfg.cache_root();
        let dir = root.join(format!("{stage}-{}", &hash[..16]));
        if self.cfg.cache && manifest_matches(&dir, &hash, files) {
            match load(&dir) {
                Ok(value) => {
                    log::info!("{stage}: reusing {}", dir.display());
                    return Ok(StageOutput { value, dir, hash, cached: true });
                }
                Err(e) => log::warn!("{stage}: cache at {} unreadable ({e}); recomputing", dir.display()),
            }
        }
        let started = Instant::now();
        let value = compute().map_err(|e| e.in_stage(stage))?;
        let wall = started.elapsed().as_secs_f64();
        log::info!("{stage}: computed in {wall:.2}s");

        let tmp = root.join(format!(".{stage}-{}.tmp{}", &hash[..16], std::process::id()));
        let _ = fs::remove_dir_all(&tmp);
        fs::create_dir_all(&tmp).map_err(|e| Error::io(&tmp, e))?;
        write(&value, &tmp).map_err(|e| e.in_stage(stage))?;
        let mut digests = serde_json::Map::new();
        for f in files {
            let p = tmp.join(f);
            let bytes = fs::read(&p).map_err(|e| Error::io(&p, e))?;
            digests.insert(f.to_string(), Value::String(sha256_hex(&bytes)));
        }
        let manifest = json!({
            "stage": stage,
            "tool_version": VERSION,
            "config_hash": hash,
            "seed": self.cfg.seed,
            "wall_time_secs": wall,
            "config": key,
            "files": digests,
        });
        write_file(&tmp.join("manifest.json"), serde_json::to_string_pretty(&manifest).unwrap().as_bytes())?;
        let _ = fs::remove_dir_all(&dir);
        fs::rename(&tmp, &dir).map_err(|e| Error::io(&dir, e))?;
        Ok(StageOutput { value, dir, hash, cached: false })
    }

    fn skeleton(&self) -> Result<StageOutput<SkeletonTable>, Error> {
        self.stage(
            "skeleton",
            &self.skeleton_key(),
            &["vocabulary.txt", "incidence.txt"],
            |dir| Ok(SkeletonTable::from_text(&read_text(&dir.join("vocabulary.txt"))?, &read_text(&dir.join("incidence.txt"))?)?),
            || Ok(build_skeletons(&self.dataset, &self.cfg.walk)?),
            |t, dir| {
                write_file(&dir.join("vocabulary.txt"), t.vocabulary_text().as_bytes())?;
                write_file(&dir.join("incidence.txt"), t.incidence.to_text().as_bytes())
            },
        )
    }

    fn mine(&self) -> Result<StageOutput<ComponentTable>, Error> {
        self.stage(
            "mine",
            &self.mine_key(),
            &["patterns.txt", "incidence.txt"],
            |dir| Ok(ComponentTable::from_text(&read_text(&dir.join("patterns.txt"))?, &read_text(&dir.join("incidence.txt"))?)?),
            || Ok(mine_frequent(&self.dataset, &self.cfg.miner_config())?),
            |t, dir| {
                write_file(&dir.join("patterns.txt"), t.patterns_text().as_bytes())?;
                write_file(&dir.join("incidence.txt"), t.incidence.to_text().as_bytes())
            },
        )
    }

    fn train(
        &self,
        skeleton: &StageOutput<SkeletonTable>,
        components: Option<&StageOutput<ComponentTable>>,
    ) -> Result<StageOutput<TrainOutput>, Error> {
        let key = self.train_key(&skeleton.hash, components.map(|c| c.hash.as_str()));
        let echo = serde_json::to_string(&key).unwrap();
        let empty;
        let table = match components {
            Some(c) => &c.value,
            None => {
                empty = ComponentTable::empty(self.dataset.len());
                &empty
            }
        };
        self.stage(
            "train",
            &key,
            &["embedding.bin", "embedding.csv", "objective.txt", "step_objective.txt"],
            |dir| {
                let file = fs::File::open(dir.join("embedding.bin")).map_err(|e| Error::io(dir, e))?;
                let (model, stored) = EmbeddingModel::read_binary(std::io::BufReader::new(file))?;
                if stored != echo {
                    return Err(Error::Config("embedding was trained with a different config".into()));
                }
                let series = |name: &str| -> Result<Vec<f64>, Error> {
                    read_text(&dir.join(name))?
                        .lines()
                        .map(|l| l.parse::<f64>().map_err(|e| Error::Config(format!("{name}: {e}"))))
                        .collect()
                };
                Ok(TrainOutput {
                    model,
                    epoch_objective: series("objective.txt")?,
                    step_objective: series("step_objective.txt")?,
                })
            },
            || Ok(embed::train(&skeleton.value, table, &self.cfg.train)?),
            |t, dir| {
                let mut bin = Vec::new();
                t.model.write_binary(&mut bin, &echo).map_err(|e| Error::io(dir, e))?;
                write_file(&dir.join("embedding.bin"), &bin)?;
                write_file(&dir.join("embedding.csv"), t.model.graphs_csv().as_bytes())?;
                let lines = |v: &[f64]| v.iter().map(|v| format!("{v:?}\n")).collect::<String>();
                write_file(&dir.join("objective.txt"), lines(&t.epoch_objective).as_bytes())?;
                write_file(&dir.join("step_objective.txt"), lines(&t.step_objective).as_bytes())
            },
        )
    }
}

fn manifest_matches(dir: &Path, hash: &str, files: &[&str]) -> bool {
    let Ok(text) = fs::read_to_string(dir.join("manifest.json")) else {
        return false;
    };
    let Ok(manifest) = serde_json::from_str::<Value>(&text) else {
        return false;
    };
    manifest["config_hash"] == hash
        && files.iter().all(|f| {
            fs::read(dir.join(f)).is_ok_and(|bytes| manifest["files"][*f] == Value::String(sha256_hex(&bytes)))
        })
}

fn read_text(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Error> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn erase<T>(s: &StageOutput<T>) -> StageOutput<()> {
    StageOutput { value: (), dir: s.dir.clone(), hash: s.hash.clone(), cached: s.cached }
}

/// Anonymous-walk stage: `vocabulary.txt`, `incidence.txt`, `manifest.json`.
pub fn cmd_skeleton(cfg: &PipelineConfig) -> Result<StageOutput<SkeletonTable>, Error> {
    with_threads(cfg.threads, || Context::open(cfg)?.skeleton())?
}

/// Frequent-subgraph stage: `patterns.txt`, `incidence.txt`, `manifest.json`.
pub fn cmd_mine(cfg: &PipelineConfig) -> Result<StageOutput<ComponentTable>, Error> {
    with_threads(cfg.threads, || Context::open(cfg)?.mine())?
}

/// Full pipeline. Writes `report.txt`, `report.json`, `embedding.csv`,
/// `embedding.bin`, `config.toml` and `manifest.json` into `cfg.out`.
pub fn run(cfg: &PipelineConfig) -> Result<RunOutcome, Error> {
    with_threads(cfg.threads, || run_inner(cfg))?
}

fn run_inner(cfg: &PipelineConfig) -> Result<RunOutcome, Error> {
    let started = Instant::now();
    let ctx = Context::open(cfg)?;
    let skeleton = ctx.skeleton()?;
    let components = if ctx.cfg.components { Some(ctx.mine()?) } else { None };
    let trained = ctx.train(&skeleton, components.as_ref())?;

    let labels = ctx.dataset.class_labels();
    let vectors = trained.value.model.graphs.to_rows();
    let evaluation = cross_validate(&vectors, &labels, &ctx.cfg.eval).map_err(|e| Error::from(e).in_stage("evaluate"))?;
    let eval_key = json!({ "stage": "evaluate", "version": VERSION, "train": trained.hash, "eval": ctx.cfg.eval });
    let report = RunReport {
        dataset: ctx.cfg.dataset.clone(),
        graphs: ctx.dataset.len(),
        walk_vocabulary: skeleton.value.len(),
        pattern_vocabulary: components.as_ref().map_or(0, |c| c.value.len()),
        config_hash: config_hash(&eval_key),
        evaluation,
    };

    let out = &ctx.cfg.out;
    write_file(&out.join("report.txt"), report.to_text().as_bytes())?;
    write_file(&out.join("report.json"), report.to_json().as_bytes())?;
    for f in ["embedding.csv", "embedding.bin"] {
        let bytes = fs::read(trained.dir.join(f)).map_err(|e| Error::io(trained.dir.join(f), e))?;
        write_file(&out.join(f), &bytes)?;
    }
    write_file(&out.join("config.toml"), cfg.to_toml().as_bytes())?;
    let wall_time_secs = started.elapsed().as_secs_f64();
    let manifest = json!({
        "stage": "run",
        "tool_version": VERSION,
        "config_hash": report.config_hash,
        "seed": ctx.cfg.seed,
        "wall_time_secs": wall_time_secs,
        "evaluate_wall_time_secs": report.evaluation.wall_time_secs,
        "stages": {
            "skeleton": { "hash": skeleton.hash, "cached": skeleton.cached },
            "mine": components.as_ref().map(|c| json!({ "hash": c.hash, "cached": c.cached })),
            "train": { "hash": trained.hash, "cached": trained.cached },
        },
    });
    write_file(&out.join("manifest.json"), serde_json::to_string_pretty(&manifest).unwrap().as_bytes())?;
    log::info!("{}", report.summary_line());

    Ok(RunOutcome {
        skeleton: erase(&skeleton),
        components: components.as_ref().map(erase),
        embedding: erase(&trained),
        epoch_objective: trained.value.epoch_objective,
        report,
        wall_time_secs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    Theta,
    Dim,
}

impl SweepParam {
    fn name(self) -> &'static str {
        match self {
            SweepParam::Theta => "theta",
            SweepParam::Dim => "dim",
        }
    }
}

/// `theta=0.05:0.95:0.05`, `theta=0.1,0.2` or `dim=16,32,64`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl FromStr for Sweep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = |m: &str| Error::Config(format!("sweep {s:?}: {m}"));
        let (name, spec) = s.split_once('=').ok_or_else(|| bad("expected name=values"))?;
        let param = match name.trim() {
            "theta" | "min-sup" | "min_sup" => SweepParam::Theta,
            "dim" => SweepParam::Dim,
            other => return Err(bad(&format!("unknown parameter {other:?}"))),
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad(&format!("not a number: {t:?}")));
        let values: Vec<f64> = if spec.contains(':') {
            let parts: Vec<f64> = spec.split(':').map(num).collect::<Result<_, _>>()?;
            let [start, stop, step] = parts[..] else {
                return Err(bad("range must be start:stop:step"));
            };
            if !(step > 0.0) || stop < start {
                return Err(bad("range needs step > 0 and stop >= start"));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            (0..=n).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect()
        } else {
            spec.split(',').map(num).collect::<Result<_, _>>()?
        };
        if values.is_empty() {
            return Err(bad("no values"));
        }
        if param == SweepParam::Dim && values.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
            return Err(bad("dim values must be positive integers"));
        }
        Ok(Sweep { param, values })
    }
}

/// One run per sweep value into `<out>/<param>-<value>/`, sharing the stage
/// cache, plus `<out>/sweep_summary.tsv`.
pub fn run_sweep(cfg: &PipelineConfig, sweep: &Sweep) -> Result<Vec<(f64, RunOutcome)>, Error> {
    let mut results = Vec::new();
    let mut tsv = format!("{}\tmean_accuracy\tstd_accuracy\twalk_vocabulary\tpattern_vocabulary\n", sweep.param.name());
    for &v in &sweep.values {
        let mut c = cfg.clone();
        match sweep.param {
            SweepParam::Theta => c.min_support = v,
            SweepParam::Dim => c.train.dim = v as usize,
        }
        c.out = cfg.out.join(format!("{}-{v}", sweep.param.name()));
        c.cache_dir = Some(cfg.cache_root());
        let outcome = run(&c)?;
        let r = &outcome.report;
        let _ = writeln!(
            tsv,
            "{v}\t{}\t{}\t{}\t{}",
            r.evaluation.mean, r.evaluation.std, r.walk_vocabulary, r.pattern_vocabulary
        );
        results.push((v, outcome));
    }
    write_file(&cfg.out.join("sweep_summary.tsv"), tsv.as_bytes())?;
    Ok(results)
}
