//! Graph embeddings trained with a joint negative-sampling objective.
//!
//! Each graph is a "document" whose "words" are the anonymous walks of its
//! skeleton and the frequent subgraphs of its component vector. For every
//! present feature `f` of graph `g` one SGD step ascends
//!
//! ```text
//! log σ(x_g · m_f) + Σ_k log σ(-x_g · m_k)
//! ```
//!
//! where the `m_k` are features of the same kind absent from `g`, drawn
//! uniformly without replacement.

use std::io::{self, Read, Write};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::incidence::Incidence;
use crate::miner::ComponentTable;
use crate::seeding;
use crate::walks::SkeletonTable;

/// Dot products are clamped to this magnitude before exponentiation.
pub const DOT_CLAMP: f64 = 30.0;

const MAGIC: &[u8; 8] = b"SKCEMB01";

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("skeleton table has {skeleton} rows but component table has {component}")]
    RowMismatch { skeleton: usize, component: usize },
    #[error("graphs without any positive feature: {0:?}")]
    DegenerateGraph(Vec<usize>),
    #[error("invalid train config: {0}")]
    Config(String),
    #[error("bad model file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Rows as owned vectors.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols.max(1)).take(self.rows).map(<[f64]>::to_vec).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingModel {
    /// One row per graph.
    pub graphs: Matrix,
    /// One row per anonymous walk of the skeleton vocabulary.
    pub walks: Matrix,
    /// One row per frequent subgraph of the component vocabulary.
    pub subgraphs: Matrix,
}

impl EmbeddingModel {
    pub fn dim(&self) -> usize {
        self.graphs.cols()
    }

    pub fn is_finite(&self) -> bool {
        [&self.graphs, &self.walks, &self.subgraphs]
            .iter()
            .all(|m| m.as_slice().iter().all(|x| x.is_finite()))
    }

    /// Binary layout, all integers and floats little-endian:
    /// magic `SKCEMB01`, `u64` N, μ, ν, d, `u64` length of a UTF-8 config
    /// echo followed by its bytes, then the graph, walk and subgraph matrices
    /// as row-major `f64`.
    pub fn write_binary<W: Write>(&self, mut w: W, config_echo: &str) -> io::Result<()> {
        w.write_all(MAGIC)?;
        for n in [self.graphs.rows, self.walks.rows, self.subgraphs.rows, self.dim()] {
            w.write_all(&(n as u64).to_le_bytes())?;
        }
        w.write_all(&(config_echo.len() as u64).to_le_bytes())?;
        w.write_all(config_echo.as_bytes())?;
        for m in [&self.graphs, &self.walks, &self.subgraphs] {
            for x in m.as_slice() {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Reads the binary layout back, returning the model and its config echo.
    pub fn read_binary<R: Read>(mut r: R) -> Result<(Self, String), EmbedError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(EmbedError::Format("bad magic".into()));
        }
        let mut word = || -> Result<usize, EmbedError> {
            let mut buf = [0u8; 8];
            r.read_exact(&mut buf)?;
            usize::try_from(u64::from_le_bytes(buf))
                .map_err(|_| EmbedError::Format("size overflow".into()))
        };
        let (n, mu, nu, d, echo_len) = (word()?, word()?, word()?, word()?, word()?);
        let mut echo = vec![0u8; echo_len];
        r.read_exact(&mut echo)?;
        let echo = String::from_utf8(echo).map_err(|_| EmbedError::Format("config echo is not UTF-8".into()))?;
        let mut matrix = |rows: usize| -> Result<Matrix, EmbedError> {
            let mut data = vec![0.0; rows * d];
            let mut buf = [0u8; 8];
            for x in &mut data {
                r.read_exact(&mut buf)?;
                *x = f64::from_le_bytes(buf);
            }
            Ok(Matrix::from_vec(rows, d, data))
        };
        let model = EmbeddingModel { graphs: matrix(n)?, walks: matrix(mu)?, subgraphs: matrix(nu)? };
        Ok((model, echo))
    }

    /// CSV of the graph matrix: `graph_id,x0,..,x{d-1}`, shortest
    /// round-trip float formatting.
    pub fn graphs_csv(&self) -> String {
        let mut out = String::from("graph_id");
        for k in 0..self.dim() {
            out.push_str(&format!(",x{k}"));
        }
        out.push('\n');
        for i in 0..self.graphs.rows() {
            out.push_str(&i.to_string());
            for x in self.graphs.row(i) {
                out.push_str(&format!(",{x}"));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub dim: usize,
    pub epochs: usize,
    /// Starting learning rate; decays linearly to `min_learning_rate`.
    pub learning_rate: f64,
    pub min_learning_rate: f64,
    /// Negative walks per positive walk.
    pub neg_walks: usize,
    /// Negative subgraphs per positive subgraph.
    pub neg_subgraphs: usize,
    pub seed: u64,
    /// Standard deviation of the Gaussian initialization.
    pub init_stddev: f64,
    /// Only update graph rows; feature rows stay at their initial values.
    pub freeze_features: bool,
    pub schedule: Schedule,
    /// Evaluate [`expected_objective`] after every epoch.
    pub track_objective: bool,
}

/// How positive features are visited within one graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// `|s| + |c|` steps per graph; each step takes a walk positive with
    /// probability `(|s|/μ) / (|s|/μ + |c|/ν)` and a subgraph positive
    /// otherwise. These are the relative weights of the walk × subgraph
    /// double loop, in which every walk term recurs ν times and every
    /// subgraph term μ times, so neither family drowns out the other.
    Balanced,
    /// One step per present walk, then one per present subgraph.
    PerFeature,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 128,
            epochs: 40,
            learning_rate: 0.025,
            min_learning_rate: 0.0001,
            neg_walks: 5,
            neg_subgraphs: 5,
            seed: 0,
            init_stddev: 0.001,
            freeze_features: false,
            schedule: Schedule::Balanced,
            track_objective: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), EmbedError> {
        if self.dim < 1 {
            return Err(EmbedError::Config("dim must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(EmbedError::Config("learning rate must be > 0".into()));
        }
        if !(self.min_learning_rate >= 0.0 && self.min_learning_rate <= self.learning_rate) {
            return Err(EmbedError::Config("min learning rate must be in [0, learning rate]".into()));
        }
        if !(self.init_stddev >= 0.0 && self.init_stddev.is_finite()) {
            return Err(EmbedError::Config("init stddev must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Gaussian initialization of all three matrices, graph rows first.
pub fn init_model(graphs: usize, walks: usize, subgraphs: usize, cfg: &TrainConfig) -> EmbeddingModel {
    let mut rng = seeding::stream(cfg.seed, seeding::INIT, 0);
    let normal = Normal::new(0.0, cfg.init_stddev).expect("validated stddev");
    let mut draw = |rows: usize| {
        Matrix::from_vec(rows, cfg.dim, (0..rows * cfg.dim).map(|_| normal.sample(&mut rng)).collect())
    };
    EmbeddingModel { graphs: draw(graphs), walks: draw(walks), subgraphs: draw(subgraphs) }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// (value, d value / d dot) of one pair's term, on the clamped dot product
fn pair_term(dot: f64, positive: bool) -> (f64, f64) {
    let x = dot.clamp(-DOT_CLAMP, DOT_CLAMP);
    if positive {
        (log_sigmoid(x), 1.0 - sigmoid(x))
    } else {
        (log_sigmoid(-x), -sigmoid(x))
    }
}

/// Term `log σ(g·f)` (positive) or `log σ(-g·f)` (negative) with its
/// gradients with respect to `g` and `f`.
pub fn pair_loss_and_grads(g: &[f64], f: &[f64], positive: bool) -> (f64, Vec<f64>, Vec<f64>) {
    let (value, coef) = pair_term(dot(g, f), positive);
    let grad_g = f.iter().map(|x| coef * x).collect();
    let grad_f = g.iter().map(|x| coef * x).collect();
    (value, grad_g, grad_f)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureKind {
    Walk,
    Subgraph,
}

/// Exact `log Pr(feature | graph)` under the full softmax over the feature's
/// vocabulary. Reference only; training never uses it.
pub fn full_softmax_logprob(model: &EmbeddingModel, graph: usize, feature: usize, kind: FeatureKind) -> f64 {
    let features = match kind {
        FeatureKind::Walk => &model.walks,
        FeatureKind::Subgraph => &model.subgraphs,
    };
    let g = model.graphs.row(graph);
    let scores: Vec<f64> = (0..features.rows()).map(|p| dot(g, features.row(p))).collect();
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_norm = max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
    scores[feature] - log_norm
}

#[derive(Clone, Debug)]
pub struct TrainOutput {
    pub model: EmbeddingModel,
    /// [`expected_objective`] after each epoch; empty unless
    /// `track_objective` is set.
    pub epoch_objective: Vec<f64>,
    /// Mean value of the sampled step terms during each epoch.
    pub step_objective: Vec<f64>,
}

/// The training objective at the current parameters, averaged over graphs.
///
/// For graph `i` this is the sum over its present walks `s` of
/// `log σ(g·a_s) + K₁ · E[log σ(-g·a')]`, plus the same for subgraphs, where
/// the expectation is over the absent features `a'` the negatives are drawn
/// from and `K₁` is capped by their count. With `K` at least the number of
/// absent features it is exactly the sampled objective.
pub fn expected_objective(model: &EmbeddingModel, skeletons: &Incidence, components: &Incidence, cfg: &TrainConfig) -> f64 {
    objective_of(&model.graphs, &model.walks, &model.subgraphs, skeletons, components, cfg)
}

fn objective_of(
    graphs: &Matrix,
    walks: &Matrix,
    subgraphs: &Matrix,
    skeletons: &Incidence,
    components: &Incidence,
    cfg: &TrainConfig,
) -> f64 {
    let family = |g: &[f64], table: &Incidence, features: &Matrix, row: usize, k: usize| -> f64 {
        let present = table.row(row);
        if present.is_empty() {
            return 0.0;
        }
        let mut pos = 0.0;
        let mut neg = 0.0;
        for c in 0..table.column_count() {
            let x = dot(g, features.row(c));
            if present.binary_search(&c).is_ok() {
                pos += pair_term(x, true).0;
            } else {
                neg += pair_term(x, false).0;
            }
        }
        let absent = table.column_count() - present.len();
        let per_positive = if absent == 0 { 0.0 } else { k.min(absent) as f64 * neg / absent as f64 };
        pos + present.len() as f64 * per_positive
    };
    let n = skeletons.row_count();
    let per_graph: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let g = graphs.row(i);
            family(g, skeletons, walks, i, cfg.neg_walks) + family(g, components, subgraphs, i, cfg.neg_subgraphs)
        })
        .collect();
    per_graph.iter().sum::<f64>() / n.max(1) as f64
}

/// Trains on the two feature tables. See [`train_on`].
pub fn train(
    skeletons: &SkeletonTable,
    components: &ComponentTable,
    cfg: &TrainConfig,
) -> Result<TrainOutput, EmbedError> {
    train_on(&skeletons.incidence, &components.incidence, cfg)
}

/// Draws up to `k` columns absent from `row`, uniformly without
/// replacement. Returns false when fewer than `k` exist.
fn sample_absent<R: Rng>(row: &[usize], columns: usize, k: usize, rng: &mut R, out: &mut Vec<usize>) -> bool {
    out.clear();
    let absent = columns - row.len();
    if absent <= 4 * k {
        let pool: Vec<usize> = (0..columns).filter(|c| row.binary_search(c).is_err()).collect();
        out.extend(pool.choose_multiple(rng, k.min(absent)));
        return absent >= k;
    }
    while out.len() < k {
        let c = rng.random_range(0..columns);
        if row.binary_search(&c).is_err() && !out.contains(&c) {
            out.push(c);
        }
    }
    true
}

struct Step<'a> {
    lr: f64,
    freeze: bool,
    scratch: &'a mut Vec<f64>,
}

impl Step<'_> {
    fn apply(&mut self, g: &mut [f64], features: &mut Matrix, positive: usize, negatives: &[usize]) -> f64 {
        self.scratch.iter_mut().for_each(|x| *x = 0.0);
        let mut objective = 0.0;
        let pairs = std::iter::once((positive, true)).chain(negatives.iter().map(|&n| (n, false)));
        for (idx, is_positive) in pairs {
            let f = features.row_mut(idx);
            let (value, coef) = pair_term(dot(g, f), is_positive);
            objective += value;
            for (s, x) in self.scratch.iter_mut().zip(f.iter()) {
                *s += coef * x;
            }
            if !self.freeze {
                let scale = self.lr * coef;
                for (x, gx) in f.iter_mut().zip(g.iter()) {
                    *x += scale * gx;
                }
            }
        }
        for (gx, s) in g.iter_mut().zip(self.scratch.iter()) {
            *gx += self.lr * s;
        }
        objective
    }
}

/// Trains graph, walk and subgraph embeddings.
///
/// Each epoch visits the graphs in a fresh random order and, for every
/// graph, takes `|s| + |c|` ascent steps, each on one present feature bundled
/// with negatives drawn from the same family (see [`Schedule`]). Single
/// threaded and bit-for-bit reproducible for a fixed config.
pub fn train_on(skeletons: &Incidence, components: &Incidence, cfg: &TrainConfig) -> Result<TrainOutput, EmbedError> {
    cfg.validate()?;
    let n = skeletons.row_count();
    if components.row_count() != n {
        return Err(EmbedError::RowMismatch { skeleton: n, component: components.row_count() });
    }
    let degenerate: Vec<usize> =
        (0..n).filter(|&i| skeletons.row(i).is_empty() && components.row(i).is_empty()).collect();
    if !degenerate.is_empty() {
        return Err(EmbedError::DegenerateGraph(degenerate));
    }

    let mut model = init_model(n, skeletons.column_count(), components.column_count(), cfg);
    let mut order_rng = seeding::stream(cfg.seed, seeding::SHUFFLES, 0);
    let mut neg_rng = seeding::stream(cfg.seed, seeding::NEGATIVES, 0);
    let per_epoch: usize = (0..n).map(|i| skeletons.row(i).len() + components.row(i).len()).sum();
    let total = (per_epoch * cfg.epochs).max(1) as f64;
    let mut done = 0usize;
    let mut scratch = vec![0.0; cfg.dim];
    let mut negatives = Vec::new();
    let mut short_warned = false;
    let mut order: Vec<usize> = (0..n).collect();
    let mut epoch_objective = Vec::with_capacity(cfg.epochs);
    let mut step_objective = Vec::with_capacity(cfg.epochs);

    let (mu, nu) = (skeletons.column_count().max(1) as f64, components.column_count().max(1) as f64);
    let mut visit: Vec<(bool, usize)> = Vec::new();
    let mut rows = [Vec::new(), Vec::new()];
    let EmbeddingModel { graphs, walks, subgraphs } = &mut model;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut order_rng);
        let mut sum = 0.0;
        for &i in &order {
            let (s, c) = (skeletons.row(i), components.row(i));
            visit.clear();
            match cfg.schedule {
                Schedule::PerFeature => {
                    visit.extend(s.iter().map(|&f| (true, f)));
                    visit.extend(c.iter().map(|&f| (false, f)));
                }
                Schedule::Balanced => {
                    let (ws, wc) = (s.len() as f64 / mu, c.len() as f64 / nu);
                    let p_walk = ws / (ws + wc);
                    rows[0].clear();
                    rows[0].extend_from_slice(s);
                    rows[0].shuffle(&mut order_rng);
                    rows[1].clear();
                    rows[1].extend_from_slice(c);
                    rows[1].shuffle(&mut order_rng);
                    let mut next = [0usize, 0usize];
                    for _ in 0..s.len() + c.len() {
                        let fam = usize::from(!order_rng.random_bool(p_walk));
                        visit.push((fam == 0, rows[fam][next[fam] % rows[fam].len()]));
                        next[fam] += 1;
                    }
                }
            }
            for &(is_walk, positive) in &visit {
                let (table, features, k) = if is_walk {
                    (skeletons, &mut *walks, cfg.neg_walks)
                } else {
                    (components, &mut *subgraphs, cfg.neg_subgraphs)
                };
                let row = table.row(i);
                let lr = cfg.learning_rate - (cfg.learning_rate - cfg.min_learning_rate) * done as f64 / total;
                if !sample_absent(row, table.column_count(), k, &mut neg_rng, &mut negatives) && !short_warned {
                    log::warn!("graph {i}: only {} absent features for {k} negatives; using all of them", negatives.len());
                    short_warned = true;
                }
                let mut step = Step { lr, freeze: cfg.freeze_features, scratch: &mut scratch };
                sum += step.apply(graphs.row_mut(i), features, positive, &negatives);
                done += 1;
            }
        }
        step_objective.push(sum / per_epoch as f64);
        if cfg.track_objective {
            epoch_objective.push(objective_of(graphs, walks, subgraphs, skeletons, components, cfg));
        }
    }
    Ok(TrainOutput { model, epoch_objective, step_objective })
}

/// Four graphs over six walks and five subgraphs, small enough that a run of
/// a few hundred epochs finishes instantly. Used to watch the objective.
pub fn tiny_instance() -> (Incidence, Incidence) {
    let walks = Incidence::from_rows(6, vec![vec![0, 1, 2], vec![1, 3], vec![2, 4, 5], vec![0, 5]]);
    let subgraphs = Incidence::from_rows(5, vec![vec![0], vec![1, 2], vec![3], vec![0, 4]]);
    (walks, subgraphs)
}

/// Settings paired with [`tiny_instance`]: negatives cover every absent
/// feature, so the sampled objective has no randomness beyond the order.
pub fn tiny_config() -> TrainConfig {
    TrainConfig { dim: 8, epochs: 200, learning_rate: 0.05, neg_walks: 6, neg_subgraphs: 5, ..Default::default() }
}
