//! RBF-kernel SVM and repeated stratified k-fold evaluation.
//!
//! The kernel is parameterized as `K(x, y) = exp(-σ ‖x - y‖²)`: σ multiplies
//! the squared distance (what other tools often call γ). The soft-margin dual
//! is solved by SMO with second-order working-set selection. Problems with
//! more than two classes are handled one-vs-rest.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seeding;

#[derive(Debug, Error, PartialEq)]
pub enum ClassifyError {
    #[error("invalid evaluation config: {0}")]
    Config(String),
    #[error("degenerate fold: {0}")]
    DegenerateFold(String),
    #[error("invalid input: {0}")]
    Input(String),
}

pub fn rbf_kernel(x: &[f64], y: &[f64], sigma: f64) -> Result<f64, ClassifyError> {
    if !(sigma > 0.0) {
        return Err(ClassifyError::Config(format!("kernel parameter must be > 0, got {sigma}")));
    }
    Ok((-sigma * squared_distance(x, y)).exp())
}

fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Stopping tolerance on the maximal KKT violation.
pub const KKT_TOLERANCE: f64 = 1e-3;

const TAU: f64 = 1e-12;

/// Dual solution of one binary problem over a precomputed Gram matrix.
#[derive(Clone, Debug)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
}

/// SMO on `min ½ αᵀQα − Σα` with `Q_ij = y_i y_j K_ij`, `0 ≤ α ≤ c`,
/// `yᵀα = 0`. `gram` is row-major `n × n`, `y` holds ±1.
pub fn solve_dual(gram: &[f64], y: &[f64], c: f64, tolerance: f64) -> DualSolution {
    let n = y.len();
    let k = |i: usize, j: usize| gram[i * n + j];
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let max_iter = (100 * n).max(10_000_000);
    let up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);
    let mut iterations = 0;
    while iterations < max_iter {
        // i: maximal violator in I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if up(alpha[t], y[t]) && -y[t] * grad[t] >= gmax {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        // j: second-order choice in I_low
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if !low(alpha[t], y[t]) {
                continue;
            }
            gmax2 = gmax2.max(y[t] * grad[t]);
            if i == usize::MAX {
                continue;
            }
            let b = gmax + y[t] * grad[t];
            if b > 0.0 {
                let a = k(i, i) + k(t, t) - 2.0 * k(i, t);
                let obj = -(b * b) / if a > 0.0 { a } else { TAU };
                if obj <= best {
                    best = obj;
                    j = t;
                }
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax + gmax2 < tolerance {
            break;
        }
        iterations += 1;

        let (old_ai, old_aj) = (alpha[i], alpha[j]);
        let quad = (k(i, i) + k(j, j) - 2.0 * k(i, j)).max(TAU);
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 && alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = diff;
            } else if diff <= 0.0 && alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 && alpha[i] > c {
                alpha[i] = c;
                alpha[j] = c - diff;
            } else if diff <= 0.0 && alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c && alpha[i] > c {
                alpha[i] = c;
                alpha[j] = sum - c;
            } else if sum <= c && alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c && alpha[j] > c {
                alpha[j] = c;
                alpha[i] = sum - c;
            } else if sum <= c && alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_ai, alpha[j] - old_aj);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * k(t, i) * di + y[j] * k(t, j) * dj);
        }
    }
    if iterations >= max_iter {
        log::warn!("SMO stopped at the iteration cap ({max_iter})");
    }

    // rho: mean of y G over free variables, else midpoint of the feasible range
    let (mut ub, mut lb, mut sum, mut free) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else {
            free += 1;
            sum += yg;
        }
    }
    let rho = if free > 0 { sum / free as f64 } else { (ub + lb) / 2.0 };
    DualSolution { alpha, rho, iterations }
}

/// One binary decision function over training-set indices.
#[derive(Clone, Debug, PartialEq)]
struct Machine {
    support: Vec<usize>,
    /// `α_i y_i` for each support index
    coef: Vec<f64>,
    rho: f64,
}

impl Machine {
    fn fit(gram: &[f64], y: &[f64], c: f64) -> Machine {
        let sol = solve_dual(gram, y, c, KKT_TOLERANCE);
        let (support, coef) = sol
            .alpha
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0.0)
            .map(|(i, &a)| (i, a * y[i]))
            .unzip();
        Machine { support, coef, rho: sol.rho }
    }

    fn score(&self, kernel_to_train: impl Fn(usize) -> f64) -> f64 {
        self.support.iter().zip(&self.coef).map(|(&i, &w)| w * kernel_to_train(i)).sum::<f64>() - self.rho
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Multiclass {
    /// One machine for two classes, one per class otherwise.
    Auto,
    /// One machine per class even for two classes.
    OneVsRest,
}

/// Classifier over training-set indices of a kernel.
#[derive(Clone, Debug)]
struct IndexedModel {
    classes: Vec<i32>,
    machines: Vec<Machine>,
}

impl IndexedModel {
    fn fit(gram: &[f64], labels: &[i32], c: f64, mode: Multiclass) -> Result<Self, ClassifyError> {
        let classes: Vec<i32> = labels.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        if classes.len() < 2 {
            return Err(ClassifyError::DegenerateFold(format!(
                "training labels contain a single class ({classes:?})"
            )));
        }
        let targets: Vec<i32> = if classes.len() == 2 && mode == Multiclass::Auto {
            vec![classes[1]]
        } else {
            classes.clone()
        };
        let machines = targets
            .iter()
            .map(|&target| {
                let y: Vec<f64> = labels.iter().map(|&l| if l == target { 1.0 } else { -1.0 }).collect();
                Machine::fit(gram, &y, c)
            })
            .collect();
        Ok(IndexedModel { classes, machines })
    }

    fn scores(&self, kernel_to_train: impl Fn(usize) -> f64 + Copy) -> Vec<f64> {
        self.machines.iter().map(|m| m.score(kernel_to_train)).collect()
    }

    fn predict(&self, kernel_to_train: impl Fn(usize) -> f64 + Copy) -> i32 {
        let scores = self.scores(kernel_to_train);
        if self.machines.len() == 1 {
            return if scores[0] > 0.0 { self.classes[1] } else { self.classes[0] };
        }
        let mut best = 0;
        for (k, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = k;
            }
        }
        self.classes[best]
    }
}

/// A trained SVM that owns its training vectors.
#[derive(Clone, Debug)]
pub struct SvmModel {
    vectors: Vec<Vec<f64>>,
    sigma: f64,
    inner: IndexedModel,
}

impl SvmModel {
    pub fn classes(&self) -> &[i32] {
        &self.inner.classes
    }

    /// Signed score per machine: one for a binary model (positive means the
    /// larger class label), one per class for one-vs-rest.
    pub fn decision(&self, x: &[f64]) -> Vec<f64> {
        self.inner.scores(|i| (-self.sigma * squared_distance(x, &self.vectors[i])).exp())
    }

    pub fn predict(&self, x: &[f64]) -> i32 {
        self.inner.predict(|i| (-self.sigma * squared_distance(x, &self.vectors[i])).exp())
    }

    pub fn support_count(&self) -> usize {
        self.inner.machines.iter().flat_map(|m| &m.support).collect::<BTreeSet<_>>().len()
    }
}

/// Trains a soft-margin RBF SVM.
pub fn train_svm(vectors: &[Vec<f64>], labels: &[i32], sigma: f64, c: f64) -> Result<SvmModel, ClassifyError> {
    train_svm_with(vectors, labels, sigma, c, Multiclass::Auto)
}

pub fn train_svm_with(
    vectors: &[Vec<f64>],
    labels: &[i32],
    sigma: f64,
    c: f64,
    mode: Multiclass,
) -> Result<SvmModel, ClassifyError> {
    if vectors.len() != labels.len() || vectors.is_empty() {
        return Err(ClassifyError::Input("need one label per vector and at least one vector".into()));
    }
    if !(c > 0.0) {
        return Err(ClassifyError::Config(format!("C must be > 0, got {c}")));
    }
    rbf_kernel(&[], &[], sigma)?;
    let n = vectors.len();
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            gram[i * n + j] = (-sigma * squared_distance(&vectors[i], &vectors[j])).exp();
        }
    }
    let inner = IndexedModel::fit(&gram, labels, c, mode)?;
    Ok(SvmModel { vectors: vectors.to_vec(), sigma, inner })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub folds: usize,
    /// Candidate kernel parameters; one is picked per outer fold.
    pub sigma_grid: Vec<f64>,
    pub svm_c: f64,
    pub repeats: usize,
    /// Folds of the inner validation that picks σ.
    pub inner_folds: usize,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            folds: 10,
            sigma_grid: vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0],
            svm_c: 1.0,
            repeats: 10,
            inner_folds: 3,
            seed: 0,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), ClassifyError> {
        if self.folds < 2 || self.inner_folds < 2 {
            return Err(ClassifyError::Config("fold counts must be >= 2".into()));
        }
        if self.sigma_grid.is_empty() || self.sigma_grid.iter().any(|&s| !(s > 0.0)) {
            return Err(ClassifyError::Config("sigma grid must be non-empty and positive".into()));
        }
        if !(self.svm_c > 0.0) {
            return Err(ClassifyError::Config("C must be > 0".into()));
        }
        if self.repeats < 1 {
            return Err(ClassifyError::Config("repeats must be >= 1".into()));
        }
        Ok(())
    }
}

/// Assigns every sample a fold in `0..folds`. See [`stratified_folds_by_key`].
pub fn stratified_folds<R: rand::Rng>(labels: &[i32], folds: usize, rng: &mut R) -> Vec<usize> {
    let keys: Vec<u64> = (0..labels.len()).map(|_| rng.random()).collect();
    stratified_folds_by_key(labels, &keys, folds)
}

/// Fold assignment driven by one random key per sample.
///
/// Samples are grouped by class, ordered by key within each class (a
/// shuffle), concatenated in class order and dealt round-robin, so fold
/// sizes differ by at most one and every class is spread evenly. If some
/// class has fewer members than `folds`, falls back to dealing all samples
/// in key order. Permuting `labels` and `keys` together permutes the result.
pub fn stratified_folds_by_key(labels: &[i32], keys: &[u64], folds: usize) -> Vec<usize> {
    let classes: BTreeSet<i32> = labels.iter().copied().collect();
    let by_key = |mut v: Vec<usize>| {
        v.sort_by_key(|&i| (keys[i], i));
        v
    };
    let groups: Vec<Vec<usize>> = classes
        .iter()
        .map(|&c| by_key((0..labels.len()).filter(|&i| labels[i] == c).collect()))
        .collect();
    let order: Vec<usize> = if groups.iter().any(|g| g.len() < folds) {
        log::warn!("a class has fewer than {folds} samples; folds are not stratified");
        by_key((0..labels.len()).collect())
    } else {
        groups.concat()
    };
    let mut assignment = vec![0; labels.len()];
    for (pos, &i) in order.iter().enumerate() {
        assignment[i] = pos % folds;
    }
    assignment
}

/// Pairwise squared distances, row-major.
struct Distances {
    n: usize,
    d2: Vec<f64>,
}

impl Distances {
    fn new(x: &[Vec<f64>]) -> Self {
        let n = x.len();
        let d2 = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| (0..n).map(move |j| squared_distance(&x[i], &x[j])))
            .collect();
        Distances { n, d2 }
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.d2[i * self.n + j]
    }

    fn gram(&self, idx: &[usize], sigma: f64) -> Vec<f64> {
        idx.iter().flat_map(|&i| idx.iter().map(move |&j| (-sigma * self.get(i, j)).exp())).collect()
    }

    /// Accuracy on `test` of a model trained on `train`.
    fn holdout_accuracy(&self, labels: &[i32], train: &[usize], test: &[usize], sigma: f64, c: f64) -> Result<f64, ClassifyError> {
        let train_labels: Vec<i32> = train.iter().map(|&i| labels[i]).collect();
        let model = IndexedModel::fit(&self.gram(train, sigma), &train_labels, c, Multiclass::Auto)?;
        let correct = test
            .iter()
            .filter(|&&t| model.predict(|k| (-sigma * self.get(t, train[k])).exp()) == labels[t])
            .count();
        Ok(correct as f64 / test.len() as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// `[repeat][fold]` test accuracy.
    pub fold_accuracies: Vec<Vec<f64>>,
    /// `[repeat][fold]` kernel parameter picked by the inner validation.
    pub chosen_sigma: Vec<Vec<f64>>,
    pub mean: f64,
    /// Population standard deviation over all fold accuracies.
    pub std: f64,
    /// Not part of the report files; recorded in stage manifests instead.
    #[serde(skip)]
    pub wall_time_secs: f64,
}

impl EvalReport {
    pub fn from_folds(fold_accuracies: Vec<Vec<f64>>, chosen_sigma: Vec<Vec<f64>>, wall_time_secs: f64) -> Self {
        let (mean, std) = mean_std(fold_accuracies.iter().flatten().copied());
        EvalReport { fold_accuracies, chosen_sigma, mean, std, wall_time_secs }
    }

    /// Mean accuracy of each repeat.
    pub fn repeat_means(&self) -> Vec<f64> {
        self.fold_accuracies.iter().map(|r| mean_std(r.iter().copied()).0).collect()
    }

    pub fn summary_line(&self) -> String {
        format!("accuracy {:.2} ({:.2})", 100.0 * self.mean, 100.0 * self.std)
    }

    /// Key-value text form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "mean_accuracy = {}", self.mean);
        let _ = writeln!(out, "std_accuracy = {}", self.std);
        let _ = writeln!(out, "repeats = {}", self.fold_accuracies.len());
        let _ = writeln!(out, "folds = {}", self.fold_accuracies.first().map_or(0, Vec::len));
        for (r, (acc, sig)) in self.fold_accuracies.iter().zip(&self.chosen_sigma).enumerate() {
            let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
            let _ = writeln!(out, "repeat.{r}.accuracies = {}", join(acc));
            let _ = writeln!(out, "repeat.{r}.sigma = {}", join(sig));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Equal in every recorded result; wall time is ignored.
    pub fn same_results(&self, other: &EvalReport) -> bool {
        self.fold_accuracies == other.fold_accuracies
            && self.chosen_sigma == other.chosen_sigma
            && self.mean == other.mean
            && self.std == other.std
    }
}

pub fn mean_std(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Repeated stratified k-fold cross validation of an RBF SVM on `x`.
///
/// For every outer fold, σ is picked from the grid by an inner stratified
/// validation on the training part (first best wins), then a model with that
/// σ is trained on the whole training part and scored on the held-out fold.
pub fn cross_validate(x: &[Vec<f64>], labels: &[i32], cfg: &EvalConfig) -> Result<EvalReport, ClassifyError> {
    let keys: Vec<Vec<u64>> = (0..cfg.repeats)
        .map(|r| {
            let mut rng = seeding::stream(cfg.seed, seeding::FOLDS, r as u64);
            (0..x.len()).map(|_| rand::Rng::random(&mut rng)).collect()
        })
        .collect();
    cross_validate_keyed(x, labels, &keys, cfg)
}

/// [`cross_validate`] with explicit per-repeat sample keys (`keys[r][i]` for
/// sample `i` in repeat `r`), which fix every fold split. Training sets are
/// ordered by key, so reordering samples together with their keys gives
/// bit-identical results.
pub fn cross_validate_keyed(
    x: &[Vec<f64>],
    labels: &[i32],
    keys: &[Vec<u64>],
    cfg: &EvalConfig,
) -> Result<EvalReport, ClassifyError> {
    cfg.validate()?;
    if x.len() != labels.len() {
        return Err(ClassifyError::Input(format!("{} vectors but {} labels", x.len(), labels.len())));
    }
    if x.len() < cfg.folds {
        return Err(ClassifyError::Input(format!("{} samples for {} folds", x.len(), cfg.folds)));
    }
    if keys.len() != cfg.repeats || keys.iter().any(|k| k.len() != x.len()) {
        return Err(ClassifyError::Input("need one key per sample for every repeat".into()));
    }
    let started = Instant::now();
    let dist = Distances::new(x);

    let jobs: Vec<(usize, usize, Vec<usize>)> = (0..cfg.repeats)
        .flat_map(|r| {
            let assignment = stratified_folds_by_key(labels, &keys[r], cfg.folds);
            (0..cfg.folds).map(move |f| (r, f, assignment.clone()))
        })
        .collect();
    let results = jobs
        .par_iter()
        .map(|(r, f, assignment)| {
            let keyed = |pred: &dyn Fn(usize) -> bool| {
                let mut v: Vec<usize> = (0..labels.len()).filter(|&i| pred(i)).collect();
                v.sort_by_key(|&i| keys[*r][i]);
                v
            };
            let train = keyed(&|i| assignment[i] != *f);
            let test = keyed(&|i| assignment[i] == *f);
            let inner_keys: Vec<u64> =
                train.iter().map(|&i| seeding::derive(keys[*r][i], "inner-folds", *f as u64)).collect();
            let sigma = select_sigma(&dist, labels, &train, &inner_keys, cfg)?;
            let acc = dist.holdout_accuracy(labels, &train, &test, sigma, cfg.svm_c)?;
            Ok((acc, sigma))
        })
        .collect::<Result<Vec<_>, ClassifyError>>()?;

    let mut accuracies = vec![Vec::with_capacity(cfg.folds); cfg.repeats];
    let mut sigmas = vec![Vec::with_capacity(cfg.folds); cfg.repeats];
    for ((r, _, _), (acc, sigma)) in jobs.iter().zip(results) {
        accuracies[*r].push(acc);
        sigmas[*r].push(sigma);
    }
    Ok(EvalReport::from_folds(accuracies, sigmas, started.elapsed().as_secs_f64()))
}

fn select_sigma(
    dist: &Distances,
    labels: &[i32],
    train: &[usize],
    keys: &[u64],
    cfg: &EvalConfig,
) -> Result<f64, ClassifyError> {
    if cfg.sigma_grid.len() == 1 {
        return Ok(cfg.sigma_grid[0]);
    }
    let sub_labels: Vec<i32> = train.iter().map(|&i| labels[i]).collect();
    let inner = stratified_folds_by_key(&sub_labels, keys, cfg.inner_folds);
    let mut best = (f64::NEG_INFINITY, cfg.sigma_grid[0]);
    for &sigma in &cfg.sigma_grid {
        let mut total = 0.0;
        for f in 0..cfg.inner_folds {
            let fit: Vec<usize> = (0..train.len()).filter(|&k| inner[k] != f).map(|k| train[k]).collect();
            let val: Vec<usize> = (0..train.len()).filter(|&k| inner[k] == f).map(|k| train[k]).collect();
            total += dist.holdout_accuracy(labels, &fit, &val, sigma, cfg.svm_c)?;
        }
        let score = total / cfg.inner_folds as f64;
        if score > best.0 {
            best = (score, sigma);
        }
    }
    Ok(best.1)
}
