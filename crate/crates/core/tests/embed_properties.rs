use proptest::prelude::*;
use skelcomp::embed::{init_model, pair_loss_and_grads, sigmoid, tiny_config, tiny_instance, train_on, Schedule, TrainConfig};
use skelcomp::incidence::Incidence;

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (norm(a) * norm(b))
}

fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-3)
}

proptest! {
    #[test]
    fn gradients_match_central_differences(
        pair in (1usize..12).prop_flat_map(|d| (prop::collection::vec(-1.5f64..1.5, d), prop::collection::vec(-1.5f64..1.5, d))),
        positive in any::<bool>(),
    ) {
        let (g, f) = pair;
        let h = 1e-5;
        let (_, gg, gf) = pair_loss_and_grads(&g, &f, positive);
        for k in 0..g.len() {
            let mut hi = g.clone();
            let mut lo = g.clone();
            hi[k] += h;
            lo[k] -= h;
            let numeric = (pair_loss_and_grads(&hi, &f, positive).0 - pair_loss_and_grads(&lo, &f, positive).0) / (2.0 * h);
            prop_assert!(rel_err(gg[k], numeric) < 1e-5, "dg[{}]: {} vs {}", k, gg[k], numeric);
            let mut hi = f.clone();
            let mut lo = f.clone();
            hi[k] += h;
            lo[k] -= h;
            let numeric = (pair_loss_and_grads(&g, &hi, positive).0 - pair_loss_and_grads(&g, &lo, positive).0) / (2.0 * h);
            prop_assert!(rel_err(gf[k], numeric) < 1e-5, "df[{}]: {} vs {}", k, gf[k], numeric);
        }
    }
}

/// One graph, one walk and one subgraph, no negatives: the trainer reduces
/// to two coupled scalar-coefficient ascent steps per epoch, replayed here.
#[test]
fn single_pair_matches_scalar_replay_and_converges() {
    let cfg = TrainConfig {
        dim: 6,
        epochs: 500,
        learning_rate: 0.1,
        min_learning_rate: 0.0001,
        neg_walks: 0,
        neg_subgraphs: 0,
        schedule: Schedule::PerFeature,
        ..Default::default()
    };
    let rows = Incidence::from_rows(1, vec![vec![0]]);
    let out = train_on(&rows, &rows, &cfg).unwrap();

    let init = init_model(1, 1, 1, &cfg);
    let mut g = init.graphs.row(0).to_vec();
    let mut a = init.walks.row(0).to_vec();
    let mut s = init.subgraphs.row(0).to_vec();
    let total = (2 * cfg.epochs) as f64;
    let mut step = 0.0;
    for _ in 0..cfg.epochs {
        for f in [&mut a, &mut s] {
            let lr = cfg.learning_rate - (cfg.learning_rate - cfg.min_learning_rate) * step / total;
            let d: f64 = g.iter().zip(f.iter()).map(|(x, y)| x * y).sum();
            let c = 1.0 - sigmoid(d);
            let old_f = f.clone();
            for k in 0..g.len() {
                f[k] += lr * c * g[k];
            }
            for k in 0..g.len() {
                g[k] += lr * c * old_f[k];
            }
            step += 1.0;
        }
    }
    for (x, y) in out.model.graphs.row(0).iter().zip(&g) {
        assert!((x - y).abs() < 1e-12);
    }
    let d: f64 = g.iter().zip(&a).map(|(x, y)| x * y).sum();
    assert!(sigmoid(d) > 0.99, "sigma(g.a) = {}", sigmoid(d));
    let d: f64 = g.iter().zip(&s).map(|(x, y)| x * y).sum();
    assert!(sigmoid(d) > 0.99);
    // walk term + subgraph term, each within log(0.99) of zero
    assert!(*out.epoch_objective.last().unwrap() > 2.0 * 0.99f64.ln());
}

#[test]
fn disjoint_features_give_dissimilar_graphs() {
    let walks = Incidence::from_rows(6, vec![vec![0, 1, 2], vec![3, 4, 5]]);
    let none = Incidence::empty(2);
    let cfg = TrainConfig { dim: 16, epochs: 300, neg_walks: 3, ..Default::default() };
    let out = train_on(&walks, &none, &cfg).unwrap();
    let c = cosine(out.model.graphs.row(0), out.model.graphs.row(1));
    assert!(c < 0.5, "cosine {c}");
}

#[test]
fn shared_features_give_similar_graphs() {
    let walks = Incidence::from_rows(8, vec![vec![0, 1, 2, 3], vec![0, 1, 2, 3], vec![4, 5, 6, 7]]);
    let subgraphs = Incidence::from_rows(4, vec![vec![0, 1], vec![0, 1], vec![2, 3]]);
    let cfg = TrainConfig { dim: 16, epochs: 300, neg_walks: 3, neg_subgraphs: 2, ..Default::default() };
    let out = train_on(&walks, &subgraphs, &cfg).unwrap();
    let x = &out.model.graphs;
    assert!(cosine(x.row(0), x.row(1)) > cosine(x.row(0), x.row(2)));
    assert!(out.model.is_finite());
}

#[test]
fn objective_rises_on_a_tiny_instance() {
    let (walks, subgraphs) = tiny_instance();
    for schedule in [Schedule::Balanced, Schedule::PerFeature] {
        let cfg = TrainConfig { schedule, ..tiny_config() };
        let obj = train_on(&walks, &subgraphs, &cfg).unwrap().epoch_objective;
        for (e, w) in obj.windows(2).enumerate() {
            assert!(w[1] >= w[0] - 1e-6, "{schedule:?} epoch {}: {} -> {}", e + 1, w[0], w[1]);
        }
    }
}

#[test]
fn identical_config_is_bit_identical() {
    let walks = Incidence::from_rows(10, (0..8).map(|i| vec![i % 10, (i * 3 + 1) % 10]).map(|mut r| { r.sort(); r.dedup(); r }).collect());
    let subgraphs = Incidence::from_rows(3, (0..8).map(|i| vec![i % 3]).collect());
    let cfg = TrainConfig { dim: 12, epochs: 30, seed: 4, ..Default::default() };
    let a = train_on(&walks, &subgraphs, &cfg).unwrap();
    let b = train_on(&walks, &subgraphs, &cfg).unwrap();
    assert_eq!(a.model, b.model);
    assert_eq!(a.epoch_objective, b.epoch_objective);
}

#[test]
fn large_steps_stay_finite() {
    let walks = Incidence::from_rows(4, vec![vec![0, 1], vec![2, 3]]);
    let subgraphs = Incidence::from_rows(2, vec![vec![0], vec![1]]);
    let cfg = TrainConfig { dim: 4, epochs: 200, learning_rate: 50.0, min_learning_rate: 50.0, init_stddev: 1.0, ..Default::default() };
    assert!(train_on(&walks, &subgraphs, &cfg).unwrap().model.is_finite());
}
