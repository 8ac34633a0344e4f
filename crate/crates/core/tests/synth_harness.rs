use std::collections::BTreeSet;

use hdgr::refiner::{EdgeScoreTable, RefineConfig};
use hdgr::synth::{
    auc_rank, auc_trapezoid, evaluate_recovery, generate, random_baseline, run_experiment, sign_flip_p_value,
    ExperimentConfig, PlantedTaskConfig, SynthError,
};
use hdgr::trainer::TrainConfig;
use proptest::prelude::*;

#[test]
fn generation_is_deterministic_and_valid() {
    let cfg = PlantedTaskConfig { seed: 3, ..Default::default() };
    let a = generate(&cfg).unwrap();
    assert_eq!(a, generate(&cfg).unwrap());
    assert!(a.graph.validate().is_ok());
    assert_eq!(a.planted_edges.len(), 9);
    assert_eq!(a.spurious_edges.len(), 10);
    assert!(a.planted_edges.is_disjoint(&a.spurious_edges));
    assert_eq!(a.dataset().len(), 200);
    assert_eq!(a.dataset().num_classes(), 4);
    for path in a.class_to_path.values() {
        for w in path.windows(2) {
            assert!(a.planted_edges.contains(&(w[0].clone(), w[1].clone())));
        }
    }
}

#[test]
fn no_spurious_edges_means_planted_only() {
    let t = generate(&PlantedTaskConfig { num_spurious_edges: 0, ..Default::default() }).unwrap();
    assert_eq!(t.graph.edge_set(), t.planted_edges);
}

#[test]
fn infeasible_counts_are_rejected() {
    for cfg in [
        PlantedTaskConfig { num_planted_paths: 5, ..Default::default() },
        PlantedTaskConfig { num_spurious_edges: 40, ..Default::default() },
        PlantedTaskConfig { num_classes: Some(9), ..Default::default() },
    ] {
        assert!(matches!(generate(&cfg), Err(SynthError::Infeasible(_))));
    }
}

/// Mean squared distance of each frame to its class mean, compared with the
/// same statistic under shuffled labels.
fn label_permutation_p(seed: u64) -> f64 {
    let t = generate(&PlantedTaskConfig { signal_strength: 0.0, seed, ..Default::default() }).unwrap();
    let frames = t.dataset().frames();
    let labels = t.dataset().labels();
    let stat = |labels: &[usize]| -> f64 {
        let m = frames[0].features.len();
        let mut sums = vec![vec![0.0; m]; 4];
        let mut counts = [0usize; 4];
        for (f, &y) in frames.iter().zip(labels) {
            counts[y] += 1;
            for (s, v) in sums[y].iter_mut().zip(&f.features) {
                *s += v;
            }
        }
        // Between-class spread of the class means.
        (0..4)
            .filter(|&c| counts[c] > 0)
            .map(|c| sums[c].iter().map(|s| (s / counts[c] as f64).powi(2)).sum::<f64>() * counts[c] as f64)
            .sum()
    };
    let observed = stat(&labels);
    let mut rng = hdgr::hdc::substream(seed, "test:perm");
    let mut shuffled = labels.clone();
    let draws = 999;
    let mut extreme = 1;
    for _ in 0..draws {
        rand::seq::SliceRandom::shuffle(shuffled.as_mut_slice(), &mut rng);
        if stat(&shuffled) >= observed {
            extreme += 1;
        }
    }
    extreme as f64 / (draws + 1) as f64
}

#[test]
fn null_signal_labels_are_independent_of_features() {
    let p = label_permutation_p(0);
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn recovery_metric_examples() {
    let t = generate(&PlantedTaskConfig::default()).unwrap();
    let empty = EdgeScoreTable::default();
    let exact = t.graph.with_edges(t.planted_edges.iter().cloned().collect());
    let r = evaluate_recovery(&exact, &empty, &t, None).unwrap();
    assert_eq!((r.precision, r.recall, r.f1), (1.0, 1.0, 1.0));
    let all = t.graph.with_edges(t.graph.candidate_edges());
    let r = evaluate_recovery(&all, &empty, &t, None).unwrap();
    assert_eq!(r.recall, 1.0);
    assert_eq!(r.precision, 9.0 / 48.0);

    let mut reversed = exact.clone();
    reversed.edges.reverse();
    assert_eq!(evaluate_recovery(&reversed, &empty, &t, None).unwrap(), evaluate_recovery(&exact, &empty, &t, None).unwrap());

    let mut foreign = exact.clone();
    foreign.nodes.push(hdgr::graph::Node::new("ghost", 1, vec![0.0; 16]));
    assert!(matches!(evaluate_recovery(&foreign, &empty, &t, None), Err(SynthError::NodeSetMismatch(_))));
}

#[test]
fn auc_examples() {
    let pos = [false, true, false, true];
    assert_eq!(auc_rank(&[0.1, 0.9, 0.2, 0.8], &pos), Some(1.0));
    assert_eq!(auc_rank(&[0.9, 0.1, 0.8, 0.2], &pos), Some(0.0));
}

proptest! {
    #[test]
    fn rank_and_trapezoid_auc_agree(
        scores in proptest::collection::vec(0u8..6, 2..40),
        flags in proptest::collection::vec(any::<bool>(), 40),
    ) {
        let s: Vec<f64> = scores.iter().map(|&v| f64::from(v) / 5.0).collect();
        let pos = &flags[..s.len()];
        let a = auc_rank(&s, pos);
        let b = auc_trapezoid(&s, pos);
        match (a, b) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-9),
            (None, None) => {}
            _ => prop_assert!(false),
        }
    }
}

#[test]
fn baseline_and_permutation_helpers() {
    let t = generate(&PlantedTaskConfig::default()).unwrap();
    let pool = t.graph.candidate_edges();
    let b = random_baseline(&pool, &t.planted_edges, 9, 2000, 1);
    // E[recall] = budget / |pool|.
    assert!((b.mean_recall - 9.0 / 48.0).abs() < 0.01, "{}", b.mean_recall);
    assert_eq!(random_baseline(&pool, &t.planted_edges, 9, 50, 1), random_baseline(&pool, &t.planted_edges, 9, 50, 1));
    let p = sign_flip_p_value(&[0.1, -0.1, 0.05, -0.02, 0.0, 0.03], 0);
    assert!(p > 0.5);
    assert!(sign_flip_p_value(&[0.3; 10], 0) < 0.01);
}

#[test]
fn experiment_snapshots_and_determinism() {
    let cfg = ExperimentConfig {
        dim: 1024,
        refine: RefineConfig { rounds: 2, ..Default::default() },
        train: TrainConfig { epochs: 3, ..Default::default() },
        baseline_draws: 20,
        ..Default::default()
    };
    let a = run_experiment(&cfg).unwrap();
    assert_eq!(a.snapshots.len(), 3);
    assert_eq!(a.dots.len(), 3);
    assert_eq!(a.score_tables.len(), 2);
    assert_eq!(a.loss_traces.len(), 2);
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(a.report, b.report);
    assert_eq!(a.dots, b.dots);
    let r = &a.report;
    for v in [r.precision, r.recall, r.f1, r.mean_planted_score, r.mean_spurious_score] {
        assert!((0.0..=1.0).contains(&v));
    }
    assert!(r.per_class_auc.values().all(|v| (0.0..=1.0).contains(v)));
    let kept: BTreeSet<_> = a.snapshots[2].edge_set();
    assert_eq!(kept.len(), a.report.refined_edges);
}
