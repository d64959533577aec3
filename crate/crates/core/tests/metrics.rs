mod common;

use std::collections::BTreeSet;

use common::{as_ids, oracle_lfk, oracle_partition_nmi, random_cover, random_similarity_matrix};
use memeclust::clustering::{cut, hierarchical_cluster, ClusterCover, Partition};
use memeclust::evaluation::{
    confusion, lfk_nmi, lfk_nmi_covers, nmi, score_partition, score_sweep, GroundTruth, Sweep, TruthIndex,
};
use memeclust::similarity::SimilarityMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn truth_of(cover: &[BTreeSet<String>]) -> GroundTruth {
    GroundTruth::from_topics(cover.to_vec())
}

proptest! {
    #[test]
    fn lfk_matches_indicator_oracle(seed in any::<u64>(), n in 4usize..60, kx in 1usize..6, ky in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_cover(&mut rng, n, kx, 0.15);
        let y = random_cover(&mut rng, n, ky, 0.3);
        let got = lfk_nmi_covers(&as_ids(&x), &as_ids(&y)).unwrap();
        let want = oracle_lfk(&x, &y, n);
        prop_assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        prop_assert!((0.0..=1.0).contains(&got));
    }

    #[test]
    fn lfk_of_a_cover_with_itself_is_one(seed in any::<u64>(), n in 2usize..80, k in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = as_ids(&random_cover(&mut rng, n, k, 0.2));
        let got = lfk_nmi_covers(&x, &x).unwrap();
        prop_assert!((got - 1.0).abs() < 1e-9 || x.iter().any(|c| c.len() == n), "{got}");
    }

    #[test]
    fn nmi_matches_partition_oracle(seed in any::<u64>(), n in 2usize..60, ka in 1usize..6, kb in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<usize> = (0..n).map(|_| rng.gen_range(0..ka)).collect();
        let b: Vec<usize> = (0..n).map(|_| rng.gen_range(0..kb)).collect();
        let truth = GroundTruth::from_assignments((0..n).map(|i| (format!("m{i}"), vec![format!("T{}", a[i])])));
        let cover = ClusterCover::from_sets(
            Partition::from_labels(&b).clusters.iter().map(|c| c.iter().map(|i| format!("m{i}")).collect()).collect(),
        );
        let m = confusion(&truth, &cover);
        let got = nmi(&m).unwrap();
        let want = oracle_partition_nmi(&a, &b);
        prop_assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        // symmetric under transposition
        let t = memeclust::evaluation::ConfusionMatrix {
            rows: m.cols,
            cols: m.rows,
            counts: (0..m.cols).flat_map(|j| (0..m.rows).map(move |i| (i, j))).map(|(i, j)| m.get(i, j)).collect(),
        };
        prop_assert!((nmi(&t).unwrap() - got).abs() < 1e-12);
    }

    #[test]
    fn incremental_sweep_matches_direct_scoring(seed in any::<u64>(), n in 2usize..25, topics in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = SimilarityMatrix::from_rows(random_similarity_matrix(&mut rng, n)).unwrap();
        let d = hierarchical_cluster(&m).unwrap();
        // objects cover overlapping, partly unlabeled message sets
        let messages = 40;
        let truth = GroundTruth::from_assignments((0..messages).filter(|i| i % 7 != 0).map(|i| {
            let mut labels = vec![format!("T{}", rng.gen_range(0..topics))];
            if rng.gen_bool(0.2) {
                labels.push(format!("T{}", rng.gen_range(0..topics)));
            }
            (format!("m{i:02}"), labels)
        }));
        let index = TruthIndex::new(&truth);
        let members: Vec<Vec<u32>> = (0..n)
            .map(|_| {
                let ids: Vec<String> = (0..rng.gen_range(0..5)).map(|_| format!("m{:02}", rng.gen_range(0..messages))).collect();
                index.members(ids.iter().map(String::as_str))
            })
            .collect();
        if members.iter().all(Vec::is_empty) {
            return Ok(());
        }
        let cuts = score_sweep(&d, &members, &index, &Sweep::Full).unwrap();
        for c in &cuts {
            let p = c.tau.map_or_else(|| Partition::singletons(n), |t| cut(&d, t));
            prop_assert_eq!(p.len(), c.cluster_count);
            let direct = score_partition(&p, &members, &index).unwrap();
            prop_assert!((direct - c.lfk_nmi).abs() < 1e-9, "{direct} vs {}", c.lfk_nmi);
        }
        let taus: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let cuts = score_sweep(&d, &members, &index, &Sweep::Thresholds(taus.clone())).unwrap();
        for (c, &t) in cuts.iter().zip(&taus) {
            let direct = score_partition(&cut(&d, t), &members, &index).unwrap();
            prop_assert!((direct - c.lfk_nmi).abs() < 1e-9);
        }
    }
}

#[test]
fn extra_singleton_matches_oracle() {
    // two overlapping truth sets; prediction repeats them plus a singleton
    let x = vec![BTreeSet::from([0, 1, 2, 3]), BTreeSet::from([3, 4, 5])];
    let mut y = x.clone();
    y.push(BTreeSet::from([6]));
    let n = 7;
    let got = lfk_nmi_covers(&as_ids(&x), &as_ids(&y)).unwrap();
    let want = oracle_lfk(&x, &y, n);
    assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    assert!(got < 1.0);
}

#[test]
fn truth_scored_against_itself() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cover = as_ids(&random_cover(&mut rng, 100, 6, 0.1));
    let truth = truth_of(&cover);
    let report = memeclust::evaluation::evaluate(&truth, &ClusterCover::from_sets(cover)).unwrap();
    assert!((report.lfk_nmi - 1.0).abs() < 1e-12);
}

#[test]
fn lfk_ignores_messages_outside_truth() {
    let truth = GroundTruth::from_assignments([("a", vec!["X"]), ("b", vec!["X"]), ("c", vec!["Y"])]);
    let cover = ClusterCover::from_sets(vec![
        ["a", "b", "zz"].iter().map(|s| s.to_string()).collect(),
        ["c", "yy"].iter().map(|s| s.to_string()).collect(),
    ]);
    assert_eq!(lfk_nmi(&truth, &cover).unwrap(), 1.0);
}
