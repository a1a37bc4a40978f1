mod common;

use std::collections::{BTreeSet, HashMap};

use common::*;
use proptest::prelude::*;
use tnstream::spatial::PointSet;
use tnstream::tn::{
    closure, is_prototype_point, ktnc, mtncis, separability_class, tightest_neighbors, tn_graph,
    tnof_scores, verify_component_tightness, verify_skeleton_set, Separability, TnError,
};

fn oracle_edges(tn: &HashMap<usize, BTreeSet<usize>>) -> Vec<(usize, usize)> {
    tn.iter()
        .flat_map(|(&a, s)| s.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
        .collect()
}

fn oracle_scores(ps: &PointSet, k: usize) -> HashMap<usize, f64> {
    scan_tn(ps, k)
        .into_iter()
        .map(|(id, set)| {
            let score = if set.is_empty() {
                f64::INFINITY
            } else {
                let x = ps.coords(id).unwrap();
                let total: f64 = set
                    .iter()
                    .map(|&y| sq(x, ps.coords(y).unwrap()).sqrt())
                    .sum();
                total / (set.len() * set.len()) as f64
            };
            (id, score)
        })
        .collect()
}

fn oracle_outliers(scores: &HashMap<usize, f64>, alpha: f64) -> BTreeSet<usize> {
    let finite: Vec<f64> = scores.values().copied().filter(|s| s.is_finite()).collect();
    let n = finite.len() as f64;
    let mean = finite.iter().sum::<f64>() / n;
    let std = (finite.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n).sqrt();
    let theta = if std == 0.0 { mean } else { mean + alpha * std };
    scores
        .iter()
        .filter(|(_, &s)| s.is_infinite() || s > theta)
        .map(|(&id, _)| id)
        .collect()
}

fn point_sets() -> impl Strategy<Value = PointSet> {
    (3usize..60, 1usize..4, any::<u64>(), any::<bool>()).prop_map(|(n, d, seed, grid)| {
        if grid {
            gridded_points(n, d, seed)
        } else {
            uniform_points(n, d, seed)
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tn_sets_match_brute_force(ps in point_sets(), kf in 0.0f64..1.0) {
        let k = ((ps.len() - 1) as f64 * kf) as usize;
        let got = tightest_neighbors(&ps, k).unwrap();
        let want = scan_tn(&ps, k);
        for (id, set) in got.iter() {
            prop_assert_eq!(set, &want[&id]);
        }
    }

    #[test]
    fn levels_are_nested(ps in point_sets()) {
        let n = ps.len();
        let mut prev = tightest_neighbors(&ps, 0).unwrap();
        for k in 1..n {
            let cur = tightest_neighbors(&ps, k).unwrap();
            for (id, set) in prev.iter() {
                prop_assert!(set.is_subset(cur.get(id).unwrap()), "k={} id={}", k, id);
            }
            prev = cur;
        }
        prop_assert!(prev.iter().all(|(_, s)| s.len() == n - 1));
    }

    #[test]
    fn mtncis_is_the_connected_component(ps in point_sets(), kf in 0.0f64..1.0) {
        let k = ((ps.len() - 1) as f64 * kf) as usize;
        let g = tn_graph(&ps, k).unwrap();
        let comps = union_find_components(ps.ids(), &oracle_edges(&scan_tn(&ps, k)));
        prop_assert_eq!(&g.components(), &comps);
        for comp in &comps {
            for &x in comp {
                let m: Vec<usize> = mtncis(&g, x).unwrap().into_iter().collect();
                prop_assert_eq!(&m, comp);
            }
        }
    }

    #[test]
    fn closure_is_monotone(ps in point_sets(), kf in 0.0f64..1.0, pick in any::<u64>()) {
        let k = ((ps.len() - 1) as f64 * kf) as usize;
        let g = tn_graph(&ps, k).unwrap();
        let x = ps.ids()[(pick % ps.len() as u64) as usize];
        let a = BTreeSet::from([x]);
        let mut prev = closure(&g, &a, 0).unwrap();
        prop_assert_eq!(&prev, &a);
        for s in 1..8 {
            let cur = closure(&g, &a, s).unwrap();
            prop_assert!(prev.is_subset(&cur));
            prev = cur;
        }
        let fix = mtncis(&g, x).unwrap();
        prop_assert!(prev.is_subset(&fix));
        prop_assert_eq!(closure(&g, &fix, 1).unwrap(), fix);
    }

    #[test]
    fn tnof_matches_brute_force(ps in point_sets(), kf in 0.0f64..1.0, alpha in 0.0f64..3.0) {
        let k = 1 + ((ps.len() - 2) as f64 * kf) as usize;
        let report = tnof_scores(&ps, k).unwrap();
        let want = oracle_scores(&ps, k);
        for &(id, s) in report.scores() {
            let w = want[&id];
            prop_assert!(s == w || (s - w).abs() <= 1e-12 * w.abs(), "{} vs {}", s, w);
        }
        if want.values().any(|s| s.is_finite()) {
            prop_assert_eq!(report.outliers(alpha).unwrap(), oracle_outliers(&want, alpha));
        }
    }

    #[test]
    fn tnof_scales_with_the_data(n in 3usize..60, d in 1usize..4, seed in any::<u64>(), c in 0.1f64..10.0) {
        // Continuous coordinates: exact distance ties would not survive rescaling.
        let ps = uniform_points(n, d, seed);
        let k = 1 + (ps.len() - 2) / 3;
        let a = tnof_scores(&ps, k).unwrap();
        let b = tnof_scores(&ps.scaled(c), k).unwrap();
        for (&(_, sa), &(_, sb)) in a.scores().iter().zip(b.scores()) {
            prop_assert!((sa.is_infinite() && sb.is_infinite()) || (sa * c - sb).abs() <= 1e-9 * sb.abs().max(1e-300));
        }
    }

    #[test]
    fn ktnc_partitions_the_inliers(ps in point_sets(), kf in 0.0f64..1.0) {
        let k = 1 + ((ps.len() - 2) as f64 * kf) as usize;
        let c = match ktnc(&ps, k, 1.0) {
            Ok(c) => c,
            Err(TnError::AllScoresInfinite) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        let want_out = oracle_outliers(&oracle_scores(&ps, k), 1.0);
        prop_assert_eq!(&c.outliers, &want_out);
        let inliers: Vec<usize> = ps.ids().iter().copied().filter(|id| !want_out.contains(id)).collect();
        let edges: Vec<(usize, usize)> = oracle_edges(&scan_tn(&ps, k))
            .into_iter()
            .filter(|(a, b)| !want_out.contains(a) && !want_out.contains(b))
            .collect();
        prop_assert_eq!(&c.clusters, &union_find_components(&inliers, &edges));
        let skeleton: Vec<BTreeSet<usize>> = c.clusters.iter().map(|m| BTreeSet::from([m[0]])).collect();
        prop_assert!(verify_skeleton_set(&ps, k, &skeleton, &c).unwrap());
    }
}

/// Brute-force check on tiny sets: the fixpoint from `x` is contained in
/// every closure-invariant set holding `x`.
#[test]
fn mtncis_is_minimal() {
    for seed in 0..30u64 {
        let ps = uniform_points(9, 2, seed);
        for k in 1..4 {
            let g = tn_graph(&ps, k).unwrap();
            for x in 0..ps.len() {
                let m = mtncis(&g, x).unwrap();
                let others: Vec<usize> = (0..ps.len()).filter(|&y| y != x).collect();
                for mask in 0u32..(1 << others.len()) {
                    let mut a = BTreeSet::from([x]);
                    a.extend(
                        others
                            .iter()
                            .enumerate()
                            .filter(|(b, _)| mask >> b & 1 == 1)
                            .map(|(_, &y)| y),
                    );
                    if closure(&g, &a, 1).unwrap() == a {
                        assert!(m.is_subset(&a), "seed {seed} k {k} x {x}");
                    }
                }
            }
        }
    }
}

fn clustered_line() -> PointSet {
    // Two groups of diameter 1, 5 apart, and a far pair.
    PointSet::from_rows(&[
        [0.0, 0.0],
        [1.0, 0.0],
        [0.5, 0.5],
        [6.0, 0.0],
        [6.5, 0.2],
        [7.0, 0.0],
        [6.5, -0.2],
        [20.0, 0.0],
        [20.5, 0.0],
    ])
    .unwrap()
}

#[test]
fn add_set_components_are_tightest_neighbors() {
    let ps = clustered_line();
    let r = separability_class(&ps, 1.2).unwrap();
    assert_eq!(r.class, Separability::Add);
    assert_eq!(r.components.len(), 3);
    assert!(verify_component_tightness(&ps, &r).unwrap());
    assert_eq!(
        separability_class(&ps, 100.0).unwrap().class,
        Separability::None
    );
}

#[test]
fn recovered_add_clusters_consist_of_prototypes() {
    let ps = clustered_line();
    let r = separability_class(&ps, 1.2).unwrap();
    let c = ktnc(&ps, 3, f64::INFINITY).unwrap();
    assert_eq!(c.clusters, r.components);
    for x in 0..ps.len() {
        assert!(is_prototype_point(&ps, &c, x).unwrap());
    }
}

#[test]
fn invalid_arguments() {
    let ps = clustered_line();
    assert_eq!(
        tn_graph(&ps, 9).unwrap_err(),
        TnError::KTooLarge { k: 9, n: 9 }
    );
    assert_eq!(ktnc(&ps, 0, 1.0).unwrap_err(), TnError::ZeroK);
    assert_eq!(
        separability_class(&ps, -1.0).unwrap_err(),
        TnError::NonpositiveThreshold(-1.0)
    );
    let g = tn_graph(&ps, 1).unwrap();
    assert_eq!(mtncis(&g, 42).unwrap_err(), TnError::UnknownId(42));
}
