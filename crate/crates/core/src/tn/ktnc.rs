use std::collections::{BTreeSet, HashMap};

use super::{mtncis, TnError, TnGraph, TnofReport};
use crate::spatial::{PointId, PointSet};

/// Result of k-tightest-neighbor clustering.
#[derive(Clone, Debug, PartialEq)]
pub struct Clustering {
    /// Each cluster ascending; clusters ordered by smallest member.
    pub clusters: Vec<Vec<PointId>>,
    pub outliers: BTreeSet<PointId>,
}

impl Clustering {
    /// Index of the cluster holding `id`, if any.
    pub fn cluster_of(&self, id: PointId) -> Option<usize> {
        self.clusters
            .iter()
            .position(|c| c.binary_search(&id).is_ok())
    }

    /// Label per id: cluster index + 1, or 0 for outliers and unknown ids.
    pub fn labels_for(&self, ids: &[PointId]) -> Vec<i64> {
        let lookup: HashMap<PointId, i64> = self
            .clusters
            .iter()
            .enumerate()
            .flat_map(|(c, members)| members.iter().map(move |&id| (id, c as i64 + 1)))
            .collect();
        ids.iter()
            .map(|id| lookup.get(id).copied().unwrap_or(0))
            .collect()
    }
}

/// Clusters `ps` by removing TNOF outliers and taking the connected
/// components of the tightest-neighbor graph over the remaining points.
pub fn ktnc(ps: &PointSet, k: usize, alpha: f64) -> Result<Clustering, TnError> {
    if k == 0 {
        return Err(TnError::ZeroK);
    }
    ktnc_on_graph(&TnGraph::build(ps, k)?, alpha)
}

/// [`ktnc`] on a prebuilt (possibly edge-filtered) graph.
pub fn ktnc_on_graph(graph: &TnGraph, alpha: f64) -> Result<Clustering, TnError> {
    let outliers = TnofReport::from_graph(graph).outliers(alpha)?;
    let kept = graph.induced(|id| !outliers.contains(&id));
    let mut order = kept.ids().to_vec();
    order.sort_unstable();
    let mut assigned = BTreeSet::new();
    let mut clusters = Vec::new();
    for id in order {
        if assigned.contains(&id) {
            continue;
        }
        let c = mtncis(&kept, id)?;
        assigned.extend(c.iter().copied());
        clusters.push(c.into_iter().collect());
    }
    Ok(Clustering { clusters, outliers })
}

/// Smallest `k` for which [`ktnc`] returns exactly `target` with no
/// outliers, together with that clustering.
pub fn smallest_recovering_k(
    ps: &PointSet,
    target: &[Vec<PointId>],
    alpha: f64,
) -> Result<Option<(usize, Clustering)>, TnError> {
    let mut want: Vec<Vec<PointId>> = target
        .iter()
        .map(|c| {
            let mut c = c.clone();
            c.sort_unstable();
            c
        })
        .collect();
    want.sort();
    for k in 1..ps.len() {
        let got = match ktnc(ps, k, alpha) {
            Ok(c) => c,
            Err(TnError::AllScoresInfinite) => continue,
            Err(e) => return Err(e),
        };
        if got.outliers.is_empty() && got.clusters == want {
            return Ok(Some((k, got)));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_groups() -> PointSet {
        PointSet::from_rows(&[
            [0.0, 0.0],
            [0.1, 0.0],
            [0.0, 0.1],
            [5.0, 5.0],
            [5.1, 5.0],
            [5.0, 5.1],
        ])
        .unwrap()
    }

    #[test]
    fn separated_groups_split_at_k2() {
        let c = ktnc(&two_groups(), 2, f64::INFINITY).unwrap();
        assert_eq!(c.clusters, vec![vec![0, 1, 2], vec![3, 4, 5]]);
        assert!(c.outliers.is_empty());
        assert_eq!(c.labels_for(&[5, 0, 9]), vec![2, 1, 0]);
        assert_eq!(c.cluster_of(4), Some(1));
    }

    #[test]
    fn sweep_finds_the_smallest_k() {
        let target = vec![vec![3, 4, 5], vec![0, 1, 2]];
        let (k, c) = smallest_recovering_k(&two_groups(), &target, f64::INFINITY)
            .unwrap()
            .unwrap();
        assert_eq!(k, 2);
        assert_eq!(c.clusters.len(), 2);
    }

    #[test]
    fn isolated_point_becomes_an_outlier() {
        let ps = PointSet::from_rows(&[[0.0], [1.0], [3.0], [10.0]]).unwrap();
        let c = ktnc(&ps, 1, 1.0).unwrap();
        assert_eq!(c.outliers, BTreeSet::from([2, 3]));
        assert_eq!(c.clusters, vec![vec![0, 1]]);
    }
}
