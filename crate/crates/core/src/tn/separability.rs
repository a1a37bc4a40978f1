use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{closure, Clustering, TnError, TnGraph};
use crate::spatial::{dist, Index, IndexBackend, PointId, PointSet, Query};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Separability {
    /// Absolutely distance dividable: at least two components, and every
    /// component is a clique of the threshold graph.
    Add,
    /// Component dividable: at least two components.
    Cd,
    None,
}

/// Components of the graph joining points at distance `<= threshold`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparabilityReport {
    pub threshold: f64,
    pub class: Separability,
    /// Each component ascending, ordered by smallest member.
    pub components: Vec<Vec<PointId>>,
}

fn exact_index(ps: &PointSet) -> Result<Index, TnError> {
    Ok(Index::build(
        ps.clone(),
        &IndexBackend::exact_for_dim(ps.dim()),
    )?)
}

pub fn separability_class(ps: &PointSet, threshold: f64) -> Result<SeparabilityReport, TnError> {
    if !threshold.is_finite() || threshold <= 0.0 {
        return Err(TnError::NonpositiveThreshold(threshold));
    }
    let index = exact_index(ps)?;
    let mut ids = ps.ids().to_vec();
    ids.sort_unstable();
    let mut seen = BTreeSet::new();
    let mut components = Vec::new();
    let mut all_cliques = true;
    for &start in &ids {
        if !seen.insert(start) {
            continue;
        }
        let mut comp = vec![start];
        let mut stack = vec![start];
        let mut degrees = Vec::new();
        while let Some(id) = stack.pop() {
            let near = index.range(ps.coords(id)?, threshold)?;
            degrees.push(near.len());
            for n in near {
                if seen.insert(n) {
                    comp.push(n);
                    stack.push(n);
                }
            }
        }
        // A range query includes the point itself, so a clique member sees
        // exactly the whole component.
        all_cliques &= degrees.iter().all(|&d| d == comp.len());
        comp.sort_unstable();
        components.push(comp);
    }
    let class = match (components.len() >= 2, all_cliques) {
        (true, true) => Separability::Add,
        (true, false) => Separability::Cd,
        (false, _) => Separability::None,
    };
    Ok(SeparabilityReport {
        threshold,
        class,
        components,
    })
}

/// Checks that in an absolutely distance dividable set, every point's
/// tightest neighbors at `k = |C| - 1` are exactly the rest of its
/// component `C`.
pub fn verify_component_tightness(
    ps: &PointSet,
    report: &SeparabilityReport,
) -> Result<bool, TnError> {
    if report.class != Separability::Add {
        return Err(TnError::NotAdd);
    }
    let index = exact_index(ps)?;
    for comp in &report.components {
        if comp.len() < 2 {
            continue;
        }
        let k = comp.len() - 1;
        let mut knn: HashMap<PointId, BTreeSet<PointId>> = HashMap::new();
        let mut knn_of = |id: PointId| -> Result<BTreeSet<PointId>, TnError> {
            if let Some(s) = knn.get(&id) {
                return Ok(s.clone());
            }
            let s: BTreeSet<PointId> = index.knn(Query::Id(id), k)?.ids().collect();
            knn.insert(id, s.clone());
            Ok(s)
        };
        for &x in comp {
            let mut tn = BTreeSet::new();
            for y in knn_of(x)? {
                if knn_of(y)?.contains(&x) {
                    tn.insert(y);
                }
            }
            let rest: BTreeSet<PointId> = comp.iter().copied().filter(|&y| y != x).collect();
            if tn != rest {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// True when `x` is strictly closer to every point of every other cluster
/// than to the farthest member of its own cluster. Outliers are ignored.
pub fn is_prototype_point(
    ps: &PointSet,
    clustering: &Clustering,
    x: PointId,
) -> Result<bool, TnError> {
    let own = match clustering.cluster_of(x) {
        Some(c) => c,
        None if clustering.outliers.contains(&x) => return Err(TnError::OutlierPoint(x)),
        None => return Err(TnError::UnknownId(x)),
    };
    let cx = ps.coords(x)?;
    let mut own_max: f64 = 0.0;
    for &y in &clustering.clusters[own] {
        own_max = own_max.max(dist(cx, ps.coords(y)?));
    }
    for (c, members) in clustering.clusters.iter().enumerate() {
        if c == own {
            continue;
        }
        for &z in members {
            if dist(cx, ps.coords(z)?) <= own_max {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Checks that closing each `subsets[i]` under the tightest-neighbor
/// relation (outliers removed) reproduces `clustering.clusters[i]`.
pub fn verify_skeleton_set(
    ps: &PointSet,
    k: usize,
    subsets: &[BTreeSet<PointId>],
    clustering: &Clustering,
) -> Result<bool, TnError> {
    if subsets.len() != clustering.clusters.len() {
        return Err(TnError::SubsetCountMismatch {
            expected: clustering.clusters.len(),
            found: subsets.len(),
        });
    }
    for (i, (s, c)) in subsets.iter().zip(&clustering.clusters).enumerate() {
        if !s.iter().all(|id| c.binary_search(id).is_ok()) {
            return Err(TnError::SubsetNotContained(i));
        }
    }
    let graph = TnGraph::build(ps, k)?.induced(|id| !clustering.outliers.contains(&id));
    for (s, c) in subsets.iter().zip(&clustering.clusters) {
        let closed = closure(&graph, s, usize::MAX)?;
        if !closed.iter().copied().eq(c.iter().copied()) {
            return Ok(false);
        }
    }
    Ok(true)
}
