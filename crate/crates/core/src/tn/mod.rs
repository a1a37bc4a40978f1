//! Tightest-neighbor (mutual k-NN) graphs and the clustering built on them.
//!
//! `TN(k, x)` is the set of points `y` such that `y` is among the k nearest
//! neighbors of `x` and `x` is among the k nearest neighbors of `y`. Nearest
//! neighbor sets never contain the point itself; at `k = 0` the only tightest
//! neighbor of a point is itself, which the graph represents as an empty
//! mutual set.

mod ktnc;
mod separability;
mod tnof;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::spatial::{Index, IndexBackend, PointId, PointSet, Query, SpatialError};

pub use ktnc::{ktnc, ktnc_on_graph, smallest_recovering_k, Clustering};
pub use separability::{
    is_prototype_point, separability_class, verify_component_tightness, verify_skeleton_set,
    Separability, SeparabilityReport,
};
pub use tnof::{detect_outliers, tnof_scores, TnofReport, DEFAULT_ALPHA};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TnError {
    #[error("k = {k} must be smaller than the number of points ({n})")]
    KTooLarge { k: usize, n: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("unknown point id {0}")]
    UnknownId(PointId),
    #[error("every point is isolated; no finite outlier score exists")]
    AllScoresInfinite,
    #[error("alpha must not be NaN")]
    InvalidAlpha,
    #[error("distance threshold must be positive, got {0}")]
    NonpositiveThreshold(f64),
    #[error("the point set is not absolutely distance dividable at this threshold")]
    NotAdd,
    #[error("point {0} is an outlier, not a cluster member")]
    OutlierPoint(PointId),
    #[error("expected {expected} subsets, got {found}")]
    SubsetCountMismatch { expected: usize, found: usize },
    #[error("subset {0} is not contained in its cluster")]
    SubsetNotContained(usize),
    #[error(transparent)]
    Spatial(#[from] SpatialError),
}

/// k-nearest-neighbor positions of every point, each list sorted by position.
fn knn_positions(ps: &PointSet, k: usize) -> Result<Vec<Vec<(usize, f64)>>, TnError> {
    if k == 0 {
        return Ok(vec![Vec::new(); ps.len()]);
    }
    let index = Index::build(ps.clone(), &IndexBackend::exact_for_dim(ps.dim()))?;
    (0..ps.len())
        .map(|pos| {
            let nl = index.knn(Query::Id(ps.id_at(pos)), k)?;
            let mut v: Vec<(usize, f64)> = nl
                .entries
                .iter()
                .map(|n| {
                    (
                        ps.position(n.id).expect("index ids come from ps"),
                        n.distance,
                    )
                })
                .collect();
            v.sort_unstable_by_key(|e| e.0);
            Ok(v)
        })
        .collect()
}

fn check_k(ps: &PointSet, k: usize) -> Result<(), TnError> {
    if k >= ps.len() {
        return Err(TnError::KTooLarge { k, n: ps.len() });
    }
    Ok(())
}

/// Per-point tightest-neighbor sets at one level `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct TightestNeighbors {
    k: usize,
    sets: BTreeMap<PointId, BTreeSet<PointId>>,
}

impl TightestNeighbors {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Mutual neighbors of `id`, excluding `id` itself.
    pub fn get(&self, id: PointId) -> Option<&BTreeSet<PointId>> {
        self.sets.get(&id)
    }

    /// At `k = 0` every point is its own (only) tightest neighbor.
    pub fn includes_self(&self) -> bool {
        self.k == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (PointId, &BTreeSet<PointId>)> {
        self.sets.iter().map(|(&id, s)| (id, s))
    }
}

pub fn tightest_neighbors(ps: &PointSet, k: usize) -> Result<TightestNeighbors, TnError> {
    let graph = TnGraph::build(ps, k)?;
    let sets = graph
        .ids
        .iter()
        .enumerate()
        .map(|(pos, &id)| {
            (
                id,
                graph.adj[pos].iter().map(|&(j, _)| graph.ids[j]).collect(),
            )
        })
        .collect();
    Ok(TightestNeighbors { k, sets })
}

pub fn tn_graph(ps: &PointSet, k: usize) -> Result<TnGraph, TnError> {
    TnGraph::build(ps, k)
}

/// Symmetric tightest-neighbor adjacency with Euclidean edge weights.
#[derive(Clone, Debug)]
pub struct TnGraph {
    k: usize,
    ids: Vec<PointId>,
    positions: HashMap<PointId, usize>,
    adj: Vec<Vec<(usize, f64)>>,
}

impl TnGraph {
    pub fn build(ps: &PointSet, k: usize) -> Result<Self, TnError> {
        check_k(ps, k)?;
        let knn = knn_positions(ps, k)?;
        let is_knn = |i: usize, j: usize| knn[i].binary_search_by_key(&j, |e| e.0).is_ok();
        let adj = knn
            .iter()
            .enumerate()
            .map(|(i, list)| {
                list.iter()
                    .copied()
                    .filter(|&(j, _)| is_knn(j, i))
                    .collect()
            })
            .collect();
        let ids = ps.ids().to_vec();
        let positions = ids.iter().enumerate().map(|(p, &id)| (id, p)).collect();
        Ok(Self {
            k,
            ids,
            positions,
            adj,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[PointId] {
        &self.ids
    }

    pub fn contains(&self, id: PointId) -> bool {
        self.positions.contains_key(&id)
    }

    fn pos(&self, id: PointId) -> Result<usize, TnError> {
        self.positions
            .get(&id)
            .copied()
            .ok_or(TnError::UnknownId(id))
    }

    /// `(neighbor id, edge weight)` pairs of `id`, in ascending neighbor id.
    pub fn neighbors(&self, id: PointId) -> Result<Vec<(PointId, f64)>, TnError> {
        let mut v: Vec<(PointId, f64)> = self.adj[self.pos(id)?]
            .iter()
            .map(|&(j, w)| (self.ids[j], w))
            .collect();
        v.sort_unstable_by_key(|e| e.0);
        Ok(v)
    }

    pub fn degree(&self, id: PointId) -> Result<usize, TnError> {
        Ok(self.adj[self.pos(id)?].len())
    }

    /// Every undirected edge once, as `(smaller id, larger id, weight)`.
    pub fn edges(&self) -> Vec<(PointId, PointId, f64)> {
        let mut out: Vec<_> = self
            .adj
            .iter()
            .enumerate()
            .flat_map(|(i, list)| {
                list.iter().filter_map(move |&(j, w)| {
                    let (a, b) = (self.ids[i], self.ids[j]);
                    (a < b).then_some((a, b, w))
                })
            })
            .collect();
        out.sort_by_key(|x| (x.0, x.1));
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Keeps only the edges accepted by `keep(a, b, weight)`. The predicate
    /// must be symmetric in `a` and `b`.
    pub fn retain_edges(&mut self, mut keep: impl FnMut(PointId, PointId, f64) -> bool) {
        let ids = &self.ids;
        for (i, list) in self.adj.iter_mut().enumerate() {
            list.retain(|&(j, w)| keep(ids[i], ids[j], w));
        }
    }

    /// The subgraph induced on the ids accepted by `keep`.
    pub fn induced(&self, keep: impl Fn(PointId) -> bool) -> TnGraph {
        let kept: Vec<usize> = (0..self.len()).filter(|&p| keep(self.ids[p])).collect();
        let mut remap = vec![usize::MAX; self.len()];
        for (new, &old) in kept.iter().enumerate() {
            remap[old] = new;
        }
        let adj = kept
            .iter()
            .map(|&old| {
                self.adj[old]
                    .iter()
                    .filter(|&&(j, _)| remap[j] != usize::MAX)
                    .map(|&(j, w)| (remap[j], w))
                    .collect()
            })
            .collect();
        let ids: Vec<PointId> = kept.iter().map(|&p| self.ids[p]).collect();
        let positions = ids.iter().enumerate().map(|(p, &id)| (id, p)).collect();
        TnGraph {
            k: self.k,
            ids,
            positions,
            adj,
        }
    }

    /// Connected components, each ascending, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<PointId>> {
        let mut order: Vec<PointId> = self.ids.clone();
        order.sort_unstable();
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for id in order {
            if seen.contains(&id) {
                continue;
            }
            let comp = mtncis(self, id).expect("id is a vertex");
            seen.extend(comp.iter().copied());
            out.push(comp.into_iter().collect());
        }
        out
    }
}

fn check_members(graph: &TnGraph, set: &BTreeSet<PointId>) -> Result<(), TnError> {
    match set.iter().find(|&&id| !graph.contains(id)) {
        Some(&id) => Err(TnError::UnknownId(id)),
        None => Ok(()),
    }
}

/// `s`-fold tightest-neighborhood closure: `s` rounds of
/// `A <- A ∪ ⋃_{x∈A} TN(k, x)`.
pub fn closure(
    graph: &TnGraph,
    set: &BTreeSet<PointId>,
    rounds: usize,
) -> Result<BTreeSet<PointId>, TnError> {
    check_members(graph, set)?;
    let mut current = set.clone();
    for _ in 0..rounds {
        let mut next = current.clone();
        for &id in &current {
            let p = graph.positions[&id];
            next.extend(graph.adj[p].iter().map(|&(j, _)| graph.ids[j]));
        }
        if next.len() == current.len() {
            break;
        }
        current = next;
    }
    Ok(current)
}

/// Closure iterated from `{x}` to its fixpoint: the minimal
/// closure-invariant set containing `x`.
pub fn mtncis(graph: &TnGraph, x: PointId) -> Result<BTreeSet<PointId>, TnError> {
    let start = graph.pos(x)?;
    let mut set = BTreeSet::from([x]);
    // Only the newest ring can contribute points not already in the set.
    let mut frontier = vec![start];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for p in frontier {
            for &(j, _) in &graph.adj[p] {
                if set.insert(graph.ids[j]) {
                    next.push(j);
                }
            }
        }
        frontier = next;
    }
    Ok(set)
}
