//! Shared-nearest-neighbor counts and the adaptive micro-cluster radius.
//!
//! Two points are locally similar when their `tk`-nearest-neighbor sets
//! share at least `mk` members. A seed's radius is the distance to its
//! farthest locally similar neighbor, capped at `r_max`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spatial::{Index, IndexBackend, NeighborList, PointId, PointSet, Query, SpatialError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SnnError {
    #[error("invalid SNN parameters: {0}")]
    InvalidParams(&'static str),
    #[error("tk = {tk} must be smaller than the number of points ({n})")]
    TkTooLarge { tk: usize, n: usize },
    #[error("shared neighbor count of point {0} with itself")]
    SamePoint(PointId),
    #[error(transparent)]
    Spatial(#[from] SpatialError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnnParams {
    /// Neighborhood size.
    pub tk: usize,
    /// Minimum shared count for a neighbor to bound the radius.
    pub mk: usize,
    pub r_max: f64,
}

impl SnnParams {
    pub fn validate(&self) -> Result<(), SnnError> {
        if self.tk == 0 {
            return Err(SnnError::InvalidParams("tk must be >= 1"));
        }
        if self.mk > self.tk {
            return Err(SnnError::InvalidParams("mk must not exceed tk"));
        }
        if !(self.r_max.is_finite() && self.r_max > 0.0) {
            return Err(SnnError::InvalidParams("r_max must be finite and positive"));
        }
        Ok(())
    }
}

/// Memoized `k`-nearest-neighbor lists over one index.
#[derive(Debug)]
pub struct KnnCache {
    k: usize,
    lists: HashMap<PointId, NeighborList>,
}

impl KnnCache {
    /// `k` is clamped to the number of other points in `index`.
    pub fn new(index: &Index, k: usize) -> Self {
        Self {
            k: k.min(index.len().saturating_sub(1)),
            lists: HashMap::new(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&mut self, index: &Index, id: PointId) -> Result<&NeighborList, SpatialError> {
        if !self.lists.contains_key(&id) {
            let list = if self.k == 0 {
                if !index.points().contains(id) {
                    return Err(SpatialError::UnknownId(id));
                }
                NeighborList::default()
            } else {
                index.knn(Query::Id(id), self.k)?
            };
            self.lists.insert(id, list);
        }
        Ok(&self.lists[&id])
    }
}

fn shared(a: &NeighborList, b: &NeighborList) -> usize {
    a.ids().filter(|&id| b.contains(id)).count()
}

/// `|KNN(tk, i) ∩ KNN(tk, j)|`, neither set containing its own point.
pub fn snn_count(ps: &PointSet, i: PointId, j: PointId, tk: usize) -> Result<usize, SnnError> {
    for id in [i, j] {
        if !ps.contains(id) {
            return Err(SpatialError::UnknownId(id).into());
        }
    }
    if i == j {
        return Err(SnnError::SamePoint(i));
    }
    if tk == 0 {
        return Err(SnnError::InvalidParams("tk must be >= 1"));
    }
    if tk >= ps.len() {
        return Err(SnnError::TkTooLarge { tk, n: ps.len() });
    }
    let index = Index::build(ps.clone(), &IndexBackend::exact_for_dim(ps.dim()))?;
    let mut cache = KnnCache::new(&index, tk);
    let a = cache.get(&index, i)?.clone();
    Ok(shared(&a, cache.get(&index, j)?))
}

/// Radius a micro-cluster founded at `seed` would get, or `None` when no
/// neighbor of the seed is locally similar to it.
///
/// Uses an exact index over `ps`. When `ps` holds `tk` or fewer points the
/// neighborhoods shrink to everything else.
pub fn adaptive_radius(
    ps: &PointSet,
    seed: PointId,
    params: &SnnParams,
) -> Result<Option<f64>, SnnError> {
    params.validate()?;
    let index = Index::build(ps.clone(), &IndexBackend::exact_for_dim(ps.dim()))?;
    let mut cache = KnnCache::new(&index, params.tk);
    adaptive_radius_with(&index, &mut cache, seed, params)
}

/// [`adaptive_radius`] against a prebuilt index (of any backend) and a
/// neighbor cache shared across seeds.
pub fn adaptive_radius_with(
    index: &Index,
    cache: &mut KnnCache,
    seed: PointId,
    params: &SnnParams,
) -> Result<Option<f64>, SnnError> {
    let seed_nn = cache.get(index, seed)?.clone();
    let mut reach: Option<f64> = None;
    for n in &seed_nn.entries {
        let count = shared(&seed_nn, cache.get(index, n.id)?);
        if count >= params.mk {
            reach = Some(reach.map_or(n.distance, |r| r.max(n.distance)));
        }
    }
    // Co-located neighbors give a zero reach; keep the radius positive so
    // they still form a ball.
    Ok(reach.map(|r| r.min(params.r_max).max(f64::MIN_POSITIVE)))
}
