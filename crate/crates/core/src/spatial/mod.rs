//! Neighbor search over fixed-dimension point sets.
//!
//! Three backends share one query surface: an exact KD-tree, an exact
//! ball tree, and an approximate multi-table signed-random-projection LSH
//! index. Every backend is immutable once built and answers k-nearest and
//! radius queries under the Euclidean metric.
//!
//! Ordering is always lexicographic on `(squared distance, id)`, and radius
//! membership is `squared distance <= r * r`, so the exact backends agree
//! with a linear scan bit for bit.

mod balltree;
mod kdtree;
mod lsh;
mod point_set;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use balltree::BallTree;
pub use kdtree::KdTree;
pub use lsh::{srp_signature, Hyperplanes, LshIndex, SrpSignature};
pub use point_set::PointSet;

pub type PointId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpatialError {
    #[error("point set is empty")]
    EmptyPointSet,
    #[error("points must have at least one dimension")]
    ZeroDimension,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unknown point id {0}")]
    UnknownId(PointId),
    #[error("duplicate point id {0}")]
    DuplicateId(PointId),
    #[error("point {0} has a non-finite coordinate")]
    NonFinite(PointId),
    #[error("k must be at least 1")]
    ZeroK,
    #[error("radius must be finite and non-negative, got {0}")]
    InvalidRadius(f64),
    #[error("invalid LSH parameters: {0}")]
    InvalidLshParams(&'static str),
}

/// Parameters of the signed-random-projection index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LshParams {
    /// Signature bits per table.
    pub num_hyperplanes: usize,
    pub num_tables: usize,
    pub seed: u64,
}

impl LshParams {
    /// Splits a total hyperplane budget across `num_tables` tables.
    pub fn from_total(num_hashes: usize, num_tables: usize, seed: u64) -> Self {
        let num_tables = num_tables.max(1);
        Self {
            num_hyperplanes: (num_hashes / num_tables).max(1),
            num_tables,
            seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IndexBackend {
    KdTree,
    BallTree,
    Lsh(LshParams),
}

impl IndexBackend {
    pub fn name(&self) -> &'static str {
        match self {
            IndexBackend::KdTree => "kd_tree",
            IndexBackend::BallTree => "ball_tree",
            IndexBackend::Lsh(_) => "lsh",
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, IndexBackend::Lsh(_))
    }

    /// The exact backend suited to the dimension: KD-tree below ten
    /// dimensions, ball tree above.
    pub fn exact_for_dim(dim: usize) -> Self {
        if dim < 10 {
            IndexBackend::KdTree
        } else {
            IndexBackend::BallTree
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub id: PointId,
    pub distance: f64,
}

/// Neighbors sorted ascending by `(distance, id)`, never containing the query.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NeighborList {
    pub entries: Vec<Neighbor>,
}

impl NeighborList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = PointId> + '_ {
        self.entries.iter().map(|n| n.id)
    }

    pub fn contains(&self, id: PointId) -> bool {
        self.entries.iter().any(|n| n.id == id)
    }
}

/// A query target: a stored point (which is then excluded from its own
/// results) or free coordinates.
#[derive(Clone, Copy, Debug)]
pub enum Query<'a> {
    Id(PointId),
    Coords(&'a [f64]),
}

#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}

/// Radius membership shared by every backend and by the stream engine.
#[inline]
pub fn within(sq: f64, r: f64) -> bool {
    sq <= r * r
}

/// Heap entry ordered by `(squared distance, id)`.
#[derive(Clone, Copy, Debug)]
struct Candidate {
    sq: f64,
    id: PointId,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sq
            .total_cmp(&other.sq)
            .then_with(|| self.id.cmp(&other.id))
    }
}

/// Bounded max-heap keeping the k best candidates seen so far.
struct KnnHeap {
    k: usize,
    heap: BinaryHeap<Candidate>,
}

impl KnnHeap {
    fn new(k: usize) -> Self {
        Self {
            k,
            heap: BinaryHeap::with_capacity(k + 1),
        }
    }

    fn offer(&mut self, sq: f64, id: PointId) {
        let cand = Candidate { sq, id };
        if self.heap.len() < self.k {
            self.heap.push(cand);
        } else if let Some(top) = self.heap.peek() {
            if cand < *top {
                self.heap.pop();
                self.heap.push(cand);
            }
        }
    }

    /// Squared distance of the current k-th candidate once the heap is full.
    fn bound(&self) -> Option<f64> {
        if self.heap.len() < self.k {
            None
        } else {
            self.heap.peek().map(|c| c.sq)
        }
    }

    fn into_list(self) -> NeighborList {
        let entries = self
            .heap
            .into_sorted_vec()
            .into_iter()
            .map(|c| Neighbor {
                id: c.id,
                distance: c.sq.sqrt(),
            })
            .collect();
        NeighborList { entries }
    }
}

#[derive(Debug)]
enum Backend {
    KdTree(KdTree),
    BallTree(BallTree),
    Lsh(LshIndex),
}

/// An immutable, queryable index over one point set.
#[derive(Debug)]
pub struct Index {
    points: PointSet,
    backend: Backend,
}

pub fn build_index(ps: &PointSet, backend: &IndexBackend) -> Result<Index, SpatialError> {
    Index::build(ps.clone(), backend)
}

impl Index {
    pub fn build(points: PointSet, backend: &IndexBackend) -> Result<Self, SpatialError> {
        if points.is_empty() {
            return Err(SpatialError::EmptyPointSet);
        }
        let backend = match backend {
            IndexBackend::KdTree => Backend::KdTree(KdTree::build(&points)),
            IndexBackend::BallTree => Backend::BallTree(BallTree::build(&points)),
            IndexBackend::Lsh(params) => Backend::Lsh(LshIndex::build(&points, *params)?),
        };
        Ok(Self { points, backend })
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self.backend, Backend::Lsh(_))
    }

    fn resolve<'a>(&'a self, query: Query<'a>) -> Result<(&'a [f64], Option<usize>), SpatialError> {
        match query {
            Query::Id(id) => {
                let pos = self
                    .points
                    .position(id)
                    .ok_or(SpatialError::UnknownId(id))?;
                Ok((self.points.at(pos), Some(pos)))
            }
            Query::Coords(c) => {
                if c.len() != self.points.dim() {
                    return Err(SpatialError::DimensionMismatch {
                        expected: self.points.dim(),
                        found: c.len(),
                    });
                }
                Ok((c, None))
            }
        }
    }

    /// The k nearest stored points to `query`, excluding the query point.
    pub fn knn(&self, query: Query<'_>, k: usize) -> Result<NeighborList, SpatialError> {
        if k == 0 {
            return Err(SpatialError::ZeroK);
        }
        let (q, exclude) = self.resolve(query)?;
        let mut heap = KnnHeap::new(k);
        match &self.backend {
            Backend::KdTree(t) => t.knn(&self.points, q, exclude, &mut heap),
            Backend::BallTree(t) => t.knn(&self.points, q, exclude, &mut heap),
            Backend::Lsh(t) => t.knn(&self.points, q, exclude, &mut heap),
        }
        Ok(heap.into_list())
    }

    /// Ids within distance `r` of `center`, ascending. Approximate for LSH:
    /// a verified subset of the exact answer.
    pub fn range(&self, center: &[f64], r: f64) -> Result<Vec<PointId>, SpatialError> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(SpatialError::InvalidRadius(r));
        }
        let (c, _) = self.resolve(Query::Coords(center))?;
        let mut out = Vec::new();
        match &self.backend {
            Backend::KdTree(t) => t.range(&self.points, c, r, &mut out),
            Backend::BallTree(t) => t.range(&self.points, c, r, &mut out),
            Backend::Lsh(t) => t.range(&self.points, c, r, &mut out),
        }
        let mut ids: Vec<PointId> = out.into_iter().map(|pos| self.points.id_at(pos)).collect();
        ids.sort_unstable();
        Ok(ids)
    }
}
