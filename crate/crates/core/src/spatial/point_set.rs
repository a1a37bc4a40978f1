use std::collections::HashMap;

use super::{PointId, SpatialError};

/// An ordered collection of `dim`-dimensional points, each carrying a unique id.
///
/// Coordinates are stored row-major in one flat buffer. Positions (the order
/// of insertion) and ids are distinct: ids need not be contiguous.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointSet {
    dim: usize,
    ids: Vec<PointId>,
    coords: Vec<f64>,
    positions: HashMap<PointId, usize>,
}

impl PointSet {
    pub fn new(dim: usize) -> Result<Self, SpatialError> {
        if dim == 0 {
            return Err(SpatialError::ZeroDimension);
        }
        Ok(Self {
            dim,
            ..Self::default()
        })
    }

    /// Builds a point set whose ids are the row indices `0..rows.len()`.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, SpatialError> {
        let dim = rows
            .first()
            .ok_or(SpatialError::EmptyPointSet)?
            .as_ref()
            .len();
        let mut ps = Self::new(dim)?;
        for (id, row) in rows.iter().enumerate() {
            ps.push(id, row.as_ref())?;
        }
        Ok(ps)
    }

    pub fn with_ids<R: AsRef<[f64]>>(
        dim: usize,
        ids: &[PointId],
        rows: &[R],
    ) -> Result<Self, SpatialError> {
        let mut ps = Self::new(dim)?;
        for (&id, row) in ids.iter().zip(rows) {
            ps.push(id, row.as_ref())?;
        }
        Ok(ps)
    }

    pub fn push(&mut self, id: PointId, coords: &[f64]) -> Result<(), SpatialError> {
        if coords.len() != self.dim {
            return Err(SpatialError::DimensionMismatch {
                expected: self.dim,
                found: coords.len(),
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(SpatialError::NonFinite(id));
        }
        if self.positions.contains_key(&id) {
            return Err(SpatialError::DuplicateId(id));
        }
        self.positions.insert(id, self.ids.len());
        self.ids.push(id);
        self.coords.extend_from_slice(coords);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
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

    pub fn id_at(&self, pos: usize) -> PointId {
        self.ids[pos]
    }

    /// Coordinates of the point stored at `pos`.
    pub fn at(&self, pos: usize) -> &[f64] {
        &self.coords[pos * self.dim..(pos + 1) * self.dim]
    }

    pub fn position(&self, id: PointId) -> Option<usize> {
        self.positions.get(&id).copied()
    }

    pub fn contains(&self, id: PointId) -> bool {
        self.positions.contains_key(&id)
    }

    pub fn coords(&self, id: PointId) -> Result<&[f64], SpatialError> {
        self.position(id)
            .map(|pos| self.at(pos))
            .ok_or(SpatialError::UnknownId(id))
    }

    pub fn iter(&self) -> impl Iterator<Item = (PointId, &[f64])> + '_ {
        // an empty default set has dim 0, which chunks_exact rejects
        self.ids
            .iter()
            .copied()
            .zip(self.coords.chunks_exact(self.dim.max(1)))
    }

    /// The points whose ids are listed, in the given order.
    pub fn subset(&self, ids: &[PointId]) -> Result<PointSet, SpatialError> {
        let mut out = PointSet::new(self.dim)?;
        for &id in ids {
            out.push(id, self.coords(id)?)?;
        }
        Ok(out)
    }

    /// Returns a copy with every coordinate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> PointSet {
        let mut out = self.clone();
        out.coords.iter_mut().for_each(|c| *c *= factor);
        out
    }
}
