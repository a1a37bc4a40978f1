//! The online clustering loop over a count-based sliding window.
//!
//! Every arrival runs the same pipeline: evict expired points, found new
//! micro-clusters among unassigned points, absorb unassigned points into
//! existing micro-clusters, form and extend macro-clusters by kTNC over
//! micro-cluster centers, refresh centers and macro membership, and delete
//! micro- and macro-clusters that fell below their size thresholds.

mod engine;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::snn::{SnnError, SnnParams};
use crate::spatial::{IndexBackend, PointId, SpatialError};
use crate::tn::TnError;

pub use engine::{EvictedPoint, StreamEngine};

pub type McId = u64;
pub type MacroId = u64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StreamError {
    #[error("invalid stream configuration: {0}")]
    InvalidConfig(String),
    #[error("expected arrival index {expected}, got {found}")]
    OutOfOrderArrival { expected: u64, found: u64 },
    #[error(transparent)]
    Spatial(#[from] SpatialError),
    #[error(transparent)]
    Snn(#[from] SnnError),
    #[error(transparent)]
    Tn(#[from] TnError),
}

fn default_stride() -> usize {
    1
}

/// Which micro-clusters [`StreamEngine::define_macros`] clusters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MacroScope {
    /// Every live micro-cluster, so a new group can absorb and merge
    /// existing macro-clusters.
    #[default]
    All,
    /// Only micro-clusters outside every macro-cluster. Macro-clusters then
    /// never merge, and one that formed early in pieces stays in pieces.
    Unattached,
}

fn default_alpha() -> f64 {
    crate::tn::DEFAULT_ALPHA
}

/// Engine parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StreamConfig {
    /// Number of most recent points kept live.
    pub window: usize,
    /// Minimum points per micro-cluster (`N`).
    pub min_pts: usize,
    /// Minimum micro-clusters per macro-cluster.
    pub n_micro: usize,
    /// Cap on micro-cluster radii.
    pub r_max: f64,
    /// Tightest-neighbor count for kTNC over micro-cluster centers.
    pub k: usize,
    /// Neighborhood size for shared-neighbor counts.
    pub tk: usize,
    /// Shared-count threshold.
    pub mk: usize,
    /// Outlier threshold multiplier.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub backend: IndexBackend,
    #[serde(default)]
    pub macro_scope: MacroScope,
    /// Arrivals per pipeline run. 1 runs the pipeline on every point.
    #[serde(default = "default_stride")]
    pub stride: usize,
}

impl StreamConfig {
    pub fn snn(&self) -> SnnParams {
        SnnParams {
            tk: self.tk,
            mk: self.mk,
            r_max: self.r_max,
        }
    }

    pub fn validate(&self) -> Result<(), StreamError> {
        let bad = |msg: &str| Err(StreamError::InvalidConfig(msg.to_string()));
        if self.min_pts < 2 {
            return bad("min_pts must be at least 2");
        }
        if self.window < self.min_pts {
            return bad("window must be at least min_pts");
        }
        if self.n_micro == 0 {
            return bad("n_micro must be at least 1");
        }
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        if self.stride == 0 {
            return bad("stride must be at least 1");
        }
        if self.alpha.is_nan() {
            return bad("alpha must not be NaN");
        }
        if let IndexBackend::Lsh(p) = self.backend {
            if p.num_hyperplanes == 0 || p.num_tables == 0 {
                return bad("LSH needs at least one hyperplane and one table");
            }
        }
        self.snn()
            .validate()
            .map_err(|e| StreamError::InvalidConfig(e.to_string()))
    }
}

/// One arriving point.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamPoint {
    pub id: PointId,
    /// Starts at 1 and increases by one per arrival.
    pub arrival_index: u64,
    pub coords: Vec<f64>,
    pub mc_id: Option<McId>,
    pub true_label: Option<i64>,
}

impl StreamPoint {
    pub fn new(id: PointId, arrival_index: u64, coords: Vec<f64>) -> Self {
        Self {
            id,
            arrival_index,
            coords,
            mc_id: None,
            true_label: None,
        }
    }

    pub fn with_label(mut self, label: i64) -> Self {
        self.true_label = Some(label);
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MicroCluster {
    pub id: McId,
    /// Mean of the live members as of the last update.
    pub center: Vec<f64>,
    /// Fixed at creation.
    pub radius: f64,
    pub count: usize,
    pub macro_id: Option<MacroId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MacroCluster {
    pub id: MacroId,
    pub mc_ids: BTreeSet<McId>,
}

pub const SNAPSHOT_SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub id: PointId,
    /// 0 when unassigned.
    pub mc: McId,
    /// 0 when the point is outside every macro-cluster.
    #[serde(rename = "macro")]
    pub macro_id: MacroId,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McRecord {
    pub id: McId,
    pub center: Vec<f64>,
    pub r: f64,
    pub count: usize,
    /// 0 for micro-clusters outside every macro-cluster.
    #[serde(rename = "macro")]
    pub macro_id: MacroId,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroRecord {
    pub id: MacroId,
    pub mcs: Vec<McId>,
}

/// Immutable view of the engine state after an arrival.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StreamSnapshot {
    pub schema: u32,
    /// Arrival index of the latest point, 0 before any arrival.
    pub step: u64,
    /// Live points in arrival order.
    pub points: Vec<PointRecord>,
    /// Ascending id.
    pub mcs: Vec<McRecord>,
    /// Ascending id.
    pub macros: Vec<MacroRecord>,
}

impl StreamSnapshot {
    /// Micro-clusters not attached to any macro-cluster.
    pub fn outlier_mcs(&self) -> Vec<McId> {
        self.mcs
            .iter()
            .filter(|m| m.macro_id == 0)
            .map(|m| m.id)
            .collect()
    }

    pub fn macro_ids(&self) -> Vec<MacroId> {
        self.macros.iter().map(|m| m.id).collect()
    }

    /// Predicted label per live point: its macro-cluster id, or 0.
    pub fn labels(&self) -> BTreeMap<PointId, i64> {
        self.points
            .iter()
            .map(|p| (p.id, p.macro_id as i64))
            .collect()
    }
}
