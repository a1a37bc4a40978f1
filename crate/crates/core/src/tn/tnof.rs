use std::collections::BTreeSet;

use super::{TnError, TnGraph};
use crate::spatial::{PointId, PointSet};

/// Default threshold multiplier: one standard deviation above the mean.
pub const DEFAULT_ALPHA: f64 = 1.0;

/// Tightest-neighbor outlier factor of every vertex of a graph.
///
/// `score(x) = Σ_{y∈TN(x)} d(x, y) / |TN(x)|²`, and `+∞` when `x` has no
/// tightest neighbor.
#[derive(Clone, Debug, PartialEq)]
pub struct TnofReport {
    scores: Vec<(PointId, f64)>,
}

impl TnofReport {
    pub fn from_graph(graph: &TnGraph) -> Self {
        let scores = graph
            .ids
            .iter()
            .zip(&graph.adj)
            .map(|(&id, list)| {
                let score = if list.is_empty() {
                    f64::INFINITY
                } else {
                    let m = list.len() as f64;
                    list.iter().map(|e| e.1).sum::<f64>() / (m * m)
                };
                (id, score)
            })
            .collect();
        Self { scores }
    }

    /// A report over precomputed scores.
    pub fn from_scores(scores: Vec<(PointId, f64)>) -> Self {
        Self { scores }
    }

    /// `(id, score)` in the graph's vertex order.
    pub fn scores(&self) -> &[(PointId, f64)] {
        &self.scores
    }

    pub fn score(&self, id: PointId) -> Option<f64> {
        self.scores.iter().find(|e| e.0 == id).map(|e| e.1)
    }

    /// `mean + alpha * std` over the finite scores, with the population
    /// standard deviation. When every finite score is equal the threshold is
    /// the mean itself, for any `alpha`.
    pub fn threshold(&self, alpha: f64) -> Result<f64, TnError> {
        if alpha.is_nan() {
            return Err(TnError::InvalidAlpha);
        }
        let finite: Vec<f64> = self
            .scores
            .iter()
            .map(|e| e.1)
            .filter(|s| s.is_finite())
            .collect();
        if finite.is_empty() {
            return Err(TnError::AllScoresInfinite);
        }
        let n = finite.len() as f64;
        let mean = finite.iter().sum::<f64>() / n;
        let var = finite.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        if std == 0.0 {
            Ok(mean)
        } else {
            Ok(mean + alpha * std)
        }
    }

    /// Points scoring strictly above the threshold, plus every isolated point.
    pub fn outliers(&self, alpha: f64) -> Result<BTreeSet<PointId>, TnError> {
        let theta = self.threshold(alpha)?;
        Ok(self
            .scores
            .iter()
            .filter(|e| e.1 > theta || e.1 == f64::INFINITY)
            .map(|e| e.0)
            .collect())
    }
}

pub fn tnof_scores(ps: &PointSet, k: usize) -> Result<TnofReport, TnError> {
    if k == 0 {
        return Err(TnError::ZeroK);
    }
    Ok(TnofReport::from_graph(&TnGraph::build(ps, k)?))
}

pub fn detect_outliers(report: &TnofReport, alpha: f64) -> Result<BTreeSet<PointId>, TnError> {
    report.outliers(alpha)
}
