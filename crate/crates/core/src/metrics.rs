//! External clustering quality measures: purity, normalized mutual
//! information and the adjusted Rand index.
//!
//! Labels are `i64`. A predicted label of `0` marks points the clusterer
//! left unassigned (outliers, points outside any macro-cluster); by default
//! they count as one more cluster, or they can be dropped with
//! [`OutlierPolicy::Exclude`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("label sequences differ in length: {predicted} predicted vs {truth} ground truth")]
    LengthMismatch { predicted: usize, truth: usize },
    #[error("no labels to score")]
    Empty,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutlierPolicy {
    /// Unassigned points form their own predicted cluster.
    #[default]
    AsCluster,
    /// Unassigned points are left out of the evaluation.
    Exclude,
}

/// Counts `n_ij` of points with predicted label `i` and true label `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContingencyTable {
    pub predicted: Vec<i64>,
    pub truth: Vec<i64>,
    /// `counts[i][j]`, indexed like `predicted` and `truth`.
    pub counts: Vec<Vec<u64>>,
    pub n: u64,
}

impl ContingencyTable {
    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.truth.len())
            .map(|j| self.counts.iter().map(|r| r[j]).sum())
            .collect()
    }
}

pub fn contingency(
    truth: &[i64],
    predicted: &[i64],
    policy: OutlierPolicy,
) -> Result<ContingencyTable, MetricsError> {
    if predicted.len() != truth.len() {
        return Err(MetricsError::LengthMismatch {
            predicted: predicted.len(),
            truth: truth.len(),
        });
    }
    let mut pairs: BTreeMap<(i64, i64), u64> = BTreeMap::new();
    for (&p, &t) in predicted.iter().zip(truth) {
        if policy == OutlierPolicy::Exclude && p == 0 {
            continue;
        }
        *pairs.entry((p, t)).or_default() += 1;
    }
    if pairs.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut rows: Vec<i64> = pairs.keys().map(|k| k.0).collect();
    rows.dedup();
    let mut cols: Vec<i64> = pairs.keys().map(|k| k.1).collect();
    cols.sort_unstable();
    cols.dedup();
    let mut counts = vec![vec![0u64; cols.len()]; rows.len()];
    let mut n = 0;
    for (&(p, t), &c) in &pairs {
        let i = rows.binary_search(&p).expect("row label present");
        let j = cols.binary_search(&t).expect("column label present");
        counts[i][j] = c;
        n += c;
    }
    Ok(ContingencyTable {
        predicted: rows,
        truth: cols,
        counts,
        n,
    })
}

/// Fraction of points whose predicted cluster's majority class matches
/// their own class.
pub fn purity_of(table: &ContingencyTable) -> f64 {
    let hits: u64 = table
        .counts
        .iter()
        .map(|r| r.iter().copied().max().unwrap_or(0))
        .sum();
    hits as f64 / table.n as f64
}

fn entropy(sums: &[u64], n: f64) -> f64 {
    sums.iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// True when the two labelings are the same partition, i.e. the table is
/// a permutation matrix.
fn is_same_partition(table: &ContingencyTable) -> bool {
    table.predicted.len() == table.truth.len()
        && table
            .counts
            .iter()
            .all(|r| r.iter().filter(|&&c| c > 0).count() == 1)
        && (0..table.truth.len()).all(|j| table.counts.iter().filter(|r| r[j] > 0).count() == 1)
}

/// Mutual information over the geometric mean of the two entropies.
/// Identical partitions score exactly 1; a single cluster against a split
/// labeling scores 0.
pub fn nmi_of(table: &ContingencyTable) -> f64 {
    if is_same_partition(table) {
        return 1.0;
    }
    let n = table.n as f64;
    let (rows, cols) = (table.row_sums(), table.col_sums());
    let (hp, ht) = (entropy(&rows, n), entropy(&cols, n));
    if hp == 0.0 || ht == 0.0 {
        return 0.0;
    }
    let mut mi = 0.0;
    for (i, r) in table.counts.iter().enumerate() {
        for (j, &c) in r.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / n * (n * c / (rows[i] as f64 * cols[j] as f64)).ln();
            }
        }
    }
    (mi / (hp * ht).sqrt()).clamp(0.0, 1.0)
}

fn pairs(c: u64) -> i128 {
    let c = c as i128;
    c * (c - 1) / 2
}

/// Adjusted Rand index. When the expected and maximum indices coincide
/// (for example a single point, or both labelings trivial) the labelings
/// are indistinguishable by pair counting and the score is 1.
///
/// Pair counts are exact integers; with `T` total pairs the index is
/// `2 (index T - a b) / ((a + b) T - 2 a b)`, rounded once.
pub fn ari_of(table: &ContingencyTable) -> f64 {
    let index: i128 = table.counts.iter().flatten().map(|&c| pairs(c)).sum();
    let a: i128 = table.row_sums().into_iter().map(pairs).sum();
    let b: i128 = table.col_sums().into_iter().map(pairs).sum();
    let total = pairs(table.n);
    let num = 2 * (index * total - a * b);
    let denom = (a + b) * total - 2 * a * b;
    if denom == 0 {
        return 1.0;
    }
    num as f64 / denom as f64
}

pub fn purity(truth: &[i64], predicted: &[i64]) -> Result<f64, MetricsError> {
    Ok(purity_of(&contingency(
        truth,
        predicted,
        OutlierPolicy::AsCluster,
    )?))
}

pub fn nmi(truth: &[i64], predicted: &[i64]) -> Result<f64, MetricsError> {
    Ok(nmi_of(&contingency(
        truth,
        predicted,
        OutlierPolicy::AsCluster,
    )?))
}

pub fn ari(truth: &[i64], predicted: &[i64]) -> Result<f64, MetricsError> {
    Ok(ari_of(&contingency(
        truth,
        predicted,
        OutlierPolicy::AsCluster,
    )?))
}

/// All three measures from one contingency table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub purity: f64,
    pub ari: f64,
    pub nmi: f64,
}

pub fn evaluate(
    truth: &[i64],
    predicted: &[i64],
    policy: OutlierPolicy,
) -> Result<Scores, MetricsError> {
    let t = contingency(truth, predicted, policy)?;
    Ok(Scores {
        purity: purity_of(&t),
        ari: ari_of(&t),
        nmi: nmi_of(&t),
    })
}
