//! Published parameter sets for the benchmark datasets.
//!
//! Radii assume features min-max normalized to `[0, 1]`. Names ending in
//! `_lsh` select the hashing backend with that dataset's hash budget.

use super::GeneratorSpec;
use crate::spatial::{IndexBackend, LshParams};
use crate::stream::StreamConfig;

/// Signature bits per table when a preset only states a total hash budget.
const PRESET_LSH_BITS: usize = 10;

/// `(name, W, N, r_max, n_micro, k, tk, mk, num_hashes)`.
type Row = (
    &'static str,
    usize,
    usize,
    f64,
    usize,
    usize,
    usize,
    usize,
    usize,
);

const ROWS: &[Row] = &[
    ("exclastar", 1500, 2, 0.0449, 3, 4, 5, 4, 0),
    ("n3_ball", 400, 3, 0.1335, 5, 4, 5, 4, 0),
    ("ln3_k6", 1200, 2, 0.054, 4, 4, 5, 4, 0),
    ("ln3_k3", 600, 2, 0.122, 4, 4, 5, 4, 0),
    ("ln3_k2", 600, 2, 0.134, 4, 4, 7, 6, 0),
    ("n3_k2", 300, 2, 0.131, 3, 4, 4, 3, 0),
    ("n3_k3", 400, 2, 0.121, 3, 4, 4, 3, 0),
    ("d20", 1000, 2, 0.036, 8, 4, 5, 4, 0),
    ("ring", 300, 2, 0.0473, 5, 4, 3, 2, 0),
    ("data1", 678, 2, 0.0293, 8, 4, 3, 2, 0),
    ("data2", 517, 2, 0.0311, 7, 4, 3, 2, 0),
    ("data4", 2250, 3, 0.0308, 8, 4, 5, 4, 0),
    ("kdd", 4000, 3, 0.6642, 10, 4, 5, 4, 0),
    ("mr_data", 333, 2, 0.218, 8, 4, 4, 4, 0),
    ("breast", 160, 2, 0.2393, 7, 4, 5, 2, 0),
    ("iris", 46, 2, 0.1603, 2, 4, 3, 2, 0),
    ("column", 44, 2, 0.1677, 7, 4, 3, 2, 0),
    ("new_thyroid", 44, 2, 0.1683, 4, 4, 3, 2, 0),
    ("ds10", 310, 3, 0.0471, 9, 4, 5, 4, 0),
    ("ds11", 1300, 2, 0.0542, 12, 4, 5, 4, 0),
    ("ds13", 1000, 3, 0.27, 5, 4, 5, 4, 0),
    ("kdd_lsh", 4288, 3, 0.701, 8, 4, 4, 4, 40),
    ("breast_lsh", 160, 2, 0.2393, 7, 4, 5, 2, 10),
    ("iris_lsh", 46, 2, 0.1603, 2, 4, 3, 2, 10),
    ("column_lsh", 44, 2, 0.1677, 7, 4, 3, 2, 10),
    ("new_thyroid_lsh", 44, 2, 0.1683, 4, 4, 3, 2, 10),
];

pub const PRESET_NAMES: &[&str] = &[
    "exclastar",
    "n3_ball",
    "ln3_k6",
    "ln3_k3",
    "ln3_k2",
    "n3_k2",
    "n3_k3",
    "d20",
    "ring",
    "data1",
    "data2",
    "data4",
    "kdd",
    "mr_data",
    "breast",
    "iris",
    "column",
    "new_thyroid",
    "ds10",
    "ds11",
    "ds13",
    "kdd_lsh",
    "breast_lsh",
    "iris_lsh",
    "column_lsh",
    "new_thyroid_lsh",
];

/// Stream parameters for a named dataset, with the KD-tree backend unless
/// the preset is an LSH one.
pub fn preset(name: &str) -> Option<StreamConfig> {
    let &(_, window, min_pts, r_max, n_micro, k, tk, mk, hashes) =
        ROWS.iter().find(|r| r.0 == name)?;
    let backend = if hashes > 0 {
        IndexBackend::Lsh(LshParams::from_total(
            hashes,
            (hashes / PRESET_LSH_BITS).max(1),
            0,
        ))
    } else {
        IndexBackend::KdTree
    };
    Some(StreamConfig {
        window,
        min_pts,
        n_micro,
        r_max,
        k,
        tk,
        mk,
        alpha: crate::tn::DEFAULT_ALPHA,
        backend,
        macro_scope: Default::default(),
        stride: 1,
    })
}

/// Generator standing in for a benchmark dataset that is not bundled, with
/// the dataset's size, dimension and class count.
pub fn analogue(name: &str) -> Option<GeneratorSpec> {
    match name {
        "n3_k2" => Some(GeneratorSpec::Blobs {
            k: 2,
            n: 300,
            dim: 3,
            sigma: 0.25,
            separation: 2.0,
        }),
        "n3_k3" => Some(GeneratorSpec::Blobs {
            k: 3,
            n: 400,
            dim: 3,
            sigma: 0.25,
            separation: 2.0,
        }),
        "ring" => Some(GeneratorSpec::Chainlink {
            n: 300,
            radius: 1.0,
            noise: 0.03,
        }),
        _ => None,
    }
}
