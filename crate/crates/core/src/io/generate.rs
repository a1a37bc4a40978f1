use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Dataset, IoError};
use crate::spatial::PointSet;
use crate::tn::{separability_class, Separability};

/// Synthetic dataset recipes. Labels run from 1; injected noise is 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// `k` Gaussian blobs (truncated at 3 sigma per coordinate) with
    /// centers spaced `separation` apart along the main diagonal, so that
    /// per-feature normalization scales every axis alike.
    Blobs {
        k: usize,
        n: usize,
        dim: usize,
        sigma: f64,
        separation: f64,
    },
    /// Concentric rings in the first two coordinates, one class per radius.
    Rings {
        n: usize,
        radii: Vec<f64>,
        noise: f64,
        dim: usize,
    },
    /// Two interlocking rings of radius `radius` in 3-D, each passing
    /// through the other's center, with Gaussian jitter on every coordinate.
    Chainlink { n: usize, radius: f64, noise: f64 },
    /// A tight blob and a diffuse blob.
    MultiDensity {
        n_dense: usize,
        n_sparse: usize,
        dim: usize,
        dense_sigma: f64,
        sparse_sigma: f64,
        separation: f64,
    },
    /// Balls of diameter `threshold` whose centers are `2 * threshold + gap`
    /// apart, so the threshold graph's components are exactly the balls
    /// and each is a clique.
    AddInstance {
        sizes: Vec<usize>,
        dim: usize,
        threshold: f64,
        gap: f64,
    },
    /// `base` plus uniform noise over its bounding box making up `fraction`
    /// of the output.
    Noisy {
        base: Box<GeneratorSpec>,
        fraction: f64,
    },
}

fn invalid(msg: impl Into<String>) -> IoError {
    IoError::InvalidSpec(msg.into())
}

fn split(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|i| n / k + usize::from(i < n % k)).collect()
}

fn truncated_normal(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    loop {
        let z: f64 = StandardNormal.sample(rng);
        if z.abs() <= 3.0 {
            return z * sigma;
        }
    }
}

/// Uniform point in the ball of radius `r` around the origin.
fn in_ball(rng: &mut ChaCha8Rng, dim: usize, r: f64) -> Vec<f64> {
    let dir: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
    let norm = dir
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    let scale = r * rng.random::<f64>().powf(1.0 / dim as f64) / norm;
    dir.into_iter().map(|v| v * scale).collect()
}

fn raw(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Result<(Vec<Vec<f64>>, Vec<i64>), IoError> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    match spec {
        GeneratorSpec::Blobs {
            k,
            n,
            dim,
            sigma,
            separation,
        } => {
            if *k == 0 || *dim == 0 || *n < *k {
                return Err(invalid("blobs need k >= 1, dim >= 1 and n >= k"));
            }
            if !(*sigma >= 0.0 && separation.is_finite()) {
                return Err(invalid(
                    "blobs need a non-negative sigma and finite separation",
                ));
            }
            let step = separation / (*dim as f64).sqrt();
            for (c, size) in split(*n, *k).into_iter().enumerate() {
                for _ in 0..size {
                    let x: Vec<f64> = (0..*dim)
                        .map(|_| truncated_normal(rng, *sigma) + c as f64 * step)
                        .collect();
                    rows.push(x);
                    labels.push(c as i64 + 1);
                }
            }
        }
        GeneratorSpec::Rings {
            n,
            radii,
            noise,
            dim,
        } => {
            if radii.is_empty() || *dim < 2 || *n < radii.len() {
                return Err(invalid(
                    "rings need radii, dim >= 2 and n >= number of rings",
                ));
            }
            if radii.iter().any(|r| r.is_nan() || *r <= 0.0) || noise.is_nan() || *noise < 0.0 {
                return Err(invalid(
                    "ring radii must be positive and noise non-negative",
                ));
            }
            let jitter = Normal::new(0.0, *noise).map_err(|e| invalid(e.to_string()))?;
            for (c, size) in split(*n, radii.len()).into_iter().enumerate() {
                for _ in 0..size {
                    let t = rng.random::<f64>() * TAU;
                    let r = radii[c] + jitter.sample(rng);
                    let mut x = vec![r * t.cos(), r * t.sin()];
                    x.extend((2..*dim).map(|_| jitter.sample(rng)));
                    rows.push(x);
                    labels.push(c as i64 + 1);
                }
            }
        }
        GeneratorSpec::Chainlink { n, radius, noise } => {
            if *n < 2 || radius.is_nan() || *radius <= 0.0 || noise.is_nan() || *noise < 0.0 {
                return Err(invalid(
                    "chainlink needs n >= 2, a positive radius and noise >= 0",
                ));
            }
            let jitter = Normal::new(0.0, *noise).map_err(|e| invalid(e.to_string()))?;
            for (c, size) in split(*n, 2).into_iter().enumerate() {
                for _ in 0..size {
                    let t = rng.random::<f64>() * TAU;
                    let (a, b) = (radius * t.cos(), radius * t.sin());
                    let x = if c == 0 {
                        [a, b, 0.0]
                    } else {
                        [radius + a, 0.0, b]
                    };
                    rows.push(x.iter().map(|v| v + jitter.sample(rng)).collect());
                    labels.push(c as i64 + 1);
                }
            }
        }
        GeneratorSpec::MultiDensity {
            n_dense,
            n_sparse,
            dim,
            dense_sigma,
            sparse_sigma,
            separation,
        } => {
            if *dim == 0 || *n_dense == 0 || *n_sparse == 0 {
                return Err(invalid("multi_density needs both blobs and dim >= 1"));
            }
            for (c, (size, sigma)) in [(*n_dense, *dense_sigma), (*n_sparse, *sparse_sigma)]
                .into_iter()
                .enumerate()
            {
                if sigma.is_nan() || sigma < 0.0 {
                    return Err(invalid("sigma must be non-negative"));
                }
                for _ in 0..size {
                    let mut x: Vec<f64> = (0..*dim).map(|_| truncated_normal(rng, sigma)).collect();
                    x[0] += c as f64 * separation;
                    rows.push(x);
                    labels.push(c as i64 + 1);
                }
            }
        }
        GeneratorSpec::AddInstance {
            sizes,
            dim,
            threshold,
            gap,
        } => {
            if sizes.len() < 2 || sizes.contains(&0) || *dim == 0 {
                return Err(invalid("add_instance needs at least two nonempty groups"));
            }
            if !(*threshold > 0.0 && *gap > 0.0) {
                return Err(invalid("threshold and gap must be positive"));
            }
            let spacing = 2.0 * threshold + gap;
            for (c, &size) in sizes.iter().enumerate() {
                for _ in 0..size {
                    let mut x = in_ball(rng, *dim, threshold / 2.0);
                    x[0] += c as f64 * spacing;
                    rows.push(x);
                    labels.push(c as i64 + 1);
                }
            }
        }
        GeneratorSpec::Noisy { base, fraction } => {
            if !(0.0..1.0).contains(fraction) {
                return Err(invalid("noise fraction must be in [0, 1)"));
            }
            let (base_rows, base_labels) = raw(base, rng)?;
            let dim = base_rows[0].len();
            let mut lo = vec![f64::INFINITY; dim];
            let mut hi = vec![f64::NEG_INFINITY; dim];
            for x in &base_rows {
                for j in 0..dim {
                    lo[j] = lo[j].min(x[j]);
                    hi[j] = hi[j].max(x[j]);
                }
            }
            let n_noise = (base_rows.len() as f64 * fraction / (1.0 - fraction)).round() as usize;
            rows = base_rows;
            labels = base_labels;
            for _ in 0..n_noise {
                rows.push(
                    (0..dim)
                        .map(|j| lo[j] + rng.random::<f64>() * (hi[j] - lo[j]))
                        .collect(),
                );
                labels.push(0);
            }
        }
    }
    Ok((rows, labels))
}

/// Generates a labeled dataset in a seeded random order. Ids follow the
/// output order.
pub fn generate(spec: &GeneratorSpec, seed: u64) -> Result<Dataset, IoError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (rows, labels) = raw(spec, &mut rng)?;
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.shuffle(&mut rng);
    let rows: Vec<&Vec<f64>> = order.iter().map(|&i| &rows[i]).collect();
    let labels: Vec<i64> = order.iter().map(|&i| labels[i]).collect();
    let points = PointSet::from_rows(&rows)?;
    if let GeneratorSpec::AddInstance {
        sizes, threshold, ..
    } = spec
    {
        let report = separability_class(&points, *threshold).map_err(|e| invalid(e.to_string()))?;
        if report.class != Separability::Add || report.components.len() != sizes.len() {
            return Err(invalid(
                "generated points are not separable at the threshold",
            ));
        }
    }
    Ok(Dataset { points, labels })
}
