//! Independent reference implementations used by the integration suites.
//! Nothing here calls into the index or graph code it is checking.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tnstream::spatial::PointSet;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_points(n: usize, dim: usize, seed: u64) -> PointSet {
    let mut r = rng(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| r.random::<f64>()).collect())
        .collect();
    PointSet::from_rows(&rows).unwrap()
}

/// Points snapped to a coarse grid so that equal distances (ties) are common.
pub fn gridded_points(n: usize, dim: usize, seed: u64) -> PointSet {
    let mut r = rng(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| r.random_range(0..8) as f64).collect())
        .collect();
    PointSet::from_rows(&rows).unwrap()
}

pub fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// O(n) scan: k nearest others by (squared distance, id).
pub fn scan_knn(ps: &PointSet, q: &[f64], exclude: Option<usize>, k: usize) -> Vec<(usize, f64)> {
    let mut all: Vec<(f64, usize)> = ps
        .iter()
        .filter(|(id, _)| Some(*id) != exclude)
        .map(|(id, x)| (sq(q, x), id))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all.truncate(k);
    all.into_iter().map(|(d, id)| (id, d.sqrt())).collect()
}

pub fn scan_range(ps: &PointSet, c: &[f64], r: f64) -> Vec<usize> {
    let mut v: Vec<usize> = ps
        .iter()
        .filter(|(_, x)| sq(c, x) <= r * r)
        .map(|(id, _)| id)
        .collect();
    v.sort_unstable();
    v
}

/// Mutual k-NN sets by brute force.
pub fn scan_tn(ps: &PointSet, k: usize) -> HashMap<usize, BTreeSet<usize>> {
    let knn: HashMap<usize, BTreeSet<usize>> = ps
        .iter()
        .map(|(id, x)| {
            let set = if k == 0 {
                BTreeSet::new()
            } else {
                scan_knn(ps, x, Some(id), k)
                    .into_iter()
                    .map(|(j, _)| j)
                    .collect()
            };
            (id, set)
        })
        .collect();
    knn.iter()
        .map(|(&i, ni)| {
            let tn = ni.iter().copied().filter(|j| knn[j].contains(&i)).collect();
            (i, tn)
        })
        .collect()
}

/// Connected components by union-find, each sorted, ordered by min id.
pub fn union_find_components(ids: &[usize], edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let pos: HashMap<usize, usize> = ids.iter().enumerate().map(|(p, &id)| (id, p)).collect();
    let mut parent: Vec<usize> = (0..ids.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut c = x;
        while p[c] != r {
            let n = p[c];
            p[c] = r;
            c = n;
        }
        r
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, pos[&a]), find(&mut parent, pos[&b]));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for (p, &id) in ids.iter().enumerate() {
        let root = find(&mut parent, p);
        groups.entry(root).or_default().push(id);
    }
    let mut out: Vec<Vec<usize>> = groups
        .into_values()
        .map(|mut g| {
            g.sort_unstable();
            g
        })
        .collect();
    out.sort();
    out
}

/// Adjusted Rand index by explicit enumeration of all point pairs.
pub fn pair_count_ari(a: &[i64], b: &[i64]) -> f64 {
    let n = a.len();
    let (mut both, mut only_a, mut only_b, mut neither) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..n {
        for j in i + 1..n {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => both += 1.0,
                (true, false) => only_a += 1.0,
                (false, true) => only_b += 1.0,
                (false, false) => neither += 1.0,
            }
        }
    }
    let total = both + only_a + only_b + neither;
    if total == 0.0 {
        return 1.0;
    }
    let pairs_a = both + only_a;
    let pairs_b = both + only_b;
    let expected = pairs_a * pairs_b / total;
    let max = 0.5 * (pairs_a + pairs_b);
    if max == expected {
        return 1.0;
    }
    (both - expected) / (max - expected)
}

fn entropy_of(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// NMI via the entropy identity I = H(A) + H(B) - H(A, B), normalized by
/// the geometric mean of the marginal entropies.
pub fn entropy_nmi(a: &[i64], b: &[i64]) -> f64 {
    let n = a.len() as f64;
    let mut ca: HashMap<i64, usize> = HashMap::new();
    let mut cb: HashMap<i64, usize> = HashMap::new();
    let mut cab: HashMap<(i64, i64), usize> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *ca.entry(x).or_default() += 1;
        *cb.entry(y).or_default() += 1;
        *cab.entry((x, y)).or_default() += 1;
    }
    let ha = entropy_of(ca.values().copied(), n);
    let hb = entropy_of(cb.values().copied(), n);
    let hab = entropy_of(cab.values().copied(), n);
    if ha == 0.0 && hb == 0.0 {
        return 1.0;
    }
    if ha == 0.0 || hb == 0.0 {
        return 0.0;
    }
    (ha + hb - hab) / (ha * hb).sqrt()
}
