use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{sq_dist, KnnHeap, LshParams, PointSet, SpatialError};

/// A matrix of random hyperplane normals, one per row.
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperplanes {
    dim: usize,
    rows: Vec<f64>,
}

impl Hyperplanes {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, SpatialError> {
        let dim = rows
            .first()
            .ok_or(SpatialError::EmptyPointSet)?
            .as_ref()
            .len();
        let mut flat = Vec::with_capacity(dim * rows.len());
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(SpatialError::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            flat.extend_from_slice(r);
        }
        Ok(Self { dim, rows: flat })
    }

    /// `count` normals with independent standard-normal entries.
    pub fn gaussian(count: usize, dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let rows = (0..count * dim)
            .map(|_| StandardNormal.sample(rng))
            .collect();
        Self { dim, rows }
    }

    pub fn seeded(count: usize, dim: usize, seed: u64) -> Self {
        Self::gaussian(count, dim, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.rows.len() / self.dim
    }

    fn row(&self, j: usize) -> &[f64] {
        &self.rows[j * self.dim..(j + 1) * self.dim]
    }
}

/// Packed sign bits, one per hyperplane.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SrpSignature {
    len: usize,
    words: Vec<u64>,
}

impl SrpSignature {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, j: usize) -> bool {
        assert!(j < self.len, "bit {j} out of range for {} bits", self.len);
        self.words[j / 64] >> (j % 64) & 1 == 1
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|j| self.bit(j))
    }
}

/// Bit j is set iff `dot(w_j, x) >= 0`.
pub fn srp_signature(x: &[f64], planes: &Hyperplanes) -> Result<SrpSignature, SpatialError> {
    if x.len() != planes.dim {
        return Err(SpatialError::DimensionMismatch {
            expected: planes.dim,
            found: x.len(),
        });
    }
    let len = planes.count();
    let mut words = vec![0u64; len.div_ceil(64)];
    for j in 0..len {
        let dot: f64 = planes.row(j).iter().zip(x).map(|(w, v)| w * v).sum();
        if dot >= 0.0 {
            words[j / 64] |= 1 << (j % 64);
        }
    }
    Ok(SrpSignature { len, words })
}

/// Multi-table signed-random-projection index.
///
/// Points are hashed in lifted coordinates `((x - mean) / spread, 1)`: the
/// extra constant coordinate gives every hyperplane an offset, so cells tile
/// the occupied region instead of fanning out as wedges from the origin.
/// A stored point is a candidate for a query if the two collide in at
/// least one table; candidates are always re-ranked by true distance.
#[derive(Debug)]
pub struct LshIndex {
    mean: Vec<f64>,
    spread: f64,
    planes: Vec<Hyperplanes>,
    tables: Vec<HashMap<SrpSignature, Vec<usize>>>,
}

impl LshIndex {
    pub(super) fn build(ps: &PointSet, params: LshParams) -> Result<Self, SpatialError> {
        if params.num_hyperplanes == 0 {
            return Err(SpatialError::InvalidLshParams(
                "num_hyperplanes must be >= 1",
            ));
        }
        if params.num_tables == 0 {
            return Err(SpatialError::InvalidLshParams("num_tables must be >= 1"));
        }
        let d = ps.dim();
        let n = ps.len() as f64;
        let mut mean = vec![0.0; d];
        for (_, x) in ps.iter() {
            mean.iter_mut().zip(x).for_each(|(m, v)| *m += v);
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let spread = (ps.iter().map(|(_, x)| sq_dist(x, &mean)).sum::<f64>() / n).sqrt();
        let spread = if spread > 0.0 { spread } else { 1.0 };

        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let planes: Vec<_> = (0..params.num_tables)
            .map(|_| Hyperplanes::gaussian(params.num_hyperplanes, d + 1, &mut rng))
            .collect();

        let mut index = LshIndex {
            mean,
            spread,
            planes,
            tables: Vec::new(),
        };
        let mut tables = vec![HashMap::<SrpSignature, Vec<usize>>::new(); params.num_tables];
        for pos in 0..ps.len() {
            for (t, sig) in index.signatures(ps.at(pos)).into_iter().enumerate() {
                tables[t].entry(sig).or_default().push(pos);
            }
        }
        index.tables = tables;
        Ok(index)
    }

    fn lift(&self, x: &[f64]) -> Vec<f64> {
        let mut z: Vec<f64> = x
            .iter()
            .zip(&self.mean)
            .map(|(v, m)| (v - m) / self.spread)
            .collect();
        z.push(1.0);
        z
    }

    /// One signature per table.
    pub fn signatures(&self, x: &[f64]) -> Vec<SrpSignature> {
        let z = self.lift(x);
        self.planes
            .iter()
            .map(|p| srp_signature(&z, p).expect("lifted arity matches hyperplanes"))
            .collect()
    }

    fn candidates(&self, q: &[f64]) -> Vec<usize> {
        let mut out = Vec::new();
        for (table, sig) in self.tables.iter().zip(self.signatures(q)) {
            if let Some(bucket) = table.get(&sig) {
                out.extend_from_slice(bucket);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    pub(super) fn knn(&self, ps: &PointSet, q: &[f64], exclude: Option<usize>, heap: &mut KnnHeap) {
        for pos in self.candidates(q) {
            if Some(pos) != exclude {
                heap.offer(sq_dist(q, ps.at(pos)), ps.id_at(pos));
            }
        }
    }

    pub(super) fn range(&self, ps: &PointSet, c: &[f64], r: f64, out: &mut Vec<usize>) {
        let r2 = r * r;
        out.extend(
            self.candidates(c)
                .into_iter()
                .filter(|&pos| sq_dist(c, ps.at(pos)) <= r2),
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_of_first_coordinate() {
        let planes = Hyperplanes::from_rows(&[[1.0, 0.0]]).unwrap();
        assert!(srp_signature(&[1.0, 0.0], &planes).unwrap().bit(0));
        assert!(!srp_signature(&[-1.0, 0.0], &planes).unwrap().bit(0));
        // dot = 0 maps to 1
        assert!(srp_signature(&[0.0, 5.0], &planes).unwrap().bit(0));
    }

    #[test]
    fn arity_is_checked() {
        let planes = Hyperplanes::seeded(4, 3, 1);
        assert_eq!(
            srp_signature(&[1.0, 2.0], &planes).unwrap_err(),
            SpatialError::DimensionMismatch {
                expected: 3,
                found: 2
            }
        );
    }

    #[test]
    fn signatures_are_deterministic() {
        let a = Hyperplanes::seeded(70, 5, 99);
        let b = Hyperplanes::seeded(70, 5, 99);
        assert_eq!(a, b);
        let x = [0.3, -1.0, 2.0, 0.0, 4.5];
        let s = srp_signature(&x, &a).unwrap();
        assert_eq!(s, srp_signature(&x, &b).unwrap());
        assert_eq!(s.len(), 70);
        assert_eq!(s.bits().count(), 70);
    }

    #[test]
    fn zero_params_rejected() {
        let ps = PointSet::from_rows(&[[0.0]]).unwrap();
        let p = LshParams {
            num_hyperplanes: 0,
            num_tables: 1,
            seed: 0,
        };
        assert!(matches!(
            LshIndex::build(&ps, p),
            Err(SpatialError::InvalidLshParams(_))
        ));
    }
}
