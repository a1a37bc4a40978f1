use super::{sq_dist, KnnHeap, PointSet};

const LEAF_SIZE: usize = 16;

#[derive(Debug)]
struct Node {
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
}

/// Axis-aligned KD-tree with per-node bounding boxes.
///
/// Splits on the widest box extent at the median. Pruning compares the
/// squared box distance against the current bound with a strict `>`, so
/// equal-distance points with smaller ids are never skipped.
#[derive(Debug)]
pub struct KdTree {
    dim: usize,
    perm: Vec<usize>,
    nodes: Vec<Node>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl KdTree {
    pub(super) fn build(ps: &PointSet) -> Self {
        let mut tree = KdTree {
            dim: ps.dim(),
            perm: (0..ps.len()).collect(),
            nodes: Vec::new(),
            lo: Vec::new(),
            hi: Vec::new(),
        };
        tree.build_node(ps, 0, ps.len());
        tree
    }

    fn build_node(&mut self, ps: &PointSet, start: usize, end: usize) -> usize {
        let d = self.dim;
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for &pos in &self.perm[start..end] {
            for (j, &c) in ps.at(pos).iter().enumerate() {
                lo[j] = lo[j].min(c);
                hi[j] = hi[j].max(c);
            }
        }
        let node = self.nodes.len();
        self.nodes.push(Node {
            start,
            end,
            children: None,
        });
        let (axis, extent) =
            (0..d)
                .map(|j| (j, hi[j] - lo[j]))
                .fold((0, f64::NEG_INFINITY), |best, cur| {
                    if cur.1 > best.1 {
                        cur
                    } else {
                        best
                    }
                });
        self.lo.extend_from_slice(&lo);
        self.hi.extend_from_slice(&hi);

        if end - start <= LEAF_SIZE || extent <= 0.0 {
            return node;
        }
        let mid = start + (end - start) / 2;
        self.perm[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            ps.at(a)[axis].total_cmp(&ps.at(b)[axis]).then(a.cmp(&b))
        });
        let left = self.build_node(ps, start, mid);
        let right = self.build_node(ps, mid, end);
        self.nodes[node].children = Some((left, right));
        node
    }

    /// Squared distance from `q` to the node's box; never exceeds the
    /// squared distance to any point inside it.
    fn box_sq(&self, node: usize, q: &[f64]) -> f64 {
        let d = self.dim;
        let lo = &self.lo[node * d..(node + 1) * d];
        let hi = &self.hi[node * d..(node + 1) * d];
        let mut s = 0.0;
        for j in 0..d {
            let gap = if q[j] < lo[j] {
                lo[j] - q[j]
            } else if q[j] > hi[j] {
                q[j] - hi[j]
            } else {
                0.0
            };
            s += gap * gap;
        }
        s
    }

    pub(super) fn knn(&self, ps: &PointSet, q: &[f64], exclude: Option<usize>, heap: &mut KnnHeap) {
        self.knn_node(ps, 0, q, exclude, heap);
    }

    fn knn_node(
        &self,
        ps: &PointSet,
        node: usize,
        q: &[f64],
        exclude: Option<usize>,
        heap: &mut KnnHeap,
    ) {
        let n = &self.nodes[node];
        match n.children {
            None => {
                for &pos in &self.perm[n.start..n.end] {
                    if Some(pos) != exclude {
                        heap.offer(sq_dist(q, ps.at(pos)), ps.id_at(pos));
                    }
                }
            }
            Some((a, b)) => {
                let (da, db) = (self.box_sq(a, q), self.box_sq(b, q));
                let order = if db < da {
                    [(b, db), (a, da)]
                } else {
                    [(a, da), (b, db)]
                };
                for (child, lb) in order {
                    if heap.bound().is_some_and(|bound| lb > bound) {
                        continue;
                    }
                    self.knn_node(ps, child, q, exclude, heap);
                }
            }
        }
    }

    pub(super) fn range(&self, ps: &PointSet, c: &[f64], r: f64, out: &mut Vec<usize>) {
        let r2 = r * r;
        let mut stack = vec![0];
        while let Some(node) = stack.pop() {
            if self.box_sq(node, c) > r2 {
                continue;
            }
            let n = &self.nodes[node];
            match n.children {
                None => out.extend(
                    self.perm[n.start..n.end]
                        .iter()
                        .copied()
                        .filter(|&pos| sq_dist(c, ps.at(pos)) <= r2),
                ),
                Some((a, b)) => {
                    stack.push(a);
                    stack.push(b);
                }
            }
        }
    }
}
