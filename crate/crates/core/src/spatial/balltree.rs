use super::{dist, sq_dist, KnnHeap, PointSet};

const LEAF_SIZE: usize = 16;

/// Relative slack on ball lower bounds. The triangle-inequality bound is
/// computed in floating point and can overshoot by a few ulps.
const BOUND_SLACK: f64 = 1e-10;

#[derive(Debug)]
struct Node {
    start: usize,
    end: usize,
    radius: f64,
    children: Option<(usize, usize)>,
}

/// Ball tree: every node is a hypersphere (centroid, covering radius).
/// Children are split along the axis joining two far-apart points.
#[derive(Debug)]
pub struct BallTree {
    dim: usize,
    perm: Vec<usize>,
    nodes: Vec<Node>,
    centers: Vec<f64>,
}

impl BallTree {
    pub(super) fn build(ps: &PointSet) -> Self {
        let mut tree = BallTree {
            dim: ps.dim(),
            perm: (0..ps.len()).collect(),
            nodes: Vec::new(),
            centers: Vec::new(),
        };
        tree.build_node(ps, 0, ps.len());
        tree
    }

    fn build_node(&mut self, ps: &PointSet, start: usize, end: usize) -> usize {
        let d = self.dim;
        let count = (end - start) as f64;
        let mut center = vec![0.0; d];
        for &pos in &self.perm[start..end] {
            for (acc, &c) in center.iter_mut().zip(ps.at(pos)) {
                *acc += c;
            }
        }
        center.iter_mut().for_each(|c| *c /= count);

        let farthest_from = |from: &[f64], perm: &[usize]| {
            perm.iter()
                .copied()
                .map(|pos| (pos, sq_dist(from, ps.at(pos))))
                .fold((perm[0], f64::NEG_INFINITY), |best, cur| {
                    if cur.1 > best.1 {
                        cur
                    } else {
                        best
                    }
                })
        };
        let (a, radius_sq) = farthest_from(&center, &self.perm[start..end]);

        let node = self.nodes.len();
        self.nodes.push(Node {
            start,
            end,
            radius: radius_sq.sqrt(),
            children: None,
        });
        self.centers.extend_from_slice(&center);

        if end - start <= LEAF_SIZE || radius_sq <= 0.0 {
            return node;
        }
        let (b, _) = farthest_from(ps.at(a), &self.perm[start..end]);
        let (pa, pb) = (ps.at(a), ps.at(b));
        let axis: Vec<f64> = pb.iter().zip(pa).map(|(x, y)| x - y).collect();
        let proj = |pos: usize| -> f64 { ps.at(pos).iter().zip(&axis).map(|(x, w)| x * w).sum() };
        let mid = start + (end - start) / 2;
        self.perm[start..end].select_nth_unstable_by(mid - start, |&x, &y| {
            proj(x).total_cmp(&proj(y)).then(x.cmp(&y))
        });
        let left = self.build_node(ps, start, mid);
        let right = self.build_node(ps, mid, end);
        self.nodes[node].children = Some((left, right));
        node
    }

    fn center(&self, node: usize) -> &[f64] {
        &self.centers[node * self.dim..(node + 1) * self.dim]
    }

    /// `(lower bound on distance to any member, distance to centroid)`.
    fn bound(&self, node: usize, q: &[f64]) -> (f64, f64) {
        let dc = dist(q, self.center(node));
        ((dc - self.nodes[node].radius).max(0.0), dc)
    }

    fn prunable(&self, node: usize, q: &[f64], limit: f64) -> bool {
        let (lb, dc) = self.bound(node, q);
        lb - limit > BOUND_SLACK * (dc + self.nodes[node].radius + limit)
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
                let (la, lb) = (self.bound(a, q).0, self.bound(b, q).0);
                let order = if lb < la { [b, a] } else { [a, b] };
                for child in order {
                    if let Some(bound) = heap.bound() {
                        if self.prunable(child, q, bound.sqrt()) {
                            continue;
                        }
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
            if self.prunable(node, c, r) {
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
