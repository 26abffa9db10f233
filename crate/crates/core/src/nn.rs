//! Exact nearest-neighbor search over descriptor vectors.
//!
//! The KD-tree returns exactly the same minimum squared distance as the brute
//! force scan; both go through [`sq_dist`], so the results agree bit for bit.

#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        s += d * d;
    }
    s
}

/// Smallest squared distance from `query` to any of the `dim`-wide rows of
/// `points`, or `None` if `points` is empty.
pub fn brute_nearest(query: &[f64], points: &[f64], dim: usize) -> Option<f64> {
    points.chunks_exact(dim.max(1)).map(|p| sq_dist(query, p)).reduce(f64::min)
}

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: Box<Node>, right: Box<Node> },
}

/// Static KD-tree over a flat row-major point array.
#[derive(Debug, Clone)]
pub struct KdTree {
    dim: usize,
    points: Vec<f64>,
    root: Option<Node>,
}

impl KdTree {
    pub fn build(points: &[f64], dim: usize) -> Self {
        let n = points.len().checked_div(dim).unwrap_or(0);
        let mut order: Vec<usize> = (0..n).collect();
        let root = (n > 0).then(|| Self::build_node(points, dim, &mut order, 0));
        let mut sorted = Vec::with_capacity(n * dim);
        for &i in &order {
            sorted.extend_from_slice(&points[i * dim..(i + 1) * dim]);
        }
        KdTree { dim, points: sorted, root }
    }

    fn build_node(points: &[f64], dim: usize, order: &mut [usize], offset: usize) -> Node {
        let n = order.len();
        if n <= LEAF_SIZE {
            return Node::Leaf { start: offset, end: offset + n };
        }
        // split on the axis of largest spread
        let coord = |i: usize, a: usize| points[i * dim + a];
        let axis = (0..dim)
            .map(|a| {
                let (lo, hi) = order.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                    (lo.min(coord(i, a)), hi.max(coord(i, a)))
                });
                (a, hi - lo)
            })
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
            .0;
        let mid = n / 2;
        order.select_nth_unstable_by(mid, |&a, &b| coord(a, axis).total_cmp(&coord(b, axis)));
        let value = coord(order[mid], axis);
        let (lo, hi) = order.split_at_mut(mid);
        let left = Self::build_node(points, dim, lo, offset);
        let right = Self::build_node(points, dim, hi, offset + mid);
        Node::Split { axis, value, left: Box::new(left), right: Box::new(right) }
    }

    pub fn len(&self) -> usize {
        self.points.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn nearest(&self, query: &[f64]) -> Option<f64> {
        let root = self.root.as_ref()?;
        let mut best = f64::INFINITY;
        self.search(root, query, &mut best);
        Some(best)
    }

    fn search(&self, node: &Node, query: &[f64], best: &mut f64) {
        match node {
            Node::Leaf { start, end } => {
                for p in self.points[start * self.dim..end * self.dim].chunks_exact(self.dim) {
                    let d = sq_dist(query, p);
                    if d < *best {
                        *best = d;
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = query[*axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, query, best);
                if diff * diff <= *best {
                    self.search(far, query, best);
                }
            }
        }
    }
}
