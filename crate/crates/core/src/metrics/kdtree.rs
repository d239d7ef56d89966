//! Exact nearest-neighbor index over a fixed set of 3D points.

use crate::geom::Vec3;

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    /// Index of the point in the slice the tree was built from.
    pub index: usize,
    pub point: Vec3,
    pub distance: f64,
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Static kd-tree. Queries are exact; among equidistant points the lowest
/// original index wins.
#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Vec3>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl KdTree {
    /// Builds the index. Panics on an empty slice; callers validate first.
    pub fn build(points: &[Vec3]) -> Self {
        assert!(!points.is_empty(), "kd-tree over an empty point set");
        let mut tree = Self {
            points: points.to_vec(),
            order: (0..points.len()).collect(),
            nodes: Vec::with_capacity(2 * points.len() / LEAF_SIZE + 1),
        };
        tree.build_node(0, points.len());
        tree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let (mut lo, mut hi) = (Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY));
        for &i in &self.order[start..end] {
            lo = lo.inf(&self.points[i]);
            hi = hi.sup(&self.points[i]);
        }
        let axis = (hi - lo).imax();
        if hi[axis] == lo[axis] {
            // all points coincide
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mid = start + (end - start) / 2;
        let points = &self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a][axis].total_cmp(&points[b][axis])
        });
        let value = self.points[self.order[mid]][axis];
        self.nodes.push(Node::Split {
            axis,
            value,
            left: 0,
            right: 0,
        });
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        if let Node::Split {
            left: l, right: r, ..
        } = &mut self.nodes[id]
        {
            *l = left;
            *r = right;
        }
        id
    }

    pub fn nearest(&self, query: &Vec3) -> Neighbor {
        let mut best = (f64::INFINITY, usize::MAX);
        self.search(0, query, &mut best);
        let (d2, index) = best;
        Neighbor {
            index,
            point: self.points[index],
            distance: d2.sqrt(),
        }
    }

    /// Distance from `query` to its nearest indexed point.
    pub fn nearest_distance(&self, query: &Vec3) -> f64 {
        self.nearest(query).distance
    }

    fn search(&self, node: usize, q: &Vec3, best: &mut (f64, usize)) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let d2 = (self.points[i] - q).norm_squared();
                    if d2 < best.0 || (d2 == best.0 && i < best.1) {
                        *best = (d2, i);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, best);
                // `<=` keeps equidistant candidates reachable for the index tie-break.
                if diff * diff <= best.0 {
                    self.search(far, q, best);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn linear_scan(points: &[Vec3], q: &Vec3) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for (i, p) in points.iter().enumerate() {
            let d2 = (p - q).norm_squared();
            if d2 < best.1 {
                best = (i, d2);
            }
        }
        best
    }

    fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec3> {
        (0..n)
            .map(|_| Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn matches_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts = random_points(&mut rng, 2000);
        let tree = KdTree::build(&pts);
        for q in random_points(&mut rng, 10_000) {
            let nn = tree.nearest(&q);
            let (i, d2) = linear_scan(&pts, &q);
            assert_eq!(nn.index, i);
            assert_eq!(nn.distance, d2.sqrt());
        }
    }

    #[test]
    fn exact_hit_and_ties() {
        let pts = vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(-1.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 5.0)];
        let tree = KdTree::build(&pts);
        let hit = tree.nearest(&pts[2]);
        assert_eq!((hit.index, hit.distance), (2, 0.0));
        assert_eq!(tree.nearest(&Vec3::zeros()).index, 0);

        // many duplicates spread across leaves: lowest index must win
        let mut dup = vec![Vec3::new(0.3, 0.3, 0.3); 50];
        dup.extend(random_points(&mut ChaCha8Rng::seed_from_u64(1), 100));
        dup.extend(vec![Vec3::new(0.3, 0.3, 0.3); 50]);
        let tree = KdTree::build(&dup);
        assert_eq!(tree.nearest(&Vec3::new(0.3, 0.3, 0.3)).index, 0);
    }

    #[test]
    fn coincident_points() {
        let tree = KdTree::build(&vec![Vec3::zeros(); 100]);
        assert_eq!(tree.nearest(&Vec3::x()).index, 0);
    }
}
