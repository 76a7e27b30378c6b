//! Segment-vs-mesh occlusion queries backed by a bounding volume hierarchy.

use crate::geometry::{TriMesh, Vec3};

#[derive(Debug, Clone, Copy)]
struct Aabb {
    lo: Vec3,
    hi: Vec3,
}

impl Aabb {
    fn empty() -> Self {
        Self {
            lo: Vec3::repeat(f64::INFINITY),
            hi: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: &Vec3) {
        self.lo = self.lo.inf(p);
        self.hi = self.hi.sup(p);
    }

    /// Slab test against the ray restricted to `[0, t_max]`.
    fn hit(&self, origin: &Vec3, inv_dir: &Vec3, t_max: f64) -> bool {
        let mut t0: f64 = 0.0;
        let mut t1 = t_max;
        for a in 0..3 {
            let mut near = (self.lo[a] - origin[a]) * inv_dir[a];
            let mut far = (self.hi[a] - origin[a]) * inv_dir[a];
            if near > far {
                std::mem::swap(&mut near, &mut far);
            }
            // NaN from 0 * inf means the ray lies in the slab plane; keep it
            if near.is_nan() || far.is_nan() {
                if origin[a] < self.lo[a] || origin[a] > self.hi[a] {
                    return false;
                }
                continue;
            }
            t0 = t0.max(near);
            t1 = t1.min(far);
            if t0 > t1 {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { bounds: Aabb, start: usize, end: usize },
    Inner { bounds: Aabb, left: usize, right: usize },
}

const LEAF_SIZE: usize = 4;

/// BVH over mesh triangles. Query results equal an exhaustive scan.
#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<usize>,
    tris: Vec<[Vec3; 3]>,
}

impl Bvh {
    pub fn build(mesh: &TriMesh) -> Self {
        let tris: Vec<[Vec3; 3]> = (0..mesh.faces.len()).map(|f| mesh.triangle(f)).collect();
        let centroids: Vec<Vec3> = tris.iter().map(|t| (t[0] + t[1] + t[2]) / 3.0).collect();
        let mut order: Vec<usize> = (0..tris.len()).collect();
        let mut nodes = Vec::new();
        Self::split(&tris, &centroids, &mut order, 0, tris.len(), &mut nodes);
        Self { nodes, order, tris }
    }

    fn split(
        tris: &[[Vec3; 3]],
        centroids: &[Vec3],
        order: &mut [usize],
        start: usize,
        end: usize,
        nodes: &mut Vec<Node>,
    ) -> usize {
        let mut bounds = Aabb::empty();
        let mut cbounds = Aabb::empty();
        for &t in &order[start..end] {
            for v in &tris[t] {
                bounds.grow(v);
            }
            cbounds.grow(&centroids[t]);
        }
        // pad so that box rejection never disagrees with the exact triangle test
        let pad = Vec3::repeat(1e-9);
        bounds.lo -= pad;
        bounds.hi += pad;
        let id = nodes.len();
        if end - start <= LEAF_SIZE {
            nodes.push(Node::Leaf { bounds, start, end });
            return id;
        }
        let extent = cbounds.hi - cbounds.lo;
        let axis = extent.imax();
        let mid = (start + end) / 2;
        order[start..end].sort_by(|&a, &b| {
            centroids[a][axis]
                .partial_cmp(&centroids[b][axis])
                .unwrap()
                .then(a.cmp(&b))
        });
        nodes.push(Node::Leaf { bounds, start, end });
        let left = Self::split(tris, centroids, order, start, mid, nodes);
        let right = Self::split(tris, centroids, order, mid, end, nodes);
        nodes[id] = Node::Inner { bounds, left, right };
        id
    }

    /// True if any triangle is crossed by the open segment from `origin`
    /// along unit `dir` at a parameter strictly below `t_max`.
    pub fn occluded(&self, origin: &Vec3, dir: &Vec3, t_max: f64) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            match &self.nodes[n] {
                Node::Leaf { bounds, start, end } => {
                    if !bounds.hit(origin, &inv, t_max) {
                        continue;
                    }
                    for &t in &self.order[*start..*end] {
                        if let Some(hit) = intersect_triangle(origin, dir, &self.tris[t]) {
                            if hit > 1e-9 && hit < t_max {
                                return true;
                            }
                        }
                    }
                }
                Node::Inner { bounds, left, right } => {
                    if bounds.hit(origin, &inv, t_max) {
                        stack.push(*right);
                        stack.push(*left);
                    }
                }
            }
        }
        false
    }
}

/// Möller–Trumbore ray/triangle intersection; returns the ray parameter.
pub fn intersect_triangle(origin: &Vec3, dir: &Vec3, tri: &[Vec3; 3]) -> Option<f64> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-14 * e1.norm() * e2.norm() {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - tri[0];
    let u = s.dot(&p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    Some(e2.dot(&q) * inv)
}

/// Exhaustive counterpart of [`Bvh::occluded`].
pub fn occluded_brute_force(mesh: &TriMesh, origin: &Vec3, dir: &Vec3, t_max: f64) -> bool {
    (0..mesh.faces.len()).any(|f| {
        intersect_triangle(origin, dir, &mesh.triangle(f)).is_some_and(|t| t > 1e-9 && t < t_max)
    })
}
