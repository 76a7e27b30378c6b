//! Triangle meshes, surface point clouds and the normalization applied to
//! inputs and trajectories before learning.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::trajectory::Stroke;

pub type Vec3 = nalgebra::Vector3<f64>;

/// Indexed triangle mesh in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
}

/// Result of validating raw mesh data.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshLoad {
    pub mesh: TriMesh,
    /// Number of zero-area faces that were dropped.
    pub dropped_degenerate: usize,
}

fn is_degenerate(a: &Vec3, b: &Vec3, c: &Vec3) -> bool {
    let e0 = b - a;
    let e1 = c - a;
    let scale = e0.norm_squared().max(e1.norm_squared()).max((c - b).norm_squared());
    let cross = e0.cross(&e1).norm();
    scale == 0.0 || cross <= 1e-12 * scale
}

impl TriMesh {
    /// Validates indices and drops zero-area faces.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<MeshLoad> {
        if vertices.len() < 3 {
            return Err(Error::EmptyMesh(format!(
                "{} vertices, need at least 3",
                vertices.len()
            )));
        }
        if vertices.iter().any(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(Error::invalid("non-finite vertex coordinate"));
        }
        let n = vertices.len();
        let mut kept = Vec::with_capacity(faces.len());
        let mut dropped = 0;
        for (i, f) in faces.into_iter().enumerate() {
            if f.iter().any(|&k| k >= n) {
                return Err(Error::invalid(format!("face {i} references a missing vertex")));
            }
            if is_degenerate(&vertices[f[0]], &vertices[f[1]], &vertices[f[2]]) {
                dropped += 1;
            } else {
                kept.push(f);
            }
        }
        if kept.is_empty() {
            return Err(Error::EmptyMesh("no non-degenerate faces".into()));
        }
        if dropped > 0 {
            log::warn!("dropped {dropped} degenerate faces");
        }
        Ok(MeshLoad {
            mesh: TriMesh {
                vertices,
                faces: kept,
            },
            dropped_degenerate: dropped,
        })
    }

    pub fn triangle(&self, face: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[face];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn face_area(&self, face: usize) -> f64 {
        let [a, b, c] = self.triangle(face);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Axis-aligned bounds as (min, max).
    pub fn bounds(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    /// Closest point on the surface to `p`, by exhaustive search.
    pub fn closest_point(&self, p: &Vec3) -> Vec3 {
        let mut best = self.vertices[self.faces[0][0]];
        let mut best_d = f64::INFINITY;
        for f in 0..self.faces.len() {
            let [a, b, c] = self.triangle(f);
            let q = closest_point_on_triangle(p, &a, &b, &c);
            let d = (q - p).norm_squared();
            if d < best_d {
                best_d = d;
                best = q;
            }
        }
        best
    }

    /// Serializes in the `v x y z` / `f i j k` text format (1-based indices).
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(32 * (self.vertices.len() + self.faces.len()));
        for v in &self.vertices {
            let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
        }
        for f in &self.faces {
            let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
        }
        out
    }

    /// Same as [`TriMesh::to_text`] with one scalar appended to each vertex line.
    pub fn to_text_with_scalars(&self, scalars: &[f64]) -> Result<String> {
        if scalars.len() != self.vertices.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} scalars for {} vertices",
                scalars.len(),
                self.vertices.len()
            )));
        }
        let mut out = String::new();
        for (v, s) in self.vertices.iter().zip(scalars) {
            let _ = writeln!(out, "v {} {} {} {}", v.x, v.y, v.z, s);
        }
        for f in &self.faces {
            let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
        }
        Ok(out)
    }
}

/// Parses the ASCII mesh format. Blank lines and `#` comments are skipped;
/// other record types are ignored.
pub fn parse_mesh(text: &str, context: &str) -> Result<MeshLoad> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("v") => {
                let mut c = [0.0; 3];
                for slot in &mut c {
                    let t = tok
                        .next()
                        .ok_or_else(|| Error::parse(context, lineno + 1, "vertex needs 3 coordinates"))?;
                    *slot = t
                        .parse()
                        .map_err(|_| Error::parse(context, lineno + 1, format!("bad number {t:?}")))?;
                }
                vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let mut idx = [0usize; 3];
                for slot in &mut idx {
                    let t = tok
                        .next()
                        .ok_or_else(|| Error::parse(context, lineno + 1, "face needs 3 indices"))?;
                    // tolerate `i/t/n` style references
                    let head = t.split('/').next().unwrap_or(t);
                    let i: usize = head
                        .parse()
                        .map_err(|_| Error::parse(context, lineno + 1, format!("bad index {t:?}")))?;
                    if i == 0 {
                        return Err(Error::parse(context, lineno + 1, "indices are 1-based"));
                    }
                    *slot = i - 1;
                }
                if tok.next().is_some() {
                    return Err(Error::parse(context, lineno + 1, "only triangles are supported"));
                }
                faces.push(idx);
            }
            _ => {}
        }
    }
    if vertices.is_empty() || faces.is_empty() {
        return Err(Error::EmptyMesh(context.to_string()));
    }
    TriMesh::new(vertices, faces)
}

pub fn load_mesh(path: &Path) -> Result<MeshLoad> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mesh(&text, &path.display().to_string())
}

/// Incremental mesh construction with vertex welding on a fine lattice.
#[derive(Debug, Default)]
pub struct MeshBuilder {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    index: HashMap<[i64; 3], usize>,
}

impl MeshBuilder {
    const WELD: f64 = 1e-9;

    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(&mut self, p: Vec3) -> usize {
        let key = [
            (p.x / Self::WELD).round() as i64,
            (p.y / Self::WELD).round() as i64,
            (p.z / Self::WELD).round() as i64,
        ];
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        self.vertices.push(p);
        self.index.insert(key, self.vertices.len() - 1);
        self.vertices.len() - 1
    }

    /// Adds a planar quad `origin + s*u + t*v`, s,t in [0,1], split into a
    /// grid with roughly `spacing` between vertices.
    pub fn grid_quad(&mut self, origin: Vec3, u: Vec3, v: Vec3, spacing: f64) {
        let nu = ((u.norm() / spacing).ceil() as usize).max(1);
        let nv = ((v.norm() / spacing).ceil() as usize).max(1);
        let mut ids = Vec::with_capacity((nu + 1) * (nv + 1));
        for j in 0..=nv {
            for i in 0..=nu {
                let p = origin + u * (i as f64 / nu as f64) + v * (j as f64 / nv as f64);
                ids.push(self.vertex(p));
            }
        }
        let at = |i: usize, j: usize| ids[j * (nu + 1) + i];
        for j in 0..nv {
            for i in 0..nu {
                let (a, b, c, d) = (at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
                self.faces.push([a, b, c]);
                self.faces.push([a, c, d]);
            }
        }
    }

    pub fn build(self) -> Result<TriMesh> {
        Ok(TriMesh::new(self.vertices, self.faces)?.mesh)
    }
}

/// Finite, non-empty set of surface points.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySet("point cloud"));
        }
        if points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::invalid("non-finite point"));
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> Vec3 {
        let sum = self.points.iter().fold(Vec3::zeros(), |acc, p| acc + p);
        sum / self.points.len() as f64
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            let _ = writeln!(out, "{} {} {}", p.x, p.y, p.z);
        }
        out
    }

    /// Reads one `x y z` line per point.
    pub fn parse(text: &str, context: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::parse(context, i + 1, format!("bad number {t:?}"))))
                .collect::<Result<_>>()?;
            if v.len() != 3 {
                return Err(Error::parse(context, i + 1, format!("expected 3 values, found {}", v.len())));
            }
            points.push(Vec3::new(v[0], v[1], v[2]));
        }
        Self::new(points)
    }
}

/// Surface sampling knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingConfig {
    /// Minimum spacing enforced by dart-throwing thinning. `None` derives it
    /// from the surface area and the requested count; `Some(0.0)` disables
    /// thinning.
    pub radius: Option<f64>,
    /// Uniform candidates drawn per requested point.
    pub oversample: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            radius: None,
            oversample: 4,
        }
    }
}

/// Draws exactly `n` approximately evenly spaced points from the surface.
pub fn sample_point_cloud(mesh: &TriMesh, n: usize, seed: u64) -> Result<PointCloud> {
    sample_point_cloud_with(mesh, n, seed, &SamplingConfig::default())
}

pub fn sample_point_cloud_with(
    mesh: &TriMesh,
    n: usize,
    seed: u64,
    cfg: &SamplingConfig,
) -> Result<PointCloud> {
    if n == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    let mut cumulative = Vec::with_capacity(mesh.faces.len());
    let mut total = 0.0;
    for f in 0..mesh.faces.len() {
        total += mesh.face_area(f);
        cumulative.push(total);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let candidates: Vec<Vec3> = (0..n * cfg.oversample.max(1))
        .map(|_| {
            let target = rng.random::<f64>() * total;
            let face = cumulative.partition_point(|&c| c <= target).min(mesh.faces.len() - 1);
            let [a, b, c] = mesh.triangle(face);
            let r1: f64 = rng.random::<f64>().sqrt();
            let r2: f64 = rng.random();
            a * (1.0 - r1) + b * (r1 * (1.0 - r2)) + c * (r1 * r2)
        })
        .collect();

    let radius = cfg
        .radius
        .unwrap_or_else(|| 0.5 * (total / n as f64).sqrt());
    if radius <= 0.0 {
        return PointCloud::new(candidates.into_iter().take(n).collect());
    }

    let cell = |p: &Vec3| {
        [
            (p.x / radius).floor() as i64,
            (p.y / radius).floor() as i64,
            (p.z / radius).floor() as i64,
        ]
    };
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    let mut accepted = Vec::with_capacity(n);
    let mut rejected = Vec::new();
    let r2 = radius * radius;
    for (i, p) in candidates.iter().enumerate() {
        if accepted.len() == n {
            break;
        }
        let c = cell(p);
        let mut close = false;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(bucket) = grid.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                        if bucket.iter().any(|&j| (candidates[j] - p).norm_squared() < r2) {
                            close = true;
                            break 'search;
                        }
                    }
                }
            }
        }
        if close {
            rejected.push(i);
        } else {
            grid.entry(c).or_default().push(i);
            accepted.push(i);
        }
    }
    // Top up from rejected candidates when the radius was too ambitious.
    let missing = n - accepted.len();
    accepted.extend(rejected.into_iter().take(missing));
    PointCloud::new(accepted.into_iter().map(|i| candidates[i]).collect())
}

/// Centering plus uniform down-scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationTransform {
    pub centroid: Vec3,
    pub scale: f64,
}

impl NormalizationTransform {
    pub fn identity() -> Self {
        Self {
            centroid: Vec3::zeros(),
            scale: 1.0,
        }
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        (p - self.centroid) / self.scale
    }

    pub fn invert(&self, p: &Vec3) -> Vec3 {
        p * self.scale + self.centroid
    }

    pub fn apply_strokes(&self, strokes: &[Stroke]) -> Vec<Stroke> {
        strokes.iter().map(|s| s.map_positions(|p| self.apply(p))).collect()
    }

    pub fn invert_strokes(&self, strokes: &[Stroke]) -> Vec<Stroke> {
        strokes.iter().map(|s| s.map_positions(|p| self.invert(p))).collect()
    }

    /// `centroid = x,y,z` and `scale = s` lines.
    pub fn to_text(&self) -> String {
        let c = self.centroid;
        format!("centroid = {},{},{}\nscale = {}\n", c.x, c.y, c.z, self.scale)
    }

    pub fn parse(text: &str, context: &str) -> Result<Self> {
        let kv = crate::kv::KeyValues::parse(text, context)?;
        let c: Vec<f64> = kv
            .get_list("centroid")?
            .ok_or_else(|| Error::parse(context, 0, "missing key \"centroid\""))?;
        if c.len() != 3 {
            return Err(Error::parse(context, 0, format!("centroid needs 3 values, got {}", c.len())));
        }
        let scale: f64 = kv.require("scale")?;
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::parse(context, 0, format!("scale must be positive, got {scale}")));
        }
        Ok(Self {
            centroid: Vec3::new(c[0], c[1], c[2]),
            scale,
        })
    }
}

/// Centers the cloud on its mean and divides by `scale`; strokes follow the
/// same affine map, orientations are untouched.
pub fn normalize(
    cloud: &PointCloud,
    strokes: &[Stroke],
    scale: f64,
) -> Result<(PointCloud, Vec<Stroke>, NormalizationTransform)> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::invalid(format!("normalization scale must be positive, got {scale}")));
    }
    let t = NormalizationTransform {
        centroid: cloud.centroid(),
        scale,
    };
    let points = cloud.points.iter().map(|p| t.apply(p)).collect();
    Ok((PointCloud { points }, t.apply_strokes(strokes), t))
}

/// Closest point on triangle `abc` to `p` (Ericson, Real-Time Collision Detection).
pub fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

#[cfg(test)]
mod tests {
    use super::*;

    const CUBE: &str = "\
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
f 1 3 2
f 1 4 3
f 5 6 7
f 5 7 8
f 1 2 6
f 1 6 5
f 2 3 7
f 2 7 6
f 3 4 8
f 3 8 7
f 4 1 5
f 4 5 8
";

    fn cube() -> TriMesh {
        parse_mesh(CUBE, "cube").unwrap().mesh
    }

    /// Distance from `p` to the plane of the triangle, plus the barycentric
    /// excursion outside [0,1].
    fn barycentric_residual(p: &Vec3, tri: &[Vec3; 3]) -> f64 {
        let [a, b, c] = tri;
        let n = (b - a).cross(&(c - a));
        let area2 = n.norm_squared();
        let plane = (p - a).dot(&n).abs() / area2.sqrt();
        let u = (c - b).cross(&(p - b)).dot(&n) / area2;
        let v = (a - c).cross(&(p - c)).dot(&n) / area2;
        let w = 1.0 - u - v;
        let out = [u, v, w].iter().map(|x| (-x).max(x - 1.0).max(0.0)).sum::<f64>();
        plane + out
    }

    #[test]
    fn loads_unit_cube() {
        let load = parse_mesh(CUBE, "cube").unwrap();
        assert_eq!(load.mesh.vertices.len(), 8);
        assert_eq!(load.mesh.faces.len(), 12);
        assert_eq!(load.dropped_degenerate, 0);
        assert!((load.mesh.surface_area() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn drops_zero_area_face() {
        // 12 faces, the last one collapsed onto an edge
        let text = CUBE.replace("f 4 5 8\n", "f 1 2 1\n");
        let load = parse_mesh(&text, "cube").unwrap();
        assert_eq!(load.mesh.faces.len(), 11);
        assert_eq!(load.dropped_degenerate, 1);
    }

    #[test]
    fn truncated_file_is_a_parse_error() {
        let truncated = &CUBE[..CUBE.find("f 5 7 8").unwrap() + 5];
        assert!(matches!(parse_mesh(truncated, "t"), Err(Error::Parse { .. })));
        assert!(matches!(parse_mesh("", "t"), Err(Error::EmptyMesh(_))));
        assert!(matches!(parse_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n", "t"), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn text_round_trip() {
        let m = cube();
        let back = parse_mesh(&m.to_text(), "rt").unwrap().mesh;
        assert_eq!(m, back);
    }

    #[test]
    fn samples_lie_on_surface() {
        let m = cube();
        let cloud = sample_point_cloud(&m, 5120, 3).unwrap();
        assert_eq!(cloud.len(), 5120);
        for p in &cloud.points {
            let best = (0..m.faces.len())
                .map(|f| barycentric_residual(p, &m.triangle(f)))
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-9, "residual {best}");
        }
    }

    #[test]
    fn single_triangle_single_point() {
        let load = parse_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n", "tri").unwrap();
        let cloud = sample_point_cloud(&load.mesh, 1, 0).unwrap();
        assert_eq!(cloud.len(), 1);
        assert!(barycentric_residual(&cloud.points[0], &load.mesh.triangle(0)) < 1e-12);
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = cube();
        assert_eq!(sample_point_cloud(&m, 300, 9).unwrap(), sample_point_cloud(&m, 300, 9).unwrap());
        assert_ne!(sample_point_cloud(&m, 300, 9).unwrap(), sample_point_cloud(&m, 300, 10).unwrap());
        assert!(sample_point_cloud(&m, 0, 9).is_err());
    }

    #[test]
    fn face_share_tracks_area_share() {
        let m = cube();
        let n = 10_000;
        let cloud = sample_point_cloud(&m, n, 1).unwrap();
        // cube faces are the 6 axis planes; each holds 1/6 of the area
        let mut counts = [0usize; 6];
        for p in &cloud.points {
            let axis = (0..3)
                .min_by(|&a, &b| {
                    let da = p[a].min(1.0 - p[a]);
                    let db = p[b].min(1.0 - p[b]);
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap();
            let side = usize::from(p[axis] > 0.5);
            counts[axis * 2 + side] += 1;
        }
        let expected = n as f64 / 6.0;
        for c in counts {
            assert!(((c as f64 - expected) / expected).abs() < 0.2, "{counts:?}");
        }
    }

    #[test]
    fn thinning_spreads_points() {
        let m = cube();
        let thin = sample_point_cloud(&m, 200, 4).unwrap();
        let raw = sample_point_cloud_with(&m, 200, 4, &SamplingConfig { radius: Some(0.0), oversample: 1 }).unwrap();
        let min_gap = |c: &PointCloud| {
            let mut best = f64::INFINITY;
            for i in 0..c.len() {
                for j in 0..i {
                    best = best.min((c.points[i] - c.points[j]).norm());
                }
            }
            best
        };
        assert!(min_gap(&thin) > 2.0 * min_gap(&raw));
    }

    #[test]
    fn normalize_centers_and_scales() {
        let cloud = PointCloud::new(vec![
            Vec3::new(0.0, 2.0, 3.0),
            Vec3::new(2.0, 2.0, 3.0),
            Vec3::new(1.0, 1.0, 2.0),
            Vec3::new(1.0, 3.0, 4.0),
        ])
        .unwrap();
        let (n1, _, t) = normalize(&cloud, &[], 1.0).unwrap();
        assert!((t.centroid - Vec3::new(1.0, 2.0, 3.0)).norm() < 1e-15);
        assert!(n1.centroid().norm() < 1e-9);
        let (n2, _, _) = normalize(&cloud, &[], 2.0).unwrap();
        for (a, b) in n1.points.iter().zip(&n2.points) {
            assert!((a / 2.0 - b).norm() < 1e-15);
        }
        assert!(normalize(&cloud, &[], 0.0).is_err());
    }

    #[test]
    fn closest_point_regions() {
        let a = Vec3::new(0.0, 0.0, 0.0);
        let b = Vec3::new(1.0, 0.0, 0.0);
        let c = Vec3::new(0.0, 1.0, 0.0);
        let q = closest_point_on_triangle(&Vec3::new(0.2, 0.2, 5.0), &a, &b, &c);
        assert!((q - Vec3::new(0.2, 0.2, 0.0)).norm() < 1e-12);
        let q = closest_point_on_triangle(&Vec3::new(-1.0, -1.0, 0.0), &a, &b, &c);
        assert_eq!(q, a);
        let q = closest_point_on_triangle(&Vec3::new(1.0, 1.0, 0.0), &a, &b, &c);
        assert!((q - Vec3::new(0.5, 0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn builder_welds_shared_edges() {
        let mut b = MeshBuilder::new();
        b.grid_quad(Vec3::zeros(), Vec3::x(), Vec3::y(), 0.5);
        b.grid_quad(Vec3::zeros(), Vec3::y(), Vec3::z(), 0.5);
        let m = b.build().unwrap();
        // 9 + 9 - 3 shared along the y axis
        assert_eq!(m.vertices.len(), 15);
        assert_eq!(m.faces.len(), 16);
    }

    #[test]
    fn transform_text_round_trip() {
        let t = NormalizationTransform {
            centroid: Vec3::new(0.1, -2.5, 1.0 / 3.0),
            scale: 0.7,
        };
        assert_eq!(NormalizationTransform::parse(&t.to_text(), "t").unwrap(), t);
        assert!(NormalizationTransform::parse("centroid = 1,2\nscale = 1\n", "t").is_err());
        assert!(NormalizationTransform::parse("centroid = 1,2,3\nscale = 0\n", "t").is_err());
    }
}
