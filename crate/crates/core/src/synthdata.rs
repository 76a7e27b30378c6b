//! Procedural objects with expert-like spray strokes.
//!
//! Four families, all in meters with the spray approach direction pointing
//! from each pose toward the surface it paints:
//!
//! * cuboids: closed boxes, one serpentine raster per face;
//! * windows: a flat rectangular frame, one pass along each bar;
//! * shelves: back panel, sides and boards, long horizontal passes over the
//!   back of each bay and over the top of each board;
//! * containers: an open box with an outer and an inner wall spiral plus a
//!   floor raster.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{load_mesh, MeshBuilder, TriMesh, Vec3};
use crate::kv::KeyValues;
use crate::trajectory::{Pose, Stroke};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Cuboids,
    Windows,
    Shelves,
    Containers,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::Cuboids,
        Category::Windows,
        Category::Shelves,
        Category::Containers,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Category::Cuboids => "cuboids",
            Category::Windows => "windows",
            Category::Shelves => "shelves",
            Category::Containers => "containers",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown category {s:?} (expected cuboids, windows, shelves or containers)")))
    }

    /// Default total pose budget when downsampling this family.
    pub fn default_budget(&self) -> usize {
        match self {
            Category::Cuboids => 2000,
            Category::Windows => 500,
            Category::Shelves => 4000,
            Category::Containers => 1000,
        }
    }
}

impl std::fmt::Display for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    /// Box edge lengths are drawn from this range.
    pub cuboid_size: (f64, f64),
    /// Poses per cuboid face stroke.
    pub cuboid_stroke_poses: usize,
    /// Stand-off distance as a fraction of the smallest object extent.
    pub standoff_fraction: f64,
    /// Cone half-angle used to size the spray footprint, radians.
    pub cone_half_angle: f64,
    /// Pass spacing in units of footprint radius.
    pub pitch_factor: f64,
    /// Target pose spacing for non-cuboid strokes.
    pub pose_spacing: f64,
    /// Mesh grid spacing.
    pub mesh_spacing: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            cuboid_size: (0.5, 1.0),
            cuboid_stroke_poses: 333,
            standoff_fraction: 0.2,
            cone_half_angle: 45f64.to_radians(),
            pitch_factor: 1.4,
            pose_spacing: 0.01,
            mesh_spacing: 0.05,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.cuboid_size;
        let ok = lo > 0.0
            && hi >= lo
            && self.cuboid_stroke_poses >= 2
            && self.standoff_fraction > 0.0
            && self.cone_half_angle > 0.0
            && self.cone_half_angle < FRAC_PI_2
            && self.pitch_factor > 0.0
            && self.pose_spacing > 0.0
            && self.mesh_spacing > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("generator config values must be positive (cone half-angle below 90 degrees)"))
        }
    }

    fn pitch(&self, standoff: f64) -> f64 {
        self.pitch_factor * standoff * self.cone_half_angle.tan()
    }
}

/// One generated object with its ground-truth strokes.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub category: Category,
    pub seed: u64,
    pub mesh: TriMesh,
    pub strokes: Vec<Stroke>,
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

fn seed_for(category: Category, seed: u64) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (category as u64 + 1)
}

pub fn generate_object(category: Category, seed: u64, cfg: &GeneratorConfig) -> Result<SampleRecord> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed_for(category, seed));
    let (mesh, strokes) = match category {
        Category::Cuboids => cuboid(&mut rng, cfg)?,
        Category::Windows => window(&mut rng, cfg)?,
        Category::Shelves => shelf(&mut rng, cfg)?,
        Category::Containers => container(&mut rng, cfg)?,
    };
    Ok(SampleRecord {
        category,
        seed,
        mesh,
        strokes,
    })
}

/// Points at equal arc-length spacing along a polyline, `count >= 2`,
/// endpoints included.
pub fn resample_polyline(points: &[Vec3], count: usize) -> Vec<Vec3> {
    let mut cum = vec![0.0];
    for w in points.windows(2) {
        cum.push(cum.last().unwrap() + (w[1] - w[0]).norm());
    }
    let total = *cum.last().unwrap();
    let mut out = Vec::with_capacity(count);
    let mut seg = 0;
    for i in 0..count {
        let target = total * i as f64 / (count - 1) as f64;
        while seg + 2 < cum.len() && cum[seg + 1] < target {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let t = if len > 0.0 { ((target - cum[seg]) / len).clamp(0.0, 1.0) } else { 0.0 };
        out.push(points[seg] + (points[seg + 1] - points[seg]) * t);
    }
    out
}

fn polyline_length(points: &[Vec3]) -> f64 {
    points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

fn spaced_count(points: &[Vec3], spacing: f64) -> usize {
    ((polyline_length(points) / spacing).ceil() as usize + 1).max(2)
}

/// Axis-aligned closed box centered at the origin.
fn box_mesh(size: Vec3, spacing: f64) -> Result<TriMesh> {
    let h = size / 2.0;
    let mut b = MeshBuilder::new();
    let (x, y, z) = (Vec3::x() * size.x, Vec3::y() * size.y, Vec3::z() * size.z);
    let lo = -h;
    b.grid_quad(lo, y, x, spacing);
    b.grid_quad(lo + z, x, y, spacing);
    b.grid_quad(lo, x, z, spacing);
    b.grid_quad(lo + y, z, x, spacing);
    b.grid_quad(lo, z, y, spacing);
    b.grid_quad(lo + x, y, z, spacing);
    b.build()
}

/// Serpentine raster over a rectangular face, poses at `standoff` along the
/// outward normal and facing back onto the face. Passes run along `u`; the
/// U-turns are semicircles that stay within the face outline.
fn face_raster(
    center: Vec3,
    normal: Vec3,
    u: Vec3,
    half_u: f64,
    v: Vec3,
    half_v: f64,
    standoff: f64,
    pitch: f64,
    poses: usize,
) -> Stroke {
    let passes = ((2.0 * half_v / pitch).ceil() as usize).max(1);
    let band = 2.0 * half_v / passes as f64;
    let r = (band / 2.0).min(half_u);
    let base = center + normal * standoff;
    let at = |su: f64, sv: f64| base + u * su + v * sv;
    let mut pts = Vec::new();
    for i in 0..passes {
        let sv = -half_v + (i as f64 + 0.5) * band;
        let dir = if i % 2 == 0 { 1.0 } else { -1.0 };
        let (a, b) = (-dir * (half_u - r), dir * (half_u - r));
        pts.push(at(a, sv));
        pts.push(at(b, sv));
        if i + 1 < passes {
            // semicircle to the next pass, bulging outward along u
            let cv = sv + band / 2.0;
            let steps = 16;
            for k in 1..steps {
                let t = PI * k as f64 / steps as f64;
                pts.push(at(b + dir * r * t.sin(), cv - r * t.cos()));
            }
        }
    }
    let facing = -normal;
    Stroke::new(
        resample_polyline(&pts, poses)
            .into_iter()
            .map(|p| Pose::new(p, facing))
            .collect(),
    )
}

fn cuboid(rng: &mut ChaCha8Rng, cfg: &GeneratorConfig) -> Result<(TriMesh, Vec<Stroke>)> {
    let size = Vec3::new(
        uniform(rng, cfg.cuboid_size),
        uniform(rng, cfg.cuboid_size),
        uniform(rng, cfg.cuboid_size),
    );
    let mesh = box_mesh(size, cfg.mesh_spacing)?;
    let standoff = cfg.standoff_fraction * size.min();
    let pitch = cfg.pitch(standoff);
    let h = size / 2.0;
    let axes = [Vec3::x(), Vec3::y(), Vec3::z()];
    let mut strokes = Vec::with_capacity(6);
    for n in 0..3 {
        // passes run along the longer in-face axis
        let (mut a, mut b) = ((n + 1) % 3, (n + 2) % 3);
        if h[a] < h[b] {
            std::mem::swap(&mut a, &mut b);
        }
        for sign in [1.0, -1.0] {
            let normal = axes[n] * sign;
            strokes.push(face_raster(
                normal * h[n],
                normal,
                axes[a],
                h[a],
                axes[b],
                h[b],
                standoff,
                pitch,
                cfg.cuboid_stroke_poses,
            ));
        }
    }
    Ok((mesh, strokes))
}

fn straight_stroke(a: Vec3, b: Vec3, facing: Vec3, spacing: f64) -> Stroke {
    let pts = [a, b];
    Stroke::new(
        resample_polyline(&pts, spaced_count(&pts, spacing))
            .into_iter()
            .map(|p| Pose::new(p, facing))
            .collect(),
    )
}

fn window(rng: &mut ChaCha8Rng, cfg: &GeneratorConfig) -> Result<(TriMesh, Vec<Stroke>)> {
    let w = uniform(rng, (0.6, 1.0));
    let h = uniform(rng, (0.8, 1.2));
    let bar = uniform(rng, (0.08, 0.14));
    let s = cfg.mesh_spacing;
    // flat frame in the z = 0 plane, centered at the origin
    let (x0, y0) = (-w / 2.0, -h / 2.0);
    let mut b = MeshBuilder::new();
    let (ex, ey) = (Vec3::x(), Vec3::y());
    b.grid_quad(Vec3::new(x0, y0, 0.0), ex * w, ey * bar, s);
    b.grid_quad(Vec3::new(x0, -y0 - bar, 0.0), ex * w, ey * bar, s);
    b.grid_quad(Vec3::new(x0, y0 + bar, 0.0), ex * bar, ey * (h - 2.0 * bar), s);
    b.grid_quad(Vec3::new(-x0 - bar, y0 + bar, 0.0), ex * bar, ey * (h - 2.0 * bar), s);
    let mesh = b.build()?;

    let standoff = cfg.standoff_fraction * w.min(h);
    let z = standoff;
    let c = bar / 2.0;
    let facing = -Vec3::z();
    let strokes = vec![
        straight_stroke(Vec3::new(x0 + c, -y0 - c, z), Vec3::new(-x0 - c, -y0 - c, z), facing, cfg.pose_spacing),
        straight_stroke(Vec3::new(-x0 - c, -y0 - c, z), Vec3::new(-x0 - c, y0 + c, z), facing, cfg.pose_spacing),
        straight_stroke(Vec3::new(-x0 - c, y0 + c, z), Vec3::new(x0 + c, y0 + c, z), facing, cfg.pose_spacing),
        straight_stroke(Vec3::new(x0 + c, y0 + c, z), Vec3::new(x0 + c, -y0 - c, z), facing, cfg.pose_spacing),
    ];
    Ok((mesh, strokes))
}

fn shelf(rng: &mut ChaCha8Rng, cfg: &GeneratorConfig) -> Result<(TriMesh, Vec<Stroke>)> {
    let w = uniform(rng, (0.8, 1.2));
    let h = uniform(rng, (0.8, 1.4));
    let d = uniform(rng, (0.3, 0.4));
    let inner_boards = rng.random_range(1..=3usize);
    let s = cfg.mesh_spacing;
    let (ex, ey, ez) = (Vec3::x(), Vec3::y(), Vec3::z());
    // back panel at y = 0, open front at y = d, boards at z = levels
    let mut levels = vec![0.0];
    for i in 1..=inner_boards {
        let nominal = h * i as f64 / (inner_boards + 1) as f64;
        let jitter = uniform(rng, (-0.05, 0.05)) * h / (inner_boards + 1) as f64;
        levels.push(nominal + jitter);
    }
    levels.push(h);
    let mut b = MeshBuilder::new();
    b.grid_quad(Vec3::zeros(), ex * w, ez * h, s);
    b.grid_quad(Vec3::zeros(), ey * d, ez * h, s);
    b.grid_quad(ex * w, ey * d, ez * h, s);
    for &z in &levels {
        b.grid_quad(ez * z, ex * w, ey * d, s);
    }
    let mesh = b.build()?;

    let standoff = cfg.standoff_fraction * w.min(h).min(d);
    let pitch = cfg.pitch(standoff);
    let clear = 1.05 * standoff;
    let facing = -ey;
    let mut strokes = Vec::new();
    for bay in levels.windows(2) {
        let (lo, hi) = (bay[0] + clear, bay[1] - clear);
        if hi < lo {
            continue;
        }
        let passes = ((hi - lo) / pitch).ceil() as usize + 1;
        for j in 0..passes {
            let z = if passes == 1 { (lo + hi) / 2.0 } else { lo + (hi - lo) * j as f64 / (passes - 1) as f64 };
            // alternate direction like a continuous raster would
            let (xa, xb) = if j % 2 == 0 { (clear, w - clear) } else { (w - clear, clear) };
            strokes.push(straight_stroke(
                Vec3::new(xa, standoff, z),
                Vec3::new(xb, standoff, z),
                facing,
                cfg.pose_spacing,
            ));
        }
    }
    // upper face of every board, passes along x at increasing depth
    let (ylo, yhi) = (clear, d - 0.5 * standoff);
    let passes = (((yhi - ylo) / pitch).ceil() as usize + 1).max(1);
    for &z in &levels {
        for j in 0..passes {
            let y = if passes == 1 { (ylo + yhi) / 2.0 } else { ylo + (yhi - ylo) * j as f64 / (passes - 1) as f64 };
            let (xa, xb) = if j % 2 == 0 { (clear, w - clear) } else { (w - clear, clear) };
            strokes.push(straight_stroke(
                Vec3::new(xa, y, z + standoff),
                Vec3::new(xb, y, z + standoff),
                -ez,
                cfg.pose_spacing,
            ));
        }
    }
    Ok((mesh, strokes))
}

/// Closed loop around an axis-aligned rectangle of half extents `hx, hy`,
/// offset by `offset` with rounded corners of radius `radius` centered
/// `corner_inset` inside each rectangle corner. Returns planar points and
/// the horizontal direction each point should face.
fn rounded_loop(hx: f64, hy: f64, corner_inset: f64, radius: f64, facing_outward: bool) -> Vec<(Vec3, Vec3)> {
    let cx = hx - corner_inset;
    let cy = hy - corner_inset;
    let centers = [(cx, -cy), (cx, cy), (-cx, cy), (-cx, -cy)];
    let mut pts = Vec::new();
    for (i, &(ccx, ccy)) in centers.iter().enumerate() {
        // quarter arc from angle -90 + 90 i to 90 i, counter-clockwise
        let start = -FRAC_PI_2 + FRAC_PI_2 * i as f64;
        let steps = 8;
        for k in 0..=steps {
            let t = start + FRAC_PI_2 * k as f64 / steps as f64;
            let radial = Vec3::new(t.cos(), t.sin(), 0.0);
            let p = Vec3::new(ccx, ccy, 0.0) + radial * radius;
            let face = if facing_outward { radial } else { -radial };
            pts.push((p, face));
        }
    }
    pts
}

/// Helical descent along a planar loop from `z_top` to `z_bottom`,
/// `turns` full loops, resampled to `spacing`.
fn spiral(loop_pts: &[(Vec3, Vec3)], z_top: f64, z_bottom: f64, turns: usize, spacing: f64) -> Stroke {
    let mut cum = vec![0.0];
    let n = loop_pts.len();
    for i in 0..n {
        let a = loop_pts[i].0;
        let b = loop_pts[(i + 1) % n].0;
        cum.push(cum.last().unwrap() + (b - a).norm());
    }
    let perimeter = *cum.last().unwrap();
    let total = perimeter * turns as f64;
    let mut pts = Vec::with_capacity(n * turns + 1);
    let mut dirs = Vec::with_capacity(n * turns + 1);
    for t in 0..turns {
        for i in 0..n {
            let s = t as f64 * perimeter + cum[i];
            let z = z_top + (z_bottom - z_top) * s / total;
            pts.push(Vec3::new(loop_pts[i].0.x, loop_pts[i].0.y, z));
            dirs.push(loop_pts[i].1);
        }
    }
    pts.push(Vec3::new(loop_pts[0].0.x, loop_pts[0].0.y, z_bottom));
    dirs.push(loop_pts[0].1);
    // facing directions follow the nearest original vertex
    let count = spaced_count(&pts, spacing);
    let positions = resample_polyline(&pts, count);
    let mut poses = Vec::with_capacity(count);
    let mut j = 0;
    for p in positions {
        while j + 1 < pts.len() && (pts[j + 1] - p).norm() <= (pts[j] - p).norm() {
            j += 1;
        }
        poses.push(Pose::facing(p, dirs[j]));
    }
    Stroke::new(poses)
}

fn container(rng: &mut ChaCha8Rng, cfg: &GeneratorConfig) -> Result<(TriMesh, Vec<Stroke>)> {
    let w = uniform(rng, (0.5, 0.8));
    let d = uniform(rng, (0.5, 0.8));
    let h = uniform(rng, (0.3, 0.5));
    let s = cfg.mesh_spacing;
    let (hx, hy) = (w / 2.0, d / 2.0);
    let (ex, ey, ez) = (Vec3::x(), Vec3::y(), Vec3::z());
    let mut b = MeshBuilder::new();
    b.grid_quad(Vec3::new(-hx, -hy, 0.0), ex * w, ey * d, s);
    b.grid_quad(Vec3::new(-hx, -hy, 0.0), ex * w, ez * h, s);
    b.grid_quad(Vec3::new(-hx, hy, 0.0), ex * w, ez * h, s);
    b.grid_quad(Vec3::new(-hx, -hy, 0.0), ey * d, ez * h, s);
    b.grid_quad(Vec3::new(hx, -hy, 0.0), ey * d, ez * h, s);
    let mesh = b.build()?;

    let standoff = cfg.standoff_fraction * w.min(d).min(h);
    let pitch = cfg.pitch(standoff);
    // outside: arcs of radius standoff around each vertical edge
    let outer = rounded_loop(hx, hy, 0.0, standoff, false);
    let outer_turns = ((h / pitch).ceil() as usize).max(1);
    // inside: corners rounded about a point two stand-offs in from both walls
    let inner = rounded_loop(hx, hy, 2.0 * standoff, standoff, true);
    let floor_clear = 1.05 * standoff;
    let inner_turns = (((h - floor_clear) / pitch).ceil() as usize).max(1);
    let (fx, fy) = (hx - floor_clear, hy - floor_clear);
    let (u, half_u, v, half_v) = if fx >= fy { (ex, fx, ey, fy) } else { (ey, fy, ex, fx) };
    let floor_poses = ((4.0 * half_u * half_v / pitch + 2.0 * half_u) / cfg.pose_spacing).ceil() as usize + 1;
    let strokes = vec![
        spiral(&outer, h, 0.0, outer_turns, cfg.pose_spacing),
        spiral(&inner, h, floor_clear, inner_turns, cfg.pose_spacing),
        face_raster(Vec3::zeros(), ez, u, half_u, v, half_v, standoff, pitch, floor_poses),
    ];
    Ok((mesh, strokes))
}

/// Deterministic disjoint 80/20 split; each side keeps the input order.
pub fn split_dataset<T: Clone>(records: &[T], seed: u64) -> Result<(Vec<T>, Vec<T>)> {
    if records.len() < 5 {
        return Err(Error::invalid(format!(
            "need at least 5 records to split, got {}",
            records.len()
        )));
    }
    let n_test = (records.len() + 2) / 5;
    let mut idx: Vec<usize> = (0..records.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut test: Vec<usize> = idx[..n_test].to_vec();
    let mut train: Vec<usize> = idx[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((
        train.into_iter().map(|i| records[i].clone()).collect(),
        test.into_iter().map(|i| records[i].clone()).collect(),
    ))
}

impl SampleRecord {
    /// Writes `mesh.txt`, `stroke_NNN.txt` and `meta.txt` into `dir`.
    pub fn save(&self, dir: &Path, scale: Option<f64>) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, text: String| {
            let p = dir.join(name);
            std::fs::write(&p, text).map_err(|e| Error::io(p, e))
        };
        write("mesh.txt", self.mesh.to_text())?;
        for (i, s) in self.strokes.iter().enumerate() {
            write(&format!("stroke_{i:03}.txt"), s.to_text())?;
        }
        let mut meta = KeyValues::new("meta");
        meta.set("category", self.category);
        meta.set("seed", self.seed);
        meta.set("strokes", self.strokes.len());
        if let Some(scale) = scale {
            meta.set("scale", scale);
        }
        write("meta.txt", meta.to_text())
    }

    /// Reads a sample directory; returns the record and its stored scale.
    pub fn load(dir: &Path) -> Result<(Self, Option<f64>)> {
        let meta = KeyValues::load(&dir.join("meta.txt"))?;
        let category = Category::parse(&meta.require::<String>("category")?)?;
        let seed = meta.require("seed")?;
        let count: usize = meta.require("strokes")?;
        let mesh = load_mesh(&dir.join("mesh.txt"))?.mesh;
        let strokes = load_strokes(dir, Some(count))?;
        Ok((
            Self {
                category,
                seed,
                mesh,
                strokes,
            },
            meta.get("scale")?,
        ))
    }
}

/// Reads `stroke_000.txt`, `stroke_001.txt`, ... from `dir`. With `count`
/// unset, reads until the first missing index.
pub fn load_strokes(dir: &Path, count: Option<usize>) -> Result<Vec<Stroke>> {
    let mut strokes = Vec::new();
    for i in 0.. {
        if count.is_some_and(|c| i >= c) {
            break;
        }
        let p = dir.join(format!("stroke_{i:03}.txt"));
        if count.is_none() && !p.exists() {
            break;
        }
        let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
        strokes.push(Stroke::parse(&text, &p.display().to_string())?);
    }
    Ok(strokes)
}

pub fn save_strokes(dir: &Path, strokes: &[Stroke]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (i, s) in strokes.iter().enumerate() {
        let p = dir.join(format!("stroke_{i:03}.txt"));
        std::fs::write(&p, s.to_text()).map_err(|e| Error::io(p, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_faces_surface(rec: &SampleRecord) {
        for (si, stroke) in rec.strokes.iter().enumerate() {
            assert!(stroke.len() >= 2);
            for (pi, p) in stroke.poses.iter().enumerate() {
                assert!(p.is_valid());
                let q = rec.mesh.closest_point(&p.position);
                let to_surface = q - p.position;
                assert!(to_surface.norm() > 1e-3, "{} stroke {si} pose {pi} touches the surface", rec.category);
                assert!(
                    to_surface.normalize().dot(&p.orientation) > 0.0,
                    "{} stroke {si} pose {pi} faces away from the surface",
                    rec.category
                );
            }
            for w in stroke.poses.windows(2) {
                assert!(w[0].position != w[1].position);
            }
        }
    }

    #[test]
    fn cuboid_has_six_strokes_of_333() {
        let rec = generate_object(Category::Cuboids, 0, &GeneratorConfig::default()).unwrap();
        assert_eq!(rec.strokes.len(), 6);
        assert!(rec.strokes.iter().all(|s| s.len() == 333));
    }

    #[test]
    fn every_family_faces_its_surface() {
        let cfg = GeneratorConfig::default();
        for c in Category::ALL {
            for seed in 0..2 {
                let rec = generate_object(c, seed, &cfg).unwrap();
                assert!(!rec.strokes.is_empty());
                check_faces_surface(&rec);
            }
        }
    }

    #[test]
    fn container_spiral_wraps_the_walls() {
        let rec = generate_object(Category::Containers, 7, &GeneratorConfig::default()).unwrap();
        let wraps = rec.strokes.iter().any(|s| {
            // accumulated winding angle about the vertical axis
            let mut total = 0.0;
            for w in s.poses.windows(2) {
                let a = w[0].position.y.atan2(w[0].position.x);
                let b = w[1].position.y.atan2(w[1].position.x);
                let mut d = b - a;
                if d > PI {
                    d -= 2.0 * PI;
                } else if d < -PI {
                    d += 2.0 * PI;
                }
                total += d;
            }
            total.abs() >= 2.0 * PI
        });
        assert!(wraps);
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = GeneratorConfig::default();
        for c in Category::ALL {
            assert_eq!(generate_object(c, 3, &cfg).unwrap(), generate_object(c, 3, &cfg).unwrap());
        }
        assert_ne!(
            generate_object(Category::Cuboids, 1, &cfg).unwrap(),
            generate_object(Category::Cuboids, 2, &cfg).unwrap()
        );
    }

    #[test]
    fn split_proportions() {
        let v: Vec<usize> = (0..100).collect();
        let (tr, te) = split_dataset(&v, 1).unwrap();
        assert_eq!((tr.len(), te.len()), (80, 20));
        let mut all: Vec<usize> = tr.iter().chain(&te).copied().collect();
        all.sort_unstable();
        assert_eq!(all, v);
        let (tr, te) = split_dataset(&v[..5], 1).unwrap();
        assert_eq!((tr.len(), te.len()), (4, 1));
        assert_eq!(split_dataset(&v, 9).unwrap(), split_dataset(&v, 9).unwrap());
        assert!(split_dataset(&v[..4], 1).is_err());
    }

    #[test]
    fn record_directory_round_trip() {
        let rec = generate_object(Category::Windows, 4, &GeneratorConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        rec.save(dir.path(), Some(0.75)).unwrap();
        let (back, scale) = SampleRecord::load(dir.path()).unwrap();
        assert_eq!(scale, Some(0.75));
        assert_eq!(back.category, rec.category);
        assert_eq!(back.strokes, rec.strokes);
        assert_eq!(back.mesh.faces, rec.mesh.faces);
    }

    #[test]
    fn resample_polyline_is_uniform() {
        let pts = [Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), Vec3::new(1.0, 2.0, 0.0)];
        let out = resample_polyline(&pts, 4);
        assert_eq!(out[0], pts[0]);
        assert_eq!(out[3], pts[2]);
        assert!((out[1] - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-12);
    }
}
