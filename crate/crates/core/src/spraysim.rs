//! Conic spray deposition and the two evaluation metrics: pose-wise Chamfer
//! distance and paint coverage.
//!
//! Deposition model: a pose at `x` aimed along unit `o` adds
//! `flux * cos(theta) / r^2` to every vertex `v` with `r = |v - x| <= max_range`,
//! `theta = angle(v - x, o) <= cone_half_angle`, and an unobstructed straight
//! line from `x` to `v`. The profile is symmetric about the approach axis.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::TriMesh;
use crate::objective::{weighted_pose_distance, LossWeights};
use crate::raycast::Bvh;
use crate::trajectory::{Pose, Stroke};

/// Scale applied to pose-wise Chamfer distances when reporting.
pub const PCD_REPORT_SCALE: f64 = 1e4;

/// Parameters of the conic spray gun.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SprayGunModel {
    pub cone_half_angle: f64,
    pub max_range: f64,
    pub flux: f64,
}

impl Default for SprayGunModel {
    fn default() -> Self {
        Self {
            cone_half_angle: 45f64.to_radians(),
            max_range: 0.5,
            flux: 1.0,
        }
    }
}

impl SprayGunModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.cone_half_angle > 0.0 && self.cone_half_angle < std::f64::consts::FRAC_PI_2) {
            return Err(Error::invalid("cone half angle must lie in (0, pi/2)"));
        }
        if !(self.max_range > 0.0 && self.flux > 0.0) {
            return Err(Error::invalid("max range and flux must be positive"));
        }
        Ok(())
    }
}

/// Per-vertex accumulated thickness, aligned with the mesh vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct ThicknessField(pub Vec<f64>);

impl ThicknessField {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.0.len() * 24);
        for v in &self.0 {
            let _ = writeln!(out, "{v}");
        }
        out
    }

    pub fn parse(text: &str, context: &str) -> Result<Self> {
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                l.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::parse(context, i + 1, format!("bad thickness {l:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

/// Reusable deposition context for one mesh.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    mesh: &'a TriMesh,
    bvh: Bvh,
    gun: SprayGunModel,
}

impl<'a> Simulator<'a> {
    pub fn new(mesh: &'a TriMesh, gun: SprayGunModel) -> Result<Self> {
        gun.validate()?;
        Ok(Self {
            mesh,
            bvh: Bvh::build(mesh),
            gun,
        })
    }

    /// Thickness deposited by every pose, summed in pose order per vertex.
    pub fn deposit_poses<'p>(&self, poses: impl IntoIterator<Item = &'p Pose>) -> ThicknessField {
        let poses: Vec<&Pose> = poses.into_iter().collect();
        let cos_half = self.gun.cone_half_angle.cos();
        let range2 = self.gun.max_range * self.gun.max_range;
        let values = self
            .mesh
            .vertices
            .iter()
            .map(|v| {
                let mut acc = 0.0;
                for pose in &poses {
                    let d = v - pose.position;
                    let r2 = d.norm_squared();
                    if r2 > range2 || r2 == 0.0 {
                        continue;
                    }
                    let r = r2.sqrt();
                    let cos = d.dot(&pose.orientation) / r;
                    if cos < cos_half {
                        continue;
                    }
                    let dir = d / r;
                    // stop short of the vertex so its own faces do not count
                    let reach = r - (1e-6 * r).max(1e-9);
                    if self.bvh.occluded(&pose.position, &dir, reach) {
                        continue;
                    }
                    acc += self.gun.flux * cos / r2;
                }
                acc
            })
            .collect();
        ThicknessField(values)
    }

    pub fn deposit(&self, strokes: &[Stroke]) -> ThicknessField {
        self.deposit_poses(strokes.iter().flat_map(|s| s.poses.iter()))
    }
}

/// Executes every stroke on the mesh.
pub fn deposit(mesh: &TriMesh, strokes: &[Stroke], gun: &SprayGunModel) -> Result<ThicknessField> {
    Ok(Simulator::new(mesh, *gun)?.deposit(strokes))
}

/// Linear-interpolation percentile (`q` in [0, 1]) of sorted values.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// 10th percentile of the non-zero reference thickness values.
pub fn coverage_threshold(gt: &ThicknessField) -> Result<f64> {
    let mut nz: Vec<f64> = gt.0.iter().copied().filter(|&v| v != 0.0).collect();
    if nz.is_empty() {
        return Err(Error::invalid("reference thickness is zero everywhere"));
    }
    nz.sort_by(f64::total_cmp);
    Ok(percentile_sorted(&nz, 0.1))
}

/// Outcome of a coverage comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub threshold: f64,
    pub gt_covered: usize,
    pub pred_covered_of_gt: usize,
    pub pc: f64,
}

impl CoverageReport {
    pub fn to_text(&self) -> String {
        format!(
            "threshold={}\ngt_covered={}\npred_covered_of_gt={}\npc={}\n",
            self.threshold, self.gt_covered, self.pred_covered_of_gt, self.pc
        )
    }
}

/// Share of reference-covered vertices that the prediction also covers, in
/// percent.
pub fn paint_coverage(pred: &ThicknessField, gt: &ThicknessField) -> Result<CoverageReport> {
    if pred.len() != gt.len() {
        return Err(Error::ShapeMismatch(format!(
            "thickness fields of length {} and {}",
            pred.len(),
            gt.len()
        )));
    }
    let threshold = coverage_threshold(gt)?;
    let mut gt_covered = 0;
    let mut both = 0;
    for (p, g) in pred.0.iter().zip(&gt.0) {
        if *g >= threshold {
            gt_covered += 1;
            if *p >= threshold {
                both += 1;
            }
        }
    }
    Ok(CoverageReport {
        threshold,
        gt_covered,
        pred_covered_of_gt: both,
        pc: 100.0 * both as f64 / gt_covered as f64,
    })
}

/// Symmetric Chamfer distance between two pose clouds (each direction
/// averaged), ignoring any connectivity.
pub fn pose_chamfer(pred: &[Pose], gt: &[Pose], w: &LossWeights) -> Result<f64> {
    if pred.is_empty() {
        return Err(Error::EmptySet("predicted poses"));
    }
    if gt.is_empty() {
        return Err(Error::EmptySet("reference poses"));
    }
    let one_way = |a: &[Pose], b: &[Pose]| {
        a.iter()
            .map(|p| {
                b.iter()
                    .map(|q| weighted_pose_distance(p, q, w))
                    .fold(f64::INFINITY, f64::min)
            })
            .sum::<f64>()
            / a.len() as f64
    };
    Ok(one_way(pred, gt) + one_way(gt, pred))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{MeshBuilder, Vec3};

    fn plane(size: f64, spacing: f64) -> TriMesh {
        let mut b = MeshBuilder::new();
        b.grid_quad(Vec3::new(-size, -size, 0.0), Vec3::x() * 2.0 * size, Vec3::y() * 2.0 * size, spacing);
        b.build().unwrap()
    }

    fn gun(deg: f64) -> SprayGunModel {
        SprayGunModel {
            cone_half_angle: deg.to_radians(),
            max_range: 10.0,
            flux: 1.0,
        }
    }

    #[test]
    fn empty_strokes_deposit_nothing() {
        let m = plane(1.0, 0.25);
        let f = deposit(&m, &[], &gun(30.0)).unwrap();
        assert!(f.0.iter().all(|&v| v == 0.0));
        assert_eq!(f.len(), m.vertices.len());
    }

    #[test]
    fn cone_footprint_on_plane() {
        let m = plane(1.0, 0.05);
        let pose = Pose::new(Vec3::new(0.0, 0.0, 1.0), -Vec3::z());
        let f = deposit(&m, &[Stroke::new(vec![pose])], &gun(30.0)).unwrap();
        let radius = 30f64.to_radians().tan();
        for (v, t) in m.vertices.iter().zip(&f.0) {
            let rho = v.xy().norm();
            if rho < radius - 1e-9 {
                assert!(*t > 0.0, "inside vertex {v:?} unpainted");
            } else if rho > radius + 1e-9 {
                assert_eq!(*t, 0.0, "outside vertex {v:?} painted");
            }
        }
    }

    #[test]
    fn invalid_gun_rejected() {
        let m = plane(1.0, 0.5);
        let mut g = gun(30.0);
        g.cone_half_angle = 2.0;
        assert!(deposit(&m, &[], &g).is_err());
    }

    #[test]
    fn percentile_examples() {
        let f = ThicknessField((1..=10).map(f64::from).collect());
        assert!((coverage_threshold(&f).unwrap() - 1.9).abs() < 1e-12);
        assert_eq!(coverage_threshold(&ThicknessField(vec![2.5; 7])).unwrap(), 2.5);
        assert_eq!(coverage_threshold(&ThicknessField(vec![0.0, 0.0, 5.0])).unwrap(), 5.0);
        assert!(coverage_threshold(&ThicknessField(vec![0.0; 3])).is_err());
    }

    #[test]
    fn coverage_examples() {
        let gt = ThicknessField(vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]);
        assert_eq!(paint_coverage(&gt, &gt).unwrap().pc, 100.0);
        assert_eq!(paint_coverage(&ThicknessField::zeros(11), &gt).unwrap().pc, 0.0);
        // threshold 1.9: covered gt vertices are 2..=10 (9 of them)
        let r = paint_coverage(&gt, &gt).unwrap();
        assert_eq!(r.gt_covered, 9);

        // uniform reference: threshold 10, four covered vertices, prediction hits two
        let gt = ThicknessField(vec![0.0, 10.0, 10.0, 10.0, 10.0]);
        let pred = ThicknessField(vec![0.0, 10.0, 0.0, 10.0, 1.0]);
        let r = paint_coverage(&pred, &gt).unwrap();
        assert_eq!(r.gt_covered, 4);
        assert_eq!(r.pred_covered_of_gt, 2);
        assert_eq!(r.pc, 50.0);
        assert!(paint_coverage(&ThicknessField::zeros(3), &gt).is_err());
    }

    #[test]
    fn pose_chamfer_examples() {
        let w = LossWeights::default();
        let a = Pose::new(Vec3::zeros(), Vec3::z());
        let b = Pose::new(Vec3::x(), Vec3::z());
        let c = Pose::new(Vec3::y(), -Vec3::z());
        assert_eq!(pose_chamfer(&[a, b, c], &[a, b, c], &w).unwrap(), 0.0);
        assert_eq!(pose_chamfer(&[a], &[b], &w).unwrap(), 2.0);
        let x = pose_chamfer(&[a, c], &[b], &w).unwrap();
        assert_eq!(pose_chamfer(&[c, a], &[b], &w).unwrap(), x);
        assert!(pose_chamfer(&[], &[b], &w).is_err());
    }

    #[test]
    fn thickness_text_round_trip() {
        let f = ThicknessField(vec![0.0, 1.5e-7, 3.25]);
        assert_eq!(ThicknessField::parse(&f.to_text(), "t").unwrap(), f);
    }
}
