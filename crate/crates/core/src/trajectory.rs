//! Poses, strokes and fixed-length segments, plus the two preprocessing
//! steps applied to expert trajectories: pose-budget downsampling and
//! sliding-window segment decomposition.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Spray-gun position plus unit approach direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vec3,
    pub orientation: Vec3,
}

impl Pose {
    pub fn new(position: Vec3, orientation: Vec3) -> Self {
        Self {
            position,
            orientation,
        }
    }

    /// Builds a pose with the orientation L2-normalized.
    pub fn facing(position: Vec3, direction: Vec3) -> Self {
        Self {
            position,
            orientation: direction.normalize(),
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        let p = &self.position;
        let o = &self.orientation;
        [p.x, p.y, p.z, o.x, o.y, o.z]
    }

    pub fn from_slice(v: &[f64]) -> Self {
        Self {
            position: Vec3::new(v[0], v[1], v[2]),
            orientation: Vec3::new(v[3], v[4], v[5]),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.to_array().iter().all(|c| c.is_finite())
            && (self.orientation.norm() - 1.0).abs() <= 1e-6
    }
}

/// Continuous spray path.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Stroke {
    pub poses: Vec<Pose>,
}

impl Stroke {
    pub fn new(poses: Vec<Pose>) -> Self {
        Self { poses }
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn map_positions(&self, f: impl Fn(&Vec3) -> Vec3) -> Stroke {
        Stroke {
            poses: self
                .poses
                .iter()
                .map(|p| Pose::new(f(&p.position), p.orientation))
                .collect(),
        }
    }

    /// One `px py pz ox oy oz` line per pose.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.poses.len() * 96);
        for p in &self.poses {
            let a = p.to_array();
            let _ = writeln!(out, "{} {} {} {} {} {}", a[0], a[1], a[2], a[3], a[4], a[5]);
        }
        out
    }

    pub fn parse(text: &str, context: &str) -> Result<Stroke> {
        let mut poses = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| {
                    t.parse()
                        .map_err(|_| Error::parse(context, lineno + 1, format!("bad number {t:?}")))
                })
                .collect::<Result<_>>()?;
            if vals.len() != 6 {
                return Err(Error::parse(
                    context,
                    lineno + 1,
                    format!("expected 6 values, found {}", vals.len()),
                ));
            }
            poses.push(Pose::from_slice(&vals));
        }
        Ok(Stroke { poses })
    }
}

/// Total pose count across strokes.
pub fn pose_count(strokes: &[Stroke]) -> usize {
    strokes.iter().map(Stroke::len).sum()
}

/// Fixed-length pose sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub poses: Vec<Pose>,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn first(&self) -> &Pose {
        &self.poses[0]
    }

    pub fn last(&self) -> &Pose {
        &self.poses[self.poses.len() - 1]
    }
}

/// Unordered collection of equal-length segments.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSet {
    pub segments: Vec<Segment>,
    pub lambda: usize,
    pub overlap: usize,
}

impl SegmentSet {
    pub fn new(segments: Vec<Segment>, lambda: usize, overlap: usize) -> Result<Self> {
        if lambda == 0 {
            return Err(Error::invalid("segment length must be positive"));
        }
        if let Some(bad) = segments.iter().position(|s| s.len() != lambda) {
            return Err(Error::ShapeMismatch(format!(
                "segment {bad} has {} poses, expected {lambda}",
                segments[bad].len()
            )));
        }
        Ok(Self {
            segments,
            lambda,
            overlap,
        })
    }

    /// Reinterprets a flat `[slot][pose][6]` buffer as segments.
    pub fn from_flat(values: &[f64], lambda: usize, overlap: usize) -> Result<Self> {
        if lambda == 0 || !values.len().is_multiple_of(lambda * 6) {
            return Err(Error::ShapeMismatch(format!(
                "{} values do not split into segments of {lambda} poses",
                values.len()
            )));
        }
        let segments = values
            .chunks_exact(lambda * 6)
            .map(|chunk| Segment {
                poses: chunk.chunks_exact(6).map(Pose::from_slice).collect(),
            })
            .collect();
        Ok(Self {
            segments,
            lambda,
            overlap,
        })
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.segments
            .iter()
            .flat_map(|s| s.poses.iter().flat_map(|p| p.to_array()))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn poses(&self) -> impl Iterator<Item = &Pose> {
        self.segments.iter().flat_map(|s| s.poses.iter())
    }

    /// Each segment as a standalone stroke.
    pub fn to_strokes(&self) -> Vec<Stroke> {
        self.segments
            .iter()
            .map(|s| Stroke::new(s.poses.clone()))
            .collect()
    }
}

/// Index positions of a uniform-stride subsample of `n` items down to `m`,
/// keeping both endpoints.
fn stride_indices(n: usize, m: usize) -> Vec<usize> {
    if m == 1 {
        return vec![0];
    }
    (0..m)
        .map(|i| ((i * (n - 1)) as f64 / (m - 1) as f64).round() as usize)
        .collect()
}

/// Resamples a stroke to exactly `m` poses by uniform index stride.
pub fn resample_stroke(stroke: &Stroke, m: usize) -> Result<Stroke> {
    if m < 2 || m > stroke.len() {
        return Err(Error::invalid(format!(
            "cannot resample {} poses to {m}",
            stroke.len()
        )));
    }
    Ok(Stroke::new(
        stride_indices(stroke.len(), m)
            .into_iter()
            .map(|i| stroke.poses[i])
            .collect(),
    ))
}

/// Reduces the total pose count to `budget`, allotting poses to strokes in
/// proportion to their length (largest-remainder rounding, so the total is
/// exact). Strokes already within budget are returned unchanged.
pub fn downsample_strokes(strokes: &[Stroke], budget: usize) -> Result<Vec<Stroke>> {
    if strokes.is_empty() {
        return Ok(Vec::new());
    }
    if budget < 2 * strokes.len() {
        return Err(Error::invalid(format!(
            "pose budget {budget} too small for {} strokes",
            strokes.len()
        )));
    }
    if let Some(short) = strokes.iter().position(|s| s.len() < 2) {
        return Err(Error::invalid(format!("stroke {short} has fewer than 2 poses")));
    }
    let total = pose_count(strokes);
    if budget >= total {
        return Ok(strokes.to_vec());
    }
    let shares: Vec<f64> = strokes
        .iter()
        .map(|s| s.len() as f64 * budget as f64 / total as f64)
        .collect();
    let mut counts: Vec<usize> = shares.iter().map(|s| s.floor() as usize).collect();
    let mut order: Vec<usize> = (0..strokes.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = shares[a] - shares[a].floor();
        let rb = shares[b] - shares[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    let mut left = budget - counts.iter().sum::<usize>();
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        if counts[i] < strokes[i].len() {
            counts[i] += 1;
            left -= 1;
        }
    }
    // enforce the two-pose minimum, borrowing from the longest allotments
    for i in 0..counts.len() {
        while counts[i] < 2 {
            let donor = (0..counts.len())
                .filter(|&j| counts[j] > 2)
                .max_by_key(|&j| (counts[j], std::cmp::Reverse(j)))
                .expect("budget covers two poses per stroke");
            counts[donor] -= 1;
            counts[i] += 1;
        }
    }
    strokes
        .iter()
        .zip(counts)
        .map(|(s, m)| resample_stroke(s, m))
        .collect()
}

/// Number of length-`lambda` windows, advancing by `lambda - overlap`, that
/// fit in `n` poses.
pub fn segments_per_stroke(n: usize, lambda: usize, overlap: usize) -> usize {
    if n < lambda {
        0
    } else {
        (n - lambda) / (lambda - overlap) + 1
    }
}

fn check_window(lambda: usize, overlap: usize) -> Result<()> {
    if lambda == 0 {
        return Err(Error::invalid("segment length must be positive"));
    }
    // lambda = 1 only makes sense without overlap (point-wise prediction)
    if overlap >= lambda {
        return Err(Error::invalid(format!(
            "overlap {overlap} must be smaller than segment length {lambda}"
        )));
    }
    Ok(())
}

/// Output slot count: the window count of a single stroke holding every pose.
pub fn output_slot_count(total_poses: usize, lambda: usize, overlap: usize) -> Result<usize> {
    check_window(lambda, overlap)?;
    if total_poses < lambda {
        return Err(Error::invalid(format!(
            "{total_poses} poses cannot hold a segment of {lambda}"
        )));
    }
    Ok(segments_per_stroke(total_poses, lambda, overlap))
}

/// Cuts every stroke into sliding windows of `lambda` poses where consecutive
/// windows share `overlap` poses. Trailing poses that do not fill a window
/// are dropped.
pub fn decompose_segments(strokes: &[Stroke], lambda: usize, overlap: usize) -> Result<SegmentSet> {
    check_window(lambda, overlap)?;
    let step = lambda - overlap;
    let mut segments = Vec::new();
    for (i, s) in strokes.iter().enumerate() {
        if s.len() < lambda {
            return Err(Error::invalid(format!(
                "stroke {i} has {} poses, shorter than segment length {lambda}",
                s.len()
            )));
        }
        let count = segments_per_stroke(s.len(), lambda, overlap);
        segments.extend((0..count).map(|k| Segment {
            poses: s.poses[k * step..k * step + lambda].to_vec(),
        }));
    }
    SegmentSet::new(segments, lambda, overlap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn line_stroke(n: usize, offset: f64) -> Stroke {
        Stroke::new(
            (0..n)
                .map(|i| Pose::new(Vec3::new(i as f64, offset, 0.0), Vec3::new(0.0, 0.0, -1.0)))
                .collect(),
        )
    }

    /// Brute-force window enumeration: every start index whose window fits,
    /// stepping by lambda - overlap.
    fn enumerate_windows(n: usize, lambda: usize, overlap: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut start = 0;
        while start + lambda <= n {
            out.push((start, start + lambda - 1));
            start += lambda - overlap;
        }
        out
    }

    #[test]
    fn decompose_ten_poses() {
        let s = line_stroke(10, 0.0);
        let set = decompose_segments(&[s], 4, 1).unwrap();
        assert_eq!(set.len(), 3);
        assert_eq!(enumerate_windows(10, 4, 1), vec![(0, 3), (3, 6), (6, 9)]);
        let firsts: Vec<f64> = set.segments.iter().map(|s| s.first().position.x).collect();
        let lasts: Vec<f64> = set.segments.iter().map(|s| s.last().position.x).collect();
        assert_eq!(firsts, vec![0.0, 3.0, 6.0]);
        assert_eq!(lasts, vec![3.0, 6.0, 9.0]);
    }

    #[test]
    fn decompose_exact_fit_and_errors() {
        assert_eq!(decompose_segments(&[line_stroke(4, 0.0)], 4, 1).unwrap().len(), 1);
        assert!(decompose_segments(&[line_stroke(3, 0.0)], 4, 1).is_err());
        assert!(decompose_segments(&[line_stroke(8, 0.0)], 4, 4).is_err());
    }

    #[test]
    fn cuboid_structure_segment_count() {
        let strokes: Vec<Stroke> = (0..6).map(|i| line_stroke(333, i as f64)).collect();
        let set = decompose_segments(&strokes, 4, 1).unwrap();
        let enumerated: usize = (0..6).map(|_| enumerate_windows(333, 4, 1).len()).sum();
        assert_eq!(set.len(), 660);
        assert_eq!(enumerated, 660);
    }

    #[test]
    fn slot_count_examples() {
        assert_eq!(output_slot_count(2000, 4, 1).unwrap(), 666);
        assert_eq!(output_slot_count(4, 4, 1).unwrap(), 1);
        let two = [line_stroke(10, 0.0), line_stroke(10, 1.0)];
        let k = decompose_segments(&two, 4, 1).unwrap().len();
        assert_eq!(k, 6);
        assert!(output_slot_count(20, 4, 1).unwrap() >= k);
        assert!(output_slot_count(3, 4, 1).is_err());
        assert_eq!(output_slot_count(7, 1, 0).unwrap(), 7);
    }

    #[test]
    fn window_formula_matches_enumeration_exhaustively() {
        for lambda in 1..=10 {
            for overlap in 0..lambda {
                for n in 0..=50 {
                    assert_eq!(
                        segments_per_stroke(n, lambda, overlap),
                        enumerate_windows(n, lambda, overlap).len(),
                        "n={n} lambda={lambda} overlap={overlap}"
                    );
                }
            }
        }
    }

    #[test]
    fn downsample_cuboid_budget() {
        let strokes: Vec<Stroke> = (0..6).map(|i| line_stroke(333, i as f64)).collect();
        // 1998 poses already fit a budget of 2000: nothing is upsampled
        let out = downsample_strokes(&strokes, 2000).unwrap();
        assert_eq!(out, strokes);
        let out = downsample_strokes(&strokes, 1000).unwrap();
        assert_eq!(pose_count(&out), 1000);
        for (o, s) in out.iter().zip(&strokes) {
            assert!(o.len() == 166 || o.len() == 167);
            assert_eq!(o.poses.first(), s.poses.first());
            assert_eq!(o.poses.last(), s.poses.last());
        }
    }

    #[test]
    fn downsample_identity_and_halving() {
        let s = line_stroke(100, 0.0);
        assert_eq!(downsample_strokes(std::slice::from_ref(&s), 100).unwrap(), vec![s.clone()]);
        let half = downsample_strokes(std::slice::from_ref(&s), 50).unwrap();
        assert_eq!(half[0].len(), 50);
        let xs: Vec<usize> = half[0].poses.iter().map(|p| p.position.x as usize).collect();
        let expected: Vec<usize> = (0..50).map(|i| ((i * 99) as f64 / 49.0).round() as usize).collect();
        assert_eq!(xs, expected);
        assert_eq!(xs[0], 0);
        assert_eq!(xs[49], 99);
        assert!(downsample_strokes(&[s.clone(), s], 3).is_err());
    }

    #[test]
    fn downsample_keeps_short_strokes_alive() {
        let strokes = vec![line_stroke(1000, 0.0), line_stroke(3, 1.0), line_stroke(3, 2.0)];
        let out = downsample_strokes(&strokes, 10).unwrap();
        assert_eq!(pose_count(&out), 10);
        assert!(out.iter().all(|s| s.len() >= 2));
    }

    #[test]
    fn stroke_text_round_trip() {
        let s = Stroke::new(vec![Pose::facing(Vec3::new(0.1, -2.5, 1e-7), Vec3::new(1.0, 2.0, 3.0))]);
        assert_eq!(Stroke::parse(&s.to_text(), "t").unwrap(), s);
        assert!(Stroke::parse("1 2 3\n", "t").is_err());
    }

    proptest! {
        #[test]
        fn dedup_concatenation_restores_covered_prefix(
            n in 2usize..60, lambda in 2usize..9, overlap_frac in 0.0f64..1.0,
        ) {
            let overlap = 1 + ((lambda - 1) as f64 * overlap_frac) as usize;
            prop_assume!(overlap < lambda && n >= lambda);
            let s = line_stroke(n, 0.5);
            let set = decompose_segments(std::slice::from_ref(&s), lambda, overlap).unwrap();
            let mut rebuilt: Vec<Pose> = set.segments[0].poses.clone();
            for seg in &set.segments[1..] {
                rebuilt.extend_from_slice(&seg.poses[overlap..]);
            }
            prop_assert_eq!(&rebuilt[..], &s.poses[..rebuilt.len()]);
            let covered = (set.len() - 1) * (lambda - overlap) + lambda;
            prop_assert_eq!(rebuilt.len(), covered);
        }

        #[test]
        fn downsample_total_and_order(lens in proptest::collection::vec(2usize..200, 1..8), frac in 0.0f64..1.0) {
            let strokes: Vec<Stroke> = lens.iter().enumerate().map(|(i, &n)| line_stroke(n, i as f64)).collect();
            let total = pose_count(&strokes);
            let budget = 2 * strokes.len() + ((total - 2 * strokes.len()) as f64 * frac) as usize;
            let out = downsample_strokes(&strokes, budget).unwrap();
            prop_assert!(pose_count(&out).abs_diff(budget.min(total)) <= strokes.len());
            for (o, s) in out.iter().zip(&strokes) {
                prop_assert_eq!(o.poses.first(), s.poses.first());
                prop_assert_eq!(o.poses.last(), s.poses.last());
                prop_assert!(o.poses.windows(2).all(|w| w[0].position.x < w[1].position.x));
            }
        }
    }
}
