//! Training losses over predicted segment sets: the symmetric segment
//! Chamfer term, the begin-to-end attraction term, and their weighted sum,
//! each with an analytic gradient with respect to the predicted poses.
//!
//! Gradients are flat arrays laid out like [`SegmentSet::to_flat`]:
//! `[slot][pose][px py pz ox oy oz]`. Orientation entries are gradients with
//! respect to the (already unit) orientation components; projecting through
//! the normalization is the model's job.

use crate::error::{Error, Result};
use crate::trajectory::{Pose, Segment, SegmentSet};

/// Relative weighting of loss terms and pose components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    /// Weight of the attraction term.
    pub alpha: f64,
    /// Per-component weight on orientation differences.
    pub orientation_weight: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            orientation_weight: 0.25,
        }
    }
}

impl LossWeights {
    pub fn new(alpha: f64, orientation_weight: f64) -> Result<Self> {
        let w = Self {
            alpha,
            orientation_weight,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("orientation_weight", self.orientation_weight)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Loss value, its components and the gradient over the predicted set.
#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub total: f64,
    pub y2s: f64,
    pub b2e: f64,
    pub gradient: Vec<f64>,
}

/// Squared position distance plus weighted squared orientation distance.
/// For unit orientations the second term equals `2 - 2 cos(angle)`.
pub fn weighted_pose_distance(a: &Pose, b: &Pose, w: &LossWeights) -> f64 {
    (a.position - b.position).norm_squared()
        + w.orientation_weight * (a.orientation - b.orientation).norm_squared()
}

/// Adds `scale * d/da weighted_pose_distance(a, b)` into `grad[..6]`.
fn accumulate_pose_grad(grad: &mut [f64], a: &Pose, b: &Pose, w: &LossWeights, scale: f64) {
    let dp = a.position - b.position;
    let dor = a.orientation - b.orientation;
    for c in 0..3 {
        grad[c] += scale * 2.0 * dp[c];
        grad[3 + c] += scale * 2.0 * w.orientation_weight * dor[c];
    }
}

/// Pose-aligned sum of weighted pose distances.
pub fn segment_distance_sq(y: &Segment, s: &Segment, w: &LossWeights) -> Result<f64> {
    if y.len() != s.len() {
        return Err(Error::ShapeMismatch(format!(
            "segment lengths {} and {} differ",
            y.len(),
            s.len()
        )));
    }
    Ok(segment_distance_unchecked(y, s, w))
}

fn segment_distance_unchecked(y: &Segment, s: &Segment, w: &LossWeights) -> f64 {
    y.poses
        .iter()
        .zip(&s.poses)
        .map(|(a, b)| weighted_pose_distance(a, b, w))
        .sum()
}

fn accumulate_segment_grad(grad: &mut [f64], y: &Segment, s: &Segment, w: &LossWeights, scale: f64) {
    for (l, (a, b)) in y.poses.iter().zip(&s.poses).enumerate() {
        accumulate_pose_grad(&mut grad[l * 6..l * 6 + 6], a, b, w, scale);
    }
}

/// Index and value of the minimum; the lowest index wins ties.
fn argmin(values: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    for (i, v) in values.enumerate() {
        if v < best.1 || best.0 == usize::MAX {
            best = (i, v);
        }
    }
    best
}

fn check_pair(pred: &SegmentSet, target: &SegmentSet) -> Result<()> {
    if pred.is_empty() {
        return Err(Error::EmptySet("predicted segments"));
    }
    if target.is_empty() {
        return Err(Error::EmptySet("target segments"));
    }
    if pred.lambda != target.lambda {
        return Err(Error::ShapeMismatch(format!(
            "segment lengths {} and {} differ",
            pred.lambda, target.lambda
        )));
    }
    Ok(())
}

/// Symmetric Chamfer distance between segment sets, each direction averaged
/// over its source set. Returns the loss and its gradient over `pred`.
pub fn chamfer_segments(pred: &SegmentSet, target: &SegmentSet, w: &LossWeights) -> Result<(f64, Vec<f64>)> {
    check_pair(pred, target)?;
    let stride = pred.lambda * 6;
    let k_pred = pred.len();
    let k_target = target.len();
    let dist: Vec<f64> = pred
        .segments
        .iter()
        .flat_map(|y| target.segments.iter().map(move |s| segment_distance_unchecked(y, s, w)))
        .collect();
    let at = |i: usize, j: usize| dist[i * k_target + j];

    let mut grad = vec![0.0; k_pred * stride];
    let mut forward = 0.0;
    let scale_f = 1.0 / k_pred as f64;
    for i in 0..k_pred {
        let (j, d) = argmin((0..k_target).map(|j| at(i, j)));
        forward += d;
        accumulate_segment_grad(
            &mut grad[i * stride..(i + 1) * stride],
            &pred.segments[i],
            &target.segments[j],
            w,
            scale_f,
        );
    }
    let mut backward = 0.0;
    let scale_b = 1.0 / k_target as f64;
    for j in 0..k_target {
        let (i, d) = argmin((0..k_pred).map(|i| at(i, j)));
        backward += d;
        accumulate_segment_grad(
            &mut grad[i * stride..(i + 1) * stride],
            &pred.segments[i],
            &target.segments[j],
            w,
            scale_b,
        );
    }
    Ok((forward * scale_f + backward * scale_b, grad))
}

/// Pulls each segment's first pose toward some other segment's last pose and
/// vice versa. Zero for fewer than two segments.
pub fn attraction_loss(pred: &SegmentSet, w: &LossWeights) -> (f64, Vec<f64>) {
    let k = pred.len();
    let lambda = pred.lambda;
    let stride = lambda * 6;
    let mut grad = vec![0.0; k * stride];
    if k < 2 {
        return (0.0, grad);
    }
    let scale = 1.0 / (2.0 * k as f64);
    let begin = |i: usize| pred.segments[i].first();
    let end = |i: usize| pred.segments[i].last();
    let last_off = (lambda - 1) * 6;
    let mut loss = 0.0;
    for i in 0..k {
        // begin of i -> nearest end of j != i
        let (jb, db) = argmin((0..k).map(|j| {
            if j == i {
                f64::INFINITY
            } else {
                weighted_pose_distance(begin(i), end(j), w)
            }
        }));
        loss += db;
        let (bi, ej) = (*begin(i), *end(jb));
        accumulate_pose_grad(&mut grad[i * stride..i * stride + 6], &bi, &ej, w, scale);
        accumulate_pose_grad(&mut grad[jb * stride + last_off..jb * stride + last_off + 6], &ej, &bi, w, scale);

        // end of i -> nearest begin of j != i
        let (je, de) = argmin((0..k).map(|j| {
            if j == i {
                f64::INFINITY
            } else {
                weighted_pose_distance(end(i), begin(j), w)
            }
        }));
        loss += de;
        let (ei, bj) = (*end(i), *begin(je));
        accumulate_pose_grad(&mut grad[i * stride + last_off..i * stride + last_off + 6], &ei, &bj, w, scale);
        accumulate_pose_grad(&mut grad[je * stride..je * stride + 6], &bj, &ei, w, scale);
    }
    (loss * scale, grad)
}

/// `chamfer + alpha * attraction`.
pub fn total_loss(pred: &SegmentSet, target: &SegmentSet, w: &LossWeights) -> Result<LossReport> {
    w.validate()?;
    let (y2s, mut gradient) = chamfer_segments(pred, target, w)?;
    let (b2e, g_b2e) = if w.alpha > 0.0 {
        attraction_loss(pred, w)
    } else {
        (0.0, Vec::new())
    };
    for (g, a) in gradient.iter_mut().zip(&g_b2e) {
        *g += w.alpha * a;
    }
    Ok(LossReport {
        total: y2s + w.alpha * b2e,
        y2s,
        b2e,
        gradient,
    })
}

/// Pose-aligned regression against a fixed-size target: the mean over
/// slots of [`segment_distance_sq`] between slot `i` of both sets.
pub fn aligned_regression_loss(pred: &SegmentSet, target: &SegmentSet, w: &LossWeights) -> Result<LossReport> {
    check_pair(pred, target)?;
    if pred.len() != target.len() {
        return Err(Error::ShapeMismatch(format!(
            "regression needs equal slot counts, got {} and {}",
            pred.len(),
            target.len()
        )));
    }
    let stride = pred.lambda * 6;
    let scale = 1.0 / pred.len() as f64;
    let mut gradient = vec![0.0; pred.len() * stride];
    let mut loss = 0.0;
    for (i, (y, s)) in pred.segments.iter().zip(&target.segments).enumerate() {
        loss += segment_distance_unchecked(y, s, w);
        accumulate_segment_grad(&mut gradient[i * stride..(i + 1) * stride], y, s, w, scale);
    }
    Ok(LossReport {
        total: loss * scale,
        y2s: loss * scale,
        b2e: 0.0,
        gradient,
    })
}
