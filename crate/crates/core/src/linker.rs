//! Intra-stroke concatenation: greedy linking of predicted segments into
//! long strokes.
//!
//! Segments are graph nodes. Each node gets at most one outgoing and one
//! incoming edge. Candidate links `k -> j` are committed in ascending order
//! of [`link_distance`] while below the threshold; when a candidate's target
//! gets taken first, the candidate is re-evaluated against the remaining
//! free targets. Linked segments are merged by averaging the end pose of `k`
//! with the begin pose of `j`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::objective::{weighted_pose_distance, LossWeights};
use crate::trajectory::{Pose, Segment, SegmentSet, Stroke};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkConfig {
    /// Link threshold in normalized coordinates.
    pub tau: f64,
    pub weights: LossWeights,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            tau: 0.15,
            weights: LossWeights::default(),
        }
    }
}

/// Directed links between segment indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinkGraph {
    pub next: Vec<Option<usize>>,
    pub prev: Vec<Option<usize>>,
}

impl LinkGraph {
    fn with_nodes(n: usize) -> Self {
        Self {
            next: vec![None; n],
            prev: vec![None; n],
        }
    }

    pub fn node_count(&self) -> usize {
        self.next.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.next
            .iter()
            .enumerate()
            .filter_map(|(k, j)| j.map(|j| (k, j)))
    }

    pub fn edge_count(&self) -> usize {
        self.next.iter().flatten().count()
    }

    /// Number of closed loops in the graph.
    pub fn cycle_count(&self) -> usize {
        let mut seen = vec![false; self.node_count()];
        let mut cycles = 0;
        for start in 0..self.node_count() {
            if seen[start] || self.prev[start].is_none() {
                continue;
            }
            // walk backwards to a chain head, or around to `start`
            let mut cur = start;
            let closed = loop {
                seen[cur] = true;
                match self.prev[cur] {
                    None => break false,
                    Some(p) if p == start => break true,
                    Some(p) => cur = p,
                }
            };
            if closed {
                cycles += 1;
            } else {
                let mut cur = start;
                while let Some(n) = self.next[cur] {
                    seen[n] = true;
                    cur = n;
                }
            }
        }
        cycles
    }
}

/// End-to-begin pose proximity plus agreement of the adjacent step vectors
/// (positions only).
pub fn link_distance(k: &Segment, j: &Segment, w: &LossWeights) -> f64 {
    let lk = k.len();
    let step_k = k.poses[lk - 1].position - k.poses[lk - 2].position;
    let step_j = j.poses[1].position - j.poses[0].position;
    weighted_pose_distance(k.last(), j.first(), w) + (step_k - step_j).norm_squared()
}

#[derive(Debug, PartialEq)]
struct Candidate {
    d: f64,
    k: usize,
    j: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    // reversed so BinaryHeap pops the smallest distance, then smallest (k, j)
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .d
            .total_cmp(&self.d)
            .then(other.k.cmp(&self.k))
            .then(other.j.cmp(&self.j))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Builds the degree-constrained link graph.
pub fn link_segments(set: &SegmentSet, cfg: &LinkConfig) -> Result<LinkGraph> {
    if !(cfg.tau >= 0.0) {
        return Err(Error::invalid("tau must be non-negative"));
    }
    let n = set.len();
    let mut graph = LinkGraph::with_nodes(n);
    if set.lambda < 2 {
        return Ok(graph);
    }
    let dist: Vec<f64> = (0..n)
        .flat_map(|k| {
            (0..n).map(move |j| {
                if j == k {
                    f64::INFINITY
                } else {
                    link_distance(&set.segments[k], &set.segments[j], &cfg.weights)
                }
            })
        })
        .collect();
    let best_free = |k: usize, prev: &[Option<usize>]| -> Option<Candidate> {
        let mut best: Option<Candidate> = None;
        for j in 0..n {
            if j == k || prev[j].is_some() {
                continue;
            }
            let d = dist[k * n + j];
            if best.as_ref().is_none_or(|b| d < b.d) {
                best = Some(Candidate { d, k, j });
            }
        }
        best.filter(|c| c.d < cfg.tau)
    };

    let mut heap: BinaryHeap<Candidate> = (0..n).filter_map(|k| best_free(k, &graph.prev)).collect();
    while let Some(c) = heap.pop() {
        if graph.prev[c.j].is_some() {
            if let Some(again) = best_free(c.k, &graph.prev) {
                heap.push(again);
            }
            continue;
        }
        graph.next[c.k] = Some(c.j);
        graph.prev[c.j] = Some(c.k);
    }
    Ok(graph)
}

/// Mean of two poses; the orientation mean is re-normalized.
pub fn merge_poses(a: &Pose, b: &Pose) -> Pose {
    let position = (a.position + b.position) * 0.5;
    let orientation = if a.orientation == b.orientation {
        a.orientation
    } else {
        let sum = a.orientation + b.orientation;
        let norm = sum.norm();
        if norm > 1e-12 {
            sum / norm
        } else {
            a.orientation
        }
    };
    Pose::new(position, orientation)
}

/// Walks the graph and emits one stroke per chain or cycle.
///
/// Open chains start at their in-degree-zero node. A cycle starts at its
/// smallest segment index and ends at that segment's predecessor; the closing
/// edge is left unmerged, so the stroke returns to its first pose. Strokes
/// are ordered by starting index.
pub fn assemble_strokes(set: &SegmentSet, graph: &LinkGraph) -> Vec<Stroke> {
    let n = set.len();
    let mut visited = vec![false; n];
    let mut strokes: Vec<(usize, Stroke)> = Vec::new();

    let walk = |start: usize, visited: &mut [bool]| -> Stroke {
        let mut poses = set.segments[start].poses.clone();
        visited[start] = true;
        let mut cur = start;
        while let Some(j) = graph.next[cur] {
            if j == start {
                break;
            }
            let tail = poses.pop().expect("segments are non-empty");
            poses.push(merge_poses(&tail, set.segments[j].first()));
            poses.extend_from_slice(&set.segments[j].poses[1..]);
            visited[j] = true;
            cur = j;
        }
        Stroke::new(poses)
    };

    for k in 0..n {
        if graph.prev[k].is_none() {
            strokes.push((k, walk(k, &mut visited)));
        }
    }
    for k in 0..n {
        if !visited[k] {
            strokes.push((k, walk(k, &mut visited)));
        }
    }
    strokes.sort_by_key(|(k, _)| *k);
    strokes.into_iter().map(|(_, s)| s).collect()
}

/// Links segments and merges each chain into a stroke.
pub fn concatenate(set: &SegmentSet, cfg: &LinkConfig) -> Result<Vec<Stroke>> {
    let graph = link_segments(set, cfg)?;
    Ok(assemble_strokes(set, &graph))
}
