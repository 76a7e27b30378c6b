use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{AdamState, Mode, Model};
use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::objective::{aligned_regression_loss, total_loss, LossReport, LossWeights};
use crate::trajectory::SegmentSet;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub alpha: f64,
    pub orientation_weight: f64,
    pub seed: u64,
    /// Samples per optimizer step; 0 means the whole training set.
    pub batch_size: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            epochs: 1200,
            alpha: 0.5,
            orientation_weight: 0.25,
            seed: 0,
            batch_size: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::invalid("learning_rate must be > 0"));
        }
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be >= 1"));
        }
        LossWeights::new(self.alpha, self.orientation_weight).map(|_| ())
    }

    /// Loss weights actually used for `mode`; point-wise training has no
    /// attraction term.
    pub fn weights(&self, mode: Mode) -> LossWeights {
        LossWeights {
            alpha: if mode == Mode::Pointwise { 0.0 } else { self.alpha },
            orientation_weight: self.orientation_weight,
        }
    }
}

/// One normalized input cloud with its supervision target.
#[derive(Debug, Clone)]
pub struct TrainSample {
    pub cloud: PointCloud,
    pub target: SegmentSet,
}

/// Mean training loss over one epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLoss {
    pub epoch: usize,
    pub total: f64,
    pub y2s: f64,
    pub b2e: f64,
}

impl EpochLoss {
    pub const CSV_HEADER: &'static str = "epoch,total,y2s,b2e";

    pub fn to_csv(&self) -> String {
        format!("{},{},{},{}", self.epoch, self.total, self.y2s, self.b2e)
    }

    pub fn parse_csv(line: &str) -> Option<Self> {
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 4 {
            return None;
        }
        Some(Self {
            epoch: f[0].parse().ok()?,
            total: f[1].parse().ok()?,
            y2s: f[2].parse().ok()?,
            b2e: f[3].parse().ok()?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Model,
    pub history: Vec<EpochLoss>,
}

/// Loss of a prediction under the supervision used by `mode`.
pub fn loss_for_mode(mode: Mode, pred: &SegmentSet, target: &SegmentSet, w: &LossWeights) -> Result<LossReport> {
    match mode {
        Mode::Segments => total_loss(pred, target, w),
        Mode::Pointwise => total_loss(pred, target, &LossWeights { alpha: 0.0, ..*w }),
        Mode::MultipathRegression => aligned_regression_loss(pred, target, w),
    }
}

fn check_samples(model: &Model, samples: &[TrainSample]) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::EmptySet("training set"));
    }
    let c = &model.config;
    for (i, s) in samples.iter().enumerate() {
        if s.cloud.len() != c.input_points {
            return Err(Error::ShapeMismatch(format!(
                "sample {i}: cloud of {} points, model expects {}",
                s.cloud.len(),
                c.input_points
            )));
        }
        if s.target.lambda != c.lambda || s.target.is_empty() {
            return Err(Error::ShapeMismatch(format!(
                "sample {i}: target segments of length {}, model expects {}",
                s.target.lambda, c.lambda
            )));
        }
        if c.mode == Mode::MultipathRegression && s.target.len() != c.slots {
            return Err(Error::ShapeMismatch(format!(
                "sample {i}: {} target segments for {} regression slots",
                s.target.len(),
                c.slots
            )));
        }
    }
    Ok(())
}

/// Adam training of `model` in place; returns the per-epoch mean loss.
///
/// Samples are visited in a seeded shuffled order each epoch, and every
/// gradient is summed in sample order, so a fixed seed reproduces the
/// history bit for bit.
pub fn train(mut model: Model, samples: &[TrainSample], cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    check_samples(&model, samples)?;
    let mode = model.config.mode;
    let w = cfg.weights(mode);
    let batch = if cfg.batch_size == 0 {
        samples.len()
    } else {
        cfg.batch_size.min(samples.len())
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = AdamState::new(model.params.len());
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut acc = EpochLoss {
            epoch,
            total: 0.0,
            y2s: 0.0,
            b2e: 0.0,
        };
        for chunk in order.chunks(batch) {
            let clouds: Vec<&PointCloud> = chunk.iter().map(|&i| &samples[i].cloud).collect();
            let out = model.forward(&clouds)?;
            let scale = 1.0 / chunk.len() as f64;
            let mut pose_grads = Vec::with_capacity(chunk.len());
            for (flat, &i) in out.poses.iter().zip(chunk) {
                let pred = SegmentSet::from_flat(flat, model.config.lambda, model.config.overlap)?;
                let report = loss_for_mode(mode, &pred, &samples[i].target, &w)?;
                acc.total += report.total;
                acc.y2s += report.y2s;
                acc.b2e += report.b2e;
                pose_grads.push(report.gradient.into_iter().map(|g| g * scale).collect());
            }
            let grad = model.backward(&out, &pose_grads)?;
            adam.step(&mut model.params.values, &grad, cfg.learning_rate)?;
        }
        let n = samples.len() as f64;
        acc.total /= n;
        acc.y2s /= n;
        acc.b2e /= n;
        if !acc.total.is_finite() {
            return Err(Error::invalid(format!("training diverged at epoch {epoch}")));
        }
        if epoch % 50 == 0 || epoch + 1 == cfg.epochs {
            log::debug!("epoch {epoch}: loss {:.6}", acc.total);
        }
        history.push(acc);
    }
    Ok(TrainOutcome { model, history })
}
