//! Desk-scale trainable model: a per-point MLP encoder with channel-wise
//! max-pooling, an MLP head emitting `slots x lambda` poses, hand-written
//! backpropagation and an Adam optimizer.

mod adam;
mod checkpoint;
mod network;
mod train;

pub use adam::AdamState;
pub use checkpoint::Checkpoint;
pub use network::{BatchCache, ForwardOutput};
pub use train::{loss_for_mode, train, EpochLoss, TrainConfig, TrainOutcome, TrainSample};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::trajectory::SegmentSet;

/// What the head predicts and how it is supervised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Unordered fixed-length segments, Chamfer + attraction loss.
    Segments,
    /// Unordered single poses (segments of length one), Chamfer loss only.
    Pointwise,
    /// A fixed number of fixed-length strokes regressed in order.
    MultipathRegression,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Segments => "segments",
            Mode::Pointwise => "pointwise",
            Mode::MultipathRegression => "multipath_regression",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "segments" => Ok(Mode::Segments),
            "pointwise" => Ok(Mode::Pointwise),
            "multipath_regression" | "regression" => Ok(Mode::MultipathRegression),
            other => Err(Error::invalid(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub input_points: usize,
    pub latent_dim: usize,
    pub encoder_hidden: Vec<usize>,
    pub head_hidden: Vec<usize>,
    pub lambda: usize,
    pub overlap: usize,
    /// Number of predicted segments (or strokes, in regression mode).
    pub slots: usize,
    pub mode: Mode,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let dims_ok = self.input_points >= 1
            && self.latent_dim >= 1
            && self.lambda >= 1
            && self.slots >= 1
            && self.encoder_hidden.iter().chain(&self.head_hidden).all(|&d| d >= 1);
        if !dims_ok {
            return Err(Error::invalid("model dimensions must all be at least 1"));
        }
        match self.mode {
            Mode::Pointwise if self.lambda != 1 || self.overlap != 0 => Err(Error::invalid(
                "pointwise mode requires lambda = 1 and overlap = 0",
            )),
            Mode::Segments if self.lambda < 2 || self.overlap == 0 || self.overlap >= self.lambda => {
                Err(Error::invalid(format!(
                    "segments mode requires lambda >= 2 and 1 <= overlap < lambda, got lambda={} overlap={}",
                    self.lambda, self.overlap
                )))
            }
            _ => Ok(()),
        }
    }

    /// Raw head outputs: six per predicted pose.
    pub fn output_dim(&self) -> usize {
        self.slots * self.lambda * 6
    }

    fn encoder_dims(&self) -> Vec<usize> {
        let mut d = vec![3];
        d.extend(&self.encoder_hidden);
        d.push(self.latent_dim);
        d
    }

    fn head_dims(&self) -> Vec<usize> {
        let mut d = vec![self.latent_dim];
        d.extend(&self.head_hidden);
        d.push(self.output_dim());
        d
    }
}

/// Position of one dense layer inside the flat parameter array. Weights are
/// stored row-major as `[input][output]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub input: usize,
    pub output: usize,
    pub weight_offset: usize,
    pub bias_offset: usize,
}

/// Every learnable weight, flattened, plus the layer offset table.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub values: Vec<f64>,
    pub layers: Vec<LayerSpec>,
    /// Layers `0..encoder_layers` form the encoder, the rest the head.
    pub encoder_layers: usize,
}

impl ModelParams {
    fn layout(config: &ModelConfig) -> (Vec<LayerSpec>, usize, usize) {
        let mut layers = Vec::new();
        let mut offset = 0;
        let enc = config.encoder_dims();
        let head = config.head_dims();
        for dims in [&enc, &head] {
            for w in dims.windows(2) {
                layers.push(LayerSpec {
                    input: w[0],
                    output: w[1],
                    weight_offset: offset,
                    bias_offset: offset + w[0] * w[1],
                });
                offset += w[0] * w[1] + w[1];
            }
        }
        (layers, enc.len() - 1, offset)
    }

    /// All-zero parameters.
    pub fn zeros(config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        let (layers, encoder_layers, len) = Self::layout(config);
        Ok(Self {
            values: vec![0.0; len],
            layers,
            encoder_layers,
        })
    }

    /// Weights uniform in `+-1/sqrt(fan_in)`, biases zero.
    pub fn init(config: &ModelConfig, seed: u64) -> Result<Self> {
        let mut p = Self::zeros(config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for layer in p.layers.clone() {
            let bound = 1.0 / (layer.input as f64).sqrt();
            for v in &mut p.values[layer.weight_offset..layer.bias_offset] {
                *v = rng.random_range(-bound..bound);
            }
        }
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Checks that the flat array fits `config` and holds finite values.
    pub fn check(&self, config: &ModelConfig) -> Result<()> {
        let (layers, encoder_layers, len) = Self::layout(config);
        if self.values.len() != len || self.layers != layers || self.encoder_layers != encoder_layers {
            return Err(Error::ShapeMismatch(format!(
                "parameter array of {} values does not match a model with {len}",
                self.values.len()
            )));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite parameter"));
        }
        Ok(())
    }
}

/// Model configuration bundled with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub params: ModelParams,
}

impl Model {
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        let params = ModelParams::init(&config, seed)?;
        Ok(Self { config, params })
    }

    pub fn with_params(config: ModelConfig, params: ModelParams) -> Result<Self> {
        config.validate()?;
        params.check(&config)?;
        Ok(Self { config, params })
    }

    /// Max-pooled latent code of a cloud.
    pub fn encode(&self, cloud: &PointCloud) -> Result<Vec<f64>> {
        self.check_cloud(cloud)?;
        Ok(network::encode(self, cloud).latent)
    }

    /// Head output for a latent vector.
    pub fn decode(&self, latent: &[f64]) -> Result<SegmentSet> {
        if latent.len() != self.config.latent_dim {
            return Err(Error::ShapeMismatch(format!(
                "latent of {} values, model expects {}",
                latent.len(),
                self.config.latent_dim
            )));
        }
        let out = network::head_forward(self, &[latent.to_vec()]);
        SegmentSet::from_flat(&out.poses[0], self.config.lambda, self.config.overlap)
    }

    pub fn predict(&self, cloud: &PointCloud) -> Result<SegmentSet> {
        let out = self.forward(&[cloud])?;
        SegmentSet::from_flat(&out.poses[0], self.config.lambda, self.config.overlap)
    }

    /// Batched forward pass retaining what backpropagation needs.
    pub fn forward(&self, clouds: &[&PointCloud]) -> Result<ForwardOutput> {
        for c in clouds {
            self.check_cloud(c)?;
        }
        Ok(network::forward(self, clouds))
    }

    /// Parameter gradient given per-sample gradients over predicted poses.
    pub fn backward(&self, cache: &ForwardOutput, pose_grads: &[Vec<f64>]) -> Result<Vec<f64>> {
        if pose_grads.len() != cache.poses.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} pose gradients for a batch of {}",
                pose_grads.len(),
                cache.poses.len()
            )));
        }
        if let Some(g) = pose_grads.iter().find(|g| g.len() != self.config.output_dim()) {
            return Err(Error::ShapeMismatch(format!(
                "pose gradient of {} values, expected {}",
                g.len(),
                self.config.output_dim()
            )));
        }
        Ok(network::backward(self, cache, pose_grads))
    }

    fn check_cloud(&self, cloud: &PointCloud) -> Result<()> {
        if cloud.len() != self.config.input_points {
            return Err(Error::ShapeMismatch(format!(
                "cloud of {} points, model expects {}",
                cloud.len(),
                self.config.input_points
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tiny_config(mode: Mode) -> ModelConfig {
        let (lambda, overlap) = match mode {
            Mode::Pointwise => (1, 0),
            _ => (3, 1),
        };
        ModelConfig {
            input_points: 7,
            latent_dim: 5,
            encoder_hidden: vec![4],
            head_hidden: vec![6],
            lambda,
            overlap,
            slots: 2,
            mode,
        }
    }

    #[test]
    fn layout_is_contiguous() {
        let c = tiny_config(Mode::Segments);
        let p = ModelParams::zeros(&c).unwrap();
        // encoder 3->4->5, head 5->6->36
        let expected = (3 * 4 + 4) + (4 * 5 + 5) + (5 * 6 + 6) + (6 * 36 + 36);
        assert_eq!(p.len(), expected);
        assert_eq!(p.encoder_layers, 2);
        assert_eq!(p.layers.len(), 4);
        let mut end = 0;
        for l in &p.layers {
            assert_eq!(l.weight_offset, end);
            end = l.bias_offset + l.output;
        }
        assert_eq!(end, expected);
    }

    #[test]
    fn mode_consistency() {
        let mut c = tiny_config(Mode::Pointwise);
        assert!(c.validate().is_ok());
        c.lambda = 2;
        assert!(c.validate().is_err());
        let mut c = tiny_config(Mode::Segments);
        c.overlap = 3;
        assert!(c.validate().is_err());
        c.slots = 0;
        assert!(c.validate().is_err());
        assert_eq!(Mode::parse("pointwise").unwrap(), Mode::Pointwise);
        assert!(Mode::parse("nope").is_err());
    }

    #[test]
    fn init_is_seeded() {
        let c = tiny_config(Mode::Segments);
        assert_eq!(ModelParams::init(&c, 3).unwrap(), ModelParams::init(&c, 3).unwrap());
        assert_ne!(ModelParams::init(&c, 3).unwrap(), ModelParams::init(&c, 4).unwrap());
        let p = ModelParams::init(&c, 3).unwrap();
        let l = p.layers[0];
        assert!(p.values[l.bias_offset..l.bias_offset + l.output].iter().all(|&b| b == 0.0));
    }
}
