//! End-to-end experiments: sample preparation, training runs, evaluation
//! with simulated coverage, and parameter sweeps.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Dataset, LoadedSample};
use crate::error::{Error, Result};
use crate::geometry::{NormalizationTransform, PointCloud, TriMesh};
use crate::kv::KeyValues;
use crate::learner::{self, Checkpoint, EpochLoss, Mode, Model, ModelConfig, TrainConfig, TrainSample};
use crate::linker::{concatenate, LinkConfig};
use crate::objective::LossWeights;
use crate::plot::{line_chart_svg, Panel};
use crate::spraysim::{deposit, paint_coverage, pose_chamfer, SprayGunModel, PCD_REPORT_SCALE};
use crate::synthdata::{save_strokes, Category, GeneratorConfig};
use crate::trajectory::{
    decompose_segments, downsample_strokes, output_slot_count, pose_count, resample_stroke, Segment, SegmentSet,
    Stroke,
};

/// Everything an experiment needs, readable from a flat key-value file.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub categories: Vec<Category>,
    pub count: usize,
    pub points: usize,
    pub seed: u64,
    /// Ground-truth pose budget; the per-category default when unset.
    pub budget: Option<usize>,
    /// Size the output as `budget / lambda` slots, so every window predicts
    /// the same number of poses whatever the overlap.
    pub fixed_pose_budget: bool,
    pub mode: Mode,
    pub lambda: usize,
    pub overlap: usize,
    pub slots: Option<usize>,
    pub latent_dim: usize,
    pub encoder_hidden: Vec<usize>,
    pub head_hidden: Vec<usize>,
    pub train: TrainConfig,
    /// Share of the training split actually used.
    pub fraction: f64,
    pub tau: f64,
    pub concat: bool,
    pub gun: SprayGunModel,
    pub generator: GeneratorConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            categories: vec![Category::Cuboids],
            count: 50,
            points: 512,
            seed: 0,
            budget: None,
            fixed_pose_budget: false,
            mode: Mode::Segments,
            lambda: 4,
            overlap: 1,
            slots: None,
            latent_dim: 128,
            encoder_hidden: vec![64, 128],
            head_hidden: vec![256, 256],
            train: TrainConfig::default(),
            fraction: 1.0,
            tau: 0.15,
            concat: false,
            gun: SprayGunModel::default(),
            generator: GeneratorConfig::default(),
        }
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Overrides defaults with whatever keys `kv` holds; unknown keys fail.
    pub fn apply(&mut self, kv: &KeyValues) -> Result<()> {
        for key in kv.keys() {
            if !Self::KEYS.contains(&key) {
                return Err(Error::invalid(format!("unknown config key {key:?}")));
            }
        }
        if let Some(c) = kv.get_list::<String>("categories")? {
            self.categories = c.iter().map(|s| Category::parse(s)).collect::<Result<_>>()?;
        }
        macro_rules! take {
            ($key:literal, $field:expr) => {
                if let Some(v) = kv.get($key)? {
                    $field = v;
                }
            };
        }
        take!("count", self.count);
        take!("points", self.points);
        take!("seed", self.seed);
        if let Some(b) = kv.get::<usize>("budget")? {
            self.budget = Some(b);
        }
        take!("fixed_pose_budget", self.fixed_pose_budget);
        if let Some(m) = kv.get::<String>("mode")? {
            self.mode = Mode::parse(&m)?;
        }
        take!("lambda", self.lambda);
        take!("overlap", self.overlap);
        if let Some(s) = kv.get::<usize>("slots")? {
            self.slots = Some(s);
        }
        take!("latent_dim", self.latent_dim);
        if let Some(v) = kv.get_list("encoder_hidden")? {
            self.encoder_hidden = v;
        }
        if let Some(v) = kv.get_list("head_hidden")? {
            self.head_hidden = v;
        }
        take!("learning_rate", self.train.learning_rate);
        take!("epochs", self.train.epochs);
        take!("alpha", self.train.alpha);
        take!("orientation_weight", self.train.orientation_weight);
        take!("batch_size", self.train.batch_size);
        take!("fraction", self.fraction);
        take!("tau", self.tau);
        take!("concat", self.concat);
        if let Some(deg) = kv.get::<f64>("cone_half_angle_deg")? {
            self.gun.cone_half_angle = deg.to_radians();
            self.generator.cone_half_angle = deg.to_radians();
        }
        take!("max_range", self.gun.max_range);
        take!("flux", self.gun.flux);
        take!("cuboid_stroke_poses", self.generator.cuboid_stroke_poses);
        take!("standoff_fraction", self.generator.standoff_fraction);
        take!("pitch_factor", self.generator.pitch_factor);
        take!("pose_spacing", self.generator.pose_spacing);
        take!("mesh_spacing", self.generator.mesh_spacing);
        self.train.seed = self.seed;
        Ok(())
    }

    pub const KEYS: &'static [&'static str] = &[
        "categories",
        "count",
        "points",
        "seed",
        "budget",
        "fixed_pose_budget",
        "mode",
        "lambda",
        "overlap",
        "slots",
        "latent_dim",
        "encoder_hidden",
        "head_hidden",
        "learning_rate",
        "epochs",
        "alpha",
        "orientation_weight",
        "batch_size",
        "fraction",
        "tau",
        "concat",
        "cone_half_angle_deg",
        "max_range",
        "flux",
        "cuboid_stroke_poses",
        "standoff_fraction",
        "pitch_factor",
        "pose_spacing",
        "mesh_spacing",
    ];

    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let mut c = Self::default();
        c.apply(kv)?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_kv(&self) -> KeyValues {
        let mut kv = KeyValues::new("config");
        kv.set("categories", join(&self.categories.iter().map(|c| c.name()).collect::<Vec<_>>()));
        kv.set("count", self.count);
        kv.set("points", self.points);
        kv.set("seed", self.seed);
        if let Some(b) = self.budget {
            kv.set("budget", b);
        }
        kv.set("fixed_pose_budget", self.fixed_pose_budget);
        kv.set("mode", self.mode.name());
        kv.set("lambda", self.lambda);
        kv.set("overlap", self.overlap);
        if let Some(s) = self.slots {
            kv.set("slots", s);
        }
        kv.set("latent_dim", self.latent_dim);
        kv.set("encoder_hidden", join(&self.encoder_hidden));
        kv.set("head_hidden", join(&self.head_hidden));
        kv.set("learning_rate", self.train.learning_rate);
        kv.set("epochs", self.train.epochs);
        kv.set("alpha", self.train.alpha);
        kv.set("orientation_weight", self.train.orientation_weight);
        kv.set("batch_size", self.train.batch_size);
        kv.set("fraction", self.fraction);
        kv.set("tau", self.tau);
        kv.set("concat", self.concat);
        kv.set("cone_half_angle_deg", self.gun.cone_half_angle.to_degrees());
        kv.set("max_range", self.gun.max_range);
        kv.set("flux", self.gun.flux);
        kv.set("cuboid_stroke_poses", self.generator.cuboid_stroke_poses);
        kv.set("standoff_fraction", self.generator.standoff_fraction);
        kv.set("pitch_factor", self.generator.pitch_factor);
        kv.set("pose_spacing", self.generator.pose_spacing);
        kv.set("mesh_spacing", self.generator.mesh_spacing);
        kv
    }

    pub fn validate(&self) -> Result<()> {
        if self.categories.is_empty() {
            return Err(Error::invalid("at least one category is required"));
        }
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(Error::invalid(format!("fraction must be in (0, 1], got {}", self.fraction)));
        }
        if !(self.tau >= 0.0) {
            return Err(Error::invalid(format!("tau must be >= 0, got {}", self.tau)));
        }
        self.train.validate()?;
        self.gun.validate()?;
        self.generator.validate()?;
        let (lambda, overlap) = self.window();
        if self.mode == Mode::Segments && (lambda < 2 || overlap == 0 || overlap >= lambda) {
            return Err(Error::invalid(format!(
                "segments need lambda >= 2 and 1 <= overlap < lambda, got lambda={lambda} overlap={overlap}"
            )));
        }
        Ok(())
    }

    /// Segment length and overlap actually used; point-wise prediction is
    /// always single poses without overlap.
    pub fn window(&self) -> (usize, usize) {
        match self.mode {
            Mode::Pointwise => (1, 0),
            Mode::MultipathRegression => (self.lambda, 0),
            Mode::Segments => (self.lambda, self.overlap),
        }
    }

    pub fn weights(&self) -> LossWeights {
        self.train.weights(self.mode)
    }

    pub fn link(&self) -> LinkConfig {
        LinkConfig {
            tau: self.tau,
            weights: LossWeights {
                alpha: self.train.alpha,
                orientation_weight: self.train.orientation_weight,
            },
        }
    }

    /// Ground-truth pose budget for one category.
    pub fn budget(&self, category: Category) -> Result<usize> {
        Ok(self.budget.unwrap_or_else(|| category.default_budget()))
    }
}

/// A test or training object ready for the model, in both coordinate frames.
#[derive(Debug, Clone)]
pub struct PreparedSample {
    pub id: String,
    pub category: Category,
    pub mesh: TriMesh,
    pub transform: NormalizationTransform,
    /// Normalized input cloud.
    pub cloud: PointCloud,
    /// Downsampled ground truth in world units.
    pub gt_world: Vec<Stroke>,
    /// Downsampled ground truth in normalized units.
    pub gt: Vec<Stroke>,
    pub target: SegmentSet,
}

/// Supervision target for `mode` from normalized strokes.
pub fn target_for(mode: Mode, strokes: &[Stroke], lambda: usize, overlap: usize) -> Result<SegmentSet> {
    match mode {
        Mode::Segments => decompose_segments(strokes, lambda, overlap),
        Mode::Pointwise => decompose_segments(strokes, 1, 0),
        Mode::MultipathRegression => {
            let segments = strokes
                .iter()
                .map(|s| {
                    resample_stroke(s, lambda).map(|r| Segment { poses: r.poses })
                })
                .collect::<Result<Vec<_>>>()?;
            SegmentSet::new(segments, lambda, 0)
        }
    }
}

pub fn prepare(sample: LoadedSample, cfg: &ExperimentConfig, lambda: usize, overlap: usize) -> Result<PreparedSample> {
    let LoadedSample {
        id,
        record,
        cloud,
        transform,
    } = sample;
    let gt_world = downsample_strokes(&record.strokes, cfg.budget(record.category)?)?;
    let gt = transform.apply_strokes(&gt_world);
    let target = target_for(cfg.mode, &gt, lambda, overlap)?;
    let cloud = PointCloud::new(cloud.points.iter().map(|p| transform.apply(p)).collect())?;
    Ok(PreparedSample {
        id,
        category: record.category,
        mesh: record.mesh,
        transform,
        cloud,
        gt_world,
        gt,
        target,
    })
}

fn load_prepared(ds: &Dataset, ids: &[String], cfg: &ExperimentConfig, lambda: usize, overlap: usize) -> Result<Vec<PreparedSample>> {
    ids.iter().map(|id| prepare(ds.load(id)?, cfg, lambda, overlap)).collect()
}

/// Seeded subset holding `fraction` of `ids` (at least one), in input order.
pub fn subset(ids: &[String], fraction: f64, seed: u64) -> Vec<String> {
    let keep = ((ids.len() as f64 * fraction).round() as usize).clamp(1.min(ids.len()), ids.len());
    let mut idx: Vec<usize> = (0..ids.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eb5e7));
    let mut chosen: Vec<usize> = idx[..keep].to_vec();
    chosen.sort_unstable();
    chosen.into_iter().map(|i| ids[i].clone()).collect()
}

/// Model shape implied by the experiment and its training targets.
pub fn model_config(cfg: &ExperimentConfig, points: usize, samples: &[PreparedSample]) -> Result<ModelConfig> {
    let (lambda, overlap) = cfg.window();
    let slots = match (cfg.slots, cfg.mode) {
        (Some(s), _) => s,
        (None, Mode::MultipathRegression) => samples.iter().map(|s| s.target.len()).max().unwrap_or(1),
        (None, _) => {
            let budget = cfg
                .categories
                .iter()
                .map(|&c| cfg.budget(c))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .max()
                .unwrap_or(lambda);
            if cfg.fixed_pose_budget {
                (budget / lambda).max(1)
            } else {
                output_slot_count(budget, lambda, overlap)?
            }
        }
    };
    let mc = ModelConfig {
        input_points: points,
        latent_dim: cfg.latent_dim,
        encoder_hidden: cfg.encoder_hidden.clone(),
        head_hidden: cfg.head_hidden.clone(),
        lambda,
        overlap,
        slots,
        mode: cfg.mode,
    };
    mc.validate()?;
    Ok(mc)
}

/// Result of [`run_training`].
#[derive(Debug, Clone)]
pub struct TrainRun {
    pub checkpoint: Checkpoint,
    /// Loss history of the pre-trained model this run started from.
    pub pretrain_history: Option<Vec<EpochLoss>>,
    pub train_ids: Vec<String>,
}

/// Trains on the (possibly subsetted) training split of `cfg.categories`.
pub fn run_training(ds: &Dataset, cfg: &ExperimentConfig, pretrained: Option<&Checkpoint>) -> Result<TrainRun> {
    cfg.validate()?;
    for c in &cfg.categories {
        if !ds.categories.contains(c) {
            return Err(Error::invalid(format!("dataset has no {c} samples")));
        }
    }
    let (lambda, overlap) = cfg.window();
    let all = ds.train_ids(&cfg.categories);
    if all.is_empty() {
        return Err(Error::EmptySet("training split"));
    }
    let ids = if cfg.fraction < 1.0 { subset(&all, cfg.fraction, cfg.seed) } else { all };
    let samples = load_prepared(ds, &ids, cfg, lambda, overlap)?;
    let mc = model_config(cfg, ds.points, &samples)?;
    for s in &samples {
        let fits = match mc.mode {
            Mode::MultipathRegression => s.target.len() == mc.slots,
            // A fixed pose budget may leave fewer slots than target segments.
            _ => cfg.fixed_pose_budget || s.target.len() <= mc.slots,
        };
        if !fits {
            return Err(Error::ShapeMismatch(format!(
                "{}: {} target segments for {} output slots",
                s.id,
                s.target.len(),
                mc.slots
            )));
        }
    }
    let model = match pretrained {
        Some(ck) => {
            if ck.model.config != mc {
                return Err(Error::ShapeMismatch(format!(
                    "pre-trained model {:?} does not match {:?}",
                    ck.model.config, mc
                )));
            }
            ck.model.clone()
        }
        None => Model::new(mc, cfg.seed)?,
    };
    let train_samples: Vec<TrainSample> = samples
        .into_iter()
        .map(|s| TrainSample {
            cloud: s.cloud,
            target: s.target,
        })
        .collect();
    let mut tc = cfg.train.clone();
    tc.seed = cfg.seed;
    let out = learner::train(model, &train_samples, &tc)?;
    Ok(TrainRun {
        checkpoint: Checkpoint {
            model: out.model,
            history: out.history,
        },
        pretrain_history: pretrained.map(|p| p.history.clone()),
        train_ids: ids,
    })
}

pub fn loss_csv(history: &[EpochLoss]) -> String {
    let mut s = format!("{}\n", EpochLoss::CSV_HEADER);
    for h in history {
        s += &h.to_csv();
        s.push('\n');
    }
    s
}

/// Writes `checkpoint.txt`, `loss.csv` and, for fine-tuning runs,
/// `pretrain_loss.csv`.
pub fn write_training(run: &TrainRun, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    run.checkpoint.save(&out.join("checkpoint.txt"))?;
    let w = |name: &str, text: String| {
        let p = out.join(name);
        std::fs::write(&p, text).map_err(|e| Error::io(p, e))
    };
    w("loss.csv", loss_csv(&run.checkpoint.history))?;
    if let Some(h) = &run.pretrain_history {
        w("pretrain_loss.csv", loss_csv(h))?;
    }
    w("train_ids.txt", run.train_ids.join("\n") + "\n")
}

/// Per-sample evaluation numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub sample_id: String,
    pub pcd_x1e4: f64,
    pub pc: f64,
    pub segments: usize,
    pub strokes: usize,
}

pub const METRICS_HEADER: &str = "sample_id,pcd_x1e4,pc,segments,strokes";

impl MetricsRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.sample_id, self.pcd_x1e4, self.pc, self.segments, self.strokes
        )
    }
}

/// Column means over `rows`, labelled `mean`; segment and stroke counts are
/// averaged too.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsMean {
    pub pcd_x1e4: f64,
    pub pc: f64,
    pub segments: f64,
    pub strokes: f64,
}

pub fn mean_row(rows: &[MetricsRow]) -> MetricsMean {
    let n = rows.len().max(1) as f64;
    MetricsMean {
        pcd_x1e4: rows.iter().map(|r| r.pcd_x1e4).sum::<f64>() / n,
        pc: rows.iter().map(|r| r.pc).sum::<f64>() / n,
        segments: rows.iter().map(|r| r.segments as f64).sum::<f64>() / n,
        strokes: rows.iter().map(|r| r.strokes as f64).sum::<f64>() / n,
    }
}

pub fn metrics_csv(rows: &[MetricsRow]) -> String {
    let mut s = format!("{METRICS_HEADER}\n");
    for r in rows {
        s += &r.to_csv();
        s.push('\n');
    }
    let m = mean_row(rows);
    s += &format!("mean,{},{},{},{}\n", m.pcd_x1e4, m.pc, m.segments, m.strokes);
    s
}

/// Where evaluation predictions come from.
#[derive(Debug, Clone, Copy)]
pub enum Predictor<'a> {
    Model(&'a Model),
    /// Ground truth fed back as the prediction.
    GroundTruth,
}

/// Predicted strokes for one sample, normalized units, plus the segment
/// count before linking.
pub fn predict_strokes(pred: Predictor, sample: &PreparedSample, link: Option<&LinkConfig>) -> Result<(Vec<Stroke>, usize)> {
    match pred {
        Predictor::GroundTruth => Ok((sample.gt.clone(), sample.target.len())),
        Predictor::Model(model) => {
            let set = model.predict(&sample.cloud)?;
            let n = set.len();
            let strokes = match (model.config.mode, link) {
                (Mode::MultipathRegression, _) | (_, None) => set.to_strokes(),
                (_, Some(cfg)) => concatenate(&set, cfg)?,
            };
            Ok((strokes, n))
        }
    }
}

/// Output of evaluating one sample.
#[derive(Debug, Clone)]
pub struct SampleEvaluation {
    pub row: MetricsRow,
    /// Predicted strokes in world units.
    pub strokes: Vec<Stroke>,
    pub coverage: crate::spraysim::CoverageReport,
    pub gt_thickness: crate::spraysim::ThicknessField,
    pub pred_thickness: crate::spraysim::ThicknessField,
}

pub fn evaluate_sample(pred: Predictor, sample: &PreparedSample, cfg: &ExperimentConfig) -> Result<SampleEvaluation> {
    let link = cfg.link();
    let (strokes, segments) = predict_strokes(pred, sample, cfg.concat.then_some(&link))?;
    let pred_poses: Vec<_> = strokes.iter().flat_map(|s| s.poses.iter().copied()).collect();
    let gt_poses: Vec<_> = sample.gt.iter().flat_map(|s| s.poses.iter().copied()).collect();
    let pcd = pose_chamfer(&pred_poses, &gt_poses, &cfg.weights())? * PCD_REPORT_SCALE;
    let world = match pred {
        Predictor::GroundTruth => sample.gt_world.clone(),
        Predictor::Model(_) => sample.transform.invert_strokes(&strokes),
    };
    let gt_thickness = deposit(&sample.mesh, &sample.gt_world, &cfg.gun)?;
    let pred_thickness = deposit(&sample.mesh, &world, &cfg.gun)?;
    let coverage = paint_coverage(&pred_thickness, &gt_thickness)?;
    Ok(SampleEvaluation {
        row: MetricsRow {
            sample_id: sample.id.clone(),
            pcd_x1e4: pcd,
            pc: coverage.pc,
            segments,
            strokes: strokes.len(),
        },
        strokes: world,
        coverage,
        gt_thickness,
        pred_thickness,
    })
}

/// Evaluates every test sample of `cfg.categories`; with `out`, writes
/// `metrics.csv` and per-sample artifacts under `out/samples/<id>/`.
pub fn run_evaluation(ds: &Dataset, cfg: &ExperimentConfig, pred: Predictor, out: Option<&Path>) -> Result<Vec<MetricsRow>> {
    cfg.validate()?;
    let (lambda, overlap) = match pred {
        Predictor::Model(m) => {
            if m.config.input_points != ds.points {
                return Err(Error::ShapeMismatch(format!(
                    "model expects {} input points, dataset clouds have {}",
                    m.config.input_points, ds.points
                )));
            }
            (m.config.lambda, m.config.overlap)
        }
        Predictor::GroundTruth => cfg.window(),
    };
    let mut eval_cfg = cfg.clone();
    if let Predictor::Model(m) = pred {
        eval_cfg.mode = m.config.mode;
    }
    let ids = ds.test_ids(&cfg.categories);
    if ids.is_empty() {
        return Err(Error::EmptySet("test split"));
    }
    let mut rows = Vec::with_capacity(ids.len());
    for id in &ids {
        let sample = prepare(ds.load(id)?, &eval_cfg, lambda, overlap)?;
        let ev = evaluate_sample(pred, &sample, &eval_cfg)?;
        if let Some(out) = out {
            let dir = out.join("samples").join(id);
            save_strokes(&dir, &ev.strokes)?;
            let w = |name: &str, text: String| {
                let p = dir.join(name);
                std::fs::write(&p, text).map_err(|e| Error::io(p, e))
            };
            w("coverage.txt", ev.coverage.to_text())?;
            w("thickness_pred.txt", ev.pred_thickness.to_text())?;
            w("thickness_gt.txt", ev.gt_thickness.to_text())?;
        }
        log::info!("{id}: pcd {:.3} pc {:.2}", ev.row.pcd_x1e4, ev.row.pc);
        rows.push(ev.row);
    }
    rows.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
    if let Some(out) = out {
        let p = out.join("metrics.csv");
        std::fs::write(&p, metrics_csv(&rows)).map_err(|e| Error::io(p, e))?;
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Lambda,
    Overlap,
    Tau,
}

impl SweepParameter {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "lambda" => Ok(Self::Lambda),
            "overlap" => Ok(Self::Overlap),
            "tau" => Ok(Self::Tau),
            other => Err(Error::invalid(format!("cannot sweep {other:?} (expected lambda, overlap or tau)"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Lambda => "lambda",
            Self::Overlap => "overlap",
            Self::Tau => "tau",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub mean: MetricsMean,
}

fn as_count(v: f64, what: &str) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(Error::invalid(format!("{what} must be a whole number, got {v}")))
    }
}

/// Re-trains per value for `lambda`/`overlap`; for `tau`, re-evaluates the
/// given checkpoint with linking enabled.
pub fn run_sweep(
    ds: &Dataset,
    cfg: &ExperimentConfig,
    param: SweepParameter,
    values: &[f64],
    checkpoint: Option<&Checkpoint>,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::invalid("sweep needs at least one value"));
    }
    let mut rows = Vec::with_capacity(values.len());
    for &v in values {
        let mut c = cfg.clone();
        let rows_for = match param {
            SweepParameter::Tau => {
                let ck = checkpoint.ok_or_else(|| Error::invalid("a tau sweep needs a checkpoint"))?;
                c.tau = v;
                c.concat = true;
                run_evaluation(ds, &c, Predictor::Model(&ck.model), None)?
            }
            SweepParameter::Lambda | SweepParameter::Overlap => {
                if param == SweepParameter::Lambda {
                    c.lambda = as_count(v, "lambda")?;
                } else {
                    c.overlap = as_count(v, "overlap")?;
                }
                c.mode = Mode::Segments;
                let run = run_training(ds, &c, None)?;
                run_evaluation(ds, &c, Predictor::Model(&run.checkpoint.model), None)?
            }
        };
        log::info!("{} = {v}: {:?}", param.name(), mean_row(&rows_for));
        rows.push(SweepRow {
            value: v,
            mean: mean_row(&rows_for),
        });
    }
    Ok(rows)
}

pub fn sweep_csv(param: SweepParameter, rows: &[SweepRow]) -> String {
    let mut s = format!("{},pcd_x1e4,pc,segments,strokes\n", param.name());
    for r in rows {
        s += &format!(
            "{},{},{},{},{}\n",
            r.value, r.mean.pcd_x1e4, r.mean.pc, r.mean.segments, r.mean.strokes
        );
    }
    s
}

pub fn sweep_svg(param: SweepParameter, rows: &[SweepRow]) -> String {
    let series = |f: fn(&MetricsMean) -> f64| rows.iter().map(|r| (r.value, f(&r.mean))).collect();
    let mut panels = vec![
        Panel {
            title: "Pose-wise Chamfer distance".into(),
            y_label: "PCD x 1e4".into(),
            points: series(|m| m.pcd_x1e4),
        },
        Panel {
            title: "Paint coverage".into(),
            y_label: "PC (%)".into(),
            points: series(|m| m.pc),
        },
    ];
    if param == SweepParameter::Tau {
        panels.push(Panel {
            title: "Strokes after linking".into(),
            y_label: "strokes".into(),
            points: series(|m| m.strokes),
        });
    }
    line_chart_svg(param.name(), &panels)
}

/// Total predicted poses of a segment set.
pub fn predicted_pose_count(set: &SegmentSet) -> usize {
    set.len() * set.lambda
}

/// Poses across the ground truth after downsampling.
pub fn gt_pose_count(sample: &PreparedSample) -> usize {
    pose_count(&sample.gt)
}
