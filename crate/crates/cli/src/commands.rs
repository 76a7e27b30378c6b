use std::path::{Path, PathBuf};

use segpaint::dataset::{generate_dataset, Dataset, DatasetSpec};
use segpaint::geometry::{load_mesh, NormalizationTransform, PointCloud};
use segpaint::learner::{Checkpoint, Mode};
use segpaint::linker::concatenate;
use segpaint::pipeline::{
    mean_row, run_evaluation, run_sweep, run_training, sweep_csv, sweep_svg, write_training,
    ExperimentConfig, Predictor, SweepParameter,
};
use segpaint::spraysim::{deposit, paint_coverage};
use segpaint::synthdata::{load_strokes, save_strokes};
use segpaint::trajectory::{Segment, SegmentSet};
use segpaint::{Error, Result};

const TRANSFORM_FILE: &str = "transform.txt";

fn write(path: PathBuf, text: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(&path, text).map_err(|e| Error::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Records the resolved configuration next to the outputs.
fn write_config(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    create_dir(out)?;
    write(out.join("config.txt"), cfg.to_kv().to_text())
}

pub fn generate(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let spec = DatasetSpec {
        categories: cfg.categories.clone(),
        count: cfg.count,
        seed: cfg.seed,
        points: cfg.points,
        generator: cfg.generator.clone(),
    };
    let ds = generate_dataset(&spec, out)?;
    println!("{} train / {} test samples in {}", ds.train.len(), ds.test.len(), out.display());
    Ok(())
}

pub fn train(cfg: &ExperimentConfig, dataset: &Path, pretrained: Option<&Path>, out: &Path) -> Result<()> {
    let ds = Dataset::open(dataset)?;
    let pre = pretrained.map(Checkpoint::load).transpose()?;
    let run = run_training(&ds, cfg, pre.as_ref())?;
    write_training(&run, out)?;
    write_config(cfg, out)?;
    if let Some(last) = run.checkpoint.history.last() {
        println!(
            "trained on {} samples, final loss {:.6} after {} epochs",
            run.train_ids.len(),
            last.total,
            last.epoch + 1
        );
    }
    Ok(())
}

pub fn predict(cfg: &ExperimentConfig, dataset: &Path, checkpoint: &Path, sample: Option<&str>, out: &Path) -> Result<()> {
    let ds = Dataset::open(dataset)?;
    let ck = Checkpoint::load(checkpoint)?;
    let ids = match sample {
        Some(id) => vec![id.to_string()],
        None => ds.test_ids(&cfg.categories),
    };
    if ids.is_empty() {
        return Err(Error::EmptySet("test split"));
    }
    let link = cfg.link();
    for id in &ids {
        let s = ds.load(id)?;
        let cloud = PointCloud::new(s.cloud.points.iter().map(|p| s.transform.apply(p)).collect())?;
        let set = ck.model.predict(&cloud)?;
        let strokes = if cfg.concat && ck.model.config.mode == Mode::Segments {
            concatenate(&set, &link)?
        } else {
            set.to_strokes()
        };
        let dir = out.join(id);
        save_strokes(&dir, &s.transform.invert_strokes(&strokes))?;
        write(dir.join(TRANSFORM_FILE), s.transform.to_text())?;
        println!("{id}: {} segments -> {} strokes", set.len(), strokes.len());
    }
    Ok(())
}

pub fn concat(cfg: &ExperimentConfig, input: &Path, out: &Path) -> Result<()> {
    if !input.is_dir() {
        return Err(Error::io(input, std::io::Error::new(std::io::ErrorKind::NotFound, "no such directory")));
    }
    let tpath = input.join(TRANSFORM_FILE);
    let transform = if tpath.exists() {
        let text = std::fs::read_to_string(&tpath).map_err(|e| Error::io(&tpath, e))?;
        NormalizationTransform::parse(&text, &tpath.display().to_string())?
    } else {
        NormalizationTransform::identity()
    };
    let strokes = load_strokes(input, None)?;
    let lambda = strokes.first().map(|s| s.len()).ok_or(Error::EmptySet("input segments"))?;
    if strokes.iter().any(|s| s.len() != lambda) {
        return Err(Error::invalid("concatenation needs segments of equal length"));
    }
    if cfg.overlap >= lambda {
        return Err(Error::invalid(format!(
            "overlap {} must be below the segment length {lambda}",
            cfg.overlap
        )));
    }
    let segments = transform
        .apply_strokes(&strokes)
        .into_iter()
        .map(|s| Segment { poses: s.poses })
        .collect();
    let set = SegmentSet::new(segments, lambda, cfg.overlap)?;
    let linked = concatenate(&set, &cfg.link())?;
    save_strokes(out, &transform.invert_strokes(&linked))?;
    write(out.join(TRANSFORM_FILE), transform.to_text())?;
    println!("{} segments -> {} strokes", set.len(), linked.len());
    Ok(())
}

pub fn simulate(cfg: &ExperimentConfig, mesh: &Path, strokes: &Path, reference: Option<&Path>, out: &Path) -> Result<()> {
    let mesh_file = if mesh.is_dir() { mesh.join("mesh.txt") } else { mesh.to_path_buf() };
    let load = load_mesh(&mesh_file)?;
    if load.dropped_degenerate > 0 {
        log::warn!("dropped {} degenerate faces", load.dropped_degenerate);
    }
    let pred = deposit(&load.mesh, &load_strokes(strokes, None)?, &cfg.gun)?;
    create_dir(out)?;
    write(out.join("thickness.txt"), pred.to_text())?;
    write(out.join("painted_mesh.txt"), load.mesh.to_text_with_scalars(pred.values())?)?;
    if let Some(r) = reference {
        let gt = deposit(&load.mesh, &load_strokes(r, None)?, &cfg.gun)?;
        let report = paint_coverage(&pred, &gt)?;
        write(out.join("coverage.txt"), report.to_text())?;
        println!("coverage {:.2}%", report.pc);
    }
    Ok(())
}

pub fn evaluate(cfg: &ExperimentConfig, dataset: &Path, checkpoint: Option<&Path>, out: &Path) -> Result<()> {
    let ds = Dataset::open(dataset)?;
    let ck = checkpoint.map(Checkpoint::load).transpose()?;
    let pred = match &ck {
        Some(c) => Predictor::Model(&c.model),
        None => Predictor::GroundTruth,
    };
    let rows = run_evaluation(&ds, cfg, pred, Some(out))?;
    write_config(cfg, out)?;
    let m = mean_row(&rows);
    println!(
        "{} samples: mean PCD x1e4 {:.4}, PC {:.2}%, {:.1} segments, {:.1} strokes",
        rows.len(),
        m.pcd_x1e4,
        m.pc,
        m.segments,
        m.strokes
    );
    Ok(())
}

pub fn sweep(
    cfg: &ExperimentConfig,
    dataset: &Path,
    parameter: &str,
    values: &[f64],
    checkpoint: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let param = SweepParameter::parse(parameter)?;
    let ds = Dataset::open(dataset)?;
    let ck = checkpoint.map(Checkpoint::load).transpose()?;
    let rows = run_sweep(&ds, cfg, param, values, ck.as_ref())?;
    write_config(cfg, out)?;
    write(out.join("sweep.csv"), sweep_csv(param, &rows))?;
    write(out.join("sweep.svg"), sweep_svg(param, &rows))?;
    for r in &rows {
        println!(
            "{} = {}: PCD x1e4 {:.4}, PC {:.2}%, {:.1} strokes",
            param.name(),
            r.value,
            r.mean.pcd_x1e4,
            r.mean.pc,
            r.mean.strokes
        );
    }
    Ok(())
}
