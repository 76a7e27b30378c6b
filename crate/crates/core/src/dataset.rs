//! On-disk datasets of generated objects.
//!
//! ```text
//! root/
//!   dataset.txt              key = value metadata, one scale per category
//!   split_train.txt          one sample id per line
//!   split_test.txt
//!   samples/<category>_<NNNN>/
//!     mesh.txt  cloud.txt  meta.txt  stroke_000.txt ...
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geometry::{sample_point_cloud, NormalizationTransform, PointCloud};
use crate::kv::KeyValues;
use crate::synthdata::{generate_object, split_dataset, Category, GeneratorConfig, SampleRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub categories: Vec<Category>,
    /// Objects per category.
    pub count: usize,
    pub seed: u64,
    /// Surface points sampled per object.
    pub points: usize,
    pub generator: GeneratorConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub root: PathBuf,
    pub categories: Vec<Category>,
    pub points: usize,
    pub seed: u64,
    /// Normalization divisor per category.
    pub scales: BTreeMap<Category, f64>,
    pub train: Vec<String>,
    pub test: Vec<String>,
}

/// A sample as read back from disk, in world units.
#[derive(Debug, Clone)]
pub struct LoadedSample {
    pub id: String,
    pub record: SampleRecord,
    pub cloud: PointCloud,
    pub transform: NormalizationTransform,
}

pub fn sample_id(category: Category, index: usize) -> String {
    format!("{}_{index:04}", category.name())
}

fn object_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(index as u64)
}

/// Largest absolute coordinate of a centered cloud.
pub fn cloud_extent(cloud: &PointCloud) -> f64 {
    let c = cloud.centroid();
    cloud
        .points
        .iter()
        .map(|p| (p - c).amax())
        .fold(0.0, f64::max)
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_ids(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}

/// Generates every object, splits each category 80/20 and writes the tree.
pub fn generate_dataset(spec: &DatasetSpec, root: &Path) -> Result<Dataset> {
    if spec.categories.is_empty() {
        return Err(Error::invalid("no categories requested"));
    }
    if spec.points == 0 {
        return Err(Error::invalid("points per cloud must be positive"));
    }
    spec.generator.validate()?;
    let samples_dir = root.join("samples");
    std::fs::create_dir_all(&samples_dir).map_err(|e| Error::io(&samples_dir, e))?;

    let mut scales = BTreeMap::new();
    let mut train_ids = Vec::new();
    let mut test_ids = Vec::new();
    for &cat in &spec.categories {
        let mut items = Vec::with_capacity(spec.count);
        for idx in 0..spec.count {
            let seed = object_seed(spec.seed, idx);
            let rec = generate_object(cat, seed, &spec.generator)?;
            let cloud = sample_point_cloud(&rec.mesh, spec.points, seed)?;
            items.push((sample_id(cat, idx), rec, cloud));
        }
        let ids: Vec<usize> = (0..items.len()).collect();
        let (train, test) = split_dataset(&ids, spec.seed)?;
        let scale = train
            .iter()
            .map(|&i| cloud_extent(&items[i].2))
            .fold(0.0, f64::max);
        if !(scale > 0.0) {
            return Err(Error::invalid(format!("degenerate {cat} clouds")));
        }
        scales.insert(cat, scale);
        for (id, rec, cloud) in &items {
            let dir = samples_dir.join(id);
            rec.save(&dir, Some(scale))?;
            write(&dir.join("cloud.txt"), &cloud.to_text())?;
        }
        train_ids.extend(train.iter().map(|&i| items[i].0.clone()));
        test_ids.extend(test.iter().map(|&i| items[i].0.clone()));
    }

    let mut meta = KeyValues::new("dataset");
    meta.set("categories", spec.categories.iter().map(|c| c.name()).collect::<Vec<_>>().join(","));
    meta.set("count", spec.count);
    meta.set("seed", spec.seed);
    meta.set("points", spec.points);
    for (c, s) in &scales {
        meta.set(&format!("scale.{}", c.name()), s);
    }
    write(&root.join("dataset.txt"), &meta.to_text())?;
    write(&root.join("split_train.txt"), &(train_ids.join("\n") + "\n"))?;
    write(&root.join("split_test.txt"), &(test_ids.join("\n") + "\n"))?;
    Ok(Dataset {
        root: root.to_path_buf(),
        categories: spec.categories.clone(),
        points: spec.points,
        seed: spec.seed,
        scales,
        train: train_ids,
        test: test_ids,
    })
}

impl Dataset {
    pub fn open(root: &Path) -> Result<Self> {
        let meta_path = root.join("dataset.txt");
        if !meta_path.exists() {
            return Err(Error::io(
                &meta_path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "not a dataset directory"),
            ));
        }
        let meta = KeyValues::load(&meta_path)?;
        let categories = meta
            .get_list::<String>("categories")?
            .unwrap_or_default()
            .iter()
            .map(|c| Category::parse(c))
            .collect::<Result<Vec<_>>>()?;
        let mut scales = BTreeMap::new();
        for &c in &categories {
            scales.insert(c, meta.require::<f64>(&format!("scale.{}", c.name()))?);
        }
        Ok(Self {
            root: root.to_path_buf(),
            categories,
            points: meta.require("points")?,
            seed: meta.require("seed")?,
            scales,
            train: read_ids(&root.join("split_train.txt"))?,
            test: read_ids(&root.join("split_test.txt"))?,
        })
    }

    pub fn sample_dir(&self, id: &str) -> PathBuf {
        self.root.join("samples").join(id)
    }

    pub fn load(&self, id: &str) -> Result<LoadedSample> {
        let dir = self.sample_dir(id);
        let (record, stored_scale) = SampleRecord::load(&dir)?;
        let scale = match self.scales.get(&record.category) {
            Some(&s) => s,
            None => stored_scale.ok_or_else(|| Error::invalid(format!("{id}: no normalization scale")))?,
        };
        let cloud_path = dir.join("cloud.txt");
        let text = std::fs::read_to_string(&cloud_path).map_err(|e| Error::io(&cloud_path, e))?;
        let cloud = PointCloud::parse(&text, &cloud_path.display().to_string())?;
        let transform = NormalizationTransform {
            centroid: cloud.centroid(),
            scale,
        };
        Ok(LoadedSample {
            id: id.to_string(),
            record,
            cloud,
            transform,
        })
    }

    /// Train ids restricted to `categories` (all when empty).
    pub fn train_ids(&self, categories: &[Category]) -> Vec<String> {
        filter_ids(&self.train, categories)
    }

    pub fn test_ids(&self, categories: &[Category]) -> Vec<String> {
        filter_ids(&self.test, categories)
    }
}

fn filter_ids(ids: &[String], categories: &[Category]) -> Vec<String> {
    ids.iter()
        .filter(|id| categories.is_empty() || categories.iter().any(|c| id.starts_with(&format!("{}_", c.name()))))
        .cloned()
        .collect()
}
