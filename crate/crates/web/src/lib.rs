//! Browser bindings: build a synthetic object with its reference strokes,
//! simulate the paint they deposit, and re-link noisy segments with a
//! chosen threshold.
//!
//! Everything crosses the boundary as flat numeric arrays so the page needs
//! no serialization layer. Errors are returned as strings.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use segpaint::geometry::{NormalizationTransform, Vec3};
use segpaint::linker::{concatenate, LinkConfig};
use segpaint::objective::LossWeights;
use segpaint::spraysim::{coverage_threshold, paint_coverage, SprayGunModel, Simulator, ThicknessField};
use segpaint::synthdata::{generate_object, Category, GeneratorConfig, SampleRecord};
use segpaint::trajectory::{decompose_segments, downsample_strokes, Pose, SegmentSet, Stroke};
use wasm_bindgen::prelude::*;

type JsResult<T> = std::result::Result<T, String>;

fn err(e: segpaint::Error) -> String {
    e.to_string()
}

/// Comma-separated category names accepted by [`Scene::new`].
#[wasm_bindgen]
pub fn category_names() -> String {
    Category::ALL.iter().map(|c| c.name()).collect::<Vec<_>>().join(",")
}

fn flatten(strokes: &[Stroke]) -> (Vec<f64>, Vec<u32>) {
    let mut points = Vec::new();
    let mut offsets = vec![0u32];
    for s in strokes {
        for p in &s.poses {
            points.extend_from_slice(p.position.as_slice());
        }
        offsets.push((points.len() / 3) as u32);
    }
    (points, offsets)
}

/// A generated object, its reference strokes and the last paint result.
#[wasm_bindgen]
pub struct Scene {
    record: SampleRecord,
    strokes: Vec<Stroke>,
    transform: NormalizationTransform,
    gun: SprayGunModel,
    reference: Option<ThicknessField>,
}

#[wasm_bindgen]
impl Scene {
    /// Builds object `seed` of `category`, downsampling its strokes to
    /// `budget` poses (0 keeps the category default).
    #[wasm_bindgen(constructor)]
    pub fn new(category: &str, seed: u32, budget: u32) -> JsResult<Scene> {
        let cat = Category::parse(category).map_err(err)?;
        let record = generate_object(cat, u64::from(seed), &GeneratorConfig::default()).map_err(err)?;
        let budget = if budget == 0 { cat.default_budget() } else { budget as usize };
        let strokes = downsample_strokes(&record.strokes, budget).map_err(err)?;
        let vs = &record.mesh.vertices;
        let centroid = vs.iter().fold(Vec3::zeros(), |a, v| a + v) / vs.len() as f64;
        let scale = vs.iter().map(|v| (v - centroid).amax()).fold(0.0, f64::max);
        Ok(Scene {
            record,
            strokes,
            transform: NormalizationTransform { centroid, scale },
            gun: SprayGunModel::default(),
            reference: None,
        })
    }

    /// Vertex positions, `x y z` per vertex.
    pub fn vertices(&self) -> Vec<f64> {
        self.record.mesh.vertices.iter().flat_map(|v| [v.x, v.y, v.z]).collect()
    }

    /// Triangle vertex indices, three per face.
    pub fn faces(&self) -> Vec<u32> {
        self.record.mesh.faces.iter().flat_map(|f| f.map(|i| i as u32)).collect()
    }

    /// Reference stroke positions, `x y z` per pose.
    pub fn stroke_points(&self) -> Vec<f64> {
        flatten(&self.strokes).0
    }

    /// Start index of each stroke in [`Self::stroke_points`], plus the total.
    pub fn stroke_offsets(&self) -> Vec<u32> {
        flatten(&self.strokes).1
    }

    /// Half the object's largest centered extent, in meters.
    pub fn scale(&self) -> f64 {
        self.transform.scale
    }

    /// Deposits the reference strokes with the given gun and returns the
    /// per-vertex thickness. Later [`Self::link`] calls score against it.
    pub fn paint(&mut self, cone_half_angle_deg: f64, max_range: f64) -> JsResult<Vec<f64>> {
        let gun = SprayGunModel {
            cone_half_angle: cone_half_angle_deg.to_radians(),
            max_range,
            flux: 1.0,
        };
        let field = Simulator::new(&self.record.mesh, gun).map_err(err)?.deposit(&self.strokes);
        self.gun = gun;
        let out = field.values().to_vec();
        self.reference = Some(field);
        Ok(out)
    }

    /// Coverage threshold of the last [`Self::paint`] result.
    pub fn threshold(&self) -> JsResult<f64> {
        let field = self.reference.as_ref().ok_or("paint the scene first")?;
        coverage_threshold(field).map_err(err)
    }

    /// Cuts the reference strokes into segments, perturbs and shuffles them
    /// as a stand-in for network output, then links them with threshold
    /// `tau` (normalized units).
    pub fn link(&self, lambda: u32, overlap: u32, tau: f64, noise: f64, seed: u32) -> JsResult<Linked> {
        if !(tau >= 0.0) || !(noise >= 0.0) {
            return Err("tau and noise must be non-negative".into());
        }
        let (lambda, overlap) = (lambda as usize, overlap as usize);
        if lambda < 2 || overlap == 0 || overlap >= lambda {
            return Err(format!("need lambda >= 2 and 1 <= overlap < lambda, got {lambda}/{overlap}"));
        }
        let normalized = self.transform.apply_strokes(&self.strokes);
        let mut set = decompose_segments(&normalized, lambda, overlap).map_err(err)?;
        let mut rng = ChaCha8Rng::seed_from_u64(u64::from(seed));
        let mut jitter = |scale: f64| Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale;
        for seg in &mut set.segments {
            for p in &mut seg.poses {
                let o = p.orientation + jitter(noise);
                *p = Pose::new(p.position + jitter(noise), if o.norm() > 1e-9 { o.normalize() } else { p.orientation });
            }
        }
        set.segments.shuffle(&mut rng);
        let set = SegmentSet::new(set.segments, lambda, overlap).map_err(err)?;
        let cfg = LinkConfig {
            tau,
            weights: LossWeights::default(),
        };
        let linked = self.transform.invert_strokes(&concatenate(&set, &cfg).map_err(err)?);
        let coverage = match &self.reference {
            Some(reference) => {
                let field = Simulator::new(&self.record.mesh, self.gun).map_err(err)?.deposit(&linked);
                paint_coverage(&field, reference).map_err(err)?.pc
            }
            None => f64::NAN,
        };
        let (points, offsets) = flatten(&linked);
        Ok(Linked {
            points,
            offsets,
            segments: set.len() as u32,
            coverage,
        })
    }
}

/// Output of [`Scene::link`].
#[wasm_bindgen]
pub struct Linked {
    points: Vec<f64>,
    offsets: Vec<u32>,
    segments: u32,
    coverage: f64,
}

#[wasm_bindgen]
impl Linked {
    pub fn points(&self) -> Vec<f64> {
        self.points.clone()
    }

    pub fn offsets(&self) -> Vec<u32> {
        self.offsets.clone()
    }

    pub fn stroke_count(&self) -> u32 {
        (self.offsets.len() - 1) as u32
    }

    pub fn segment_count(&self) -> u32 {
        self.segments
    }

    /// Paint coverage (%) of the linked strokes against the last painted
    /// reference; NaN when the scene was never painted.
    pub fn coverage(&self) -> f64 {
        self.coverage
    }
}
