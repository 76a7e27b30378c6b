use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, ArrayView1, ArrayView2, ArrayViewMut1, ArrayViewMut2, Axis};

use super::{LayerSpec, Model};
use crate::geometry::PointCloud;

/// Direction used when a raw orientation triple is exactly zero.
pub const FALLBACK_AXIS: [f64; 3] = [0.0, 0.0, 1.0];

fn weights<'a>(values: &'a [f64], l: &LayerSpec) -> ArrayView2<'a, f64> {
    ArrayView2::from_shape((l.input, l.output), &values[l.weight_offset..l.bias_offset])
        .expect("layer layout")
}

fn bias<'a>(values: &'a [f64], l: &LayerSpec) -> ArrayView1<'a, f64> {
    ArrayView1::from(&values[l.bias_offset..l.bias_offset + l.output])
}

fn dense(input: &Array2<f64>, values: &[f64], l: &LayerSpec, relu: bool) -> Array2<f64> {
    let mut out = input.dot(&weights(values, l));
    out += &bias(values, l);
    if relu {
        out.mapv_inplace(|v| v.max(0.0));
    }
    out
}

#[derive(Debug, Clone)]
pub(crate) struct EncoderCache {
    /// `acts[0]` is the input cloud, `acts[l + 1]` the output of layer `l`.
    acts: Vec<Array2<f64>>,
    pub latent: Vec<f64>,
    /// Winning point per latent channel (lowest index on ties).
    argmax: Vec<usize>,
}

pub(crate) fn encode(model: &Model, cloud: &PointCloud) -> EncoderCache {
    let p = &model.params;
    let mut x = Array2::zeros((cloud.len(), 3));
    for (mut row, pt) in x.rows_mut().into_iter().zip(&cloud.points) {
        row[0] = pt.x;
        row[1] = pt.y;
        row[2] = pt.z;
    }
    let mut acts = vec![x];
    for l in &p.layers[..p.encoder_layers] {
        let next = dense(acts.last().unwrap(), &p.values, l, true);
        acts.push(next);
    }
    let last = acts.last().unwrap();
    let mut latent = vec![f64::NEG_INFINITY; last.ncols()];
    let mut argmax = vec![0; last.ncols()];
    for (i, row) in last.rows().into_iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            if v > latent[c] {
                latent[c] = v;
                argmax[c] = i;
            }
        }
    }
    EncoderCache {
        acts,
        latent,
        argmax,
    }
}

#[derive(Debug, Clone)]
pub(crate) struct HeadCache {
    /// `acts[0]` holds the latent codes, `acts[l + 1]` hidden outputs.
    acts: Vec<Array2<f64>>,
    raw: Array2<f64>,
    pub poses: Vec<Vec<f64>>,
}

/// L2-normalizes every orientation triple of a raw output row.
fn normalize_row(raw: ArrayView1<f64>) -> Vec<f64> {
    let mut out = raw.to_vec();
    for pose in out.chunks_exact_mut(6) {
        let n = (pose[3] * pose[3] + pose[4] * pose[4] + pose[5] * pose[5]).sqrt();
        if n > 0.0 {
            pose[3] /= n;
            pose[4] /= n;
            pose[5] /= n;
        } else {
            pose[3..6].copy_from_slice(&FALLBACK_AXIS);
        }
    }
    out
}

pub(crate) fn head_forward(model: &Model, latents: &[Vec<f64>]) -> HeadCache {
    let p = &model.params;
    let width = model.config.latent_dim;
    let mut z = Array2::zeros((latents.len(), width));
    for (mut row, l) in z.rows_mut().into_iter().zip(latents) {
        row.assign(&ArrayView1::from(l.as_slice()));
    }
    let head = &p.layers[p.encoder_layers..];
    let mut acts = vec![z];
    for l in &head[..head.len() - 1] {
        let next = dense(acts.last().unwrap(), &p.values, l, true);
        acts.push(next);
    }
    let raw = dense(acts.last().unwrap(), &p.values, head.last().unwrap(), false);
    let poses = raw.rows().into_iter().map(normalize_row).collect();
    HeadCache { acts, raw, poses }
}

/// Predicted poses (flat, orientation-normalized) per sample, plus caches.
#[derive(Debug, Clone)]
pub struct ForwardOutput {
    pub poses: Vec<Vec<f64>>,
    pub(crate) cache: BatchCache,
}

#[derive(Debug, Clone)]
pub struct BatchCache {
    encoders: Vec<EncoderCache>,
    head: HeadCache,
}

pub(crate) fn forward(model: &Model, clouds: &[&PointCloud]) -> ForwardOutput {
    let encoders: Vec<EncoderCache> = clouds.iter().map(|c| encode(model, c)).collect();
    let latents: Vec<Vec<f64>> = encoders.iter().map(|e| e.latent.clone()).collect();
    let head = head_forward(model, &latents);
    ForwardOutput {
        poses: head.poses.clone(),
        cache: BatchCache { encoders, head },
    }
}

fn grad_weights<'a>(grad: &'a mut [f64], l: &LayerSpec) -> (ArrayViewMut2<'a, f64>, ArrayViewMut1<'a, f64>) {
    let (w, b) = grad[l.weight_offset..l.bias_offset + l.output].split_at_mut(l.input * l.output);
    (
        ArrayViewMut2::from_shape((l.input, l.output), w).expect("layer layout"),
        ArrayViewMut1::from(b),
    )
}

/// Accumulates weight/bias gradients of one dense layer given the gradient
/// with respect to its pre-activation; returns the gradient with respect to
/// its input when requested.
fn dense_backward(
    values: &[f64],
    grad: &mut [f64],
    l: &LayerSpec,
    input: &Array2<f64>,
    d_pre: &Array2<f64>,
    need_input_grad: bool,
) -> Option<Array2<f64>> {
    let (mut gw, mut gb) = grad_weights(grad, l);
    general_mat_mul(1.0, &input.t(), d_pre, 1.0, &mut gw);
    gb += &d_pre.sum_axis(Axis(0));
    need_input_grad.then(|| d_pre.dot(&weights(values, l).t()))
}

pub(crate) fn backward(model: &Model, out: &ForwardOutput, pose_grads: &[Vec<f64>]) -> Vec<f64> {
    let p = &model.params;
    let cache = &out.cache;
    let mut grad = vec![0.0; p.values.len()];
    let batch = pose_grads.len();
    let out_dim = model.config.output_dim();

    // through the orientation normalization: (I - u u^T) / |v|
    let mut d = Array2::zeros((batch, out_dim));
    for (b, g) in pose_grads.iter().enumerate() {
        let raw = cache.head.raw.row(b);
        let mut row = d.row_mut(b);
        for k in 0..out_dim / 6 {
            let o = k * 6;
            for c in 0..3 {
                row[o + c] = g[o + c];
            }
            let v = [raw[o + 3], raw[o + 4], raw[o + 5]];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n > 0.0 {
                let u = [v[0] / n, v[1] / n, v[2] / n];
                let gu = [g[o + 3], g[o + 4], g[o + 5]];
                let dot = u[0] * gu[0] + u[1] * gu[1] + u[2] * gu[2];
                for c in 0..3 {
                    row[o + 3 + c] = (gu[c] - u[c] * dot) / n;
                }
            }
        }
    }

    // head, last layer first
    let head = &p.layers[p.encoder_layers..];
    for (i, l) in head.iter().enumerate().rev() {
        let input = &cache.head.acts[i];
        let d_in = dense_backward(&p.values, &mut grad, l, input, &d, true).unwrap();
        d = if i > 0 {
            // input came out of a ReLU
            let mut masked = d_in;
            masked.zip_mut_with(input, |g, &a| {
                if a <= 0.0 {
                    *g = 0.0
                }
            });
            masked
        } else {
            d_in
        };
    }

    // encoder: only points that win some channel receive gradient
    let enc = &p.layers[..p.encoder_layers];
    for (b, e) in cache.encoders.iter().enumerate() {
        let mut rows: Vec<usize> = e.argmax.clone();
        rows.sort_unstable();
        rows.dedup();
        let mut d_post = Array2::zeros((rows.len(), model.config.latent_dim));
        for (c, &winner) in e.argmax.iter().enumerate() {
            let r = rows.binary_search(&winner).unwrap();
            d_post[[r, c]] += d[[b, c]];
        }
        for (li, l) in enc.iter().enumerate().rev() {
            let post = e.acts[li + 1].select(Axis(0), &rows);
            let mut d_pre = d_post;
            d_pre.zip_mut_with(&post, |g, &a| {
                if a <= 0.0 {
                    *g = 0.0
                }
            });
            let input = e.acts[li].select(Axis(0), &rows);
            match dense_backward(&p.values, &mut grad, l, &input, &d_pre, li > 0) {
                Some(next) => d_post = next,
                None => break,
            }
        }
    }
    grad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use crate::learner::tests::tiny_config;
    use crate::learner::{Mode, ModelParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud(seed: u64, n: usize) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PointCloud::new(
            (0..n)
                .map(|_| Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        )
        .unwrap()
    }

    fn model(seed: u64) -> Model {
        let mut m = Model::new(tiny_config(Mode::Segments), seed).unwrap();
        // nonzero biases exercise the bias gradients too
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb1a5);
        for l in m.params.layers.clone() {
            for b in &mut m.params.values[l.bias_offset..l.bias_offset + l.output] {
                *b = rng.random_range(-0.1..0.1);
            }
        }
        m
    }

    #[test]
    fn latent_is_permutation_invariant() {
        let m = model(1);
        let c = cloud(2, 7);
        let mut rev = c.clone();
        rev.points.reverse();
        assert_eq!(m.encode(&c).unwrap(), m.encode(&rev).unwrap());
    }

    #[test]
    fn zero_weights_give_zero_latent() {
        let cfg = tiny_config(Mode::Segments);
        let m = Model::with_params(cfg.clone(), ModelParams::zeros(&cfg).unwrap()).unwrap();
        assert!(m.encode(&cloud(0, 7)).unwrap().iter().all(|&v| v == 0.0));
        // zero raw orientation falls back to the fixed axis
        let out = m.predict(&cloud(0, 7)).unwrap();
        assert!(out.poses().all(|p| p.orientation == Vec3::new(0.0, 0.0, 1.0)));
    }

    #[test]
    fn outputs_have_unit_orientations_and_shape() {
        let m = model(5);
        let out = m.predict(&cloud(3, 7)).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out.segments.iter().all(|s| s.len() == 3));
        assert!(out.poses().all(|p| (p.orientation.norm() - 1.0).abs() < 1e-12));
        assert!(m.predict(&cloud(3, 6)).is_err());
    }

    #[test]
    fn head_shape_for_full_size_slots() {
        let mut cfg = tiny_config(Mode::Segments);
        cfg.slots = 666;
        cfg.lambda = 4;
        cfg.head_hidden = vec![2];
        let m = Model::new(cfg, 0).unwrap();
        let set = m.decode(&[0.1; 5]).unwrap();
        assert_eq!(set.len(), 666);
        assert_eq!(set.to_flat().len(), 4 * 6 * 666);
    }

    fn functional(m: &Model, clouds: &[&PointCloud], coeffs: &[Vec<f64>]) -> f64 {
        let out = m.forward(clouds).unwrap();
        out.poses
            .iter()
            .zip(coeffs)
            .map(|(p, c)| p.iter().zip(c).map(|(a, b)| a * b + 0.5 * a * a * b).sum::<f64>())
            .sum()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for seed in 0..5 {
            let m = model(seed);
            assert!(m.params.len() <= 500);
            let c1 = cloud(10 + seed, 7);
            let c2 = cloud(20 + seed, 7);
            let clouds = [&c1, &c2];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dim = m.config.output_dim();
            let coeffs: Vec<Vec<f64>> = (0..2).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            let out = m.forward(&clouds).unwrap();
            let pose_grads: Vec<Vec<f64>> = out
                .poses
                .iter()
                .zip(&coeffs)
                .map(|(p, c)| p.iter().zip(c).map(|(a, b)| b + a * b).collect())
                .collect();
            let analytic = m.backward(&out, &pose_grads).unwrap();
            let h = 1e-6;
            let mut numeric = vec![0.0; analytic.len()];
            for i in 0..analytic.len() {
                let mut plus = m.clone();
                plus.params.values[i] += h;
                let mut minus = m.clone();
                minus.params.values[i] -= h;
                numeric[i] = (functional(&plus, &clouds, &coeffs) - functional(&minus, &clouds, &coeffs)) / (2.0 * h);
            }
            let diff: f64 = analytic.iter().zip(&numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
            let norm: f64 = numeric.iter().map(|n| n * n).sum::<f64>().sqrt();
            assert!(diff / norm < 1e-4, "seed {seed}: relative error {}", diff / norm);
        }
    }

    #[test]
    fn zero_pose_gradient_gives_zero_parameter_gradient() {
        let m = model(2);
        let c = cloud(1, 7);
        let out = m.forward(&[&c]).unwrap();
        let g = m.backward(&out, &[vec![0.0; m.config.output_dim()]]).unwrap();
        assert_eq!(g.len(), m.params.len());
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn orientation_gradient_is_orthogonal_to_output() {
        // a gradient parallel to the unit orientation has no effect on it
        let m = model(4);
        let c = cloud(4, 7);
        let out = m.forward(&[&c]).unwrap();
        let mut g = vec![0.0; m.config.output_dim()];
        for (gp, p) in g.chunks_exact_mut(6).zip(out.poses[0].chunks_exact(6)) {
            gp[3..6].copy_from_slice(&p[3..6]);
        }
        let grad = m.backward(&out, &[g]).unwrap();
        assert!(grad.iter().all(|v| v.abs() < 1e-12));
    }
}
