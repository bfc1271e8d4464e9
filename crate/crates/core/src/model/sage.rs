use ndarray::{Array2, Zip};
use rand::Rng;

use super::context::GraphContext;
use crate::drpa::allreduce_sum;
use crate::error::{Error, Result};
use crate::gen::rng_from_seed;

/// `(agg + orig) / (in_deg + 1)`.
pub fn gcn_normalize(agg: &[f64], orig: &[f64], in_deg: usize) -> Vec<f64> {
    let den = (in_deg + 1) as f64;
    agg.iter().zip(orig).map(|(a, h)| (a + h) / den).collect()
}

#[derive(Clone, Debug)]
struct ForwardCache {
    epoch: usize,
    /// Per layer, per part: layer input, normalised aggregate, pre-activation.
    inputs: Vec<Vec<Array2<f64>>>,
    normed: Vec<Vec<Array2<f64>>>,
    pre: Vec<Vec<Array2<f64>>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    /// Summed over parts.
    pub weights: Vec<Array2<f64>>,
    /// Per part, when requested.
    pub input: Option<Vec<Array2<f64>>>,
}

/// GraphSAGE with the GCN aggregator: per layer, aggregate neighbors, add
/// the vertex's own row, divide by `in_degree + 1`, multiply by the layer
/// weight, and apply ReLU on all but the last layer.
#[derive(Clone, Debug)]
pub struct SageModel {
    weights: Vec<Array2<f64>>,
    cache: Option<ForwardCache>,
}

impl SageModel {
    /// Seeded uniform init in `±sqrt(6 / (fan_in + fan_out))`. `dims` is
    /// the width chain, e.g. `[f, h1, h2, l]`.
    pub fn new(dims: &[usize], seed: u64) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::InvalidParameter(format!("layer widths {dims:?}")));
        }
        let mut rng = rng_from_seed(seed);
        let weights = dims
            .windows(2)
            .map(|w| {
                let s = (6.0 / (w[0] + w[1]) as f64).sqrt();
                Array2::from_shape_simple_fn((w[0], w[1]), || rng.random_range(-s..s))
            })
            .collect();
        Ok(SageModel { weights, cache: None })
    }

    pub fn from_weights(weights: Vec<Array2<f64>>) -> Result<Self> {
        if weights.is_empty() || weights.windows(2).any(|w| w[0].ncols() != w[1].nrows()) {
            return Err(Error::DimensionMismatch("weight chain does not line up".into()));
        }
        Ok(SageModel { weights, cache: None })
    }

    pub fn weights(&self) -> &[Array2<f64>] {
        &self.weights
    }

    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.weights[0].nrows())
            .chain(self.weights.iter().map(|w| w.ncols()))
            .collect()
    }

    /// Per-part logits. Activations are kept for [`backward`](Self::backward).
    pub fn forward(&mut self, ctx: &mut GraphContext, epoch: usize, x: &[Array2<f64>]) -> Result<Vec<Array2<f64>>> {
        if x.len() != ctx.parts().len() {
            return Err(Error::LengthMismatch {
                expected: ctx.parts().len(),
                got: x.len(),
            });
        }
        for (p, xp) in ctx.parts().iter().zip(x) {
            if xp.nrows() != p.vertices.len() || xp.ncols() != self.weights[0].nrows() {
                return Err(Error::DimensionMismatch(format!(
                    "input is {}x{}, expected {}x{}",
                    xp.nrows(),
                    xp.ncols(),
                    p.vertices.len(),
                    self.weights[0].nrows()
                )));
            }
        }
        let last = self.weights.len() - 1;
        let mut cache = ForwardCache {
            epoch,
            inputs: Vec::new(),
            normed: Vec::new(),
            pre: Vec::new(),
        };
        let mut h: Vec<Array2<f64>> = x.to_vec();
        for (l, w) in self.weights.iter().enumerate() {
            let agg = ctx.aggregate(epoch, l, &h)?;
            let normed: Vec<Array2<f64>> = agg
                .into_iter()
                .zip(&h)
                .zip(ctx.parts())
                .map(|((mut a, hp), part)| {
                    a += hp;
                    for (mut row, &den) in a.rows_mut().into_iter().zip(&part.denom) {
                        row.mapv_inplace(|v| v / den);
                    }
                    a
                })
                .collect();
            let pre: Vec<Array2<f64>> = normed.iter().map(|n| n.dot(w)).collect();
            let next = if l < last {
                pre.iter().map(|z| z.mapv(|v| v.max(0.0))).collect()
            } else {
                pre.clone()
            };
            cache.inputs.push(std::mem::replace(&mut h, next));
            cache.normed.push(normed);
            cache.pre.push(pre);
        }
        self.cache = Some(cache);
        Ok(h)
    }

    /// Gradients of the loss whose logit gradient is `dlogits`. Weight
    /// gradients are summed over parts in part order.
    pub fn backward(&mut self, ctx: &mut GraphContext, dlogits: &[Array2<f64>], input_grad: bool) -> Result<Gradients> {
        let cache = self.cache.take().ok_or(Error::BackwardWithoutForward)?;
        let layers = self.weights.len();
        let mut grads = vec![Array2::zeros((0, 0)); layers];
        let mut dh: Vec<Array2<f64>> = dlogits.to_vec();
        let mut input = None;
        for l in (0..layers).rev() {
            let mut dz = dh;
            if l + 1 < layers {
                for (g, z) in dz.iter_mut().zip(&cache.pre[l]) {
                    Zip::from(g).and(z).for_each(|g, &z| {
                        if z <= 0.0 {
                            *g = 0.0;
                        }
                    });
                }
            }
            let w = &self.weights[l];
            let per_part: Vec<Vec<f64>> = cache.normed[l]
                .iter()
                .zip(&dz)
                .map(|(n, g)| n.t().dot(g).into_raw_vec_and_offset().0)
                .collect();
            let summed = allreduce_sum(&per_part)?;
            grads[l] = Array2::from_shape_vec(w.dim(), summed).expect("weight shape");

            if l == 0 && !input_grad {
                break;
            }
            let scaled: Vec<Array2<f64>> = dz
                .iter()
                .zip(ctx.parts())
                .map(|(g, part)| {
                    let mut s = g.dot(&w.t());
                    for (mut row, &den) in s.rows_mut().into_iter().zip(&part.denom) {
                        row.mapv_inplace(|v| v / den);
                    }
                    s
                })
                .collect();
            let through = ctx.aggregate_transposed(cache.epoch, layers + l, &scaled)?;
            dh = scaled.into_iter().zip(through).map(|(s, t)| s + t).collect();
            if l == 0 {
                input = Some(dh);
                break;
            }
        }
        Ok(Gradients { weights: grads, input })
    }

    /// `w <- w - lr * (grad + wd * w)`.
    pub fn sgd_step(&mut self, grads: &[Array2<f64>], lr: f64, wd: f64) -> Result<()> {
        if grads.len() != self.weights.len() || grads.iter().zip(&self.weights).any(|(g, w)| g.dim() != w.dim()) {
            return Err(Error::DimensionMismatch("gradient shapes do not match weights".into()));
        }
        for (w, g) in self.weights.iter_mut().zip(grads) {
            Zip::from(w).and(g).for_each(|w, &g| *w -= lr * (g + wd * *w));
        }
        Ok(())
    }
}
