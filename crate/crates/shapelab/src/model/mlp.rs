//! The two-headed toy model: a small fully connected trunk that branches
//! into per-attribute sigmoid probabilities and a unit-normalized embedding.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::linalg::Mat;

/// Sigmoid outputs are clamped into this open interval before any logarithm.
pub const PROB_CLAMP: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpConfig {
    pub input_dim: usize,
    pub hidden1: usize,
    pub hidden2: usize,
    pub attr_dim: usize,
    pub embed_dim: usize,
}

impl Default for MlpConfig {
    fn default() -> Self {
        // 32x32 RGB input, 12 attributes, 32D embedding
        MlpConfig { input_dim: 32 * 32 * 3, hidden1: 256, hidden2: 128, attr_dim: 12, embed_dim: 32 }
    }
}

/// Which learning-rate group a tensor belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamGroup {
    Trunk,
    AttrHead,
    EmbedHead,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub cfg: MlpConfig,
    pub w1: Mat,
    pub b1: Mat,
    pub w2: Mat,
    pub b2: Mat,
    pub wa: Mat,
    pub ba: Mat,
    pub we: Mat,
    pub be: Mat,
}

impl MlpParams {
    pub fn init(cfg: MlpConfig, seed: u64) -> MlpParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s1 = (1.0 / cfg.input_dim as f64).sqrt();
        let s2 = (1.0 / cfg.hidden1 as f64).sqrt();
        let sh = (1.0 / cfg.hidden2 as f64).sqrt();
        MlpParams {
            cfg,
            w1: Mat::randomized(cfg.input_dim, cfg.hidden1, s1, &mut rng),
            b1: Mat::zeros(1, cfg.hidden1),
            w2: Mat::randomized(cfg.hidden1, cfg.hidden2, s2, &mut rng),
            b2: Mat::zeros(1, cfg.hidden2),
            wa: Mat::randomized(cfg.hidden2, cfg.attr_dim, sh, &mut rng),
            ba: Mat::zeros(1, cfg.attr_dim),
            we: Mat::randomized(cfg.hidden2, cfg.embed_dim, sh, &mut rng),
            be: Mat::zeros(1, cfg.embed_dim),
        }
    }

    pub fn zeros_like(&self) -> MlpParams {
        MlpParams {
            cfg: self.cfg,
            w1: Mat::zeros(self.w1.rows, self.w1.cols),
            b1: Mat::zeros(self.b1.rows, self.b1.cols),
            w2: Mat::zeros(self.w2.rows, self.w2.cols),
            b2: Mat::zeros(self.b2.rows, self.b2.cols),
            wa: Mat::zeros(self.wa.rows, self.wa.cols),
            ba: Mat::zeros(self.ba.rows, self.ba.cols),
            we: Mat::zeros(self.we.rows, self.we.cols),
            be: Mat::zeros(self.be.rows, self.be.cols),
        }
    }

    pub fn tensors(&self) -> [(&Mat, ParamGroup); 8] {
        [
            (&self.w1, ParamGroup::Trunk),
            (&self.b1, ParamGroup::Trunk),
            (&self.w2, ParamGroup::Trunk),
            (&self.b2, ParamGroup::Trunk),
            (&self.wa, ParamGroup::AttrHead),
            (&self.ba, ParamGroup::AttrHead),
            (&self.we, ParamGroup::EmbedHead),
            (&self.be, ParamGroup::EmbedHead),
        ]
    }

    pub fn tensors_mut(&mut self) -> [(&mut Mat, ParamGroup); 8] {
        [
            (&mut self.w1, ParamGroup::Trunk),
            (&mut self.b1, ParamGroup::Trunk),
            (&mut self.w2, ParamGroup::Trunk),
            (&mut self.b2, ParamGroup::Trunk),
            (&mut self.wa, ParamGroup::AttrHead),
            (&mut self.ba, ParamGroup::AttrHead),
            (&mut self.we, ParamGroup::EmbedHead),
            (&mut self.be, ParamGroup::EmbedHead),
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|(m, _)| m.is_finite())
    }
}

/// Attribute probabilities and unit-norm embeddings for a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionBatch {
    pub probs: Mat,
    pub embeddings: Mat,
}

/// Intermediate activations kept for the backward pass.
pub struct ForwardCache {
    pub x: Mat,
    pub h1: Mat,
    pub h2: Mat,
    pub raw_embed: Mat,
    pub embed_norms: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Forward pass. Probabilities come out strictly inside (0,1); embedding rows
/// are exactly unit-normalized.
pub fn forward(params: &MlpParams, x: &Mat) -> Result<(PredictionBatch, ForwardCache)> {
    if x.cols != params.cfg.input_dim {
        return Err(Error::invalid(format!(
            "input has {} features, model expects {}",
            x.cols, params.cfg.input_dim
        )));
    }
    let mut h1 = x.matmul(&params.w1);
    h1.add_row_broadcast(params.b1.row(0));
    h1.map_inplace(f64::tanh);
    let mut h2 = h1.matmul(&params.w2);
    h2.add_row_broadcast(params.b2.row(0));
    h2.map_inplace(f64::tanh);

    let mut probs = h2.matmul(&params.wa);
    probs.add_row_broadcast(params.ba.row(0));
    probs.map_inplace(|z| sigmoid(z).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP));

    let mut raw_embed = h2.matmul(&params.we);
    raw_embed.add_row_broadcast(params.be.row(0));
    let mut embeddings = raw_embed.clone();
    let mut embed_norms = Vec::with_capacity(x.rows);
    for r in 0..embeddings.rows {
        let row = &mut embeddings.data[r * embeddings.cols..(r + 1) * embeddings.cols];
        let n = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NumericFailure("embedding norm is zero or non-finite".into()));
        }
        for v in row.iter_mut() {
            *v /= n;
        }
        embed_norms.push(n);
    }
    if !probs.is_finite() || !embeddings.is_finite() {
        return Err(Error::NumericFailure("non-finite activation".into()));
    }
    Ok((
        PredictionBatch { probs, embeddings },
        ForwardCache { x: x.clone(), h1, h2, raw_embed, embed_norms },
    ))
}

/// Backward pass from head-level gradients down to every parameter.
///
/// `d_logits` is the gradient at the attribute pre-sigmoid logits;
/// `d_embed` is the gradient at the normalized embeddings.
pub fn backward(
    params: &MlpParams,
    cache: &ForwardCache,
    pred: &PredictionBatch,
    d_logits: &Mat,
    d_embed: &Mat,
) -> MlpParams {
    let mut grads = params.zeros_like();

    // attribute head
    grads.wa = cache.h2.t_matmul(d_logits);
    grads.ba = Mat { rows: 1, cols: d_logits.cols, data: d_logits.col_sums() };

    // embedding normalization: d_raw = (d_e - e (e . d_e)) / ||raw||
    let mut d_raw = Mat::zeros(d_embed.rows, d_embed.cols);
    for r in 0..d_embed.rows {
        let e = pred.embeddings.row(r);
        let de = d_embed.row(r);
        let proj: f64 = e.iter().zip(de).map(|(a, b)| a * b).sum();
        let inv_n = 1.0 / cache.embed_norms[r];
        for c in 0..d_embed.cols {
            *d_raw.at_mut(r, c) = (de[c] - e[c] * proj) * inv_n;
        }
    }
    grads.we = cache.h2.t_matmul(&d_raw);
    grads.be = Mat { rows: 1, cols: d_raw.cols, data: d_raw.col_sums() };

    // into the trunk: d_h2 = d_logits Wa^T + d_raw We^T, through tanh
    let mut d_h2 = d_logits.matmul_t(&params.wa);
    let d_h2_emb = d_raw.matmul_t(&params.we);
    for (a, b) in d_h2.data.iter_mut().zip(&d_h2_emb.data) {
        *a += b;
    }
    for (g, &h) in d_h2.data.iter_mut().zip(&cache.h2.data) {
        *g *= 1.0 - h * h;
    }
    grads.w2 = cache.h1.t_matmul(&d_h2);
    grads.b2 = Mat { rows: 1, cols: d_h2.cols, data: d_h2.col_sums() };

    let mut d_h1 = d_h2.matmul_t(&params.w2);
    for (g, &h) in d_h1.data.iter_mut().zip(&cache.h1.data) {
        *g *= 1.0 - h * h;
    }
    grads.w1 = cache.x.t_matmul(&d_h1);
    grads.b1 = Mat { rows: 1, cols: d_h1.cols, data: d_h1.col_sums() };

    grads
}
