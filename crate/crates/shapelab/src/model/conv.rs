//! A small convolutional variant of the two-headed model for activation-map
//! work: two 3x3 conv layers with tanh, global average pooling, then the same
//! attribute and embedding heads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::linalg::Mat;
use crate::model::loss::{self, TrainConfig, Triplet};
use crate::model::mlp::PROB_CLAMP;
use crate::metrics::TriState;
use crate::saliency::FeatureStack;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvConfig {
    pub height: usize,
    pub width: usize,
    pub in_channels: usize,
    pub mid_channels: usize,
    pub out_channels: usize,
    pub attr_dim: usize,
    pub embed_dim: usize,
}

impl Default for ConvConfig {
    fn default() -> Self {
        ConvConfig {
            height: 32,
            width: 32,
            in_channels: 3,
            mid_channels: 8,
            out_channels: 8,
            attr_dim: 12,
            embed_dim: 32,
        }
    }
}

/// Kernels are stored as matrices with one output channel per row and
/// in_channels*9 columns (3x3 taps, row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct ConvParams {
    pub cfg: ConvConfig,
    pub k1: Mat,
    pub b1: Mat,
    pub k2: Mat,
    pub b2: Mat,
    pub wa: Mat,
    pub ba: Mat,
    pub we: Mat,
    pub be: Mat,
}

impl ConvParams {
    pub fn init(cfg: ConvConfig, seed: u64) -> ConvParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s1 = (1.0 / (cfg.in_channels * 9) as f64).sqrt();
        let s2 = (1.0 / (cfg.mid_channels * 9) as f64).sqrt();
        let sh = (1.0 / cfg.out_channels as f64).sqrt();
        ConvParams {
            cfg,
            k1: Mat::randomized(cfg.mid_channels, cfg.in_channels * 9, s1, &mut rng),
            b1: Mat::zeros(1, cfg.mid_channels),
            k2: Mat::randomized(cfg.out_channels, cfg.mid_channels * 9, s2, &mut rng),
            b2: Mat::zeros(1, cfg.out_channels),
            wa: Mat::randomized(cfg.out_channels, cfg.attr_dim, sh, &mut rng),
            ba: Mat::zeros(1, cfg.attr_dim),
            we: Mat::randomized(cfg.out_channels, cfg.embed_dim, sh, &mut rng),
            // pooled features start near zero; a random bias keeps the raw
            // embedding norm well away from the normalization singularity
            be: Mat::randomized(1, cfg.embed_dim, 0.5, &mut rng),
        }
    }

    pub fn zeros_like(&self) -> ConvParams {
        let z = |m: &Mat| Mat::zeros(m.rows, m.cols);
        ConvParams {
            cfg: self.cfg,
            k1: z(&self.k1),
            b1: z(&self.b1),
            k2: z(&self.k2),
            b2: z(&self.b2),
            wa: z(&self.wa),
            ba: z(&self.ba),
            we: z(&self.we),
            be: z(&self.be),
        }
    }

    pub fn tensors(&self) -> [&Mat; 8] {
        [&self.k1, &self.b1, &self.k2, &self.b2, &self.wa, &self.ba, &self.we, &self.be]
    }

    pub fn tensors_mut(&mut self) -> [&mut Mat; 8] {
        [
            &mut self.k1,
            &mut self.b1,
            &mut self.k2,
            &mut self.b2,
            &mut self.wa,
            &mut self.ba,
            &mut self.we,
            &mut self.be,
        ]
    }

    /// Classifier weight vector over feature channels for one attribute.
    pub fn attr_channel_weights(&self, attribute: usize) -> Vec<f64> {
        (0..self.cfg.out_channels).map(|c| self.wa.at(c, attribute)).collect()
    }
}

/// Zero-padded 3x3 convolution followed by tanh.
fn conv3x3_tanh(input: &FeatureStack, kernels: &Mat, bias: &Mat) -> FeatureStack {
    let (h, w) = (input.height, input.width);
    let out_c = kernels.rows;
    let mut out = FeatureStack::zeros(out_c, h, w);
    for o in 0..out_c {
        let krow = kernels.row(o);
        for y in 0..h {
            for x in 0..w {
                let mut acc = bias.at(0, o);
                for i in 0..input.channels {
                    for dy in 0..3usize {
                        let yy = y as isize + dy as isize - 1;
                        if yy < 0 || yy >= h as isize {
                            continue;
                        }
                        for dx in 0..3usize {
                            let xx = x as isize + dx as isize - 1;
                            if xx < 0 || xx >= w as isize {
                                continue;
                            }
                            acc += krow[i * 9 + dy * 3 + dx]
                                * input.at(i, yy as usize, xx as usize);
                        }
                    }
                }
                let idx = out.idx(o, y, x);
                out.values[idx] = acc.tanh();
            }
        }
    }
    out
}

/// Gradient of a conv3x3_tanh layer. `d_out` is the gradient at the post-tanh
/// output; returns the input gradient and accumulates kernel/bias gradients.
fn conv3x3_tanh_backward(
    input: &FeatureStack,
    output: &FeatureStack,
    kernels: &Mat,
    d_out: &FeatureStack,
    d_kernels: &mut Mat,
    d_bias: &mut Mat,
) -> FeatureStack {
    let (h, w) = (input.height, input.width);
    let mut d_in = FeatureStack::zeros(input.channels, h, w);
    for o in 0..output.channels {
        let krow = kernels.row(o);
        for y in 0..h {
            for x in 0..w {
                let f = output.at(o, y, x);
                let g = d_out.at(o, y, x) * (1.0 - f * f);
                if g == 0.0 {
                    continue;
                }
                *d_bias.at_mut(0, o) += g;
                for i in 0..input.channels {
                    for dy in 0..3usize {
                        let yy = y as isize + dy as isize - 1;
                        if yy < 0 || yy >= h as isize {
                            continue;
                        }
                        for dx in 0..3usize {
                            let xx = x as isize + dx as isize - 1;
                            if xx < 0 || xx >= w as isize {
                                continue;
                            }
                            let tap = i * 9 + dy * 3 + dx;
                            *d_kernels.at_mut(o, tap) += g * input.at(i, yy as usize, xx as usize);
                            let di = d_in.idx(i, yy as usize, xx as usize);
                            d_in.values[di] += g * krow[tap];
                        }
                    }
                }
            }
        }
    }
    d_in
}

pub struct ConvForward {
    pub probs: Mat,
    pub embeddings: Mat,
    /// Post-tanh features of the last conv layer, one stack per sample.
    pub features: Vec<FeatureStack>,
    mids: Vec<FeatureStack>,
    pooled: Mat,
    embed_norms: Vec<f64>,
}

pub fn conv_forward(params: &ConvParams, images: &[FeatureStack]) -> Result<ConvForward> {
    let cfg = &params.cfg;
    for img in images {
        if img.channels != cfg.in_channels || img.height != cfg.height || img.width != cfg.width {
            return Err(Error::invalid("image dimensions do not match conv model config"));
        }
    }
    let n = images.len();
    let mut mids = Vec::with_capacity(n);
    let mut features = Vec::with_capacity(n);
    let mut pooled = Mat::zeros(n, cfg.out_channels);
    let area = (cfg.height * cfg.width) as f64;
    for (r, img) in images.iter().enumerate() {
        let mid = conv3x3_tanh(img, &params.k1, &params.b1);
        let feat = conv3x3_tanh(&mid, &params.k2, &params.b2);
        for c in 0..cfg.out_channels {
            *pooled.at_mut(r, c) = feat.channel(c).iter().sum::<f64>() / area;
        }
        mids.push(mid);
        features.push(feat);
    }

    let mut probs = pooled.matmul(&params.wa);
    probs.add_row_broadcast(params.ba.row(0));
    probs.map_inplace(|z| (1.0 / (1.0 + (-z).exp())).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP));

    let mut raw = pooled.matmul(&params.we);
    raw.add_row_broadcast(params.be.row(0));
    let mut embeddings = raw;
    let mut embed_norms = Vec::with_capacity(n);
    for r in 0..n {
        let row = &mut embeddings.data[r * cfg.embed_dim..(r + 1) * cfg.embed_dim];
        let nm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nm == 0.0 || !nm.is_finite() {
            return Err(Error::NumericFailure("embedding norm is zero or non-finite".into()));
        }
        row.iter_mut().for_each(|v| *v /= nm);
        embed_norms.push(nm);
    }
    Ok(ConvForward { probs, embeddings, features, mids, pooled, embed_norms })
}

/// Gradient of the combined loss for the conv model with a fixed triplet set.
pub fn conv_gradients(
    params: &ConvParams,
    images: &[FeatureStack],
    labels: &[Vec<TriState>],
    triplets: &[Triplet],
    cfg: &TrainConfig,
) -> Result<(f64, ConvParams)> {
    let fwd = conv_forward(params, images)?;
    let attr = loss::attribute_loss(labels, &fwd.probs, cfg.normalize_attr)?;
    let (trip, _) = loss::triplet_loss(&fwd.embeddings, triplets, cfg.margin);
    let combined = attr + cfg.triplet_weight * trip;

    let mut grads = params.zeros_like();
    let labeled: usize = labels.iter().flatten().filter(|l| l.is_some()).count();
    let attr_scale = if cfg.normalize_attr && labeled > 0 { 1.0 / labeled as f64 } else { 1.0 };
    let mut d_logits = Mat::zeros(fwd.probs.rows, fwd.probs.cols);
    for (i, row) in labels.iter().enumerate() {
        for (l, lab) in row.iter().enumerate() {
            if let Some(y) = lab {
                let target = if *y { 1.0 } else { 0.0 };
                *d_logits.at_mut(i, l) = (fwd.probs.at(i, l) - target) * attr_scale;
            }
        }
    }

    let mut d_embed = Mat::zeros(fwd.embeddings.rows, fwd.embeddings.cols);
    if !triplets.is_empty() {
        let w = cfg.triplet_weight / triplets.len() as f64;
        let cols = fwd.embeddings.cols;
        for t in triplets {
            let ea = fwd.embeddings.row(t.anchor).to_vec();
            let ep = fwd.embeddings.row(t.positive).to_vec();
            let en = fwd.embeddings.row(t.negative).to_vec();
            let d_ap: f64 = ea.iter().zip(&ep).map(|(a, b)| (a - b) * (a - b)).sum();
            let d_an: f64 = ea.iter().zip(&en).map(|(a, b)| (a - b) * (a - b)).sum();
            if d_ap - d_an + cfg.margin <= 0.0 {
                continue;
            }
            for c in 0..cols {
                *d_embed.at_mut(t.anchor, c) += w * 2.0 * (en[c] - ep[c]);
                *d_embed.at_mut(t.positive, c) += w * 2.0 * (ep[c] - ea[c]);
                *d_embed.at_mut(t.negative, c) += w * 2.0 * (ea[c] - en[c]);
            }
        }
    }

    // heads
    grads.wa = fwd.pooled.t_matmul(&d_logits);
    grads.ba = Mat { rows: 1, cols: d_logits.cols, data: d_logits.col_sums() };
    let mut d_raw = Mat::zeros(d_embed.rows, d_embed.cols);
    for r in 0..d_embed.rows {
        let e = fwd.embeddings.row(r);
        let de = d_embed.row(r);
        let proj: f64 = e.iter().zip(de).map(|(a, b)| a * b).sum();
        let inv_n = 1.0 / fwd.embed_norms[r];
        for c in 0..d_embed.cols {
            *d_raw.at_mut(r, c) = (de[c] - e[c] * proj) * inv_n;
        }
    }
    grads.we = fwd.pooled.t_matmul(&d_raw);
    grads.be = Mat { rows: 1, cols: d_raw.cols, data: d_raw.col_sums() };

    // through pooling and the conv stack
    let mut d_pooled = d_logits.matmul_t(&params.wa);
    let demb = d_raw.matmul_t(&params.we);
    for (a, b) in d_pooled.data.iter_mut().zip(&demb.data) {
        *a += b;
    }
    let area = (params.cfg.height * params.cfg.width) as f64;
    for (r, img) in images.iter().enumerate() {
        let mut d_feat =
            FeatureStack::zeros(params.cfg.out_channels, params.cfg.height, params.cfg.width);
        for c in 0..params.cfg.out_channels {
            let g = d_pooled.at(r, c) / area;
            let base = c * params.cfg.height * params.cfg.width;
            d_feat.values[base..base + params.cfg.height * params.cfg.width]
                .iter_mut()
                .for_each(|v| *v = g);
        }
        let d_mid = conv3x3_tanh_backward(
            &fwd.mids[r],
            &fwd.features[r],
            &params.k2,
            &d_feat,
            &mut grads.k2,
            &mut grads.b2,
        );
        conv3x3_tanh_backward(img, &fwd.mids[r], &params.k1, &d_mid, &mut grads.k1, &mut grads.b1);
    }
    if !grads.tensors().iter().all(|t| t.is_finite()) {
        return Err(Error::NumericFailure("non-finite conv gradient".into()));
    }
    Ok((combined, grads))
}

/// Plain SGD + momentum training on a fixed labeled set, attribute loss only.
pub fn train_conv_attributes(
    mut params: ConvParams,
    images: &[FeatureStack],
    labels: &[Vec<TriState>],
    cfg: &TrainConfig,
    steps: usize,
) -> Result<ConvParams> {
    let mut velocity = params.zeros_like();
    for _ in 0..steps {
        let (_, grads) = conv_gradients(&params, images, labels, &[], cfg)?;
        for (i, lr) in [
            cfg.lr_trunk,
            cfg.lr_trunk,
            cfg.lr_trunk,
            cfg.lr_trunk,
            cfg.lr_attr,
            cfg.lr_attr,
            cfg.lr_embed,
            cfg.lr_embed,
        ]
        .into_iter()
        .enumerate()
        {
            let g = grads.tensors()[i].data.clone();
            let v = &mut velocity.tensors_mut()[i].data;
            for (vv, gv) in v.iter_mut().zip(&g) {
                *vv = cfg.momentum * *vv + gv;
            }
            let v = velocity.tensors()[i].data.clone();
            for (pv, vv) in params.tensors_mut()[i].data.iter_mut().zip(&v) {
                *pv -= lr * vv;
            }
        }
    }
    Ok(params)
}

/// Convert a raster image to a 3-channel zero-centered feature stack.
pub fn image_to_stack(image: &crate::render::RasterImage) -> FeatureStack {
    let mut out = FeatureStack::zeros(3, image.height, image.width);
    for y in 0..image.height {
        for x in 0..image.width {
            let c = image.pixel(x, y);
            let i0 = out.idx(0, y, x);
            let i1 = out.idx(1, y, x);
            let i2 = out.idx(2, y, x);
            out.values[i0] = c.r - 0.5;
            out.values[i1] = c.g - 0.5;
            out.values[i2] = c.b - 0.5;
        }
    }
    out
}
