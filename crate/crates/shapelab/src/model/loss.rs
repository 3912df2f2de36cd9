//! Training objectives: masked attribute cross-entropy, a triplet hinge on
//! unit-norm embeddings, and their weighted combination, plus the analytic
//! gradient of the whole thing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::TriState;
use crate::model::linalg::Mat;
use crate::model::mlp::{self, ForwardCache, MlpParams, PredictionBatch};

/// Sample indices into a batch; anchor and positive share an object id, the
/// negative comes from a different object.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triplet {
    pub anchor: usize,
    pub positive: usize,
    pub negative: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub margin: f64,
    pub triplet_weight: f64,
    pub lr_trunk: f64,
    pub lr_attr: f64,
    pub lr_embed: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Normalize the attribute term by the number of labeled entries.
    pub normalize_attr: bool,
    pub mining: MiningMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MiningMode {
    SemiHard,
    HardestNegative,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            margin: 0.1,
            triplet_weight: 3.0,
            lr_trunk: 1e-3,
            lr_attr: 1e-3,
            lr_embed: 1e-2,
            momentum: 0.9,
            batch_size: 128,
            epochs: 30,
            seed: 0,
            normalize_attr: true,
            mining: MiningMode::SemiHard,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.margin <= 0.0 || self.triplet_weight <= 0.0 {
            return Err(Error::invalid("margin and triplet weight must be positive"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::invalid("momentum must lie in [0, 1)"));
        }
        if self.lr_trunk <= 0.0 || self.lr_attr <= 0.0 || self.lr_embed <= 0.0 {
            return Err(Error::invalid("learning rates must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be positive"));
        }
        Ok(())
    }
}

/// Masked cross-entropy over labeled entries. `None` labels contribute
/// nothing. Normalized by the labeled count when requested; zero when nothing
/// is labeled.
pub fn attribute_loss(labels: &[Vec<TriState>], probs: &Mat, normalize: bool) -> Result<f64> {
    if labels.len() != probs.rows || labels.iter().any(|l| l.len() != probs.cols) {
        return Err(Error::invalid("label matrix shape does not match probabilities"));
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for (i, row) in labels.iter().enumerate() {
        for (l, lab) in row.iter().enumerate() {
            let Some(y) = lab else { continue };
            let p = probs.at(i, l);
            if p <= 0.0 || p >= 1.0 {
                return Err(Error::NumericFailure("probability outside (0,1) in loss".into()));
            }
            sum -= if *y { p.ln() } else { (1.0 - p).ln() };
            count += 1;
        }
    }
    if count == 0 {
        return Ok(0.0);
    }
    Ok(if normalize { sum / count as f64 } else { sum })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Mean hinge over triplets with squared Euclidean distances. Returns the
/// loss and a flag marking the degenerate empty-triplet case.
pub fn triplet_loss(embeddings: &Mat, triplets: &[Triplet], margin: f64) -> (f64, bool) {
    if triplets.is_empty() {
        return (0.0, true);
    }
    let mut sum = 0.0;
    for t in triplets {
        let d_ap = sq_dist(embeddings.row(t.anchor), embeddings.row(t.positive));
        let d_an = sq_dist(embeddings.row(t.anchor), embeddings.row(t.negative));
        sum += (d_ap - d_an + margin).max(0.0);
    }
    (sum / triplets.len() as f64, false)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParts {
    pub attribute: f64,
    pub triplet: f64,
    pub combined: f64,
    /// True when no triplets were available and the triplet term defaulted to 0.
    pub empty_triplets: bool,
}

pub fn combined_loss(
    labels: &[Vec<TriState>],
    pred: &PredictionBatch,
    triplets: &[Triplet],
    cfg: &TrainConfig,
) -> Result<LossParts> {
    let attribute = attribute_loss(labels, &pred.probs, cfg.normalize_attr)?;
    let (triplet, empty_triplets) = triplet_loss(&pred.embeddings, triplets, cfg.margin);
    Ok(LossParts {
        attribute,
        triplet,
        combined: attribute + cfg.triplet_weight * triplet,
        empty_triplets,
    })
}

/// Analytic gradient of the combined loss with respect to every parameter,
/// for a fixed triplet set. Returns the loss breakdown alongside.
pub fn gradients(
    params: &MlpParams,
    x: &Mat,
    labels: &[Vec<TriState>],
    triplets: &[Triplet],
    cfg: &TrainConfig,
) -> Result<(LossParts, MlpParams)> {
    let (pred, cache) = mlp::forward(params, x)?;
    let parts = combined_loss(labels, &pred, triplets, cfg)?;
    let grads = gradients_from_forward(params, &cache, &pred, labels, triplets, cfg)?;
    if !grads.is_finite() {
        return Err(Error::NumericFailure("non-finite gradient".into()));
    }
    Ok((parts, grads))
}

pub fn gradients_from_forward(
    params: &MlpParams,
    cache: &ForwardCache,
    pred: &PredictionBatch,
    labels: &[Vec<TriState>],
    triplets: &[Triplet],
    cfg: &TrainConfig,
) -> Result<MlpParams> {
    // attribute head gradient at the logits: sigmoid + cross-entropy collapse
    // to P - Y over labeled entries
    let labeled: usize = labels.iter().flatten().filter(|l| l.is_some()).count();
    let attr_scale = if cfg.normalize_attr && labeled > 0 { 1.0 / labeled as f64 } else { 1.0 };
    let mut d_logits = Mat::zeros(pred.probs.rows, pred.probs.cols);
    for (i, row) in labels.iter().enumerate() {
        for (l, lab) in row.iter().enumerate() {
            if let Some(y) = lab {
                let target = if *y { 1.0 } else { 0.0 };
                *d_logits.at_mut(i, l) = (pred.probs.at(i, l) - target) * attr_scale;
            }
        }
    }

    // triplet gradient at the normalized embeddings
    let mut d_embed = Mat::zeros(pred.embeddings.rows, pred.embeddings.cols);
    if !triplets.is_empty() {
        let w = cfg.triplet_weight / triplets.len() as f64;
        let cols = pred.embeddings.cols;
        for t in triplets {
            let ea = pred.embeddings.row(t.anchor);
            let ep = pred.embeddings.row(t.positive);
            let en = pred.embeddings.row(t.negative);
            let d_ap = sq_dist(ea, ep);
            let d_an = sq_dist(ea, en);
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

    Ok(mlp::backward(params, cache, pred, &d_logits, &d_embed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::mlp::MlpConfig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn none_row(l: usize) -> Vec<TriState> {
        vec![None; l]
    }

    #[test]
    fn attribute_loss_hand_cases() {
        // all unlabeled
        let probs = Mat::from_rows(vec![vec![0.3, 0.8]]);
        assert_eq!(attribute_loss(&[none_row(2)], &probs, true).unwrap(), 0.0);

        // one entry, Y=1, P=0.5
        let probs = Mat::from_rows(vec![vec![0.5, 0.9]]);
        let labels = vec![vec![Some(true), None]];
        let loss = attribute_loss(&labels, &probs, true).unwrap();
        assert!((loss - 0.5f64.ln().abs()).abs() < 1e-12);

        // masked entry does not matter
        let probs2 = Mat::from_rows(vec![vec![0.5, 0.1]]);
        assert_eq!(loss, attribute_loss(&labels, &probs2, true).unwrap());
    }

    #[test]
    fn attribute_loss_rejects_saturated_probs() {
        let probs = Mat::from_rows(vec![vec![1.0]]);
        assert!(attribute_loss(&[vec![Some(true)]], &probs, true).is_err());
    }

    #[test]
    fn triplet_loss_hand_cases() {
        // margin satisfied: D(a,p)=0, D(a,n)=0.5
        let e = Mat::from_rows(vec![
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![0.75, (1.0f64 - 0.75 * 0.75).sqrt()],
        ]);
        let d_an = sq_dist(e.row(0), e.row(2));
        assert!((d_an - 0.5).abs() < 1e-12);
        let t = [Triplet { anchor: 0, positive: 1, negative: 2 }];
        let (loss, empty) = triplet_loss(&e, &t, 0.1);
        assert_eq!(loss, 0.0);
        assert!(!empty);

        // identical a=p=n gives exactly the margin
        let t_same = [Triplet { anchor: 0, positive: 1, negative: 1 }];
        assert_eq!(triplet_loss(&e, &t_same, 0.1).0, 0.1);

        // empty list flags a warning
        assert_eq!(triplet_loss(&e, &[], 0.1), (0.0, true));
    }

    #[test]
    fn combined_loss_composition() {
        // attr term -ln 0.5 and a violated triplet of hinge 0.2 at weight 3
        let probs = Mat::from_rows(vec![vec![0.5], vec![0.5], vec![0.5]]);
        // place points on the unit circle with D(a,p)=0.3, D(a,n)=0.2
        let angle = |d: f64| 2.0 * ((d / 4.0f64).sqrt()).asin();
        let (ap, an) = (angle(0.3), angle(0.2));
        let e = Mat::from_rows(vec![
            vec![1.0, 0.0],
            vec![ap.cos(), ap.sin()],
            vec![an.cos(), an.sin()],
        ]);
        assert!((sq_dist(e.row(0), e.row(1)) - 0.3).abs() < 1e-12);
        assert!((sq_dist(e.row(0), e.row(2)) - 0.2).abs() < 1e-12);
        let pred = PredictionBatch { probs, embeddings: e };
        let labels = vec![vec![Some(true)], none_row(1), none_row(1)];
        let t = [Triplet { anchor: 0, positive: 1, negative: 2 }];
        let cfg = TrainConfig::default();
        let parts = combined_loss(&labels, &pred, &t, &cfg).unwrap();
        assert!((parts.triplet - 0.2).abs() < 1e-12);
        assert!((parts.combined - (0.5f64.ln().abs() + 3.0 * 0.2)).abs() < 1e-12);
        assert!((parts.combined - 1.2931).abs() < 1e-3);
    }

    fn toy_setup(seed: u64) -> (MlpParams, Mat, Vec<Vec<TriState>>, Vec<Triplet>) {
        let cfg = MlpConfig { input_dim: 3, hidden1: 4, hidden2: 3, attr_dim: 2, embed_dim: 2 };
        let params = MlpParams::init(cfg, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
        let x = Mat::randomized(4, 3, 1.0, &mut rng);
        let mut labels = Vec::new();
        for _ in 0..4 {
            labels.push(
                (0..2)
                    .map(|_| match rng.gen_range(0..3) {
                        0 => Some(true),
                        1 => Some(false),
                        _ => None,
                    })
                    .collect(),
            );
        }
        let triplets = vec![
            Triplet { anchor: 0, positive: 1, negative: 2 },
            Triplet { anchor: 2, positive: 3, negative: 0 },
        ];
        (params, x, labels, triplets)
    }

    /// Central finite differences on every coordinate of every tensor.
    fn finite_diff_check(seed: u64) -> f64 {
        let (params, x, labels, triplets) = toy_setup(seed);
        let cfg = TrainConfig::default();
        let (_, grads) = gradients(&params, &x, &labels, &triplets, &cfg).unwrap();
        let h = 1e-5;
        let mut worst = 0.0f64;
        for ti in 0..8 {
            let n = params.tensors()[ti].0.data.len();
            for i in 0..n {
                let mut plus = params.clone();
                plus.tensors_mut()[ti].0.data[i] += h;
                let mut minus = params.clone();
                minus.tensors_mut()[ti].0.data[i] -= h;
                let lp = eval(&plus, &x, &labels, &triplets, &cfg);
                let lm = eval(&minus, &x, &labels, &triplets, &cfg);
                let numeric = (lp - lm) / (2.0 * h);
                let analytic = grads.tensors()[ti].0.data[i];
                let denom = numeric.abs().max(analytic.abs()).max(1e-4);
                worst = worst.max((numeric - analytic).abs() / denom);
            }
        }
        worst
    }

    fn eval(
        params: &MlpParams,
        x: &Mat,
        labels: &[Vec<TriState>],
        triplets: &[Triplet],
        cfg: &TrainConfig,
    ) -> f64 {
        let (pred, _) = mlp::forward(params, x).unwrap();
        combined_loss(labels, &pred, triplets, cfg).unwrap().combined
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for seed in 0..20u64 {
            let worst = finite_diff_check(seed);
            assert!(worst < 1e-5, "seed {seed}: worst relative error {worst:.3e}");
        }
    }

    #[test]
    fn unlabeled_and_tripletless_batch_has_zero_gradient() {
        let (params, x, _, _) = toy_setup(3);
        let labels = vec![none_row(2); 4];
        let cfg = TrainConfig::default();
        let (parts, grads) = gradients(&params, &x, &labels, &[], &cfg).unwrap();
        assert_eq!(parts.combined, 0.0);
        for (t, _) in grads.tensors() {
            assert!(t.data.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = TrainConfig::default();
        cfg.validate().unwrap();
        cfg.momentum = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = TrainConfig::default();
        cfg.margin = 0.0;
        assert!(cfg.validate().is_err());
    }
}
