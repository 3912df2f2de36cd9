//! Mental-rotation pair verification: decide from embeddings whether two
//! views show the same object.

use crate::error::{Error, Result};
use crate::metrics::{auroc, roc_curve, ScoreSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationSetting {
    Easy,
    /// Positive pairs that a raw-pixel baseline already places close together
    /// are dropped; only the harder half remains.
    Hard,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairVerificationReport {
    pub setting: RotationSetting,
    pub auroc: f64,
    pub eer: f64,
    pub positive_fraction: f64,
    pub positive_count: usize,
    pub negative_count: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Evaluate same-object verification. Embedding rows must be unit-norm; the
/// pair score is their dot product (low cosine distance scores high).
/// Positives are same-object pairs across different view clusters; same-cluster
/// positives are ignored. Negatives are all cross-object pairs. The Hard
/// setting needs `baseline` vectors (raw pixels) to median-filter positives.
pub fn mental_rotation_eval(
    embeddings: &[Vec<f64>],
    object_ids: &[usize],
    view_cluster_ids: &[usize],
    setting: RotationSetting,
    baseline: Option<&[Vec<f64>]>,
) -> Result<PairVerificationReport> {
    let n = embeddings.len();
    if object_ids.len() != n || view_cluster_ids.len() != n {
        return Err(Error::invalid("embedding and id lengths differ"));
    }
    let mut positive_pairs = Vec::new();
    let mut negatives = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if object_ids[i] == object_ids[j] {
                if view_cluster_ids[i] != view_cluster_ids[j] {
                    positive_pairs.push((i, j));
                }
            } else {
                negatives.push(dot(&embeddings[i], &embeddings[j]));
            }
        }
    }
    if positive_pairs.is_empty() {
        return Err(Error::UndefinedMetric("no cross-cluster positive pairs".into()));
    }

    if setting == RotationSetting::Hard {
        let baseline = baseline
            .ok_or_else(|| Error::invalid("hard setting needs baseline vectors"))?;
        if baseline.len() != n {
            return Err(Error::invalid("baseline length mismatch"));
        }
        // keep the ceil(half) positives that are farthest in the baseline space
        let mut by_dist: Vec<(usize, f64)> = positive_pairs
            .iter()
            .enumerate()
            .map(|(idx, &(i, j))| (idx, sq_dist(&baseline[i], &baseline[j])))
            .collect();
        by_dist.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let keep = positive_pairs.len().div_ceil(2);
        let mut kept: Vec<(usize, usize)> =
            by_dist[..keep].iter().map(|&(idx, _)| positive_pairs[idx]).collect();
        kept.sort_unstable();
        positive_pairs = kept;
    }

    let positives: Vec<f64> =
        positive_pairs.iter().map(|&(i, j)| dot(&embeddings[i], &embeddings[j])).collect();
    let positive_count = positives.len();
    let negative_count = negatives.len();
    let scores = ScoreSet::new(positives, negatives)?;
    let a = auroc(&scores)?;
    let (_, eer) = roc_curve(&scores)?;
    Ok(PairVerificationReport {
        setting,
        auroc: a,
        eer,
        positive_fraction: positive_count as f64 / (positive_count + negative_count) as f64,
        positive_count,
        negative_count,
    })
}

pub fn summarize_rotation(easy: &PairVerificationReport, hard: &PairVerificationReport) -> String {
    format!(
        "pair verification (easy): auroc = {:.4}, eer = {:.4}, positives = {}\n\
         pair verification (hard): auroc = {:.4}, eer = {:.4}, positives = {}\n",
        easy.auroc, easy.eer, easy.positive_count, hard.auroc, hard.eer, hard.positive_count
    )
}
