//! Rank and classification statistics used by the evaluation protocols.

use crate::error::{Error, Result};

/// Scores split by ground-truth class.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet {
    pub positives: Vec<f64>,
    pub negatives: Vec<f64>,
}

impl ScoreSet {
    pub fn new(positives: Vec<f64>, negatives: Vec<f64>) -> Result<ScoreSet> {
        if positives.is_empty() || negatives.is_empty() {
            return Err(Error::UndefinedMetric("both classes must be nonempty".into()));
        }
        if positives.iter().chain(&negatives).any(|v| !v.is_finite()) {
            return Err(Error::UndefinedMetric("scores must be finite".into()));
        }
        Ok(ScoreSet { positives, negatives })
    }
}

/// Average ranks (1-based, ties averaged) of a slice.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Mann-Whitney AUROC: probability a random positive outscores a random
/// negative, with ties counted as one half. Computed from average ranks.
pub fn auroc(scores: &ScoreSet) -> Result<f64> {
    let np = scores.positives.len();
    let nn = scores.negatives.len();
    if np == 0 || nn == 0 {
        return Err(Error::UndefinedMetric("auroc needs both classes".into()));
    }
    let mut all = scores.positives.clone();
    all.extend_from_slice(&scores.negatives);
    let ranks = average_ranks(&all);
    let pos_rank_sum: f64 = ranks[..np].iter().sum();
    let u = pos_rank_sum - (np * (np + 1)) as f64 / 2.0;
    Ok(u / (np * nn) as f64)
}

/// One (threshold, FPR, TPR) operating point; thresholds classify score >= t
/// as positive.
#[derive(Debug, Clone, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
}

/// Full ROC over all score thresholds plus the equal-error rate, estimated as
/// the half total error rate at the best threshold (the value where the
/// false-positive and false-negative rates cross).
pub fn roc_curve(scores: &ScoreSet) -> Result<(RocCurve, f64)> {
    let np = scores.positives.len();
    let nn = scores.negatives.len();
    if np == 0 || nn == 0 {
        return Err(Error::UndefinedMetric("roc needs both classes".into()));
    }
    let mut thresholds: Vec<f64> = scores.positives.iter().chain(&scores.negatives).copied().collect();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();

    let mut points = vec![RocPoint { threshold: f64::INFINITY, fpr: 0.0, tpr: 0.0 }];
    let mut eer = f64::INFINITY;
    for &t in &thresholds {
        let tp = scores.positives.iter().filter(|&&s| s >= t).count();
        let fp = scores.negatives.iter().filter(|&&s| s >= t).count();
        let tpr = tp as f64 / np as f64;
        let fpr = fp as f64 / nn as f64;
        let fnr = 1.0 - tpr;
        eer = eer.min(0.5 * (fpr + fnr));
        points.push(RocPoint { threshold: t, fpr, tpr });
    }
    Ok((RocCurve { points }, eer))
}

/// Spearman rank correlation: Pearson correlation of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::UndefinedMetric("spearman inputs differ in length".into()));
    }
    if x.len() < 3 {
        return Err(Error::UndefinedMetric("spearman needs at least 3 points".into()));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    pearson(&rx, &ry)
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedMetric("correlation of a constant input".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Mean attribute response at each swept parameter value, for one background.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseCurve {
    pub background_id: usize,
    pub points: Vec<(f64, f64)>,
}

impl ResponseCurve {
    pub fn parameters(&self) -> Vec<f64> {
        self.points.iter().map(|&(p, _)| p).collect()
    }

    pub fn responses(&self) -> Vec<f64> {
        self.points.iter().map(|&(_, r)| r).collect()
    }
}

/// Across-background mean curve plus the per-parameter population standard
/// deviation after centering each background's curve at zero.
pub fn centered_deviation(curves: &[ResponseCurve]) -> Result<(Vec<f64>, Vec<f64>)> {
    if curves.is_empty() {
        return Err(Error::invalid("centered_deviation needs at least one curve"));
    }
    let grid = curves[0].parameters();
    for c in curves {
        if c.parameters() != grid {
            return Err(Error::invalid("response curves on mismatched parameter grids"));
        }
    }
    let k = grid.len();
    let mut mean = vec![0.0; k];
    for c in curves {
        for (i, &(_, r)) in c.points.iter().enumerate() {
            mean[i] += r;
        }
    }
    for m in &mut mean {
        *m /= curves.len() as f64;
    }
    // center each curve at zero, then take the per-parameter population
    // standard deviation across curves
    let centered: Vec<Vec<f64>> = curves
        .iter()
        .map(|c| {
            let offset: f64 = c.responses().iter().sum::<f64>() / k as f64;
            c.responses().iter().map(|r| r - offset).collect()
        })
        .collect();
    let n = curves.len() as f64;
    let std: Vec<f64> = (0..k)
        .map(|i| {
            let m: f64 = centered.iter().map(|c| c[i]).sum::<f64>() / n;
            (centered.iter().map(|c| (c[i] - m) * (c[i] - m)).sum::<f64>() / n).sqrt()
        })
        .collect();
    Ok((mean, std))
}

/// Max minus min of a response curve.
pub fn response_range(curve: &ResponseCurve) -> f64 {
    let rs = curve.responses();
    if rs.is_empty() {
        return 0.0;
    }
    let max = rs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = rs.iter().cloned().fold(f64::INFINITY, f64::min);
    max - min
}

/// Tri-state attribute label: present, absent, or unlabeled.
pub type TriState = Option<bool>;

/// Pairwise phi coefficients over an N×L tri-state label matrix. Entries with
/// a degenerate 2×2 table come back as NaN.
pub fn phi_correlation(labels: &[Vec<TriState>]) -> Result<Vec<Vec<f64>>> {
    let l = labels.first().map(|r| r.len()).unwrap_or(0);
    if l == 0 {
        return Err(Error::invalid("empty label matrix"));
    }
    let mut out = vec![vec![f64::NAN; l]; l];
    for a in 0..l {
        out[a][a] = 1.0;
        for b in (a + 1)..l {
            let mut n = [[0u64; 2]; 2]; // n[a_val][b_val]
            for row in labels {
                if let (Some(x), Some(y)) = (row[a], row[b]) {
                    n[x as usize][y as usize] += 1;
                }
            }
            let (n11, n00, n10, n01) =
                (n[1][1] as f64, n[0][0] as f64, n[1][0] as f64, n[0][1] as f64);
            let a1 = n11 + n10;
            let a0 = n01 + n00;
            let b1 = n11 + n01;
            let b0 = n10 + n00;
            let denom = (a1 * a0 * b1 * b0).sqrt();
            if denom > 0.0 {
                let phi = (n11 * n00 - n10 * n01) / denom;
                out[a][b] = phi;
                out[b][a] = phi;
            }
        }
    }
    Ok(out)
}
