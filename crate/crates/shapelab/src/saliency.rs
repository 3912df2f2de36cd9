//! Class-activation maps over spatial features and their per-pixel
//! localization score.

use crate::error::{Error, Result};
use crate::metrics::{self, ScoreSet};

/// Channel-major spatial feature block, values indexed [c][h][w].
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStack {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub values: Vec<f64>,
}

impl FeatureStack {
    pub fn zeros(channels: usize, height: usize, width: usize) -> FeatureStack {
        FeatureStack { channels, height, width, values: vec![0.0; channels * height * width] }
    }

    #[inline]
    pub fn idx(&self, c: usize, h: usize, w: usize) -> usize {
        (c * self.height + h) * self.width + w
    }

    #[inline]
    pub fn at(&self, c: usize, h: usize, w: usize) -> f64 {
        self.values[self.idx(c, h, w)]
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.values[c * self.height * self.width..(c + 1) * self.height * self.width]
    }

    pub fn validate(&self) -> Result<()> {
        if self.channels == 0 || self.height == 0 || self.width == 0 {
            return Err(Error::invalid("feature stack dimensions must be positive"));
        }
        if self.values.len() != self.channels * self.height * self.width {
            return Err(Error::invalid("feature stack buffer size mismatch"));
        }
        if !self.values.iter().all(|v| v.is_finite()) {
            return Err(Error::NumericFailure("non-finite feature value".into()));
        }
        Ok(())
    }
}

/// A spatial evidence map for one attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct CamMap {
    pub height: usize,
    pub width: usize,
    pub attribute: usize,
    pub values: Vec<f64>,
}

/// Weighted sum of feature channels: map(h,w) = sum_c w[c] * f[c,h,w].
pub fn cam(features: &FeatureStack, weights: &[f64], attribute: usize) -> Result<CamMap> {
    features.validate()?;
    if weights.len() != features.channels {
        return Err(Error::invalid(format!(
            "got {} weights for {} channels",
            weights.len(),
            features.channels
        )));
    }
    let mut values = vec![0.0; features.height * features.width];
    for (c, &w) in weights.iter().enumerate() {
        for (o, &f) in values.iter_mut().zip(features.channel(c)) {
            *o += w * f;
        }
    }
    Ok(CamMap { height: features.height, width: features.width, attribute, values })
}

/// Per-pixel AUROC of the map against a binary mask of the same size.
pub fn cam_localization_auroc(map: &CamMap, mask: &[bool]) -> Result<f64> {
    if mask.len() != map.values.len() {
        return Err(Error::invalid("mask size does not match map"));
    }
    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    for (&v, &m) in map.values.iter().zip(mask) {
        if m {
            positives.push(v);
        } else {
            negatives.push(v);
        }
    }
    metrics::auroc(&ScoreSet::new(positives, negatives)?)
}

/// Min-max normalize each map to [0,1], then average pointwise.
pub fn normalize_and_average(maps: &[CamMap]) -> Result<CamMap> {
    let first = maps.first().ok_or_else(|| Error::invalid("no maps to average"))?;
    let mut out = vec![0.0; first.values.len()];
    for m in maps {
        if m.height != first.height || m.width != first.width {
            return Err(Error::invalid("maps have mismatched dimensions"));
        }
        let lo = m.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = m.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(hi > lo) {
            return Err(Error::UndefinedMetric("constant map cannot be normalized".into()));
        }
        for (o, &v) in out.iter_mut().zip(&m.values) {
            *o += (v - lo) / (hi - lo);
        }
    }
    let n = maps.len() as f64;
    out.iter_mut().for_each(|v| *v /= n);
    Ok(CamMap { height: first.height, width: first.width, attribute: first.attribute, values: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stack(channels: Vec<Vec<f64>>, h: usize, w: usize) -> FeatureStack {
        let c = channels.len();
        FeatureStack { channels: c, height: h, width: w, values: channels.concat() }
    }

    #[test]
    fn cam_hand_cases() {
        let f = stack(vec![vec![3.0; 4]], 2, 2);
        let m = cam(&f, &[2.0], 0).unwrap();
        assert_eq!(m.values, vec![6.0; 4]);

        assert_eq!(cam(&f, &[0.0], 0).unwrap().values, vec![0.0; 4]);

        let f = stack(vec![vec![1.0, 0.0], vec![0.0, 1.0]], 1, 2);
        let m = cam(&f, &[1.0, -1.0], 0).unwrap();
        assert_eq!(m.values, vec![1.0, -1.0]);

        assert!(cam(&f, &[1.0], 0).is_err());
    }

    #[test]
    fn cam_linear_in_weights() {
        let f = stack(
            vec![vec![0.1, 0.5, -0.2, 0.9], vec![1.0, -1.0, 0.3, 0.0], vec![0.2, 0.2, 0.2, 0.7]],
            2,
            2,
        );
        let w1 = [0.3, -0.8, 0.5];
        let w2 = [1.1, 0.2, -0.4];
        let sum: Vec<f64> = w1.iter().zip(&w2).map(|(a, b)| a + b).collect();
        let m1 = cam(&f, &w1, 0).unwrap();
        let m2 = cam(&f, &w2, 0).unwrap();
        let ms = cam(&f, &sum, 0).unwrap();
        for i in 0..4 {
            assert!((ms.values[i] - (m1.values[i] + m2.values[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn localization_hand_cases() {
        let mask = [true, false, true, false];
        let perfect = CamMap { height: 2, width: 2, attribute: 0, values: vec![1.0, 0.0, 1.0, 0.0] };
        assert_eq!(cam_localization_auroc(&perfect, &mask).unwrap(), 1.0);

        let constant = CamMap { height: 2, width: 2, attribute: 0, values: vec![0.3; 4] };
        assert_eq!(cam_localization_auroc(&constant, &mask).unwrap(), 0.5);

        let inverted = CamMap { height: 2, width: 2, attribute: 0, values: vec![0.0, 1.0, 0.0, 1.0] };
        assert_eq!(cam_localization_auroc(&inverted, &mask).unwrap(), 0.0);

        let all_pos = [true; 4];
        assert!(cam_localization_auroc(&perfect, &all_pos).is_err());
    }

    #[test]
    fn localization_monotone_invariant() {
        let mask = [true, true, false, false, true, false];
        let base = CamMap {
            height: 2,
            width: 3,
            attribute: 1,
            values: vec![0.9, 0.4, 0.2, 0.1, 0.8, 0.5],
        };
        let a = cam_localization_auroc(&base, &mask).unwrap();
        let warped = CamMap {
            values: base.values.iter().map(|v| (5.0 * v).exp()).collect(),
            ..base.clone()
        };
        let b = cam_localization_auroc(&warped, &mask).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn normalize_and_average_cases() {
        let m1 = CamMap { height: 1, width: 2, attribute: 0, values: vec![0.0, 1.0] };
        let m2 = CamMap { height: 1, width: 2, attribute: 0, values: vec![1.0, 0.0] };
        let avg = normalize_and_average(&[m1.clone(), m2]).unwrap();
        assert_eq!(avg.values, vec![0.5, 0.5]);

        // affine transforms normalize identically
        let m3 = CamMap { values: m1.values.iter().map(|v| 4.0 * v - 2.0).collect(), ..m1.clone() };
        let a = normalize_and_average(std::slice::from_ref(&m1)).unwrap();
        let b = normalize_and_average(&[m3]).unwrap();
        assert_eq!(a.values, b.values);

        let flat = CamMap { height: 1, width: 2, attribute: 0, values: vec![0.5, 0.5] };
        assert!(normalize_and_average(&[flat]).is_err());
    }
}
