//! Test-time pooling over a fixed set of crops and flips.

use crate::error::{Error, Result};
use crate::model::augment::{crop, flip_horizontal, image_to_input};
use crate::model::linalg::Mat;
use crate::model::mlp::{self, MlpParams};
use crate::render::RasterImage;

/// Attribute probabilities averaged, embeddings averaged then re-normalized,
/// over center + four corner crops, each also flipped (10 views).
pub fn test_time_pool(
    params: &MlpParams,
    image: &RasterImage,
    crop_size: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if crop_size > image.width || crop_size > image.height {
        return Err(Error::invalid("pooling crop larger than image"));
    }
    let xm = image.width - crop_size;
    let ym = image.height - crop_size;
    let offsets = [(0, 0), (xm, 0), (0, ym), (xm, ym), (xm / 2, ym / 2)];
    let mut inputs = Vec::with_capacity(10);
    for &(x0, y0) in &offsets {
        let view = crop(image, x0, y0, crop_size)?;
        inputs.push(image_to_input(&flip_horizontal(&view)));
        inputs.push(image_to_input(&view));
    }
    let x = Mat::from_rows(inputs);
    let (pred, _) = mlp::forward(params, &x)?;

    let n = pred.probs.rows as f64;
    let probs: Vec<f64> = pred.probs.col_sums().iter().map(|s| s / n).collect();
    let mut embed: Vec<f64> = pred.embeddings.col_sums();
    let norm = embed.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return Err(Error::NumericFailure("pooled embedding collapsed to zero".into()));
    }
    for v in &mut embed {
        *v /= norm;
    }
    Ok((probs, embed))
}
