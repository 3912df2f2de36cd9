//! Attribute scorers: the trained model plus single-cue oracles used to
//! sanity-check each protocol.

use crate::error::Result;
use crate::geometry::{flatness, generate_stimulus, StimulusSpec};
use crate::model::mlp::MlpParams;
use crate::model::pool::test_time_pool;
use crate::render::RasterImage;

/// Scores one rendered stimulus for one attribute. Oracles may consult the
/// stimulus description directly; pixel-based scorers must ignore it.
pub trait AttributeScorer: Sync {
    fn score(&self, image: &RasterImage, spec: &StimulusSpec) -> Result<f64>;
}

/// Perfect oracle: reads the generating parameter, normalized to [0,1] over
/// the family's range.
pub struct ParameterOracle;

impl AttributeScorer for ParameterOracle {
    fn score(&self, _image: &RasterImage, spec: &StimulusSpec) -> Result<f64> {
        let canonical = spec.canonical();
        let (lo, hi) = canonical
            .family
            .parameter_range()
            .expect("canonical families are parametric");
        Ok(((canonical.p - lo) / (hi - lo)).clamp(0.0, 1.0))
    }
}

/// Shading-only oracle: mean luminance over the covered pixels.
pub struct ShadingOracle;

impl AttributeScorer for ShadingOracle {
    fn score(&self, image: &RasterImage, _spec: &StimulusSpec) -> Result<f64> {
        Ok(image.mean_masked_color().luminance())
    }
}

/// Contour-only oracle: silhouette area fraction.
pub struct ContourOracle;

impl AttributeScorer for ContourOracle {
    fn score(&self, image: &RasterImage, _spec: &StimulusSpec) -> Result<f64> {
        Ok(image.coverage())
    }
}

/// Geometry oracle: flatness of the true mesh, bypassing pixels entirely.
pub struct GeometryOracle {
    pub subdivision: u32,
}

impl AttributeScorer for GeometryOracle {
    fn score(&self, _image: &RasterImage, spec: &StimulusSpec) -> Result<f64> {
        Ok(flatness(&generate_stimulus(spec, self.subdivision)?))
    }
}

/// A constant scorer; useful for exercising undefined-correlation paths.
pub struct ConstantScorer(pub f64);

impl AttributeScorer for ConstantScorer {
    fn score(&self, _image: &RasterImage, _spec: &StimulusSpec) -> Result<f64> {
        Ok(self.0)
    }
}

/// The trained model's pooled probability for one attribute.
pub struct ModelScorer<'a> {
    pub params: &'a MlpParams,
    pub crop: usize,
    pub attribute: usize,
}

impl AttributeScorer for ModelScorer<'_> {
    fn score(&self, image: &RasterImage, _spec: &StimulusSpec) -> Result<f64> {
        let (probs, _) = test_time_pool(self.params, image, self.crop)?;
        Ok(probs[self.attribute])
    }
}
