//! End-to-end probing protocols built on the synthesis, rendering, model, and
//! metrics layers.

pub mod cues;
pub mod dataset;
pub mod lighting_exp;
pub mod probes;
pub mod rotation;
pub mod sweep;
pub mod texture_exp;

pub use cues::{conflicting_cues_table, format_cue_table, write_cue_csv, CueCondition, CueTable};
pub use dataset::{
    make_multiview_samples, make_objects, make_sweep_dataset, render_stimulus, synthetic_labels,
    MultiViewObject, RenderSettings, ATTR_COUNT, ATTR_CUBIC, ATTR_PLANAR, ATTR_ROUGH, ATTR_THIN,
};
pub use lighting_exp::{
    count_catastrophic_identical, count_catastrophic_independent, lighting_sensitivity,
    summarize_lighting, write_lighting_csv, LightingReport,
};
pub use probes::{
    AttributeScorer, ConstantScorer, ContourOracle, GeometryOracle, ModelScorer, ParameterOracle,
    ShadingOracle,
};
pub use rotation::{
    mental_rotation_eval, summarize_rotation, PairVerificationReport, RotationSetting,
};
pub use sweep::{run_sweep, summarize_sweep, write_sweep_csv, SweepReport};
pub use texture_exp::{summarize_texture, texture_sensitivity, write_texture_csv, TextureReport};
