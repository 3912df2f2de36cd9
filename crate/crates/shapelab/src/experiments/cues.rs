//! Conflicting-cue protocol: sweep hybrid stimuli whose occluding contour and
//! interior shading come from different shapes, and tabulate the response.

use std::path::Path;

use rayon::prelude::*;

use crate::error::Result;
use crate::experiments::dataset::RenderSettings;
use crate::experiments::probes::AttributeScorer;
use crate::geometry::{generate_stimulus, parameter_sweep, StimulusFamily, StimulusSpec};
use crate::metrics::{response_range, spearman, ResponseCurve};
use crate::render::{background_image, composite, hybrid_render};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CueCondition {
    BothVarying,
    ShadingVariesContourSphere,
    ShadingVariesContourCube,
    ContourVariesShadingSphere,
    ContourVariesShadingCube,
}

impl CueCondition {
    pub const ALL: [CueCondition; 5] = [
        CueCondition::BothVarying,
        CueCondition::ShadingVariesContourSphere,
        CueCondition::ShadingVariesContourCube,
        CueCondition::ContourVariesShadingSphere,
        CueCondition::ContourVariesShadingCube,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CueCondition::BothVarying => "contour varying / shading varying",
            CueCondition::ShadingVariesContourSphere => "contour sphere / shading varying",
            CueCondition::ShadingVariesContourCube => "contour cube / shading varying",
            CueCondition::ContourVariesShadingSphere => "contour varying / shading sphere",
            CueCondition::ContourVariesShadingCube => "contour varying / shading cube",
        }
    }

    pub fn shading_varies(self) -> bool {
        matches!(
            self,
            CueCondition::BothVarying
                | CueCondition::ShadingVariesContourSphere
                | CueCondition::ShadingVariesContourCube
        )
    }

    pub fn contour_varies(self) -> bool {
        matches!(
            self,
            CueCondition::BothVarying
                | CueCondition::ContourVariesShadingSphere
                | CueCondition::ContourVariesShadingCube
        )
    }

    /// (contour, shading) specs at one point of the varying sweep.
    fn specs(self, varying: StimulusSpec) -> (StimulusSpec, StimulusSpec) {
        let sphere = StimulusSpec { family: StimulusFamily::Sphere, p: 0.0, seed: varying.seed };
        let cube = StimulusSpec { family: StimulusFamily::Cube, p: 0.0, seed: varying.seed };
        match self {
            CueCondition::BothVarying => (varying, varying),
            CueCondition::ShadingVariesContourSphere => (sphere, varying),
            CueCondition::ShadingVariesContourCube => (cube, varying),
            CueCondition::ContourVariesShadingSphere => (varying, sphere),
            CueCondition::ContourVariesShadingCube => (varying, cube),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CueRow {
    pub condition: CueCondition,
    pub curve: ResponseCurve,
    pub rs: Option<f64>,
    pub range: f64,
}

#[derive(Debug, Clone)]
pub struct CueTable {
    pub rows: Vec<CueRow>,
}

/// Run all five cue conditions over a high-p sweep. Each stimulus is a hybrid
/// render composited on a fixed background and scored for planarity.
pub fn conflicting_cues_table(
    scorer: &dyn AttributeScorer,
    sweep_size: usize,
    background_id: usize,
    settings: &RenderSettings,
    stimulus_seed: u64,
) -> Result<CueTable> {
    let specs = parameter_sweep(StimulusFamily::LpHigh, sweep_size, stimulus_seed)?;
    let camera = settings.camera();
    let mut rows = Vec::with_capacity(CueCondition::ALL.len());
    for condition in CueCondition::ALL {
        let points: Vec<(f64, f64)> = specs
            .par_iter()
            .map(|spec| {
                let (contour_spec, shading_spec) = condition.specs(*spec);
                let contour_mesh = generate_stimulus(&contour_spec, settings.subdivision)?;
                let shading_mesh = generate_stimulus(&shading_spec, settings.subdivision)?;
                let img = hybrid_render(
                    &contour_mesh,
                    &shading_mesh,
                    &camera,
                    &settings.lighting,
                    &settings.material,
                )?;
                let img = img.downsample(settings.supersample)?;
                let bg = background_image(background_id, img.width, img.height);
                let img = composite(&img, &bg)?;
                Ok((spec.p, scorer.score(&img, spec)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let curve = ResponseCurve { background_id, points };
        let rs = spearman(&curve.parameters(), &curve.responses()).ok();
        let range = response_range(&curve);
        rows.push(CueRow { condition, curve, rs, range });
    }
    Ok(CueTable { rows })
}

/// The table as text: five condition columns, r_s and Range rows.
pub fn format_cue_table(table: &CueTable) -> String {
    let mut out = String::new();
    for row in &table.rows {
        let rs = match row.rs {
            Some(v) => format!("{v:.4}"),
            None => "undefined".to_string(),
        };
        out.push_str(&format!(
            "{:<40} r_s = {:<10} range = {:.4}\n",
            row.condition.name(),
            rs,
            row.range
        ));
    }
    out
}

pub fn write_cue_csv(path: &Path, table: &CueTable) -> Result<()> {
    let mut out = String::from("condition,parameter,response\n");
    for row in &table.rows {
        for (p, r) in &row.curve.points {
            out.push_str(&format!("{},{:.10},{:.10}\n", row.condition.name(), p, r));
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}
