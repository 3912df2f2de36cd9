//! Texture sensitivity protocol: repeat the low-p sweep under each procedural
//! texture and compare the response curves.

use std::path::Path;

use crate::error::Result;
use crate::experiments::dataset::RenderSettings;
use crate::experiments::probes::AttributeScorer;
use crate::experiments::sweep::{run_sweep, SweepReport};
use crate::geometry::StimulusFamily;
use crate::render::{TextureKind, TextureSpec};

#[derive(Debug, Clone)]
pub struct TextureReport {
    pub per_texture: Vec<(TextureKind, SweepReport)>,
    pub mean_rs: Option<f64>,
}

/// Run the LpLow sweep once per texture kind (including untextured) and
/// average the defined rank correlations.
pub fn texture_sensitivity(
    scorer: &dyn AttributeScorer,
    sweep_size: usize,
    background_ids: &[usize],
    settings: &RenderSettings,
    seed: u64,
) -> Result<TextureReport> {
    let mut per_texture = Vec::with_capacity(TextureKind::ALL.len());
    for kind in TextureKind::ALL {
        let mut textured = settings.clone();
        textured.material.texture = match kind {
            TextureKind::None => None,
            _ => Some(TextureSpec::new(kind, seed, 1.0)),
        };
        let report = run_sweep(
            scorer,
            StimulusFamily::LpLow,
            sweep_size,
            background_ids,
            &textured,
            seed,
        )?;
        per_texture.push((kind, report));
    }
    let defined: Vec<f64> = per_texture.iter().filter_map(|(_, r)| r.mean_rs).collect();
    let mean_rs = if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    };
    Ok(TextureReport { per_texture, mean_rs })
}

pub fn write_texture_csv(path: &Path, report: &TextureReport) -> Result<()> {
    let mut out = String::from("texture,parameter,mean_response\n");
    for (kind, sweep) in &report.per_texture {
        for (p, r) in &sweep.mean_curve.points {
            out.push_str(&format!("{},{:.10},{:.10}\n", kind, p, r));
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn summarize_texture(report: &TextureReport) -> String {
    let mut out = String::new();
    for (kind, sweep) in &report.per_texture {
        let rs = match sweep.mean_rs {
            Some(v) => format!("{v:.4}"),
            None => "undefined".to_string(),
        };
        out.push_str(&format!("texture {kind}: mean r_s = {rs}\n"));
    }
    let mean = match report.mean_rs {
        Some(v) => format!("{v:.4}"),
        None => "undefined".to_string(),
    };
    out.push_str(&format!("mean r_s across textures: {mean}\n"));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::probes::{GeometryOracle, ParameterOracle};

    fn fast_settings() -> RenderSettings {
        RenderSettings {
            image_size: 16,
            supersample: 1,
            subdivision: 2,
            ..RenderSettings::default()
        }
    }

    #[test]
    fn six_textures_share_grid() {
        let report =
            texture_sensitivity(&ParameterOracle, 3, &[0], &fast_settings(), 0).unwrap();
        assert_eq!(report.per_texture.len(), 6);
        let grid = report.per_texture[0].1.mean_curve.parameters();
        for (_, sweep) in &report.per_texture {
            assert_eq!(sweep.mean_curve.parameters(), grid);
        }
        assert_eq!(report.mean_rs, Some(1.0));
    }

    #[test]
    fn texture_blind_oracle_gives_identical_curves() {
        let oracle = GeometryOracle { subdivision: 2 };
        let report = texture_sensitivity(&oracle, 3, &[1], &fast_settings(), 0).unwrap();
        let base = report.per_texture[0].1.mean_curve.responses();
        for (_, sweep) in &report.per_texture {
            assert_eq!(sweep.mean_curve.responses(), base);
        }
    }
}
