//! Parameter-sweep probing: score a stimulus sweep per background and report
//! rank correlations against the generating parameter.

use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::experiments::dataset::{render_stimulus, RenderSettings};
use crate::experiments::probes::AttributeScorer;
use crate::geometry::{parameter_sweep, StimulusFamily};
use crate::metrics::{spearman, ResponseCurve};

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub family: StimulusFamily,
    pub curves: Vec<ResponseCurve>,
    /// Across-background mean response at each parameter.
    pub mean_curve: ResponseCurve,
    /// Per-background Spearman vs the parameter; None when undefined
    /// (constant responses).
    pub rs_per_background: Vec<Option<f64>>,
    pub mean_rs: Option<f64>,
    /// Spearman over all (background, parameter) points pooled together.
    pub pooled_rs: Option<f64>,
    /// pooled_rs − mean_rs where both exist.
    pub pooled_delta: Option<f64>,
}

pub fn run_sweep(
    scorer: &dyn AttributeScorer,
    family: StimulusFamily,
    sweep_size: usize,
    background_ids: &[usize],
    settings: &RenderSettings,
    stimulus_seed: u64,
) -> Result<SweepReport> {
    if background_ids.is_empty() {
        return Err(Error::invalid("sweep needs at least one background"));
    }
    let mut specs = parameter_sweep(family, sweep_size, stimulus_seed)?;
    specs.sort_by(|a, b| a.p.total_cmp(&b.p));
    let camera = settings.camera();

    let per_background: Vec<Vec<(f64, f64)>> = background_ids
        .par_iter()
        .map(|&bg| {
            specs
                .iter()
                .map(|spec| {
                    let image = render_stimulus(spec, &camera, settings, Some(bg))?;
                    Ok((spec.p, scorer.score(&image, spec)?))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut curves = Vec::with_capacity(background_ids.len());
    let mut rs_per_background = Vec::with_capacity(background_ids.len());
    let mut pooled_p = Vec::new();
    let mut pooled_r = Vec::new();
    for (&bg, points) in background_ids.iter().zip(per_background) {
        for &(p, r) in &points {
            pooled_p.push(p);
            pooled_r.push(r);
        }
        let curve = ResponseCurve { background_id: bg, points };
        rs_per_background.push(spearman(&curve.parameters(), &curve.responses()).ok());
        curves.push(curve);
    }

    let mean_points: Vec<(f64, f64)> = (0..specs.len())
        .map(|i| {
            let mean = curves.iter().map(|c| c.points[i].1).sum::<f64>() / curves.len() as f64;
            (specs[i].p, mean)
        })
        .collect();
    let mean_curve = ResponseCurve { background_id: usize::MAX, points: mean_points };

    let defined: Vec<f64> = rs_per_background.iter().flatten().cloned().collect();
    let mean_rs = if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    };
    let pooled_rs = spearman(&pooled_p, &pooled_r).ok();
    let pooled_delta = match (pooled_rs, mean_rs) {
        (Some(p), Some(m)) => Some(p - m),
        _ => None,
    };
    Ok(SweepReport {
        family,
        curves,
        mean_curve,
        rs_per_background,
        mean_rs,
        pooled_rs,
        pooled_delta,
    })
}

pub fn write_sweep_csv(path: &Path, report: &SweepReport) -> Result<()> {
    let mut out = String::from("background,parameter,response\n");
    for curve in &report.curves {
        for (p, r) in &curve.points {
            out.push_str(&format!("{},{:.10},{:.10}\n", curve.background_id, p, r));
        }
    }
    for (p, r) in &report.mean_curve.points {
        out.push_str(&format!("mean,{:.10},{:.10}\n", p, r));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn summarize_sweep(report: &SweepReport) -> String {
    let fmt = |v: Option<f64>| match v {
        Some(x) => format!("{x:.4}"),
        None => "undefined".to_string(),
    };
    let per_bg: Vec<String> = report
        .rs_per_background
        .iter()
        .zip(&report.curves)
        .map(|(rs, c)| format!("  background {}: r_s = {}", c.background_id, fmt(*rs)))
        .collect();
    format!(
        "sweep family: {}\nmean r_s: {}\npooled r_s: {}\npooled minus mean: {}\n{}\n",
        report.family,
        fmt(report.mean_rs),
        fmt(report.pooled_rs),
        fmt(report.pooled_delta),
        per_bg.join("\n")
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::probes::{ConstantScorer, ParameterOracle};

    fn fast_settings() -> RenderSettings {
        RenderSettings { image_size: 20, supersample: 1, subdivision: 2, ..RenderSettings::default() }
    }

    #[test]
    fn parameter_oracle_gives_perfect_correlation() {
        let report = run_sweep(
            &ParameterOracle,
            StimulusFamily::LpHigh,
            5,
            &[0, 1],
            &fast_settings(),
            0,
        )
        .unwrap();
        assert_eq!(report.mean_rs, Some(1.0));
        assert_eq!(report.pooled_rs, Some(1.0));
        assert_eq!(report.curves.len(), 2);
        assert_eq!(report.mean_curve.points.len(), 5);
    }

    #[test]
    fn constant_scorer_flagged_undefined() {
        let report = run_sweep(
            &ConstantScorer(0.4),
            StimulusFamily::Oval,
            4,
            &[2],
            &fast_settings(),
            0,
        )
        .unwrap();
        assert_eq!(report.rs_per_background, vec![None]);
        assert_eq!(report.mean_rs, None);
        assert!(summarize_sweep(&report).contains("undefined"));
    }

    #[test]
    fn oval_parameters_ascend() {
        let report = run_sweep(
            &ParameterOracle,
            StimulusFamily::Oval,
            4,
            &[0],
            &fast_settings(),
            0,
        )
        .unwrap();
        let params = report.curves[0].parameters();
        assert!(params.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn sweep_csv_written() {
        let report =
            run_sweep(&ParameterOracle, StimulusFamily::Noise, 3, &[0], &fast_settings(), 0)
                .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        write_sweep_csv(&path, &report).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1 + 3 + 3);
    }
}
