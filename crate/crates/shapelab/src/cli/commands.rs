//! The work behind each CLI subcommand, exposed as library functions so they
//! can be driven from tests.

use std::path::{Path, PathBuf};

use crate::cluster;
use crate::error::{Error, Result};
use crate::experiments::{
    conflicting_cues_table, format_cue_table, lighting_sensitivity, make_multiview_samples,
    make_objects, make_sweep_dataset, mental_rotation_eval, render_stimulus, run_sweep,
    summarize_lighting, summarize_rotation, summarize_sweep, summarize_texture,
    texture_sensitivity, write_cue_csv, write_lighting_csv, write_sweep_csv, write_texture_csv,
    ModelScorer, RotationSetting, ATTR_CUBIC, ATTR_PLANAR, ATTR_ROUGH,
};
use crate::cli::config::RunConfig;
use crate::geometry::{parameter_sweep, StimulusFamily};
use crate::math::Rgb;
use crate::metrics::TriState;
use crate::model::{
    self, conv, derive_seed, image_to_input, load_checkpoint, save_checkpoint, test_time_pool,
    train, write_loss_curve_csv, MlpParams,
};
use crate::render::{RasterImage, BACKGROUND_COUNT};
use crate::saliency::{cam, cam_localization_auroc, CamMap};

// seed streams, expanded with model::derive_seed(cfg.seed, STREAM, index):
//   20 sweep stimuli used for training and synthesis
//   21 held-out sweep stimuli for probing
//   22 conflicting-cue stimuli
//   23 lighting setups
//   24 multi-view objects and views (training)
//   25 multi-view objects and views (held-out evaluation)
//   26 clustering restarts
//   27 activation-map toy data
pub const STREAM_SYNTH: u64 = 20;
pub const STREAM_PROBE: u64 = 21;
pub const STREAM_CUES: u64 = 22;
pub const STREAM_LIGHTING: u64 = 23;
pub const STREAM_ROTATION_TRAIN: u64 = 24;
pub const STREAM_ROTATION_EVAL: u64 = 25;
pub const STREAM_CLUSTER: u64 = 26;
pub const STREAM_CAM: u64 = 27;

fn prepare_out(cfg: &RunConfig, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    cfg.write_resolved(out)
}

fn write_summary(out: &Path, text: &str) -> Result<()> {
    std::fs::write(out.join("summary.txt"), text)?;
    Ok(())
}

pub fn default_checkpoint(out_root: &Path) -> PathBuf {
    out_root.join("train").join("model")
}

fn load_model(base: &Path) -> Result<MlpParams> {
    load_checkpoint(base).map_err(|e| match e {
        Error::Io(_) => Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!(
                "checkpoint {} not found; run the train subcommand first",
                base.display()
            ),
        )),
        other => other,
    })
}

const SWEEP_FAMILIES: [(StimulusFamily, usize); 3] = [
    (StimulusFamily::LpHigh, ATTR_PLANAR),
    (StimulusFamily::Noise, ATTR_ROUGH),
    (StimulusFamily::Oval, ATTR_CUBIC),
];

/// Render every family sweep on every background and write a manifest.
pub fn cmd_synth(cfg: &RunConfig, out: &Path) -> Result<()> {
    prepare_out(cfg, out)?;
    let settings = cfg.render.settings();
    let camera = settings.camera();
    let stim_seed = derive_seed(cfg.seed, STREAM_SYNTH, 0);
    let families =
        [StimulusFamily::LpLow, StimulusFamily::LpHigh, StimulusFamily::Noise, StimulusFamily::Oval];
    let mut manifest = String::from("file,family,p,background,seed\n");
    let mut count = 0usize;
    for family in families {
        let specs = parameter_sweep(family, cfg.sweep.size, stim_seed)?;
        for (i, spec) in specs.iter().enumerate() {
            for bg in 0..BACKGROUND_COUNT {
                let img = render_stimulus(spec, &camera, &settings, Some(bg))?;
                let name = format!("{family}_{i:02}_bg{bg}.png");
                img.save_png(&out.join(&name))?;
                manifest.push_str(&format!(
                    "{name},{family},{:.10},{bg},{}\n",
                    spec.p, spec.seed
                ));
                count += 1;
            }
        }
    }
    std::fs::write(out.join("manifest.csv"), manifest)?;
    write_summary(out, &format!("stimuli rendered: {count}\n"))?;
    Ok(())
}

/// Train the fully connected model on the labeled sweep dataset.
pub fn cmd_train(cfg: &RunConfig, out: &Path) -> Result<()> {
    prepare_out(cfg, out)?;
    let settings = cfg.render.settings();
    let families: Vec<StimulusFamily> = SWEEP_FAMILIES.iter().map(|(f, _)| *f).collect();
    let mut samples = Vec::new();
    for stream in 0..cfg.sweep.train_seed_streams.max(1) {
        let mut batch = make_sweep_dataset(
            &families,
            cfg.sweep.size,
            &cfg.sweep.train_backgrounds,
            &settings,
            derive_seed(cfg.seed, STREAM_SYNTH, stream as u64),
        )?;
        // keep object ids unique across seed streams so triplet positives
        // only pair renders of the same stimulus
        let offset = stream * families.len() * cfg.sweep.size;
        for s in &mut batch {
            s.object_id += offset;
        }
        samples.append(&mut batch);
    }
    let mut tcfg = cfg.train;
    tcfg.seed = cfg.seed;
    let (params, curve) = train(&samples, cfg.mlp_config(), &tcfg, &cfg.augment)?;
    save_checkpoint(&params, &out.join("model"))?;
    write_loss_curve_csv(&out.join("loss_curve.csv"), &curve)?;
    let last = curve.last();
    write_summary(
        out,
        &format!(
            "training samples: {}\nsteps: {}\nfinal attribute loss: {}\nfinal combined loss: {}\n",
            samples.len(),
            curve.len(),
            last.map_or("none".into(), |p| format!("{:.6}", p.attribute_loss)),
            last.map_or("none".into(), |p| format!("{:.6}", p.combined)),
        ),
    )
}

/// Held-out parameter sweeps scored by the trained model.
pub fn cmd_probe(cfg: &RunConfig, out: &Path, checkpoint: &Path) -> Result<()> {
    prepare_out(cfg, out)?;
    let params = load_model(checkpoint)?;
    let settings = cfg.render.settings();
    let mut summary = String::new();
    for (family, attribute) in SWEEP_FAMILIES {
        let scorer = ModelScorer { params: &params, crop: cfg.augment.crop, attribute };
        let report = run_sweep(
            &scorer,
            family,
            cfg.sweep.size,
            &cfg.sweep.eval_backgrounds,
            &settings,
            derive_seed(cfg.seed, STREAM_PROBE, 0),
        )?;
        write_sweep_csv(&out.join(format!("sweep_{family}.csv")), &report)?;
        summary.push_str(&summarize_sweep(&report));
        summary.push('\n');
    }
    write_summary(out, &summary)
}

/// Conflicting contour/shading stimuli scored for planarity.
pub fn cmd_cues(cfg: &RunConfig, out: &Path, checkpoint: &Path) -> Result<()> {
    prepare_out(cfg, out)?;
    let params = load_model(checkpoint)?;
    let scorer = ModelScorer { params: &params, crop: cfg.augment.crop, attribute: ATTR_PLANAR };
    let table = conflicting_cues_table(
        &scorer,
        cfg.cues.sweep_size,
        cfg.cues.background,
        &cfg.render.settings(),
        derive_seed(cfg.seed, STREAM_CUES, 0),
    )?;
    write_cue_csv(&out.join("cues.csv"), &table)?;
    write_summary(out, &format_cue_table(&table))
}

pub fn cmd_lighting(cfg: &RunConfig, out: &Path, checkpoint: &Path) -> Result<()> {
    prepare_out(cfg, out)?;
    let params = load_model(checkpoint)?;
    let scorer = ModelScorer { params: &params, crop: cfg.augment.crop, attribute: ATTR_PLANAR };
    let report = lighting_sensitivity(
        &scorer,
        cfg.lighting.setups,
        cfg.lighting.sweep_size,
        cfg.lighting.background,
        &cfg.render.settings(),
        derive_seed(cfg.seed, STREAM_LIGHTING, 0),
    )?;
    write_lighting_csv(&out.join("lighting.csv"), &report)?;
    write_summary(out, &summarize_lighting(&report))
}

pub fn cmd_texture(cfg: &RunConfig, out: &Path, checkpoint: &Path) -> Result<()> {
    prepare_out(cfg, out)?;
    let params = load_model(checkpoint)?;
    let scorer = ModelScorer { params: &params, crop: cfg.augment.crop, attribute: ATTR_PLANAR };
    let report = texture_sensitivity(
        &scorer,
        cfg.sweep.size,
        &cfg.sweep.eval_backgrounds,
        &cfg.render.settings(),
        derive_seed(cfg.seed, STREAM_PROBE, 1),
    )?;
    write_texture_csv(&out.join("texture.csv"), &report)?;
    write_summary(out, &summarize_texture(&report))
}

/// Train an embedding on multi-view objects and verify same-object pairs on
/// held-out objects.
pub fn cmd_rotation(cfg: &RunConfig, out: &Path) -> Result<()> {
    prepare_out(cfg, out)?;
    let settings = cfg.render.settings();
    let backgrounds: Vec<usize> = (0..BACKGROUND_COUNT).collect();
    let train_seed = derive_seed(cfg.seed, STREAM_ROTATION_TRAIN, 0);
    let objects = make_objects(cfg.rotation.train_objects, train_seed)?;
    let samples = make_multiview_samples(
        &objects,
        cfg.rotation.views_per_object,
        &settings,
        &backgrounds,
        train_seed,
    )?;
    let mut tcfg = cfg.train;
    tcfg.seed = cfg.seed;
    tcfg.epochs = cfg.rotation.epochs;
    let (params, curve) = train(&samples, cfg.mlp_config(), &tcfg, &cfg.augment)?;
    save_checkpoint(&params, &out.join("embedding_model"))?;
    write_loss_curve_csv(&out.join("loss_curve.csv"), &curve)?;

    let eval_seed = derive_seed(cfg.seed, STREAM_ROTATION_EVAL, 0);
    let eval_objects = make_objects(cfg.rotation.eval_objects, eval_seed)?;
    let eval_samples = make_multiview_samples(
        &eval_objects,
        cfg.rotation.views_per_object,
        &settings,
        &backgrounds,
        eval_seed,
    )?;
    let mut embeddings = Vec::with_capacity(eval_samples.len());
    let mut baseline = Vec::with_capacity(eval_samples.len());
    let mut object_ids = Vec::with_capacity(eval_samples.len());
    let mut cluster_ids = Vec::with_capacity(eval_samples.len());
    for s in &eval_samples {
        let (_, e) = test_time_pool(&params, &s.image, cfg.augment.crop)?;
        embeddings.push(e);
        baseline.push(image_to_input(&s.image));
        object_ids.push(s.object_id);
        cluster_ids.push(s.view_cluster_id);
    }
    let easy = mental_rotation_eval(
        &embeddings,
        &object_ids,
        &cluster_ids,
        RotationSetting::Easy,
        None,
    )?;
    let hard = mental_rotation_eval(
        &embeddings,
        &object_ids,
        &cluster_ids,
        RotationSetting::Hard,
        Some(&baseline),
    )?;
    let mut report = String::from("setting,auroc,eer,positives,negatives\n");
    for r in [&easy, &hard] {
        let name = match r.setting {
            RotationSetting::Easy => "easy",
            RotationSetting::Hard => "hard",
        };
        report.push_str(&format!(
            "{name},{:.10},{:.10},{},{}\n",
            r.auroc, r.eer, r.positive_count, r.negative_count
        ));
    }
    std::fs::write(out.join("rotation.csv"), report)?;
    write_summary(out, &summarize_rotation(&easy, &hard))
}

/// Bright-quadrant toy image: background noise plus one bright quadrant.
/// Returns the image, its quadrant mask, and whether a quadrant is present.
pub fn quadrant_sample(size: usize, seed: u64) -> (RasterImage, Vec<bool>, bool) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let positive = rng.gen_bool(0.5);
    let quadrant: usize = rng.gen_range(0..4);
    let mut img = RasterImage::new(size, size);
    let mut mask = vec![false; size * size];
    let half = size / 2;
    for y in 0..size {
        for x in 0..size {
            let in_quadrant = positive
                && (x >= half) == (quadrant % 2 == 1)
                && (y >= half) == (quadrant / 2 == 1);
            let v: f64 = if in_quadrant {
                rng.gen_range(0.7..1.0)
            } else {
                rng.gen_range(0.0..0.3)
            };
            img.set_pixel(x, y, Rgb::gray(v), true);
            mask[y * size + x] = in_quadrant;
        }
    }
    (img, mask, positive)
}

/// Train the conv model to spot a bright quadrant and emit activation maps.
pub fn cmd_cam(cfg: &RunConfig, out: &Path) -> Result<()> {
    prepare_out(cfg, out)?;
    let size = cfg.cam.image_size;
    let conv_cfg = conv::ConvConfig {
        height: size,
        width: size,
        in_channels: 3,
        mid_channels: cfg.cam.channels,
        out_channels: cfg.cam.channels,
        attr_dim: 1,
        embed_dim: 4,
    };
    let base_seed = derive_seed(cfg.seed, STREAM_CAM, 0);
    let mut images = Vec::new();
    let mut stacks = Vec::new();
    let mut masks = Vec::new();
    let mut labels: Vec<Vec<TriState>> = Vec::new();
    for i in 0..cfg.cam.samples {
        let (img, mask, positive) = quadrant_sample(size, derive_seed(base_seed, 1, i as u64));
        stacks.push(conv::image_to_stack(&img));
        images.push(img);
        masks.push(mask);
        labels.push(vec![Some(positive)]);
    }
    let params = conv::ConvParams::init(conv_cfg, base_seed);
    let tcfg = model::TrainConfig {
        lr_trunk: 0.2,
        lr_attr: 0.2,
        seed: base_seed,
        ..model::TrainConfig::default()
    };
    let params = conv::train_conv_attributes(params, &stacks, &labels, &tcfg, cfg.cam.steps)?;

    let fwd = conv::conv_forward(&params, &stacks)?;
    let weights = params.attr_channel_weights(0);
    let mut aurocs = Vec::new();
    let mut csv = String::from("sample,localization_auroc\n");
    for (i, feat) in fwd.features.iter().enumerate() {
        if labels[i][0] != Some(true) {
            continue;
        }
        let map = cam(feat, &weights, 0)?;
        let a = cam_localization_auroc(&map, &masks[i])?;
        aurocs.push(a);
        csv.push_str(&format!("{i},{a:.10}\n"));
        save_cam_png(&map, &out.join(format!("cam_{i:03}.png")))?;
        images[i].save_png(&out.join(format!("input_{i:03}.png")))?;
    }
    std::fs::write(out.join("cam.csv"), csv)?;
    let mean = aurocs.iter().sum::<f64>() / aurocs.len().max(1) as f64;
    write_summary(
        out,
        &format!(
            "positive samples: {}\nmean localization auroc: {mean:.4}\n",
            aurocs.len()
        ),
    )
}

/// Min-max normalize a map into a grayscale PNG.
pub fn save_cam_png(map: &CamMap, path: &Path) -> Result<()> {
    let lo = map.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = map.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut img = RasterImage::new(map.width, map.height);
    for y in 0..map.height {
        for x in 0..map.width {
            let v = (map.values[y * map.width + x] - lo) / span;
            img.set_pixel(x, y, Rgb::gray(v), true);
        }
    }
    img.save_png(path)
}

pub fn cmd_cluster(
    cfg: &RunConfig,
    out: &Path,
    matrix: &Path,
    k: Option<usize>,
) -> Result<()> {
    prepare_out(cfg, out)?;
    let s = match matrix.extension().and_then(|e| e.to_str()) {
        Some("csv") => cluster::read_matrix_csv(matrix)?,
        _ => cluster::read_matrix_binary(matrix)?,
    };
    let k = match k {
        Some(k) => k,
        None => cluster::suggest_k(&s)?,
    };
    let assignment = cluster::spectral_cluster(&s, k, derive_seed(cfg.seed, STREAM_CLUSTER, 0))?;
    cluster::write_assignment(&out.join("assignment.txt"), &assignment)?;
    let mut sizes = vec![0usize; k];
    for &l in &assignment.labels {
        sizes[l] += 1;
    }
    write_summary(
        out,
        &format!("points: {}\nclusters: {k}\ncluster sizes: {sizes:?}\n", assignment.labels.len()),
    )
}

