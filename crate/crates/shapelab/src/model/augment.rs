//! Deterministic image augmentation and the image-to-feature conversion used
//! by the fully connected model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::Rgb;
use crate::render::RasterImage;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AugmentConfig {
    pub crop: usize,
    pub flip_prob: f64,
    pub jitter_lo: f64,
    pub jitter_hi: f64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig { crop: 32, flip_prob: 0.5, jitter_lo: 0.9, jitter_hi: 1.1 }
    }
}

pub fn flip_horizontal(image: &RasterImage) -> RasterImage {
    let mut out = image.clone();
    for y in 0..image.height {
        for x in 0..image.width {
            let src = image.idx(image.width - 1 - x, y);
            let dst = out.idx(x, y);
            out.rgb[dst] = image.rgb[src];
            out.mask[dst] = image.mask[src];
        }
    }
    out
}

pub fn crop(image: &RasterImage, x0: usize, y0: usize, size: usize) -> Result<RasterImage> {
    if x0 + size > image.width || y0 + size > image.height {
        return Err(Error::invalid("crop window exceeds image bounds"));
    }
    let mut out = RasterImage::new(size, size);
    for y in 0..size {
        for x in 0..size {
            let src = image.idx(x0 + x, y0 + y);
            let dst = out.idx(x, y);
            out.rgb[dst] = image.rgb[src];
            out.mask[dst] = image.mask[src];
        }
    }
    Ok(out)
}

/// Flip with the configured probability, crop at a random offset, then apply
/// per-channel multiplicative jitter. Fully determined by the seed.
pub fn augment(image: &RasterImage, cfg: &AugmentConfig, seed: u64) -> Result<RasterImage> {
    if cfg.crop > image.width || cfg.crop > image.height {
        return Err(Error::invalid("crop size larger than image"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flip = rng.gen_bool(cfg.flip_prob);
    let x0 = rng.gen_range(0..=image.width - cfg.crop);
    let y0 = rng.gen_range(0..=image.height - cfg.crop);
    let jitter = |rng: &mut ChaCha8Rng| {
        if cfg.jitter_lo == cfg.jitter_hi {
            cfg.jitter_lo
        } else {
            rng.gen_range(cfg.jitter_lo..cfg.jitter_hi)
        }
    };
    let (jr, jg, jb) = (jitter(&mut rng), jitter(&mut rng), jitter(&mut rng));

    let base = if flip { flip_horizontal(image) } else { image.clone() };
    let mut out = crop(&base, x0, y0, cfg.crop)?;
    for c in &mut out.rgb {
        *c = Rgb::new(c.r * jr, c.g * jg, c.b * jb).clamp01();
    }
    Ok(out)
}

/// Flatten an image to the model input: RGB interleaved row-major, shifted to
/// be roughly zero-centered.
pub fn image_to_input(image: &RasterImage) -> Vec<f64> {
    let mut out = Vec::with_capacity(image.width * image.height * 3);
    for c in &image.rgb {
        out.push(c.r - 0.5);
        out.push(c.g - 0.5);
        out.push(c.b - 0.5);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient_image(w: usize, h: usize) -> RasterImage {
        let mut img = RasterImage::new(w, h);
        for y in 0..h {
            for x in 0..w {
                let v = (x as f64 + 0.5) / w as f64;
                let i = img.idx(x, y);
                img.rgb[i] = Rgb::new(v, v * 0.5, 1.0 - v);
                img.mask[i] = x % 2 == 0;
            }
        }
        img
    }

    #[test]
    fn identity_settings_are_identity() {
        let img = gradient_image(8, 8);
        let cfg = AugmentConfig { crop: 8, flip_prob: 0.0, jitter_lo: 1.0, jitter_hi: 1.0 };
        let out = augment(&img, &cfg, 3).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn deterministic_in_seed() {
        let img = gradient_image(12, 12);
        let cfg = AugmentConfig::default();
        let cfg = AugmentConfig { crop: 8, ..cfg };
        assert_eq!(augment(&img, &cfg, 7).unwrap(), augment(&img, &cfg, 7).unwrap());
        assert_ne!(augment(&img, &cfg, 7).unwrap(), augment(&img, &cfg, 8).unwrap());
    }

    #[test]
    fn flip_is_involution() {
        let img = gradient_image(9, 5);
        assert_eq!(flip_horizontal(&flip_horizontal(&img)), img);
    }

    #[test]
    fn oversized_crop_rejected() {
        let img = gradient_image(8, 8);
        let cfg = AugmentConfig { crop: 9, ..AugmentConfig::default() };
        assert!(augment(&img, &cfg, 0).is_err());
        assert!(crop(&img, 4, 4, 5).is_err());
    }

    #[test]
    fn input_vector_centered_and_sized() {
        let img = gradient_image(4, 3);
        let v = image_to_input(&img);
        assert_eq!(v.len(), 4 * 3 * 3);
        assert!(v.iter().all(|x| (-0.5..=0.5).contains(x)));
    }
}
