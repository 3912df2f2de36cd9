//! Procedural solid textures sampled in 3D object space.
//!
//! Six kinds: the plain material color, randomized ellipse dots, fractal
//! Brownian gray, marble (histogram-equalized Brownian), wood rings, and a
//! thresholded leopard blob field. No UV unwrap is needed; deformed spheres
//! are sampled at their object-space coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{Rgb, Vec3};
use crate::noise::{fbm, NoiseField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TextureKind {
    None,
    Dots,
    Brownian,
    Marble,
    Wood,
    Leopard,
}

impl TextureKind {
    pub const ALL: [TextureKind; 6] = [
        TextureKind::None,
        TextureKind::Dots,
        TextureKind::Brownian,
        TextureKind::Marble,
        TextureKind::Wood,
        TextureKind::Leopard,
    ];
}

impl std::fmt::Display for TextureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TextureKind::None => "none",
            TextureKind::Dots => "dots",
            TextureKind::Brownian => "brownian",
            TextureKind::Marble => "marble",
            TextureKind::Wood => "wood",
            TextureKind::Leopard => "leopard",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TextureSpec {
    pub kind: TextureKind,
    pub seed: u64,
    pub scale: f64,
}

impl TextureSpec {
    pub fn new(kind: TextureKind, seed: u64, scale: f64) -> TextureSpec {
        TextureSpec { kind, seed, scale }
    }

    pub fn none() -> TextureSpec {
        TextureSpec { kind: TextureKind::None, seed: 0, scale: 1.0 }
    }
}

/// Precomputed state for one texture spec. Marble needs a value histogram of
/// the underlying Brownian field, built once here from a fixed sample set so
/// the per-point lookup stays pure.
pub struct TextureSampler {
    spec: TextureSpec,
    base: Rgb,
    field: NoiseField,
    marble_quantiles: Vec<f64>,
}

const MARBLE_SAMPLES: usize = 4096;

impl TextureSampler {
    pub fn new(spec: TextureSpec, base: Rgb) -> TextureSampler {
        let field = NoiseField::default().with_seed(spec.seed);
        let marble_quantiles = if spec.kind == TextureKind::Marble {
            // sorted fBm values over a fixed low-discrepancy point set on the
            // sphere neighborhood the stimuli occupy
            let mut vals: Vec<f64> = (0..MARBLE_SAMPLES)
                .map(|i| {
                    let t = i as f64 + 0.5;
                    let y = 1.0 - 2.0 * t / MARBLE_SAMPLES as f64;
                    let r = (1.0 - y * y).max(0.0).sqrt();
                    let phi = t * 2.399963229728653; // golden angle
                    let p = Vec3::new(r * phi.cos(), y, r * phi.sin());
                    fbm(p * (spec.scale * BROWNIAN_FREQ), &field)
                })
                .collect();
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            vals
        } else {
            Vec::new()
        };
        TextureSampler { spec, base, field, marble_quantiles }
    }

    pub fn sample(&self, p: Vec3) -> Rgb {
        match self.spec.kind {
            TextureKind::None => self.base,
            TextureKind::Dots => self.dots(p),
            TextureKind::Brownian => Rgb::gray(self.brownian_value(p)),
            TextureKind::Marble => self.marble(p),
            TextureKind::Wood => self.wood(p),
            TextureKind::Leopard => self.leopard(p),
        }
    }

    /// fBm mapped from [-1,1] to [0,1].
    fn brownian_value(&self, p: Vec3) -> f64 {
        0.5 + 0.5 * fbm(p * (self.spec.scale * BROWNIAN_FREQ), &self.field)
    }

    fn marble(&self, p: Vec3) -> Rgb {
        let v = fbm(p * (self.spec.scale * BROWNIAN_FREQ), &self.field);
        // empirical CDF position: monotone remap of the Brownian value
        let n = self.marble_quantiles.len();
        let rank = self.marble_quantiles.partition_point(|&q| q < v);
        Rgb::gray(rank as f64 / n as f64)
    }

    fn dots(&self, p: Vec3) -> Rgb {
        let q = p * (self.spec.scale * DOTS_FREQ);
        let cell = Vec3::new(q.x.floor(), q.y.floor(), q.z.floor());
        let (ix, iy, iz) = (cell.x as i64, cell.y as i64, cell.z as i64);
        // one randomized ellipse per lattice cell
        let h = |k: u64| {
            let mut v = self
                .spec
                .seed
                .wrapping_mul(0x9e3779b97f4a7c15)
                .wrapping_add((ix as u64).wrapping_mul(0xbf58476d1ce4e5b9))
                .wrapping_add((iy as u64).wrapping_mul(0x94d049bb133111eb))
                .wrapping_add((iz as u64).wrapping_mul(0xd6e8feb86659fd93))
                .wrapping_add(k.wrapping_mul(0x2545f4914f6cdd1d));
            v ^= v >> 30;
            v = v.wrapping_mul(0xbf58476d1ce4e5b9);
            v ^= v >> 31;
            (v >> 11) as f64 / (1u64 << 53) as f64
        };
        let center = cell + Vec3::new(0.3 + 0.4 * h(1), 0.3 + 0.4 * h(2), 0.3 + 0.4 * h(3));
        let radii = Vec3::new(
            0.15 + 0.2 * h(4),
            0.15 + 0.2 * h(5),
            0.15 + 0.2 * h(6),
        );
        let d = q - center;
        let e = (d.x / radii.x).powi(2) + (d.y / radii.y).powi(2) + (d.z / radii.z).powi(2);
        if e < 1.0 {
            Rgb::gray(0.15)
        } else {
            self.base
        }
    }

    fn wood(&self, p: Vec3) -> Rgb {
        let q = p * self.spec.scale;
        let r = (q.x * q.x + q.z * q.z).sqrt();
        let wobble = 0.35 * fbm(q * 3.0, &self.field);
        let t = (r * 6.0 + wobble).fract();
        let ring = if t < 0.0 { t + 1.0 } else { t };
        let light = Rgb::new(0.55, 0.35, 0.18);
        let dark = Rgb::new(0.32, 0.19, 0.09);
        // sharp early transition gives distinct rings
        let w = (ring * 4.0).min(1.0);
        light.scale(w).add(dark.scale(1.0 - w))
    }

    fn leopard(&self, p: Vec3) -> Rgb {
        let q = p * (self.spec.scale * LEOPARD_FREQ);
        let v = fbm(q, &self.field);
        let tan = Rgb::new(0.82, 0.66, 0.40);
        let spot = Rgb::new(0.22, 0.13, 0.05);
        let rim = Rgb::new(0.45, 0.30, 0.12);
        if v > 0.38 {
            spot
        } else if v > 0.30 {
            rim
        } else {
            tan
        }
    }
}

const BROWNIAN_FREQ: f64 = 3.0;
const DOTS_FREQ: f64 = 4.0;
const LEOPARD_FREQ: f64 = 5.0;

/// One-off texture lookup. Rendering loops should build a `TextureSampler`
/// once instead; Marble rebuilds its histogram on every call through here.
pub fn procedural_texture(spec: &TextureSpec, base: Rgb, position: Vec3) -> Rgb {
    TextureSampler::new(*spec, base).sample(position)
}

/// Rank-based histogram equalization: output_i = rank_i / (n-1) with tied
/// ranks averaged; order preserving.
pub fn histogram_equalize(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::invalid("histogram_equalize needs a nonempty input"));
    }
    let n = values.len();
    if n == 1 {
        return Ok(vec![0.5]);
    }
    let ranks = crate::metrics::average_ranks(values);
    // average_ranks is 1-based; shift to 0-based before scaling
    Ok(ranks.iter().map(|r| (r - 1.0) / (n - 1) as f64).collect())
}
