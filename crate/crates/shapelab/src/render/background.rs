//! Ten procedurally generated backgrounds with fixed seeds: color gradients,
//! low-frequency noise clouds, and simple horizon scenes. None contain
//! salient objects.

use crate::math::{Rgb, Vec3};
use crate::noise::{fbm, NoiseField};
use crate::render::raster::RasterImage;

pub const BACKGROUND_COUNT: usize = 10;

/// Deterministic background image for id in [0, 10).
pub fn background_image(id: usize, width: usize, height: usize) -> RasterImage {
    let id = id % BACKGROUND_COUNT;
    let mut img = RasterImage::new(width, height);
    for y in 0..height {
        let v = y as f64 / (height - 1).max(1) as f64;
        for x in 0..width {
            let u = x as f64 / (width - 1).max(1) as f64;
            img.set_pixel(x, y, background_pixel(id, u, v), false);
        }
    }
    img
}

fn lerp(a: Rgb, b: Rgb, t: f64) -> Rgb {
    a.scale(1.0 - t).add(b.scale(t))
}

fn background_pixel(id: usize, u: f64, v: f64) -> Rgb {
    match id {
        // vertical gradients in muted palettes
        0 => lerp(Rgb::new(0.55, 0.65, 0.80), Rgb::new(0.85, 0.85, 0.80), v),
        1 => lerp(Rgb::new(0.30, 0.30, 0.38), Rgb::new(0.70, 0.62, 0.55), v),
        2 => lerp(Rgb::new(0.75, 0.70, 0.62), Rgb::new(0.40, 0.45, 0.40), v),
        3 => lerp(Rgb::new(0.20, 0.25, 0.30), Rgb::new(0.55, 0.55, 0.60), v),
        // low-frequency noise clouds
        4 | 5 | 6 => {
            let field = NoiseField { octaves: 3, ..NoiseField::default().with_seed(1000 + id as u64) };
            let n = 0.5 + 0.5 * fbm(Vec3::new(u * 3.0, v * 3.0, 0.5), &field);
            let (a, b) = match id {
                4 => (Rgb::new(0.45, 0.52, 0.60), Rgb::new(0.75, 0.78, 0.80)),
                5 => (Rgb::new(0.55, 0.48, 0.40), Rgb::new(0.80, 0.72, 0.60)),
                _ => (Rgb::new(0.35, 0.45, 0.35), Rgb::new(0.65, 0.72, 0.62)),
            };
            lerp(a, b, n)
        }
        // horizon scenes: sky gradient above, textured ground below
        _ => {
            let horizon = 0.55;
            let field = NoiseField { octaves: 4, ..NoiseField::default().with_seed(2000 + id as u64) };
            let (sky_top, sky_bot, ground) = match id {
                7 => (
                    Rgb::new(0.45, 0.60, 0.80),
                    Rgb::new(0.80, 0.82, 0.85),
                    Rgb::new(0.40, 0.50, 0.32),
                ),
                8 => (
                    Rgb::new(0.60, 0.55, 0.65),
                    Rgb::new(0.88, 0.78, 0.66),
                    Rgb::new(0.55, 0.45, 0.35),
                ),
                _ => (
                    Rgb::new(0.35, 0.42, 0.55),
                    Rgb::new(0.70, 0.70, 0.72),
                    Rgb::new(0.35, 0.35, 0.40),
                ),
            };
            if v < horizon {
                lerp(sky_top, sky_bot, v / horizon)
            } else {
                let n = 0.5 + 0.5 * fbm(Vec3::new(u * 8.0, v * 8.0, 0.0), &field);
                lerp(ground, ground.scale(0.7), n * (v - horizon) / (1.0 - horizon))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backgrounds_deterministic_and_distinct() {
        for id in 0..BACKGROUND_COUNT {
            let a = background_image(id, 32, 32);
            let b = background_image(id, 32, 32);
            assert_eq!(a, b);
            assert!(a.mask.iter().all(|&m| !m));
        }
        for id in 0..BACKGROUND_COUNT {
            for other in (id + 1)..BACKGROUND_COUNT {
                let a = background_image(id, 32, 32);
                let b = background_image(other, 32, 32);
                let diff: f64 = a
                    .rgb
                    .iter()
                    .zip(&b.rgb)
                    .map(|(x, y)| (x.r - y.r).abs() + (x.g - y.g).abs() + (x.b - y.b).abs())
                    .sum::<f64>()
                    / a.rgb.len() as f64;
                assert!(diff > 0.01, "backgrounds {id} and {other} too similar");
            }
        }
    }

    #[test]
    fn pixels_in_unit_range() {
        for id in 0..BACKGROUND_COUNT {
            let img = background_image(id, 24, 24);
            for c in &img.rgb {
                for v in [c.r, c.g, c.b] {
                    assert!((0.0..=1.0).contains(&v));
                }
            }
        }
    }
}
