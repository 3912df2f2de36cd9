//! Camera, lighting, and material descriptions for the rasterizer.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{Rgb, Vec3};
use crate::render::texture::TextureSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub eye: Vec3,
    pub look_at: Vec3,
    pub up: Vec3,
    pub vertical_fov_deg: f64,
    pub width: usize,
    pub height: usize,
}

impl Camera {
    /// Standard stimulus camera: a long-focal, slightly off-axis view of the
    /// origin. The narrow field of view keeps perspective mild so the fattest
    /// stimulus (the cube) and the thinnest (the squashed oval) both land
    /// inside the 5-80% coverage band.
    pub fn standard(width: usize, height: usize) -> Camera {
        let dir = Vec3::new(0.10, 0.08, 0.99).normalized();
        Camera {
            eye: dir * 12.0,
            look_at: Vec3::ZERO,
            up: Vec3::new(0.0, 1.0, 0.0),
            vertical_fov_deg: 11.6,
            width,
            height,
        }
    }

    /// Multi-view variant of `standard`, rotated to the given azimuth
    /// (radians) around the Y axis and zoomed out enough that corner-on cubes
    /// stay in frame.
    pub fn orbit(width: usize, height: usize, azimuth: f64) -> Camera {
        let elevation = 0.96; // matches standard's eye height
        let r = (12.0f64 * 12.0 - elevation * elevation).sqrt();
        Camera {
            eye: Vec3::new(r * azimuth.sin(), elevation, r * azimuth.cos()),
            vertical_fov_deg: 14.0,
            ..Camera::standard(width, height)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.vertical_fov_deg > 0.0 && self.vertical_fov_deg < 180.0) {
            return Err(Error::invalid("camera fov must lie in (0, 180)"));
        }
        if self.width < 16 || self.height < 16 {
            return Err(Error::invalid("camera image size must be at least 16x16"));
        }
        let forward = (self.look_at - self.eye).normalized();
        if forward.cross(self.up.normalized()).norm() < 1e-9 {
            return Err(Error::invalid("camera up vector parallel to view direction"));
        }
        Ok(())
    }

    /// Orthonormal basis (right, up, forward) of camera space.
    pub fn basis(&self) -> (Vec3, Vec3, Vec3) {
        let forward = (self.look_at - self.eye).normalized();
        let right = forward.cross(self.up).normalized();
        let up = right.cross(forward);
        (right, up, forward)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionalLight {
    /// Unit vector pointing from the surface toward the light.
    pub direction: Vec3,
    pub color: Rgb,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LightingSetup {
    pub ambient: Rgb,
    pub directionals: Vec<DirectionalLight>,
}

impl LightingSetup {
    /// The paper-style default: soft ambient plus one directional light from
    /// the upper-left front.
    pub fn soft_default() -> LightingSetup {
        LightingSetup {
            ambient: Rgb::gray(0.35),
            directionals: vec![DirectionalLight {
                direction: Vec3::new(-0.5, 0.8, 0.6).normalized(),
                color: Rgb::gray(0.75),
            }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.directionals.is_empty() || self.directionals.len() > 6 {
            return Err(Error::invalid("lighting needs 1..=6 directional lights"));
        }
        for l in &self.directionals {
            if (l.direction.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::invalid("light direction must be unit length"));
            }
        }
        Ok(())
    }

    pub fn scaled(&self, s: f64) -> LightingSetup {
        LightingSetup {
            ambient: self.ambient.scale(s),
            directionals: self
                .directionals
                .iter()
                .map(|l| DirectionalLight { direction: l.direction, color: l.color.scale(s) })
                .collect(),
        }
    }
}

/// Deterministic randomized lighting: 1-6 lights on the upper hemisphere with
/// per-channel intensities, optionally forced to grayscale.
pub fn random_lighting(seed: u64, grayscale: bool) -> LightingSetup {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.gen_range(1..=6usize);
    let ambient = Rgb::gray(rng.gen_range(0.05..0.30));
    let mut directionals = Vec::with_capacity(count);
    for _ in 0..count {
        let y: f64 = rng.gen_range(0.05..1.0);
        let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let r = (1.0 - y * y).sqrt();
        let direction = Vec3::new(r * phi.cos(), y, r * phi.sin());
        let color = if grayscale {
            Rgb::gray(rng.gen_range(0.1..1.0))
        } else {
            Rgb::new(
                rng.gen_range(0.1..1.0),
                rng.gen_range(0.1..1.0),
                rng.gen_range(0.1..1.0),
            )
        };
        directionals.push(DirectionalLight { direction: direction.normalized(), color });
    }
    LightingSetup { ambient, directionals }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub base_color: Rgb,
    pub specular_strength: f64,
    pub shininess: f64,
    pub texture: Option<TextureSpec>,
}

impl Material {
    /// Gray specular default.
    pub fn gray_specular() -> Material {
        Material {
            base_color: Rgb::gray(0.6),
            specular_strength: 0.4,
            shininess: 32.0,
            texture: None,
        }
    }

    pub fn with_texture(mut self, texture: TextureSpec) -> Material {
        self.texture = Some(texture);
        self
    }
}

// serde support for configs that name a camera by size only
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraConfig {
    pub width: usize,
    pub height: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn camera_validation() {
        let mut c = Camera::standard(64, 64);
        c.validate().unwrap();
        c.vertical_fov_deg = 0.0;
        assert!(c.validate().is_err());
        let mut c = Camera::standard(64, 64);
        c.up = (c.look_at - c.eye).normalized();
        assert!(c.validate().is_err());
        let c = Camera::standard(8, 8);
        assert!(c.validate().is_err());
    }

    #[test]
    fn random_lighting_deterministic() {
        assert_eq!(random_lighting(5, false), random_lighting(5, false));
    }

    #[test]
    fn random_lighting_counts_cover_range() {
        let mut seen = [false; 7];
        for seed in 0..100u64 {
            seen[random_lighting(seed, false).directionals.len()] = true;
        }
        for c in 1..=6 {
            assert!(seen[c], "count {c} never drawn over seeds 0..100");
        }
    }

    #[test]
    fn grayscale_mode_equal_channels() {
        for seed in 0..20u64 {
            for l in random_lighting(seed, true).directionals {
                assert_eq!(l.color.r, l.color.g);
                assert_eq!(l.color.g, l.color.b);
            }
        }
    }

    #[test]
    fn random_lighting_upper_hemisphere() {
        for seed in 0..50u64 {
            let setup = random_lighting(seed, false);
            setup.validate().unwrap();
            for l in setup.directionals {
                assert!(l.direction.y > 0.0);
            }
        }
    }

    #[test]
    fn orbit_preserves_distance() {
        let base = Camera::standard(64, 64).eye.norm();
        for i in 0..8 {
            let az = i as f64 * std::f64::consts::TAU / 8.0;
            let c = Camera::orbit(64, 64, az);
            assert!((c.eye.norm() - base).abs() < 1e-9);
            c.validate().unwrap();
        }
    }
}
