//! Seeded fractal Brownian noise over 3D space.
//!
//! The basis is value noise on an integer lattice: each lattice point hashes
//! to a value in [-1,1] and the eight surrounding corners are blended with
//! smoothstep weights. Octaves are summed with geometrically decaying
//! amplitude and the total is renormalized so the field stays inside [-1,1].

use crate::error::{Error, Result};
use crate::math::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseField {
    pub octaves: u32,
    pub lacunarity: f64,
    pub gain: f64,
    pub seed: u64,
}

impl Default for NoiseField {
    fn default() -> Self {
        NoiseField { octaves: 5, lacunarity: 2.0, gain: 0.5, seed: 0 }
    }
}

impl NoiseField {
    pub fn new(octaves: u32, lacunarity: f64, gain: f64, seed: u64) -> Result<Self> {
        if octaves < 1 {
            return Err(Error::invalid("noise octaves must be >= 1"));
        }
        if lacunarity <= 1.0 {
            return Err(Error::invalid("noise lacunarity must be > 1"));
        }
        if gain <= 0.0 || gain >= 1.0 {
            return Err(Error::invalid("noise gain must lie in (0,1)"));
        }
        Ok(NoiseField { octaves, lacunarity, gain, seed })
    }

    pub fn with_seed(self, seed: u64) -> Self {
        NoiseField { seed, ..self }
    }
}

/// 64-bit avalanche hash (splitmix64 finalizer) over lattice coordinates.
fn hash_lattice(ix: i64, iy: i64, iz: i64, seed: u64) -> u64 {
    let mut h = seed
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add((ix as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9))
        .wrapping_add((iy as u64).wrapping_mul(0x94d0_49bb_1331_11eb))
        .wrapping_add((iz as u64).wrapping_mul(0xd6e8_feb8_6659_fd93));
    h ^= h >> 30;
    h = h.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h ^= h >> 27;
    h = h.wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^= h >> 31;
    h
}

/// Lattice value in [-1, 1].
fn lattice_value(ix: i64, iy: i64, iz: i64, seed: u64) -> f64 {
    let h = hash_lattice(ix, iy, iz, seed);
    (h >> 11) as f64 / ((1u64 << 53) as f64) * 2.0 - 1.0
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Single octave of value noise, in [-1, 1].
fn value_noise(p: Vec3, seed: u64) -> f64 {
    let (fx, fy, fz) = (p.x.floor(), p.y.floor(), p.z.floor());
    let (ix, iy, iz) = (fx as i64, fy as i64, fz as i64);
    let (tx, ty, tz) = (smoothstep(p.x - fx), smoothstep(p.y - fy), smoothstep(p.z - fz));

    let mut acc = 0.0;
    for dz in 0..2i64 {
        let wz = if dz == 0 { 1.0 - tz } else { tz };
        for dy in 0..2i64 {
            let wy = if dy == 0 { 1.0 - ty } else { ty };
            for dx in 0..2i64 {
                let wx = if dx == 0 { 1.0 - tx } else { tx };
                acc += wx * wy * wz * lattice_value(ix + dx, iy + dy, iz + dz, seed);
            }
        }
    }
    acc
}

/// Fractal Brownian motion at `point`: octaves of value noise summed with
/// gain^k amplitude at lacunarity^k frequency, renormalized to [-1, 1].
pub fn fbm(point: Vec3, field: &NoiseField) -> f64 {
    let mut sum = 0.0;
    let mut amplitude = 1.0;
    let mut frequency = 1.0;
    let mut total_amplitude = 0.0;
    for octave in 0..field.octaves {
        // decorrelate octaves by folding the octave index into the seed
        let seed = field.seed.wrapping_add(0x517c_c1b7_2722_0a95u64.wrapping_mul(octave as u64 + 1));
        sum += amplitude * value_noise(point * frequency, seed);
        total_amplitude += amplitude;
        amplitude *= field.gain;
        frequency *= field.lacunarity;
    }
    sum / total_amplitude
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_bad_parameters() {
        assert!(NoiseField::new(0, 2.0, 0.5, 1).is_err());
        assert!(NoiseField::new(3, 1.0, 0.5, 1).is_err());
        assert!(NoiseField::new(3, 2.0, 1.0, 1).is_err());
    }

    #[test]
    fn deterministic_in_point_and_field() {
        let field = NoiseField::default().with_seed(42);
        let p = Vec3::new(0.37, -1.2, 5.5);
        assert_eq!(fbm(p, &field), fbm(p, &field));
    }

    #[test]
    fn one_octave_equals_basis() {
        let field = NoiseField { octaves: 1, ..NoiseField::default().with_seed(7) };
        let p = Vec3::new(1.3, 0.2, -0.8);
        let seed = field.seed.wrapping_add(0x517c_c1b7_2722_0a95);
        assert_eq!(fbm(p, &field), value_noise(p, seed));
    }

    #[test]
    fn bounded_on_random_points() {
        // brute-force bound check over 10^4 samples
        let field = NoiseField::default().with_seed(3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let p = Vec3::new(
                rng.gen_range(-10.0..10.0),
                rng.gen_range(-10.0..10.0),
                rng.gen_range(-10.0..10.0),
            );
            assert!(fbm(p, &field).abs() <= 1.0);
        }
    }

    #[test]
    fn different_seeds_differ() {
        let a = NoiseField::default().with_seed(1);
        let b = NoiseField::default().with_seed(2);
        let p = Vec3::new(0.5, 0.5, 0.5);
        assert_ne!(fbm(p, &a), fbm(p, &b));
    }
}
