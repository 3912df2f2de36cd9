//! Parameterized deformations of the unit ball used as probing stimuli.
//!
//! Every stimulus starts from a subdivided icosahedron on the unit sphere and
//! is deformed by one of three families: radial rescaling onto the L_p ball,
//! radial displacement by a fixed fractal noise pattern, or axis scaling into
//! an oval. A `StimulusSpec` (family, parameter, seed) fully determines the
//! resulting mesh.

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::noise::{fbm, NoiseField};

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    pub faces: Vec<[u32; 3]>,
}

impl TriangleMesh {
    pub fn validate(&self) -> Result<()> {
        if self.vertices.len() < 4 || self.faces.len() < 4 {
            return Err(Error::invalid("mesh needs at least 4 vertices and 4 faces"));
        }
        if self.normals.len() != self.vertices.len() {
            return Err(Error::invalid("one normal per vertex required"));
        }
        let n = self.vertices.len() as u32;
        for f in &self.faces {
            if f.iter().any(|&i| i >= n) {
                return Err(Error::invalid("face index out of range"));
            }
        }
        for nrm in &self.normals {
            if (nrm.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::invalid("vertex normal is not unit length"));
            }
        }
        Ok(())
    }

    /// Area-weighted average of incident face normals, applied uniformly to
    /// all deformed meshes.
    pub fn recompute_normals(&mut self) {
        let mut acc = vec![Vec3::ZERO; self.vertices.len()];
        for f in &self.faces {
            let [a, b, c] = [f[0] as usize, f[1] as usize, f[2] as usize];
            // cross product length carries the area weight
            let n = (self.vertices[b] - self.vertices[a]).cross(self.vertices[c] - self.vertices[a]);
            acc[a] += n;
            acc[b] += n;
            acc[c] += n;
        }
        self.normals = acc.into_iter().map(|v| v.normalized()).collect();
    }

    /// ASCII OBJ with v/vn/f records and 1-based indices.
    pub fn write_obj<W: Write>(&self, mut w: W) -> Result<()> {
        for v in &self.vertices {
            writeln!(w, "v {} {} {}", v.x, v.y, v.z)?;
        }
        for n in &self.normals {
            writeln!(w, "vn {} {} {}", n.x, n.y, n.z)?;
        }
        for f in &self.faces {
            writeln!(
                w,
                "f {}//{} {}//{} {}//{}",
                f[0] + 1,
                f[0] + 1,
                f[1] + 1,
                f[1] + 1,
                f[2] + 1,
                f[2] + 1
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StimulusFamily {
    LpLow,
    LpHigh,
    Noise,
    Oval,
    Octahedron,
    Sphere,
    Cube,
}

impl StimulusFamily {
    pub fn parameter_range(self) -> Option<(f64, f64)> {
        match self {
            StimulusFamily::LpLow => Some((1.0, 2.0)),
            StimulusFamily::LpHigh => Some((2.0, 100.0)),
            StimulusFamily::Noise => Some((0.0, 0.5)),
            StimulusFamily::Oval => Some((1.0, 0.1)),
            _ => None,
        }
    }
}

impl std::fmt::Display for StimulusFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StimulusFamily::LpLow => "lp_low",
            StimulusFamily::LpHigh => "lp_high",
            StimulusFamily::Noise => "noise",
            StimulusFamily::Oval => "oval",
            StimulusFamily::Octahedron => "octahedron",
            StimulusFamily::Sphere => "sphere",
            StimulusFamily::Cube => "cube",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for StimulusFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lp_low" => Ok(StimulusFamily::LpLow),
            "lp_high" => Ok(StimulusFamily::LpHigh),
            "noise" => Ok(StimulusFamily::Noise),
            "oval" => Ok(StimulusFamily::Oval),
            "octahedron" => Ok(StimulusFamily::Octahedron),
            "sphere" => Ok(StimulusFamily::Sphere),
            "cube" => Ok(StimulusFamily::Cube),
            other => Err(Error::invalid(format!("unknown stimulus family: {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StimulusSpec {
    pub family: StimulusFamily,
    pub p: f64,
    pub seed: u64,
}

impl StimulusSpec {
    pub fn new(family: StimulusFamily, p: f64, seed: u64) -> Result<Self> {
        let spec = StimulusSpec { family, p, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.family {
            StimulusFamily::LpLow => (1.0..=2.0).contains(&self.p),
            StimulusFamily::LpHigh => (2.0..=100.0).contains(&self.p),
            StimulusFamily::Noise => (0.0..=0.5).contains(&self.p),
            StimulusFamily::Oval => (0.1..=1.0).contains(&self.p),
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "parameter {} out of range for family {}",
                self.p, self.family
            )))
        }
    }

    /// Fixed-shape aliases resolve to their underlying family and parameter.
    pub fn canonical(self) -> StimulusSpec {
        match self.family {
            StimulusFamily::Octahedron => {
                StimulusSpec { family: StimulusFamily::LpLow, p: 1.0, seed: self.seed }
            }
            StimulusFamily::Sphere => {
                StimulusSpec { family: StimulusFamily::LpLow, p: 2.0, seed: self.seed }
            }
            StimulusFamily::Cube => {
                StimulusSpec { family: StimulusFamily::LpHigh, p: 100.0, seed: self.seed }
            }
            _ => self,
        }
    }
}

/// Subdivided icosahedron with all vertices projected onto the unit sphere.
/// Vertex count is 10·4^level + 2.
pub fn unit_sphere_mesh(subdivision_level: u32) -> Result<TriangleMesh> {
    if subdivision_level > 8 {
        return Err(Error::invalid("subdivision level must be in [0, 8]"));
    }
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalized())
    .collect();

    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..subdivision_level {
        let mut midpoint: HashMap<(u32, u32), u32> = HashMap::new();
        let mut next_faces = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut mid = [0u32; 3];
            for i in 0..3 {
                let (a, b) = (f[i], f[(i + 1) % 3]);
                let key = (a.min(b), a.max(b));
                mid[i] = *midpoint.entry(key).or_insert_with(|| {
                    let m = ((vertices[a as usize] + vertices[b as usize]) * 0.5).normalized();
                    vertices.push(m);
                    (vertices.len() - 1) as u32
                });
            }
            next_faces.push([f[0], mid[0], mid[2]]);
            next_faces.push([f[1], mid[1], mid[0]]);
            next_faces.push([f[2], mid[2], mid[1]]);
            next_faces.push([mid[0], mid[1], mid[2]]);
        }
        faces = next_faces;
    }

    // on the sphere the vertex itself is the outward normal
    let normals = vertices.clone();
    Ok(TriangleMesh { vertices, normals, faces })
}

fn check_unit_sphere(mesh: &TriangleMesh) -> Result<()> {
    for v in &mesh.vertices {
        if (v.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::Precondition("input vertex not on the unit sphere".into()));
        }
    }
    Ok(())
}

/// Radially rescale each vertex onto the L_p unit ball: v -> v / ||v||_p.
pub fn deform_lp(mesh: &TriangleMesh, p: f64) -> Result<TriangleMesh> {
    if p < 1.0 {
        return Err(Error::invalid("L_p deformation requires p >= 1"));
    }
    check_unit_sphere(mesh)?;
    let mut out = mesh.clone();
    for v in &mut out.vertices {
        let n = v.norm_p(p);
        *v = *v / n;
    }
    out.recompute_normals();
    Ok(out)
}

/// Displace the radius at each vertex by a fixed fractal noise pattern:
/// v -> (1 + magnitude * n(v)) * v with n(v) in [-1, 1].
pub fn deform_noise(mesh: &TriangleMesh, magnitude: f64, noise: &NoiseField) -> Result<TriangleMesh> {
    if !(0.0..=0.5).contains(&magnitude) {
        return Err(Error::invalid("noise magnitude must lie in [0, 0.5]"));
    }
    check_unit_sphere(mesh)?;
    let mut out = mesh.clone();
    for v in &mut out.vertices {
        let n = fbm(*v * NOISE_SURFACE_SCALE, noise);
        *v = *v * (1.0 + magnitude * n);
    }
    out.recompute_normals();
    Ok(out)
}

/// Frequency scale mapping the unit sphere onto the noise lattice; chosen so
/// the base octave spans a few lattice cells across the ball.
const NOISE_SURFACE_SCALE: f64 = 2.5;

/// Scale the X and Z axes by `factor`, squashing the sphere into an oval.
pub fn deform_oval(mesh: &TriangleMesh, factor: f64) -> Result<TriangleMesh> {
    if !(0.1..=1.0).contains(&factor) {
        return Err(Error::invalid("oval factor must lie in [0.1, 1]"));
    }
    let mut out = mesh.clone();
    for v in &mut out.vertices {
        v.x *= factor;
        v.z *= factor;
    }
    out.recompute_normals();
    Ok(out)
}

/// Generate the mesh a spec describes at the given tessellation level.
pub fn generate_stimulus(spec: &StimulusSpec, subdivision_level: u32) -> Result<TriangleMesh> {
    spec.validate()?;
    let spec = spec.canonical();
    let base = unit_sphere_mesh(subdivision_level)?;
    match spec.family {
        StimulusFamily::LpLow | StimulusFamily::LpHigh => deform_lp(&base, spec.p),
        StimulusFamily::Noise => {
            let field = NoiseField::default().with_seed(spec.seed);
            deform_noise(&base, spec.p, &field)
        }
        StimulusFamily::Oval => deform_oval(&base, spec.p),
        _ => unreachable!("canonical() resolves aliases"),
    }
}

/// Evenly spaced parameter sweep over a family's range; LpHigh is spaced in
/// log p, everything else linearly. Endpoints are always included.
pub fn parameter_sweep(family: StimulusFamily, count: usize, seed: u64) -> Result<Vec<StimulusSpec>> {
    if count < 2 {
        return Err(Error::invalid("sweep needs at least 2 points"));
    }
    let (lo, hi) = family
        .parameter_range()
        .ok_or_else(|| Error::invalid(format!("family {family} has no parameter sweep")))?;
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let t = i as f64 / (count - 1) as f64;
        let p = if family == StimulusFamily::LpHigh {
            (lo.ln() + t * (hi.ln() - lo.ln())).exp()
        } else {
            lo + t * (hi - lo)
        };
        // log spacing can overshoot the endpoint by a few ulps
        let p = p.clamp(lo.min(hi), lo.max(hi));
        out.push(StimulusSpec { family, p, seed });
    }
    Ok(out)
}

/// Flatness proxy: mean over faces of the face normal's alignment with its
/// nearest coordinate axis, max(|n_x|, |n_y|, |n_z|). Approaches 1 as the L_p
/// surface flattens toward the axis-aligned cube and is strictly increasing
/// along the high-p sweep. (The more obvious vertex-normal spread statistic
/// turns out to be non-monotone just above p = 2, where ridge curvature grows
/// faster than face interiors flatten.)
pub fn flatness(mesh: &TriangleMesh) -> f64 {
    let mut total = 0.0;
    for f in &mesh.faces {
        let v = [
            mesh.vertices[f[0] as usize],
            mesh.vertices[f[1] as usize],
            mesh.vertices[f[2] as usize],
        ];
        let n = (v[1] - v[0]).cross(v[2] - v[0]).normalized();
        total += n.x.abs().max(n.y.abs()).max(n.z.abs());
    }
    total / mesh.faces.len() as f64
}
