//! Z-buffered triangle rasterizer with perspective projection and
//! Blinn-Phong shading. Pixel-center sampling, no anti-aliasing.

use crate::error::Result;
use crate::geometry::TriangleMesh;
use crate::math::{Rgb, Vec3};
use crate::render::raster::RasterImage;
use crate::render::scene::{Camera, LightingSetup, Material};
use crate::render::texture::TextureSampler;

const NEAR_PLANE: f64 = 0.05;

struct Projected {
    // screen-space pixel coordinates
    sx: f64,
    sy: f64,
    // reciprocal camera depth, for perspective-correct interpolation
    inv_z: f64,
    visible: bool,
}

fn project(camera: &Camera, v: Vec3) -> Projected {
    let (right, up, forward) = camera.basis();
    let rel = v - camera.eye;
    let x = rel.dot(right);
    let y = rel.dot(up);
    let z = rel.dot(forward); // positive in front of the camera
    if z < NEAR_PLANE {
        return Projected { sx: 0.0, sy: 0.0, inv_z: 0.0, visible: false };
    }
    let f = 1.0 / (camera.vertical_fov_deg.to_radians() / 2.0).tan();
    let aspect = camera.width as f64 / camera.height as f64;
    let ndc_x = f * x / (z * aspect);
    let ndc_y = f * y / z;
    Projected {
        sx: (ndc_x * 0.5 + 0.5) * camera.width as f64,
        sy: (0.5 - ndc_y * 0.5) * camera.height as f64,
        inv_z: 1.0 / z,
        visible: true,
    }
}

fn edge(ax: f64, ay: f64, bx: f64, by: f64, px: f64, py: f64) -> f64 {
    (bx - ax) * (py - ay) - (by - ay) * (px - ax)
}

/// Per-covered-pixel callback: (x, y, depth, object-space position, normal).
fn rasterize<F: FnMut(usize, usize, f64, Vec3, Vec3)>(
    mesh: &TriangleMesh,
    camera: &Camera,
    zbuf: &mut [f64],
    mut shade: F,
) {
    let (w, h) = (camera.width, camera.height);
    for face in &mesh.faces {
        let idx = [face[0] as usize, face[1] as usize, face[2] as usize];
        let pos = [mesh.vertices[idx[0]], mesh.vertices[idx[1]], mesh.vertices[idx[2]]];
        let nrm = [mesh.normals[idx[0]], mesh.normals[idx[1]], mesh.normals[idx[2]]];
        let proj: Vec<Projected> = pos.iter().map(|&p| project(camera, p)).collect();
        if proj.iter().any(|p| !p.visible) {
            continue;
        }
        let area = edge(proj[0].sx, proj[0].sy, proj[1].sx, proj[1].sy, proj[2].sx, proj[2].sy);
        if area.abs() < 1e-12 {
            continue;
        }
        let min_x = proj.iter().map(|p| p.sx).fold(f64::INFINITY, f64::min).floor().max(0.0) as usize;
        let max_x =
            (proj.iter().map(|p| p.sx).fold(f64::NEG_INFINITY, f64::max).ceil() as usize).min(w - 1);
        let min_y = proj.iter().map(|p| p.sy).fold(f64::INFINITY, f64::min).floor().max(0.0) as usize;
        let max_y =
            (proj.iter().map(|p| p.sy).fold(f64::NEG_INFINITY, f64::max).ceil() as usize).min(h - 1);
        if min_x > max_x || min_y > max_y {
            continue;
        }
        for py in min_y..=max_y {
            let cy = py as f64 + 0.5;
            for px in min_x..=max_x {
                let cx = px as f64 + 0.5;
                let w0 = edge(proj[1].sx, proj[1].sy, proj[2].sx, proj[2].sy, cx, cy) / area;
                let w1 = edge(proj[2].sx, proj[2].sy, proj[0].sx, proj[0].sy, cx, cy) / area;
                let w2 = 1.0 - w0 - w1;
                if w0 < 0.0 || w1 < 0.0 || w2 < 0.0 {
                    continue;
                }
                // perspective-correct barycentrics
                let iz = w0 * proj[0].inv_z + w1 * proj[1].inv_z + w2 * proj[2].inv_z;
                let depth = 1.0 / iz;
                let zi = py * w + px;
                if depth >= zbuf[zi] {
                    continue;
                }
                zbuf[zi] = depth;
                let b0 = w0 * proj[0].inv_z * depth;
                let b1 = w1 * proj[1].inv_z * depth;
                let b2 = w2 * proj[2].inv_z * depth;
                let position = pos[0] * b0 + pos[1] * b1 + pos[2] * b2;
                let normal = (nrm[0] * b0 + nrm[1] * b1 + nrm[2] * b2).normalized();
                shade(px, py, depth, position, normal);
            }
        }
    }
}

/// Render a mesh: ambient plus per-light diffuse and Blinn specular terms,
/// modulated by the material's solid texture. The mask marks covered pixels.
pub fn render(
    mesh: &TriangleMesh,
    camera: &Camera,
    lighting: &LightingSetup,
    material: &Material,
) -> Result<RasterImage> {
    camera.validate()?;
    lighting.validate()?;
    mesh.validate()?;
    let sampler = material
        .texture
        .map(|spec| TextureSampler::new(spec, material.base_color));
    let mut img = RasterImage::new(camera.width, camera.height);
    let mut zbuf = vec![f64::INFINITY; camera.width * camera.height];
    let eye = camera.eye;
    rasterize(mesh, camera, &mut zbuf, |px, py, _depth, position, normal| {
        let albedo = match &sampler {
            Some(s) => s.sample(position),
            None => material.base_color,
        };
        let view = (eye - position).normalized();
        // flip the normal toward the viewer so interior back faces still shade
        let n = if normal.dot(view) < 0.0 { -normal } else { normal };
        let mut color = lighting.ambient.mul(albedo);
        for light in &lighting.directionals {
            let diffuse = n.dot(light.direction).max(0.0);
            let half = (light.direction + view).normalized();
            let spec = material.specular_strength * n.dot(half).max(0.0).powf(material.shininess);
            color = color
                .add(light.color.mul(albedo).scale(diffuse))
                .add(light.color.scale(spec));
        }
        img.set_pixel(px, py, color.clamp01(), true);
    });
    Ok(img)
}

/// Binary coverage mask only; identical to `render`'s mask channel for any
/// lighting and material.
pub fn silhouette(mesh: &TriangleMesh, camera: &Camera) -> Result<RasterImage> {
    camera.validate()?;
    let mut img = RasterImage::new(camera.width, camera.height);
    let mut zbuf = vec![f64::INFINITY; camera.width * camera.height];
    rasterize(mesh, camera, &mut zbuf, |px, py, _d, _p, _n| {
        img.set_pixel(px, py, Rgb::gray(1.0), true);
    });
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{deform_lp, unit_sphere_mesh};
    use crate::render::scene::DirectionalLight;

    fn sphere() -> TriangleMesh {
        unit_sphere_mesh(3).unwrap()
    }

    #[test]
    fn deterministic() {
        let m = sphere();
        let c = Camera::standard(48, 48);
        let l = LightingSetup::soft_default();
        let mat = Material::gray_specular();
        let a = render(&m, &c, &l, &mat).unwrap();
        let b = render(&m, &c, &l, &mat).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ambient_only_is_flat() {
        let m = sphere();
        let c = Camera::standard(48, 48);
        let l = LightingSetup {
            ambient: Rgb::gray(0.4),
            directionals: vec![DirectionalLight {
                direction: Vec3::new(0.0, 1.0, 0.0),
                color: Rgb::BLACK,
            }],
        };
        let img = render(&m, &c, &l, &Material::gray_specular()).unwrap();
        let covered: Vec<Rgb> = img
            .rgb
            .iter()
            .zip(&img.mask)
            .filter(|(_, &m)| m)
            .map(|(c, _)| *c)
            .collect();
        assert!(!covered.is_empty());
        for c in &covered {
            assert_eq!(*c, covered[0]);
        }
    }

    #[test]
    fn axial_light_brightest_near_center() {
        let mut c = Camera::standard(64, 64);
        c.eye = Vec3::new(0.0, 0.0, 3.4);
        let l = LightingSetup {
            ambient: Rgb::gray(0.1),
            directionals: vec![DirectionalLight {
                direction: Vec3::new(0.0, 0.0, 1.0),
                color: Rgb::gray(0.8),
            }],
        };
        let mat = Material { specular_strength: 0.0, ..Material::gray_specular() };
        let img = render(&sphere(), &c, &l, &mat).unwrap();
        // silhouette centroid
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
        for y in 0..64 {
            for x in 0..64 {
                if img.mask[img.idx(x, y)] {
                    sx += x as f64;
                    sy += y as f64;
                    n += 1.0;
                }
            }
        }
        let (cx, cy) = (sx / n, sy / n);
        let (mut bx, mut by, mut best) = (0.0, 0.0, -1.0);
        for y in 0..64 {
            for x in 0..64 {
                let i = img.idx(x, y);
                if img.mask[i] && img.rgb[i].luminance() > best {
                    best = img.rgb[i].luminance();
                    bx = x as f64;
                    by = y as f64;
                }
            }
        }
        let dist = ((bx - cx).powi(2) + (by - cy).powi(2)).sqrt();
        assert!(dist <= 2.0, "brightest pixel {dist:.2}px from centroid");
    }

    #[test]
    fn silhouette_matches_render_mask() {
        let m = deform_lp(&sphere(), 4.0).unwrap();
        let c = Camera::standard(48, 48);
        let img = render(&m, &c, &LightingSetup::soft_default(), &Material::gray_specular()).unwrap();
        let sil = silhouette(&m, &c).unwrap();
        assert_eq!(img.mask, sil.mask);
    }

    #[test]
    fn mesh_behind_camera_empty_mask() {
        let mut m = sphere();
        for v in &mut m.vertices {
            *v = *v + Vec3::new(0.0, 0.0, 100.0); // behind the standard camera
        }
        let c = Camera::standard(48, 48);
        let sil = silhouette(&m, &c).unwrap();
        assert!(sil.mask.iter().all(|&b| !b));
    }

    #[test]
    fn cube_and_sphere_masks_differ() {
        let c = Camera::standard(64, 64);
        let s = silhouette(&sphere(), &c).unwrap();
        let cube = deform_lp(&sphere(), 100.0).unwrap();
        let q = silhouette(&cube, &c).unwrap();
        let differing = s.mask.iter().zip(&q.mask).filter(|(a, b)| a != b).count();
        assert!(differing as f64 / s.mask.len() as f64 > 0.01);
    }

    #[test]
    fn radiance_linear_in_light_intensity() {
        let m = sphere();
        let c = Camera::standard(32, 32);
        // weak lights so no pixel clamps
        let l = LightingSetup {
            ambient: Rgb::gray(0.1),
            directionals: vec![DirectionalLight {
                direction: Vec3::new(-0.5, 0.8, 0.6).normalized(),
                color: Rgb::gray(0.3),
            }],
        };
        let mat = Material::gray_specular();
        let one = render(&m, &c, &l, &mat).unwrap();
        let half = render(&m, &c, &l.scaled(0.5), &mat).unwrap();
        for (a, b) in one.rgb.iter().zip(&half.rgb) {
            assert!((a.r * 0.5 - b.r).abs() < 1e-12);
            assert!((a.g * 0.5 - b.g).abs() < 1e-12);
            assert!((a.b * 0.5 - b.b).abs() < 1e-12);
        }
    }

    #[test]
    fn standard_coverage_in_bounds() {
        let c = Camera::standard(64, 64);
        for mesh in [sphere(), deform_lp(&sphere(), 100.0).unwrap()] {
            let cov = silhouette(&mesh, &c).unwrap().coverage();
            assert!(cov > 0.05 && cov < 0.8, "coverage {cov}");
        }
    }

    #[test]
    fn degenerate_camera_rejected() {
        let mut c = Camera::standard(48, 48);
        c.vertical_fov_deg = 200.0;
        assert!(render(
            &sphere(),
            &c,
            &LightingSetup::soft_default(),
            &Material::gray_specular()
        )
        .is_err());
    }
}
