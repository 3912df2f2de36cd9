//! Conflicting-cue stimuli: the occluding contour of one shape filled with
//! the shading of another.
//!
//! Both meshes must be star-shaped about the origin. The contour mesh's
//! silhouette defines the output mask; each covered pixel is pulled back to
//! the shading mesh's rendering by normalized radial coordinates around the
//! two silhouettes' centroids.

use crate::error::{Error, Result};
use crate::geometry::TriangleMesh;
use crate::render::raster::RasterImage;
use crate::render::rasterizer::{render, silhouette};
use crate::render::scene::{Camera, LightingSetup, Material};

struct RadialMask {
    centroid: (f64, f64),
    mask: RasterImage,
}

impl RadialMask {
    fn new(mask: RasterImage) -> Result<RadialMask> {
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
        for y in 0..mask.height {
            for x in 0..mask.width {
                if mask.mask[y * mask.width + x] {
                    sx += x as f64 + 0.5;
                    sy += y as f64 + 0.5;
                    n += 1;
                }
            }
        }
        if n == 0 {
            return Err(Error::DegenerateStimulus("empty silhouette".into()));
        }
        Ok(RadialMask { centroid: (sx / n as f64, sy / n as f64), mask })
    }

    fn covered(&self, x: f64, y: f64) -> bool {
        if x < 0.0 || y < 0.0 || x >= self.mask.width as f64 || y >= self.mask.height as f64 {
            return false;
        }
        self.mask.mask[y as usize * self.mask.width + x as usize]
    }

    /// Radial extent of the mask from its centroid along (dx, dy), found by
    /// marching outward in quarter-pixel steps. Valid for star-shaped masks.
    fn extent(&self, dx: f64, dy: f64) -> f64 {
        let max_r = (self.mask.width.pow(2) as f64 + self.mask.height.pow(2) as f64).sqrt();
        let mut last = 0.0;
        let mut r = 0.25;
        while r < max_r {
            if self.covered(self.centroid.0 + dx * r, self.centroid.1 + dy * r) {
                last = r;
            } else if r > last + 2.0 {
                break; // left the mask for good
            }
            r += 0.25;
        }
        last
    }
}

/// Render the shading mesh, then resample its interior into the contour
/// mesh's silhouette.
pub fn hybrid_render(
    contour_mesh: &TriangleMesh,
    shading_mesh: &TriangleMesh,
    camera: &Camera,
    lighting: &LightingSetup,
    material: &Material,
) -> Result<RasterImage> {
    let contour = RadialMask::new(silhouette(contour_mesh, camera)?)?;
    let shaded_img = render(shading_mesh, camera, lighting, material)?;
    let shading = RadialMask::new(silhouette(shading_mesh, camera)?)?;

    let mut out = RasterImage::new(camera.width, camera.height);
    for y in 0..camera.height {
        for x in 0..camera.width {
            let i = y * camera.width + x;
            if !contour.mask.mask[i] {
                continue;
            }
            let px = x as f64 + 0.5;
            let py = y as f64 + 0.5;
            let dx = px - contour.centroid.0;
            let dy = py - contour.centroid.1;
            let r = (dx * dx + dy * dy).sqrt();
            let (sx, sy) = if r < 1e-9 {
                (shading.centroid.0, shading.centroid.1)
            } else {
                let (ux, uy) = (dx / r, dy / r);
                let rc = contour.extent(ux, uy).max(1e-6);
                let rs = shading.extent(ux, uy);
                // normalized radius, clamped against silhouette discretization
                let t = (r / rc).min(1.0);
                (
                    shading.centroid.0 + ux * t * rs,
                    shading.centroid.1 + uy * t * rs,
                )
            };
            let c = shaded_img.sample_bilinear(sx - 0.5, sy - 0.5);
            out.rgb[i] = c;
            out.mask[i] = true;
        }
    }
    Ok(out)
}
