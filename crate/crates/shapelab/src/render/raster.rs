//! Pixel grid shared by the rasterizer, compositor, and model input path.

use std::path::Path;

use crate::error::{Error, Result};
use crate::math::Rgb;

/// H×W RGB image in [0,1] with a binary coverage mask.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<Rgb>,
    pub mask: Vec<bool>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize) -> Self {
        RasterImage {
            width,
            height,
            rgb: vec![Rgb::BLACK; width * height],
            mask: vec![false; width * height],
        }
    }

    #[inline]
    pub fn idx(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    pub fn pixel(&self, x: usize, y: usize) -> Rgb {
        self.rgb[self.idx(x, y)]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, c: Rgb, covered: bool) {
        let i = self.idx(x, y);
        self.rgb[i] = c;
        self.mask[i] = covered;
    }

    pub fn coverage(&self) -> f64 {
        self.mask.iter().filter(|&&m| m).count() as f64 / self.mask.len() as f64
    }

    /// Mean color over mask=1 pixels; black when nothing is covered.
    pub fn mean_masked_color(&self) -> Rgb {
        let mut acc = Rgb::BLACK;
        let mut n = 0usize;
        for (c, &m) in self.rgb.iter().zip(&self.mask) {
            if m {
                acc = acc.add(*c);
                n += 1;
            }
        }
        if n == 0 {
            Rgb::BLACK
        } else {
            acc.scale(1.0 / n as f64)
        }
    }

    /// Bilinear RGB sample at a fractional pixel-center coordinate.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> Rgb {
        let x = x.clamp(0.0, self.width as f64 - 1.0);
        let y = y.clamp(0.0, self.height as f64 - 1.0);
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let tx = x - x0 as f64;
        let ty = y - y0 as f64;
        let top = self.pixel(x0, y0).scale(1.0 - tx).add(self.pixel(x1, y0).scale(tx));
        let bot = self.pixel(x0, y1).scale(1.0 - tx).add(self.pixel(x1, y1).scale(tx));
        top.scale(1.0 - ty).add(bot.scale(ty))
    }

    /// Box-filter downsample by an integer factor; the mask survives where at
    /// least half the source block is covered.
    pub fn downsample(&self, factor: usize) -> Result<RasterImage> {
        if factor == 0 || self.width % factor != 0 || self.height % factor != 0 {
            return Err(Error::invalid("downsample factor must divide both dimensions"));
        }
        let w = self.width / factor;
        let h = self.height / factor;
        let mut out = RasterImage::new(w, h);
        let inv = 1.0 / (factor * factor) as f64;
        for y in 0..h {
            for x in 0..w {
                let mut acc = Rgb::BLACK;
                let mut covered = 0usize;
                for dy in 0..factor {
                    for dx in 0..factor {
                        let i = self.idx(x * factor + dx, y * factor + dy);
                        acc = acc.add(self.rgb[i]);
                        covered += self.mask[i] as usize;
                    }
                }
                out.set_pixel(x, y, acc.scale(inv), covered * 2 >= factor * factor);
            }
        }
        Ok(out)
    }

    /// 8-bit RGBA PNG; the mask rides in the alpha channel.
    pub fn save_png(&self, path: &Path) -> Result<()> {
        let mut img = image::RgbaImage::new(self.width as u32, self.height as u32);
        for y in 0..self.height {
            for x in 0..self.width {
                let i = self.idx(x, y);
                let c = self.rgb[i].clamp01();
                let q = |v: f64| (v * 255.0).round() as u8;
                img.put_pixel(
                    x as u32,
                    y as u32,
                    image::Rgba([q(c.r), q(c.g), q(c.b), if self.mask[i] { 255 } else { 0 }]),
                );
            }
        }
        img.save(path)?;
        Ok(())
    }

    pub fn load_png(path: &Path) -> Result<RasterImage> {
        let img = image::open(path)?.to_rgba8();
        let (w, h) = (img.width() as usize, img.height() as usize);
        let mut out = RasterImage::new(w, h);
        for y in 0..h {
            for x in 0..w {
                let p = img.get_pixel(x as u32, y as u32);
                out.set_pixel(
                    x,
                    y,
                    Rgb::new(p[0] as f64 / 255.0, p[1] as f64 / 255.0, p[2] as f64 / 255.0),
                    p[3] > 127,
                );
            }
        }
        Ok(out)
    }
}

/// Foreground-over-background by the foreground mask; the output keeps the
/// foreground mask.
pub fn composite(foreground: &RasterImage, background: &RasterImage) -> Result<RasterImage> {
    if foreground.width != background.width || foreground.height != background.height {
        return Err(Error::invalid("composite size mismatch"));
    }
    let mut out = foreground.clone();
    for i in 0..out.rgb.len() {
        if !foreground.mask[i] {
            out.rgb[i] = background.rgb[i];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solid(w: usize, h: usize, c: Rgb, mask: bool) -> RasterImage {
        let mut img = RasterImage::new(w, h);
        for y in 0..h {
            for x in 0..w {
                img.set_pixel(x, y, c, mask);
            }
        }
        img
    }

    #[test]
    fn composite_full_mask_keeps_foreground() {
        let fg = solid(4, 4, Rgb::gray(0.8), true);
        let bg = solid(4, 4, Rgb::gray(0.2), false);
        let out = composite(&fg, &bg).unwrap();
        assert_eq!(out.rgb, fg.rgb);
    }

    #[test]
    fn composite_empty_mask_keeps_background() {
        let fg = solid(4, 4, Rgb::gray(0.8), false);
        let bg = solid(4, 4, Rgb::gray(0.2), false);
        let out = composite(&fg, &bg).unwrap();
        assert_eq!(out.rgb, bg.rgb);
    }

    #[test]
    fn composite_checkerboard_agrees_on_mask() {
        let mut fg = solid(4, 4, Rgb::gray(0.9), false);
        for y in 0..4 {
            for x in 0..4 {
                if (x + y) % 2 == 0 {
                    fg.set_pixel(x, y, Rgb::gray(0.9), true);
                }
            }
        }
        let bg = solid(4, 4, Rgb::gray(0.1), false);
        let out = composite(&fg, &bg).unwrap();
        for y in 0..4 {
            for x in 0..4 {
                let expect = if (x + y) % 2 == 0 { 0.9 } else { 0.1 };
                assert_eq!(out.pixel(x, y), Rgb::gray(expect));
            }
        }
    }

    #[test]
    fn composite_idempotent_in_background() {
        let mut fg = solid(4, 4, Rgb::gray(0.9), false);
        fg.set_pixel(1, 1, Rgb::gray(0.9), true);
        let bg = solid(4, 4, Rgb::gray(0.1), false);
        let once = composite(&fg, &bg).unwrap();
        let twice = composite(&fg, &once).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn composite_rejects_size_mismatch() {
        let fg = solid(4, 4, Rgb::BLACK, true);
        let bg = solid(5, 4, Rgb::BLACK, false);
        assert!(composite(&fg, &bg).is_err());
    }

    #[test]
    fn downsample_box_average() {
        let mut img = RasterImage::new(2, 2);
        img.set_pixel(0, 0, Rgb::gray(1.0), true);
        img.set_pixel(1, 0, Rgb::gray(0.0), true);
        img.set_pixel(0, 1, Rgb::gray(0.5), false);
        img.set_pixel(1, 1, Rgb::gray(0.5), false);
        let out = img.downsample(2).unwrap();
        assert_eq!(out.width, 1);
        assert_eq!(out.pixel(0, 0), Rgb::gray(0.5));
        assert!(out.mask[0]); // half the block was covered
        assert!(img.downsample(3).is_err());
    }

    #[test]
    fn png_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.png");
        let mut img = RasterImage::new(8, 8);
        img.set_pixel(3, 4, Rgb::new(0.2, 0.4, 0.6), true);
        img.save_png(&path).unwrap();
        let back = RasterImage::load_png(&path).unwrap();
        assert_eq!(back.width, 8);
        assert!(back.mask[back.idx(3, 4)]);
        assert!((back.pixel(3, 4).g - 0.4).abs() < 1.0 / 255.0);
    }
}
