//! 8-bit grayscale images with binary PGM (P5) storage.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use super::VisionError;

pub const TILE_SIDE: usize = 32;
pub const TILE_PIXELS: usize = TILE_SIDE * TILE_SIDE;

/// Row-major 8-bit grayscale image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, fill: u8) -> Image {
        Image {
            width,
            height,
            pixels: vec![fill; width * height],
        }
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<u8>) -> Result<Image, VisionError> {
        if pixels.len() != width * height {
            return Err(VisionError::Format(format!(
                "expected {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Image {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y * self.width + x] = v;
    }

    /// Clamped read at real-valued coordinates with bilinear interpolation.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        let xc = x.clamp(0.0, (self.width - 1) as f64);
        let yc = y.clamp(0.0, (self.height - 1) as f64);
        let x0 = xc.floor() as usize;
        let y0 = yc.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = xc - x0 as f64;
        let fy = yc - y0 as f64;
        let p00 = self.get(x0, y0) as f64;
        let p10 = self.get(x1, y0) as f64;
        let p01 = self.get(x0, y1) as f64;
        let p11 = self.get(x1, y1) as f64;
        p00 * (1.0 - fx) * (1.0 - fy)
            + p10 * fx * (1.0 - fy)
            + p01 * (1.0 - fx) * fy
            + p11 * fx * fy
    }

    /// Resample an axis-aligned source rectangle to `out_w` x `out_h` with
    /// bilinear interpolation (pixel centers aligned).
    pub fn resample_region(
        &self,
        x0: f64,
        y0: f64,
        src_w: f64,
        src_h: f64,
        out_w: usize,
        out_h: usize,
    ) -> Image {
        let mut out = Image::new(out_w, out_h, 0);
        for oy in 0..out_h {
            let sy = y0 + (oy as f64 + 0.5) * src_h / out_h as f64 - 0.5;
            for ox in 0..out_w {
                let sx = x0 + (ox as f64 + 0.5) * src_w / out_w as f64 - 0.5;
                out.set(ox, oy, self.sample_bilinear(sx, sy).round().clamp(0.0, 255.0) as u8);
            }
        }
        out
    }

    pub fn save_pgm(&self, path: &Path) -> Result<(), VisionError> {
        let mut f = io::BufWriter::new(fs::File::create(path)?);
        write!(f, "P5\n{} {}\n255\n", self.width, self.height)?;
        f.write_all(&self.pixels)?;
        Ok(())
    }

    pub fn load_pgm(path: &Path) -> Result<Image, VisionError> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        Image::parse_pgm(&bytes)
    }

    pub fn parse_pgm(bytes: &[u8]) -> Result<Image, VisionError> {
        let mut pos = 0usize;
        let mut token = |bytes: &[u8]| -> Result<String, VisionError> {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(VisionError::Format("truncated header".into()));
            }
            Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
        };
        if token(bytes)? != "P5" {
            return Err(VisionError::Format("not a P5 pgm".into()));
        }
        let width: usize = token(bytes)?
            .parse()
            .map_err(|_| VisionError::Format("bad width".into()))?;
        let height: usize = token(bytes)?
            .parse()
            .map_err(|_| VisionError::Format("bad height".into()))?;
        let maxval: usize = token(bytes)?
            .parse()
            .map_err(|_| VisionError::Format("bad maxval".into()))?;
        if maxval != 255 {
            return Err(VisionError::Format(format!("unsupported maxval {maxval}")));
        }
        pos += 1;
        if bytes.len() < pos + width * height {
            return Err(VisionError::Format("truncated pixel data".into()));
        }
        Image::from_pixels(width, height, bytes[pos..pos + width * height].to_vec())
    }
}
