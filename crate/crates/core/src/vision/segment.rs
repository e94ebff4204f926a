//! Board localization and tile extraction: Sobel gradients with hysteresis
//! edge linking find the frame, the box interior is split into 16 tiles.

use super::image::{Image, TILE_SIDE};
use super::VisionError;

/// Inclusive pixel bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundingBox {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl BoundingBox {
    pub fn width(&self) -> usize {
        self.x1 + 1 - self.x0
    }

    pub fn height(&self) -> usize {
        self.y1 + 1 - self.y0
    }
}

/// Sobel gradient magnitude; border pixels get zero gradient.
fn gradient_magnitude(image: &Image) -> Vec<f64> {
    let (w, h) = (image.width(), image.height());
    let mut mag = vec![0.0f64; w * h];
    if w < 3 || h < 3 {
        return mag;
    }
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let p = |dx: i64, dy: i64| -> f64 {
                image.get((x as i64 + dx) as usize, (y as i64 + dy) as usize) as f64
            };
            let gx = -p(-1, -1) - 2.0 * p(-1, 0) - p(-1, 1) + p(1, -1) + 2.0 * p(1, 0) + p(1, 1);
            let gy = -p(-1, -1) - 2.0 * p(0, -1) - p(1, -1) + p(-1, 1) + 2.0 * p(0, 1) + p(1, 1);
            mag[y * w + x] = (gx * gx + gy * gy).sqrt();
        }
    }
    mag
}

/// Locate the board: Sobel magnitude, hysteresis at 20% / 60% of the max
/// gradient, then the tightest box around the largest 8-connected edge
/// component (the frame outlines every rendered board).
pub fn detect_boundary(image: &Image) -> Result<BoundingBox, VisionError> {
    let (w, h) = (image.width(), image.height());
    let mag = gradient_magnitude(image);
    let max = mag.iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return Err(VisionError::NoBoard);
    }
    let strong = 0.6 * max;
    let weak = 0.2 * max;

    // Hysteresis: flood weak pixels reachable from strong seeds.
    let mut edge = vec![false; w * h];
    let mut stack: Vec<usize> = Vec::new();
    for (i, &m) in mag.iter().enumerate() {
        if m >= strong {
            edge[i] = true;
            stack.push(i);
        }
    }
    if stack.is_empty() {
        return Err(VisionError::NoBoard);
    }
    while let Some(i) = stack.pop() {
        let (x, y) = (i % w, i / w);
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if !edge[j] && mag[j] >= weak {
                    edge[j] = true;
                    stack.push(j);
                }
            }
        }
    }

    // Largest 8-connected component of edge pixels.
    let mut component = vec![0u32; w * h];
    let mut best = (0usize, 0u32);
    let mut next = 0u32;
    for start in 0..w * h {
        if !edge[start] || component[start] != 0 {
            continue;
        }
        next += 1;
        let mut size = 0usize;
        stack.push(start);
        component[start] = next;
        while let Some(i) = stack.pop() {
            size += 1;
            let (x, y) = (i % w, i / w);
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if edge[j] && component[j] == 0 {
                        component[j] = next;
                        stack.push(j);
                    }
                }
            }
        }
        if size > best.0 {
            best = (size, next);
        }
    }

    let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0usize, 0usize);
    for (i, &label) in component.iter().enumerate() {
        if label == best.1 {
            let (x, y) = (i % w, i / w);
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
    }
    Ok(BoundingBox { x0, y0, x1, y1 })
}

/// Gaussian-weighted local mean thresholding: a pixel is foreground (255)
/// iff it is darker than its local mean minus the offset C.
pub fn adaptive_threshold(image: &Image) -> Image {
    const WINDOW: i64 = 11;
    const SIGMA: f64 = 3.0;
    const C: f64 = 5.0;
    let (w, h) = (image.width(), image.height());
    let half = WINDOW / 2;
    let kernel: Vec<f64> = (-half..=half)
        .map(|i| (-((i * i) as f64) / (2.0 * SIGMA * SIGMA)).exp())
        .collect();
    let ksum: f64 = kernel.iter().sum();

    // Separable blur with replicated borders.
    let mut horiz = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, kv) in kernel.iter().enumerate() {
                let sx = (x as i64 + k as i64 - half).clamp(0, w as i64 - 1) as usize;
                acc += kv * image.get(sx, y) as f64;
            }
            horiz[y * w + x] = acc / ksum;
        }
    }
    let mut out = Image::new(w, h, 0);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, kv) in kernel.iter().enumerate() {
                let sy = (y as i64 + k as i64 - half).clamp(0, h as i64 - 1) as usize;
                acc += kv * horiz[sy * w + x];
            }
            let mean = acc / ksum;
            if (image.get(x, y) as f64) < mean - C {
                out.set(x, y, 255);
            }
        }
    }
    out
}

/// Median gray level of a one-pixel strip along one side of a rectangle.
fn strip_median(image: &Image, x0: usize, y0: usize, x1: usize, y1: usize, side: usize, offset: usize) -> u8 {
    let mut vals: Vec<u8> = match side {
        0 => (y0..=y1).map(|y| image.get(x0 + offset, y)).collect(),
        1 => (y0..=y1).map(|y| image.get(x1 - offset, y)).collect(),
        2 => (x0..=x1).map(|x| image.get(x, y0 + offset)).collect(),
        _ => (x0..=x1).map(|x| image.get(x, y1 - offset)).collect(),
    };
    let mid = vals.len() / 2;
    *vals.select_nth_unstable(mid).1
}

/// Split the box interior into 16 tiles resampled to 32x32, row-major.
/// The detected box hugs the outside of the dark frame, so each side first
/// skips any light overshoot, then the frame itself, measured directly
/// from the pixels rather than assumed from the render geometry.
pub fn extract_tiles(image: &Image, bbox: &BoundingBox) -> Result<[Image; 16], VisionError> {
    if bbox.x1 <= bbox.x0 || bbox.y1 <= bbox.y0 {
        return Err(VisionError::DegenerateBox);
    }
    let (mut x0, mut y0, mut x1, mut y1) = (bbox.x0, bbox.y0, bbox.x1, bbox.y1);
    let cap_x = bbox.width() / 8;
    let cap_y = bbox.height() / 8;
    for side in 0..4usize {
        let cap = if side < 2 { cap_x } else { cap_y };
        let mut inset = 0usize;
        // Phase one: light pixels outside the frame.
        while inset < cap && strip_median(image, x0, y0, x1, y1, side, inset) >= 128 {
            inset += 1;
        }
        // Phase two: the dark frame itself.
        while inset < cap && strip_median(image, x0, y0, x1, y1, side, inset) < 128 {
            inset += 1;
        }
        match side {
            0 => x0 += inset,
            1 => x1 -= inset,
            2 => y0 += inset,
            _ => y1 -= inset,
        }
    }
    if x1 <= x0 || y1 <= y0 {
        return Err(VisionError::DegenerateBox);
    }

    let cell_w = (x1 + 1 - x0) as f64 / 4.0;
    let cell_h = (y1 + 1 - y0) as f64 / 4.0;
    let tiles: Vec<Image> = (0..16)
        .map(|i| {
            let (row, col) = (i / 4, i % 4);
            image.resample_region(
                x0 as f64 + col as f64 * cell_w,
                y0 as f64 + row as f64 * cell_h,
                cell_w,
                cell_h,
                TILE_SIDE,
                TILE_SIDE,
            )
        })
        .collect();
    Ok(tiles.try_into().expect("sixteen tiles"))
}
