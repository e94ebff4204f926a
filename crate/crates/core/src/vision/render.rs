//! Synthetic screenshot renderer: a 4x4 board inside a dark frame, digits
//! from the embedded bitmap font, plus seeded lighting perturbations.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::font::{glyph, GLYPH_COLS, GLYPH_ROWS};
use super::image::Image;
use crate::game::Board;
use crate::rng::Rng64;

/// Canvas edge length: 4 tiles of 40 px inside a 3 px frame and 10 px margin.
pub const BOARD_SIDE: usize = 186;
pub const MARGIN: usize = 10;
pub const FRAME_THICKNESS: usize = 3;
pub const TILE_CELL: usize = 40;
/// First interior pixel (margin plus frame).
pub const INTERIOR_ORIGIN: usize = MARGIN + FRAME_THICKNESS;
pub const INTERIOR_SIDE: usize = 4 * TILE_CELL;

pub const BG_LEVEL: f64 = 205.0;
pub const FRAME_INK: f64 = 45.0;
pub const DIGIT_INK: f64 = 50.0;

/// Magnitudes of the seeded perturbations. Each is a maximum; the draw is
/// uniform in +-magnitude.
#[derive(Clone, Copy, Debug)]
pub struct RenderStyle {
    /// Global gray-level offset, emulating lighting changes.
    pub brightness: f64,
    /// Additive Gaussian pixel noise.
    pub noise_sigma: f64,
    /// Per-tile digit translation in pixels.
    pub translation: f64,
    /// Per-tile digit rotation in degrees.
    pub rotation_deg: f64,
}

impl Default for RenderStyle {
    fn default() -> RenderStyle {
        RenderStyle {
            brightness: 15.0,
            noise_sigma: 4.0,
            translation: 2.0,
            rotation_deg: 2.0,
        }
    }
}

impl RenderStyle {
    /// No perturbations at all: the geometric ground truth.
    pub fn exact() -> RenderStyle {
        RenderStyle {
            brightness: 0.0,
            noise_sigma: 0.0,
            translation: 0.0,
            rotation_deg: 0.0,
        }
    }
}

/// Scaled digit-string mask with real-valued bilinear sampling.
struct DigitBlock {
    width: usize,
    height: usize,
    ink: Vec<f32>,
}

impl DigitBlock {
    fn new(value: u64, scale: usize) -> DigitBlock {
        let digits: Vec<u8> = value
            .to_string()
            .bytes()
            .map(|b| b - b'0')
            .collect();
        let k = digits.len();
        let width = (GLYPH_COLS * k + (k - 1)) * scale;
        let height = GLYPH_ROWS * scale;
        let mut ink = vec![0.0f32; width * height];
        for (d, &digit) in digits.iter().enumerate() {
            let g = glyph(digit);
            let x_off = d * (GLYPH_COLS + 1) * scale;
            for (r, row) in g.iter().enumerate() {
                for (c, &on) in row.iter().enumerate() {
                    if on {
                        for sy in 0..scale {
                            for sx in 0..scale {
                                let x = x_off + c * scale + sx;
                                let y = r * scale + sy;
                                ink[y * width + x] = 1.0;
                            }
                        }
                    }
                }
            }
        }
        DigitBlock { width, height, ink }
    }

    /// Bilinear coverage at block coordinates; pixel (i, j) covers
    /// [j, j+1) x [i, i+1) with its value at the center. Zero outside.
    fn coverage(&self, x: f64, y: f64) -> f64 {
        let gx = x - 0.5;
        let gy = y - 0.5;
        let x0 = gx.floor() as i64;
        let y0 = gy.floor() as i64;
        let fx = gx - x0 as f64;
        let fy = gy - y0 as f64;
        let at = |xi: i64, yi: i64| -> f64 {
            if xi < 0 || yi < 0 || xi >= self.width as i64 || yi >= self.height as i64 {
                0.0
            } else {
                self.ink[yi as usize * self.width + xi as usize] as f64
            }
        };
        at(x0, y0) * (1.0 - fx) * (1.0 - fy)
            + at(x0 + 1, y0) * fx * (1.0 - fy)
            + at(x0, y0 + 1) * (1.0 - fx) * fy
            + at(x0 + 1, y0 + 1) * fx * fy
    }
}

/// Font scale by digit count: single digits large, "2048" small.
fn scale_for(value: u64) -> usize {
    match value.to_string().len() {
        1 => 3,
        2 => 2,
        _ => 1,
    }
}

/// Per-tile placement jitter: translation in pixels, rotation in radians.
struct Jitter {
    dx: f64,
    dy: f64,
    theta: f64,
}

fn draw_tile_digits(canvas: &mut Image, row: usize, col: usize, exponent: u8, j: &Jitter, ink: f64) {
    let value = 1u64 << exponent;
    let block = DigitBlock::new(value, scale_for(value));
    let x0 = INTERIOR_ORIGIN + col * TILE_CELL;
    let y0 = INTERIOR_ORIGIN + row * TILE_CELL;
    // Snap the untranslated block origin to the pixel grid so a zero-style
    // render samples mask pixel centers exactly and stays crisp.
    let bx = (x0 as f64 + (TILE_CELL as f64 - block.width as f64) / 2.0).round() + j.dx;
    let by = (y0 as f64 + (TILE_CELL as f64 - block.height as f64) / 2.0).round() + j.dy;
    let ccx = bx + block.width as f64 / 2.0;
    let ccy = by + block.height as f64 / 2.0;
    let (sin_t, cos_t) = j.theta.sin_cos();
    for py in y0..y0 + TILE_CELL {
        for px in x0..x0 + TILE_CELL {
            // Canvas pixel centers sit at half-integers, matching the
            // block's sampling convention.
            let vx = px as f64 + 0.5 - ccx;
            let vy = py as f64 + 0.5 - ccy;
            // Inverse rotation maps canvas offsets into block coordinates.
            let ux = cos_t * vx + sin_t * vy + block.width as f64 / 2.0;
            let uy = -sin_t * vx + cos_t * vy + block.height as f64 / 2.0;
            let cov = block.coverage(ux, uy);
            if cov > 0.0 {
                let base = canvas.get(px, py) as f64;
                let v = base + (ink - base) * cov;
                canvas.set(px, py, v.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
}

/// Render a board to a grayscale screenshot. All randomness comes from
/// `rng`, consumed in a fixed order: brightness, then per non-empty tile
/// (row-major) translation x, translation y, rotation, then per-pixel
/// noise row-major. Equal seeds and style give bit-identical images.
pub fn render_board(board: &Board, style: &RenderStyle, rng: &mut Rng64) -> Image {
    let b = if style.brightness > 0.0 {
        rng.gen_range(-style.brightness..=style.brightness)
    } else {
        0.0
    };
    let bg = BG_LEVEL + b;
    let frame = FRAME_INK + b;
    let ink = DIGIT_INK + b;

    let mut canvas = Image::new(BOARD_SIDE, BOARD_SIDE, bg.round().clamp(0.0, 255.0) as u8);
    let lo = MARGIN;
    let hi = MARGIN + FRAME_THICKNESS + INTERIOR_SIDE + FRAME_THICKNESS;
    let frame_px = frame.round().clamp(0.0, 255.0) as u8;
    for y in lo..hi {
        for x in lo..hi {
            let interior = INTERIOR_ORIGIN..INTERIOR_ORIGIN + INTERIOR_SIDE;
            let in_interior = interior.contains(&x) && interior.contains(&y);
            if !in_interior {
                canvas.set(x, y, frame_px);
            }
        }
    }

    for row in 0..4 {
        for col in 0..4 {
            let e = board.cell(row, col);
            if e == 0 {
                continue;
            }
            let jitter = if style.translation > 0.0 || style.rotation_deg > 0.0 {
                let dx = if style.translation > 0.0 {
                    rng.gen_range(-style.translation..=style.translation)
                } else {
                    0.0
                };
                let dy = if style.translation > 0.0 {
                    rng.gen_range(-style.translation..=style.translation)
                } else {
                    0.0
                };
                let rot = if style.rotation_deg > 0.0 {
                    rng.gen_range(-style.rotation_deg..=style.rotation_deg)
                } else {
                    0.0
                };
                Jitter { dx, dy, theta: rot.to_radians() }
            } else {
                Jitter { dx: 0.0, dy: 0.0, theta: 0.0 }
            };
            draw_tile_digits(&mut canvas, row, col, e, &jitter, ink);
        }
    }

    if style.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, style.noise_sigma).expect("valid sigma");
        for y in 0..BOARD_SIDE {
            for x in 0..BOARD_SIDE {
                let v = canvas.get(x, y) as f64 + normal.sample(rng);
                canvas.set(x, y, v.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    canvas
}

/// Ground-truth digit mask for one tile at the exact style: a 40x40 image,
/// 255 where inked, 0 elsewhere. Empty cells give an all-zero mask.
pub fn digit_mask(exponent: u8) -> Image {
    let mut mask = Image::new(TILE_CELL, TILE_CELL, 0);
    if exponent == 0 {
        return mask;
    }
    let value = 1u64 << exponent;
    let block = DigitBlock::new(value, scale_for(value));
    let bx = ((TILE_CELL as f64 - block.width as f64) / 2.0).round();
    let by = ((TILE_CELL as f64 - block.height as f64) / 2.0).round();
    for py in 0..TILE_CELL {
        for px in 0..TILE_CELL {
            let ux = px as f64 + 0.5 - bx;
            let uy = py as f64 + 0.5 - by;
            if block.coverage(ux, uy) > 0.5 {
                mask.set(px, py, 255);
            }
        }
    }
    mask
}
