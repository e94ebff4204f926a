//! Labeled tile dataset: render class-balanced boards, extract tiles via
//! the recognition path, expand six-fold by augmentation, split 90/10 by
//! source tile so variants never straddle the split.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use super::image::Image;
use super::render::{render_board, RenderStyle};
use super::segment::{detect_boundary, extract_tiles};
use super::VisionError;
use crate::exec::{map_indexed, ExecMode};
use crate::game::Board;
use crate::rng::{domain, stream, Rng64};

pub const AUGMENT_VARIANTS: usize = 6;
const MIN_CLASS_SHARE: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

#[derive(Clone, Debug)]
pub struct LabeledTile {
    pub image: Image,
    pub label: u8,
    pub source_tile_id: u32,
    pub variant: u8,
}

#[derive(Clone, Debug, Default)]
pub struct Dataset {
    pub train: Vec<LabeledTile>,
    pub test: Vec<LabeledTile>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.train.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn class_counts(&self) -> [usize; 12] {
        let mut counts = [0usize; 12];
        for t in self.train.iter().chain(&self.test) {
            counts[t.label as usize] += 1;
        }
        counts
    }
}

/// Rotate by `angle` radians about the tile center, then translate by
/// (dx, dy) pixels, resampling bilinearly with replicated borders.
pub fn rotate_translate(tile: &Image, angle: f64, dx: f64, dy: f64) -> Image {
    let (w, h) = (tile.width(), tile.height());
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let (sin_a, cos_a) = angle.sin_cos();
    let mut out = Image::new(w, h, 0);
    for y in 0..h {
        for x in 0..w {
            let vx = x as f64 - cx - dx;
            let vy = y as f64 - cy - dy;
            let sx = cos_a * vx + sin_a * vy + cx;
            let sy = -sin_a * vx + cos_a * vy + cy;
            out.set(x, y, tile.sample_bilinear(sx, sy).round().clamp(0.0, 255.0) as u8);
        }
    }
    out
}

/// Random small rotation (up to 10 degrees) and shift (up to 3 px).
pub fn augment(tile: &Image, rng: &mut Rng64) -> Image {
    let angle = rng.gen_range(-10.0f64..=10.0).to_radians();
    let dx = rng.gen_range(-3.0f64..=3.0);
    let dy = rng.gen_range(-3.0f64..=3.0);
    rotate_translate(tile, angle, dx, dy)
}

/// Sample one board with cells uniform over the 12 classes.
fn random_board(rng: &mut Rng64) -> Board {
    let mut cells = [0u8; 16];
    for c in &mut cells {
        *c = rng.gen_range(0..12u8);
    }
    Board::from_cells(cells).expect("cells in range")
}

/// Sample `n_boards` boards, redrawing the whole set until every class
/// holds at least the minimum share of cells. Uniform cells almost always
/// pass on the first draw; the loop enforces the guarantee.
fn balanced_boards(n_boards: usize, seed: u64) -> Vec<Board> {
    for attempt in 0..1000u64 {
        let boards: Vec<Board> = (0..n_boards)
            .map(|i| random_board(&mut stream(seed, domain::DATASET, attempt * n_boards as u64 + i as u64)))
            .collect();
        let mut counts = [0usize; 12];
        for b in &boards {
            for &c in b.cells() {
                counts[c as usize] += 1;
            }
        }
        let total = (16 * n_boards) as f64;
        if counts.iter().all(|&c| c as f64 / total >= MIN_CLASS_SHARE) {
            return boards;
        }
    }
    panic!("class balance unattainable with {n_boards} boards");
}

/// Build the full dataset: `n_boards` renders at the given style, 16
/// source tiles each, six variants per source tile (the first is the
/// identity).
pub fn build_dataset(n_boards: usize, seed: u64, style: &RenderStyle, mode: ExecMode) -> Dataset {
    assert!(n_boards >= 1, "need at least one board");
    let boards = balanced_boards(n_boards, seed);

    let per_board: Vec<Vec<LabeledTile>> = map_indexed(mode, n_boards, |i| {
        let mut rng = stream(seed, domain::RENDER, i as u64);
        let img = render_board(&boards[i], style, &mut rng);
        let bbox = detect_boundary(&img).expect("rendered board is detectable");
        let tiles = extract_tiles(&img, &bbox).expect("rendered board extracts");
        let mut out = Vec::with_capacity(16 * AUGMENT_VARIANTS);
        for (cell, tile) in tiles.iter().enumerate() {
            let source_tile_id = (i * 16 + cell) as u32;
            let label = boards[i].cells()[cell];
            let mut aug_rng = stream(seed, domain::AUGMENT, source_tile_id as u64);
            for variant in 0..AUGMENT_VARIANTS {
                let image = if variant == 0 {
                    tile.clone()
                } else {
                    augment(tile, &mut aug_rng)
                };
                out.push(LabeledTile {
                    image,
                    label,
                    source_tile_id,
                    variant: variant as u8,
                });
            }
        }
        out
    });

    // Hold out 10% of source tiles; all six variants follow their source.
    let n_sources = n_boards * 16;
    let mut source_ids: Vec<u32> = (0..n_sources as u32).collect();
    source_ids.shuffle(&mut stream(seed, domain::DATASET, u64::MAX));
    let n_test = n_sources / 10;
    let mut is_test = vec![false; n_sources];
    for &id in &source_ids[..n_test] {
        is_test[id as usize] = true;
    }

    let mut dataset = Dataset::default();
    for tile in per_board.into_iter().flatten() {
        if is_test[tile.source_tile_id as usize] {
            dataset.test.push(tile);
        } else {
            dataset.train.push(tile);
        }
    }
    dataset
}

/// Write every tile as a PGM plus a manifest CSV naming them.
pub fn export_dataset(dataset: &Dataset, dir: &Path) -> Result<(), VisionError> {
    let tiles_dir = dir.join("tiles");
    fs::create_dir_all(&tiles_dir)?;
    let mut manifest = std::io::BufWriter::new(fs::File::create(dir.join("manifest.csv"))?);
    writeln!(manifest, "path,label,source_tile_id,split")?;
    for (split, tiles) in [(Split::Train, &dataset.train), (Split::Test, &dataset.test)] {
        for t in tiles {
            let name = format!("tiles/t{:06}_v{}.pgm", t.source_tile_id, t.variant);
            t.image.save_pgm(&dir.join(&name))?;
            writeln!(manifest, "{name},{},{},{}", t.label, t.source_tile_id, split.name())?;
        }
    }
    Ok(())
}
