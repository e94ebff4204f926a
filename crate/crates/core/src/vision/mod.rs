//! Synthetic screenshot rendering and the recognition pipeline that reads
//! boards back out of pixels: boundary detection, tile extraction, data
//! augmentation, and a 12-class digit network.

mod classifier;
mod dataset;
mod font;
mod image;
mod render;
mod segment;

pub use classifier::{
    classify_tile, evaluate_classifier, normalize_tile, train_classifier, ClassifierEval,
    TrainOptions, CLASSIFIER_SIZES, TILE_CLASSES,
};
pub use dataset::{
    augment, build_dataset, export_dataset, rotate_translate, Dataset, LabeledTile, Split,
    AUGMENT_VARIANTS,
};
pub use font::{glyph, GLYPH_COLS, GLYPH_ROWS};
pub use image::{Image, TILE_PIXELS, TILE_SIDE};
pub use render::{
    digit_mask, render_board, RenderStyle, BG_LEVEL, BOARD_SIDE, DIGIT_INK, FRAME_INK,
    FRAME_THICKNESS, INTERIOR_ORIGIN, INTERIOR_SIDE, MARGIN, TILE_CELL,
};
pub use segment::{adaptive_threshold, detect_boundary, extract_tiles, BoundingBox};

use crate::game::Board;
use crate::nn::Network;
use crate::rng::Rng64;
use rand::Rng;

#[derive(Debug, thiserror::Error)]
pub enum VisionError {
    #[error("no board found")]
    NoBoard,
    #[error("degenerate box: zero interior area")]
    DegenerateBox,
    #[error("bad image data: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Read a board from a rendered screenshot: locate the frame, cut out the
/// 16 tiles, classify each, and assemble the result row-major.
pub fn read_board(image: &Image, net: &Network) -> Result<Board, VisionError> {
    let bbox = detect_boundary(image)?;
    let tiles = extract_tiles(image, &bbox)?;
    let mut cells = [0u8; 16];
    for (i, tile) in tiles.iter().enumerate() {
        let (label, _confidence) = classify_tile(net, tile);
        cells[i] = label;
    }
    Board::from_cells(cells).map_err(|e| VisionError::Format(e.to_string()))
}

/// Corrupt each cell independently with probability `rate`, replacing it
/// with a uniformly random wrong class. Models recognition errors.
pub fn inject_misclassification(board: &Board, rate: f64, rng: &mut Rng64) -> Board {
    let mut cells = *board.cells();
    for c in &mut cells {
        if rng.gen_bool(rate) {
            let wrong = rng.gen_range(0..11u8);
            *c = if wrong >= *c { wrong + 1 } else { wrong };
        }
    }
    Board::from_cells(cells).expect("injected cells stay in range")
}
