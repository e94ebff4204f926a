//! Board heuristics used for reward shaping.
//!
//! All four scores read exponents, not raw tile values. Scores are
//! normalized so that "good" is high: monotonicity and smoothness are
//! penalties capped at zero, free tiles and max value are plain counts.

use crate::game::Board;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeuristicScores {
    pub monotonicity: f64,
    pub smoothness: f64,
    pub free_tiles: f64,
    pub max_value: f64,
}

pub fn score_board(board: &Board) -> HeuristicScores {
    HeuristicScores {
        monotonicity: monotonicity(board),
        smoothness: smoothness(board),
        free_tiles: free_tiles(board),
        max_value: max_value(board),
    }
}

/// For each row and column, the better of the two sweep directions, where a
/// direction is scored as minus the total exponent drop across adjacent
/// non-empty pairs violating it. 0 is best (every line monotone).
pub fn monotonicity(board: &Board) -> f64 {
    let mut total = 0.0;
    for line in lines(board) {
        let mut inc = 0i32; // violations of "non-decreasing left to right"
        let mut dec = 0i32;
        for pair in pairs(&line) {
            let (a, b) = (pair.0 as i32, pair.1 as i32);
            if a > b {
                inc += a - b;
            } else {
                dec += b - a;
            }
        }
        total += (-inc).max(-dec) as f64;
    }
    total
}

/// Minus the summed |exponent difference| over all horizontally and
/// vertically adjacent non-empty pairs.
pub fn smoothness(board: &Board) -> f64 {
    let mut total = 0i32;
    for row in 0..4 {
        for col in 0..4 {
            let c = board.cell(row, col);
            if c == 0 {
                continue;
            }
            if col + 1 < 4 {
                let r = board.cell(row, col + 1);
                if r != 0 {
                    total += (c as i32 - r as i32).abs();
                }
            }
            if row + 1 < 4 {
                let d = board.cell(row + 1, col);
                if d != 0 {
                    total += (c as i32 - d as i32).abs();
                }
            }
        }
    }
    -total as f64
}

pub fn free_tiles(board: &Board) -> f64 {
    board.empty_count() as f64
}

pub fn max_value(board: &Board) -> f64 {
    board.max_tile() as f64
}

/// Adjacent non-empty pairs of a line, in order.
fn pairs(line: &[u8; 4]) -> impl Iterator<Item = (u8, u8)> + '_ {
    (0..3).filter_map(|i| {
        let (a, b) = (line[i], line[i + 1]);
        (a != 0 && b != 0).then_some((a, b))
    })
}

fn lines(board: &Board) -> impl Iterator<Item = [u8; 4]> + '_ {
    (0..4)
        .map(|r| [
            board.cell(r, 0),
            board.cell(r, 1),
            board.cell(r, 2),
            board.cell(r, 3),
        ])
        .chain((0..4).map(|c| {
            [
                board.cell(0, c),
                board.cell(1, c),
                board.cell(2, c),
                board.cell(3, c),
            ]
        }))
        .collect::<Vec<_>>()
        .into_iter()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn board(text: &str) -> Board {
        text.parse().unwrap()
    }

    #[test]
    fn empty_board_scores() {
        let b = Board::empty();
        assert_eq!(monotonicity(&b), 0.0);
        assert_eq!(smoothness(&b), 0.0);
        assert_eq!(free_tiles(&b), 16.0);
        assert_eq!(max_value(&b), 0.0);
    }

    #[test]
    fn monotone_decreasing_row_scores_zero() {
        // Values [8,4,2,_]: exponents 3,2,1.
        let b = board("3 2 1 0  0 0 0 0  0 0 0 0  0 0 0 0");
        assert_eq!(monotonicity(&b), 0.0);
    }

    #[test]
    fn bitonic_row_is_penalized() {
        // Values [2,8,2,_]: violates both directions.
        let b = board("1 3 1 0  0 0 0 0  0 0 0 0  0 0 0 0");
        assert!(monotonicity(&b) < 0.0);
        // Both sweeps drop 2, so the line contributes exactly -2.
        assert_eq!(monotonicity(&b), -2.0);
    }

    #[test]
    fn empty_cells_break_pairs() {
        // [8,_,2,4]: the 8 is isolated by the gap, so only (2,4) counts and
        // the increasing sweep is violation-free.
        let b = board("3 0 1 2  0 0 0 0  0 0 0 0  0 0 0 0");
        assert_eq!(monotonicity(&b), 0.0);
    }

    #[test]
    fn smoothness_counts_exponent_gaps() {
        // Adjacent 2 and 256: |1-8| = 7.
        let b = board("1 8 0 0  0 0 0 0  0 0 0 0  0 0 0 0");
        assert_eq!(smoothness(&b), -7.0);
        // Equal neighbours contribute zero.
        let eq = board("2 2 0 0  0 0 0 0  0 0 0 0  0 0 0 0");
        assert_eq!(smoothness(&eq), 0.0);
    }

    #[test]
    fn smoothness_counts_vertical_pairs_too() {
        let b = board("1 0 0 0  3 0 0 0  0 0 0 0  0 0 0 0");
        assert_eq!(smoothness(&b), -2.0);
    }

    #[test]
    fn free_and_max_track_the_board() {
        let b = board("0 0 0 0  0 7 0 0  1 0 0 0  0 0 2 1");
        assert_eq!(free_tiles(&b), 12.0);
        assert_eq!(max_value(&b), 7.0);
        assert_eq!(free_tiles(&Board::from_cells([1; 16]).unwrap()), 0.0);
    }

    #[test]
    fn five_tile_board_has_eleven_free() {
        let b = board("0 0 0 1  0 0 0 0  0 0 1 0  1 0 2 3");
        assert_eq!(free_tiles(&b), 11.0);
    }
}
