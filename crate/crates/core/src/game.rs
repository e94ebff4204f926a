//! Slide-and-merge mechanics of 2048 plus the stochastic tile spawn.
//!
//! Boards store tile *exponents*: cell value `e` encodes the tile `2^e`, with
//! `0` for an empty cell. The alphabet is capped at `e = 11` (the 2048 tile),
//! which is also the last class the vision pipeline can read; two 2048 tiles
//! therefore do not merge. All operations are pure given an explicit RNG, so
//! games can be rolled out in parallel on independent streams.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::rng::Rng64;

/// Highest representable tile exponent (the 2048 tile).
pub const MAX_EXPONENT: u8 = 11;

/// One of the four swipe directions. The integer codes are stable: they are
/// baked into checkpoints and the network's output ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Action {
    Up = 0,
    Down = 1,
    Left = 2,
    Right = 3,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Up, Action::Down, Action::Left, Action::Right];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Action> {
        match code {
            0 => Some(Action::Up),
            1 => Some(Action::Down),
            2 => Some(Action::Left),
            3 => Some(Action::Right),
            _ => None,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Action::Up => "up",
            Action::Down => "down",
            Action::Left => "left",
            Action::Right => "right",
        };
        f.write_str(name)
    }
}

/// A compact set of actions (legality mask).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ActionSet(u8);

impl ActionSet {
    pub fn empty() -> ActionSet {
        ActionSet(0)
    }

    pub fn insert(&mut self, a: Action) {
        self.0 |= 1 << a.code();
    }

    pub fn contains(self, a: Action) -> bool {
        self.0 & (1 << a.code()) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Actions in ascending code order.
    pub fn iter(self) -> impl Iterator<Item = Action> {
        Action::ALL.into_iter().filter(move |a| self.contains(*a))
    }
}

impl FromIterator<Action> for ActionSet {
    fn from_iter<T: IntoIterator<Item = Action>>(iter: T) -> Self {
        let mut s = ActionSet::empty();
        for a in iter {
            s.insert(a);
        }
        s
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GameError {
    #[error("no empty cell")]
    NoEmptyCell,
    #[error("invalid board: {0}")]
    InvalidBoard(String),
}

/// 4×4 grid of tile exponents in row-major order.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Board {
    cells: [u8; 16],
}

impl Board {
    pub fn empty() -> Board {
        Board { cells: [0; 16] }
    }

    pub fn from_cells(cells: [u8; 16]) -> Result<Board, GameError> {
        if let Some(c) = cells.iter().find(|&&c| c > MAX_EXPONENT) {
            return Err(GameError::InvalidBoard(format!(
                "exponent {c} exceeds {MAX_EXPONENT}"
            )));
        }
        Ok(Board { cells })
    }

    pub fn cells(&self) -> &[u8; 16] {
        &self.cells
    }

    /// Exponent at (row, col).
    pub fn cell(&self, row: usize, col: usize) -> u8 {
        self.cells[row * 4 + col]
    }

    pub fn max_tile(&self) -> u8 {
        *self.cells.iter().max().unwrap()
    }

    pub fn empty_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c == 0).count()
    }

    /// Sum of tile values (2^e per non-empty cell); conserved by slides.
    pub fn total_value(&self) -> u64 {
        self.cells
            .iter()
            .map(|&c| if c == 0 { 0 } else { 1u64 << c })
            .sum()
    }

    /// Push all tiles toward `action` and merge equal neighbours pairwise,
    /// scanning from the far side; a tile created by a merge is locked for
    /// the rest of the move. Returns the new board, whether anything moved,
    /// and the sum of tile values created by merges.
    pub fn slide_merge(&self, action: Action) -> (Board, bool, u32) {
        let mut out = *self;
        let mut merged_sum = 0u32;
        for lane in 0..4 {
            let idx = lane_indices(action, lane);
            let line = [
                self.cells[idx[0]],
                self.cells[idx[1]],
                self.cells[idx[2]],
                self.cells[idx[3]],
            ];
            let (new_line, sum) = slide_line(line);
            merged_sum += sum;
            for (k, &i) in idx.iter().enumerate() {
                out.cells[i] = new_line[k];
            }
        }
        let moved = out != *self;
        (out, moved, merged_sum)
    }

    pub fn legal_actions(&self) -> ActionSet {
        Action::ALL
            .into_iter()
            .filter(|&a| self.slide_merge(a).1)
            .collect()
    }

    pub fn is_terminal(&self) -> bool {
        self.legal_actions().is_empty()
    }

    /// Fill one uniformly chosen empty cell with exponent 1 (p = 0.9) or
    /// 2 (p = 0.1).
    pub fn spawn_random(&self, rng: &mut Rng64) -> Result<Board, GameError> {
        let empties: Vec<usize> = (0..16).filter(|&i| self.cells[i] == 0).collect();
        if empties.is_empty() {
            return Err(GameError::NoEmptyCell);
        }
        let pos = empties[rng.gen_range(0..empties.len())];
        let exponent = if rng.gen_bool(0.1) { 2 } else { 1 };
        let mut out = *self;
        out.cells[pos] = exponent;
        Ok(out)
    }

    /// Fresh game: two spawned tiles on an empty board.
    pub fn new_game(rng: &mut Rng64) -> Board {
        let b = Board::empty();
        let b = b.spawn_random(rng).expect("empty board has empty cells");
        b.spawn_random(rng).expect("15 empty cells remain")
    }

    /// Apply one move. A non-moving action is a no-op: no spawn, board
    /// unchanged. The terminal flag refers to the resulting board.
    pub fn step(&self, action: Action, rng: &mut Rng64) -> Transition {
        let (after_slide, moved, merged_sum) = self.slide_merge(action);
        let after_spawn = if moved {
            after_slide
                .spawn_random(rng)
                .expect("a moved board has at least one empty cell")
        } else {
            *self
        };
        Transition {
            before: *self,
            action,
            after_slide: if moved { after_slide } else { *self },
            after_spawn,
            moved,
            merged_sum,
            terminal: after_spawn.is_terminal(),
        }
    }
}

/// Cell indices of `lane` (0..4) ordered so index 3 is the far side of
/// `action` (the side tiles slide toward).
fn lane_indices(action: Action, lane: usize) -> [usize; 4] {
    match action {
        Action::Right => [lane * 4, lane * 4 + 1, lane * 4 + 2, lane * 4 + 3],
        Action::Left => [lane * 4 + 3, lane * 4 + 2, lane * 4 + 1, lane * 4],
        Action::Down => [lane, lane + 4, lane + 8, lane + 12],
        Action::Up => [lane + 12, lane + 8, lane + 4, lane],
    }
}

/// Slide one line toward index 3 and merge pairwise from the far side.
fn slide_line(line: [u8; 4]) -> ([u8; 4], u32) {
    // Compact non-empty tiles, preserving order.
    let mut tiles = [0u8; 4];
    let mut n = 0;
    for &c in &line {
        if c != 0 {
            tiles[n] = c;
            n += 1;
        }
    }

    // Merge scanning from the far side; merged tiles are locked. Tiles at
    // the exponent cap never merge (the alphabet ends at 2048).
    let mut out = [0u8; 4];
    let mut merged_sum = 0u32;
    let mut write = 3usize;
    let mut i = n as isize - 1;
    while i >= 0 {
        let cur = tiles[i as usize];
        if i > 0 && tiles[(i - 1) as usize] == cur && cur < MAX_EXPONENT {
            out[write] = cur + 1;
            merged_sum += 1u32 << (cur + 1);
            i -= 2;
        } else {
            out[write] = cur;
            i -= 1;
        }
        write = write.wrapping_sub(1);
    }
    (out, merged_sum)
}

/// Record of one `step`.
#[derive(Clone, Copy, Debug)]
pub struct Transition {
    pub before: Board,
    pub action: Action,
    pub after_slide: Board,
    pub after_spawn: Board,
    pub moved: bool,
    pub merged_sum: u32,
    pub terminal: bool,
}

impl fmt::Display for Board {
    /// 4 lines of 4 space-separated exponents.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in 0..4 {
            if row > 0 {
                writeln!(f)?;
            }
            write!(
                f,
                "{} {} {} {}",
                self.cell(row, 0),
                self.cell(row, 1),
                self.cell(row, 2),
                self.cell(row, 3)
            )?;
        }
        Ok(())
    }
}

impl fmt::Debug for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Board[{}]", self.cells.map(|c| c.to_string()).join(" "))
    }
}

impl FromStr for Board {
    type Err = GameError;

    /// Accepts 16 whitespace-separated exponents; "." is an alias for 0.
    fn from_str(s: &str) -> Result<Board, GameError> {
        let mut cells = [0u8; 16];
        let mut count = 0;
        for tok in s.split_whitespace() {
            if count == 16 {
                return Err(GameError::InvalidBoard("more than 16 cells".into()));
            }
            cells[count] = if tok == "." {
                0
            } else {
                tok.parse::<u8>()
                    .map_err(|_| GameError::InvalidBoard(format!("bad cell {tok:?}")))?
            };
            count += 1;
        }
        if count != 16 {
            return Err(GameError::InvalidBoard(format!(
                "expected 16 cells, got {count}"
            )));
        }
        Board::from_cells(cells)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{domain, stream};

    fn board(text: &str) -> Board {
        text.parse().unwrap()
    }

    #[test]
    fn new_board_has_two_small_tiles() {
        for seed in 0..50 {
            let mut rng = stream(seed, domain::GAME, 0);
            let b = Board::new_game(&mut rng);
            assert_eq!(b.empty_count(), 14);
            assert!(b.cells().iter().all(|&c| c == 0 || c == 1 || c == 2));
        }
    }

    #[test]
    fn spawn_exponent_two_rate_matches_probability() {
        let mut rng = stream(11, domain::GAME, 0);
        let base = Board::empty();
        let mut twos = 0;
        for _ in 0..10_000 {
            let b = base.spawn_random(&mut rng).unwrap();
            if b.cells().contains(&2) {
                twos += 1;
            }
        }
        let frac = twos as f64 / 10_000.0;
        assert!((frac - 0.10).abs() <= 0.02, "exponent-2 fraction {frac}");
    }

    #[test]
    fn spawn_fills_the_single_empty_cell() {
        let mut cells = [1u8; 16];
        cells[5] = 0;
        // Avoid adjacent equal tiles mattering; spawn only cares about empties.
        let b = Board::from_cells(cells).unwrap();
        let mut rng = stream(3, domain::GAME, 0);
        let after = b.spawn_random(&mut rng).unwrap();
        assert_ne!(after.cells()[5], 0);
        assert_eq!(after.empty_count(), 0);
    }

    #[test]
    fn spawn_on_full_board_errors() {
        let b = Board::from_cells([1; 16]).unwrap();
        let mut rng = stream(0, domain::GAME, 0);
        assert_eq!(b.spawn_random(&mut rng), Err(GameError::NoEmptyCell));
    }

    #[test]
    fn merge_scans_from_the_far_side() {
        // Values [2,2,2,_] swiped right end as [_,_,2,4].
        let b = board("1 1 1 0  0 0 0 0  0 0 0 0  0 0 0 0");
        let (out, moved, _) = b.slide_merge(Action::Right);
        assert!(moved);
        assert_eq!(out.cells()[..4], [0, 0, 1, 2]);
    }

    #[test]
    fn four_equal_tiles_merge_into_two_pairs() {
        // Values [2,2,2,2] → [_,_,4,4] with merged_sum 8.
        let b = board("1 1 1 1  0 0 0 0  0 0 0 0  0 0 0 0");
        let (out, moved, merged_sum) = b.slide_merge(Action::Right);
        assert!(moved);
        assert_eq!(out.cells()[..4], [0, 0, 2, 2]);
        assert_eq!(merged_sum, 8);
    }

    #[test]
    fn separated_fours_in_last_row_merge_to_eight_on_right() {
        let b = board("0 0 0 0  0 0 0 0  0 0 0 0  2 0 2 0");
        let (out, moved, merged_sum) = b.slide_merge(Action::Right);
        assert!(moved);
        assert_eq!(out.cells()[12..], [0, 0, 0, 3]);
        assert_eq!(merged_sum, 8);
        assert_eq!(out.max_tile(), 3);
    }

    #[test]
    fn step_on_merged_row_spawns_a_small_tile() {
        let before = board("0 0 0 0  0 0 0 0  0 0 0 0  2 0 2 0");
        // Look for a stream whose spawn lands bottom-left with value 2,
        // reproducing the screenshot pair this case is drawn from.
        let found = (0..20_000u64).find_map(|seed| {
            let mut rng = stream(seed, domain::GAME, 0);
            let t = before.step(Action::Right, &mut rng);
            assert!(t.moved);
            assert_eq!(t.after_slide.cells()[12..], [0, 0, 0, 3]);
            (t.after_spawn.cell(3, 0) == 1).then_some(t)
        });
        let t = found.expect("some stream spawns a 2 at bottom-left");
        assert_eq!(t.after_spawn.cells()[12..], [1, 0, 0, 3]);
        assert!(!t.terminal);
    }

    #[test]
    fn illegal_action_is_a_noop_without_spawn() {
        let b = board("1 0 0 0  0 0 0 0  0 0 0 0  0 0 0 0");
        let mut rng = stream(9, domain::GAME, 0);
        let t = b.step(Action::Up, &mut rng); // tile already at top-left
        assert!(!t.moved);
        assert_eq!(t.after_slide, b);
        assert_eq!(t.after_spawn, b);
        assert_eq!(t.merged_sum, 0);
        assert!(!t.terminal);
    }

    #[test]
    fn legal_actions_on_corner_tile() {
        let b = board("1 0 0 0  0 0 0 0  0 0 0 0  0 0 0 0");
        let legal = b.legal_actions();
        assert_eq!(legal.len(), 2);
        assert!(legal.contains(Action::Down));
        assert!(legal.contains(Action::Right));
    }

    #[test]
    fn empty_board_has_no_legal_action() {
        assert!(Board::empty().legal_actions().is_empty());
        let (out, moved, sum) = Board::empty().slide_merge(Action::Left);
        assert_eq!(out, Board::empty());
        assert!(!moved);
        assert_eq!(sum, 0);
    }

    #[test]
    fn alternating_full_board_is_terminal() {
        let b = board("1 2 1 2  2 1 2 1  1 2 1 2  2 1 2 1");
        assert!(b.legal_actions().is_empty());
        assert!(b.is_terminal());
    }

    #[test]
    fn capped_tiles_do_not_merge() {
        let b = board("11 11 0 0  0 0 0 0  0 0 0 0  0 0 0 0");
        let (out, moved, sum) = b.slide_merge(Action::Right);
        assert_eq!(out.cells()[..4], [0, 0, 11, 11]);
        assert!(moved);
        assert_eq!(sum, 0);
    }

    #[test]
    fn max_tile_examples() {
        assert_eq!(Board::empty().max_tile(), 0);
        assert_eq!(board("0 0 0 0  0 7 0 0  0 0 0 0  0 0 0 0").max_tile(), 7);
    }

    #[test]
    fn board_text_round_trip_with_dot_alias() {
        let b = board(". . . .\n. 3 . .\n. . 10 .\n1 . . .");
        assert_eq!(b.cell(1, 1), 3);
        assert_eq!(b.cell(2, 2), 10);
        assert_eq!(b.cell(3, 0), 1);
        let shown = b.to_string();
        assert_eq!(shown.parse::<Board>().unwrap(), b);
    }

    #[test]
    fn board_parse_rejects_bad_input() {
        assert!("1 2 3".parse::<Board>().is_err());
        assert!("12 0 0 0  0 0 0 0  0 0 0 0  0 0 0 0".parse::<Board>().is_err());
        assert!("x 0 0 0  0 0 0 0  0 0 0 0  0 0 0 0".parse::<Board>().is_err());
    }
}
