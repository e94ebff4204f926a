//! Binary board/history encoding consumed by the Q-network.
//!
//! A board becomes 192 bits: 12 sections of 16 position bits, sections in
//! ascending exponent order (empty first, 2048 last), positions row-major
//! within a section. The full network input is 584 values: the current
//! encoded board plus the two most recent (encoded board, one-hot action)
//! pairs, zero-filled at episode start.

use crate::game::{Action, Board};

pub const BOARD_BITS: usize = 192;
pub const ACTION_BITS: usize = 4;
/// 3·192 + 2·4.
pub const INPUT_LEN: usize = 584;

const CUR_OFFSET: usize = 0;
const PREV1_BOARD: usize = 192;
const PREV1_ACTION: usize = 384;
const PREV2_BOARD: usize = 388;
const PREV2_ACTION: usize = 580;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EncodingError {
    #[error("position {0} set in {1} sections, expected exactly one")]
    AmbiguousPosition(usize, usize),
}

/// 192-bit one-hot-per-cell board encoding, packed into three words.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EncodedBoard {
    bits: [u64; 3],
}

impl EncodedBoard {
    pub fn bit(&self, i: usize) -> bool {
        debug_assert!(i < BOARD_BITS);
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn popcount(&self) -> u32 {
        self.bits.iter().map(|w| w.count_ones()).sum()
    }
}

pub fn encode_board(board: &Board) -> EncodedBoard {
    let mut bits = [0u64; 3];
    for (p, &e) in board.cells().iter().enumerate() {
        let i = e as usize * 16 + p;
        bits[i / 64] |= 1 << (i % 64);
    }
    EncodedBoard { bits }
}

/// Recover the board from its encoding; errors if any position does not have
/// exactly one section bit set.
pub fn decode_board(enc: &EncodedBoard) -> Result<Board, EncodingError> {
    let mut cells = [0u8; 16];
    for (p, cell) in cells.iter_mut().enumerate() {
        let mut hits = 0;
        for e in 0..12 {
            if enc.bit(e * 16 + p) {
                *cell = e as u8;
                hits += 1;
            }
        }
        if hits != 1 {
            return Err(EncodingError::AmbiguousPosition(p, hits));
        }
    }
    Ok(Board::from_cells(cells).expect("exponents < 12 by construction"))
}

/// The two most recent (state, action) pairs, newest first.
///
/// Kept short deliberately: the network input format fixes the horizon at
/// two. Fewer entries (episode start) encode as zeros.
#[derive(Clone, Debug, Default)]
pub struct History {
    entries: Vec<(Board, Action)>,
}

impl History {
    pub fn new() -> History {
        History::default()
    }

    pub fn push(&mut self, board: Board, action: Action) {
        self.entries.insert(0, (board, action));
        self.entries.truncate(2);
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    pub fn entries(&self) -> &[(Board, Action)] {
        &self.entries
    }
}

/// 584-value binary network input, packed into ten words.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct InputVector {
    bits: [u64; 10],
}

impl InputVector {
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < INPUT_LEN);
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn popcount(&self) -> u32 {
        self.bits.iter().map(|w| w.count_ones()).sum()
    }

    /// Expand into `out[..INPUT_LEN]` as 0.0/1.0 values.
    pub fn write_f32(&self, out: &mut [f32]) {
        assert!(out.len() >= INPUT_LEN);
        for (i, slot) in out[..INPUT_LEN].iter_mut().enumerate() {
            *slot = if self.bits[i / 64] >> (i % 64) & 1 == 1 {
                1.0
            } else {
                0.0
            };
        }
    }

    pub fn to_f32(&self) -> Vec<f32> {
        let mut v = vec![0.0; INPUT_LEN];
        self.write_f32(&mut v);
        v
    }

    /// Decode the current-board block (first 192 bits).
    pub fn decode_current(&self) -> Result<Board, EncodingError> {
        let mut bits = [0u64; 3];
        for i in 0..BOARD_BITS {
            if self.get(CUR_OFFSET + i) {
                bits[i / 64] |= 1 << (i % 64);
            }
        }
        decode_board(&EncodedBoard { bits })
    }

    fn set(&mut self, i: usize) {
        debug_assert!(i < INPUT_LEN);
        self.bits[i / 64] |= 1 << (i % 64);
    }
}

/// Build the network input for `current` given up to two history entries,
/// newest first. Missing entries stay zero.
pub fn encode_input(current: &Board, history: &[(Board, Action)]) -> InputVector {
    assert!(history.len() <= 2, "history horizon is two");
    let mut v = InputVector { bits: [0; 10] };
    write_board(&mut v, CUR_OFFSET, current);
    if let Some((b, a)) = history.first() {
        write_board(&mut v, PREV1_BOARD, b);
        v.set(PREV1_ACTION + a.code() as usize);
    }
    if let Some((b, a)) = history.get(1) {
        write_board(&mut v, PREV2_BOARD, b);
        v.set(PREV2_ACTION + a.code() as usize);
    }
    v
}

fn write_board(v: &mut InputVector, offset: usize, board: &Board) {
    for (p, &e) in board.cells().iter().enumerate() {
        v.set(offset + e as usize * 16 + p);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{domain, stream};
    use rand::Rng;

    #[test]
    fn empty_board_sets_exactly_the_empty_section() {
        let enc = encode_board(&Board::empty());
        for i in 0..16 {
            assert!(enc.bit(i));
        }
        for i in 16..BOARD_BITS {
            assert!(!enc.bit(i));
        }
        assert_eq!(enc.popcount(), 16);
    }

    #[test]
    fn max_tile_lands_in_the_last_section() {
        let mut cells = [0u8; 16];
        cells[0] = 11;
        let enc = encode_board(&Board::from_cells(cells).unwrap());
        assert!(enc.bit(11 * 16));
        assert!(!enc.bit(0));
        for p in 1..16 {
            assert!(enc.bit(p), "position {p} should sit in section 0");
        }
        assert_eq!(enc.popcount(), 16);
    }

    fn random_board(rng: &mut crate::rng::Rng64) -> Board {
        let mut cells = [0u8; 16];
        for c in &mut cells {
            *c = rng.gen_range(0..=11);
        }
        Board::from_cells(cells).unwrap()
    }

    #[test]
    fn encoding_round_trips_and_is_injective() {
        let mut rng = stream(21, domain::GAME, 0);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..1000 {
            let b = random_board(&mut rng);
            let enc = encode_board(&b);
            assert_eq!(enc.popcount(), 16);
            assert_eq!(decode_board(&enc).unwrap(), b);
            seen.insert((enc, b));
        }
        // Distinct boards must map to distinct encodings.
        let boards: std::collections::HashSet<_> = seen.iter().map(|(_, b)| *b).collect();
        let encs: std::collections::HashSet<_> = seen.iter().map(|(e, _)| *e).collect();
        assert_eq!(boards.len(), encs.len());
    }

    #[test]
    fn section_consistency() {
        let mut rng = stream(5, domain::GAME, 1);
        for _ in 0..100 {
            let enc = encode_board(&random_board(&mut rng));
            for p in 0..16 {
                let sections = (0..12).filter(|e| enc.bit(e * 16 + p)).count();
                assert_eq!(sections, 1);
            }
        }
    }

    #[test]
    fn episode_start_zero_fills_history() {
        let v = encode_input(&Board::empty(), &[]);
        assert_eq!(v.popcount(), 16);
        for i in BOARD_BITS..INPUT_LEN {
            assert!(!v.get(i), "bit {i} should be zero without history");
        }
    }

    #[test]
    fn popcount_by_history_depth() {
        let mut rng = stream(8, domain::GAME, 2);
        let b0 = random_board(&mut rng);
        let b1 = random_board(&mut rng);
        let b2 = random_board(&mut rng);
        assert_eq!(encode_input(&b0, &[]).popcount(), 16);
        assert_eq!(encode_input(&b0, &[(b1, Action::Left)]).popcount(), 33);
        let full = encode_input(&b0, &[(b1, Action::Left), (b2, Action::Up)]);
        assert_eq!(full.popcount(), 50);
    }

    #[test]
    fn layout_places_actions_at_fixed_offsets() {
        let b = Board::empty();
        let v = encode_input(&b, &[(b, Action::Right), (b, Action::Up)]);
        assert!(v.get(PREV1_ACTION + 3));
        assert!(v.get(PREV2_ACTION));
        assert!(!v.get(PREV1_ACTION));
        assert!(!v.get(PREV2_ACTION + 3));
    }

    #[test]
    fn input_decodes_current_board() {
        let mut rng = stream(13, domain::GAME, 3);
        for _ in 0..50 {
            let cur = random_board(&mut rng);
            let prev = random_board(&mut rng);
            let v = encode_input(&cur, &[(prev, Action::Down)]);
            assert_eq!(v.decode_current().unwrap(), cur);
        }
    }

    #[test]
    fn history_keeps_two_newest_entries() {
        let mut h = History::new();
        let b: Board = "1 0 0 0  0 0 0 0  0 0 0 0  0 0 0 0".parse().unwrap();
        h.push(b, Action::Up);
        h.push(b, Action::Down);
        h.push(b, Action::Left);
        let acts: Vec<Action> = h.entries().iter().map(|(_, a)| *a).collect();
        assert_eq!(acts, vec![Action::Left, Action::Down]);
    }

    #[test]
    fn f32_expansion_matches_bits() {
        let mut rng = stream(2, domain::GAME, 4);
        let v = encode_input(&random_board(&mut rng), &[(random_board(&mut rng), Action::Up)]);
        let f = v.to_f32();
        assert_eq!(f.len(), INPUT_LEN);
        for (i, &x) in f.iter().enumerate() {
            assert_eq!(x, if v.get(i) { 1.0 } else { 0.0 });
        }
    }
}
