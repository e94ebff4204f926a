//! Fixed-capacity experience replay.

use rand::Rng;

use crate::encoding::InputVector;
use crate::game::Action;
use crate::rng::Rng64;

/// One stored step: e = (s, a, r, s').
#[derive(Clone, Copy, Debug)]
pub struct Experience {
    pub input: InputVector,
    pub action: Action,
    pub reward: f32,
    pub next_input: InputVector,
    pub terminal: bool,
}

/// Ring buffer of experiences; once full, new inserts overwrite the oldest.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    entries: Vec<Experience>,
    capacity: usize,
    cursor: usize,
}

pub const REPLAY_CAPACITY: usize = 30_000;

impl ReplayBuffer {
    pub fn new(capacity: usize) -> ReplayBuffer {
        assert!(capacity > 0);
        ReplayBuffer {
            entries: Vec::with_capacity(capacity),
            capacity,
            cursor: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, e: Experience) {
        debug_assert!(e.reward.is_finite());
        if self.entries.len() < self.capacity {
            self.entries.push(e);
        } else {
            self.entries[self.cursor] = e;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    /// Uniform sample with replacement into `out`.
    pub fn sample_into<'a>(&'a self, n: usize, rng: &mut Rng64, out: &mut Vec<&'a Experience>) {
        assert!(!self.entries.is_empty(), "cannot sample an empty buffer");
        out.clear();
        for _ in 0..n {
            out.push(&self.entries[rng.gen_range(0..self.entries.len())]);
        }
    }
}
