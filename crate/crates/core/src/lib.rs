//! Core library for a closed perception → policy → actuation loop around the
//! game "2048": the game engine itself, the binary state encoding and the
//! Q-network trained on it, heuristic reward shaping, a finite-horizon
//! LQR/iLQR planner driving a simulated 7-joint arm through swipe gestures,
//! and a synthetic vision pipeline that reads boards back out of rendered
//! screenshots.
//!
//! Everything is deterministic given explicit seeds. Data-parallel paths
//! (game evaluation, dataset rendering, swipe optimization) go through
//! [`exec::ExecMode`]; with the `parallel` feature disabled they fall back to
//! sequential loops and produce bit-identical results.

pub mod dqn;
pub mod encoding;
pub mod exec;
pub mod game;
pub mod lqr;
pub mod nn;
pub mod rng;
pub mod vision;
