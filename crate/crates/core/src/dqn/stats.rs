//! Training and evaluation result tables plus their CSV writers.

use std::io;

/// One completed training episode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeRow {
    pub episode: u64,
    pub moves: u32,
    pub max_tile_exponent: u8,
    pub reached_128: bool,
    pub reached_256: bool,
    /// Mean TD loss over the episode's train steps; 0 before learning starts.
    pub mean_loss: f64,
}

/// Greedy evaluation snapshot taken mid-training.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckpointRow {
    pub train_steps: u64,
    pub games: usize,
    pub reach_128: f64,
    pub reach_256: f64,
    pub mean_moves: f64,
}

#[derive(Clone, Debug, Default)]
pub struct TrainingStats {
    pub episodes: Vec<EpisodeRow>,
    pub checkpoints: Vec<CheckpointRow>,
    pub train_steps: u64,
}

impl TrainingStats {
    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "episode,moves,max_tile_exponent,reached128,reached256,mean_loss"
        )?;
        for e in &self.episodes {
            writeln!(
                w,
                "{},{},{},{},{},{:.6}",
                e.episode,
                e.moves,
                e.max_tile_exponent,
                e.reached_128 as u8,
                e.reached_256 as u8,
                e.mean_loss
            )?;
        }
        let n = self.episodes.len().max(1) as f64;
        let pct = |f: fn(&EpisodeRow) -> bool| {
            100.0 * self.episodes.iter().filter(|e| f(e)).count() as f64 / n
        };
        let mean_moves = self.episodes.iter().map(|e| e.moves as f64).sum::<f64>() / n;
        writeln!(
            w,
            "# summary episodes={} train_steps={} reach128_pct={:.2} reach256_pct={:.2} mean_moves={:.2}",
            self.episodes.len(),
            self.train_steps,
            pct(|e| e.reached_128),
            pct(|e| e.reached_256),
            mean_moves
        )
    }

    pub fn write_checkpoints_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "train_steps,games,reach128_pct,reach256_pct,mean_moves")?;
        for c in &self.checkpoints {
            writeln!(
                w,
                "{},{},{:.2},{:.2},{:.2}",
                c.train_steps,
                c.games,
                100.0 * c.reach_128,
                100.0 * c.reach_256,
                c.mean_moves
            )?;
        }
        Ok(())
    }
}

/// One evaluation game played to termination.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GameRow {
    pub moves: u32,
    pub max_tile_exponent: u8,
    pub moves_to_128: Option<u32>,
    pub moves_to_256: Option<u32>,
}

#[derive(Clone, Debug, Default)]
pub struct EvalStats {
    games: Vec<GameRow>,
}

impl EvalStats {
    pub fn from_rows(games: Vec<GameRow>) -> EvalStats {
        EvalStats { games }
    }

    pub fn games(&self) -> &[GameRow] {
        &self.games
    }

    /// Fraction of games whose max tile reached `goal_exponent`.
    pub fn reach_rate(&self, goal_exponent: u8) -> f64 {
        if self.games.is_empty() {
            return 0.0;
        }
        let hit = self
            .games
            .iter()
            .filter(|g| g.max_tile_exponent >= goal_exponent)
            .count();
        hit as f64 / self.games.len() as f64
    }

    pub fn mean_moves(&self) -> f64 {
        if self.games.is_empty() {
            return 0.0;
        }
        self.games.iter().map(|g| g.moves as f64).sum::<f64>() / self.games.len() as f64
    }

    /// Mean move count at which the goal first appeared, over games that
    /// reached it.
    pub fn mean_moves_to(&self, goal_exponent: u8) -> Option<f64> {
        let pick = |g: &GameRow| match goal_exponent {
            7 => g.moves_to_128,
            8 => g.moves_to_256,
            _ => None,
        };
        let hits: Vec<u32> = self.games.iter().filter_map(pick).collect();
        if hits.is_empty() {
            None
        } else {
            Some(hits.iter().map(|&m| m as f64).sum::<f64>() / hits.len() as f64)
        }
    }

    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "game,moves,max_tile_exponent,reached128,reached256,moves_to_128,moves_to_256"
        )?;
        let opt = |m: Option<u32>| m.map(|v| v.to_string()).unwrap_or_default();
        for (i, g) in self.games.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                i,
                g.moves,
                g.max_tile_exponent,
                (g.max_tile_exponent >= 7) as u8,
                (g.max_tile_exponent >= 8) as u8,
                opt(g.moves_to_128),
                opt(g.moves_to_256)
            )?;
        }
        let fmt_opt = |m: Option<f64>| m.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
        writeln!(
            w,
            "# summary games={} reach128_pct={:.2} reach256_pct={:.2} mean_moves={:.2} mean_moves_to_128={} mean_moves_to_256={}",
            self.games.len(),
            100.0 * self.reach_rate(7),
            100.0 * self.reach_rate(8),
            self.mean_moves(),
            fmt_opt(self.mean_moves_to(7)),
            fmt_opt(self.mean_moves_to(8))
        )
    }
}
