//! Gap report comparing clean simulator play against the closed loop with
//! vision round-trip and injected recognition errors.

use std::io;

use swipe48_core::dqn::EvalStats;

#[derive(Clone, Copy, Debug)]
pub struct GapReport {
    pub reach128_clean_pct: f64,
    pub reach128_injected_pct: f64,
    pub reach256_clean_pct: f64,
    pub reach256_injected_pct: f64,
    pub mean_moves_clean: f64,
    pub mean_moves_injected: f64,
}

impl GapReport {
    pub fn from_stats(clean: &EvalStats, injected: &EvalStats) -> GapReport {
        GapReport {
            reach128_clean_pct: clean.reach_rate(7) * 100.0,
            reach128_injected_pct: injected.reach_rate(7) * 100.0,
            reach256_clean_pct: clean.reach_rate(8) * 100.0,
            reach256_injected_pct: injected.reach_rate(8) * 100.0,
            mean_moves_clean: clean.mean_moves(),
            mean_moves_injected: injected.mean_moves(),
        }
    }

    /// Injected minus clean, percentage points (negative = drop).
    pub fn reach128_diff_pp(&self) -> f64 {
        self.reach128_injected_pct - self.reach128_clean_pct
    }

    pub fn reach256_diff_pp(&self) -> f64 {
        self.reach256_injected_pct - self.reach256_clean_pct
    }

    /// Relative change of moves per game in percent (positive = inflation).
    pub fn moves_inflation_pct(&self) -> f64 {
        if self.mean_moves_clean == 0.0 {
            return 0.0;
        }
        (self.mean_moves_injected - self.mean_moves_clean) / self.mean_moves_clean * 100.0
    }

    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "metric,clean,injected,difference")?;
        writeln!(
            w,
            "reach_128_pct,{:.4},{:.4},{:.4}",
            self.reach128_clean_pct,
            self.reach128_injected_pct,
            self.reach128_diff_pp()
        )?;
        writeln!(
            w,
            "reach_256_pct,{:.4},{:.4},{:.4}",
            self.reach256_clean_pct,
            self.reach256_injected_pct,
            self.reach256_diff_pp()
        )?;
        writeln!(
            w,
            "mean_moves,{:.4},{:.4},{:.4}",
            self.mean_moves_clean,
            self.mean_moves_injected,
            self.moves_inflation_pct()
        )?;
        writeln!(
            w,
            "# actuation is simulated; control error enters only through the swipe residuals in swipes.csv"
        )?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use swipe48_core::dqn::GameRow;

    fn stats(rows: Vec<GameRow>) -> EvalStats {
        EvalStats::from_rows(rows)
    }

    #[test]
    fn differences_have_the_right_signs() {
        let clean = stats(vec![
            GameRow { moves: 100, max_tile_exponent: 8, moves_to_128: Some(70), moves_to_256: Some(100) },
            GameRow { moves: 100, max_tile_exponent: 7, moves_to_128: Some(80), moves_to_256: None },
        ]);
        let injected = stats(vec![
            GameRow { moves: 110, max_tile_exponent: 7, moves_to_128: Some(75), moves_to_256: None },
            GameRow { moves: 110, max_tile_exponent: 6, moves_to_128: None, moves_to_256: None },
        ]);
        let gap = GapReport::from_stats(&clean, &injected);
        assert_eq!(gap.reach128_clean_pct, 100.0);
        assert_eq!(gap.reach128_injected_pct, 50.0);
        assert_eq!(gap.reach128_diff_pp(), -50.0);
        assert_eq!(gap.reach256_diff_pp(), -50.0);
        assert!((gap.moves_inflation_pct() - 10.0).abs() < 1e-9);
    }

    #[test]
    fn csv_has_fixed_rows() {
        let s = stats(vec![GameRow {
            moves: 50,
            max_tile_exponent: 5,
            moves_to_128: None,
            moves_to_256: None,
        }]);
        let gap = GapReport::from_stats(&s, &s);
        let mut buf = Vec::new();
        gap.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "metric,clean,injected,difference");
        assert!(lines[1].starts_with("reach_128_pct,"));
        assert!(lines[2].starts_with("reach_256_pct,"));
        assert!(lines[3].starts_with("mean_moves,"));
    }
}
