use serde::{Deserialize, Serialize};

use crate::error::{argument, Result};

/// Descending geometric ladder of scales `eps_max·ratio^k`, `k < rungs`,
/// truncated below an optional resolution floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    pub eps_max: f64,
    pub ratio: f64,
    pub rungs: usize,
    #[serde(default)]
    pub floor: Option<f64>,
}

impl Default for Ladder {
    fn default() -> Self {
        Self {
            eps_max: 1.0,
            ratio: 0.5,
            rungs: 40,
            floor: None,
        }
    }
}

impl Ladder {
    pub fn new(eps_max: f64, ratio: f64, rungs: usize) -> Self {
        Self {
            eps_max,
            ratio,
            rungs,
            floor: None,
        }
    }

    /// Raise the floor to `floor` if it is coarser than the current one.
    pub fn with_floor(mut self, floor: Option<f64>) -> Self {
        self.floor = match (self.floor, floor) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_max > 0.0 && self.eps_max.is_finite()) {
            return argument(format!("ladder eps_max must be positive, got {}", self.eps_max));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return argument(format!("ladder ratio must lie in (0,1), got {}", self.ratio));
        }
        if self.rungs == 0 {
            return argument("ladder needs at least one rung");
        }
        Ok(())
    }

    /// Scales at or above the floor, largest first.
    pub fn scales(&self) -> Vec<f64> {
        let floor = self.floor.unwrap_or(0.0);
        (0..self.rungs)
            .map(|k| self.eps_max * self.ratio.powi(k as i32))
            .filter(|&e| e >= floor * (1.0 - 1e-12))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_truncates() {
        let l = Ladder::new(1.0, 1.0 / 3.0, 20).with_floor(Some(3f64.powi(-5)));
        assert_eq!(l.scales().len(), 6);
        assert_eq!(Ladder::default().scales().len(), 40);
    }

    #[test]
    fn coarser_floor_wins() {
        let l = Ladder::default().with_floor(Some(1e-3)).with_floor(Some(1e-6));
        assert_eq!(l.floor, Some(1e-3));
    }
}
