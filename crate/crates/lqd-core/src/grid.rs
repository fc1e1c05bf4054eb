//! Time grids.

use serde::{Deserialize, Serialize};

pub const DEFAULT_POINTS: usize = 2048;
pub const DEFAULT_T_MIN: f64 = 1e-3;

/// `points` equispaced nodes on `[a, b]`, both ends included.
pub fn uniform(a: f64, b: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2, "grid needs at least two points");
    let h = (b - a) / (points - 1) as f64;
    let mut out: Vec<f64> = (0..points).map(|j| a + h * j as f64).collect();
    out[points - 1] = b;
    out
}

/// Grid description carried by reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { t_min: DEFAULT_T_MIN, t_max: 1.0, points: DEFAULT_POINTS }
    }
}

impl GridSpec {
    pub fn nodes(&self) -> Vec<f64> {
        uniform(self.t_min, self.t_max, self.points)
    }

    /// Same interval with twice the resolution.
    pub fn refined(&self) -> GridSpec {
        GridSpec { points: 2 * self.points - 1, ..*self }
    }

    pub fn of(nodes: &[f64]) -> GridSpec {
        GridSpec { t_min: nodes[0], t_max: *nodes.last().unwrap(), points: nodes.len() }
    }
}
