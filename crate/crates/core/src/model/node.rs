use serde::{Deserialize, Serialize};

use super::trail::TrailField;
use crate::error::ConfigError;

/// Default node disc radius in cells.
pub const DEFAULT_NODE_RADIUS: u32 = 2;

/// A disc of cells that injects trail every step, representing one problem
/// node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSource {
    pub id: u32,
    pub cx: i64,
    pub cy: i64,
    pub radius: u32,
    pub weight: f64,
    pub enabled: bool,
}

impl NodeSource {
    pub fn new(id: u32, cx: i64, cy: i64, radius: u32, weight: f64) -> Self {
        Self {
            id,
            cx,
            cy,
            radius,
            weight,
            enabled: true,
        }
    }

    pub fn validate(&self, width: usize, height: usize) -> Result<(), ConfigError> {
        if self.radius < 1 {
            return Err(ConfigError::new("radius", "must be at least 1"));
        }
        if !(self.weight.is_finite() && self.weight > 0.0) {
            return Err(ConfigError::new("weight", "must be positive"));
        }
        let r = i64::from(self.radius);
        if self.cx - r < 0
            || self.cy - r < 0
            || self.cx + r >= width as i64
            || self.cy + r >= height as i64
        {
            return Err(ConfigError::new("x/y", "node disc must fit inside the lattice"));
        }
        Ok(())
    }

    /// Cells with `dx² + dy² ≤ r²`, in row-major order.
    pub fn disc_cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let r = i64::from(self.radius);
        (-r..=r).flat_map(move |dy| {
            (-r..=r).filter_map(move |dx| {
                (dx * dx + dy * dy <= r * r)
                    .then(|| ((self.cx + dx) as usize, (self.cy + dy) as usize))
            })
        })
    }

    pub fn centre(&self) -> (usize, usize) {
        (self.cx as usize, self.cy as usize)
    }
}

/// Add each enabled node's stimulus to every cell of its disc.
/// Overlapping discs accumulate.
pub fn inject_nodes(trail: &mut TrailField, nodes: &[NodeSource], stimulus_scale: f64) {
    for node in nodes.iter().filter(|n| n.enabled) {
        let amount = node.weight * stimulus_scale;
        for (x, y) in node.disc_cells() {
            trail.add(x, y, amount);
        }
    }
}
