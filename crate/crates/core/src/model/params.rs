use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Agent and diffusion boundary handling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Periodic,
    Fixed,
}

/// Every tunable of the agent/trail engine.
///
/// Defaults are the base experiment settings: a 200x200 blank lattice, 5%
/// population, sensor angle 15°, sensor offset 15 cells, rotation 45°,
/// sensor width 1, deposit 5 and damping 0.1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationParams {
    pub width: usize,
    pub height: usize,
    /// Population as a percentage of the lattice area.
    pub population_pct: f64,
    pub sensor_angle_deg: f64,
    /// Distance from the agent to each sensor point, in cells.
    pub sensor_offset: f64,
    pub rotation_angle_deg: f64,
    /// Side of the square block averaged by each sensor; odd.
    pub sensor_width: usize,
    pub step_size: f64,
    /// Trail added at the destination cell of every successful move.
    pub deposit: f64,
    pub damp: f64,
    pub boundary: Boundary,
    /// With a fixed boundary, turn right whenever any sensor is off the
    /// lattice. Disabling it reproduces corner adhesion.
    pub corner_rule: bool,
    /// Trail units injected per unit of node weight per step.
    pub node_stimulus_scale: f64,
    /// Trail value mapped to full white when quantising frames.
    pub trail_display_cap: f64,
    /// Optional saturation of the trail field; `None` leaves it uncapped.
    pub trail_cap: Option<f64>,
}

impl Default for SimulationParams {
    fn default() -> Self {
        Self {
            width: 200,
            height: 200,
            population_pct: 5.0,
            sensor_angle_deg: 15.0,
            sensor_offset: 15.0,
            rotation_angle_deg: 45.0,
            sensor_width: 1,
            step_size: 1.0,
            deposit: 5.0,
            damp: 0.1,
            boundary: Boundary::Periodic,
            corner_rule: true,
            node_stimulus_scale: 100.0,
            trail_display_cap: 25.0,
            trail_cap: None,
        }
    }
}

fn finite(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::new(field, "must be finite"))
    }
}

impl SimulationParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.width < 3 {
            return Err(ConfigError::new("width", "must be at least 3"));
        }
        if self.height < 3 {
            return Err(ConfigError::new("height", "must be at least 3"));
        }
        let p = finite("population_pct", self.population_pct)?;
        if !(p > 0.0 && p <= 100.0) {
            return Err(ConfigError::new("population_pct", "must be in (0, 100]"));
        }
        let sa = finite("sensor_angle_deg", self.sensor_angle_deg)?;
        if !(0.0..180.0).contains(&sa) {
            return Err(ConfigError::new("sensor_angle_deg", "must be in [0, 180)"));
        }
        if finite("sensor_offset", self.sensor_offset)? <= 0.0 {
            return Err(ConfigError::new("sensor_offset", "must be positive"));
        }
        finite("rotation_angle_deg", self.rotation_angle_deg)?;
        if self.sensor_width == 0 || self.sensor_width % 2 == 0 {
            return Err(ConfigError::new("sensor_width", "must be odd and at least 1"));
        }
        if finite("step_size", self.step_size)? <= 0.0 {
            return Err(ConfigError::new("step_size", "must be positive"));
        }
        if finite("deposit", self.deposit)? <= 0.0 {
            return Err(ConfigError::new("deposit", "must be positive"));
        }
        let damp = finite("damp", self.damp)?;
        if !(0.0..1.0).contains(&damp) {
            return Err(ConfigError::new("damp", "must be in [0, 1)"));
        }
        if finite("node_stimulus_scale", self.node_stimulus_scale)? < 0.0 {
            return Err(ConfigError::new("node_stimulus_scale", "must be non-negative"));
        }
        if finite("trail_display_cap", self.trail_display_cap)? <= 0.0 {
            return Err(ConfigError::new("trail_display_cap", "must be positive"));
        }
        if let Some(cap) = self.trail_cap {
            if finite("trail_cap", cap)? <= 0.0 {
                return Err(ConfigError::new("trail_cap", "must be positive"));
            }
        }
        Ok(())
    }

    pub fn area(&self) -> usize {
        self.width * self.height
    }

    /// Number of agents implied by `population_pct`, rounded to nearest.
    pub fn target_population(&self) -> usize {
        (self.population_pct / 100.0 * self.area() as f64).round() as usize
    }
}
