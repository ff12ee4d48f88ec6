use serde::{Deserialize, Serialize};

use crate::analysis::NetworkMetrics;
use crate::error::{ConfigError, Error, Result};

/// Stationarity test settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceConfig {
    /// Span of the sliding window in steps.
    pub window_steps: u64,
    /// Largest allowed spread (max − min) relative to the window mean.
    pub tolerance: f64,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            window_steps: 500,
            tolerance: 0.02,
        }
    }
}

impl ConvergenceConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.window_steps == 0 {
            return Err(ConfigError::new("window_steps", "must be at least 1"));
        }
        if !(self.tolerance.is_finite() && self.tolerance >= 0.0) {
            return Err(ConfigError::new("tolerance", "must be non-negative"));
        }
        Ok(())
    }
}

fn steady(values: impl Iterator<Item = f64> + Clone, tolerance: f64) -> bool {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    hi - lo <= tolerance * mean.abs()
}

/// True iff skeleton length and cycle count both stay within `tolerance`
/// of their window mean (spread relative to mean). With small cycle counts
/// this means the count must not change at all.
pub fn check_convergence(window: &[NetworkMetrics], tolerance: f64) -> Result<bool> {
    if window.len() < 2 {
        return Err(Error::Undefined("convergence needs a window of at least two samples"));
    }
    Ok(steady(window.iter().map(|m| m.skeleton_length), tolerance)
        && steady(window.iter().map(|m| m.cycle_count as f64), tolerance))
}
