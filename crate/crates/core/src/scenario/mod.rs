//! Node-constrained minimisation methods, parameter schedules and the
//! stepwise runner shared by batch runs, replay and the steering service.

mod convergence;
mod runner;
mod schedule;

pub use convergence::{check_convergence, ConvergenceConfig};
pub use runner::{Phase, RunResult, Runner, Termination};
pub use schedule::{Schedule, ScheduleAction, ScheduleEntry};

use serde::{Deserialize, Serialize};

use crate::analysis::AnalysisConfig;
use crate::error::ConfigError;
use crate::model::{NodeSource, SimulationParams, SimulationState};

/// Default agents placed per node per step by the foraging method.
pub const DEFAULT_SPAWN_PER_NODE: usize = 1;
/// Default per-agent, per-step removal probability in plasmodial shrinkage.
pub const DEFAULT_P_REMOVE: f64 = 0.001;
/// Default population (percent of area) at which reduction stops.
pub const DEFAULT_TARGET_POPULATION_PCT: f64 = 4.0;
/// Default number of consecutive hole-free samples before reduction starts.
pub const DEFAULT_HOLE_FREE_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    FilamentousShrinkage,
    FilamentousForaging,
    PlasmodialShrinkage,
    FreeRun,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlasmodialKnobs {
    pub p_remove: f64,
    pub target_population_pct: f64,
    /// Consecutive samples with a hole-free trail mask needed to end the
    /// settling phase.
    pub hole_free_samples: usize,
}

impl Default for PlasmodialKnobs {
    fn default() -> Self {
        Self {
            p_remove: DEFAULT_P_REMOVE,
            target_population_pct: DEFAULT_TARGET_POPULATION_PCT,
            hole_free_samples: DEFAULT_HOLE_FREE_SAMPLES,
        }
    }
}

/// A minimisation method with its knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Small random population, nodes injected every step.
    FilamentousShrinkage,
    /// Agents enter only through the node discs, a few per step.
    FilamentousForaging { spawn_per_node_per_step: usize },
    /// A dense sheet that is thinned out by random removal once hole-free.
    PlasmodialShrinkage(PlasmodialKnobs),
    /// No method-specific behaviour.
    FreeRun,
}

impl Method {
    pub fn kind(&self) -> MethodKind {
        match self {
            Method::FilamentousShrinkage => MethodKind::FilamentousShrinkage,
            Method::FilamentousForaging { .. } => MethodKind::FilamentousForaging,
            Method::PlasmodialShrinkage(_) => MethodKind::PlasmodialShrinkage,
            Method::FreeRun => MethodKind::FreeRun,
        }
    }

    /// The method with default knobs.
    pub fn with_defaults(kind: MethodKind) -> Self {
        match kind {
            MethodKind::FilamentousShrinkage => Method::FilamentousShrinkage,
            MethodKind::FilamentousForaging => Method::FilamentousForaging {
                spawn_per_node_per_step: DEFAULT_SPAWN_PER_NODE,
            },
            MethodKind::PlasmodialShrinkage => Method::PlasmodialShrinkage(PlasmodialKnobs::default()),
            MethodKind::FreeRun => Method::FreeRun,
        }
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: SimulationParams,
    pub nodes: Vec<NodeSource>,
    pub method: Method,
    pub schedule: Schedule,
    pub seed: u64,
    pub max_steps: u64,
    /// Sample metrics every this many steps (and at step 0).
    pub metrics_every: u64,
    /// Write a frame every this many steps; 0 disables frames.
    pub frames_every: u64,
    pub analysis: AnalysisConfig,
    pub convergence: ConvergenceConfig,
    /// End the run early once the network is stationary.
    pub stop_on_convergence: bool,
    pub output_dir: Option<String>,
}

impl Scenario {
    /// A scenario with default settings for `method` over `nodes`.
    pub fn new(params: SimulationParams, nodes: Vec<NodeSource>, method: Method) -> Self {
        let stop = matches!(
            method,
            Method::FilamentousShrinkage | Method::PlasmodialShrinkage(_)
        );
        Self {
            params,
            nodes,
            method,
            schedule: Schedule::default(),
            seed: 0,
            max_steps: 10_000,
            metrics_every: 50,
            frames_every: 0,
            analysis: AnalysisConfig::default(),
            convergence: ConvergenceConfig::default(),
            stop_on_convergence: stop,
            output_dir: None,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        // Parameters and nodes are checked by building an empty state.
        SimulationState::empty(self.params.clone(), self.nodes.clone(), self.seed)?;
        let mut ids: Vec<u32> = self.nodes.iter().map(|n| n.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(ConfigError::new("nodes", "node ids must be unique"));
        }
        if self.metrics_every == 0 {
            return Err(ConfigError::new("metrics_every", "must be at least 1"));
        }
        let a = &self.analysis;
        if !(a.threshold > 0.0 && a.threshold < 1.0) {
            return Err(ConfigError::new("analysis.threshold", "must lie in (0, 1)"));
        }
        if a.window_radius < 3 {
            return Err(ConfigError::new("analysis.window_radius", "must be at least 3"));
        }
        self.convergence.validate().map_err(|e| e.within("convergence"))?;
        match self.method {
            Method::PlasmodialShrinkage(k) => {
                if self.params.population_pct <= 40.0 {
                    return Err(ConfigError::new(
                        "params.population_pct",
                        "plasmodial shrinkage needs a population above 40% of the area",
                    ));
                }
                if !(k.p_remove > 0.0 && k.p_remove < 1.0) {
                    return Err(ConfigError::new("p_remove", "must lie in (0, 1)"));
                }
                if !(k.target_population_pct > 0.0 && k.target_population_pct < self.params.population_pct) {
                    return Err(ConfigError::new(
                        "target_population_pct",
                        "must be positive and below the initial population",
                    ));
                }
                if k.hole_free_samples == 0 {
                    return Err(ConfigError::new("hole_free_samples", "must be at least 1"));
                }
                if self.nodes.is_empty() {
                    return Err(ConfigError::new("nodes", "plasmodial shrinkage needs at least one node"));
                }
            }
            Method::FilamentousForaging { .. } if self.nodes.is_empty() => {
                return Err(ConfigError::new("nodes", "foraging needs at least one node"));
            }
            _ => {}
        }
        self.schedule
            .validate(&self.params, &self.nodes, self.method.kind())
            .map_err(|e| e.within("schedule"))
    }
}
