use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::AnalysisConfig;
use crate::error::{ConfigError, Error, Result};
use crate::model::{NodeSource, SimulationParams, DEFAULT_NODE_RADIUS};
use crate::scenario::{
    ConvergenceConfig, Method, MethodKind, PlasmodialKnobs, Scenario, Schedule, DEFAULT_HOLE_FREE_SAMPLES,
    DEFAULT_P_REMOVE, DEFAULT_SPAWN_PER_NODE, DEFAULT_TARGET_POPULATION_PCT,
};

/// A node as written in scenario files. Ids default to the list position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<u32>,
    pub x: i64,
    pub y: i64,
    #[serde(default = "default_radius")]
    pub radius: u32,
    pub weight: f64,
    #[serde(default = "yes")]
    pub enabled: bool,
}

fn default_radius() -> u32 {
    DEFAULT_NODE_RADIUS
}

fn yes() -> bool {
    true
}

fn default_max_steps() -> u64 {
    10_000
}

fn default_metrics_every() -> u64 {
    50
}

/// The on-disk scenario document. Omitted parameters take the base
/// experiment values; method knobs may only appear with the method that
/// uses them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub params: SimulationParams,
    #[serde(default)]
    pub nodes: Vec<NodeSpec>,
    pub method: MethodKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spawn_per_node_per_step: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_remove: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_population_pct: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hole_free_samples: Option<usize>,
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_steps")]
    pub max_steps: u64,
    #[serde(default = "default_metrics_every")]
    pub metrics_every: u64,
    #[serde(default)]
    pub frames_every: u64,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub convergence: ConvergenceConfig,
    /// Defaults to true for the shrinkage methods, false otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_on_convergence: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

fn misplaced(name: &str, method: MethodKind) -> ConfigError {
    ConfigError::new(name, format!("not used by method {method:?}"))
}

impl ScenarioFile {
    pub fn into_scenario(self) -> Result<Scenario, ConfigError> {
        let kind = self.method;
        let knobs = [
            ("spawn_per_node_per_step", self.spawn_per_node_per_step.is_some(), MethodKind::FilamentousForaging),
            ("p_remove", self.p_remove.is_some(), MethodKind::PlasmodialShrinkage),
            (
                "target_population_pct",
                self.target_population_pct.is_some(),
                MethodKind::PlasmodialShrinkage,
            ),
            ("hole_free_samples", self.hole_free_samples.is_some(), MethodKind::PlasmodialShrinkage),
        ];
        for (name, present, owner) in knobs {
            if present && kind != owner {
                return Err(misplaced(name, kind));
            }
        }
        let method = match kind {
            MethodKind::FilamentousShrinkage => Method::FilamentousShrinkage,
            MethodKind::FreeRun => Method::FreeRun,
            MethodKind::FilamentousForaging => Method::FilamentousForaging {
                spawn_per_node_per_step: self.spawn_per_node_per_step.unwrap_or(DEFAULT_SPAWN_PER_NODE),
            },
            MethodKind::PlasmodialShrinkage => Method::PlasmodialShrinkage(PlasmodialKnobs {
                p_remove: self.p_remove.unwrap_or(DEFAULT_P_REMOVE),
                target_population_pct: self.target_population_pct.unwrap_or(DEFAULT_TARGET_POPULATION_PCT),
                hole_free_samples: self.hole_free_samples.unwrap_or(DEFAULT_HOLE_FREE_SAMPLES),
            }),
        };
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| NodeSource {
                id: n.id.unwrap_or(i as u32),
                cx: n.x,
                cy: n.y,
                radius: n.radius,
                weight: n.weight,
                enabled: n.enabled,
            })
            .collect();
        let mut scenario = Scenario::new(self.params, nodes, method);
        scenario.schedule = self.schedule;
        scenario.seed = self.seed;
        scenario.max_steps = self.max_steps;
        scenario.metrics_every = self.metrics_every;
        scenario.frames_every = self.frames_every;
        scenario.analysis = self.analysis;
        scenario.convergence = self.convergence;
        if let Some(stop) = self.stop_on_convergence {
            scenario.stop_on_convergence = stop;
        }
        scenario.output_dir = self.output_dir;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_scenario(s: &Scenario) -> Self {
        let (mut spawn, mut p_remove, mut target, mut hole_free) = (None, None, None, None);
        match s.method {
            Method::FilamentousForaging { spawn_per_node_per_step } => spawn = Some(spawn_per_node_per_step),
            Method::PlasmodialShrinkage(k) => {
                p_remove = Some(k.p_remove);
                target = Some(k.target_population_pct);
                hole_free = Some(k.hole_free_samples);
            }
            _ => {}
        }
        Self {
            params: s.params.clone(),
            nodes: s
                .nodes
                .iter()
                .map(|n| NodeSpec {
                    id: Some(n.id),
                    x: n.cx,
                    y: n.cy,
                    radius: n.radius,
                    weight: n.weight,
                    enabled: n.enabled,
                })
                .collect(),
            method: s.method.kind(),
            spawn_per_node_per_step: spawn,
            p_remove,
            target_population_pct: target,
            hole_free_samples: hole_free,
            schedule: s.schedule.clone(),
            seed: s.seed,
            max_steps: s.max_steps,
            metrics_every: s.metrics_every,
            frames_every: s.frames_every,
            analysis: s.analysis,
            convergence: s.convergence,
            stop_on_convergence: Some(s.stop_on_convergence),
            output_dir: s.output_dir.clone(),
        }
    }
}

/// Parse and validate a scenario document. Errors name the offending
/// field path, e.g. `params.sensor_angle_deg`.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            Error::Parse(inner)
        } else {
            Error::Config(ConfigError::new(path, inner.to_string()))
        }
    })?;
    Ok(file.into_scenario()?)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    parse_scenario(&std::fs::read_to_string(path)?)
}

pub fn scenario_to_json(scenario: &Scenario) -> String {
    serde_json::to_string_pretty(&ScenarioFile::from_scenario(scenario)).expect("scenario serialises")
}
