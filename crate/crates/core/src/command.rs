//! Steering commands applied to a running simulation between system steps.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::model::{NodeSource, SimulationParams, SimulationState, DEFAULT_NODE_RADIUS};

/// Parameters that may be changed while a simulation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParamName {
    #[serde(rename = "SA")]
    SensorAngle,
    #[serde(rename = "RA")]
    RotationAngle,
    #[serde(rename = "SO")]
    SensorOffset,
    #[serde(rename = "SW")]
    SensorWidth,
    #[serde(rename = "SS")]
    StepSize,
    #[serde(rename = "depT")]
    Deposit,
    #[serde(rename = "damp")]
    Damp,
}

impl ParamName {
    pub fn as_str(self) -> &'static str {
        match self {
            ParamName::SensorAngle => "SA",
            ParamName::RotationAngle => "RA",
            ParamName::SensorOffset => "SO",
            ParamName::SensorWidth => "SW",
            ParamName::StepSize => "SS",
            ParamName::Deposit => "depT",
            ParamName::Damp => "damp",
        }
    }

    /// A copy of `params` with this parameter set to `value`, validated.
    pub fn updated(self, params: &SimulationParams, value: f64) -> Result<SimulationParams, ConfigError> {
        let mut p = params.clone();
        match self {
            ParamName::SensorAngle => p.sensor_angle_deg = value,
            ParamName::RotationAngle => p.rotation_angle_deg = value,
            ParamName::SensorOffset => p.sensor_offset = value,
            ParamName::SensorWidth => {
                if !(value.is_finite() && value.fract() == 0.0 && value >= 1.0) {
                    return Err(ConfigError::new("SW", "must be a positive odd integer"));
                }
                p.sensor_width = value as usize;
            }
            ParamName::StepSize => p.step_size = value,
            ParamName::Deposit => p.deposit = value,
            ParamName::Damp => p.damp = value,
        }
        p.validate()
            .map_err(|e| ConfigError::new(self.as_str(), e.reason))?;
        Ok(p)
    }
}

/// A steering command. Serialised as a JSON object tagged by `type`, e.g.
/// `{"type":"set_param","name":"SA","value":15}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Command {
    SetParam { name: ParamName, value: f64 },
    AddNode {
        x: i64,
        y: i64,
        #[serde(default = "default_radius")]
        radius: u32,
        weight: f64,
    },
    RemoveNode { id: u32 },
    EnableNode { id: u32, enabled: bool },
    Pause {},
    Resume {},
    Step { count: u64 },
    SetSpeed { steps_per_second: f64 },
    Snapshot {},
}

fn default_radius() -> u32 {
    DEFAULT_NODE_RADIUS
}

/// What applying a command changed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Applied {
    /// The simulation state was modified.
    State,
    /// A node was added with this id.
    NodeAdded(u32),
    /// The command only affects the run loop (pause, speed, ...).
    Control,
}

impl Command {
    /// Whether the command changes the simulation state (as opposed to the
    /// loop driving it). Only these matter for replay.
    pub fn changes_state(&self) -> bool {
        matches!(
            self,
            Command::SetParam { .. }
                | Command::AddNode { .. }
                | Command::RemoveNode { .. }
                | Command::EnableNode { .. }
        )
    }

    /// Check the command against `state` without changing anything.
    pub fn validate(&self, state: &SimulationState) -> Result<(), ConfigError> {
        match self {
            Command::SetParam { name, value } => name.updated(&state.params, *value).map(|_| ()),
            Command::AddNode { x, y, radius, weight } => {
                NodeSource::new(state.next_node_id(), *x, *y, *radius, *weight)
                    .validate(state.params.width, state.params.height)
            }
            Command::RemoveNode { id } | Command::EnableNode { id, .. } => state
                .node(*id)
                .map(|_| ())
                .ok_or_else(|| ConfigError::new("id", format!("no node with id {id}"))),
            Command::Step { count } if *count == 0 => {
                Err(ConfigError::new("count", "must be at least 1"))
            }
            Command::SetSpeed { steps_per_second } => {
                if steps_per_second.is_finite() && *steps_per_second > 0.0 {
                    Ok(())
                } else {
                    Err(ConfigError::new("steps_per_second", "must be positive"))
                }
            }
            _ => Ok(()),
        }
    }

    /// Validate and apply. On error the state is untouched.
    pub fn apply(&self, state: &mut SimulationState) -> Result<Applied, ConfigError> {
        self.validate(state)?;
        Ok(match self {
            Command::SetParam { name, value } => {
                state.params = name.updated(&state.params, *value)?;
                Applied::State
            }
            Command::AddNode { x, y, radius, weight } => {
                let id = state.next_node_id();
                state.nodes.push(NodeSource::new(id, *x, *y, *radius, *weight));
                Applied::NodeAdded(id)
            }
            Command::RemoveNode { id } => {
                state.nodes.retain(|n| n.id != *id);
                Applied::State
            }
            Command::EnableNode { id, enabled } => {
                if let Some(n) = state.node_mut(*id) {
                    n.enabled = *enabled;
                }
                Applied::State
            }
            _ => Applied::Control,
        })
    }
}

/// A command together with the step boundary at which it took effect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoggedCommand {
    pub step: u64,
    pub command: Command,
}

/// Append-only record of applied commands, in application order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CommandLog {
    entries: Vec<LoggedCommand>,
}

impl CommandLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build a log from entries, rejecting decreasing steps.
    pub fn from_entries(entries: Vec<LoggedCommand>) -> Result<Self, ConfigError> {
        if let Some(i) = entries.windows(2).position(|w| w[1].step < w[0].step) {
            return Err(ConfigError::new(
                format!("[{}].step", i + 1),
                "command log steps must not decrease",
            ));
        }
        Ok(Self { entries })
    }

    /// # Panics
    /// If `step` is earlier than the last logged step.
    pub fn push(&mut self, step: u64, command: Command) {
        if let Some(last) = self.entries.last() {
            assert!(step >= last.step, "command log steps must not decrease");
        }
        self.entries.push(LoggedCommand { step, command });
    }

    pub fn entries(&self) -> &[LoggedCommand] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
