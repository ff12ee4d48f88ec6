use serde::{Deserialize, Serialize};

use super::MethodKind;
use crate::command::ParamName;
use crate::error::ConfigError;
use crate::model::{NodeSource, SimulationParams};

/// Something a schedule does at the start of a given step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleAction {
    SetParam { name: ParamName, value: f64 },
    SetNodeEnabled { id: u32, enabled: bool },
    /// Start population reduction now (plasmodial shrinkage only).
    BeginReduction,
    /// Change the foraging spawn rate (agents per node per step).
    SpawnRate(usize),
}

/// One schedule row. Serialised as `{"step": 5000, "action": "SA", "value": 15}`;
/// actions are the parameter names `SA RA SO SW SS depT damp`, and
/// `enable_node` / `disable_node` (value = node id), `begin_reduction` (no
/// value), `spawn_rate` (value = agents per node per step).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEntry", into = "RawEntry")]
pub struct ScheduleEntry {
    pub step: u64,
    pub action: ScheduleAction,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    step: u64,
    action: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
}

fn whole(value: Option<f64>, what: &str) -> Result<u64, String> {
    match value {
        Some(v) if v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => Ok(v as u64),
        Some(_) => Err(format!("value must be a non-negative integer {what}")),
        None => Err(format!("value (the {what}) is required")),
    }
}

impl TryFrom<RawEntry> for ScheduleEntry {
    type Error = String;

    fn try_from(raw: RawEntry) -> Result<Self, String> {
        let action = match raw.action.as_str() {
            "enable_node" | "disable_node" => ScheduleAction::SetNodeEnabled {
                id: whole(raw.value, "node id")? as u32,
                enabled: raw.action == "enable_node",
            },
            "begin_reduction" => {
                if raw.value.is_some() {
                    return Err("begin_reduction takes no value".into());
                }
                ScheduleAction::BeginReduction
            }
            "spawn_rate" => ScheduleAction::SpawnRate(whole(raw.value, "spawn rate")? as usize),
            other => {
                let name: ParamName = serde_json::from_value(serde_json::Value::String(other.into()))
                    .map_err(|_| format!("unknown schedule action `{other}`"))?;
                let value = raw.value.ok_or("value is required for parameter changes")?;
                ScheduleAction::SetParam { name, value }
            }
        };
        Ok(ScheduleEntry { step: raw.step, action })
    }
}

impl From<ScheduleEntry> for RawEntry {
    fn from(e: ScheduleEntry) -> Self {
        let (action, value) = match e.action {
            ScheduleAction::SetParam { name, value } => (name.as_str().to_string(), Some(value)),
            ScheduleAction::SetNodeEnabled { id, enabled } => (
                if enabled { "enable_node" } else { "disable_node" }.to_string(),
                Some(f64::from(id)),
            ),
            ScheduleAction::BeginReduction => ("begin_reduction".to_string(), None),
            ScheduleAction::SpawnRate(r) => ("spawn_rate".to_string(), Some(r as f64)),
        };
        RawEntry {
            step: e.step,
            action,
            value,
        }
    }
}

/// Timed actions. Entries are kept in step order; several entries may
/// share a step and are then applied in the order listed.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schedule {
    pub entries: Vec<ScheduleEntry>,
}

impl Schedule {
    pub fn new(entries: Vec<ScheduleEntry>) -> Self {
        Self { entries }
    }

    pub fn at(mut self, step: u64, action: ScheduleAction) -> Self {
        self.entries.push(ScheduleEntry { step, action });
        self
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Check ordering and replay every parameter change against the
    /// parameter invariants, so nothing can fail mid-run.
    pub fn validate(
        &self,
        params: &SimulationParams,
        nodes: &[NodeSource],
        method: MethodKind,
    ) -> Result<(), ConfigError> {
        let mut p = params.clone();
        let mut last = 0;
        for (i, e) in self.entries.iter().enumerate() {
            let at = |field: &str| format!("[{i}].{field}");
            if e.step < last {
                return Err(ConfigError::new(at("step"), "steps must not decrease"));
            }
            last = e.step;
            match e.action {
                ScheduleAction::SetParam { name, value } => {
                    p = name
                        .updated(&p, value)
                        .map_err(|err| ConfigError::new(at("value"), err.to_string()))?;
                }
                ScheduleAction::SetNodeEnabled { id, .. } => {
                    if !nodes.iter().any(|n| n.id == id) {
                        return Err(ConfigError::new(at("value"), format!("no node with id {id}")));
                    }
                }
                ScheduleAction::BeginReduction => {
                    if method != MethodKind::PlasmodialShrinkage {
                        return Err(ConfigError::new(
                            at("action"),
                            "begin_reduction applies to plasmodial shrinkage only",
                        ));
                    }
                }
                ScheduleAction::SpawnRate(_) => {
                    if method != MethodKind::FilamentousForaging {
                        return Err(ConfigError::new(
                            at("action"),
                            "spawn_rate applies to filamentous foraging only",
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let text = r#"[{"step":10,"action":"SA","value":15.0},{"step":10,"action":"disable_node","value":0.0},{"step":20,"action":"begin_reduction"},{"step":30,"action":"spawn_rate","value":3.0}]"#;
        let s: Schedule = serde_json::from_str(text).unwrap();
        assert_eq!(s.entries.len(), 4);
        assert_eq!(
            s.entries[0].action,
            ScheduleAction::SetParam {
                name: ParamName::SensorAngle,
                value: 15.0
            }
        );
        assert_eq!(serde_json::to_string(&s).unwrap(), text);
    }

    #[test]
    fn rejects_bad_entries() {
        for bad in [
            r#"[{"step":1,"action":"warp","value":1}]"#,
            r#"[{"step":1,"action":"SA"}]"#,
            r#"[{"step":1,"action":"enable_node","value":1.5}]"#,
            r#"[{"step":1,"action":"begin_reduction","value":1}]"#,
            r#"[{"step":1,"action":"SA","value":1,"extra":2}]"#,
        ] {
            assert!(serde_json::from_str::<Schedule>(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn validation() {
        let p = SimulationParams::default();
        let nodes = vec![NodeSource::new(0, 50, 50, 2, 0.05)];
        let sa = |v| ScheduleAction::SetParam {
            name: ParamName::SensorAngle,
            value: v,
        };
        let ok = Schedule::default().at(5, sa(45.0)).at(5, sa(15.0)).at(9, sa(45.0));
        assert!(ok.validate(&p, &nodes, MethodKind::FreeRun).is_ok());

        let err = Schedule::default().at(5, sa(15.0)).at(7, sa(400.0)).validate(&p, &nodes, MethodKind::FreeRun);
        assert_eq!(err.unwrap_err().field, "[1].value");

        let backwards = Schedule::default().at(5, sa(15.0)).at(4, sa(45.0));
        assert!(backwards.validate(&p, &nodes, MethodKind::FreeRun).is_err());

        let missing = Schedule::default().at(1, ScheduleAction::SetNodeEnabled { id: 3, enabled: false });
        assert!(missing.validate(&p, &nodes, MethodKind::FreeRun).is_err());

        let reduce = Schedule::default().at(1, ScheduleAction::BeginReduction);
        assert!(reduce.validate(&p, &nodes, MethodKind::FilamentousShrinkage).is_err());
        assert!(reduce.validate(&p, &nodes, MethodKind::PlasmodialShrinkage).is_ok());
    }
}
