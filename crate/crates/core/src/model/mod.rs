//! The agent/trail engine.

pub mod agent;
pub mod node;
pub mod params;
pub mod state;
pub mod trail;

pub use agent::{attempt_move, decide_heading, read_sensors, sense, Agent, SensorReading};
pub use node::{inject_nodes, NodeSource, DEFAULT_NODE_RADIUS};
pub use params::{Boundary, SimulationParams};
pub use state::{InitMode, SimRng, SimulationState};
pub use trail::TrailField;
