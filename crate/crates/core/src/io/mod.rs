//! Scenario files, PGM frames, metrics CSV and command logs.

mod command_log;
mod frame;
mod metrics_csv;
mod scenario_file;

pub use command_log::{append_logged, load_command_log, read_command_log, write_command_log};
pub use frame::{parse_pgm, quantise_trail, read_pgm, write_agent_overlay, write_frame, write_pgm};
pub use metrics_csv::{read_metrics, sig6, MetricsWriter, METRICS_COLUMNS};
pub use scenario_file::{load_scenario, parse_scenario, scenario_to_json, NodeSpec, ScenarioFile};
