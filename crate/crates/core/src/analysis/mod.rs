//! Measurements on trail fields: masks, topology, skeletons, junction
//! angles and exact reference lengths for small node sets.

pub mod junction;
pub mod mask;
pub mod metrics;
pub mod oracle;
pub mod skeleton;
pub mod topology;

pub use junction::{junction_angles, DEFAULT_WINDOW_RADIUS};
pub use mask::{threshold_mask, BinaryMask};
pub use metrics::{
    blob_circularity, measure_state, measure_trail, occupancy_mask, top_decile_mass_share,
    AnalysisConfig, NetworkMetrics,
};
pub use oracle::{mst_length, node_points, steiner_length_oracle, SteinerEstimate};
pub use skeleton::{prune_spurs, skeleton_length, skeletonize, Skeleton};
pub use topology::{components_and_cycles, euler_characteristic, label_components, nodes_connected};
