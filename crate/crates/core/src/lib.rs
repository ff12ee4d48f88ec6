//! Agent-based simulation of emergent transport networks.
//!
//! Particle agents carrying three forward chemosensors deposit trail on a
//! lattice and steer towards stronger trail, while the field diffuses and
//! decays. The resulting networks contract like minimal surfaces and, when
//! small disc-shaped node sources inject trail, snag on the nodes and
//! approximate short connecting networks.

pub mod analysis;
pub mod command;
pub mod error;
pub mod io;
pub mod model;
pub mod scenario;

pub use error::{ConfigError, Error, Result};
