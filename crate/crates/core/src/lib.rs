//! Tile-decomposed, parallel 2D relativistic electromagnetic particle-in-cell.
//!
//! Fields live on a staggered Yee grid; particles are kept sorted by tile so
//! each tile can be pushed and deposited independently.

pub mod config;
pub mod deck;
pub mod deposit;
pub mod engine;
pub mod error;
pub mod fields;
pub mod grid;
pub mod particle;
pub mod pusher;
pub mod reference;
pub mod report;
pub mod tiling;
pub mod vec3;

pub use config::{courant_limit, validate_config, SimConfig, SpeciesSpec};
pub use engine::{run, EngineOptions, MergeMode, ReportKind, ReportSink, SimState};
pub use error::{Error, Result};
pub use grid::Grid2;
pub use particle::Particle;
pub use report::GridReport;
pub use vec3::Vec3;
