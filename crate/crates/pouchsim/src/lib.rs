//! Desk-scale simulator and analysis pipeline for multi-cell fabric pneumatic
//! actuators that abduct/adduct a modeled infant arm.
//!
//! The crate is organized around five subsystems:
//!
//! - [`actuator`] / [`kinematics`] / [`screening`]: the parameterized pouch
//!   actuator family, inflation geometry, virtual-work torque, membrane
//!   stress, and the 20-variant design-space screen.
//! - [`pneumatics`]: the off-body control board (PWM-scaled pump flow, valve
//!   routing, pressure evolution, automatic cutoff).
//! - [`rig`]: the infant-scale arm on an abduction-constrained joint, trial
//!   simulation with seeded variability, and rig calibration.
//! - [`metrics`] / [`stats`] / [`special`]: filtering, spectral-arc-length
//!   smoothness, path length, coefficient of variation, two-way ANOVA,
//!   Tukey HSD, and the special functions they need.
//! - [`battery`] / [`report`] / [`ingest`] / [`config`]: the reproducible
//!   trial battery, report emission, and CSV ingestion used by the CLI.

pub mod actuator;
pub mod battery;
pub mod config;
pub mod error;
pub mod exec;
pub mod ingest;
pub mod kinematics;
pub mod materials;
pub mod metrics;
pub mod pneumatics;
pub mod report;
pub mod rig;
pub mod screening;
pub mod special;
pub mod stats;

pub use actuator::{ActuatorDesign, PouchSection};
pub use error::Error;
pub use materials::FabricMaterial;
pub use pneumatics::{PhaseSchedule, PneumaticConfig, PneumaticState, PumpConfig, ValveMode};
pub use rig::{ArmModel, NoiseModel, Trajectory, TrialRecord};
pub use screening::{ScreenTargets, ScreeningResult};

/// Pascals per psi.
pub const PSI: f64 = 6894.757293168361;

/// Standard gravity, m/s^2.
pub const GRAVITY: f64 = 9.80665;
