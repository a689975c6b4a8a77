//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("kinematic saturation: pouch thickness {thickness:.4} m >= 2*contact distance {contact:.4} m")]
    Saturated { thickness: f64, contact: f64 },

    #[error("torque singularity: d(theta)/d(theta_a) vanished at theta_a = {0}")]
    TorqueSingularity(f64),

    #[error("integrator diverged at t = {time:.3} s (|theta| = {theta:.3} rad)")]
    Diverged { time: f64, theta: f64 },

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("numerical convergence failure in {0}")]
    Convergence(&'static str),

    #[error("schema violation at row {row}, column {column}: {message}")]
    Schema {
        row: usize,
        column: String,
        message: String,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
