// Copyright 2026 The iqc Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IqcError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("qubit {qubit} out of range for n = {n}")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("invalid neighbor configuration {config} for qubit {qubit}")]
    InvalidConfig { qubit: usize, config: String },
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("non-finite pulse parameter: {0}")]
    NonFinite(&'static str),
    #[error("angle set undefined for k_rho = {k_rho}, rho = {rho}")]
    AngleDomain { k_rho: u32, rho: f64 },
    #[error("schedule is not contiguous at pulse {index}: expected t = {expected}, found {found}")]
    ScheduleGap { index: usize, expected: f64, found: f64 },
    #[error("calibration failed for {what}: residual {residual:.3e}")]
    Calibration { what: String, residual: f64 },
    #[error("pulse count mismatch for {algo} n = {n}: compiled {compiled}, closed form {expected}")]
    CountMismatch { algo: String, n: usize, compiled: usize, expected: usize },
    #[error("matrix logarithm near branch cut (eigenphase {0:.6})")]
    BranchCut(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("insertion plan does not match schedule: {0}")]
    PlanMismatch(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("linear algebra failure: {0}")]
    Linalg(String),
    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, IqcError>;
