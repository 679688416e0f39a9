// Copyright 2026 The iqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Pulse-level simulator of an Ising-chain quantum computer.

pub mod analysis;
pub mod chain;
pub mod clock;
pub mod compiler;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod gates;
pub mod gue;
pub mod ideal;
pub mod linalg;
pub mod phases;
pub mod qpulse;
pub mod schedule;

pub use chain::{ChainParams, StateVector, J};
pub use clock::Clock;
pub use error::{IqcError, Result};
pub use gates::{Algorithm, GateSpec};
