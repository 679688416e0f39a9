// Copyright 2026 The iqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Experiment configuration: a `key = value` text file overlaid by flags.
//!
//! Recognized keys, with defaults:
//!
//! ```text
//! algo         = qft        # qft | iqft
//! n            = 4          # qubits
//! a            = 1000       # field gradient, units of J
//! k            = 1024       # 2πk pulse parameter
//! delta        = 0          # GUE strength
//! errors       = intrinsic  # intrinsic | gue-gate | gue-gate-lab | gue-pulse | gue-pulse-lab | combined
//! realizations = 100        # GUE draws per point
//! states       = 0          # random states per run; 0 means exact Haar average
//! seed         = 1          # root seed
//! sweep        = k          # scan axis: k | a | n | delta
//! values       =            # comma-separated scan values or contour abscissae
//! f0           = 0.9        # contour fidelity
//! plane        = ka-delta   # contour axes: ka-delta | delta-n | ka-n
//! schedule     =            # compiled schedule JSON to use instead of algo
//! ```
//!
//! Lines starting with `#` and blank lines are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use iqc::analysis::ContourPlane;
use iqc::experiment::child_seeds;
use iqc::Algorithm;
use sha2::{Digest, Sha256};

use crate::UsageError;

const DEFAULTS: &[(&str, &str)] = &[
    ("algo", "qft"),
    ("n", "4"),
    ("a", "1000"),
    ("k", "1024"),
    ("delta", "0"),
    ("errors", "intrinsic"),
    ("realizations", "100"),
    ("states", "0"),
    ("seed", "1"),
    ("sweep", "k"),
    ("values", ""),
    ("f0", "0.9"),
    ("plane", "ka-delta"),
    ("schedule", ""),
];

/// Which error sources a simulation includes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Errors {
    Intrinsic,
    GueGate,
    GueGateLab,
    GuePulse,
    GuePulseLab,
    Combined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    K,
    A,
    N,
    Delta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    KaDelta,
    DeltaN,
    KaN,
}

/// Raw keys plus their typed view.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    raw: BTreeMap<String, String>,
    pub algo: Algorithm,
    pub n: usize,
    pub a: f64,
    pub k: u32,
    pub delta: f64,
    pub errors: Errors,
    pub realizations: usize,
    pub states: usize,
    pub seed: u64,
    pub sweep: Sweep,
    pub values: Vec<f64>,
    pub f0: f64,
    pub plane: Plane,
    pub schedule: Option<String>,
}

fn parse<T: std::str::FromStr>(raw: &BTreeMap<String, String>, key: &str) -> Result<T, UsageError> {
    let v = &raw[key];
    v.parse().map_err(|_| UsageError(format!("bad value for {key}: {v:?}")))
}

impl ExperimentConfig {
    /// Defaults, then the file at `path`, then `overrides`.
    pub fn load(path: Option<&Path>, overrides: &[(&str, Option<String>)]) -> Result<Self, UsageError> {
        let mut raw: BTreeMap<String, String> = DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| UsageError(format!("{}:{}: expected key = value", path.display(), lineno + 1)))?;
                // values may carry a trailing comment
                let value = value.split('#').next().unwrap_or("").trim();
                set(&mut raw, key.trim(), value)?;
            }
        }
        for (key, value) in overrides {
            if let Some(v) = value {
                set(&mut raw, key, v)?;
            }
        }
        Self::from_raw(raw)
    }

    fn from_raw(raw: BTreeMap<String, String>) -> Result<Self, UsageError> {
        let algo = raw["algo"].parse::<Algorithm>().map_err(|e| UsageError(e.to_string()))?;
        let errors = match raw["errors"].as_str() {
            "intrinsic" => Errors::Intrinsic,
            "gue-gate" => Errors::GueGate,
            "gue-gate-lab" => Errors::GueGateLab,
            "gue-pulse" => Errors::GuePulse,
            "gue-pulse-lab" => Errors::GuePulseLab,
            "combined" => Errors::Combined,
            e => return Err(UsageError(format!("unknown errors mode {e:?}"))),
        };
        let sweep = match raw["sweep"].as_str() {
            "k" => Sweep::K,
            "a" => Sweep::A,
            "n" => Sweep::N,
            "delta" => Sweep::Delta,
            s => return Err(UsageError(format!("unknown sweep axis {s:?}"))),
        };
        let plane = match raw["plane"].as_str() {
            "ka-delta" => Plane::KaDelta,
            "delta-n" => Plane::DeltaN,
            "ka-n" => Plane::KaN,
            p => return Err(UsageError(format!("unknown contour plane {p:?}"))),
        };
        let values = raw["values"]
            .split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(|v| v.parse::<f64>().map_err(|_| UsageError(format!("bad entry in values: {v:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let cfg = Self {
            algo,
            n: parse(&raw, "n")?,
            a: parse(&raw, "a")?,
            k: parse(&raw, "k")?,
            delta: parse(&raw, "delta")?,
            errors,
            realizations: parse(&raw, "realizations")?,
            states: parse(&raw, "states")?,
            seed: parse(&raw, "seed")?,
            sweep,
            values,
            f0: parse(&raw, "f0")?,
            plane,
            schedule: Some(raw["schedule"].clone()).filter(|s| !s.is_empty()),
            raw,
        };
        if cfg.n < 2 {
            return Err(UsageError(format!("n must be at least 2, got {}", cfg.n)));
        }
        if !(cfg.a.is_finite() && cfg.a > 0.0) || cfg.k == 0 {
            return Err(UsageError("a and k must be positive".into()));
        }
        if !(cfg.delta.is_finite() && cfg.delta >= 0.0) {
            return Err(UsageError(format!("delta must be non-negative, got {}", cfg.delta)));
        }
        if !(cfg.f0 > 0.0 && cfg.f0 < 1.0) {
            return Err(UsageError(format!("f0 must lie in (0, 1), got {}", cfg.f0)));
        }
        if cfg.realizations == 0 {
            return Err(UsageError("realizations must be at least 1".into()));
        }
        Ok(cfg)
    }

    /// The same config with one key replaced.
    pub fn with(&self, key: &str, value: &str) -> Result<Self, UsageError> {
        let mut raw = self.raw.clone();
        set(&mut raw, key, value)?;
        Self::from_raw(raw)
    }

    /// `key = value` lines in key order; this text is what gets hashed.
    pub fn canonical(&self) -> String {
        self.raw.iter().fold(String::new(), |mut s, (k, v)| {
            let _ = writeln!(s, "{k} = {v}");
            s
        })
    }

    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes()).iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    /// Child seeds of the GUE realizations.
    pub fn realization_seeds(&self) -> Vec<u64> {
        child_seeds(self.seed, self.realizations)
    }

    pub fn ka(&self) -> f64 {
        self.k as f64 * self.a
    }

    pub fn contour_plane(&self) -> ContourPlane {
        match self.plane {
            Plane::KaDelta => ContourPlane::KaDelta { n: self.n },
            Plane::DeltaN => ContourPlane::DeltaN { ka: self.ka() },
            Plane::KaN => ContourPlane::KaN { delta: self.delta },
        }
    }
}

fn set(raw: &mut BTreeMap<String, String>, key: &str, value: &str) -> Result<(), UsageError> {
    match raw.get_mut(key) {
        Some(slot) => {
            *slot = value.to_string();
            Ok(())
        }
        None => Err(UsageError(format!("unknown config key {key:?}"))),
    }
}
