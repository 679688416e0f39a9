// Copyright 2026 The iqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Abstract gates and the QFT/IQFT gate lists.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{IqcError, Result};

/// A logical gate. Two-qubit gates may act on distant qubits; the compiler
/// routes them through adjacent swaps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum GateSpec {
    /// Hadamard.
    A {
        j: usize,
    },
    /// `diag(1, 1, 1, e^{iπ/2^{|j−i|}})` on qubits `i, j`.
    B {
        i: usize,
        j: usize,
    },
    /// `σ_z`.
    Z {
        j: usize,
    },
    /// NOT.
    N {
        j: usize,
    },
    /// Controlled NOT with control `c` and target `t`.
    CN {
        c: usize,
        t: usize,
    },
    /// `|a_i b_j⟩ → (−1)^b |a_i, b ⊕ ā⟩`.
    R {
        i: usize,
        j: usize,
    },
    Rdag {
        i: usize,
        j: usize,
    },
    /// Swap.
    S {
        i: usize,
        j: usize,
    },
    /// `R†_ij B_ij`.
    G {
        i: usize,
        j: usize,
    },
    /// Full bit reversal.
    T,
}

impl GateSpec {
    /// Qubits the gate acts on (empty for `T`, which acts on all).
    pub fn qubits(&self) -> Vec<usize> {
        use GateSpec::*;
        match *self {
            A { j } | Z { j } | N { j } => vec![j],
            B { i, j } | R { i, j } | Rdag { i, j } | S { i, j } | G { i, j } => vec![i, j],
            CN { c, t } => vec![c, t],
            T => vec![],
        }
    }

    /// Controlled-phase angle `π/2^{|j−i|}` of `B` and `G`.
    pub fn phase(&self) -> Option<f64> {
        match *self {
            GateSpec::B { i, j } | GateSpec::G { i, j } => Some(b_phase(i, j)),
            _ => None,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let q = self.qubits();
        if let Some(&bad) = q.iter().find(|&&x| x >= n) {
            return Err(IqcError::QubitOutOfRange { qubit: bad, n });
        }
        if q.len() == 2 && q[0] == q[1] {
            return Err(IqcError::InvalidGate(format!("{self} acts twice on qubit {}", q[0])));
        }
        Ok(())
    }
}

pub fn b_phase(i: usize, j: usize) -> f64 {
    PI / (1u64 << i.abs_diff(j)) as f64
}

impl fmt::Display for GateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use GateSpec::*;
        match *self {
            A { j } => write!(f, "A{j}"),
            Z { j } => write!(f, "Z{j}"),
            N { j } => write!(f, "N{j}"),
            B { i, j } => write!(f, "B{i},{j}"),
            CN { c, t } => write!(f, "CN{c},{t}"),
            R { i, j } => write!(f, "R{i},{j}"),
            Rdag { i, j } => write!(f, "Rdag{i},{j}"),
            S { i, j } => write!(f, "S{i},{j}"),
            G { i, j } => write!(f, "G{i},{j}"),
            T => write!(f, "T"),
        }
    }
}

impl FromStr for GateSpec {
    type Err = IqcError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || IqcError::InvalidGate(s.to_string());
        let split = s.find(|c: char| c.is_ascii_digit()).unwrap_or(s.len());
        let (name, rest) = s.split_at(split);
        let idx: Vec<usize> = if rest.is_empty() {
            vec![]
        } else {
            rest.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?
        };
        use GateSpec::*;
        Ok(match (name, idx.as_slice()) {
            ("A", &[j]) => A { j },
            ("Z", &[j]) => Z { j },
            ("N", &[j]) => N { j },
            ("B", &[i, j]) => B { i, j },
            ("CN", &[c, t]) => CN { c, t },
            ("R", &[i, j]) => R { i, j },
            ("Rdag", &[i, j]) => Rdag { i, j },
            ("S", &[i, j]) => S { i, j },
            ("G", &[i, j]) => G { i, j },
            ("T", &[]) => T,
            _ => return Err(bad()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Qft,
    Iqft,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Qft => "qft",
            Algorithm::Iqft => "iqft",
        })
    }
}

impl FromStr for Algorithm {
    type Err = IqcError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qft" => Ok(Algorithm::Qft),
            "iqft" => Ok(Algorithm::Iqft),
            _ => Err(IqcError::InvalidParams(format!("unknown algorithm {s}"))),
        }
    }
}

/// Gate list in time order.
pub fn algorithm_gates(algo: Algorithm, n: usize) -> Vec<GateSpec> {
    let mut out = Vec::new();
    for i in 0..n {
        out.push(GateSpec::A { j: i });
        match algo {
            Algorithm::Qft => out.extend((i + 1..n).map(|j| GateSpec::B { i, j })),
            Algorithm::Iqft => {
                out.extend((i + 1..n).map(|j| GateSpec::G { i, j }));
                out.extend((i + 1..n).map(|j| GateSpec::R { i, j }));
            }
        }
    }
    out.push(GateSpec::T);
    out
}

/// Closed-form raw pulse counts.
pub fn closed_form_pulse_count(algo: Algorithm, n: usize) -> i64 {
    let n = n as i64;
    match algo {
        Algorithm::Qft => 18 * n.pow(3) - 16 * n * n - 49 * n + 57,
        Algorithm::Iqft => 54 * n.pow(3) - 86 * n * n - 105 * n + 191,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_counts_follow_closed_forms() {
        for n in 2..12 {
            assert_eq!(algorithm_gates(Algorithm::Qft, n).len(), n * (n + 1) / 2 + 1);
            assert_eq!(algorithm_gates(Algorithm::Iqft, n).len(), n * n + 1);
        }
        assert_eq!(closed_form_pulse_count(Algorithm::Iqft, 10), 44541);
        assert_eq!(closed_form_pulse_count(Algorithm::Qft, 2), 39);
        assert_eq!(closed_form_pulse_count(Algorithm::Qft, 4), 757);
    }

    #[test]
    fn gate_names_round_trip() {
        for g in algorithm_gates(Algorithm::Iqft, 4) {
            assert_eq!(g.to_string().parse::<GateSpec>().unwrap(), g);
        }
        assert_eq!("CN2,1".parse::<GateSpec>().unwrap(), GateSpec::CN { c: 2, t: 1 });
        assert!("Q1".parse::<GateSpec>().is_err());
    }
}
