// Copyright 2026 The iqc Authors
// SPDX-License-Identifier: Apache-2.0

//! GUE perturbations and where they are inserted into a schedule.

use std::sync::Arc;

use faer::{Mat, Side};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::clock::Clock;
use crate::dynamics::free_phases;
use crate::error::{IqcError, Result};
use crate::gates::GateSpec;
use crate::linalg::{adjoint, mul, CMat};
use crate::schedule::PulseSchedule;

/// Hermitian `V` normalized to `Tr(V²)/dim = 1`, with its eigendecomposition.
#[derive(Debug, Clone)]
pub struct GuePerturbation {
    pub v: CMat,
    pub seed: u64,
    eigvals: Vec<f64>,
    eigvecs: CMat,
}

/// Draws a GUE matrix: real Gaussian diagonal, complex Gaussian upper
/// triangle mirrored to keep `V† = V`, rescaled to unit second moment.
pub fn sample_gue(dim: usize, seed: u64) -> Result<GuePerturbation> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut v = CMat::zeros(dim, dim);
    for i in 0..dim {
        let d: f64 = StandardNormal.sample(&mut rng);
        v[(i, i)] = Complex64::new(d, 0.0);
        for j in i + 1..dim {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let z = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
            v[(i, j)] = z;
            v[(j, i)] = z.conj();
        }
    }
    let second: f64 = (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j))).map(|(i, j)| v[(i, j)].norm_sqr()).sum();
    let s = (dim as f64 / second).sqrt();
    for i in 0..dim {
        for j in 0..dim {
            v[(i, j)] *= s;
        }
    }
    GuePerturbation::from_hermitian(v, seed)
}

impl GuePerturbation {
    pub fn from_hermitian(v: CMat, seed: u64) -> Result<Self> {
        let eig = v.self_adjoint_eigen(Side::Lower).map_err(|e| IqcError::Linalg(format!("{e:?}")))?;
        let eigvals = (0..v.nrows()).map(|i| eig.S()[i].re).collect();
        let eigvecs = eig.U().to_owned();
        Ok(Self { v, seed, eigvals, eigvecs })
    }

    pub fn dim(&self) -> usize {
        self.v.nrows()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigvals
    }

    /// `exp(−iδV)`.
    pub fn exp_minus_i(&self, delta: f64) -> CMat {
        let d = self.dim();
        let q = &self.eigvecs;
        let scaled = Mat::from_fn(d, d, |i, k| q[(i, k)] * Complex64::from_polar(1.0, -delta * self.eigvals[k]));
        mul(&scaled, &adjoint(q))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    AfterEachGate,
    AfterEachPulse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InsertionFrame {
    /// The same `V` in the interaction frame at every insertion.
    InteractionStatic,
    /// `V` static in the lab frame, seen as `W†(t) V W(t)` in the interaction frame.
    LabStatic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InsertionPlan {
    pub placement: Placement,
    pub frame: InsertionFrame,
}

/// Insertion position: after pulse index `after_pulse − 1`, at absolute time `time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InsertionPoint {
    pub after_pulse: usize,
    pub time: Clock,
}

/// Insertion points of a plan. Per-gate mode skips a final `T` gate.
pub fn insertion_points(plan: &InsertionPlan, s: &PulseSchedule) -> Result<Vec<InsertionPoint>> {
    match plan.placement {
        Placement::AfterEachGate => {
            if s.gates.is_empty() && !s.pulses.is_empty() {
                return Err(IqcError::PlanMismatch("per-gate plan needs gate markers".into()));
            }
            let skip_last = s.gates.last().is_some_and(|g| g.gate == GateSpec::T);
            let count = s.gates.len() - skip_last as usize;
            Ok(s.gates[..count]
                .iter()
                .map(|g| InsertionPoint { after_pulse: g.pulse_end, time: end_of(s, g.pulse_end) })
                .collect())
        }
        Placement::AfterEachPulse => {
            Ok((1..=s.pulses.len()).map(|m| InsertionPoint { after_pulse: m, time: end_of(s, m) }).collect())
        }
    }
}

fn end_of(s: &PulseSchedule, after: usize) -> Clock {
    if after == 0 {
        Clock::ZERO
    } else {
        s.pulses[after - 1].end()
    }
}

/// One insertion, kept factored so per-pulse plans stay cheap.
#[derive(Debug, Clone)]
pub enum InsertionOp {
    Static(Arc<CMat>),
    /// `diag(w)† · E · diag(w)` with `E = exp(−iδV)` and `w = W(t)`.
    Lab {
        e: Arc<CMat>,
        w: Vec<Complex64>,
    },
}

impl InsertionOp {
    pub fn to_matrix(&self) -> CMat {
        match self {
            InsertionOp::Static(e) => (**e).clone(),
            InsertionOp::Lab { e, w } => Mat::from_fn(e.nrows(), e.ncols(), |i, j| w[i].conj() * e[(i, j)] * w[j]),
        }
    }

    /// `X ← op · X`.
    pub fn apply(&self, x: &mut CMat) {
        match self {
            InsertionOp::Static(e) => *x = mul(e, x),
            InsertionOp::Lab { e, w } => {
                for j in 0..x.ncols() {
                    for i in 0..x.nrows() {
                        x[(i, j)] *= w[i];
                    }
                }
                *x = mul(e, x);
                for j in 0..x.ncols() {
                    for i in 0..x.nrows() {
                        x[(i, j)] *= w[i].conj();
                    }
                }
            }
        }
    }
}

/// Insertion unitaries for `plan` on schedule `s`.
pub fn insertion_unitaries(
    plan: &InsertionPlan,
    v: &GuePerturbation,
    delta: f64,
    s: &PulseSchedule,
) -> Result<Vec<(InsertionPoint, InsertionOp)>> {
    if v.dim() != s.params.dim() {
        return Err(IqcError::PlanMismatch(format!("V has dim {} but the register has {}", v.dim(), s.params.dim())));
    }
    let e = Arc::new(v.exp_minus_i(delta));
    let h0 = s.params.static_hamiltonian_diagonal();
    Ok(insertion_points(plan, s)?
        .into_iter()
        .map(|pt| {
            let op = match plan.frame {
                InsertionFrame::InteractionStatic => InsertionOp::Static(e.clone()),
                InsertionFrame::LabStatic => InsertionOp::Lab { e: e.clone(), w: free_phases(&h0, pt.time) },
            };
            (pt, op)
        })
        .collect())
}

/// `Σ_j U†(j) V U(j)` with `U(j) = U_j ⋯ U_1` the prefix products of the
/// gate's pulses: the first-order generator obtained by moving per-pulse
/// insertions to the start of the gate.
pub fn effective_gate_perturbation(pulse_unitaries: &[CMat], v: &CMat) -> CMat {
    let d = v.nrows();
    let mut acc = CMat::zeros(d, d);
    let mut prefix = CMat::identity(d, d);
    for u in pulse_unitaries {
        prefix = mul(u, &prefix);
        let t = mul(&adjoint(&prefix), &mul(v, &prefix));
        acc += &t;
    }
    acc
}

/// Semicircle CDF for a GUE with unit second moment (radius 2).
pub fn semicircle_cdf(x: f64) -> f64 {
    let x = x.clamp(-2.0, 2.0);
    0.5 + (x * (4.0 - x * x).sqrt() / 2.0 + 2.0 * (x / 2.0).asin()) / (2.0 * std::f64::consts::PI)
}
