// Copyright 2026 The iqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Exact pulse propagation under the driven Ising-chain Hamiltonian.
//!
//! In the frame co-rotating at `ν` for every spin the single-pulse Hamiltonian
//! is time independent and real symmetric at `φ = 0`:
//! `H_rot = H0 − νN − (Ω/2)Σ_l(|1⟩⟨0|_l + h.c.)` with `N = Σ_l |1⟩⟨1|_l`.
//! A phase `φ` conjugates it by `e^{−iφN}`, so one eigendecomposition per
//! `(ν, Ω, τ)` serves every phase and start time:
//! `U_lab = e^{−i(νt1+φ)N} e^{−iH_rot τ} e^{i(νt0+φ)N}`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{excitations, ChainParams, StateVector};
use crate::clock::Clock;
use crate::error::{IqcError, Result};
use crate::qpulse::NeighborConfig;

/// One rectangular circularly polarized pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub nu: f64,
    pub omega: f64,
    pub phi: f64,
    pub tau: f64,
    pub t_start: f64,
    /// Low word of the double-double start time.
    #[serde(default)]
    pub t_start_lo: f64,
}

impl Pulse {
    pub fn start(&self) -> Clock {
        Clock { hi: self.t_start, lo: self.t_start_lo }
    }

    pub fn end(&self) -> Clock {
        self.start().advanced(self.tau)
    }

    fn validate(&self) -> Result<()> {
        for (v, name) in
            [(self.nu, "nu"), (self.omega, "omega"), (self.phi, "phi"), (self.tau, "tau"), (self.t_start, "t_start")]
        {
            if !v.is_finite() {
                return Err(IqcError::NonFinite(name));
            }
        }
        if self.tau < 0.0 || self.omega < 0.0 {
            return Err(IqcError::InvalidParams("omega and tau must be non-negative".into()));
        }
        Ok(())
    }
}

/// Two-level probability of an unwanted transition with detuning `Δ`.
pub fn two_level_transition_probability(omega: f64, delta: f64, rho: f64) -> f64 {
    let r2 = omega * omega + delta * delta;
    if r2 == 0.0 {
        return 0.0;
    }
    let x = rho * 0.5 * PI * (1.0 + delta * delta / (omega * omega)).sqrt();
    omega * omega / r2 * x.sin().powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransitionKind {
    Resonant,
    NearResonant,
    NonResonant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionClass {
    pub kind: TransitionKind,
    pub delta: f64,
}

/// Detuning and class of the flip of `qubit` (with neighbor configuration
/// `config`) under `pulse`.
pub fn classify_transition(
    pulse: &Pulse,
    qubit: usize,
    config: NeighborConfig,
    p: &ChainParams,
) -> Result<TransitionClass> {
    config.check(qubit, p.n)?;
    let w = p.larmor_frequency(qubit)?;
    let s: i64 = match config {
        NeighborConfig::Pair(a, c) => (1 - 2 * a as i64) + (1 - 2 * c as i64),
        NeighborConfig::Single(a) => 1 - 2 * a as i64,
    };
    let delta = pulse.nu - (w + crate::chain::J * s as f64);
    let scale = 1e-9 * pulse.nu.abs().max(1.0);
    let kind = if delta.abs() <= scale {
        TransitionKind::Resonant
    } else if delta.abs() < 0.5 * p.a {
        TransitionKind::NearResonant
    } else {
        TransitionKind::NonResonant
    };
    Ok(TransitionClass { kind, delta })
}

/// `e^{−i H' τ}` of the shifted rotating-frame Hamiltonian `H' = H_rot(0) − c`.
#[derive(Debug)]
pub struct RotatingPropagator {
    pub e: Mat<Complex64>,
    /// Diagonal of `H'`.
    pub h: Vec<f64>,
    pub shift: f64,
}

type Key = (u64, u64, u64);

/// Eigendecomposition cache keyed on the `(ν, Ω, τ)` triple.
#[derive(Debug)]
pub struct PropagatorCache {
    params: ChainParams,
    h0: Vec<f64>,
    map: RwLock<HashMap<Key, Arc<RotatingPropagator>>>,
}

impl PropagatorCache {
    pub fn new(params: &ChainParams) -> Self {
        Self { h0: params.static_hamiltonian_diagonal(), params: params.clone(), map: RwLock::new(HashMap::new()) }
    }

    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn h0(&self) -> &[f64] {
        &self.h0
    }

    pub fn len(&self) -> usize {
        self.map.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, nu: f64, omega: f64, tau: f64) -> Arc<RotatingPropagator> {
        let key = (nu.to_bits(), omega.to_bits(), tau.to_bits());
        if let Some(v) = self.map.read().unwrap().get(&key) {
            return v.clone();
        }
        let v = Arc::new(self.compute(nu, omega, tau));
        self.map.write().unwrap().entry(key).or_insert(v).clone()
    }

    fn compute(&self, nu: f64, omega: f64, tau: f64) -> RotatingPropagator {
        let d = self.params.dim();
        let n = self.params.n;
        let raw: Vec<f64> = (0..d).map(|b| self.h0[b] - nu * excitations(b) as f64).collect();
        let lo = raw.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let shift = (0.5 * (lo + hi)).round();
        let h: Vec<f64> = raw.iter().map(|x| x - shift).collect();
        let mut hm = Mat::<f64>::zeros(d, d);
        for b in 0..d {
            hm[(b, b)] = h[b];
            for l in 0..n {
                if (b >> l) & 1 == 0 {
                    let c = b | (1 << l);
                    hm[(c, b)] = -0.5 * omega;
                    hm[(b, c)] = -0.5 * omega;
                }
            }
        }
        let e =
            if omega == 0.0 {
                Mat::from_fn(d, d, |i, j| {
                    if i == j {
                        Complex64::from_polar(1.0, -h[i] * tau)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
            } else {
                let eig = hm.self_adjoint_eigen(Side::Lower).expect("symmetric eigensolver");
                let u = eig.U();
                let s = eig.S();
                let mut uc = Mat::<f64>::zeros(d, d);
                let mut us = Mat::<f64>::zeros(d, d);
                for k in 0..d {
                    let (sn, cs) = (s[k] * tau).sin_cos();
                    for i in 0..d {
                        uc[(i, k)] = u[(i, k)] * cs;
                        us[(i, k)] = u[(i, k)] * sn;
                    }
                }
                let mut re = Mat::<f64>::zeros(d, d);
                let mut im = Mat::<f64>::zeros(d, d);
                matmul(re.as_mut(), Accum::Replace, uc.as_ref(), u.transpose(), 1.0, Par::Seq);
                matmul(im.as_mut(), Accum::Replace, us.as_ref(), u.transpose(), -1.0, Par::Seq);
                Mat::from_fn(d, d, |i, j| Complex64::new(re[(i, j)], im[(i, j)]))
            };
        RotatingPropagator { e, h, shift }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    Lab,
    Interaction,
}

/// A pulse propagator factored as `diag(left) · E · diag(right)`.
#[derive(Debug, Clone)]
pub struct PulseOp {
    pub left: Vec<Complex64>,
    pub e: Arc<RotatingPropagator>,
    pub right: Vec<Complex64>,
}

impl PulseOp {
    /// Propagator over `[t0, t0+τ]` using `t0` in place of `pulse.t_start`.
    pub fn at(cache: &PropagatorCache, pulse: &Pulse, t0: Clock, frame: Frame) -> Result<Self> {
        pulse.validate()?;
        let rot = cache.get(pulse.nu, pulse.omega, pulse.tau);
        let t1 = t0.advanced(pulse.tau);
        let d = rot.h.len();
        let (left, right) = match frame {
            Frame::Interaction => {
                // W†(t1) U_lab W(t0): diagonal phases e^{±i(h_b t − φ n_b)}
                let mut left = Vec::with_capacity(d);
                let mut right = Vec::with_capacity(d);
                let mut phase_cache: HashMap<u64, (f64, f64)> = HashMap::new();
                for b in 0..d {
                    let hb = rot.h[b];
                    let (p1, p0) = *phase_cache.entry(hb.to_bits()).or_insert_with(|| (t1.phase(hb), t0.phase(hb)));
                    let nphi = pulse.phi * excitations(b) as f64;
                    left.push(Complex64::from_polar(1.0, p1 - nphi));
                    right.push(Complex64::from_polar(1.0, nphi - p0));
                }
                (left, right)
            }
            Frame::Lab => {
                let g = Complex64::from_polar(1.0, -Clock::from_f64(pulse.tau).phase(rot.shift));
                let a1 = t1.phase(pulse.nu) + pulse.phi;
                let a0 = t0.phase(pulse.nu) + pulse.phi;
                let left = (0..d).map(|b| g * Complex64::from_polar(1.0, -a1 * excitations(b) as f64));
                let right = (0..d).map(|b| Complex64::from_polar(1.0, a0 * excitations(b) as f64));
                (left.collect(), right.collect())
            }
        };
        Ok(Self { left, e: rot, right })
    }

    pub fn new(cache: &PropagatorCache, pulse: &Pulse, frame: Frame) -> Result<Self> {
        Self::at(cache, pulse, pulse.start(), frame)
    }

    /// `X ← diag(left) E diag(right) X`, column by column.
    pub fn apply(&self, x: &mut Mat<Complex64>, scratch: &mut Mat<Complex64>) {
        let d = self.left.len();
        let m = x.ncols();
        for j in 0..m {
            for i in 0..d {
                x[(i, j)] *= self.right[i];
            }
        }
        if scratch.nrows() != d || scratch.ncols() != m {
            *scratch = Mat::zeros(d, m);
        }
        matmul(scratch.as_mut(), Accum::Replace, self.e.e.as_ref(), x.as_ref(), Complex64::new(1.0, 0.0), Par::Seq);
        for j in 0..m {
            for i in 0..d {
                x[(i, j)] = self.left[i] * scratch[(i, j)];
            }
        }
    }

    pub fn to_matrix(&self) -> Mat<Complex64> {
        let d = self.left.len();
        Mat::from_fn(d, d, |i, j| self.left[i] * self.e.e[(i, j)] * self.right[j])
    }
}

/// Lab-frame propagator of a single pulse over `[t_start, t_start+τ]`.
pub fn pulse_propagator(cache: &PropagatorCache, pulse: &Pulse) -> Result<Mat<Complex64>> {
    Ok(PulseOp::new(cache, pulse, Frame::Lab)?.to_matrix())
}

/// Interaction-frame propagator of a single pulse.
pub fn pulse_propagator_interaction(cache: &PropagatorCache, pulse: &Pulse) -> Result<Mat<Complex64>> {
    Ok(PulseOp::new(cache, pulse, Frame::Interaction)?.to_matrix())
}

/// `W(t) = e^{−iH0 t}` as a diagonal.
pub fn free_phases(h0: &[f64], t: Clock) -> Vec<Complex64> {
    h0.iter().map(|&e| Complex64::from_polar(1.0, -t.phase(e))).collect()
}

/// `|ψ_int⟩ = W†(t)|ψ_lab⟩`.
pub fn state_to_interaction_frame(p: &ChainParams, psi: &StateVector, t: Clock) -> StateVector {
    let w = free_phases(&p.static_hamiltonian_diagonal(), t);
    StateVector { amps: psi.amps.iter().zip(&w).map(|(a, w)| a * w.conj()).collect() }
}

/// `U_int = W†(t1) U_lab W(t0)`.
pub fn propagator_to_interaction_frame(
    p: &ChainParams,
    u_lab: &Mat<Complex64>,
    t0: Clock,
    t1: Clock,
) -> Mat<Complex64> {
    let h0 = p.static_hamiltonian_diagonal();
    let w0 = free_phases(&h0, t0);
    let w1 = free_phases(&h0, t1);
    Mat::from_fn(u_lab.nrows(), u_lab.ncols(), |i, j| w1[i].conj() * u_lab[(i, j)] * w0[j])
}

pub fn state_matrix(states: &[StateVector]) -> Mat<Complex64> {
    let d = states.first().map_or(0, |s| s.dim());
    Mat::from_fn(d, states.len(), |i, j| states[j].amps[i])
}

pub fn matrix_states(x: &Mat<Complex64>) -> Vec<StateVector> {
    (0..x.ncols()).map(|j| StateVector { amps: (0..x.nrows()).map(|i| x[(i, j)]).collect() }).collect()
}

/// Applies a contiguous pulse list starting at `t0` to the columns of `x`.
///
/// The double-double clock is the time reference; each pulse's stored start
/// must agree with it to `1e-9` relative.
pub fn evolve_pulses(
    cache: &PropagatorCache,
    pulses: &[Pulse],
    t0: Clock,
    frame: Frame,
    x: &mut Mat<Complex64>,
    mut on_pulse: impl FnMut(usize, &Mat<Complex64>),
) -> Result<Clock> {
    let mut clock = t0;
    let mut scratch = Mat::zeros(0, 0);
    for (m, pulse) in pulses.iter().enumerate() {
        let expected = clock.as_f64();
        if (pulse.t_start - expected).abs() > 1e-9 * expected.abs().max(1.0) {
            return Err(IqcError::ScheduleGap { index: m, expected, found: pulse.t_start });
        }
        let op = PulseOp::at(cache, pulse, clock, frame)?;
        op.apply(x, &mut scratch);
        clock = clock.advanced(pulse.tau);
        on_pulse(m, x);
    }
    Ok(clock)
}

/// Product of the pulse propagators, `U_M ⋯ U_1`.
pub fn pulses_unitary(
    cache: &PropagatorCache,
    pulses: &[Pulse],
    t0: Clock,
    frame: Frame,
) -> Result<(Mat<Complex64>, Clock)> {
    let d = cache.params().dim();
    let mut u = Mat::<Complex64>::identity(d, d);
    let t1 = evolve_pulses(cache, pulses, t0, frame, &mut u, |_, _| {})?;
    Ok((u, t1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eq3_resonant_pi_pulse_is_one() {
        assert!((two_level_transition_probability(0.3, 0.0, 1.0) - 1.0).abs() < 1e-15);
        for k in 1..6 {
            let delta = 2.0;
            let om = delta / (4.0 * (k * k) as f64 - 1.0).sqrt();
            assert!(two_level_transition_probability(om, delta, 1.0) < 1e-28);
        }
    }

    #[test]
    fn zero_drive_is_free_evolution() {
        let p = ChainParams::new(3, 10.0, 4).unwrap();
        let cache = PropagatorCache::new(&p);
        let pulse = Pulse { nu: 30.0, omega: 0.0, phi: 0.4, tau: 2.5, t_start: 1.0, t_start_lo: 0.0 };
        let u = pulse_propagator_interaction(&cache, &pulse).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((u[(i, j)] - Complex64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }
}
