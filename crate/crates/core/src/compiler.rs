// Copyright 2026 The iqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Gate compiler: every gate becomes a time-ordered list of Q-pulses.
//!
//! `A`, `B` (n ≥ 3) and `Z` use closed-form phases built from the angle set.
//! `N`, `CN` and the two-qubit-register `B` are Q-pulse sweeps whose phases
//! are solved exactly by [`crate::phases`]. Two-qubit gates on distant
//! qubits move the lower qubit up with adjacent swaps, act, and move it back.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::chain::{ChainParams, J};
use crate::clock::Clock;
use crate::dynamics::{pulses_unitary, Frame, PropagatorCache, Pulse};
use crate::error::{IqcError, Result};
use crate::gates::{b_phase, GateSpec};
use crate::ideal::monomial_target;
use crate::phases::{solve_cached, MonomialTarget, Slot, TemplatePulse};
use crate::qpulse::{angle_set, correction_phase, realize, NeighborConfig, QPulse, QPulseShape, Rho};

use NeighborConfig::{Pair, Single};

/// Configurations of a full sweep over the neighbor states of qubit `x`, time order.
fn sweep(p: &ChainParams, x: usize) -> Vec<NeighborConfig> {
    if p.is_edge(x) {
        vec![Single(1), Single(0)]
    } else {
        vec![Pair(1, 1), Pair(1, 0), Pair(0, 0)]
    }
}

fn q(qubit: usize, config: NeighborConfig, rho: Rho, phase: f64) -> QPulse {
    QPulse { qubit, config, rho, phase }
}

/// Hadamard.
fn a_gate(p: &ChainParams, j: usize, out: &mut Vec<QPulse>) -> Result<()> {
    let a1 = angle_set(p.k, 1.0)?;
    let ah = angle_set(2 * p.k, 0.5)?;
    let (th, ga, bth) = (a1.theta, a1.gamma, a1.big_theta);
    let (thh, gah, bthh) = (ah.theta, ah.gamma, ah.big_theta);
    // product order, rightmost first in time
    let prod: Vec<(NeighborConfig, f64, Rho)> = if p.is_edge(j) {
        let p6 = -th - thh;
        let p7 = -th + thh;
        let p8 = FRAC_PI_2 - 2.0 * thh;
        vec![
            (Single(0), p6, Rho::Full),
            (Single(1), p7, Rho::Full),
            (Single(0), p8, Rho::Half),
            (Single(1), FRAC_PI_2, Rho::Half),
        ]
    } else {
        let p1 = -2.0 * (th + gah + thh);
        let p2 = -th - 2.0 * bth;
        let p3 = -2.0 * (th + ga - gah - thh);
        let p4 = FRAC_PI_2 - 2.0 * gah - 4.0 * thh;
        let p5 = FRAC_PI_2 - thh - 2.0 * bthh;
        vec![
            (Pair(0, 0), p1, Rho::Full),
            (Pair(1, 0), p2, Rho::Full),
            (Pair(1, 1), p3, Rho::Full),
            (Pair(0, 0), p4, Rho::Half),
            (Pair(1, 0), p5, Rho::Half),
            (Pair(1, 1), FRAC_PI_2, Rho::Half),
        ]
    };
    out.extend(prod.into_iter().rev().map(|(c, ph, r)| q(j, c, r, ph)));
    Ok(())
}

/// σ_z: a sweep at phase π/2 followed by a sweep at phase 0.
fn z_gate(p: &ChainParams, j: usize, out: &mut Vec<QPulse>) {
    let sw = sweep(p, j);
    for phase in [FRAC_PI_2, 0.0] {
        out.extend(sw.iter().rev().map(|&c| q(j, c, Rho::Full, phase)));
    }
}

/// Restriction of the chain to `lo..=hi`.
fn local_chain(p: &ChainParams, qubits: &[usize]) -> Result<(ChainParams, usize)> {
    let lo = qubits.iter().min().unwrap().saturating_sub(1);
    let hi = (qubits.iter().max().unwrap() + 1).min(p.n - 1);
    Ok((ChainParams::new(hi - lo + 1, p.a, p.k)?, lo))
}

/// Solves a free-phase template on the local chain around `qubits`.
fn solved(
    p: &ChainParams,
    name: &str,
    qubits: &[usize],
    template: &[(usize, NeighborConfig)],
    target: impl FnOnce(&ChainParams, usize) -> MonomialTarget,
    out: &mut Vec<QPulse>,
) -> Result<()> {
    let (loc, lo) = local_chain(p, qubits)?;
    let seq: Vec<TemplatePulse> = template
        .iter()
        .enumerate()
        .map(|(m, &(x, config))| TemplatePulse { qubit: x - lo, config, rho: Rho::Full, slot: Slot::Free(m) })
        .collect();
    let rel: Vec<String> = qubits.iter().map(|x| (x - lo).to_string()).collect();
    let key = format!("{name}:k={}:n={}:q={}", p.k, loc.n, rel.join(","));
    let phases = solve_cached(key, &loc, &seq, &target(&loc, lo))?;
    out.extend(template.iter().zip(phases.iter()).map(|(&(x, c), &ph)| q(x, c, Rho::Full, ph)));
    Ok(())
}

fn local_target(g: GateSpec) -> impl FnOnce(&ChainParams, usize) -> MonomialTarget {
    move |loc, _| monomial_target(&g, loc.n).expect("monomial gate")
}

/// NOT as one sweep with solved phases.
fn n_gate(p: &ChainParams, j: usize, out: &mut Vec<QPulse>) -> Result<()> {
    let (_, lo) = local_chain(p, &[j])?;
    let tpl: Vec<_> = sweep(p, j).into_iter().map(|c| (j, c)).collect();
    solved(p, "N", &[j], &tpl, local_target(GateSpec::N { j: j - lo }), out)
}

/// CNOT on adjacent qubits: target pulses, control sweep, target pulses, control sweep.
fn cn_gate(p: &ChainParams, c: usize, t: usize, out: &mut Vec<QPulse>) -> Result<()> {
    let (ta, tb) = if p.is_edge(t) {
        (vec![Single(1)], vec![Single(1), Single(1)])
    } else {
        (vec![Pair(1, 1), Pair(1, 0), Pair(1, 0)], vec![Pair(0, 0), Pair(1, 0), Pair(1, 0)])
    };
    let sw = sweep(p, c);
    let tpl: Vec<_> = ta
        .iter()
        .map(|&x| (t, x))
        .chain(sw.iter().map(|&x| (c, x)))
        .chain(tb.iter().map(|&x| (t, x)))
        .chain(sw.iter().map(|&x| (c, x)))
        .collect();
    let (_, lo) = local_chain(p, &[c, t])?;
    solved(p, "CN", &[c, t], &tpl, local_target(GateSpec::CN { c: c - lo, t: t - lo }), out)
}

/// Controlled phase `e^{iφ}` on `|1_i 1_j⟩` for adjacent `i, j`.
fn b_gate(p: &ChainParams, i: usize, j: usize, phi: f64, out: &mut Vec<QPulse>) -> Result<()> {
    if p.n == 2 {
        let prod = [
            (i, Single(1)),
            (i, Single(0)),
            (j, Single(1)),
            (j, Single(1)),
            (j, Single(0)),
            (j, Single(0)),
            (i, Single(1)),
            (i, Single(0)),
            (j, Single(1)),
            (j, Single(1)),
        ];
        let tpl: Vec<_> = prod.iter().rev().cloned().collect();
        let name = format!("B2:phi={:016x}", phi.to_bits());
        let target = move |loc: &ChainParams, _| {
            let d = loc.dim();
            let amp = (0..d)
                .map(|b| {
                    let both = (b >> i) & 1 == 1 && (b >> j) & 1 == 1;
                    num_complex::Complex64::from_polar(1.0, if both { phi } else { 0.0 })
                })
                .collect();
            MonomialTarget { dest: (0..d).collect(), amp }
        };
        return solved(p, &name, &[i, j], &tpl, target, out);
    }
    let a = angle_set(p.k, 1.0)?;
    let (th, ga, bth) = (a.theta, a.gamma, a.big_theta);
    let p1 = -2.0 * ga - 3.0 * th + 2.0 * bth;
    let p3 = phi / 4.0 - FRAC_PI_2;
    let prod: Vec<(usize, NeighborConfig, f64)> = if !p.is_edge(i) && !p.is_edge(j) {
        let p2 = phi / 2.0 - 2.0 * ga - 6.0 * th;
        let p4 = -p1;
        let p5 = phi / 2.0 + 2.0 * ga + 6.0 * th;
        vec![
            (i, Pair(1, 1), 0.0),
            (i, Pair(1, 0), 0.0),
            (i, Pair(0, 0), 0.0),
            (j, Pair(1, 0), 0.0),
            (j, Pair(1, 0), p1),
            (j, Pair(0, 0), 0.0),
            (j, Pair(0, 0), p2),
            (i, Pair(1, 1), p3),
            (i, Pair(1, 0), p3),
            (i, Pair(0, 0), p3),
            (j, Pair(1, 0), 0.0),
            (j, Pair(1, 0), p4),
            (j, Pair(1, 1), 0.0),
            (j, Pair(1, 1), p5),
        ]
    } else {
        // the edge form addresses the edge qubit as `i`
        let (e, o) = if p.is_edge(i) { (i, j) } else { (j, i) };
        let p6 = phi / 2.0 - 6.0 * ga - 12.0 * th + 4.0 * bth;
        let p7 = p3 - p1;
        let p8 = p3 + p1;
        let p9 = -2.0 * p1;
        let p10 = phi / 2.0 - 2.0 * ga + 4.0 * bth;
        vec![
            (e, Single(1), 0.0),
            (e, Single(0), 0.0),
            (o, Pair(1, 0), 0.0),
            (o, Pair(1, 0), 0.0),
            (o, Pair(0, 0), 0.0),
            (o, Pair(0, 0), p6),
            (e, Single(1), p7),
            (e, Single(0), p8),
            (o, Pair(1, 0), 0.0),
            (o, Pair(1, 0), p9),
            (o, Pair(1, 1), 0.0),
            (o, Pair(1, 1), p10),
        ]
    };
    out.extend(prod.into_iter().rev().map(|(x, c, ph)| q(x, c, Rho::Full, ph)));
    Ok(())
}

fn swap_gate(p: &ChainParams, a: usize, b: usize, out: &mut Vec<QPulse>) -> Result<()> {
    cn_gate(p, a, b, out)?;
    cn_gate(p, b, a, out)?;
    cn_gate(p, a, b, out)
}

/// Runs `op(x, y)` with `i, j` moved to adjacent positions `x, y`.
fn routed(
    p: &ChainParams,
    i: usize,
    j: usize,
    out: &mut Vec<QPulse>,
    op: impl FnOnce(usize, usize, &mut Vec<QPulse>) -> Result<()>,
) -> Result<()> {
    let (lo, hi) = (i.min(j), i.max(j));
    let moves: Vec<usize> = (lo..hi.saturating_sub(1)).collect();
    for &m in &moves {
        swap_gate(p, m, m + 1, out)?;
    }
    let (x, y) = if i < j { (hi - 1, hi) } else { (hi, hi - 1) };
    op(x, y, out)?;
    for &m in moves.iter().rev() {
        swap_gate(p, m, m + 1, out)?;
    }
    Ok(())
}

fn r_gate(p: &ChainParams, i: usize, j: usize, dagger: bool, out: &mut Vec<QPulse>) -> Result<()> {
    routed(p, i, j, out, |x, y, out| {
        if dagger {
            n_gate(p, x, out)?;
            cn_gate(p, x, y, out)?;
            z_gate(p, y, out);
            n_gate(p, x, out)
        } else {
            z_gate(p, y, out);
            n_gate(p, x, out)?;
            cn_gate(p, x, y, out)?;
            n_gate(p, x, out)
        }
    })
}

/// Q-pulses of one gate in time order.
pub fn compile_gate_qpulses(g: &GateSpec, p: &ChainParams) -> Result<Vec<QPulse>> {
    g.validate(p.n)?;
    let mut out = Vec::new();
    use GateSpec::*;
    match *g {
        A { j } => a_gate(p, j, &mut out)?,
        Z { j } => z_gate(p, j, &mut out),
        N { j } => n_gate(p, j, &mut out)?,
        B { i, j } => {
            let phi = b_phase(i, j);
            routed(p, i, j, &mut out, |x, y, out| b_gate(p, x, y, phi, out))?
        }
        CN { c, t } => routed(p, c, t, &mut out, |x, y, out| cn_gate(p, x, y, out))?,
        S { i, j } => routed(p, i, j, &mut out, |x, y, out| swap_gate(p, x, y, out))?,
        R { i, j } => r_gate(p, i, j, false, &mut out)?,
        Rdag { i, j } => r_gate(p, i, j, true, &mut out)?,
        G { i, j } => {
            let phi = b_phase(i, j);
            routed(p, i, j, &mut out, |x, y, out| b_gate(p, x, y, phi, out))?;
            r_gate(p, i, j, true, &mut out)?;
        }
        T => {
            let n = p.n;
            for i in 1..=n {
                for j in 1..=n - i {
                    swap_gate(p, n - j, n - j - 1, &mut out)?;
                }
            }
        }
    }
    Ok(out)
}

/// Outcome of verifying one Q-pulse shape on the exact propagator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QPulseCalibration {
    pub qubit: usize,
    pub config: NeighborConfig,
    pub rho: Rho,
    pub shape: QPulseShape,
    /// Correcting-pulse phase for a zero-phase main pulse started at t = 0.
    pub correction_phase: Option<f64>,
    /// Modulus mismatch of the closed-form correcting phase (0 when exact).
    pub correction_mismatch: f64,
    /// Largest population leaving a near-resonant basis state.
    pub near_resonant_residual: f64,
    /// Same quantity without the correcting pulse.
    pub uncorrected_residual: f64,
    /// Population transferred on resonant basis states (smallest over them).
    pub resonant_transfer: f64,
    /// Largest non-resonant envelope `Ω²/(Ω²+Δ²)` over all pulses and spectator qubits.
    pub nonresonant_floor: f64,
}

/// Builds the Q-pulse from its closed-form shape and verifies on the exact
/// propagator that it cancels near-resonant transitions down to the
/// non-resonant floor.
pub fn calibrate_q_pulse(i: usize, config: NeighborConfig, rho: Rho, p: &ChainParams) -> Result<QPulseCalibration> {
    config.check(i, p.n)?;
    let shape = QPulseShape::new(config, rho, p.k)?;
    let qp = QPulse { qubit: i, config, rho, phase: 0.0 };
    let raws = realize(p, &qp, Clock::ZERO)?;
    let (correction_phase, correction_mismatch) = if shape.correction.is_some() {
        let (phi, mis) = correction_phase(&shape, 0.0, Clock::ZERO);
        (Some(phi), mis)
    } else {
        (None, 0.0)
    };
    let mut pulses = Vec::new();
    let mut t = Clock::ZERO;
    for r in &raws {
        pulses.push(Pulse { nu: r.nu, omega: r.omega, phi: r.phi, tau: r.tau, t_start: t.hi, t_start_lo: t.lo });
        t = t.advanced(r.tau);
    }
    let cache = PropagatorCache::new(p);
    let (u, _) = pulses_unitary(&cache, &pulses, Clock::ZERO, Frame::Interaction)?;
    let (u0, _) = pulses_unitary(&cache, &pulses[..1], Clock::ZERO, Frame::Interaction)?;
    let m = 1usize << i;
    let (mut near, mut uncorrected, mut transfer) = (0.0f64, 0.0f64, 1.0f64);
    for b in 0..p.dim() {
        if b & m != 0 {
            continue;
        }
        if config.matches(NeighborConfig::of_state(b, i, p.n)) {
            transfer = transfer.min(u[(b | m, b)].norm_sqr());
        } else {
            near = near.max(1.0 - u[(b, b)].norm_sqr());
            uncorrected = uncorrected.max(1.0 - u0[(b, b)].norm_sqr());
        }
    }
    let mut floor = 0.0f64;
    for r in &raws {
        for x in (0..p.n).filter(|&x| x != i) {
            for s in [-2.0, 0.0, 2.0] {
                let delta = r.nu - (p.larmor_frequency(x)? + J * s);
                floor = floor.max(r.omega * r.omega / (r.omega * r.omega + delta * delta));
            }
        }
    }
    let report = QPulseCalibration {
        qubit: i,
        config,
        rho,
        shape,
        correction_phase,
        correction_mismatch,
        near_resonant_residual: near,
        uncorrected_residual: uncorrected,
        resonant_transfer: transfer,
        nonresonant_floor: floor,
    };
    if near > 10.0 * floor || correction_mismatch > 1e-9 {
        return Err(IqcError::Calibration { what: format!("Q-pulse {i}^{config}"), residual: near });
    }
    Ok(report)
}
