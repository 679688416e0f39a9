// Copyright 2026 The iqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Simulation runs behind the fidelity studies: intrinsic errors, GUE
//! insertions after gates or pulses, both together, and per-unit generators
//! for correlation analysis.
//!
//! All runs compare interaction-frame states. The ideal reference is the
//! literal gate product; the GUE-only pulse runs compare against the same
//! pulses without insertions.

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::analysis::{batch_fidelities, extract_generator, haar_average_fidelity, Estimate};
use crate::chain::random_gaussian_state;
use crate::dynamics::{evolve_pulses, pulses_unitary, Frame, PropagatorCache, PulseOp};
use crate::error::{IqcError, Result};
use crate::gue::{insertion_unitaries, sample_gue, InsertionFrame, InsertionOp, InsertionPlan, Placement};
use crate::ideal::ideal_gate_matrix;
use crate::linalg::{adjoint, mul, CMat};
use crate::qpulse::{apply_blocks, q_pulse_blocks};
use crate::schedule::PulseSchedule;

/// Derives the `i`-th child seed of `seed`.
pub fn child_seed(seed: u64, i: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed.wrapping_add(i.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn child_seeds(seed: u64, count: usize) -> Vec<u64> {
    (0..count as u64).map(|i| child_seed(seed, i)).collect()
}

/// `count` random Gaussian states as the columns of a matrix.
pub fn gaussian_states(n: usize, count: usize, seed: u64) -> CMat {
    let states: Vec<_> = child_seeds(seed, count).into_iter().map(|s| random_gaussian_state(n, s)).collect();
    Mat::from_fn(1 << n, count, |i, j| states[j].amps[i])
}

/// Ideal dense matrices of the schedule's gates.
pub fn ideal_gate_unitaries(s: &PulseSchedule) -> Result<Vec<CMat>> {
    s.gates.iter().map(|g| ideal_gate_matrix(&g.gate, s.params.n)).collect()
}

/// Exact interaction-frame propagator of each gate of the schedule.
pub fn exact_gate_unitaries(cache: &PropagatorCache, s: &PulseSchedule) -> Result<Vec<CMat>> {
    s.gates
        .par_iter()
        .map(|g| {
            let pulses = &s.pulses[g.pulse_start..g.pulse_end];
            let t0 = pulses.first().map_or(s.end_time(), |p| p.start());
            pulses_unitary(cache, pulses, t0, Frame::Interaction).map(|(u, _)| u)
        })
        .collect()
}

/// `U_T ⋯ U_1 X`.
pub fn apply_gates(gates: &[CMat], x: &CMat) -> CMat {
    gates.iter().fold(x.clone(), |acc, u| mul(u, &acc))
}

/// Interaction-frame states after the whole pulse list.
pub fn exact_final(cache: &PropagatorCache, s: &PulseSchedule, states: &CMat) -> Result<CMat> {
    let mut x = states.clone();
    evolve_pulses(cache, &s.pulses, crate::clock::Clock::ZERO, Frame::Interaction, &mut x, |_, _| {})?;
    Ok(x)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len().max(1) as f64
}

/// Intrinsic fidelity per state: exact pulses against the ideal reference.
pub fn intrinsic_fidelity(
    cache: &PropagatorCache,
    s: &PulseSchedule,
    states: &CMat,
    reference: &CMat,
) -> Result<Estimate> {
    let x = exact_final(cache, s, states)?;
    Ok(Estimate::of(&batch_fidelities(reference, &x)?))
}

// Insertion op after each gate, `None` where the plan skips a gate.
fn per_gate_ops(
    s: &PulseSchedule,
    ops: Vec<(crate::gue::InsertionPoint, InsertionOp)>,
) -> Result<Vec<Option<InsertionOp>>> {
    let mut out: Vec<Option<InsertionOp>> = vec![None; s.gates.len()];
    for (pt, op) in ops {
        let g = s
            .gates
            .iter()
            .position(|g| g.pulse_end == pt.after_pulse && g.pulse_end > g.pulse_start)
            .ok_or_else(|| IqcError::PlanMismatch(format!("no gate ends at pulse {}", pt.after_pulse)))?;
        out[g] = Some(op);
    }
    Ok(out)
}

/// One realization of per-gate GUE insertions on `states` with the given gate
/// matrices; returns the final states.
pub fn evolve_gue_gates(
    s: &PulseSchedule,
    gates: &[CMat],
    frame: InsertionFrame,
    delta: f64,
    seed: u64,
    states: &CMat,
) -> Result<CMat> {
    if gates.len() != s.gates.len() {
        return Err(IqcError::PlanMismatch(format!("{} gate matrices for {} gates", gates.len(), s.gates.len())));
    }
    let v = sample_gue(s.params.dim(), seed)?;
    let plan = InsertionPlan { placement: Placement::AfterEachGate, frame };
    let ops = per_gate_ops(s, insertion_unitaries(&plan, &v, delta, s)?)?;
    let mut x = states.clone();
    for (u, op) in gates.iter().zip(&ops) {
        x = mul(u, &x);
        if let Some(op) = op {
            op.apply(&mut x);
        }
    }
    Ok(x)
}

/// State-averaged fidelity of each per-gate GUE realization.
pub fn gue_gate_fidelities(
    s: &PulseSchedule,
    gates: &[CMat],
    frame: InsertionFrame,
    delta: f64,
    seeds: &[u64],
    states: &CMat,
    reference: &CMat,
) -> Result<Vec<f64>> {
    seeds
        .par_iter()
        .map(|&seed| {
            let x = evolve_gue_gates(s, gates, frame, delta, seed, states)?;
            Ok(mean(&batch_fidelities(reference, &x)?))
        })
        .collect()
}

/// Interaction-frame pulse operators of the whole schedule.
pub fn pulse_ops(cache: &PropagatorCache, s: &PulseSchedule) -> Result<Vec<PulseOp>> {
    s.pulses.iter().map(|p| PulseOp::new(cache, p, Frame::Interaction)).collect()
}

/// State-averaged fidelity of each per-pulse GUE realization. `reference`
/// should be the same pulses without insertions.
pub fn gue_pulse_fidelities(
    s: &PulseSchedule,
    ops: &[PulseOp],
    frame: InsertionFrame,
    delta: f64,
    seeds: &[u64],
    states: &CMat,
    reference: &CMat,
) -> Result<Vec<f64>> {
    let plan = InsertionPlan { placement: Placement::AfterEachPulse, frame };
    seeds
        .par_iter()
        .map(|&seed| {
            let v = sample_gue(s.params.dim(), seed)?;
            let ins = insertion_unitaries(&plan, &v, delta, s)?;
            let mut x = states.clone();
            let mut scratch = Mat::zeros(0, 0);
            for (op, (_, e)) in ops.iter().zip(&ins) {
                op.apply(&mut x, &mut scratch);
                e.apply(&mut x);
            }
            Ok(mean(&batch_fidelities(reference, &x)?))
        })
        .collect()
}

/// Paired fidelities of one realization with intrinsic errors only, GUE
/// only, and both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinedSample {
    pub intrinsic: f64,
    pub gue: f64,
    pub both: f64,
}

/// Combined-error realizations: exact gates with per-gate interaction-frame
/// GUE insertions, alongside the two separate error sources on the same
/// states and `V`.
pub fn combined_fidelities(
    s: &PulseSchedule,
    exact: &[CMat],
    ideal: &[CMat],
    delta: f64,
    seeds: &[u64],
    states: &CMat,
    reference: &CMat,
) -> Result<Vec<CombinedSample>> {
    let intrinsic = mean(&batch_fidelities(reference, &apply_gates(exact, states))?);
    seeds
        .par_iter()
        .map(|&seed| {
            let g = evolve_gue_gates(s, ideal, InsertionFrame::InteractionStatic, delta, seed, states)?;
            let b = evolve_gue_gates(s, exact, InsertionFrame::InteractionStatic, delta, seed, states)?;
            Ok(CombinedSample {
                intrinsic,
                gue: mean(&batch_fidelities(reference, &g)?),
                both: mean(&batch_fidelities(reference, &b)?),
            })
        })
        .collect()
}

/// Haar-averaged counterpart of [`combined_fidelities`]: whole propagators
/// are compared with `u_ideal`, so no state sampling enters.
pub fn combined_haar_fidelities(
    s: &PulseSchedule,
    exact: &[CMat],
    ideal: &[CMat],
    delta: f64,
    seeds: &[u64],
    u_ideal: &CMat,
) -> Result<Vec<CombinedSample>> {
    let id = CMat::identity(s.params.dim(), s.params.dim());
    let intrinsic = haar_average_fidelity(u_ideal, &apply_gates(exact, &id))?;
    seeds
        .par_iter()
        .map(|&seed| {
            let g = evolve_gue_gates(s, ideal, InsertionFrame::InteractionStatic, delta, seed, &id)?;
            let b = evolve_gue_gates(s, exact, InsertionFrame::InteractionStatic, delta, seed, &id)?;
            Ok(CombinedSample {
                intrinsic,
                gue: haar_average_fidelity(u_ideal, &g)?,
                both: haar_average_fidelity(u_ideal, &b)?,
            })
        })
        .collect()
}

/// Per-Q-pulse intrinsic generators with the ideal prefixes that propagate them.
#[derive(Debug, Clone)]
pub struct UnitGenerators {
    pub generators: Vec<CMat>,
    pub prefixes: Vec<CMat>,
    /// Exact interaction-frame propagator of the whole schedule.
    pub exact_total: CMat,
}

/// Near-resonant (ideal) interaction-frame operator of one Q-pulse span.
pub fn ideal_q_pulse_matrix(s: &PulseSchedule, q: usize) -> Result<CMat> {
    let span = &s.q_pulses[q];
    let t0 = s.pulses.get(span.pulse_start).map_or(s.end_time(), |p| p.start());
    let blocks = q_pulse_blocks(&s.params, &span.q, t0)?;
    let d = s.params.dim();
    let mut u = CMat::zeros(d, d);
    let mut col = vec![Complex64::new(0.0, 0.0); d];
    for b in 0..d {
        col.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        col[b] = Complex64::new(1.0, 0.0);
        apply_blocks(span.q.qubit, &blocks, &mut col);
        for (i, z) in col.iter().enumerate() {
            u[(i, b)] = *z;
        }
    }
    Ok(u)
}

/// Generators `G_q = i log(U_exact U_ideal†)` of the non-resonant leakage of
/// every Q-pulse, with prefixes built from the ideal Q-pulse operators.
pub fn intrinsic_generators(cache: &PropagatorCache, s: &PulseSchedule) -> Result<UnitGenerators> {
    let d = s.params.dim();
    let pairs: Vec<(CMat, CMat)> = (0..s.q_pulses.len())
        .into_par_iter()
        .map(|q| {
            let span = &s.q_pulses[q];
            let pulses = &s.pulses[span.pulse_start..span.pulse_end];
            let t0 = pulses.first().map_or(s.end_time(), |p| p.start());
            let (exact, _) = pulses_unitary(cache, pulses, t0, Frame::Interaction)?;
            let ideal = ideal_q_pulse_matrix(s, q)?;
            Ok((ideal, exact))
        })
        .collect::<Result<_>>()?;
    let mut generators = Vec::with_capacity(pairs.len());
    let mut prefixes = Vec::with_capacity(pairs.len());
    let mut prefix = CMat::identity(d, d);
    let mut exact_total = CMat::identity(d, d);
    for (ideal, exact) in &pairs {
        generators.push(extract_generator(ideal, exact)?);
        prefix = mul(ideal, &prefix);
        prefixes.push(prefix.clone());
        exact_total = mul(exact, &exact_total);
    }
    Ok(UnitGenerators { generators, prefixes, exact_total })
}

/// Per-gate GUE generators `δV` (or `δ W†(t) V W(t)`) at the plan's insertion
/// points, with ideal prefixes through the gate each follows.
pub fn gue_gate_generators(
    s: &PulseSchedule,
    frame: InsertionFrame,
    delta: f64,
    seed: u64,
) -> Result<(Vec<CMat>, Vec<CMat>)> {
    let v = sample_gue(s.params.dim(), seed)?;
    let plan = InsertionPlan { placement: Placement::AfterEachGate, frame };
    let pts = crate::gue::insertion_points(&plan, s)?;
    let ideal = ideal_gate_unitaries(s)?;
    let h0 = s.params.static_hamiltonian_diagonal();
    let d = s.params.dim();
    let mut prefix = CMat::identity(d, d);
    let mut gens = Vec::new();
    let mut prefixes = Vec::new();
    let mut next = 0;
    for (g, u) in s.gates.iter().zip(&ideal) {
        prefix = mul(u, &prefix);
        if next < pts.len() && pts[next].after_pulse == g.pulse_end {
            let gen = match frame {
                InsertionFrame::InteractionStatic => Mat::from_fn(d, d, |i, j| v.v[(i, j)] * delta),
                InsertionFrame::LabStatic => {
                    let w = crate::dynamics::free_phases(&h0, pts[next].time);
                    Mat::from_fn(d, d, |i, j| w[i].conj() * v.v[(i, j)] * w[j] * delta)
                }
            };
            gens.push(gen);
            prefixes.push(prefix.clone());
            next += 1;
        }
    }
    Ok((gens, prefixes))
}

/// `U_exact U_ideal†` distance helper for reports: `1 − |Tr(U_ideal† U)|²/d²`.
pub fn process_infidelity(u_ideal: &CMat, u: &CMat) -> f64 {
    let d = u.nrows() as f64;
    let m = mul(&adjoint(u_ideal), u);
    let tr: Complex64 = (0..m.nrows()).map(|i| m[(i, i)]).sum();
    1.0 - tr.norm_sqr() / (d * d)
}

/// Ideal propagator of the schedule: the product of its gate matrices.
pub fn schedule_ideal_unitary(s: &PulseSchedule) -> Result<CMat> {
    let d = s.params.dim();
    Ok(apply_gates(&ideal_gate_unitaries(s)?, &CMat::identity(d, d)))
}

/// Exact interaction-frame propagator of the whole pulse list.
pub fn schedule_exact_unitary(cache: &PropagatorCache, s: &PulseSchedule) -> Result<CMat> {
    let d = s.params.dim();
    exact_final(cache, s, &CMat::identity(d, d))
}

/// Haar-averaged fidelity of each per-gate GUE realization.
pub fn gue_gate_haar_fidelities(
    s: &PulseSchedule,
    gates: &[CMat],
    frame: InsertionFrame,
    delta: f64,
    seeds: &[u64],
    u_ideal: &CMat,
) -> Result<Vec<f64>> {
    let id = CMat::identity(s.params.dim(), s.params.dim());
    seeds
        .par_iter()
        .map(|&seed| haar_average_fidelity(u_ideal, &evolve_gue_gates(s, gates, frame, delta, seed, &id)?))
        .collect()
}

/// Haar-averaged fidelity of each per-pulse GUE realization against
/// `u_reference`, the same pulses without insertions.
pub fn gue_pulse_haar_fidelities(
    s: &PulseSchedule,
    ops: &[PulseOp],
    frame: InsertionFrame,
    delta: f64,
    seeds: &[u64],
    u_reference: &CMat,
) -> Result<Vec<f64>> {
    let d = s.params.dim();
    let plan = InsertionPlan { placement: Placement::AfterEachPulse, frame };
    seeds
        .par_iter()
        .map(|&seed| {
            let v = sample_gue(d, seed)?;
            let ins = insertion_unitaries(&plan, &v, delta, s)?;
            let mut x = CMat::identity(d, d);
            let mut scratch = Mat::zeros(0, 0);
            for (op, (_, e)) in ops.iter().zip(&ins) {
                op.apply(&mut x, &mut scratch);
                e.apply(&mut x);
            }
            haar_average_fidelity(u_reference, &x)
        })
        .collect()
}
