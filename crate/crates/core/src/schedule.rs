// Copyright 2026 The iqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Timed pulse schedules with Q-pulse and gate markers, and their evolution.
//!
//! JSON layout:
//!
//! ```text
//! { "format": "iqc-schedule/1", "units": "hbar=J=1",
//!   "params": { "n", "a", "k" },
//!   "pulses": [ { "nu", "omega", "phi", "tau", "t_start", "t_start_lo" } ],
//!   "q_pulses": [ { "pulse_start", "pulse_end", "q": { "qubit", "config", "rho", "phase" } } ],
//!   "gates": [ { "gate": { "kind", ... }, "q_start", "q_end", "pulse_start", "pulse_end" } ] }
//! ```
//!
//! Spans are half-open and partition the pulse list. `t_start_lo` is the low
//! word of the double-double start time.

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{ChainParams, StateVector};
use crate::clock::Clock;
use crate::compiler::compile_gate_qpulses;
use crate::dynamics::{evolve_pulses, matrix_states, state_matrix, Frame, PropagatorCache, Pulse};
use crate::error::{IqcError, Result};
use crate::gates::{algorithm_gates, closed_form_pulse_count, Algorithm, GateSpec};
use crate::qpulse::{realize, QPulse};

pub const SCHEDULE_FORMAT: &str = "iqc-schedule/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QSpan {
    pub pulse_start: usize,
    pub pulse_end: usize,
    pub q: QPulse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSpan {
    pub gate: GateSpec,
    pub q_start: usize,
    pub q_end: usize,
    pub pulse_start: usize,
    pub pulse_end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub format: String,
    pub units: String,
    pub params: ChainParams,
    pub pulses: Vec<Pulse>,
    pub q_pulses: Vec<QSpan>,
    pub gates: Vec<GateSpan>,
}

/// Granularity of schedule units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitKind {
    Pulse,
    QPulse,
    Gate,
}

impl PulseSchedule {
    pub fn empty(p: &ChainParams) -> Self {
        Self {
            format: SCHEDULE_FORMAT.into(),
            units: "hbar=J=1".into(),
            params: p.clone(),
            pulses: Vec::new(),
            q_pulses: Vec::new(),
            gates: Vec::new(),
        }
    }

    pub fn end_time(&self) -> Clock {
        self.pulses.last().map_or(Clock::ZERO, |p| p.end())
    }

    /// Appends a compiled gate at the end of the schedule.
    pub fn push_gate(&mut self, g: &GateSpec) -> Result<()> {
        let qs = compile_gate_qpulses(g, &self.params)?;
        let q_start = self.q_pulses.len();
        let pulse_start = self.pulses.len();
        let mut t = self.end_time();
        for q in qs {
            let first = self.pulses.len();
            for r in realize(&self.params, &q, t)? {
                self.pulses.push(Pulse {
                    nu: r.nu,
                    omega: r.omega,
                    phi: r.phi,
                    tau: r.tau,
                    t_start: t.hi,
                    t_start_lo: t.lo,
                });
                t = t.advanced(r.tau);
            }
            self.q_pulses.push(QSpan { pulse_start: first, pulse_end: self.pulses.len(), q });
        }
        self.gates.push(GateSpan {
            gate: *g,
            q_start,
            q_end: self.q_pulses.len(),
            pulse_start,
            pulse_end: self.pulses.len(),
        });
        Ok(())
    }

    pub fn from_gates(p: &ChainParams, gates: &[GateSpec]) -> Result<Self> {
        let mut s = Self::empty(p);
        for g in gates {
            s.push_gate(g)?;
        }
        Ok(s)
    }

    /// Pulse index ranges of the chosen units.
    pub fn unit_spans(&self, unit: UnitKind) -> Vec<(usize, usize)> {
        match unit {
            UnitKind::Pulse => (0..self.pulses.len()).map(|m| (m, m + 1)).collect(),
            UnitKind::QPulse => self.q_pulses.iter().map(|s| (s.pulse_start, s.pulse_end)).collect(),
            UnitKind::Gate => self.gates.iter().map(|s| (s.pulse_start, s.pulse_end)).collect(),
        }
    }

    /// Checks that the markers partition the pulse list and times are contiguous.
    pub fn validate(&self) -> Result<()> {
        let mut expect = 0;
        for s in &self.q_pulses {
            if s.pulse_start != expect || s.pulse_end < s.pulse_start {
                return Err(IqcError::InvalidParams(format!("q-pulse markers break at pulse {expect}")));
            }
            expect = s.pulse_end;
        }
        if expect != self.pulses.len() {
            return Err(IqcError::InvalidParams("q-pulse markers do not cover the schedule".into()));
        }
        let (mut eq, mut ep) = (0, 0);
        for g in &self.gates {
            if g.q_start != eq || g.pulse_start != ep {
                return Err(IqcError::InvalidParams(format!("gate markers break at {}", g.gate)));
            }
            if g.q_end > self.q_pulses.len() {
                return Err(IqcError::InvalidParams(format!("gate {} runs past the q-pulses", g.gate)));
            }
            let pe = if g.q_end > g.q_start { self.q_pulses[g.q_end - 1].pulse_end } else { ep };
            if pe != g.pulse_end {
                return Err(IqcError::InvalidParams(format!("gate {} pulse span disagrees with q-pulses", g.gate)));
            }
            eq = g.q_end;
            ep = g.pulse_end;
        }
        if eq != self.q_pulses.len() {
            return Err(IqcError::InvalidParams("gate markers do not cover the schedule".into()));
        }
        let mut t = Clock::ZERO;
        for (m, p) in self.pulses.iter().enumerate() {
            let e = t.as_f64();
            if (p.t_start - e).abs() > 1e-9 * e.abs().max(1.0) {
                return Err(IqcError::ScheduleGap { index: m, expected: e, found: p.t_start });
            }
            t = t.advanced(p.tau);
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let sched: Self = serde_json::from_str(s)?;
        if sched.format != SCHEDULE_FORMAT {
            return Err(IqcError::InvalidParams(format!("unknown schedule format {}", sched.format)));
        }
        sched.validate()?;
        Ok(sched)
    }
}

/// Compiles one gate as a stand-alone fragment starting at t = 0.
pub fn compile_gate(g: &GateSpec, p: &ChainParams) -> Result<PulseSchedule> {
    PulseSchedule::from_gates(p, std::slice::from_ref(g))
}

pub fn compile_algorithm(algo: Algorithm, p: &ChainParams) -> Result<PulseSchedule> {
    PulseSchedule::from_gates(p, &algorithm_gates(algo, p.n))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PulseCountReport {
    pub algo: Algorithm,
    pub n: usize,
    pub gates: usize,
    pub q_pulses: usize,
    pub pulses: usize,
    pub closed_form: i64,
    pub per_gate: Vec<(String, usize)>,
}

impl PulseCountReport {
    pub fn of(algo: Algorithm, s: &PulseSchedule) -> Self {
        Self {
            algo,
            n: s.params.n,
            gates: s.gates.len(),
            q_pulses: s.q_pulses.len(),
            pulses: s.pulses.len(),
            closed_form: closed_form_pulse_count(algo, s.params.n),
            per_gate: s.gates.iter().map(|g| (g.gate.to_string(), g.pulse_end - g.pulse_start)).collect(),
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.pulses as i64 != self.closed_form {
            return Err(IqcError::CountMismatch {
                algo: self.algo.to_string(),
                n: self.n,
                compiled: self.pulses,
                expected: self.closed_form.max(0) as usize,
            });
        }
        Ok(())
    }
}

/// Compiles `algo` and checks its raw pulse count against the closed form.
pub fn pulse_count(algo: Algorithm, p: &ChainParams) -> Result<PulseCountReport> {
    let s = compile_algorithm(algo, p)?;
    let r = PulseCountReport::of(algo, &s);
    r.check()?;
    Ok(r)
}

/// Boundaries at which [`evolve`] records the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Record {
    Nothing,
    Every(UnitKind),
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub final_state: StateVector,
    pub end_time: Clock,
    pub trajectory: Vec<StateVector>,
}

/// Evolves one state through the whole schedule.
pub fn evolve(
    cache: &PropagatorCache,
    schedule: &PulseSchedule,
    psi: &StateVector,
    frame: Frame,
    record: Record,
) -> Result<Evolution> {
    let d = schedule.params.dim();
    if psi.dim() != d {
        return Err(IqcError::Dimension(psi.dim(), d));
    }
    let ends: Vec<usize> = match record {
        Record::Nothing => vec![],
        Record::Every(u) => schedule.unit_spans(u).into_iter().map(|(_, e)| e).collect(),
    };
    let mut x = state_matrix(std::slice::from_ref(psi));
    let mut trajectory = Vec::new();
    let mut next = 0;
    let end_time = evolve_pulses(cache, &schedule.pulses, Clock::ZERO, frame, &mut x, |m, x| {
        while next < ends.len() && ends[next] == m + 1 {
            trajectory.extend(matrix_states(x));
            next += 1;
        }
    })?;
    Ok(Evolution { final_state: matrix_states(&x).remove(0), end_time, trajectory })
}

/// Evolves a batch of states (the columns of `x`) through pulses `range`.
pub fn evolve_batch(
    cache: &PropagatorCache,
    schedule: &PulseSchedule,
    range: std::ops::Range<usize>,
    frame: Frame,
    x: &mut Mat<Complex64>,
) -> Result<Clock> {
    let t0 = schedule.pulses.get(range.start).map_or(schedule.end_time(), |p| p.start());
    evolve_pulses(cache, &schedule.pulses[range], t0, frame, x, |_, _| {})
}
