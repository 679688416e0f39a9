// Copyright 2026 The iqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Subcommand bodies.

use std::path::PathBuf;

use iqc::analysis::{
    correlation_matrix, fidelity_contour, haar_average_fidelity, linear_response_fidelity, Averaging, Estimate, Regime,
    ScalingModel,
};
use iqc::dynamics::PropagatorCache;
use iqc::experiment::{
    apply_gates, child_seed, combined_fidelities, combined_haar_fidelities, exact_final, exact_gate_unitaries,
    gaussian_states, gue_gate_fidelities, gue_gate_generators, gue_gate_haar_fidelities, gue_pulse_fidelities,
    gue_pulse_haar_fidelities, ideal_gate_unitaries, intrinsic_fidelity, intrinsic_generators, pulse_ops,
    schedule_exact_unitary, schedule_ideal_unitary,
};
use iqc::gue::InsertionFrame;
use iqc::schedule::{compile_algorithm, PulseCountReport, PulseSchedule};
use iqc::{Algorithm, ChainParams};
use serde_json::{json, Value};

use crate::config::{Errors, ExperimentConfig, Plane, Sweep};
use crate::output::{emit, header, json_document, opt};
use crate::{CliError, UsageError};

/// Largest register any subcommand builds without `--allow-large`.
pub const MAX_N: usize = 12;
/// Largest register simulated without `--allow-large`.
pub const MAX_SIM_N: usize = 8;

pub struct Context {
    pub command: &'static str,
    pub cfg: ExperimentConfig,
    pub out: Option<PathBuf>,
    pub allow_large: bool,
}

impl Context {
    fn guard(&self, n: usize, limit: usize) -> Result<(), UsageError> {
        if n > limit && !self.allow_large {
            return Err(UsageError(format!(
                "n = {n} exceeds the limit of {limit} qubits for {}; pass --allow-large to run anyway",
                self.command
            )));
        }
        Ok(())
    }

    fn write_json(&self, seeds: &[u64], body: Value) -> Result<(), CliError> {
        let doc = json_document(self.command, &self.cfg, seeds, body);
        let text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Run(e.to_string()))? + "\n";
        Ok(emit(self.out.as_deref(), &text)?)
    }
}

fn params(cfg: &ExperimentConfig) -> Result<ChainParams, CliError> {
    let p = ChainParams::new(cfg.n, cfg.a, cfg.k).map_err(|e| UsageError(e.to_string()))?;
    for w in &p.warnings {
        eprintln!("warning: {w:?} at n = {}, a = {}, k = {}", cfg.n, cfg.a, cfg.k);
    }
    Ok(p)
}

/// The configured schedule file, or a fresh compilation of `algo`.
fn schedule(cfg: &ExperimentConfig) -> Result<PulseSchedule, CliError> {
    match &cfg.schedule {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read schedule {path}: {e}")))?;
            let value: Value = serde_json::from_str(&text).map_err(|e| UsageError(format!("{path}: {e}")))?;
            // accept both bare schedules and `compile --out` documents
            let inner = value.get("schedule").cloned().unwrap_or(value);
            Ok(PulseSchedule::from_json(&inner.to_string()).map_err(|e| UsageError(format!("{path}: {e}")))?)
        }
        None => Ok(compile_algorithm(cfg.algo, &params(cfg)?)?),
    }
}

pub fn compile(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    ctx.guard(cfg.n, MAX_N)?;
    let s = compile_algorithm(cfg.algo, &params(cfg)?)?;
    let r = PulseCountReport::of(cfg.algo, &s);
    let mut text = header(ctx.command, cfg, &[]);
    text += &format!("algo: {}, n: {}, k: {}, a: {}\n", cfg.algo, cfg.n, cfg.k, cfg.a);
    text += &format!("gates: {}, q-pulses: {}\n", r.gates, r.q_pulses);
    text += &format!("pulses: {}\n", r.pulses);
    text += &format!("closed form: {}\n", r.closed_form);
    for (gate, count) in &r.per_gate {
        text += &format!("  {gate}: {count}\n");
    }
    emit(None, &text)?;
    if let Some(path) = &ctx.out {
        let sched: Value = serde_json::from_str(&s.to_json()?).map_err(|e| CliError::Run(e.to_string()))?;
        let doc = json_document(ctx.command, cfg, &[], json!({ "report": r, "schedule": sched }));
        let body = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Run(e.to_string()))? + "\n";
        emit(Some(path), &body)?;
    }
    r.check()?;
    Ok(())
}

/// Result of one simulated configuration.
struct Point {
    fidelity: Estimate,
    intrinsic: Option<f64>,
    gue: Option<Estimate>,
    gates: usize,
    pulses: usize,
}

fn states_seed(cfg: &ExperimentConfig) -> u64 {
    // disjoint from the realization seeds, which use indices below `realizations`
    child_seed(cfg.seed, u64::MAX)
}

fn simulate_point(cfg: &ExperimentConfig) -> Result<Point, CliError> {
    let s = schedule(cfg)?;
    let seeds = cfg.realization_seeds();
    let haar = cfg.states == 0;
    let states = (!haar).then(|| gaussian_states(s.params.n, cfg.states, states_seed(cfg)));
    let u_ideal = schedule_ideal_unitary(&s)?;
    let reference = states.as_ref().map(|x| apply_gates(std::slice::from_ref(&u_ideal), x));
    let gue_frame = |lab: bool| if lab { InsertionFrame::LabStatic } else { InsertionFrame::InteractionStatic };
    let cache = || PropagatorCache::new(&s.params);
    let (fidelity, intrinsic, gue) = match cfg.errors {
        Errors::Intrinsic => {
            let cache = cache();
            let est = match (&states, &reference) {
                (Some(x), Some(r)) => intrinsic_fidelity(&cache, &s, x, r)?,
                _ => Estimate::of(&[haar_average_fidelity(&u_ideal, &schedule_exact_unitary(&cache, &s)?)?]),
            };
            (est, Some(est.mean), None)
        }
        Errors::GueGate | Errors::GueGateLab => {
            let frame = gue_frame(cfg.errors == Errors::GueGateLab);
            let gates = ideal_gate_unitaries(&s)?;
            let fs = match (&states, &reference) {
                (Some(x), Some(r)) => gue_gate_fidelities(&s, &gates, frame, cfg.delta, &seeds, x, r)?,
                _ => gue_gate_haar_fidelities(&s, &gates, frame, cfg.delta, &seeds, &u_ideal)?,
            };
            let est = Estimate::of(&fs);
            (est, None, Some(est))
        }
        Errors::GuePulse | Errors::GuePulseLab => {
            let frame = gue_frame(cfg.errors == Errors::GuePulseLab);
            let cache = cache();
            let ops = pulse_ops(&cache, &s)?;
            let fs = match &states {
                Some(x) => {
                    let r = exact_final(&cache, &s, x)?;
                    gue_pulse_fidelities(&s, &ops, frame, cfg.delta, &seeds, x, &r)?
                }
                None => {
                    let u_ref = schedule_exact_unitary(&cache, &s)?;
                    gue_pulse_haar_fidelities(&s, &ops, frame, cfg.delta, &seeds, &u_ref)?
                }
            };
            let est = Estimate::of(&fs);
            (est, None, Some(est))
        }
        Errors::Combined => {
            let cache = cache();
            let exact = exact_gate_unitaries(&cache, &s)?;
            let ideal = ideal_gate_unitaries(&s)?;
            let samples = match (&states, &reference) {
                (Some(x), Some(r)) => combined_fidelities(&s, &exact, &ideal, cfg.delta, &seeds, x, r)?,
                _ => combined_haar_fidelities(&s, &exact, &ideal, cfg.delta, &seeds, &u_ideal)?,
            };
            let both: Vec<f64> = samples.iter().map(|c| c.both).collect();
            let gue: Vec<f64> = samples.iter().map(|c| c.gue).collect();
            (Estimate::of(&both), samples.first().map(|c| c.intrinsic), Some(Estimate::of(&gue)))
        }
    };
    Ok(Point { fidelity, intrinsic, gue, gates: s.gates.len(), pulses: s.pulses.len() })
}

/// Closed-form regime matching the configured error sources, if fitted.
fn regime(cfg: &ExperimentConfig) -> Option<Regime> {
    match (cfg.errors, cfg.algo) {
        (Errors::Intrinsic, a) => Some(Regime::Intrinsic(a)),
        (Errors::GueGate, a) => Some(Regime::GueGateInt(a)),
        (Errors::GueGateLab, Algorithm::Qft) => Some(Regime::GueGateLab),
        (Errors::GuePulse, a) => Some(Regime::GuePulse(a)),
        (Errors::Combined, a) => Some(Regime::Combined(a)),
        _ => None,
    }
}

/// `−ln F` in the units the scaling polynomials use.
fn scaled(cfg: &ExperimentConfig, f: f64) -> Option<f64> {
    match cfg.errors {
        Errors::Intrinsic => Some(-f.ln() * cfg.ka().powi(2)),
        Errors::Combined => None,
        _ => (cfg.delta > 0.0).then(|| -f.ln() / (cfg.delta * cfg.delta)),
    }
}

fn seeds_used(cfg: &ExperimentConfig) -> Vec<u64> {
    match cfg.errors {
        Errors::Intrinsic => Vec::new(),
        _ => cfg.realization_seeds(),
    }
}

pub fn simulate(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    ctx.guard(cfg.n, MAX_N.min(MAX_SIM_N))?;
    let pt = simulate_point(cfg)?;
    let pred = regime(cfg).map(|r| ScalingModel::default().predicted_fidelity(r, cfg.n, cfg.ka(), cfg.delta));
    let body = json!({
        "gates": pt.gates,
        "pulses": pt.pulses,
        "fidelity": pt.fidelity.mean,
        "stderr": pt.fidelity.stderr,
        "infidelity": 1.0 - pt.fidelity.mean,
        "scaled": scaled(cfg, pt.fidelity.mean),
        "intrinsic_fidelity": pt.intrinsic,
        "gue_fidelity": pt.gue.map(|g| g.mean),
        "gue_stderr": pt.gue.map(|g| g.stderr),
        "predicted_fidelity": pred.map(|p| p.fidelity),
        "prediction_out_of_range": pred.map(|p| p.out_of_range),
    });
    ctx.write_json(&seeds_used(cfg), body)
}

pub fn scan(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    if cfg.values.is_empty() {
        return Err(UsageError("scan needs values".into()).into());
    }
    let key = match cfg.sweep {
        Sweep::K => "k",
        Sweep::A => "a",
        Sweep::N => "n",
        Sweep::Delta => "delta",
    };
    let model = ScalingModel::default();
    let mut text = header(ctx.command, cfg, &seeds_used(cfg));
    text += "sweep,value,algo,errors,n,k,a,ka,delta,fidelity,stderr,infidelity,scaled,intrinsic_fidelity,gue_fidelity,predicted_fidelity,prediction_in_range\n";
    for &v in &cfg.values {
        let integral = matches!(cfg.sweep, Sweep::K | Sweep::N);
        if integral && (v.fract() != 0.0 || v < 0.0) {
            return Err(UsageError(format!("{key} values must be non-negative integers, got {v}")).into());
        }
        let text_v = if integral { format!("{}", v as u64) } else { v.to_string() };
        let c = cfg.with(key, &text_v)?;
        ctx.guard(c.n, MAX_N.min(MAX_SIM_N))?;
        let pt = simulate_point(&c)?;
        let pred = regime(&c).map(|r| model.predicted_fidelity(r, c.n, c.ka(), c.delta));
        text += &format!(
            "{key},{text_v},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            c.algo,
            errors_name(c.errors),
            c.n,
            c.k,
            c.a,
            c.ka(),
            c.delta,
            pt.fidelity.mean,
            pt.fidelity.stderr,
            1.0 - pt.fidelity.mean,
            opt(scaled(&c, pt.fidelity.mean)),
            opt(pt.intrinsic),
            opt(pt.gue.map(|g| g.mean)),
            opt(pred.map(|p| p.fidelity)),
            pred.map(|p| (!p.out_of_range).to_string()).unwrap_or_default(),
        );
    }
    Ok(emit(ctx.out.as_deref(), &text)?)
}

fn errors_name(e: Errors) -> &'static str {
    match e {
        Errors::Intrinsic => "intrinsic",
        Errors::GueGate => "gue-gate",
        Errors::GueGateLab => "gue-gate-lab",
        Errors::GuePulse => "gue-pulse",
        Errors::GuePulseLab => "gue-pulse-lab",
        Errors::Combined => "combined",
    }
}

pub fn corr(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    ctx.guard(cfg.n, MAX_N)?;
    let s = schedule(cfg)?;
    let (units, generators, prefixes, spans, seeds) = match cfg.errors {
        Errors::Intrinsic => {
            let ug = intrinsic_generators(&PropagatorCache::new(&s.params), &s)?;
            let spans: Vec<(String, usize, usize)> =
                s.gates.iter().map(|g| (g.gate.to_string(), g.q_start, g.q_end)).collect();
            ("q_pulse", ug.generators, ug.prefixes, spans, Vec::new())
        }
        Errors::GueGate | Errors::GueGateLab => {
            let frame = if cfg.errors == Errors::GueGateLab {
                InsertionFrame::LabStatic
            } else {
                InsertionFrame::InteractionStatic
            };
            let (g, p) = gue_gate_generators(&s, frame, cfg.delta, cfg.seed)?;
            // one unit per insertion, in gate order; a final T gate has none
            let spans = s.gates.iter().take(g.len()).enumerate().map(|(i, g)| (g.gate.to_string(), i, i + 1)).collect();
            ("gate", g, p, spans, vec![cfg.seed])
        }
        _ => return Err(UsageError("corr supports errors = intrinsic, gue-gate or gue-gate-lab".into()).into()),
    };
    let c = correlation_matrix(&generators, &prefixes, Averaging::Trace)?;
    // generators already carry their strength
    let lr = linear_response_fidelity(&c, 1.0);
    let d = s.params.dim() as f64;
    let total = lr.running_sum.last().copied().unwrap_or(0.0);
    let matrix: Vec<Vec<f64>> = (0..c.size).map(|i| (0..c.size).map(|j| c.get(i, j)).collect()).collect();
    let spans: Vec<Value> = spans.iter().map(|(g, a, b)| json!({ "gate": g, "start": a, "end": b })).collect();
    let body = json!({
        "units": units,
        "size": c.size,
        "averaging": c.averaging,
        "gate_spans": spans,
        "running_sum": lr.running_sum,
        "trace_infidelity": total,
        "haar_infidelity": total * d / (d + 1.0),
        "off_diagonal_ratio": c.off_diagonal_ratio(),
        "warning": lr.warning,
        "matrix": matrix,
    });
    ctx.write_json(&seeds, body)
}

pub fn contour(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    if cfg.values.is_empty() {
        return Err(UsageError("contour needs values".into()).into());
    }
    if cfg.plane != Plane::KaDelta && cfg.values.iter().any(|&x| x < 2.0 || x.fract() != 0.0) {
        return Err(UsageError("qubit-count abscissae must be integers of at least 2".into()).into());
    }
    let model = ScalingModel::default();
    let c = fidelity_contour(&model, cfg.contour_plane(), cfg.f0, &cfg.values);
    let mut text = header(ctx.command, cfg, &[]);
    let (x, y) = match cfg.plane {
        Plane::KaDelta => ("delta", "ka"),
        Plane::DeltaN => ("n", "delta"),
        Plane::KaN => ("n", "ka"),
    };
    text += &format!("# plane: {x} vs {y} at F = {}\n", cfg.f0);
    if let (Some(ka), Some(dm)) = (c.ka_asymptote, c.delta_asymptote) {
        text += &format!("# ka at delta=0: qft={} iqft={}\n", ka.0, ka.1);
        text += &format!("# delta at ka=inf: qft={} iqft={}\n", dm.0, dm.1);
    }
    if cfg.plane == Plane::DeltaN {
        let m = |a| model.max_n_for_fidelity(a, cfg.ka(), 0.0, cfg.f0, 64).map(|n| n.to_string()).unwrap_or_default();
        text += &format!("# max n at delta=0: qft={} iqft={}\n", m(Algorithm::Qft), m(Algorithm::Iqft));
    }
    text += &format!("{x},{y}_qft,{y}_iqft,best,{y}_crossover\n");
    for p in &c.points {
        let best = p.best.map(|a| a.to_string()).unwrap_or_default();
        text += &format!("{},{},{},{best},{}\n", p.x, opt(p.y_qft), opt(p.y_iqft), opt(p.crossover));
    }
    Ok(emit(ctx.out.as_deref(), &text)?)
}

pub fn predict(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let model = ScalingModel::default();
    let (n, ka, delta) = (cfg.n, cfg.ka(), cfg.delta);
    let f = |r| {
        let p = model.predicted_fidelity(r, n, ka, delta);
        json!({ "fidelity": p.fidelity, "out_of_range": p.out_of_range })
    };
    let mut regimes = serde_json::Map::new();
    regimes.insert("intrinsic".into(), f(Regime::Intrinsic(cfg.algo)));
    regimes.insert("gue_gate".into(), f(Regime::GueGateInt(cfg.algo)));
    if cfg.algo == Algorithm::Qft {
        regimes.insert("gue_gate_lab".into(), f(Regime::GueGateLab));
    }
    regimes.insert("gue_pulse".into(), f(Regime::GuePulse(cfg.algo)));
    regimes.insert("combined".into(), f(Regime::Combined(cfg.algo)));
    let best = model.delta_crit(n, ka).map(|dc| if delta > dc { Algorithm::Iqft } else { Algorithm::Qft });
    let body = json!({
        "ka": ka,
        "regimes": regimes,
        "delta_crit": model.delta_crit(n, ka),
        "better_algorithm": best.map(|a| a.to_string()),
        "max_n_at_f0": model.max_n_for_fidelity(cfg.algo, ka, delta, cfg.f0, 64),
        "model": model,
    });
    ctx.write_json(&[], body)
}
