// Copyright 2026 The iqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Exact phase solver for Q-pulse sequences.
//!
//! In the block model every ρ=1 Q-pulse maps basis states to basis states
//! times a unit phase. Its axis phase `φ` enters covariantly: the `0→1`
//! amplitude of the addressed qubit picks up `e^{−iφ}` and the `1→0`
//! amplitude `e^{+iφ}`. Tracking each basis state through a sequence therefore
//! gives the final phases as integer-linear forms in the free `φ`s, and
//! matching a monomial target gate becomes a linear system over the integers
//! modulo 2π.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;

use crate::chain::ChainParams;
use crate::clock::Clock;
use crate::error::{IqcError, Result};
use crate::qpulse::{apply_blocks, q_pulse_blocks, NeighborConfig, QPulse, Rho};

const TWO_PI: f64 = 2.0 * PI;
const MONOMIAL_TOL: f64 = 1e-9;

/// Phase of one Q-pulse in a template: known, or the index of an unknown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slot {
    Fixed(f64),
    Free(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemplatePulse {
    pub qubit: usize,
    pub config: NeighborConfig,
    pub rho: Rho,
    pub slot: Slot,
}

/// Monomial target: source basis state `b` goes to `dest[b]` with amplitude `amp[b]`.
#[derive(Debug, Clone)]
pub struct MonomialTarget {
    pub dest: Vec<usize>,
    pub amp: Vec<Complex64>,
}

fn wrap(x: f64) -> f64 {
    x - (x / TWO_PI).round() * TWO_PI
}

/// Column action of a Q-pulse at `φ = 0`.
fn q_monomial(p: &ChainParams, tp: &TemplatePulse) -> Result<Vec<(usize, Complex64)>> {
    let q = QPulse { qubit: tp.qubit, config: tp.config, rho: tp.rho, phase: 0.0 };
    let blocks = q_pulse_blocks(p, &q, Clock::ZERO)?;
    let m = 1usize << tp.qubit;
    let mut out = Vec::with_capacity(p.dim());
    for b in 0..p.dim() {
        let lo = b & !m;
        let blk = &blocks[lo];
        let col = if b & m == 0 { 0 } else { 1 };
        let cands = [(lo, blk[0][col]), (lo | m, blk[1][col])];
        let big: Vec<_> = cands.iter().filter(|(_, a)| a.norm() > MONOMIAL_TOL).collect();
        if big.len() != 1 || (big[0].1.norm() - 1.0).abs() > MONOMIAL_TOL {
            return Err(IqcError::Calibration {
                what: format!("Q-pulse on qubit {} config {} is not monomial", tp.qubit, tp.config),
                residual: cands.iter().map(|c| c.1.norm()).fold(0.0, f64::max),
            });
        }
        out.push(*big[0]);
    }
    Ok(out)
}

/// Solves for the free phases so the sequence (time order) equals `target`
/// up to a global phase. Unknowns not fixed by the system are set to 0.
pub fn solve_sequence(p: &ChainParams, seq: &[TemplatePulse], target: &MonomialTarget) -> Result<Vec<f64>> {
    let nv = seq
        .iter()
        .filter_map(|t| match t.slot {
            Slot::Free(i) => Some(i + 1),
            Slot::Fixed(_) => None,
        })
        .max()
        .unwrap_or(0);
    let d = p.dim();
    let mut cur: Vec<usize> = (0..d).collect();
    let mut phase = vec![0.0f64; d];
    let mut coef = vec![vec![0i64; nv + 1]; d];
    for tp in seq {
        let mono = q_monomial(p, tp)?;
        let m = 1usize << tp.qubit;
        for b in 0..d {
            let (dst, amp) = mono[cur[b]];
            phase[b] += amp.arg();
            if dst != cur[b] {
                let sign = if dst & m != 0 { -1 } else { 1 };
                match tp.slot {
                    Slot::Fixed(v) => phase[b] += sign as f64 * v,
                    Slot::Free(i) => coef[b][i] += sign,
                }
            }
            cur[b] = dst;
        }
    }
    let mut rhs = Vec::with_capacity(d);
    for b in 0..d {
        if cur[b] != target.dest[b] {
            return Err(IqcError::Calibration {
                what: format!("sequence maps basis {b} to {} instead of {}", cur[b], target.dest[b]),
                residual: 1.0,
            });
        }
        // global phase χ enters with coefficient −1
        coef[b][nv] = -1;
        rhs.push(wrap(target.amp[b].arg() - phase[b]));
    }
    let x = solve_mod_2pi(coef, rhs)?;
    let phases: Vec<f64> = seq
        .iter()
        .map(|t| match t.slot {
            Slot::Fixed(v) => v,
            Slot::Free(i) => wrap(x[i]),
        })
        .collect();
    let res = sequence_residual(p, seq, &phases, target)?;
    if res > 1e-8 {
        return Err(IqcError::Calibration { what: "phase solution does not reproduce target".into(), residual: res });
    }
    Ok(phases)
}

/// Integer elimination of `M x ≡ c (mod 2π)`.
fn solve_mod_2pi(mut m: Vec<Vec<i64>>, mut c: Vec<f64>) -> Result<Vec<f64>> {
    let rows = m.len();
    let nv = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..nv {
        loop {
            let Some(i) = (r..rows).filter(|&i| m[i][col] != 0).min_by_key(|&i| m[i][col].abs()) else {
                break;
            };
            m.swap(r, i);
            c.swap(r, i);
            if m[r][col] < 0 {
                m[r].iter_mut().for_each(|v| *v = -*v);
                c[r] = -c[r];
            }
            let mut done = true;
            for i2 in r + 1..rows {
                if m[i2][col] != 0 {
                    let q = m[i2][col].div_euclid(m[r][col]);
                    for j in 0..nv {
                        m[i2][j] -= q * m[r][j];
                    }
                    c[i2] -= q as f64 * c[r];
                    if m[i2][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if r < rows && m[r][col] != 0 {
            pivots.push((r, col));
            r += 1;
        }
    }
    for (i, ci) in c.iter().enumerate().skip(r) {
        debug_assert!(m[i].iter().all(|&v| v == 0));
        let e = wrap(*ci);
        if e.abs() > 1e-8 {
            return Err(IqcError::Calibration { what: "inconsistent phase equations".into(), residual: e.abs() });
        }
    }
    let mut x = vec![0.0; nv];
    for &(ri, col) in pivots.iter().rev() {
        let s: f64 = c[ri] - (col + 1..nv).map(|j| m[ri][j] as f64 * x[j]).sum::<f64>();
        x[col] = s / m[ri][col] as f64;
    }
    Ok(x)
}

/// Max entrywise distance between the block-model sequence and the target,
/// after removing the best global phase.
pub fn sequence_residual(
    p: &ChainParams,
    seq: &[TemplatePulse],
    phases: &[f64],
    target: &MonomialTarget,
) -> Result<f64> {
    let d = p.dim();
    let mut cols: Vec<Vec<Complex64>> = (0..d)
        .map(|b| {
            let mut v = vec![Complex64::new(0.0, 0.0); d];
            v[b] = Complex64::new(1.0, 0.0);
            v
        })
        .collect();
    for (tp, &phi) in seq.iter().zip(phases) {
        let q = QPulse { qubit: tp.qubit, config: tp.config, rho: tp.rho, phase: phi };
        let blocks = q_pulse_blocks(p, &q, Clock::ZERO)?;
        for v in &mut cols {
            apply_blocks(tp.qubit, &blocks, v);
        }
    }
    let mut ov = Complex64::new(0.0, 0.0);
    for b in 0..d {
        ov += target.amp[b].conj() * cols[b][target.dest[b]];
    }
    let g = ov / ov.norm();
    let mut worst: f64 = 0.0;
    for b in 0..d {
        for (i, z) in cols[b].iter().enumerate() {
            let want = if i == target.dest[b] { g * target.amp[b] } else { Complex64::new(0.0, 0.0) };
            worst = worst.max((z - want).norm());
        }
    }
    Ok(worst)
}

type CacheMap = HashMap<String, Arc<Vec<f64>>>;

fn cache() -> &'static RwLock<CacheMap> {
    static CACHE: OnceLock<RwLock<CacheMap>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Memoized [`solve_sequence`]; `key` must identify the template, geometry and `k`.
pub fn solve_cached(
    key: String,
    p: &ChainParams,
    seq: &[TemplatePulse],
    target: &MonomialTarget,
) -> Result<Arc<Vec<f64>>> {
    if let Some(v) = cache().read().unwrap().get(&key) {
        return Ok(v.clone());
    }
    let v = Arc::new(solve_sequence(p, seq, target)?);
    Ok(cache().write().unwrap().entry(key).or_insert(v).clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elimination_handles_non_unit_pivots() {
        // 2x ≡ 1, x + y ≡ 0.5
        let x = solve_mod_2pi(vec![vec![2, 0], vec![1, 1]], vec![1.0, 0.5]).unwrap();
        assert!(wrap(2.0 * x[0] - 1.0).abs() < 1e-12);
        assert!(wrap(x[0] + x[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn inconsistent_system_is_reported() {
        let r = solve_mod_2pi(vec![vec![1], vec![1]], vec![0.0, 1.0]);
        assert!(matches!(r, Err(IqcError::Calibration { .. })));
    }

    #[test]
    fn single_qubit_not_is_solved() {
        let p = ChainParams::new(2, 1000.0, 8).unwrap();
        let seq: Vec<_> = [NeighborConfig::Single(1), NeighborConfig::Single(0)]
            .iter()
            .enumerate()
            .map(|(m, &config)| TemplatePulse { qubit: 0, config, rho: Rho::Full, slot: Slot::Free(m) })
            .collect();
        let target = MonomialTarget { dest: (0..4).map(|b| b ^ 1).collect(), amp: vec![Complex64::new(1.0, 0.0); 4] };
        let phases = solve_sequence(&p, &seq, &target).unwrap();
        assert!(sequence_residual(&p, &seq, &phases, &target).unwrap() < 1e-10);
    }
}
