// Copyright 2026 The iqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Generalized 2πk Q-pulses: angle set, pulse shapes, the correcting-pulse
//! phase and the two-level (near-resonant) block model.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{bit, ChainParams, J};
use crate::clock::Clock;
use crate::error::{IqcError, Result};

pub type Block = [[Complex64; 2]; 2];

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

pub const IDENTITY_BLOCK: Block = [[ONE, ZERO], [ZERO, ONE]];

/// Rotation fraction: a `ρπ` rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rho {
    Full,
    Half,
}

impl Rho {
    pub fn value(self) -> f64 {
        match self {
            Rho::Full => 1.0,
            Rho::Half => 0.5,
        }
    }

    /// `k_1 = k`, `k_{1/2} = 2k`.
    pub fn k_rho(self, k: u32) -> u32 {
        match self {
            Rho::Full => k,
            Rho::Half => 2 * k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleSet {
    pub theta: f64,
    pub alpha: f64,
    pub big_theta: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Phase `θ = π√(k_ρ² − ρ²/4)` picked up by an off-resonant transition.
pub fn theta(k_rho: u32, rho: f64) -> f64 {
    let k = k_rho as f64;
    PI * (k * k - rho * rho / 4.0).sqrt()
}

/// Angles of the generalized 2πk method.
///
/// `tan β` carries a factor `ρ`: the correcting pulse rotates the
/// intermediate class by `2(π+β)`, and only with `ρπ` in the numerator does
/// that rotation cancel the residual of a `ρπ` main pulse.
pub fn angle_set(k_rho: u32, rho: f64) -> Result<AngleSet> {
    let k = k_rho as f64;
    if k_rho < 1 || !(rho > 0.0 && rho <= 1.0) {
        return Err(IqcError::AngleDomain { k_rho, rho });
    }
    let theta = theta(k_rho, rho);
    let alpha = 0.5 * PI * (k * k + 0.75 * rho * rho).sqrt();
    let big_theta = (-(theta / (2.0 * alpha)) * alpha.tan()).atan();
    let beta = (-(rho * PI / (2.0 * alpha)) * alpha.tan() * big_theta.cos()).atan();
    let g2 = (PI * k).powi(2) - (PI + beta).powi(2);
    if g2 < 0.0 {
        return Err(IqcError::AngleDomain { k_rho, rho });
    }
    Ok(AngleSet { theta, alpha, big_theta, beta, gamma: g2.sqrt() })
}

/// Neighbor configuration of the addressed qubit: `Pair` is `(a, c)` for the
/// neighbors `i+1` and `i−1`, `Single` is the lone neighbor of an edge qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NeighborConfig {
    Pair(u8, u8),
    Single(u8),
}

/// Shape class: detuning of the addressed transition relative to `ω_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum ShapeClass {
    InteriorLow,
    InteriorMid,
    InteriorHigh,
    EdgeLow,
    EdgeHigh,
}

impl NeighborConfig {
    /// Configuration seen by qubit `l` in basis state `b`.
    pub fn of_state(b: usize, l: usize, n: usize) -> Self {
        if l == 0 {
            NeighborConfig::Single(bit(b, 1))
        } else if l + 1 == n {
            NeighborConfig::Single(bit(b, l - 1))
        } else {
            NeighborConfig::Pair(bit(b, l + 1), bit(b, l - 1))
        }
    }

    /// Whether a pulse addressing `self` is resonant with configuration `other`.
    pub fn matches(self, other: NeighborConfig) -> bool {
        match (self, other) {
            (NeighborConfig::Pair(a, c), NeighborConfig::Pair(x, y)) => a + c == x + y,
            (NeighborConfig::Single(a), NeighborConfig::Single(x)) => a == x,
            _ => false,
        }
    }

    fn class(self) -> ShapeClass {
        match self {
            NeighborConfig::Pair(a, c) => match a + c {
                0 => ShapeClass::InteriorLow,
                1 => ShapeClass::InteriorMid,
                _ => ShapeClass::InteriorHigh,
            },
            NeighborConfig::Single(0) => ShapeClass::EdgeLow,
            NeighborConfig::Single(_) => ShapeClass::EdgeHigh,
        }
    }

    /// `ν − ω_i` for a pulse resonant with this configuration.
    pub fn detuning_offset(self) -> f64 {
        match self.class() {
            ShapeClass::InteriorLow => 2.0 * J,
            ShapeClass::InteriorMid => 0.0,
            ShapeClass::InteriorHigh => -2.0 * J,
            ShapeClass::EdgeLow => J,
            ShapeClass::EdgeHigh => -J,
        }
    }

    pub fn check(self, qubit: usize, n: usize) -> Result<()> {
        let edge = qubit == 0 || qubit + 1 == n;
        let ok = match self {
            NeighborConfig::Pair(a, c) => !edge && a <= 1 && c <= 1,
            NeighborConfig::Single(a) => edge && a <= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(IqcError::InvalidConfig { qubit, config: self.to_string() })
        }
    }
}

impl fmt::Display for NeighborConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NeighborConfig::Pair(a, c) => write!(f, "{a}{c}"),
            NeighborConfig::Single(a) => write!(f, "{a}"),
        }
    }
}

impl FromStr for NeighborConfig {
    type Err = IqcError;

    fn from_str(s: &str) -> Result<Self> {
        let d: Vec<u8> = s.bytes().map(|c| c.wrapping_sub(b'0')).collect();
        match d.as_slice() {
            [a] if *a <= 1 => Ok(NeighborConfig::Single(*a)),
            [a, c] if *a <= 1 && *c <= 1 => Ok(NeighborConfig::Pair(*a, *c)),
            _ => Err(IqcError::InvalidConfig { qubit: usize::MAX, config: s.into() }),
        }
    }
}

/// One rectangular pulse of a Q-pulse, relative to the addressed qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawShape {
    /// `ν − ω_i`
    pub offset: f64,
    pub omega: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QPulseShape {
    pub main: RawShape,
    /// Correcting `P^{10}` pulse that follows the main pulse (interior 00/11).
    pub correction: Option<RawShape>,
    /// Rotation half-angle `π+β` of the correcting pulse.
    pub correction_half_angle: f64,
}

impl QPulseShape {
    pub fn new(config: NeighborConfig, rho: Rho, k: u32) -> Result<Self> {
        let r = rho.value();
        let kr = rho.k_rho(k) as f64;
        let single = |delta: f64| {
            let omega = r * delta / (4.0 * kr * kr - r * r).sqrt();
            RawShape { offset: config.detuning_offset(), omega, tau: r * PI / omega }
        };
        match config.class() {
            ShapeClass::InteriorMid | ShapeClass::EdgeLow | ShapeClass::EdgeHigh => {
                Ok(Self { main: single(2.0 * J), correction: None, correction_half_angle: 0.0 })
            }
            ShapeClass::InteriorLow | ShapeClass::InteriorHigh => {
                let angles = angle_set(rho.k_rho(k), r)?;
                let half = PI + angles.beta;
                let correction = RawShape { offset: 0.0, omega: 2.0 * half / angles.gamma, tau: angles.gamma };
                Ok(Self { main: single(4.0 * J), correction: Some(correction), correction_half_angle: half })
            }
        }
    }

    pub fn pulse_count(&self) -> usize {
        1 + self.correction.is_some() as usize
    }

    pub fn duration(&self) -> f64 {
        self.main.tau + self.correction.map_or(0.0, |c| c.tau)
    }
}

/// Largest Rabi frequency used by any Q-pulse at this `k`.
pub fn max_rabi_frequency(k: u32) -> f64 {
    let mut m: f64 = 0.0;
    for rho in [Rho::Full, Rho::Half] {
        for cfg in [NeighborConfig::Pair(0, 0), NeighborConfig::Pair(1, 0), NeighborConfig::Single(0)] {
            if let Ok(s) = QPulseShape::new(cfg, rho, k) {
                m = m.max(s.main.omega);
                if let Some(c) = s.correction {
                    m = m.max(c.omega);
                }
            }
        }
    }
    m
}

/// Interaction-frame two-level propagator of one pulse, basis `(|0⟩, |1⟩)`
/// of the flipped qubit, for detuning `Δ = ν − (E_1 − E_0)`.
pub fn pulse_block(omega: f64, delta: f64, phi: f64, tau: f64, t0: Clock) -> Block {
    let w = 0.5 * (omega * omega + delta * delta).sqrt();
    let (s, c) = (w * tau).sin_cos();
    let sw = if w > 0.0 { s / w } else { tau };
    let e_phi = Complex64::from_polar(1.0, phi);
    // E = cos(wτ) − i sin(wτ)/w · H'
    let h00 = Complex64::new(0.5 * delta, 0.0);
    let h01 = -0.5 * omega * e_phi;
    let h10 = -0.5 * omega * e_phi.conj();
    let e = [[c - I * sw * h00, -I * sw * h01], [-I * sw * h10, c + I * sw * h00]];
    if delta == 0.0 {
        return e;
    }
    // R(t) = diag(e^{iΔt/2}, e^{−iΔt/2}); U = R(t0+τ) E R(t0)†
    let p1 = Complex64::from_polar(1.0, t0.advanced(tau).phase(0.5 * delta));
    let p0 = Complex64::from_polar(1.0, t0.phase(0.5 * delta));
    [[p1 * e[0][0] * p0.conj(), p1 * e[0][1] * p0], [p1.conj() * e[1][0] * p0.conj(), p1.conj() * e[1][1] * p0]]
}

pub fn block_mul(a: &Block, b: &Block) -> Block {
    let mut r = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

/// Phase of the correcting pulse that makes the intermediate-class block of
/// (correction · main) diagonal, and the modulus mismatch of that solution.
pub fn correction_phase(shape: &QPulseShape, phi_main: f64, t_main: Clock) -> (f64, f64) {
    let m = pulse_block(shape.main.omega, shape.main.offset, phi_main, shape.main.tau, t_main);
    let (s, c) = shape.correction_half_angle.sin_cos();
    // (R_c M)_{10} = i S e^{−iφ_c} m00 + C m10 = 0
    let z = I * (c / s) * (m[1][0] / m[0][0]);
    (-z.arg(), (z.norm() - 1.0).abs())
}

/// A Q-pulse request: conditional `ρπ` rotation of `qubit` about the axis `phase`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QPulse {
    pub qubit: usize,
    pub config: NeighborConfig,
    pub rho: Rho,
    pub phase: f64,
}

/// Concrete pulse parameters (drive frequency, Rabi frequency, phase, duration).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseParams {
    pub nu: f64,
    pub omega: f64,
    pub phi: f64,
    pub tau: f64,
}

/// Realizes a Q-pulse starting at `t0` as one or two pulses.
pub fn realize(p: &ChainParams, q: &QPulse, t0: Clock) -> Result<Vec<PulseParams>> {
    q.config.check(q.qubit, p.n)?;
    let shape = QPulseShape::new(q.config, q.rho, p.k)?;
    let w = p.larmor_frequency(q.qubit)?;
    let mut out =
        vec![PulseParams { nu: w + shape.main.offset, omega: shape.main.omega, phi: q.phase, tau: shape.main.tau }];
    if let Some(c) = shape.correction {
        let (phi_c, _) = correction_phase(&shape, q.phase, t0);
        out.push(PulseParams { nu: w + c.offset, omega: c.omega, phi: phi_c, tau: c.tau });
    }
    Ok(out)
}

/// Near-resonant block model of one pulse on qubit `x`: the 2×2 block for
/// every basis state `b` with bit `x` clear (indexed by `b`).
pub fn pulse_blocks(p: &ChainParams, x: usize, pulse: &PulseParams, t0: Clock) -> Vec<Block> {
    let mut cache: Vec<(f64, Block)> = Vec::with_capacity(3);
    (0..p.dim())
        .map(|b| {
            if bit(b, x) == 1 {
                return IDENTITY_BLOCK;
            }
            let delta = pulse.nu - p.flip_energy(x, b);
            if let Some((_, blk)) = cache.iter().find(|(d, _)| *d == delta) {
                return *blk;
            }
            let blk = pulse_block(pulse.omega, delta, pulse.phi, pulse.tau, t0);
            cache.push((delta, blk));
            blk
        })
        .collect()
}

/// Block model of a whole Q-pulse started at `t0`: the product of its raw
/// pulses' blocks, indexed like [`pulse_blocks`].
pub fn q_pulse_blocks(p: &ChainParams, q: &QPulse, t0: Clock) -> Result<Vec<Block>> {
    let mut t = t0;
    let mut acc: Option<Vec<Block>> = None;
    for raw in realize(p, q, t0)? {
        let blocks = pulse_blocks(p, q.qubit, &raw, t);
        acc = Some(match acc {
            None => blocks,
            Some(prev) => blocks.iter().zip(&prev).map(|(b, a)| block_mul(b, a)).collect(),
        });
        t = t.advanced(raw.tau);
    }
    Ok(acc.unwrap_or_default())
}

/// Applies per-basis blocks acting on qubit `x` to a state in place.
pub fn apply_blocks(x: usize, blocks: &[Block], amps: &mut [Complex64]) {
    let m = 1usize << x;
    for b in 0..amps.len() {
        if b & m != 0 {
            continue;
        }
        let blk = &blocks[b];
        let (u, v) = (amps[b], amps[b | m]);
        amps[b] = blk[0][0] * u + blk[0][1] * v;
        amps[b | m] = blk[1][0] * u + blk[1][1] * v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_identity_holds() {
        assert!(angle_set(1, 1.0).is_err());
        for k in [2u32, 7, 128, 1024] {
            for rho in [1.0, 0.5] {
                let a = angle_set(k, rho).unwrap();
                let lhs = a.gamma.powi(2) + (PI + a.beta).powi(2);
                assert!((lhs - (PI * k as f64).powi(2)).abs() < 1e-9 * lhs);
            }
        }
        assert!((theta(1, 1.0) - 2.7207).abs() < 1e-4);
    }

    #[test]
    fn single_pulse_shape_is_2pik_for_near_resonant_classes() {
        for k in [1u32, 5, 64] {
            for rho in [Rho::Full, Rho::Half] {
                let s = QPulseShape::new(NeighborConfig::Pair(1, 0), rho, k).unwrap();
                let turns = (s.main.omega.powi(2) + 4.0).sqrt() * s.main.tau / (2.0 * PI);
                assert!((turns - rho.k_rho(k) as f64).abs() < 1e-9);
                assert!((s.main.omega * s.main.tau - rho.value() * PI).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn config_parsing_round_trips() {
        for s in ["00", "01", "10", "11", "0", "1"] {
            assert_eq!(s.parse::<NeighborConfig>().unwrap().to_string(), s);
        }
        assert!("2".parse::<NeighborConfig>().is_err());
        assert!("010".parse::<NeighborConfig>().is_err());
    }
}
