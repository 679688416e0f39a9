// Copyright 2026 The iqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Machine parameters, basis conventions and the drive-free Hamiltonian.
//!
//! Qubit `l` is bit `2^l` of the basis index, so qubit 0 is the least
//! significant bit. With `σ_z|0⟩ = |0⟩` a 0 bit carries spin `s = +1`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{IqcError, Result};

/// Ising coupling, the energy unit.
pub const J: f64 = 1.0;

/// Soft warnings raised when the selective-excitation ordering `Ω ≪ J ≪ a` is weak.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SelectivityWarning {
    /// `a/J < 10`
    WeakGradient,
    /// `J/Ω < 10` for the strongest pulse the compiler emits
    StrongDrive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub n: usize,
    pub a: f64,
    pub k: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<SelectivityWarning>,
}

impl ChainParams {
    pub fn new(n: usize, a: f64, k: u32) -> Result<Self> {
        if n < 2 {
            return Err(IqcError::InvalidParams(format!("n must be >= 2, got {n}")));
        }
        if k < 1 {
            return Err(IqcError::InvalidParams("k must be >= 1".into()));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(IqcError::InvalidParams(format!("a must be positive, got {a}")));
        }
        if n > 24 {
            return Err(IqcError::InvalidParams(format!("n = {n} exceeds the addressable register")));
        }
        let mut warnings = Vec::new();
        if a / J < 10.0 {
            warnings.push(SelectivityWarning::WeakGradient);
        }
        if J / crate::qpulse::max_rabi_frequency(k) < 10.0 {
            warnings.push(SelectivityWarning::StrongDrive);
        }
        Ok(Self { n, a, k, warnings })
    }

    /// Hilbert-space dimension `2^n`.
    pub fn dim(&self) -> usize {
        1usize << self.n
    }

    pub fn is_edge(&self, l: usize) -> bool {
        l == 0 || l + 1 == self.n
    }

    pub fn larmor_frequency(&self, l: usize) -> Result<f64> {
        if l >= self.n {
            return Err(IqcError::QubitOutOfRange { qubit: l, n: self.n });
        }
        Ok((l + 1) as f64 * self.a)
    }

    /// Diagonal of `H0 = −½Σ ω_l σ_l^z − (J/2)Σ σ_l^z σ_{l+1}^z`.
    ///
    /// Evaluated as `−(a/2)·S1 − (J/2)·S2` with integer `S1`, `S2`, so every
    /// entry is exact whenever `a` is an integer.
    pub fn static_hamiltonian_diagonal(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|b| {
                let (s1, s2) = spin_sums(b, self.n);
                -0.5 * self.a * s1 as f64 - 0.5 * J * s2 as f64
            })
            .collect()
    }

    /// Energy needed to flip qubit `l` from 0 to 1 in basis state `b`.
    pub fn flip_energy(&self, l: usize, b: usize) -> f64 {
        let w = (l + 1) as f64 * self.a;
        w + J * neighbor_spin_sum(b, l, self.n) as f64
    }
}

fn spin(b: usize, l: usize) -> i64 {
    if (b >> l) & 1 == 0 {
        1
    } else {
        -1
    }
}

fn spin_sums(b: usize, n: usize) -> (i64, i64) {
    let s1 = (0..n).map(|l| (l as i64 + 1) * spin(b, l)).sum();
    let s2 = (0..n.saturating_sub(1)).map(|l| spin(b, l) * spin(b, l + 1)).sum();
    (s1, s2)
}

/// Sum of the neighbor spins of qubit `l`.
pub fn neighbor_spin_sum(b: usize, l: usize, n: usize) -> i64 {
    let mut s = 0;
    if l > 0 {
        s += spin(b, l - 1);
    }
    if l + 1 < n {
        s += spin(b, l + 1);
    }
    s
}

#[inline]
pub fn bit(b: usize, l: usize) -> u8 {
    ((b >> l) & 1) as u8
}

/// Number of 1 bits, the eigenvalue of `Σ_l |1⟩⟨1|_l`.
#[inline]
pub fn excitations(b: usize) -> u32 {
    b.count_ones()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub amps: Vec<Complex64>,
}

impl StateVector {
    pub fn basis(n: usize, index: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let s = self.norm_sqr().sqrt();
        for z in &mut self.amps {
            *z /= s;
        }
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Normalized state with independent complex Gaussian amplitudes.
pub fn random_gaussian_state(n: usize, seed: u64) -> StateVector {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let amps = (0..1usize << n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    let mut s = StateVector { amps };
    s.normalize();
    s
}
