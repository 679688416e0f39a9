// Copyright 2026 The iqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Exact ideal gates and algorithm unitaries.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use faer::Mat;
use num_complex::Complex64;

use crate::chain::bit;
use crate::error::Result;
use crate::gates::{algorithm_gates, b_phase, Algorithm, GateSpec};
use crate::phases::MonomialTarget;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// `(destination, amplitude)` of basis state `b` under a monomial gate.
fn monomial_action(g: &GateSpec, n: usize, b: usize) -> Option<(usize, Complex64)> {
    use GateSpec::*;
    let sign = |neg: bool| if neg { -ONE } else { ONE };
    Some(match *g {
        A { .. } => return None,
        B { i, j } => {
            let both = bit(b, i) == 1 && bit(b, j) == 1;
            (b, if both { Complex64::from_polar(1.0, b_phase(i, j)) } else { ONE })
        }
        Z { j } => (b, sign(bit(b, j) == 1)),
        N { j } => (b ^ (1 << j), ONE),
        CN { c, t } => (if bit(b, c) == 1 { b ^ (1 << t) } else { b }, ONE),
        R { i, j } => (r_dest(b, i, j), sign(bit(b, j) == 1)),
        Rdag { i, j } => {
            // inverse of the signed permutation R
            let src = r_dest(b, i, j);
            (src, sign(bit(src, j) == 1))
        }
        S { i, j } => {
            let (x, y) = (bit(b, i), bit(b, j));
            (b ^ (((x ^ y) as usize) * ((1 << i) | (1 << j))), ONE)
        }
        G { i, j } => {
            let (_, pb) = monomial_action(&B { i, j }, n, b)?;
            let (d, pr) = monomial_action(&Rdag { i, j }, n, b)?;
            (d, pr * pb)
        }
        T => (bit_reverse(b, n), ONE),
    })
}

// R flips j when i is 0; that map is an involution on basis labels.
fn r_dest(b: usize, i: usize, j: usize) -> usize {
    b ^ ((1 - bit(b, i) as usize) << j)
}

/// Applies an ideal gate to a state in place.
pub fn apply_ideal_gate(g: &GateSpec, n: usize, amps: &mut [Complex64]) {
    if let GateSpec::A { j } = *g {
        let m = 1usize << j;
        for b in 0..amps.len() {
            if b & m == 0 {
                let (u, v) = (amps[b], amps[b | m]);
                amps[b] = (u + v) * FRAC_1_SQRT_2;
                amps[b | m] = (u - v) * FRAC_1_SQRT_2;
            }
        }
        return;
    }
    let src = amps.to_vec();
    for (b, a) in src.into_iter().enumerate() {
        let (d, ph) = monomial_action(g, n, b).expect("monomial gate");
        amps[d] = ph * a;
    }
}

/// Dense ideal gate on `n` qubits.
pub fn ideal_gate_matrix(g: &GateSpec, n: usize) -> Result<Mat<Complex64>> {
    g.validate(n)?;
    let d = 1usize << n;
    let mut u = Mat::<Complex64>::zeros(d, d);
    let mut col = vec![Complex64::new(0.0, 0.0); d];
    for b in 0..d {
        col.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        col[b] = ONE;
        apply_ideal_gate(g, n, &mut col);
        for (i, z) in col.iter().enumerate() {
            u[(i, b)] = *z;
        }
    }
    Ok(u)
}

/// Monomial form of a permutation-with-phases gate, `None` for `A`.
pub fn monomial_target(g: &GateSpec, n: usize) -> Option<MonomialTarget> {
    let (dest, amp) =
        (0..1usize << n).map(|b| monomial_action(g, n, b)).collect::<Option<Vec<_>>>()?.into_iter().unzip();
    Some(MonomialTarget { dest, amp })
}

/// Total ideal unitary of an algorithm.
pub fn ideal_algorithm_unitary(algo: Algorithm, n: usize) -> Mat<Complex64> {
    ideal_prefixes(algo, n).pop().unwrap_or_else(|| Mat::identity(1 << n, 1 << n))
}

/// `U(t) = U_t ⋯ U_1` after each gate of the algorithm.
pub fn ideal_prefixes(algo: Algorithm, n: usize) -> Vec<Mat<Complex64>> {
    let d = 1usize << n;
    let mut cols: Vec<Vec<Complex64>> = (0..d)
        .map(|b| {
            let mut v = vec![Complex64::new(0.0, 0.0); d];
            v[b] = ONE;
            v
        })
        .collect();
    algorithm_gates(algo, n)
        .iter()
        .map(|g| {
            for c in &mut cols {
                apply_ideal_gate(g, n, c);
            }
            Mat::from_fn(d, d, |i, j| cols[j][i])
        })
        .collect()
}

/// Applies the whole ideal algorithm to a state.
pub fn apply_ideal_algorithm(algo: Algorithm, n: usize, amps: &mut [Complex64]) {
    for g in algorithm_gates(algo, n) {
        apply_ideal_gate(&g, n, amps);
    }
}

/// Unitary DFT, `F_{xy} = e^{2πi xy/d}/√d`.
pub fn dft_matrix(n: usize) -> Mat<Complex64> {
    let d = 1usize << n;
    let s = 1.0 / (d as f64).sqrt();
    Mat::from_fn(d, d, |x, y| Complex64::from_polar(s, 2.0 * PI * ((x * y) % d) as f64 / d as f64))
}

/// Basis-index permutation that reverses the qubit order.
pub fn bit_reverse(b: usize, n: usize) -> usize {
    (0..n).fold(0, |acc, l| acc | ((bit(b, l) as usize) << (n - 1 - l)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r_then_rdag_is_identity() {
        for (i, j) in [(0, 1), (1, 0), (0, 2), (2, 1)] {
            let mut v: Vec<Complex64> = (0..8).map(|b| Complex64::new(b as f64, 1.0)).collect();
            let w = v.clone();
            apply_ideal_gate(&GateSpec::R { i, j }, 3, &mut v);
            apply_ideal_gate(&GateSpec::Rdag { i, j }, 3, &mut v);
            assert_eq!(v, w);
        }
    }

    #[test]
    fn r_matches_its_definition() {
        // a_i = 0, b_j = 0 → target 1, sign +; a_i = 1, b_j = 1 → target stays 1, sign −
        let t = monomial_target(&GateSpec::R { i: 0, j: 1 }, 2).unwrap();
        assert_eq!((t.dest[0b00], t.amp[0b00]), (0b10, ONE));
        assert_eq!((t.dest[0b11], t.amp[0b11]), (0b11, -ONE));
    }

    #[test]
    fn b02_phase_on_101() {
        let u = ideal_gate_matrix(&GateSpec::B { i: 0, j: 2 }, 3).unwrap();
        let z = u[(0b101, 0b101)];
        assert!((z - Complex64::from_polar(1.0, PI / 4.0)).norm() < 1e-15);
        assert_eq!(u[(0b011, 0b011)], ONE);
    }
}
