// Copyright 2026 The iqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Small dense helpers over `faer`.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};
use num_complex::Complex64;

use crate::error::{IqcError, Result};

pub type CMat = Mat<Complex64>;

pub fn mul(a: &CMat, b: &CMat) -> CMat {
    let mut c = CMat::zeros(a.nrows(), b.ncols());
    matmul(c.as_mut(), Accum::Replace, a.as_ref(), b.as_ref(), Complex64::new(1.0, 0.0), Par::Seq);
    c
}

pub fn adjoint(a: &CMat) -> CMat {
    a.adjoint().to_owned()
}

pub fn trace(a: &CMat) -> Complex64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

/// `max |U†U − 1|` entrywise.
pub fn unitarity_error(u: &CMat) -> f64 {
    let g = mul(&adjoint(u), u);
    let mut worst: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - Complex64::new(want, 0.0)).norm());
        }
    }
    worst
}

/// Largest singular value.
pub fn spectral_norm(a: &CMat) -> Result<f64> {
    let s = a.singular_values().map_err(|e| IqcError::Linalg(format!("{e:?}")))?;
    Ok(s.into_iter().fold(0.0, f64::max))
}

/// `‖U − e^{iχ}V‖₂` with `e^{iχ}` the phase of `Tr(V†U)`.
pub fn distance_up_to_phase(u: &CMat, v: &CMat) -> Result<f64> {
    if u.nrows() != v.nrows() || u.ncols() != v.ncols() {
        return Err(IqcError::Dimension(u.nrows(), v.nrows()));
    }
    let ov = trace(&mul(&adjoint(v), u));
    let g = if ov.norm() > 0.0 { ov / ov.norm() } else { Complex64::new(1.0, 0.0) };
    let diff = CMat::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)] - g * v[(i, j)]);
    spectral_norm(&diff)
}

/// Applies `A` to a vector.
pub fn mat_vec(a: &CMat, x: &[Complex64]) -> Vec<Complex64> {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum()).collect()
}
