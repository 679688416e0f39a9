// Copyright 2026 The iqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Fidelity, perturbation generators, correlation sums, scaling fits and the
//! closed-form fidelity predictors built on them.

use std::f64::consts::PI;

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{StateVector, J};
use crate::error::{IqcError, Result};
use crate::gates::Algorithm;
use crate::linalg::{adjoint, mul, trace, CMat};

/// `|⟨ψ_δ|ψ⟩|²`.
pub fn fidelity(psi: &StateVector, psi_delta: &StateVector) -> Result<f64> {
    if psi.dim() != psi_delta.dim() {
        return Err(IqcError::Dimension(psi.dim(), psi_delta.dim()));
    }
    Ok(psi_delta.inner(psi).norm_sqr())
}

/// Column-wise fidelities of two state batches.
pub fn batch_fidelities(x: &CMat, y: &CMat) -> Result<Vec<f64>> {
    if x.nrows() != y.nrows() || x.ncols() != y.ncols() {
        return Err(IqcError::Dimension(x.nrows(), y.nrows()));
    }
    Ok((0..x.ncols())
        .map(|j| (0..x.nrows()).map(|i| x[(i, j)].conj() * y[(i, j)]).sum::<Complex64>().norm_sqr())
        .collect())
}

/// Fidelity averaged over Haar-random pure states, `(d + |Tr M|²)/(d(d+1))`
/// with `M = U_ideal† U_perturbed`.
pub fn haar_average_fidelity(u_ideal: &CMat, u_perturbed: &CMat) -> Result<f64> {
    if u_ideal.nrows() != u_perturbed.nrows() {
        return Err(IqcError::Dimension(u_ideal.nrows(), u_perturbed.nrows()));
    }
    let d = u_ideal.nrows() as f64;
    let tr = trace(&mul(&adjoint(u_ideal), u_perturbed));
    Ok((d + tr.norm_sqr()) / (d * (d + 1.0)))
}

/// Mean and standard error of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

impl Estimate {
    pub fn of(xs: &[f64]) -> Self {
        let m = xs.len();
        let mean = xs.iter().sum::<f64>() / m.max(1) as f64;
        let var = if m > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64 } else { 0.0 };
        Self { mean, stderr: (var / m.max(1) as f64).sqrt(), count: m }
    }
}

/// Largest eigenphase magnitude accepted by [`extract_generator`].
pub const BRANCH_CUT_MARGIN: f64 = 1e-3;

/// Hermitian `G` with `exp(−iG) U_ideal = U_perturbed`, principal branch.
///
/// Uses the Cayley transform `K = −i(1+M)⁻¹(1−M)` of `M = U_perturbed U_ideal†`,
/// whose eigenvalues are `tan(g/2)` for the eigenphases `g` of `G`.
pub fn extract_generator(u_ideal: &CMat, u_perturbed: &CMat) -> Result<CMat> {
    let d = u_ideal.nrows();
    if u_perturbed.nrows() != d || u_ideal.ncols() != d || u_perturbed.ncols() != d {
        return Err(IqcError::Dimension(d, u_perturbed.nrows()));
    }
    let m = mul(u_perturbed, &adjoint(u_ideal));
    let plus = Mat::from_fn(d, d, |i, j| if i == j { Complex64::new(1.0, 0.0) + m[(i, j)] } else { m[(i, j)] });
    let minus = Mat::from_fn(d, d, |i, j| if i == j { Complex64::new(1.0, 0.0) - m[(i, j)] } else { -m[(i, j)] });
    let lu = plus.full_piv_lu();
    let k = faer::linalg::solvers::Solve::solve(&lu, &minus);
    if k.col_iter().flat_map(|c| c.iter().copied().collect::<Vec<_>>()).any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(IqcError::BranchCut(PI));
    }
    let mi = Complex64::new(0.0, -1.0);
    let herm = Mat::from_fn(d, d, |i, j| 0.5 * (mi * k[(i, j)] + (mi * k[(j, i)]).conj()));
    let eig = herm.self_adjoint_eigen(Side::Lower).map_err(|e| IqcError::Linalg(format!("{e:?}")))?;
    let q = eig.U();
    let mut g = Vec::with_capacity(d);
    for i in 0..d {
        let phase = 2.0 * eig.S()[i].re.atan();
        if phase.abs() > PI - BRANCH_CUT_MARGIN {
            return Err(IqcError::BranchCut(phase));
        }
        g.push(phase);
    }
    let scaled = Mat::from_fn(d, d, |i, k| q[(i, k)] * g[k]);
    let out = mul(&scaled, &q.adjoint().to_owned());
    Ok(Mat::from_fn(d, d, |i, j| 0.5 * (out[(i, j)] + out[(j, i)].conj())))
}

/// How expectation values in the correlation function are taken.
#[derive(Debug, Clone, Copy)]
pub enum Averaging<'a> {
    /// `⟨X⟩ = Tr X / dim`.
    Trace,
    /// Mean over the given states of the per-state connected correlation.
    States(&'a [StateVector]),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub size: usize,
    /// Row-major `C(t1, t2)`.
    pub c: Vec<f64>,
    pub averaging: String,
}

impl CorrelationMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.c[i * self.size + j]
    }

    pub fn total(&self) -> f64 {
        self.c.iter().sum()
    }

    /// `S(t) = Σ_{t1,t2 ≤ t} C(t1, t2)` for every `t`.
    pub fn running_sum(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.size);
        let mut s = 0.0;
        for t in 0..self.size {
            s += self.get(t, t) + 2.0 * (0..t).map(|u| self.get(u, t)).sum::<f64>();
            out.push(s);
        }
        out
    }

    /// Sum of `|C|` off the diagonal over the sum on it.
    pub fn off_diagonal_ratio(&self) -> f64 {
        let diag: f64 = (0..self.size).map(|i| self.get(i, i).abs()).sum();
        let all: f64 = self.c.iter().map(|x| x.abs()).sum();
        if diag > 0.0 {
            (all - diag) / diag
        } else {
            0.0
        }
    }
}

/// Connected correlation `C(t1,t2) = ⟨A_{t1} A_{t2}⟩ − ⟨A_{t1}⟩⟨A_{t2}⟩` of the
/// Heisenberg-propagated generators `A_t = U†(t) G_t U(t)`, where `prefixes[t]`
/// is the ideal evolution through unit `t` inclusive.
pub fn correlation_matrix(generators: &[CMat], prefixes: &[CMat], averaging: Averaging) -> Result<CorrelationMatrix> {
    let size = generators.len();
    if prefixes.len() != size {
        return Err(IqcError::Dimension(size, prefixes.len()));
    }
    if size == 0 {
        let tag = match averaging {
            Averaging::Trace => "trace",
            Averaging::States(_) => "states",
        };
        return Ok(CorrelationMatrix { size, c: vec![], averaging: tag.into() });
    }
    let d = generators[0].nrows();
    let heis: Vec<CMat> = generators.iter().zip(prefixes).map(|(g, u)| mul(&adjoint(u), &mul(g, u))).collect();
    let mut c = vec![0.0; size * size];
    match averaging {
        Averaging::Trace => {
            // Tr(A_i A_j) = Σ A_i[a,b] conj(A_j[a,b]) for Hermitian A_j.
            let flat = Mat::from_fn(size, d * d, |t, k| heis[t][(k / d, k % d)]);
            let gram = gram(&flat);
            let means: Vec<f64> = heis.iter().map(|a| trace(a).re / d as f64).collect();
            for i in 0..size {
                for j in 0..size {
                    c[i * size + j] = gram[(i, j)].re / d as f64 - means[i] * means[j];
                }
            }
        }
        Averaging::States(states) => {
            for psi in states {
                if psi.dim() != d {
                    return Err(IqcError::Dimension(psi.dim(), d));
                }
                let x = Mat::from_fn(d, 1, |i, _| psi.amps[i]);
                // rows: (A_t ψ)ᵀ
                let mut ax = Mat::<Complex64>::zeros(size, d);
                let mut means = vec![0.0; size];
                for (t, a) in heis.iter().enumerate() {
                    let v = mul(a, &x);
                    means[t] = (0..d).map(|i| psi.amps[i].conj() * v[(i, 0)]).sum::<Complex64>().re;
                    for i in 0..d {
                        ax[(t, i)] = v[(i, 0)];
                    }
                }
                let gm = gram(&ax);
                for i in 0..size {
                    for j in 0..size {
                        c[i * size + j] += gm[(i, j)].re - means[i] * means[j];
                    }
                }
            }
            let m = states.len().max(1) as f64;
            c.iter_mut().for_each(|x| *x /= m);
        }
    }
    let tag = match averaging {
        Averaging::Trace => "trace".to_string(),
        Averaging::States(s) => format!("states:{}", s.len()),
    };
    Ok(CorrelationMatrix { size, c, averaging: tag })
}

fn gram(rows: &CMat) -> CMat {
    let mut g = CMat::zeros(rows.nrows(), rows.nrows());
    matmul(g.as_mut(), Accum::Replace, rows.as_ref(), rows.adjoint(), Complex64::new(1.0, 0.0), Par::Seq);
    g
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearResponse {
    pub fidelity: f64,
    pub running_sum: Vec<f64>,
    pub warning: Option<String>,
}

/// Largest `1 − F` considered inside the linear-response regime.
pub const LINEAR_RESPONSE_LIMIT: f64 = 0.2;

/// `F = 1 − δ² Σ C` and the running sum behind it.
pub fn linear_response_fidelity(c: &CorrelationMatrix, delta: f64) -> LinearResponse {
    let running_sum = c.running_sum();
    let total = running_sum.last().copied().unwrap_or(0.0);
    let deficit = delta * delta * total;
    let warning = (deficit > LINEAR_RESPONSE_LIMIT)
        .then(|| format!("predicted 1-F = {deficit:.3} is outside the linear-response regime"));
    LinearResponse { fidelity: 1.0 - deficit, running_sum, warning }
}

/// `Σ c_i n^{p_i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub terms: Vec<(f64, f64)>,
}

impl Polynomial {
    pub fn new(terms: &[(f64, f64)]) -> Self {
        let mut terms = terms.to_vec();
        terms.sort_by(|a, b| b.0.total_cmp(&a.0));
        Self { terms }
    }

    pub fn eval(&self, n: f64) -> f64 {
        self.terms.iter().map(|(p, c)| c * n.powf(*p)).sum()
    }

    /// `(power, coefficient)` of the highest-power term.
    pub fn leading(&self) -> (f64, f64) {
        self.terms.first().copied().unwrap_or((0.0, 0.0))
    }
}

/// Error regime of a closed-form prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Intrinsic(Algorithm),
    /// Static GUE after each gate, static in the lab frame (QFT only).
    GueGateLab,
    /// Static GUE after each gate, static in the interaction frame.
    GueGateInt(Algorithm),
    /// Static GUE after each pulse, interaction frame.
    GuePulse(Algorithm),
    /// Intrinsic and interaction-frame per-gate GUE together.
    Combined(Algorithm),
}

/// Scaling polynomials: `s_in = (1−F)(ka/J)²` and `s_gue = (1−F)/δ²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingModel {
    pub intrinsic_qft: Polynomial,
    pub intrinsic_iqft: Polynomial,
    pub gue_gate_lab: Polynomial,
    pub gue_gate_int_qft: Polynomial,
    pub gue_gate_int_iqft: Polynomial,
    pub gue_pulse_qft: Polynomial,
    pub gue_pulse_iqft: Polynomial,
}

impl Default for ScalingModel {
    fn default() -> Self {
        let p = Polynomial::new;
        Self {
            intrinsic_qft: p(&[(6.0, 280.0), (5.0, -660.0)]),
            intrinsic_iqft: p(&[(6.0, 1300.0), (5.0, -2100.0)]),
            gue_gate_lab: p(&[(2.0, 0.47), (1.0, 1.41), (0.0, -2.42)]),
            gue_gate_int_qft: p(&[(3.0, 0.45), (2.0, -0.42), (1.0, 0.58)]),
            gue_gate_int_iqft: p(&[(2.0, 1.31), (1.0, 0.86), (0.0, -3.73)]),
            gue_pulse_qft: p(&[(5.0, 4.86), (4.0, 35.8)]),
            gue_pulse_iqft: p(&[(4.0, 25.6), (3.0, 606.0)]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub fidelity: f64,
    /// `n` lies below the range where the polynomials were fitted.
    pub out_of_range: bool,
}

/// Smallest `n` at which the intrinsic polynomials are trusted.
pub const INTRINSIC_MIN_N: usize = 5;
/// Smallest `n` at which the GUE polynomials are trusted.
pub const GUE_MIN_N: usize = 3;

impl ScalingModel {
    pub fn intrinsic(&self, algo: Algorithm) -> &Polynomial {
        match algo {
            Algorithm::Qft => &self.intrinsic_qft,
            Algorithm::Iqft => &self.intrinsic_iqft,
        }
    }

    pub fn gue_gate_int(&self, algo: Algorithm) -> &Polynomial {
        match algo {
            Algorithm::Qft => &self.gue_gate_int_qft,
            Algorithm::Iqft => &self.gue_gate_int_iqft,
        }
    }

    pub fn gue_pulse(&self, algo: Algorithm) -> &Polynomial {
        match algo {
            Algorithm::Qft => &self.gue_pulse_qft,
            Algorithm::Iqft => &self.gue_pulse_iqft,
        }
    }

    /// `F = exp(−(J/ka)² s_in(n) − δ² s_gue(n))` with the terms the regime uses.
    pub fn predicted_fidelity(&self, regime: Regime, n: usize, ka: f64, delta: f64) -> Prediction {
        let x = n as f64;
        let eps = (J / ka).powi(2);
        let (exponent, min_n) = match regime {
            Regime::Intrinsic(a) => (eps * self.intrinsic(a).eval(x), INTRINSIC_MIN_N),
            Regime::GueGateLab => (delta * delta * self.gue_gate_lab.eval(x), GUE_MIN_N),
            Regime::GueGateInt(a) => (delta * delta * self.gue_gate_int(a).eval(x), GUE_MIN_N),
            Regime::GuePulse(a) => (delta * delta * self.gue_pulse(a).eval(x), GUE_MIN_N),
            Regime::Combined(a) => {
                (eps * self.intrinsic(a).eval(x) + delta * delta * self.gue_gate_int(a).eval(x), INTRINSIC_MIN_N)
            }
        };
        Prediction { fidelity: (-exponent).exp(), out_of_range: n < min_n }
    }

    /// GUE strength at which QFT and IQFT have equal combined fidelity.
    ///
    /// Returns `None` when the intrinsic and GUE differences have the same
    /// sign, so that one algorithm wins for every `δ`.
    pub fn delta_crit(&self, n: usize, ka: f64) -> Option<f64> {
        let x = n as f64;
        let d_in = self.intrinsic_iqft.eval(x) - self.intrinsic_qft.eval(x);
        let d_gue = self.gue_gate_int_qft.eval(x) - self.gue_gate_int_iqft.eval(x);
        let r = d_in / d_gue;
        (r > 0.0 && r.is_finite()).then(|| J / ka * r.sqrt())
    }

    /// `ka` at which the combined fidelity equals `f0`, if reachable.
    pub fn ka_for_fidelity(&self, algo: Algorithm, n: usize, delta: f64, f0: f64) -> Option<f64> {
        let x = n as f64;
        let budget = -f0.ln() - delta * delta * self.gue_gate_int(algo).eval(x);
        let s_in = self.intrinsic(algo).eval(x);
        (budget > 0.0 && s_in > 0.0).then(|| J * (s_in / budget).sqrt())
    }

    /// `δ` at which the combined fidelity equals `f0`, if reachable.
    pub fn delta_for_fidelity(&self, algo: Algorithm, n: usize, ka: f64, f0: f64) -> Option<f64> {
        let x = n as f64;
        let budget = -f0.ln() - (J / ka).powi(2) * self.intrinsic(algo).eval(x).max(0.0);
        let s_gue = self.gue_gate_int(algo).eval(x);
        (budget >= 0.0 && s_gue > 0.0).then(|| (budget / s_gue).sqrt())
    }

    /// Largest `n ≤ n_max` whose combined fidelity is at least `f0`.
    pub fn max_n_for_fidelity(&self, algo: Algorithm, ka: f64, delta: f64, f0: f64, n_max: usize) -> Option<usize> {
        (2..=n_max).take_while(|&n| self.predicted_fidelity(Regime::Combined(algo), n, ka, delta).fidelity >= f0).last()
    }
}

/// A point on a constant-fidelity curve, with the algorithm that reaches it
/// with the smaller resource.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourPoint {
    pub x: f64,
    pub y_qft: Option<f64>,
    pub y_iqft: Option<f64>,
    pub best: Option<Algorithm>,
    /// Crossover value of `y` at this `x`.
    pub crossover: Option<f64>,
}

/// Axes of a constant-fidelity scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourPlane {
    /// Fixed `n`; `x = δ`, `y = ka`.
    KaDelta { n: usize },
    /// Fixed `ka`; `x = n`, `y = δ`.
    DeltaN { ka: f64 },
    /// Fixed `δ`; `x = n`, `y = ka`.
    KaN { delta: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Contour {
    pub plane: ContourPlane,
    pub fidelity: f64,
    pub points: Vec<ContourPoint>,
    /// `ka` needed at `δ = 0` (vertical asymptote) per algorithm; only for `KaDelta`.
    pub ka_asymptote: Option<(f64, f64)>,
    /// Largest tolerable `δ` at `ka → ∞` (horizontal asymptote) per algorithm; only for `KaDelta`.
    pub delta_asymptote: Option<(f64, f64)>,
}

/// Constant-fidelity curve of the combined prediction over `xs`.
///
/// `ka` is a cost (smaller is better) while `δ` is a tolerance (larger is
/// better); `best` reflects that.
pub fn fidelity_contour(model: &ScalingModel, plane: ContourPlane, f0: f64, xs: &[f64]) -> Contour {
    let points = xs
        .iter()
        .map(|&x| {
            let (q, i, cross, ka_axis) = match plane {
                ContourPlane::KaDelta { n } => (
                    model.ka_for_fidelity(Algorithm::Qft, n, x, f0),
                    model.ka_for_fidelity(Algorithm::Iqft, n, x, f0),
                    // δ_crit(ka) = c/ka ⇒ ka_crit(δ) = c/δ
                    model.delta_crit(n, 1.0).map(|c| c / x),
                    true,
                ),
                ContourPlane::DeltaN { ka } => {
                    let n = x.round() as usize;
                    (
                        model.delta_for_fidelity(Algorithm::Qft, n, ka, f0),
                        model.delta_for_fidelity(Algorithm::Iqft, n, ka, f0),
                        model.delta_crit(n, ka),
                        false,
                    )
                }
                ContourPlane::KaN { delta } => {
                    let n = x.round() as usize;
                    (
                        model.ka_for_fidelity(Algorithm::Qft, n, delta, f0),
                        model.ka_for_fidelity(Algorithm::Iqft, n, delta, f0),
                        model.delta_crit(n, 1.0).map(|c| c / delta),
                        true,
                    )
                }
            };
            let best = match (q, i) {
                (Some(a), Some(b)) => Some(if (a <= b) == ka_axis { Algorithm::Qft } else { Algorithm::Iqft }),
                (Some(_), None) => Some(Algorithm::Qft),
                (None, Some(_)) => Some(Algorithm::Iqft),
                (None, None) => None,
            };
            ContourPoint { x, y_qft: q, y_iqft: i, best, crossover: cross }
        })
        .collect();
    let (ka_asymptote, delta_asymptote) = match plane {
        ContourPlane::KaDelta { n } => {
            let x = n as f64;
            let l = -f0.ln();
            let ka = |a| J * (model.intrinsic(a).eval(x) / l).sqrt();
            let dm = |a| (l / model.gue_gate_int(a).eval(x)).sqrt();
            (Some((ka(Algorithm::Qft), ka(Algorithm::Iqft))), Some((dm(Algorithm::Qft), dm(Algorithm::Iqft))))
        }
        _ => (None, None),
    };
    Contour { plane, fidelity: f0, points, ka_asymptote, delta_asymptote }
}

/// One observation `y(n) ± sigma` for scaling fits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitSample {
    pub n: f64,
    pub y: f64,
    pub sigma: f64,
}

impl FitSample {
    /// A sample with relative uncertainty `rel`.
    pub fn relative(n: f64, y: f64, rel: f64) -> Self {
        Self { n, y, sigma: rel * y.abs() }
    }
}

/// A fitted scaling law: a run of consecutive candidate powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub polynomial: Polynomial,
    /// RMS relative residual.
    pub residual: f64,
    pub chi2: f64,
    pub dof: usize,
    /// Whether `chi2` is within the acceptance band for `dof`.
    pub consistent: bool,
    pub regime: String,
}

impl ScalingFit {
    pub fn leading_power(&self) -> f64 {
        self.polynomial.leading().0
    }

    pub fn leading_coefficient(&self) -> f64 {
        self.polynomial.leading().1
    }
}

/// Fits `y(n)` with up to `max_terms` monomials whose powers are consecutive
/// entries of `powers`, a leading term followed by its corrections.
///
/// Any family with a free higher power fits at least as well as a lower one,
/// so goodness of fit alone cannot pick the degree. The fit therefore takes
/// the lowest leading power (then the fewest terms) whose `χ²` is consistent
/// with the stated uncertainties, `χ² ≤ dof + 2√(2 dof)`, and whose leading
/// coefficient is positive. If no family is consistent it returns the one
/// with the smallest `χ²/dof`.
pub fn fit_error_polynomial(
    samples: &[FitSample],
    powers: &[f64],
    max_terms: usize,
    regime: &str,
) -> Result<ScalingFit> {
    let mut ns: Vec<f64> = samples.iter().map(|s| s.n).collect();
    ns.sort_by(f64::total_cmp);
    ns.dedup();
    if ns.len() < 4 {
        return Err(IqcError::DegenerateFit(format!("need 4 distinct n, got {}", ns.len())));
    }
    if samples.iter().any(|s| !(s.y.is_finite() && s.y != 0.0 && s.sigma > 0.0 && s.sigma.is_finite())) {
        return Err(IqcError::DegenerateFit("samples need finite nonzero y and positive sigma".into()));
    }
    let mut powers = powers.to_vec();
    powers.sort_by(f64::total_cmp);
    powers.dedup();
    let m = samples.len();
    let mut fits = Vec::new();
    for top in 0..powers.len() {
        for terms in 1..=max_terms.min(top + 1).min(m - 1) {
            let family: Vec<f64> = (0..terms).map(|t| powers[top - t]).collect();
            let Some((chi2, coef)) = weighted_lsq(samples, &family) else { continue };
            if coef[0] <= 0.0 {
                continue;
            }
            let dof = m - terms;
            let consistent = chi2 <= dof as f64 + 2.0 * (2.0 * dof as f64).sqrt();
            let poly = Polynomial::new(&family.iter().copied().zip(coef).collect::<Vec<_>>());
            let residual =
                (samples.iter().map(|s| ((poly.eval(s.n) - s.y) / s.y).powi(2)).sum::<f64>() / m as f64).sqrt();
            fits.push(ScalingFit { polynomial: poly, residual, chi2, dof, consistent, regime: regime.into() });
        }
    }
    let pick = fits
        .iter()
        .filter(|f| f.consistent)
        .min_by(|a, b| {
            a.leading_power()
                .total_cmp(&b.leading_power())
                .then(a.polynomial.terms.len().cmp(&b.polynomial.terms.len()))
        })
        .or_else(|| fits.iter().min_by(|a, b| (a.chi2 / a.dof as f64).total_cmp(&(b.chi2 / b.dof as f64))));
    pick.cloned().ok_or_else(|| IqcError::DegenerateFit("no candidate family gives a positive fit".into()))
}

/// Weighted least squares with fixed powers; returns `(χ², coefficients)`.
pub fn weighted_lsq(samples: &[FitSample], powers: &[f64]) -> Option<(f64, Vec<f64>)> {
    let k = powers.len();
    let rows: Vec<Vec<f64>> = samples.iter().map(|s| powers.iter().map(|&p| s.n.powf(p) / s.sigma).collect()).collect();
    // equilibrate columns before forming the normal equations
    let scale: Vec<f64> =
        (0..k).map(|c| rows.iter().map(|r| r[c] * r[c]).sum::<f64>().sqrt().max(f64::MIN_POSITIVE)).collect();
    let mut ata = vec![vec![0.0; k]; k];
    let mut atb = vec![0.0; k];
    for (row, s) in rows.iter().zip(samples) {
        for r in 0..k {
            atb[r] += row[r] / scale[r] * s.y / s.sigma;
            for c in 0..k {
                ata[r][c] += row[r] / scale[r] * row[c] / scale[c];
            }
        }
    }
    let coef: Vec<f64> = solve_small(ata, atb)?.iter().zip(&scale).map(|(x, s)| x / s).collect();
    let chi2 = samples
        .iter()
        .map(|s| {
            let model: f64 = powers.iter().zip(&coef).map(|(&p, c)| c * s.n.powf(p)).sum();
            ((model - s.y) / s.sigma).powi(2)
        })
        .sum();
    Some((chi2, coef))
}

// Gaussian elimination with partial pivoting and a conditioning guard.
fn solve_small(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let k = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-13 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..k {
            let f = a[r][col] / a[col][col];
            for c in col..k {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; k];
    for r in (0..k).rev() {
        let s: f64 = (r + 1..k).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// `(1/n) Σ_{j≠l} 1/(j−l)²`, the mean non-resonant strength in units of `(J/ka)²`.
pub fn average_nonresonant_strength(n: usize) -> f64 {
    let mut s = 0.0;
    for j in 0..n {
        for l in 0..n {
            if j != l {
                s += 1.0 / ((j as f64 - l as f64).powi(2));
            }
        }
    }
    s / n as f64
}

/// `α` in `π²/3 − α log(n)/n`, fitted to [`average_nonresonant_strength`] over `ns`.
pub fn fit_strength_alpha(ns: &[usize]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .filter(|&&n| n >= 2)
        .map(|&n| ((n as f64).ln() / n as f64, PI * PI / 3.0 - average_nonresonant_strength(n)))
        .collect();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    if pts.len() < 2 || sxx == 0.0 {
        return Err(IqcError::DegenerateFit("need at least two n ≥ 2".into()));
    }
    Ok(pts.iter().map(|p| p.0 * p.1).sum::<f64>() / sxx)
}

/// Tolerated relative gradient drift, `a/δa ≈ a n^{p+2}/Ω`, for an error
/// polynomial of degree `p`.
pub fn drift_tolerance(a: f64, n: usize, p: f64, omega: f64) -> f64 {
    a * (n as f64).powf(p + 2.0) / omega
}
