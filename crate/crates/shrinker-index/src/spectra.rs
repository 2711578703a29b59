//! Lowest eigenpairs of mode operators, R-exhaustion sweeps, and the
//! Fourier projection utilities on (s, θ) grids.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::ProfileCurve;
use crate::operator::{assemble_mode_operator, BcPolicy, ModeOperator};
use crate::profiles::truncate;

pub const DEFAULT_SCHEDULE: [f64; 7] = [4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0];
pub const DEFAULT_PLATEAU_TOL: f64 = 1e-6;
const MIN_CELLS: usize = 3;
const MAX_BISECTIONS: usize = 300;
const INVERSE_ITERATIONS: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub k: usize,
    /// Extent max|γ| of the domain; None for closed curves.
    pub radius: Option<f64>,
    pub eigenvalues: Vec<f64>,
    /// Mass-orthonormal eigenvectors on the operator's cell grid.
    pub eigenfunctions: Vec<Vec<f64>>,
    /// ‖(K − μM)u‖ / ‖Mu‖ per pair.
    pub residuals: Vec<f64>,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn pencil_residual(op: &ModeOperator, mu: f64, u: &[f64]) -> f64 {
    let ku = op.stiffness.matvec(u);
    let r: Vec<f64> = ku
        .iter()
        .zip(&op.mass)
        .zip(u)
        .map(|((a, m), x)| a - mu * m * x)
        .collect();
    let mu_vec: Vec<f64> = op.mass.iter().zip(u).map(|(m, x)| m * x).collect();
    norm2(&r) / norm2(&mu_vec)
}

/// Number of eigenvalues of the pencil strictly below σ.
pub fn count_below(op: &ModeOperator, sigma: f64) -> usize {
    op.stiffness.negative_count(sigma, &op.mass)
}

fn bisect_eigenvalue(op: &ModeOperator, index: usize, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
        if count_below(op, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn start_vector(len: usize, index: usize) -> Vec<f64> {
    (0..len)
        .map(|i| 1.0 + 0.5 * ((i * 7919 + index * 104_729) % 1009) as f64 / 1009.0)
        .collect()
}

fn m_normalize(op: &ModeOperator, u: &mut [f64]) {
    let nrm = op.inner(u, u).sqrt();
    if nrm > 0.0 {
        u.iter_mut().for_each(|x| *x /= nrm);
    }
}

fn fix_sign(u: &mut [f64]) {
    let scale = u.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if let Some(first) = u.iter().find(|x| x.abs() > 1e-6 * scale) {
        if *first < 0.0 {
            u.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// The `count` smallest eigenpairs of (stiffness, mass): Sturm bisection for
/// the eigenvalues, shifted inverse iteration for the vectors. Reported
/// eigenvalues are the Rayleigh quotients of the returned vectors.
pub fn lowest_eigenpairs(op: &ModeOperator, count: usize) -> Result<Spectrum> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    let len = op.len();
    if len < MIN_CELLS {
        return Err(Error::GridTooSmall {
            got: len,
            need: MIN_CELLS,
        });
    }
    if count > len {
        return Err(Error::InvalidArgument(format!(
            "asked for {count} eigenpairs of a {len}-cell operator"
        )));
    }
    if let Some(i) = op.mass.iter().position(|m| !(*m > 0.0)) {
        return Err(Error::NonPositiveMass(i));
    }
    let (lo, hi) = op.stiffness.pencil_bounds(&op.mass);
    let mut values = Vec::with_capacity(count);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(count);
    let mut residuals = Vec::with_capacity(count);
    for index in 0..count {
        let sigma = bisect_eigenvalue(op, index, lo, hi);
        let mut u = start_vector(len, index);
        let mut best: Option<(f64, Vec<f64>)> = None;
        for _ in 0..INVERSE_ITERATIONS {
            let rhs: Vec<f64> = op.mass.iter().zip(&u).map(|(m, x)| m * x).collect();
            let mut y = op.stiffness.solve_shifted(sigma, &op.mass, &rhs);
            for prev in &vectors {
                let c = op.inner(prev, &y);
                y.iter_mut().zip(prev).for_each(|(a, b)| *a -= c * b);
            }
            if !y.iter().all(|v| v.is_finite()) {
                return Err(Error::Solver(format!("inverse iteration diverged for pair {index}")));
            }
            m_normalize(op, &mut y);
            let mu = rayleigh_raw(op, &y);
            let res = pencil_residual(op, mu, &y);
            u = y;
            let improved = best.as_ref().map_or(true, |(r, _)| res < 0.5 * *r);
            if best.as_ref().map_or(true, |(r, _)| res < *r) {
                best = Some((res, u.clone()));
            }
            if !improved && res < 1e-10 {
                break;
            }
        }
        let (res, mut u) = best.expect("at least one iteration ran");
        fix_sign(&mut u);
        values.push(rayleigh_raw(op, &u));
        residuals.push(res);
        vectors.push(u);
    }
    let radius = (!op.closed).then(|| {
        op.cells
            .iter()
            .map(|c| c.x.hypot(c.r))
            .fold(0.0, f64::max)
    });
    Ok(Spectrum {
        k: op.k,
        radius,
        eigenvalues: values,
        eigenfunctions: vectors,
        residuals,
    })
}

fn rayleigh_raw(op: &ModeOperator, u: &[f64]) -> f64 {
    op.stiffness.bilinear(u, u) / op.inner(u, u)
}

/// uᵀKu / uᵀMu.
pub fn rayleigh_quotient(op: &ModeOperator, u: &[f64]) -> Result<f64> {
    if u.len() != op.len() {
        return Err(Error::LengthMismatch {
            expected: op.len(),
            got: u.len(),
        });
    }
    if u.iter().all(|x| *x == 0.0) {
        return Err(Error::ZeroFunction("Rayleigh quotient of the zero vector"));
    }
    Ok(rayleigh_raw(op, u))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSweep {
    pub k: usize,
    /// Truncation radii; None stands for R = ∞ (closed curves).
    pub schedule: Vec<Option<f64>>,
    pub mu1_values: Vec<f64>,
    pub mu1_limit: f64,
    pub converged: bool,
    pub plateau_tol: f64,
}

/// μ₁(k, D_R) for each R of the schedule, with plateau detection on the
/// last two values.
pub fn sweep_bottom_spectrum(
    curve: &ProfileCurve,
    k: usize,
    schedule: &[f64],
    plateau_tol: f64,
) -> Result<SpectralSweep> {
    if curve.closed {
        let op = assemble_mode_operator(curve, k, BcPolicy::Natural)?;
        let mu = lowest_eigenpairs(&op, 1)?.eigenvalues[0];
        return Ok(SpectralSweep {
            k,
            schedule: vec![None],
            mu1_values: vec![mu],
            mu1_limit: mu,
            converged: true,
            plateau_tol,
        });
    }
    if schedule.is_empty() {
        return Err(Error::InvalidArgument("empty radius schedule".into()));
    }
    if schedule.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("schedule must be increasing".into()));
    }
    let values = schedule
        .par_iter()
        .map(|&radius| {
            let piece = truncate(curve, radius)?;
            let op = assemble_mode_operator(&piece, k, BcPolicy::Natural)?;
            Ok(lowest_eigenpairs(&op, 1)?.eigenvalues[0])
        })
        .collect::<Result<Vec<f64>>>()?;
    let last = values[values.len() - 1];
    let converged = values.len() >= 2 && (last - values[values.len() - 2]).abs() < plateau_tol;
    Ok(SpectralSweep {
        k,
        schedule: schedule.iter().map(|&r| Some(r)).collect(),
        mu1_values: values,
        mu1_limit: last,
        converged,
        plateau_tol,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Cos,
    Sin,
}

impl Parity {
    pub fn eval(self, k: usize, theta: f64) -> f64 {
        match self {
            Parity::Cos => (k as f64 * theta).cos(),
            Parity::Sin => (k as f64 * theta).sin(),
        }
    }
}

/// Samples f(s_i, θ_j) on a uniform θ grid θ_j = 2πj/N.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularField {
    pub values: Vec<Vec<f64>>,
    pub n_theta: usize,
}

impl AngularField {
    pub fn new(values: Vec<Vec<f64>>) -> Result<Self> {
        let n_theta = values.first().map_or(0, |row| row.len());
        if n_theta == 0 || values.iter().any(|row| row.len() != n_theta) {
            return Err(Error::InvalidArgument("ragged or empty angular field".into()));
        }
        Ok(Self { values, n_theta })
    }

    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_theta as f64
    }

    /// u(s) Y_k(θ).
    pub fn synthesize(u: &[f64], k: usize, parity: Parity, n_theta: usize) -> Self {
        let values = u
            .iter()
            .map(|ui| {
                (0..n_theta)
                    .map(|j| ui * parity.eval(k, 2.0 * PI * j as f64 / n_theta as f64))
                    .collect()
            })
            .collect();
        Self { values, n_theta }
    }

    pub fn add(&mut self, other: &AngularField) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }
}

/// Trapezoid Fourier coefficient a_k(s) or b_k(s).
pub fn fourier_project(field: &AngularField, k: usize, parity: Parity) -> Result<Vec<f64>> {
    let need = 4 * k + 4;
    if field.n_theta < need {
        return Err(Error::Aliasing {
            points: field.n_theta,
            k,
            need,
        });
    }
    if k == 0 && parity == Parity::Sin {
        return Err(Error::InvalidArgument("there is no sine mode for k = 0".into()));
    }
    let nt = field.n_theta as f64;
    let factor = if k == 0 { 1.0 / nt } else { 2.0 / nt };
    let basis: Vec<f64> = (0..field.n_theta)
        .map(|j| parity.eval(k, field.theta(j)))
        .collect();
    Ok(field
        .values
        .iter()
        .map(|row| factor * row.iter().zip(&basis).map(|(a, b)| a * b).sum::<f64>())
        .collect())
}

fn check_field(op: &ModeOperator, f: &AngularField) -> Result<()> {
    if f.values.len() != op.len() {
        return Err(Error::LengthMismatch {
            expected: op.len(),
            got: f.values.len(),
        });
    }
    Ok(())
}

/// Discrete L²_w inner product on the (cell, θ) grid, θ averaged.
pub fn angular_l2_inner(op: &ModeOperator, f: &AngularField, g: &AngularField) -> Result<f64> {
    check_field(op, f)?;
    check_field(op, g)?;
    let nt = f.n_theta as f64;
    Ok(op
        .mass
        .iter()
        .zip(&f.values)
        .zip(&g.values)
        .map(|((m, a), b)| m * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / nt)
        .sum())
}

/// Discrete H¹_w norm squared: L² part, face differences in s, central
/// differences in θ scaled by 1/r².
pub fn angular_h1_norm_sq(op: &ModeOperator, f: &AngularField) -> Result<f64> {
    check_field(op, f)?;
    let nt = f.n_theta;
    let dtheta = 2.0 * PI / nt as f64;
    let l2 = angular_l2_inner(op, f, f)?;
    let nc = op.len();
    let mut ds = 0.0;
    let faces = if op.closed { nc } else { nc - 1 };
    for j in 0..faces {
        let (a, b) = (j, (j + 1) % nc);
        let w = op.face_weights[j + 1];
        let sum: f64 = f.values[a]
            .iter()
            .zip(&f.values[b])
            .map(|(x, y)| (y - x) * (y - x))
            .sum();
        ds += w / op.h * sum / nt as f64;
    }
    let mut dt = 0.0;
    for (i, row) in f.values.iter().enumerate() {
        let r = op.cells[i].r;
        let sum: f64 = (0..nt)
            .map(|j| {
                let d = (row[(j + 1) % nt] - row[(j + nt - 1) % nt]) / (2.0 * dtheta);
                d * d
            })
            .sum();
        dt += op.mass[i] * sum / nt as f64 / (r * r);
    }
    Ok(l2 + ds + dt)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesselCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// ⟨v,a⟩²/‖a‖² + ⟨v,b⟩²/‖b‖² ≤ ‖v‖²/(1 − ε) for nearly orthogonal a, b, in
/// the inner product with diagonal `weights`.
pub fn almost_bessel_check(
    v: &[f64],
    a: &[f64],
    b: &[f64],
    weights: &[f64],
    epsilon: f64,
) -> Result<BesselCheck> {
    let n = weights.len();
    for x in [v, a, b] {
        if x.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: x.len(),
            });
        }
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::Precondition(format!("epsilon {epsilon} must lie in [0, 1)")));
    }
    let ip = |x: &[f64], y: &[f64]| -> f64 {
        weights.iter().zip(x).zip(y).map(|((w, p), q)| w * p * q).sum()
    };
    let (aa, bb) = (ip(a, a), ip(b, b));
    if !(aa > 0.0 && bb > 0.0) {
        return Err(Error::Precondition("a and b must be nonzero".into()));
    }
    let ab = ip(a, b);
    if ab.abs() > epsilon * (aa * bb).sqrt() * (1.0 + 1e-12) + 1e-300 {
        return Err(Error::Precondition(format!(
            "|<a,b>| = {:.3e} exceeds epsilon·|a||b| = {:.3e}",
            ab.abs(),
            epsilon * (aa * bb).sqrt()
        )));
    }
    let (va, vb) = (ip(v, a), ip(v, b));
    let lhs = va * va / aa + vb * vb / bb;
    let rhs = ip(v, v) / (1.0 - epsilon);
    Ok(BesselCheck {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-12),
    })
}
