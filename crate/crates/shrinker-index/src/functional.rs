//! Gaussian area F_{x₀,t₀}, entropy, and entropy along normal variations.
//!
//! For a hypersurface of revolution and a centre x₀ = (a, ρ e) with ρ ≥ 0,
//!
//!   F = (4πt₀)^{−n/2} ∫ |S^m| r^m e^{−((x−a)² + (r−ρ)²)/(4t₀)} A_m(rρ/(2t₀)) ds
//!
//! where A_m(c) is the mean of e^{c(ω₁ − 1)} over the unit sphere S^m.

use argmin::core::{CostFunction, Error as ArgminError, Executor, State, TerminationReason};
use argmin::solver::neldermead::NelderMead;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{tail_bound, ProfileCurve, WeightSpec};
use crate::numerics::{gauss_legendre, gregory_weights, sphere_area};
use crate::operator::cell_geometry;
use crate::spectra::Parity;
use crate::variation::ModeFunction;

/// Angular resolution for F; 0 evaluates the angular mean exactly.
pub const DEFAULT_THETA_POINTS: usize = 0;
pub const DEFAULT_SURFACE_THETA_POINTS: usize = 128;
const LOG_T0_RANGE: (f64, f64) = (-3.0, 3.0);
const IMMERSION_FLOOR: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeCenter {
    /// Offset along the symmetry axis.
    pub a: f64,
    /// Distance of x₀ from the symmetry axis.
    pub rho: f64,
    pub t0: f64,
}

impl SpacetimeCenter {
    pub const ORIGIN: Self = Self {
        a: 0.0,
        rho: 0.0,
        t0: 1.0,
    };

    pub fn new(a: f64, rho: f64, t0: f64) -> Self {
        Self { a, rho, t0 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(Error::InvalidArgument(format!("t0 = {} must be positive", self.t0)));
        }
        if !(self.rho >= 0.0) || !self.a.is_finite() {
            return Err(Error::InvalidArgument("rho must be non-negative and a finite".into()));
        }
        Ok(())
    }
}

/// Mean of e^{c(ω₁−1)} over S^m, which equals Γ(ν+1)(2/c)^ν e^{−c} I_ν(c)
/// with ν = (m−1)/2. Power series for small c, Hankel expansion beyond.
fn angular_mean_exact(m: usize, c: f64) -> f64 {
    let nu = (m as f64 - 1.0) / 2.0;
    if c <= 25.0 {
        let q = c * c / 4.0;
        let (mut term, mut sum) = (1.0, 1.0);
        let mut k = 1.0;
        while term > 1e-17 * sum {
            term *= q / (k * (k + nu));
            sum += term;
            k += 1.0;
        }
        return sum * (-c).exp();
    }
    // Γ(ν+1) for integer or half-integer ν
    let mut gamma = if m % 2 == 1 { 1.0 } else { PI.sqrt() / 2.0 };
    let mut g = if m % 2 == 1 { 1.0 } else { 1.5 };
    while g < nu + 0.5 {
        gamma *= g;
        g += 1.0;
    }
    let mu = 4.0 * nu * nu;
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 1..200 {
        let kf = k as f64;
        let next = -term * (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * c);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    gamma * (2.0 / c).powf(nu) * sum / (2.0 * PI * c).sqrt()
}

/// Mean of e^{c(ω₁−1)} over S^m; `theta_points == 0` selects the exact
/// Bessel form, otherwise quadrature over the polar angle.
fn angular_mean(m: usize, c: f64, theta_points: usize) -> f64 {
    if c == 0.0 {
        return 1.0;
    }
    if theta_points == 0 {
        return angular_mean_exact(m, c);
    }
    if m == 2 {
        return -(-2.0 * c).exp_m1() / (2.0 * c);
    }
    if m % 2 == 1 {
        let count = theta_points.max((9.0 * c.sqrt()).ceil() as usize);
        let (mut num, mut den) = (0.0, 0.0);
        for j in 0..count {
            let psi = 2.0 * PI * j as f64 / count as f64;
            let dens = psi.sin().abs().powi(m as i32 - 1);
            num += dens * (c * (psi.cos() - 1.0)).exp();
            den += dens;
        }
        return num / den;
    }
    let (t, w) = gauss_legendre(theta_points.max(16));
    let (mut num, mut den) = (0.0, 0.0);
    for (ti, wi) in t.iter().zip(&w) {
        let dens = wi * (1.0 - ti * ti).powi((m as i32 - 2) / 2);
        num += dens * (c * (ti - 1.0)).exp();
        den += dens;
    }
    num / den
}

/// Weighted sample set representing a rotationally symmetric hypersurface:
/// positions in the half-plane and arc-length quadrature weights.
#[derive(Clone, Debug)]
struct ProfileSamples {
    n: usize,
    x: Vec<f64>,
    r: Vec<f64>,
    dl: Vec<f64>,
}

impl ProfileSamples {
    fn from_curve(curve: &ProfileCurve) -> Self {
        let w = gregory_weights(curve.len(), curve.h, curve.closed);
        Self {
            n: curve.n,
            x: curve.points.iter().map(|p| p.x).collect(),
            r: curve.points.iter().map(|p| p.r).collect(),
            dl: w,
        }
    }

    fn f_value(&self, c: &SpacetimeCenter, theta_points: usize) -> f64 {
        let m = self.n - 1;
        let area = sphere_area(m);
        let t0 = c.t0;
        let mut sum = 0.0;
        for ((x, r), dl) in self.x.iter().zip(&self.r).zip(&self.dl) {
            if *dl == 0.0 {
                continue;
            }
            let d = ((x - c.a).powi(2) + (r - c.rho).powi(2)) / (4.0 * t0);
            if d > 40.0 {
                continue;
            }
            let ang = angular_mean(m, r * c.rho / (2.0 * t0), theta_points);
            sum += dl * area * r.powi(m as i32) * (-d).exp() * ang;
        }
        (4.0 * PI * t0).powf(-(self.n as f64) / 2.0) * sum
    }

    fn extent(&self) -> (f64, f64, f64) {
        let fold = |v: &[f64], f: fn(f64, f64) -> f64, init: f64| v.iter().copied().fold(init, f);
        (
            fold(&self.x, f64::min, f64::INFINITY),
            fold(&self.x, f64::max, f64::NEG_INFINITY),
            fold(&self.r, f64::max, 0.0),
        )
    }
}

/// F_{x₀,t₀} with the default angular resolution.
pub fn f_value(curve: &ProfileCurve, center: &SpacetimeCenter) -> Result<f64> {
    f_value_with(curve, center, DEFAULT_THETA_POINTS)
}

pub fn f_value_with(curve: &ProfileCurve, center: &SpacetimeCenter, theta_points: usize) -> Result<f64> {
    center.validate()?;
    if theta_points != 0 && theta_points < 4 {
        return Err(Error::InvalidArgument("need 0 (exact) or at least 4 angular points".into()));
    }
    Ok(ProfileSamples::from_curve(curve).f_value(center, theta_points))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyOptions {
    pub theta_points: usize,
    pub max_iters: u64,
    pub sd_tolerance: f64,
}

impl Default for EntropyOptions {
    fn default() -> Self {
        Self {
            theta_points: DEFAULT_THETA_POINTS,
            max_iters: 3000,
            sd_tolerance: 1e-15,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub lambda: f64,
    pub argmax: SpacetimeCenter,
    /// Set when no refinement reported convergence; lambda is then the best
    /// value found.
    pub approximate: bool,
    /// Estimated weight beyond the stored truncation at the argmax scale.
    pub tail_bound: f64,
}

struct Objective<F: Fn(&[f64]) -> f64> {
    f: F,
}

impl<F: Fn(&[f64]) -> f64> CostFunction for Objective<F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> std::result::Result<f64, ArgminError> {
        Ok((self.f)(p))
    }
}

/// Nelder–Mead minimization from `start` with initial edge lengths `steps`.
fn nelder_mead<F>(f: F, start: &[f64], steps: &[f64], opts: &EntropyOptions) -> Result<(Vec<f64>, f64, bool)>
where
    F: Fn(&[f64]) -> f64,
{
    let mut simplex = vec![start.to_vec()];
    for (i, s) in steps.iter().enumerate() {
        let mut v = start.to_vec();
        v[i] += s;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(opts.sd_tolerance)
        .map_err(|e| Error::Solver(e.to_string()))?;
    let res = Executor::new(Objective { f }, solver)
        .configure(|s| s.max_iters(opts.max_iters))
        .run()
        .map_err(|e| Error::Solver(e.to_string()))?;
    let state = res.state();
    let best = state
        .get_best_param()
        .cloned()
        .ok_or_else(|| Error::Solver("optimizer returned no parameters".into()))?;
    let converged = matches!(state.get_termination_reason(), Some(TerminationReason::SolverConverged));
    Ok((best, state.get_best_cost(), converged))
}

/// Smooth penalty keeping log t₀ inside its search range.
fn range_penalty(v: f64, lo: f64, hi: f64) -> f64 {
    let e = if v < lo {
        lo - v
    } else if v > hi {
        v - hi
    } else {
        0.0
    };
    e * e
}

fn entropy_of_samples(samples: &ProfileSamples, opts: &EntropyOptions) -> Result<(f64, SpacetimeCenter, bool)> {
    let (x_lo, x_hi, r_hi) = samples.extent();
    let (l_lo, l_hi) = LOG_T0_RANGE;
    let rho_max = 2.0 * r_hi.max(1.0);
    let clamp_center = |p: &[f64]| {
        SpacetimeCenter::new(
            p[0].clamp(x_lo, x_hi),
            p[1].abs().min(rho_max),
            p[2].clamp(l_lo, l_hi).exp(),
        )
    };
    let objective = |p: &[f64]| {
        let c = clamp_center(p);
        -samples.f_value(&c, opts.theta_points)
            + range_penalty(p[0], x_lo, x_hi)
            + range_penalty(p[1].abs(), 0.0, rho_max)
            + range_penalty(p[2], l_lo, l_hi)
    };

    let lin = |lo: f64, hi: f64, k: usize| -> Vec<f64> {
        (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect()
    };
    let mut a_grid = lin(x_lo, x_hi, 5);
    a_grid.push(0.0_f64.clamp(x_lo, x_hi));
    let rho_grid = [0.0, 0.5 * r_hi];
    let l_grid = lin(-2.0, 2.0, 7);
    let mut starts: Vec<[f64; 3]> = Vec::new();
    for &a in &a_grid {
        for &rho in &rho_grid {
            for &l in &l_grid {
                starts.push([a, rho, l]);
            }
        }
    }
    let mut scored: Vec<(f64, [f64; 3])> = starts
        .par_iter()
        .map(|p| (objective(p), *p))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let scale = (x_hi - x_lo).max(r_hi).max(1.0);
    let steps = [0.1 * scale, 0.1 * scale, 0.3];
    let refined = scored
        .iter()
        .take(3)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(_, p)| nelder_mead(objective, p, &steps, opts))
        .collect::<Result<Vec<_>>>()?;
    let (best, cost, converged) = refined
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("three refinements ran");
    let c = clamp_center(&best);
    let lambda = samples.f_value(&c, opts.theta_points);
    if !(lambda.is_finite()) {
        return Err(Error::Solver(format!("entropy search produced {cost}")));
    }
    Ok((lambda, c, !converged))
}

/// λ = sup F over centres and scales: coarse grid on (a, ρ, log t₀), then
/// Nelder–Mead from the best grid points.
pub fn entropy(curve: &ProfileCurve) -> Result<EntropyReport> {
    entropy_with(curve, &EntropyOptions::default())
}

pub fn entropy_with(curve: &ProfileCurve, opts: &EntropyOptions) -> Result<EntropyReport> {
    let samples = ProfileSamples::from_curve(curve);
    let (lambda, argmax, approximate) = entropy_of_samples(&samples, opts)?;
    let spec = WeightSpec::for_curve(curve);
    let tail = (tail_bound(curve, &spec) * argmax.t0.powf(-(curve.n as f64) / 2.0)).abs();
    Ok(EntropyReport {
        lambda,
        argmax,
        approximate,
        tail_bound: tail,
    })
}

/// Central-difference gradient of F in (a, ρ, t₀) at (0, 0, 1).
pub fn stationarity_gradient(curve: &ProfileCurve, step: f64) -> Result<[f64; 3]> {
    let s = ProfileSamples::from_curve(curve);
    let f = |a: f64, rho: f64, t0: f64| s.f_value(&SpacetimeCenter::new(a, rho.abs(), t0), DEFAULT_THETA_POINTS);
    Ok([
        (f(step, 0.0, 1.0) - f(-step, 0.0, 1.0)) / (2.0 * step),
        (f(0.0, step, 1.0) - f(0.0, -step, 1.0)) / (2.0 * step),
        (f(0.0, 0.0, 1.0 + step) - f(0.0, 0.0, 1.0 - step)) / (2.0 * step),
    ])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropySample {
    pub s: f64,
    pub lambda: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyVariation {
    pub lambda0: f64,
    pub samples: Vec<EntropySample>,
    /// Least-squares fit λ(s) − λ₀ ≈ b₁ s + b₂ s²; the curvature is −b₂.
    pub linear_coefficient: f64,
    pub fitted_curvature: f64,
    pub strictly_decreasing: bool,
}

/// Derivative along the cells, periodic or one-sided at open ends.
fn cell_derivative(u: &[f64], h: f64, periodic: bool) -> Vec<f64> {
    let n = u.len();
    (0..n)
        .map(|j| {
            if periodic {
                (u[(j + 1) % n] - u[(j + n - 1) % n]) / (2.0 * h)
            } else if n < 2 {
                0.0
            } else if j == 0 {
                (u[1] - u[0]) / h
            } else if j == n - 1 {
                (u[n - 1] - u[n - 2]) / h
            } else {
                (u[j + 1] - u[j - 1]) / (2.0 * h)
            }
        })
        .collect()
}

struct Deformation {
    cells: Vec<crate::operator::CellGeometry>,
    h: f64,
    n: usize,
    /// (k, parity, u, u′) per block.
    blocks: Vec<(usize, Parity, Vec<f64>, Vec<f64>)>,
}

impl Deformation {
    fn new(curve: &ProfileCurve, f: &[ModeFunction]) -> Result<Self> {
        let cells = cell_geometry(curve)?;
        let mut blocks: Vec<(usize, Parity, Vec<f64>, Vec<f64>)> = Vec::new();
        for mf in f {
            if mf.u.len() != cells.len() {
                return Err(Error::LengthMismatch {
                    expected: cells.len(),
                    got: mf.u.len(),
                });
            }
            let du = cell_derivative(&mf.u, curve.h, curve.closed);
            match blocks.iter_mut().find(|b| b.0 == mf.k && b.1 == mf.parity) {
                Some(b) => {
                    b.2.iter_mut().zip(&mf.u).for_each(|(a, v)| *a += v);
                    b.3.iter_mut().zip(&du).for_each(|(a, v)| *a += v);
                }
                None => blocks.push((mf.k, mf.parity, mf.u.clone(), du)),
            }
        }
        Ok(Self {
            cells,
            h: curve.h,
            n: curve.n,
            blocks,
        })
    }

    fn symmetric(&self) -> bool {
        self.blocks.iter().all(|b| b.0 == 0)
    }

    fn zero_total(&self) -> (Vec<f64>, Vec<f64>) {
        let nc = self.cells.len();
        let mut u = vec![0.0; nc];
        let mut du = vec![0.0; nc];
        for b in self.blocks.iter().filter(|b| b.0 == 0) {
            u.iter_mut().zip(&b.2).for_each(|(a, v)| *a += v);
            du.iter_mut().zip(&b.3).for_each(|(a, v)| *a += v);
        }
        (u, du)
    }

    /// Rotationally symmetric deformation γ + s U ν sampled on the cells.
    fn profile_samples(&self, s: f64) -> Result<ProfileSamples> {
        let (u, du) = self.zero_total();
        let mut x = Vec::with_capacity(u.len());
        let mut r = Vec::with_capacity(u.len());
        let mut dl = Vec::with_capacity(u.len());
        for (j, c) in self.cells.iter().enumerate() {
            let stretch = 1.0 - s * u[j] * c.kappa;
            let rr = c.r + s * u[j] * c.nu_r;
            if stretch < IMMERSION_FLOOR || rr <= 0.0 {
                return Err(Error::ImmersionFailure { s });
            }
            x.push(c.x + s * u[j] * c.nu_axis);
            r.push(rr);
            dl.push(self.h * (stretch * stretch + (s * du[j]).powi(2)).sqrt());
        }
        Ok(ProfileSamples { n: self.n, x, r, dl })
    }

    /// F on the θ-discretized deformed surface (n = 2), centre (a, b, c).
    fn surface_f(&self, s: f64, center: [f64; 3], t0: f64, n_theta: usize) -> f64 {
        let dtheta = 2.0 * PI / n_theta as f64;
        let thetas: Vec<(f64, f64)> = (0..n_theta).map(|j| (j as f64 * dtheta).sin_cos()).collect();
        // per angle, (y, ∂θ y) of every block
        let modes: Vec<Vec<(f64, f64)>> = (0..n_theta)
            .map(|t| {
                let theta = t as f64 * dtheta;
                self.blocks
                    .iter()
                    .map(|(k, p, _, _)| {
                        let kf = *k as f64;
                        let (sk, ck) = (kf * theta).sin_cos();
                        match p {
                            Parity::Cos => (ck, -kf * sk),
                            Parity::Sin => (sk, kf * ck),
                        }
                    })
                    .collect()
            })
            .collect();
        let cutoff = 160.0 * t0;
        let sum: f64 = self
            .cells
            .par_iter()
            .enumerate()
            .map(|(j, c)| {
                let (sp, cp) = c.phi.sin_cos();
                let mut acc = 0.0;
                for (t, &(st, ct)) in thetas.iter().enumerate() {
                    let (mut f, mut fs, mut ft) = (0.0, 0.0, 0.0);
                    for ((_, _, u, du), &(y, dy)) in self.blocks.iter().zip(&modes[t]) {
                        f += u[j] * y;
                        fs += du[j] * y;
                        ft += u[j] * dy;
                    }
                    let p_ = c.x + s * f * c.nu_axis;
                    let q = c.r + s * f * c.nu_r;
                    let d2 = (p_ - center[0]).powi(2) + (q * ct - center[1]).powi(2) + (q * st - center[2]).powi(2);
                    if d2 > cutoff {
                        continue;
                    }
                    let p_s = cp + s * (fs * c.nu_axis - f * cp * c.kappa);
                    let q_s = sp + s * (fs * c.nu_r - f * sp * c.kappa);
                    let p_t = s * ft * c.nu_axis;
                    let q_t = s * ft * c.nu_r;
                    let xs2 = p_s * p_s + q_s * q_s;
                    let xt2 = p_t * p_t + q_t * q_t + q * q;
                    let dot = p_s * p_t + q_s * q_t;
                    let area = (xs2 * xt2 - dot * dot).max(0.0).sqrt();
                    acc += (-d2 / (4.0 * t0)).exp() * area;
                }
                acc
            })
            .sum();
        sum * self.h * dtheta / (4.0 * PI * t0)
    }

    fn check_surface(&self, s: f64, n_theta: usize) -> Result<()> {
        let dtheta = 2.0 * PI / n_theta as f64;
        for (j, c) in self.cells.iter().enumerate() {
            for t in 0..n_theta {
                let theta = t as f64 * dtheta;
                let f: f64 = self
                    .blocks
                    .iter()
                    .map(|(k, p, u, _)| u[j] * p.eval(*k, theta))
                    .sum();
                if 1.0 - s * f * c.kappa < IMMERSION_FLOOR || c.r + s * f * c.nu_r <= 0.0 {
                    return Err(Error::ImmersionFailure { s });
                }
            }
        }
        Ok(())
    }
}

fn surface_entropy(
    def: &Deformation,
    s: f64,
    start: &SpacetimeCenter,
    opts: &EntropyOptions,
) -> Result<f64> {
    def.check_surface(s, DEFAULT_SURFACE_THETA_POINTS)?;
    let nt = DEFAULT_SURFACE_THETA_POINTS;
    let (l_lo, l_hi) = LOG_T0_RANGE;
    let objective = |p: &[f64]| {
        -def.surface_f(s, [p[0], p[1], p[2]], p[3].clamp(l_lo, l_hi).exp(), nt) + range_penalty(p[3], l_lo, l_hi)
    };
    let p0 = [start.a, start.rho, 0.0, start.t0.ln()];
    let steps = [0.1, 0.1, 0.1, 0.1];
    let best = nelder_mead(objective, &p0, &steps, opts)?;
    Ok(-best.1)
}

/// λ(Σ_s) for the normal variations Σ_s = Σ + s f ν. Purely k = 0
/// variations deform the profile; other modes are evaluated on the
/// θ-discretized surface (n = 2 only).
pub fn entropy_along_variation(
    curve: &ProfileCurve,
    f: &[ModeFunction],
    s_values: &[f64],
) -> Result<EntropyVariation> {
    entropy_along_variation_with(curve, f, s_values, &EntropyOptions::default())
}

pub fn entropy_along_variation_with(
    curve: &ProfileCurve,
    f: &[ModeFunction],
    s_values: &[f64],
    opts: &EntropyOptions,
) -> Result<EntropyVariation> {
    let def = Deformation::new(curve, f)?;
    let base = def.profile_samples(0.0)?;
    let (lambda0, argmax0, _) = entropy_of_samples(&base, opts)?;
    let symmetric = def.symmetric();
    if !symmetric && curve.n != 2 {
        return Err(Error::UnsupportedMode(
            "non-symmetric variations are only evaluated for n = 2".into(),
        ));
    }
    let lambda0 = if symmetric {
        lambda0
    } else {
        surface_entropy(&def, 0.0, &argmax0, opts)?
    };
    let lambdas = s_values
        .iter()
        .map(|&s| {
            if s == 0.0 {
                return Ok(lambda0);
            }
            if symmetric {
                let samples = def.profile_samples(s)?;
                Ok(entropy_of_samples(&samples, opts)?.0)
            } else {
                surface_entropy(&def, s, &argmax0, opts)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let samples: Vec<EntropySample> = s_values
        .iter()
        .zip(&lambdas)
        .map(|(&s, &lambda)| EntropySample { s, lambda })
        .collect();

    // normal equations for d = b1 s + b2 s²
    let (mut s2, mut s3, mut s4, mut sd, mut s2d) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for e in &samples {
        let d = e.lambda - lambda0;
        s2 += e.s * e.s;
        s3 += e.s.powi(3);
        s4 += e.s.powi(4);
        sd += e.s * d;
        s2d += e.s * e.s * d;
    }
    let det = s2 * s4 - s3 * s3;
    let (b1, b2) = if det.abs() > 0.0 {
        ((sd * s4 - s2d * s3) / det, (s2 * s2d - s3 * sd) / det)
    } else {
        (0.0, 0.0)
    };
    let strictly_decreasing = samples
        .iter()
        .filter(|e| e.s != 0.0)
        .all(|e| e.lambda < lambda0);
    Ok(EntropyVariation {
        lambda0,
        samples,
        linear_coefficient: b1,
        fitted_curvature: -b2,
        strictly_decreasing,
    })
}
