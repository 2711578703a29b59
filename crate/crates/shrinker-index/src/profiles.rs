//! Shrinker profile curves: analytic families, integration of the profile
//! ODE, closed-orbit shooting, truncation to balls and resampling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{ProfileCurve, ProfilePoint, AXIS_TOL};
use crate::numerics::{fd_weights, wrap_angle};

/// Trajectories leaving this ball are stopped.
pub const ESCAPE_RADIUS: f64 = 100.0;
/// Fraction of the step used for the series start off the axis.
const AXIS_SERIES_FRACTION: f64 = 1.0 / 64.0;
const MAX_SUBSTEPS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Plane,
    Sphere,
    Cylinder,
}

impl FromStr for ProfileKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plane" => Ok(Self::Plane),
            "sphere" => Ok(Self::Sphere),
            "cylinder" => Ok(Self::Cylinder),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

fn check_dimension(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n = {n} must be at least 2")));
    }
    Ok(())
}

fn check_step(h: f64) -> Result<()> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidArgument(format!("step {h} must be positive")));
    }
    Ok(())
}

/// Sphere S^n(√(2n)) pole to pole, cylinder of radius √(2(n−1)) over
/// |x| ≤ R, or the plane {x = 0} for 0 ≤ r ≤ R. The step is adjusted so
/// that it divides the length exactly.
pub fn analytic_profile(kind: ProfileKind, n: usize, h: f64, half_length: f64) -> Result<ProfileCurve> {
    check_dimension(n)?;
    check_step(h)?;
    if kind != ProfileKind::Sphere && !(half_length.is_finite() && half_length > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "half length {half_length} must be positive"
        )));
    }
    let (length, point): (f64, Box<dyn Fn(f64) -> ProfilePoint>) = match kind {
        ProfileKind::Sphere => {
            let rho = (2.0 * n as f64).sqrt();
            (
                PI * rho,
                Box::new(move |s| {
                    let a = s / rho;
                    ProfilePoint::new(-rho * a.cos(), rho * a.sin(), PI / 2.0 - a)
                }),
            )
        }
        ProfileKind::Cylinder => {
            let rc = (2.0 * (n as f64 - 1.0)).sqrt();
            (
                2.0 * half_length,
                Box::new(move |s| ProfilePoint::new(s - half_length, rc, 0.0)),
            )
        }
        ProfileKind::Plane => (
            half_length,
            Box::new(|s| ProfilePoint::new(0.0, s, PI / 2.0)),
        ),
    };
    let count = (length / h).ceil().max(4.0) as usize;
    let step = length / count as f64;
    let mut points: Vec<ProfilePoint> = (0..=count).map(|j| point(j as f64 * step)).collect();
    match kind {
        ProfileKind::Sphere => {
            points[0].r = 0.0;
            points[count].r = 0.0;
            points[count].x = -points[0].x;
        }
        ProfileKind::Plane => points[0].r = 0.0,
        ProfileKind::Cylinder => {}
    }
    ProfileCurve::new(n, false, step, points)
}

/// Closed counterclockwise circle of the given radius centred at (cx, cr).
pub fn circle_profile(cx: f64, cr: f64, radius: f64, n: usize, h: f64) -> Result<ProfileCurve> {
    check_dimension(n)?;
    check_step(h)?;
    if !(radius > 0.0 && cr > radius) {
        return Err(Error::InvalidArgument(
            "circle must have positive radius and stay off the axis".into(),
        ));
    }
    let count = (2.0 * PI * radius / h).ceil().max(8.0) as usize;
    let step = 2.0 * PI * radius / count as f64;
    let mut points: Vec<ProfilePoint> = (0..=count)
        .map(|j| {
            let a = -PI / 2.0 + j as f64 * step / radius;
            ProfilePoint::new(cx + radius * a.cos(), cr + radius * a.sin(), a + PI / 2.0)
        })
        .collect();
    points[count].x = points[0].x;
    points[count].r = points[0].r;
    ProfileCurve::new(n, true, step, points)
}

type State = [f64; 3];

/// Error-free a + b = s + e.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// ODE state carried as hi + lo per component, so that increments below
/// half an ulp still accumulate. Near the cylinder the solution moves by
/// less than that per step while errors in r feed a mode growing like e^{x²/4}.
#[derive(Clone, Copy, Debug)]
struct Cstate {
    hi: State,
    lo: State,
}

impl Cstate {
    fn new(hi: State) -> Self {
        Self { hi, lo: [0.0; 3] }
    }

    /// self + t·d.
    fn shifted(&self, d: &State, t: f64) -> Self {
        let mut out = *self;
        for i in 0..3 {
            let (s, e) = two_sum(self.hi[i], self.lo[i] + t * d[i]);
            out.hi[i] = s;
            out.lo[i] = e;
        }
        out
    }
}

/// Arc-length profile system; None when r ≤ 0.
fn rhs(m: f64, y: &Cstate) -> Option<State> {
    let x = y.hi[0] + y.lo[0];
    let (r, r_lo) = (y.hi[1], y.lo[1]);
    let phi = y.hi[2] + y.lo[2];
    if r.is_nan() || r <= 0.0 {
        return None;
    }
    let (s, c) = phi.sin_cos();
    // m/r − r/2 as (2m − r²)/(2r): no cancellation near r² = 2m
    let gap = r.mul_add(-r, 2.0 * m) - 2.0 * r * r_lo;
    Some([c, s, c * gap / (2.0 * r) + 0.5 * x * s])
}

fn rk4(m: f64, y: &Cstate, h: f64) -> Option<Cstate> {
    let k1 = rhs(m, y)?;
    let k2 = rhs(m, &y.shifted(&k1, h / 2.0))?;
    let k3 = rhs(m, &y.shifted(&k2, h / 2.0))?;
    let k4 = rhs(m, &y.shifted(&k3, h))?;
    let incr: State = std::array::from_fn(|i| k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    let out = y.shifted(&incr, h / 6.0);
    (out.hi[1] > 0.0 && out.hi.iter().all(|v| v.is_finite())).then_some(out)
}

/// One output step of length h. Near the axis the 1/r term gets large
/// relative to 1/h, so the step is split.
fn advance(m: f64, y: &Cstate, h: f64) -> Option<Cstate> {
    if y.hi[1] <= AXIS_TOL {
        return axis_step(m, &y.hi, h);
    }
    let subs = ((8.0 * h / y.hi[1]).ceil() as usize).clamp(1, MAX_SUBSTEPS);
    let dh = h / subs as f64;
    let mut z = *y;
    for _ in 0..subs {
        z = rk4(m, &z, dh)?;
    }
    Some(z)
}

/// Leave the axis: circular-arc series with the regularized curvature
/// x sin φ / (2(1+m)) for a short distance, then substepped RK4.
fn axis_step(m: f64, y: &State, h: f64) -> Option<Cstate> {
    let [x0, _, phi0] = *y;
    let k0 = x0 * phi0.sin() / (2.0 * (1.0 + m));
    let s0 = h * AXIS_SERIES_FRACTION;
    let (x1, r1) = if k0.abs() < 1e-300 {
        (x0, s0)
    } else {
        (
            x0 + ((phi0 + k0 * s0).sin() - phi0.sin()) / k0,
            (phi0.cos() - (phi0 + k0 * s0).cos()) / k0,
        )
    };
    let mut z = Cstate::new([x1, r1, phi0 + k0 * s0]);
    let subs = MAX_SUBSTEPS - 1;
    let dh = (h - s0) / subs as f64;
    for _ in 0..subs {
        z = rk4(m, &z, dh)?;
    }
    Some(z)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxArc,
    Axis,
    Escaped,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OdeTrajectory {
    pub curve: ProfileCurve,
    pub stop: StopReason,
}

/// Fixed-step RK4 integration of the profile ODE from `start`.
pub fn integrate_shrinker_ode(
    start: ProfilePoint,
    n: usize,
    step: f64,
    max_arc: f64,
) -> Result<OdeTrajectory> {
    check_dimension(n)?;
    check_step(step)?;
    if start.r < 0.0 || !start.r.is_finite() {
        return Err(Error::InvalidArgument("start must have r >= 0".into()));
    }
    if start.r <= AXIS_TOL && (start.phi.sin() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(
            "an axis start must leave the axis perpendicularly (sin phi = 1)".into(),
        ));
    }
    let m = (n - 1) as f64;
    let total = (max_arc / step).floor() as usize;
    let mut y = Cstate::new([start.x, start.r.max(0.0), start.phi]);
    if start.r <= AXIS_TOL {
        y.hi[1] = 0.0;
    }
    let mut points = vec![ProfilePoint::new(y.hi[0], y.hi[1], y.hi[2])];
    let mut stop = StopReason::MaxArc;
    for _ in 0..total {
        match advance(m, &y, step) {
            None => {
                stop = StopReason::Axis;
                break;
            }
            Some(z) => {
                y = z;
                points.push(ProfilePoint::new(y.hi[0], y.hi[1], y.hi[2]));
                if y.hi[0].hypot(y.hi[1]) > ESCAPE_RADIUS {
                    stop = StopReason::Escaped;
                    break;
                }
            }
        }
    }
    if points.len() < 2 {
        return Err(Error::InvalidArgument(
            "trajectory terminated before completing one step".into(),
        ));
    }
    Ok(OdeTrajectory {
        curve: ProfileCurve::new(n, false, step, points)?,
        stop,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShootingProblem {
    pub n: usize,
    pub r_bracket: (f64, f64),
    pub step: f64,
    pub max_arc: f64,
    pub closure_tol: f64,
    pub scan_points: usize,
    pub max_iter: usize,
}

impl ShootingProblem {
    pub fn new(n: usize, r_bracket: (f64, f64)) -> Self {
        Self {
            n,
            r_bracket,
            step: 1e-3,
            max_arc: 30.0,
            closure_tol: 1e-8,
            scan_points: 200,
            max_iter: 200,
        }
    }

    fn validate(&self) -> Result<()> {
        check_dimension(self.n)?;
        check_step(self.step)?;
        let (lo, hi) = self.r_bracket;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "bracket [{lo}, {hi}] must be positive and nondegenerate"
            )));
        }
        if !(self.closure_tol > 0.0) {
            return Err(Error::InvalidArgument("closure tolerance must be positive".into()));
        }
        if self.scan_points < 2 || self.max_iter == 0 {
            return Err(Error::InvalidArgument("scan needs >= 2 points and >= 1 iteration".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSample {
    pub r0: f64,
    pub mismatch: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShootingReport {
    pub r_star: f64,
    pub mismatch_history: Vec<f64>,
    pub curve: Option<ProfileCurve>,
    pub converged: bool,
    pub final_mismatch: f64,
    pub bracket: (f64, f64),
    pub half_length: f64,
    pub scan: Vec<ScanSample>,
}

/// First return to the section {x = 0} of the orbit through (0, r0) with
/// horizontal tangent: returns (φ − π wrapped, arc length to the return).
fn first_return(m: f64, r0: f64, step: f64, max_arc: f64) -> Option<(f64, f64)> {
    let mut y = Cstate::new([0.0, r0, 0.0]);
    let mut s = 0.0;
    while s < max_arc {
        let z = advance(m, &y, step)?.hi;
        if z[0].hypot(z[1]) > ESCAPE_RADIUS {
            return None;
        }
        if z[0] <= 0.0 && s > 0.0 {
            let (mut lo, mut hi) = (0.0, step);
            let mut at = z;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let w = advance(m, &y, mid)?.hi;
                if w[0] > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                    at = w;
                }
                if hi - lo < 1e-16 {
                    break;
                }
            }
            return Some((wrap_angle(at[2] - PI), s + hi));
        }
        y = advance(m, &y, step)?;
        s += step;
    }
    None
}

/// Exactly `count` RK4 output steps of length `hh` from (0, r0, 0).
fn fixed_orbit(m: f64, r0: f64, hh: f64, count: usize) -> Option<Vec<State>> {
    let mut out = Vec::with_capacity(count + 1);
    let mut y = Cstate::new([0.0, r0, 0.0]);
    out.push(y.hi);
    for _ in 0..count {
        y = advance(m, &y, hh)?;
        out.push(y.hi);
    }
    Some(out)
}

fn closure_defect(m: f64, r0: f64, hh: f64, count: usize) -> Option<[f64; 2]> {
    let orbit = fixed_orbit(m, r0, hh, count)?;
    let end = orbit[count];
    Some([end[0], wrap_angle(end[2] - PI)])
}

/// Newton polish of (r0, step) so that exactly `count` steps land on the
/// section with horizontal tangent.
fn polish(m: f64, r0: f64, hh: f64, count: usize, history: &mut Vec<f64>) -> Option<(f64, f64, f64)> {
    let norm = |f: [f64; 2]| f[0].abs().max(f[1].abs());
    let (mut r, mut h) = (r0, hh);
    let mut f = closure_defect(m, r, h, count)?;
    for _ in 0..12 {
        let res = norm(f);
        history.push(res);
        if res < 1e-15 {
            break;
        }
        let dr = 1e-7 * r.max(1.0);
        let dh = 1e-7 * h;
        let fr_p = closure_defect(m, r + dr, h, count)?;
        let fr_m = closure_defect(m, r - dr, h, count)?;
        let fh_p = closure_defect(m, r, h + dh, count)?;
        let fh_m = closure_defect(m, r, h - dh, count)?;
        let j = [
            [(fr_p[0] - fr_m[0]) / (2.0 * dr), (fh_p[0] - fh_m[0]) / (2.0 * dh)],
            [(fr_p[1] - fr_m[1]) / (2.0 * dr), (fh_p[1] - fh_m[1]) / (2.0 * dh)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            break;
        }
        let sr = (j[1][1] * f[0] - j[0][1] * f[1]) / det;
        let sh = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
        let (nr, nh) = (r - sr, h - sh);
        match closure_defect(m, nr, nh, count) {
            Some(nf) if norm(nf) < res => {
                r = nr;
                h = nh;
                f = nf;
            }
            _ => break,
        }
    }
    Some((r, h, norm(f)))
}

/// Reflect the half orbit across {x = 0} into a closed loop.
fn close_by_reflection(n: usize, half: &[State], hh: f64) -> Result<ProfileCurve> {
    let count = half.len() - 1;
    let mut points: Vec<ProfilePoint> = half
        .iter()
        .map(|y| ProfilePoint::new(y[0], y[1], y[2]))
        .collect();
    points[0].x = 0.0;
    points[0].phi = 0.0;
    points[count].x = 0.0;
    points[count].phi = PI;
    for i in (0..count).rev() {
        let p = points[i];
        points.push(ProfilePoint::new(-p.x, p.r, 2.0 * PI - p.phi));
    }
    ProfileCurve::new(n, true, hh, points)
}

/// Scan r0 over the bracket, refine the first valid sign change of the
/// return mismatch by bisection, polish, and reflect into a closed orbit.
pub fn shoot_closed_orbit(problem: &ShootingProblem) -> Result<ShootingReport> {
    problem.validate()?;
    let m = (problem.n - 1) as f64;
    let (lo, hi) = problem.r_bracket;
    let count = problem.scan_points;
    let scan: Vec<ScanSample> = (0..count)
        .into_par_iter()
        .map(|i| {
            let r0 = lo + (hi - lo) * i as f64 / (count - 1) as f64;
            let mismatch = first_return(m, r0, problem.step, problem.max_arc).map(|v| v.0);
            ScanSample { r0, mismatch }
        })
        .collect();

    let mut brackets = Vec::new();
    for w in scan.windows(2) {
        if let (Some(a), Some(b)) = (w[0].mismatch, w[1].mismatch) {
            if a == 0.0 || (a * b < 0.0 && (a - b).abs() < PI) {
                brackets.push((w[0].r0, a, w[1].r0, b));
            }
        }
    }
    if brackets.is_empty() {
        return Err(Error::NoOrbitFound { lo, hi });
    }

    let mut history = Vec::new();
    let mut last_failure = None;
    for &(mut a, mut fa, mut b, _) in &brackets {
        let mut root = None;
        let mut valid = true;
        for _ in 0..problem.max_iter {
            let mid = 0.5 * (a + b);
            let Some((fm, half)) = first_return(m, mid, problem.step, problem.max_arc) else {
                valid = false;
                break;
            };
            history.push(fm.abs());
            if fm == 0.0 || fa == 0.0 || b - a <= 4.0 * f64::EPSILON * b {
                root = Some((mid, half));
                break;
            }
            if (fm < 0.0) == (fa < 0.0) {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        if !valid {
            continue;
        }
        let Some((r_mid, half)) = root else {
            last_failure = Some(0.5 * (a + b));
            continue;
        };
        let steps = (half / problem.step).round().max(4.0) as usize;
        let Some((r_star, hh, defect)) = polish(m, r_mid, half / steps as f64, steps, &mut history)
        else {
            continue;
        };
        let Some(orbit) = fixed_orbit(m, r_star, hh, steps) else {
            continue;
        };
        let converged = defect <= problem.closure_tol;
        let curve = if converged {
            Some(close_by_reflection(problem.n, &orbit, hh)?)
        } else {
            None
        };
        return Ok(ShootingReport {
            r_star,
            mismatch_history: history,
            converged,
            curve,
            final_mismatch: defect,
            bracket: (a, b),
            half_length: hh * steps as f64,
            scan,
        });
    }
    match last_failure {
        Some(r) => Ok(ShootingReport {
            r_star: r,
            final_mismatch: history.last().copied().unwrap_or(f64::INFINITY),
            mismatch_history: history,
            converged: false,
            curve: None,
            bracket: (lo, hi),
            half_length: f64::NAN,
            scan,
        }),
        None => Err(Error::NoOrbitFound { lo, hi }),
    }
}

/// Restriction to D_R = {|γ| ≤ R}. Closed curves entirely inside are
/// returned unchanged; otherwise the piece inside must be connected.
pub fn truncate(curve: &ProfileCurve, radius: f64) -> Result<ProfileCurve> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("radius {radius} must be positive")));
    }
    let r2 = radius * radius;
    let len = curve.distinct_len();
    let inside: Vec<bool> = curve.points[..len].iter().map(|p| p.norm_sq() <= r2).collect();
    let count = inside.iter().filter(|&&b| b).count();
    if count == 0 {
        return Err(Error::EmptyDomain { radius });
    }
    if curve.closed && count == len {
        return Ok(curve.clone());
    }
    let starts: Vec<usize> = (0..len)
        .filter(|&i| {
            let prev = if i == 0 {
                if curve.closed {
                    inside[len - 1]
                } else {
                    false
                }
            } else {
                inside[i - 1]
            };
            inside[i] && !prev
        })
        .collect();
    if starts.len() != 1 {
        return Err(Error::DisconnectedDomain {
            radius,
            pieces: starts.len(),
        });
    }
    let start = starts[0];
    let points: Vec<ProfilePoint> = if curve.closed {
        (0..count)
            .map(|j| {
                let idx = start + j;
                let p = curve.points[idx % len];
                ProfilePoint::new(p.x, p.r, curve.phi_periodic(idx as isize))
            })
            .collect()
    } else {
        curve.points[start..start + count].to_vec()
    };
    if points.len() < 2 {
        return Err(Error::EmptyDomain { radius });
    }
    ProfileCurve::new(curve.n, false, curve.h, points)
}

/// Cubic re-interpolation to uniform arc-length spacing ≈ new_h. Positions
/// use Hermite interpolation with the exact tangents, φ uses four-point
/// Lagrange interpolation.
pub fn resample(curve: &ProfileCurve, new_h: f64) -> Result<ProfileCurve> {
    check_step(new_h)?;
    let length = curve.arc_length();
    let count = (length / new_h).round().max(if curve.closed { 8.0 } else { 1.0 }) as usize;
    let step = length / count as f64;
    let h = curve.h;
    let len = curve.len();
    let distinct = curve.distinct_len() as isize;
    let winding = if curve.closed { curve.winding() } else { 0.0 };

    let sample = |k: isize| -> ProfilePoint {
        if curve.closed {
            let q = k.div_euclid(distinct);
            let p = curve.points[k.rem_euclid(distinct) as usize];
            ProfilePoint::new(p.x, p.r, p.phi + q as f64 * winding)
        } else {
            curve.points[k as usize]
        }
    };

    let mut points = Vec::with_capacity(count + 1);
    for j in 0..=count {
        let t = j as f64 * step / h;
        let mut i = t.floor() as isize;
        if !curve.closed {
            i = i.clamp(0, len as isize - 2);
        }
        let tau = t - i as f64;
        let (p0, p1) = (sample(i), sample(i + 1));
        let h00 = (1.0 + 2.0 * tau) * (1.0 - tau) * (1.0 - tau);
        let h10 = tau * (1.0 - tau) * (1.0 - tau);
        let h01 = tau * tau * (3.0 - 2.0 * tau);
        let h11 = tau * tau * (tau - 1.0);
        let x = h00 * p0.x + h10 * h * p0.phi.cos() + h01 * p1.x + h11 * h * p1.phi.cos();
        let r = h00 * p0.r + h10 * h * p0.phi.sin() + h01 * p1.r + h11 * h * p1.phi.sin();
        let first = if curve.closed {
            i - 1
        } else {
            (i - 1).clamp(0, (len as isize - 4).max(0))
        };
        let width = if curve.closed { 4 } else { 4.min(len) as isize };
        let nodes: Vec<f64> = (0..width).map(|d| (first + d) as f64 - t).collect();
        let c = fd_weights(0.0, &nodes, 0);
        let phi: f64 = (0..width)
            .zip(&c[0])
            .map(|(d, w)| w * sample(first + d).phi)
            .sum();
        points.push(ProfilePoint::new(x, r.max(0.0), phi));
    }
    if curve.closed {
        let p0 = points[0];
        points[count] = ProfilePoint::new(p0.x, p0.r, p0.phi + winding);
    } else {
        points[0] = curve.points[0];
        points[count] = curve.points[len - 1];
    }
    ProfileCurve::new(curve.n, curve.closed, step, points)
}
