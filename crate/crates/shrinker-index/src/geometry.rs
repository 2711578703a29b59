//! Quotient geometry of rotationally symmetric hypersurfaces.
//!
//! A hypersurface of revolution in ℝ^{n+1} is stored by its profile curve
//! γ(s) = (x(s), r(s)) in the half-plane {r ≥ 0}, sampled at uniform arc
//! length with tangent angle φ. Conventions:
//!
//! * T = (cos φ, sin φ), ν = (−sin φ, cos φ), κ = dφ/ds
//! * H = −κ + m (ν·e_r)/r, |A|² = κ² + m (ν·e_r)²/r², m = n − 1
//!
//! With these signs a shrinker satisfies H = ½ γ·ν.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::numerics::{fd_weights, sphere_area, window_start};

/// Samples with r at or below this are treated as lying on the axis.
pub const AXIS_TOL: f64 = 1e-9;
/// Tolerance on |sin φ| = 1 at axis endpoints.
const AXIS_ANGLE_TOL: f64 = 1e-6;
/// Tolerance for first/last coincidence of closed curves.
const CLOSURE_TOL: f64 = 1e-6;
/// Stencil width for φ derivatives.
const STENCIL: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct ProfilePoint {
    pub x: f64,
    pub r: f64,
    pub phi: f64,
}

impl ProfilePoint {
    pub fn new(x: f64, r: f64, phi: f64) -> Self {
        Self { x, r, phi }
    }

    pub fn norm_sq(&self) -> f64 {
        self.x * self.x + self.r * self.r
    }
}

impl From<[f64; 3]> for ProfilePoint {
    fn from(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl From<ProfilePoint> for [f64; 3] {
    fn from(p: ProfilePoint) -> Self {
        [p.x, p.r, p.phi]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum End {
    Start,
    Finish,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    pub n: usize,
    pub m: usize,
    pub closed: bool,
    pub h: f64,
    pub points: Vec<ProfilePoint>,
}

impl ProfileCurve {
    /// Build and validate a curve with m = n − 1.
    pub fn new(n: usize, closed: bool, h: f64, points: Vec<ProfilePoint>) -> Result<Self> {
        let curve = Self {
            n,
            m: n.saturating_sub(1),
            closed,
            h,
            points,
        };
        curve.validate()?;
        Ok(curve)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let curve: Self =
            serde_json::from_str(s).map_err(|e| Error::InvalidProfile(e.to_string()))?;
        curve.validate()?;
        Ok(curve)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("profile curves always serialize")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidProfile(msg));
        if self.n < 2 {
            return bad(format!("ambient dimension n = {} must be at least 2", self.n));
        }
        if self.m + 1 != self.n {
            return bad(format!("m = {} must equal n - 1 = {}", self.m, self.n - 1));
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return bad(format!("step h = {} must be positive", self.h));
        }
        let len = self.points.len();
        if len < 2 || (self.closed && len < 4) {
            return bad(format!("{len} samples is too few"));
        }
        for (i, p) in self.points.iter().enumerate() {
            if !(p.x.is_finite() && p.r.is_finite() && p.phi.is_finite()) {
                return bad(format!("non-finite sample {i}"));
            }
            if p.r < 0.0 {
                return bad(format!("negative r at sample {i}"));
            }
            let is_end = !self.closed && (i == 0 || i == len - 1);
            if p.r <= AXIS_TOL {
                if !is_end {
                    return bad(format!("interior sample {i} lies on the axis"));
                }
                if (p.phi.sin().abs() - 1.0).abs() > AXIS_ANGLE_TOL {
                    return bad(format!("axis endpoint {i} is not perpendicular to the axis"));
                }
            }
        }
        for i in 1..len {
            if (self.points[i].phi - self.points[i - 1].phi).abs() > PI {
                return bad(format!("tangent angle jumps between samples {} and {i}", i - 1));
            }
        }
        if self.closed {
            let (a, b) = (self.points[0], self.points[len - 1]);
            let gap = ((a.x - b.x).powi(2) + (a.r - b.r).powi(2)).sqrt();
            if gap > CLOSURE_TOL {
                return bad(format!("closed curve endpoints differ by {gap:.3e}"));
            }
            let turns = (b.phi - a.phi) / (2.0 * PI);
            if (turns - turns.round()).abs() * 2.0 * PI > CLOSURE_TOL {
                return bad("closed curve tangent does not wind by a multiple of 2π".into());
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of distinct samples (the repeated closing sample is dropped).
    pub fn distinct_len(&self) -> usize {
        if self.closed {
            self.points.len() - 1
        } else {
            self.points.len()
        }
    }

    pub fn arc_length(&self) -> f64 {
        (self.points.len() - 1) as f64 * self.h
    }

    pub fn is_axis_end(&self, end: End) -> bool {
        if self.closed {
            return false;
        }
        let p = match end {
            End::Start => self.points[0],
            End::Finish => self.points[self.points.len() - 1],
        };
        p.r <= AXIS_TOL
    }

    fn is_axis_sample(&self, i: usize) -> bool {
        !self.closed && (i == 0 || i + 1 == self.len()) && self.points[i].r <= AXIS_TOL
    }

    /// Total change of φ over one loop of a closed curve.
    pub fn winding(&self) -> f64 {
        self.points[self.len() - 1].phi - self.points[0].phi
    }

    /// φ at an arbitrary integer index of a closed curve, continued across
    /// the seam so that it stays continuous.
    pub(crate) fn phi_periodic(&self, j: isize) -> f64 {
        let n = self.distinct_len() as isize;
        let q = j.div_euclid(n);
        let r = j.rem_euclid(n) as usize;
        self.points[r].phi + q as f64 * self.winding()
    }

    /// Same curve traversed backwards.
    pub fn reversed(&self) -> Self {
        let points = self
            .points
            .iter()
            .rev()
            .map(|p| ProfilePoint::new(p.x, p.r, p.phi + PI))
            .collect();
        Self {
            points,
            ..self.clone()
        }
    }
}

/// Gaussian weight data for quotient integrals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub n: usize,
    pub m: usize,
    /// (4π)^{−n/2}·|S^m|, with |S^1| = 2π.
    pub normalization: f64,
}

impl WeightSpec {
    pub fn new(n: usize) -> Self {
        let m = n - 1;
        Self {
            n,
            m,
            normalization: (4.0 * PI).powf(-(n as f64) / 2.0) * sphere_area(m),
        }
    }

    pub fn for_curve(curve: &ProfileCurve) -> Self {
        Self::new(curve.n)
    }

    /// r^m e^{−(x²+r²)/4}, without the normalization.
    pub fn weight(&self, x: f64, r: f64) -> f64 {
        r.powi(self.m as i32) * (-(x * x + r * r) / 4.0).exp()
    }
}

fn curvature_impl(curve: &ProfileCurve, i: usize) -> f64 {
    let h = curve.h;
    if curve.closed {
        let c = fd_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 1);
        let i = i as isize;
        return (-2..=2)
            .zip(&c[1])
            .map(|(d, w)| w * curve.phi_periodic(i + d))
            .sum::<f64>()
            / h;
    }
    let len = curve.len();
    let width = STENCIL.min(len);
    let start = window_start(i, width, len);
    let nodes: Vec<f64> = (start..start + width)
        .map(|j| j as f64 - i as f64)
        .collect();
    let c = fd_weights(0.0, &nodes, 1);
    (start..start + width)
        .zip(&c[1])
        .map(|(j, w)| w * curve.points[j].phi)
        .sum::<f64>()
        / h
}

fn check_index(curve: &ProfileCurve, i: usize) -> Result<()> {
    if i >= curve.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: curve.len(),
            what: "profile samples",
        });
    }
    Ok(())
}

/// κ = dφ/ds at sample i. Open curves reject their endpoints; use
/// [`curvature_one_sided`] there.
pub fn curvature(curve: &ProfileCurve, i: usize) -> Result<f64> {
    check_index(curve, i)?;
    if !curve.closed && (i == 0 || i + 1 == curve.len()) {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: curve.len(),
            what: "centred curvature on an open curve",
        });
    }
    Ok(curvature_impl(curve, i))
}

/// κ at any sample, with one-sided stencils at open endpoints.
pub fn curvature_one_sided(curve: &ProfileCurve, i: usize) -> Result<f64> {
    check_index(curve, i)?;
    Ok(curvature_impl(curve, i))
}

/// (ν·e_r)/r, with the smooth limit −κ at axis endpoints.
fn orbit_ratio(curve: &ProfileCurve, i: usize, kappa: f64) -> Result<f64> {
    let p = curve.points[i];
    if p.r > AXIS_TOL {
        Ok(p.phi.cos() / p.r)
    } else if curve.is_axis_sample(i) {
        Ok(-kappa)
    } else {
        Err(Error::InvalidProfile(format!("sample {i} has r <= 0 and is not an axis endpoint")))
    }
}

pub fn mean_curvature(curve: &ProfileCurve, i: usize) -> Result<f64> {
    check_index(curve, i)?;
    let kappa = curvature_impl(curve, i);
    let q = orbit_ratio(curve, i, kappa)?;
    Ok(-kappa + curve.m as f64 * q)
}

pub fn second_fundamental_norm(curve: &ProfileCurve, i: usize) -> Result<f64> {
    check_index(curve, i)?;
    let kappa = curvature_impl(curve, i);
    let q = orbit_ratio(curve, i, kappa)?;
    Ok(kappa * kappa + curve.m as f64 * q * q)
}

/// (ν·e_axis, ν·e_r) at sample i.
pub fn normal_components(curve: &ProfileCurve, i: usize) -> Result<(f64, f64)> {
    check_index(curve, i)?;
    let phi = curve.points[i].phi;
    Ok((-phi.sin(), phi.cos()))
}

/// ½ γ·ν at sample i.
pub fn support_half(p: &ProfilePoint) -> f64 {
    0.5 * (-p.x * p.phi.sin() + p.r * p.phi.cos())
}

/// Max over interior samples of |H − ½ γ·ν|.
pub fn shrinker_residual(curve: &ProfileCurve) -> f64 {
    let range = if curve.closed {
        0..curve.distinct_len()
    } else {
        1..curve.len().saturating_sub(1)
    };
    range
        .map(|i| {
            let h = mean_curvature(curve, i).unwrap_or(f64::INFINITY);
            (h - support_half(&curve.points[i])).abs()
        })
        .fold(0.0, f64::max)
}

/// H at every sample, one-sided at open endpoints.
pub fn mean_curvature_samples(curve: &ProfileCurve) -> Result<Vec<f64>> {
    (0..curve.len()).map(|i| mean_curvature(curve, i)).collect()
}

pub fn second_fundamental_samples(curve: &ProfileCurve) -> Result<Vec<f64>> {
    (0..curve.len())
        .map(|i| second_fundamental_norm(curve, i))
        .collect()
}

/// [f]′: normalized weighted trapezoid over the stored samples.
pub fn weighted_integral(curve: &ProfileCurve, f: &[f64], spec: &WeightSpec) -> Result<f64> {
    if f.len() != curve.len() {
        return Err(Error::LengthMismatch {
            expected: curve.len(),
            got: f.len(),
        });
    }
    let len = curve.len();
    let mut sum = 0.0;
    for (i, (p, fi)) in curve.points.iter().zip(f).enumerate() {
        let c = if curve.closed {
            if i + 1 == len {
                0.0
            } else {
                1.0
            }
        } else if i == 0 || i + 1 == len {
            0.5
        } else {
            1.0
        };
        sum += c * fi * spec.weight(p.x, p.r);
    }
    Ok(spec.normalization * sum * curve.h)
}

/// Estimate of the weighted mass beyond the free (non-axis) ends of an open
/// curve, assuming the curve continues roughly radially or cylindrically.
pub fn tail_bound(curve: &ProfileCurve, spec: &WeightSpec) -> f64 {
    if curve.closed {
        return 0.0;
    }
    [0, curve.len() - 1]
        .iter()
        .filter(|&&i| !curve.is_axis_sample(i))
        .map(|&i| {
            let p = curve.points[i];
            let rad = p.norm_sq().sqrt().max(1.0);
            spec.normalization * spec.weight(p.x, p.r) * 2.0 / rad * (1.0 + p.r.powi(spec.m as i32))
        })
        .sum()
}

/// CSV table with header `s,x,r,phi,H,A2`.
pub fn to_csv(curve: &ProfileCurve) -> Result<String> {
    let hs = mean_curvature_samples(curve)?;
    let a2 = second_fundamental_samples(curve)?;
    let mut out = String::from("s,x,r,phi,H,A2\n");
    for (i, p) in curve.points.iter().enumerate() {
        let s = i as f64 * curve.h;
        writeln!(out, "{s},{},{},{},{},{}", p.x, p.r, p.phi, hs[i], a2[i]).unwrap();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(radius: f64, cx: f64, cr: f64, n_pts: usize) -> ProfileCurve {
        let h = 2.0 * PI * radius / n_pts as f64;
        let points = (0..=n_pts)
            .map(|j| {
                let a = j as f64 * h / radius;
                ProfilePoint::new(cx + radius * a.cos(), cr + radius * a.sin(), a + PI / 2.0)
            })
            .collect();
        ProfileCurve::new(2, true, h, points).unwrap()
    }

    #[test]
    fn straight_segment_has_zero_curvature() {
        let points = (0..20)
            .map(|i| ProfilePoint::new(i as f64 * 0.1, 1.0, 0.0))
            .collect();
        let c = ProfileCurve::new(2, false, 0.1, points).unwrap();
        for i in 1..19 {
            assert_eq!(curvature(&c, i).unwrap(), 0.0);
        }
        assert!(curvature(&c, 0).is_err());
        assert!(curvature(&c, 19).is_err());
        assert!(curvature_one_sided(&c, 0).is_ok());
    }

    #[test]
    fn ccw_circle_curvature_is_inverse_radius() {
        let c = circle(2.0, 0.0, 5.0, 400);
        for i in 0..c.len() {
            assert!((curvature(&c, i).unwrap() - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn reversal_flips_signed_quantities() {
        let c = circle(1.0, 0.3, 3.0, 200);
        let r = c.reversed();
        let n = c.len();
        for i in 0..n {
            let j = n - 1 - i;
            assert!((curvature(&c, i).unwrap() + curvature(&r, j).unwrap()).abs() < 1e-9);
            assert!((mean_curvature(&c, i).unwrap() + mean_curvature(&r, j).unwrap()).abs() < 1e-9);
            let a = second_fundamental_norm(&c, i).unwrap();
            let b = second_fundamental_norm(&r, j).unwrap();
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_interior_axis_sample() {
        let points = vec![
            ProfilePoint::new(0.0, 1.0, -PI / 2.0),
            ProfilePoint::new(0.0, 0.0, -PI / 2.0),
            ProfilePoint::new(0.0, 1.0, -PI / 2.0),
        ];
        assert!(ProfileCurve::new(2, false, 1.0, points).is_err());
    }

    #[test]
    fn weight_spec_normalization() {
        assert!((WeightSpec::new(2).normalization - 0.5).abs() < 1e-15);
        let w3 = WeightSpec::new(3);
        assert!((w3.normalization - (4.0 * PI).powf(-1.5) * 4.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let c = circle(1.0, 0.1, 3.0, 50);
        let back = ProfileCurve::from_json(&c.to_json()).unwrap();
        assert_eq!(c, back);
    }
}
