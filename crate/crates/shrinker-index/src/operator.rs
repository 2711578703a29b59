//! Fourier-mode stability operators on profile curves.
//!
//! For f = u(s)·Y_k(θ) the stability operator acts as
//!
//!   L_k u = u″ + (log w)′ u′ + (|A|² + ½ − θ_k / r²) u,   w = r^m e^{−|γ|²/4}.
//!
//! Discretization is cell-centred: unknowns sit at the midpoints between
//! profile samples, fluxes at the samples. The pencil is
//! (stiffness, mass) with stiffness·u ≈ −L_k u · mass, so eigenpairs solve
//! L_k u + μ u = 0.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::banded::SymTridiag;
use crate::error::{Error, Result};
use crate::geometry::{End, ProfileCurve, WeightSpec, AXIS_TOL};
use crate::numerics::{fd_weights, max_abs};

/// Cells closer than this (in arc length) to an axis endpoint are left out
/// of residual checks; the staggered scheme has relative error (h/r)² there.
pub const AXIS_EXCLUSION: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    DirichletTruncation,
    AxisDirichlet,
    AxisEven,
    Periodic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BcPolicy {
    /// Periodic on closed curves; on open curves axis_even (k = 0) or
    /// axis_dirichlet (k ≥ 1) at axis endpoints and dirichlet_truncation at
    /// the other ends.
    Natural,
    Explicit(BoundaryCondition, BoundaryCondition),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellGeometry {
    pub s: f64,
    pub x: f64,
    pub r: f64,
    pub phi: f64,
    pub kappa: f64,
    pub mean_curvature: f64,
    pub a2: f64,
    pub nu_axis: f64,
    pub nu_r: f64,
    /// Normalized weight (4π)^{−n/2}|S^m| r^m e^{−|γ|²/4}.
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeOperator {
    pub k: usize,
    pub n: usize,
    pub m: usize,
    pub h: f64,
    pub closed: bool,
    pub theta_k: f64,
    pub cells: Vec<CellGeometry>,
    /// Weights at the samples, i.e. at the cell faces.
    pub face_weights: Vec<f64>,
    pub potential: Vec<f64>,
    pub stiffness: SymTridiag,
    pub mass: Vec<f64>,
    pub bc: [BoundaryCondition; 2],
    /// Cells used by residual checks.
    pub interior: Vec<bool>,
}

/// Angular eigenvalue of mode k: k² for n = 2, l(l + n − 2) for l ∈ {0, 1}
/// when n > 2.
pub fn theta(n: usize, k: usize) -> Result<f64> {
    if n == 2 {
        return Ok((k * k) as f64);
    }
    if k <= 1 {
        return Ok((k * (k + n - 2)) as f64);
    }
    Err(Error::UnsupportedMode(format!(
        "mode {k} is not available for n = {n} (only l = 0, 1)"
    )))
}

/// Geometry at the midpoints of the cells between consecutive samples.
pub fn cell_geometry(curve: &ProfileCurve) -> Result<Vec<CellGeometry>> {
    let len = curve.len();
    let cells = len - 1;
    let h = curve.h;
    let m = curve.m as f64;
    let spec = WeightSpec::for_curve(curve);
    let interp = [-1.0 / 16.0, 9.0 / 16.0, 9.0 / 16.0, -1.0 / 16.0];
    let deriv = [1.0 / 24.0, -27.0 / 24.0, 27.0 / 24.0, -1.0 / 24.0];
    let mut out = Vec::with_capacity(cells);
    for j in 0..cells {
        let (phi, kappa) = if curve.closed {
            let vals: Vec<f64> = (-1..=2).map(|d| curve.phi_periodic(j as isize + d)).collect();
            (
                vals.iter().zip(&interp).map(|(v, w)| v * w).sum::<f64>(),
                vals.iter().zip(&deriv).map(|(v, w)| v * w).sum::<f64>() / h,
            )
        } else {
            let width = 4.min(len);
            let first = (j as isize - 1).clamp(0, (len - width) as isize) as usize;
            let nodes: Vec<f64> = (first..first + width)
                .map(|i| i as f64 - (j as f64 + 0.5))
                .collect();
            let c = fd_weights(0.0, &nodes, 1);
            let vals = &curve.points[first..first + width];
            (
                vals.iter().zip(&c[0]).map(|(p, w)| p.phi * w).sum::<f64>(),
                vals.iter().zip(&c[1]).map(|(p, w)| p.phi * w).sum::<f64>() / h,
            )
        };
        let (p0, p1) = (curve.points[j], curve.points[j + 1]);
        let x = 0.5 * (p0.x + p1.x) + h / 8.0 * (p0.phi.cos() - p1.phi.cos());
        let r = 0.5 * (p0.r + p1.r) + h / 8.0 * (p0.phi.sin() - p1.phi.sin());
        if !(r > AXIS_TOL) {
            return Err(Error::InvalidProfile(format!("cell {j} touches the axis")));
        }
        let (nu_axis, nu_r) = (-phi.sin(), phi.cos());
        out.push(CellGeometry {
            s: (j as f64 + 0.5) * h,
            x,
            r,
            phi,
            kappa,
            mean_curvature: -kappa + m * nu_r / r,
            a2: kappa * kappa + m * nu_r * nu_r / (r * r),
            nu_axis,
            nu_r,
            weight: spec.normalization * spec.weight(x, r),
        });
    }
    Ok(out)
}

fn natural_bc(curve: &ProfileCurve, end: End, k: usize) -> BoundaryCondition {
    if curve.closed {
        BoundaryCondition::Periodic
    } else if curve.is_axis_end(end) {
        if k == 0 {
            BoundaryCondition::AxisEven
        } else {
            BoundaryCondition::AxisDirichlet
        }
    } else {
        BoundaryCondition::DirichletTruncation
    }
}

fn check_bc(curve: &ProfileCurve, end: End, k: usize, bc: BoundaryCondition) -> Result<()> {
    use BoundaryCondition::*;
    let axis = curve.is_axis_end(end);
    let bad = |msg: &str| Err(Error::BoundaryMismatch(format!("{bc:?} at {end:?}: {msg}")));
    match (bc, curve.closed) {
        (Periodic, true) => Ok(()),
        (Periodic, false) => bad("periodic conditions need a closed curve"),
        (_, true) => bad("closed curves only take periodic conditions"),
        (AxisEven, false) if !axis => bad("endpoint is not on the axis"),
        (AxisEven, false) if k != 0 => bad("axis_even is the k = 0 condition"),
        (AxisDirichlet, false) if !axis => bad("endpoint is not on the axis"),
        (AxisDirichlet, false) if k == 0 => bad("axis_dirichlet is the k >= 1 condition"),
        (DirichletTruncation, false) if axis => bad("axis endpoints take an axis condition"),
        _ => Ok(()),
    }
}

pub fn assemble_mode_operator(curve: &ProfileCurve, k: usize, policy: BcPolicy) -> Result<ModeOperator> {
    curve.validate()?;
    let theta_k = theta(curve.n, k)?;
    let bc = match policy {
        BcPolicy::Natural => [natural_bc(curve, End::Start, k), natural_bc(curve, End::Finish, k)],
        BcPolicy::Explicit(a, b) => [a, b],
    };
    check_bc(curve, End::Start, k, bc[0])?;
    check_bc(curve, End::Finish, k, bc[1])?;

    let cells = cell_geometry(curve)?;
    let nc = cells.len();
    let h = curve.h;
    let spec = WeightSpec::for_curve(curve);
    let face_weights: Vec<f64> = curve
        .points
        .iter()
        .map(|p| spec.normalization * spec.weight(p.x, p.r))
        .collect();
    let potential: Vec<f64> = cells
        .iter()
        .map(|c| c.a2 + 0.5 - theta_k / (c.r * c.r))
        .collect();
    let mass: Vec<f64> = cells.iter().map(|c| c.weight * h).collect();

    let mut diag = vec![0.0; nc];
    let mut off = vec![0.0; nc.saturating_sub(1)];
    let mut corner = None;
    for j in 0..nc {
        diag[j] = (face_weights[j] + face_weights[j + 1]) / h - cells[j].weight * potential[j] * h;
    }
    for j in 0..nc.saturating_sub(1) {
        off[j] = -face_weights[j + 1] / h;
    }
    if curve.closed {
        corner = Some(-face_weights[0] / h);
    } else {
        let ghost = |bc: BoundaryCondition, w: f64| match bc {
            BoundaryCondition::AxisEven => -w / h,
            _ => w / h,
        };
        diag[0] += ghost(bc[0], face_weights[0]);
        diag[nc - 1] += ghost(bc[1], face_weights[nc]);
    }

    let mut interior = vec![true; nc];
    if !curve.closed {
        for (end, bcv) in [(End::Start, bc[0]), (End::Finish, bc[1])] {
            let idx = |j: usize| if end == End::Start { j } else { nc - 1 - j };
            if bcv == BoundaryCondition::DirichletTruncation {
                interior[idx(0)] = false;
            } else {
                let reach = ((AXIS_EXCLUSION / h).ceil() as usize).min(nc);
                for j in 0..reach {
                    interior[idx(j)] = false;
                }
            }
        }
    }

    Ok(ModeOperator {
        k,
        n: curve.n,
        m: curve.m,
        h,
        closed: curve.closed,
        theta_k,
        cells,
        face_weights,
        potential,
        stiffness: SymTridiag { diag, off, corner },
        mass,
        bc,
        interior,
    })
}

impl ModeOperator {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Weighted integral [u v] on the cell grid.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.mass.iter().zip(u).zip(v).map(|((m, a), b)| m * a * b).sum()
    }

    /// −(L_k u) on the cell grid.
    pub fn apply_negative(&self, u: &[f64]) -> Vec<f64> {
        self.stiffness
            .matvec(u)
            .iter()
            .zip(&self.mass)
            .map(|(a, m)| a / m)
            .collect()
    }

    /// Debug dump: one row per cell with s, r, w, V.
    pub fn dump_csv(&self) -> String {
        let mut out = String::from("s,r,w,V\n");
        for (c, v) in self.cells.iter().zip(&self.potential) {
            writeln!(out, "{},{},{},{}", c.s, c.r, c.weight, v).unwrap();
        }
        out
    }

    fn check_len(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: u.len(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnownFunction {
    Dilation,
    AxialTranslation,
    RotationalTranslation,
}

/// The dilation and translation Jacobi fields sampled on the cell grid,
/// with their Fourier mode.
pub fn known_eigenfunction(curve: &ProfileCurve, which: KnownFunction) -> Result<(usize, Vec<f64>)> {
    let cells = cell_geometry(curve)?;
    Ok(match which {
        KnownFunction::Dilation => (0, cells.iter().map(|c| c.mean_curvature).collect()),
        KnownFunction::AxialTranslation => (0, cells.iter().map(|c| c.nu_axis).collect()),
        KnownFunction::RotationalTranslation => (1, cells.iter().map(|c| c.nu_r).collect()),
    })
}

/// max over interior cells of |L_k u + λ u| / max |u|.
pub fn residual_check(op: &ModeOperator, u: &[f64], lambda: f64) -> Result<f64> {
    op.check_len(u)?;
    let scale = max_abs(u);
    if scale == 0.0 {
        return Err(Error::ZeroFunction("residual check needs a nonzero function"));
    }
    let neg_lu = op.apply_negative(u);
    Ok(neg_lu
        .iter()
        .zip(u)
        .zip(&op.interior)
        .filter(|(_, &keep)| keep)
        .map(|((a, b), _)| (-a + lambda * b).abs())
        .fold(0.0, f64::max)
        / scale)
}
