//! Second variation of F with optimal spacetime parameters, instability of
//! mode combinations, and the F-index certificate.
//!
//! For f = Σ u_b Y_b split into Fourier blocks b = (k, parity), with Y_b
//! normalized so that the angular mean of Y_b² is c_b (1 for k = 0,
//! 1/(m+1) otherwise), the second variation at (h, y) is
//!
//!   Σ_b c_b uᵀK_k u + 2h[U₀H] − h²[H²] + y₁[U₀ν_x] − ½y₁²[ν_x²]
//!     + c₁(y_c[U_c ν_r] − ½y_c²[ν_r²]) + c₁(y_s[U_s ν_r] − ½y_s²[ν_r²])
//!     − ½c₁[ν_r²] Σ_{extra} y_j²
//!
//! where [·] is the weighted cell integral and K_k the mode stiffness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{mean_curvature_samples, shrinker_residual, ProfileCurve};
use crate::operator::{assemble_mode_operator, cell_geometry, BcPolicy, ModeOperator};
use crate::profiles::truncate;
use crate::spectra::{lowest_eigenpairs, sweep_bottom_spectrum, Parity, SpectralSweep, DEFAULT_PLATEAU_TOL, DEFAULT_SCHEDULE};

pub const CERTIFICATE_SCHEMA: &str = "shrinker-index/certificate/v1";
pub const WITNESS_SCHEMA: &str = "shrinker-index/witnesses/v1";
pub const STABILITY_TOL: f64 = 1e-9;
pub const DEFAULT_MARGIN: f64 = 1e-3;
pub const SIGN_TOL: f64 = 1e-8;
/// Profiles with a larger residual are refused by the certificate.
pub const SHRINKER_TOL: f64 = 1e-6;
const GRAM_TOL: f64 = 1e-14;
const WITNESS_POINTS: usize = 512;

pub const CHECK_ER_N: &str = "e_r·n sign change";
pub const CHECK_H: &str = "H sign change";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeFunction {
    pub k: usize,
    pub parity: Parity,
    pub u: Vec<f64>,
}

impl ModeFunction {
    pub fn new(k: usize, parity: Parity, u: Vec<f64>) -> Self {
        Self { k, parity, u }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            u: self.u.iter().map(|x| c * x).collect(),
            ..self.clone()
        }
    }
}

/// Translation vector y ∈ ℝ^{n+1}: `axial[0]` is the symmetry axis, the
/// remaining axial entries and (cos, sin) are rotational directions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceVector {
    pub axial: Vec<f64>,
    pub cos: f64,
    pub sin: f64,
}

impl SpaceVector {
    pub fn zero(n: usize) -> Self {
        Self {
            axial: vec![0.0; n - 1],
            cos: 0.0,
            sin: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BlockValues {
    /// k = 0 block with dilation and axial translation.
    pub a: f64,
    /// k = 1 cosine block with its rotational translation.
    pub b: f64,
    /// k = 1 sine block with its rotational translation.
    pub c: f64,
    /// Everything else: higher modes and unpaired translation components.
    pub rest: f64,
}

impl BlockValues {
    pub fn total(&self) -> f64 {
        self.a + self.b + self.c + self.rest
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationAssessment {
    #[serde(skip)]
    pub f: Vec<ModeFunction>,
    pub h_star: f64,
    pub y_star: SpaceVector,
    pub value: f64,
    pub unstable: bool,
    pub blocks: BlockValues,
}

/// Cell geometry and mode stiffnesses of one profile, shared by repeated
/// second-variation evaluations.
#[derive(Clone, Debug)]
pub struct VariationContext {
    pub n: usize,
    pub m: usize,
    pub ops: Vec<ModeOperator>,
    pub mean_curvature: Vec<f64>,
    pub nu_axis: Vec<f64>,
    pub nu_r: Vec<f64>,
    g_h: f64,
    g_x: f64,
    g_r: f64,
    total_mass: f64,
}

impl VariationContext {
    /// Operators for modes 0..=max_k with natural boundary conditions.
    pub fn new(curve: &ProfileCurve, max_k: usize) -> Result<Self> {
        let ops = (0..=max_k)
            .map(|k| assemble_mode_operator(curve, k, BcPolicy::Natural))
            .collect::<Result<Vec<_>>>()?;
        let cells = &ops[0].cells;
        let mean_curvature: Vec<f64> = cells.iter().map(|c| c.mean_curvature).collect();
        let nu_axis: Vec<f64> = cells.iter().map(|c| c.nu_axis).collect();
        let nu_r: Vec<f64> = cells.iter().map(|c| c.nu_r).collect();
        let op = &ops[0];
        Ok(Self {
            n: curve.n,
            m: curve.m,
            g_h: op.inner(&mean_curvature, &mean_curvature),
            g_x: op.inner(&nu_axis, &nu_axis),
            g_r: op.inner(&nu_r, &nu_r),
            total_mass: op.mass.iter().sum(),
            mean_curvature,
            nu_axis,
            nu_r,
            ops,
        })
    }

    pub fn len(&self) -> usize {
        self.ops[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Weighted cell integral [u v].
    pub fn integral(&self, u: &[f64], v: &[f64]) -> f64 {
        self.ops[0].inner(u, v)
    }

    fn mode_factor(&self, k: usize) -> f64 {
        if k == 0 {
            1.0
        } else {
            1.0 / (self.m as f64 + 1.0)
        }
    }

    /// Sum the entries of f into (k, parity) blocks.
    fn blocks(&self, f: &[ModeFunction]) -> Result<Vec<(usize, Parity, Vec<f64>)>> {
        let mut out: Vec<(usize, Parity, Vec<f64>)> = Vec::new();
        for mf in f {
            if mf.u.len() != self.len() {
                return Err(Error::LengthMismatch {
                    expected: self.len(),
                    got: mf.u.len(),
                });
            }
            if mf.k == 0 && mf.parity == Parity::Sin {
                return Err(Error::InvalidArgument("k = 0 has no sine mode".into()));
            }
            if mf.k >= self.ops.len() {
                return Err(Error::UnsupportedMode(format!(
                    "mode {} exceeds the context's maximum {}",
                    mf.k,
                    self.ops.len() - 1
                )));
            }
            match out.iter_mut().find(|(k, p, _)| *k == mf.k && *p == mf.parity) {
                Some((_, _, u)) => u.iter_mut().zip(&mf.u).for_each(|(a, b)| *a += b),
                None => out.push((mf.k, mf.parity, mf.u.clone())),
            }
        }
        Ok(out)
    }

    fn check_y(&self, y: &SpaceVector) -> Result<()> {
        if y.axial.len() != self.n - 1 {
            return Err(Error::LengthMismatch {
                expected: self.n - 1,
                got: y.axial.len(),
            });
        }
        Ok(())
    }

    pub fn second_variation_blocks(&self, f: &[ModeFunction], h: f64, y: &SpaceVector) -> Result<BlockValues> {
        self.check_y(y)?;
        let blocks = self.blocks(f)?;
        let c1 = self.mode_factor(1);
        let zero = vec![0.0; self.len()];
        let find = |k: usize, p: Parity| {
            blocks
                .iter()
                .find(|(bk, bp, _)| *bk == k && *bp == p)
                .map_or(&zero, |(_, _, u)| u)
        };
        let u0 = find(0, Parity::Cos);
        let a = self.ops[0].stiffness.bilinear(u0, u0) + 2.0 * h * self.integral(u0, &self.mean_curvature)
            - h * h * self.g_h
            + y.axial[0] * self.integral(u0, &self.nu_axis)
            - 0.5 * y.axial[0] * y.axial[0] * self.g_x;
        let rot = |u: &[f64], yc: f64| {
            let form = if self.ops.len() > 1 {
                self.ops[1].stiffness.bilinear(u, u)
            } else {
                0.0
            };
            c1 * (form + yc * self.integral(u, &self.nu_r) - 0.5 * yc * yc * self.g_r)
        };
        let b = rot(find(1, Parity::Cos), y.cos);
        let c = rot(find(1, Parity::Sin), y.sin);
        let mut rest = -0.5 * c1 * self.g_r * y.axial[1..].iter().map(|v| v * v).sum::<f64>();
        for (k, _, u) in blocks.iter().filter(|(k, _, _)| *k >= 2) {
            rest += self.mode_factor(*k) * self.ops[*k].stiffness.bilinear(u, u);
        }
        Ok(BlockValues { a, b, c, rest })
    }

    pub fn second_variation(&self, f: &[ModeFunction], h: f64, y: &SpaceVector) -> Result<f64> {
        Ok(self.second_variation_blocks(f, h, y)?.total())
    }

    /// Closed-form maximizer of the concave quadratic in (h, y); degenerate
    /// Gram entries resolve to zero.
    pub fn optimize_spacetime(&self, f: &[ModeFunction]) -> Result<(f64, SpaceVector)> {
        let blocks = self.blocks(f)?;
        let tol = GRAM_TOL * self.total_mass;
        let ratio = |b: f64, g: f64| if g > tol { b / g } else { 0.0 };
        let mut h = 0.0;
        let mut y = SpaceVector::zero(self.n);
        for (k, p, u) in &blocks {
            match (k, p) {
                (0, Parity::Cos) => {
                    h = ratio(self.integral(u, &self.mean_curvature), self.g_h);
                    y.axial[0] = ratio(self.integral(u, &self.nu_axis), self.g_x);
                }
                (1, Parity::Cos) => y.cos = ratio(self.integral(u, &self.nu_r), self.g_r),
                (1, Parity::Sin) => y.sin = ratio(self.integral(u, &self.nu_r), self.g_r),
                _ => {}
            }
        }
        Ok((h, y))
    }

    pub fn assess(&self, f: &[ModeFunction], stability_tol: f64) -> Result<VariationAssessment> {
        if f.iter().all(|mf| mf.u.iter().all(|v| *v == 0.0)) {
            return Err(Error::ZeroFunction("variation function is zero"));
        }
        let (h_star, y_star) = self.optimize_spacetime(f)?;
        let blocks = self.second_variation_blocks(f, h_star, &y_star)?;
        let value = blocks.total();
        Ok(VariationAssessment {
            f: f.to_vec(),
            h_star,
            y_star,
            value,
            unstable: value < -stability_tol,
            blocks,
        })
    }

    pub fn is_unstable(&self, f: &[ModeFunction]) -> Result<VariationAssessment> {
        self.assess(f, STABILITY_TOL)
    }
}

fn max_mode(f: &[ModeFunction]) -> usize {
    f.iter().map(|m| m.k).max().unwrap_or(0).max(1)
}

pub fn second_variation(curve: &ProfileCurve, f: &[ModeFunction], h: f64, y: &SpaceVector) -> Result<f64> {
    VariationContext::new(curve, max_mode(f))?.second_variation(f, h, y)
}

pub fn optimize_spacetime(curve: &ProfileCurve, f: &[ModeFunction]) -> Result<(f64, SpaceVector)> {
    VariationContext::new(curve, max_mode(f))?.optimize_spacetime(f)
}

pub fn is_unstable(curve: &ProfileCurve, f: &[ModeFunction]) -> Result<VariationAssessment> {
    VariationContext::new(curve, max_mode(f))?.is_unstable(f)
}

/// True iff u takes values below −tol and above +tol at samples off the axis.
pub fn sign_change(curve: &ProfileCurve, u: &[f64]) -> Result<bool> {
    if u.len() != curve.len() {
        return Err(Error::LengthMismatch {
            expected: curve.len(),
            got: u.len(),
        });
    }
    let off_axis = || curve.points.iter().zip(u).filter(|(p, _)| p.r > 0.0).map(|(_, v)| *v);
    Ok(off_axis().any(|v| v < -SIGN_TOL) && off_axis().any(|v| v > SIGN_TOL))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyConfig {
    pub schedule: Vec<f64>,
    pub margin: f64,
    pub stability_tol: f64,
    pub trials: usize,
    pub seed: u64,
    pub plateau_tol: f64,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self {
            schedule: DEFAULT_SCHEDULE.to_vec(),
            margin: DEFAULT_MARGIN,
            stability_tol: STABILITY_TOL,
            trials: 64,
            seed: 0x5eed,
            plateau_tol: DEFAULT_PLATEAU_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessSummary {
    pub name: String,
    pub k: usize,
    pub parity: Parity,
    pub eigenvalue: f64,
    pub stride: usize,
    pub s: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub assessment: VariationAssessment,
    pub blocks_nonpositive: bool,
    pub decomposition_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateStatus {
    Certified,
    HypothesisFailed,
    NotCertified,
    Withheld,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexCertificate {
    pub schema: String,
    pub curve_sha256: String,
    pub n: usize,
    pub h: f64,
    pub samples: usize,
    pub closed: bool,
    /// "compact" when the sweeps collapse to the whole closed curve,
    /// "exhaustion" for truncated noncompact profiles.
    pub path: String,
    pub shrinker_residual: f64,
    pub config: CertifyConfig,
    pub hypothesis_checks: Vec<HypothesisCheck>,
    pub sweeps: Vec<SpectralSweep>,
    /// −1 − μ₁(0) and −½ − μ₁(1); positive means the threshold is cleared.
    pub margins: [f64; 2],
    /// Unit-coefficient block maxima A(f₀), B(f₁), C(g₁).
    pub block_bounds: [f64; 3],
    pub witnesses: Vec<WitnessSummary>,
    pub trials: Vec<TrialRecord>,
    pub index_lower_bound: Option<u8>,
    pub status: CertificateStatus,
    pub failing_checks: Vec<String>,
    #[serde(skip)]
    pub witness_functions: Vec<ModeFunction>,
    #[serde(skip)]
    pub domain: Option<ProfileCurve>,
}

/// Full-resolution witnesses on the certified domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessBundle {
    pub schema: String,
    pub curve_sha256: String,
    pub domain: ProfileCurve,
    pub witnesses: Vec<ModeFunction>,
}

impl IndexCertificate {
    pub fn witness_bundle(&self) -> Option<WitnessBundle> {
        Some(WitnessBundle {
            schema: WITNESS_SCHEMA.to_string(),
            curve_sha256: self.curve_sha256.clone(),
            domain: self.domain.clone()?,
            witnesses: self.witness_functions.clone(),
        })
    }
}

pub fn curve_hash(curve: &ProfileCurve) -> String {
    hex::encode(Sha256::digest(curve.to_json().as_bytes()))
}

fn summarize(name: &str, mf: &ModeFunction, eigenvalue: f64, h: f64) -> WitnessSummary {
    let stride = mf.u.len().div_ceil(WITNESS_POINTS).max(1);
    let idx: Vec<usize> = (0..mf.u.len()).step_by(stride).collect();
    WitnessSummary {
        name: name.to_string(),
        k: mf.k,
        parity: mf.parity,
        eigenvalue,
        stride,
        s: idx.iter().map(|&i| (i as f64 + 0.5) * h).collect(),
        u: idx.iter().map(|&i| mf.u[i]).collect(),
    }
}

/// Evidence that the profile has F-index at least 3: hypothesis checks,
/// bottom-of-spectrum sweeps for k = 0, 1, witnesses, blockwise bounds and
/// seeded random combinations.
pub fn certify_index(curve: &ProfileCurve, config: &CertifyConfig) -> Result<IndexCertificate> {
    if !(config.margin >= 0.0 && config.stability_tol >= 0.0) {
        return Err(Error::InvalidArgument("margins must be non-negative".into()));
    }
    let residual = shrinker_residual(curve);
    if !(residual < SHRINKER_TOL) {
        return Err(Error::NotAShrinker {
            residual,
            tol: SHRINKER_TOL,
        });
    }
    let hs = mean_curvature_samples(curve)?;
    let nu_r: Vec<f64> = curve.points.iter().map(|p| p.phi.cos()).collect();
    let hypothesis_checks = vec![
        HypothesisCheck {
            name: CHECK_ER_N.into(),
            passed: sign_change(curve, &nu_r)?,
        },
        HypothesisCheck {
            name: CHECK_H.into(),
            passed: sign_change(curve, &hs)?,
        },
    ];

    let sweeps = [0, 1]
        .par_iter()
        .map(|&k| sweep_bottom_spectrum(curve, k, &config.schedule, config.plateau_tol))
        .collect::<Result<Vec<_>>>()?;
    let margins = [-1.0 - sweeps[0].mu1_limit, -0.5 - sweeps[1].mu1_limit];

    let domain = if curve.closed {
        curve.clone()
    } else {
        let last = *config
            .schedule
            .last()
            .ok_or_else(|| Error::InvalidArgument("empty radius schedule".into()))?;
        truncate(curve, last)?
    };
    let ctx = VariationContext::new(&domain, 1)?;
    let s0 = lowest_eigenpairs(&ctx.ops[0], 1)?;
    let s1 = lowest_eigenpairs(&ctx.ops[1], 1)?;
    let f0 = ModeFunction::new(0, Parity::Cos, s0.eigenfunctions[0].clone());
    let f1 = ModeFunction::new(1, Parity::Cos, s1.eigenfunctions[0].clone());
    let g1 = ModeFunction::new(1, Parity::Sin, s1.eigenfunctions[0].clone());

    let tol = config.stability_tol;
    let basis = [
        ctx.assess(std::slice::from_ref(&f0), tol)?,
        ctx.assess(std::slice::from_ref(&f1), tol)?,
        ctx.assess(std::slice::from_ref(&g1), tol)?,
    ];
    let block_bounds = [basis[0].blocks.a, basis[1].blocks.b, basis[2].blocks.c];

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut coeffs = vec![(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)];
    while coeffs.len() < config.trials + 3 {
        let c: (f64, f64, f64) = (
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
        );
        if c.0.abs() + c.1.abs() + c.2.abs() > 1e-6 {
            coeffs.push(c);
        }
    }
    let trials = coeffs
        .par_iter()
        .map(|&(alpha, beta, gamma)| {
            let f = [f0.scaled(alpha), f1.scaled(beta), g1.scaled(gamma)];
            let assessment = ctx.assess(&f, tol)?;
            let b = assessment.blocks;
            Ok(TrialRecord {
                alpha,
                beta,
                gamma,
                blocks_nonpositive: b.a <= tol && b.b <= tol && b.c <= tol,
                decomposition_error: (assessment.value - (b.a + b.b + b.c + b.rest)).abs(),
                assessment,
            })
        })
        .collect::<Result<Vec<TrialRecord>>>()?;

    let mut failing = Vec::new();
    for c in &hypothesis_checks {
        if !c.passed {
            failing.push(c.name.clone());
        }
    }
    let hypotheses_ok = failing.is_empty();
    if margins[0] < config.margin {
        failing.push("mu1(0) below -1 with margin".into());
    }
    if margins[1] < config.margin {
        failing.push("mu1(1) below -1/2 with margin".into());
    }
    if block_bounds.iter().any(|b| !(*b < -tol)) {
        failing.push("blockwise A/B/C bounds".into());
    }
    if trials.iter().any(|t| !(t.assessment.unstable && t.blocks_nonpositive)) {
        failing.push("random-combination instability".into());
    }
    let converged = sweeps.iter().all(|s| s.converged);
    let (index_lower_bound, status) = if !hypotheses_ok {
        (Some(0), CertificateStatus::HypothesisFailed)
    } else if !converged {
        failing.push("sweep plateau".into());
        (None, CertificateStatus::Withheld)
    } else if failing.is_empty() {
        (Some(3), CertificateStatus::Certified)
    } else {
        (Some(0), CertificateStatus::NotCertified)
    };

    let witnesses = vec![
        summarize("f0", &f0, s0.eigenvalues[0], domain.h),
        summarize("f1", &f1, s1.eigenvalues[0], domain.h),
        summarize("g1", &g1, s1.eigenvalues[0], domain.h),
    ];
    Ok(IndexCertificate {
        schema: CERTIFICATE_SCHEMA.into(),
        curve_sha256: curve_hash(curve),
        n: curve.n,
        h: curve.h,
        samples: curve.len(),
        closed: curve.closed,
        path: if curve.closed { "compact" } else { "exhaustion" }.into(),
        shrinker_residual: residual,
        config: config.clone(),
        hypothesis_checks,
        sweeps,
        margins,
        block_bounds,
        witnesses,
        trials,
        index_lower_bound,
        status,
        failing_checks: failing,
        witness_functions: vec![f0, f1, g1],
        domain: Some(domain),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionPairing {
    pub direction: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityRow {
    /// None for a closed curve (the whole surface).
    pub radius: Option<f64>,
    pub pairings: Vec<DirectionPairing>,
}

/// [H (e_i·n)] over D_R for every coordinate direction e_1 … e_{n+1}.
/// Rotational directions carry the angular mean of the coordinate function,
/// computed by the same trapezoid rule used for Fourier projection.
pub fn orthogonality_report(curve: &ProfileCurve, schedule: &[f64]) -> Result<Vec<OrthogonalityRow>> {
    let domains: Vec<(Option<f64>, ProfileCurve)> = if curve.closed {
        vec![(None, curve.clone())]
    } else {
        schedule
            .iter()
            .map(|&r| Ok((Some(r), truncate(curve, r)?)))
            .collect::<Result<_>>()?
    };
    let n_theta = 64;
    let angular_mean: f64 = (0..n_theta)
        .map(|j| (2.0 * PI * j as f64 / n_theta as f64).cos())
        .sum::<f64>()
        / n_theta as f64;
    domains
        .into_iter()
        .map(|(radius, d)| {
            let cells = cell_geometry(&d)?;
            let mut hx = 0.0;
            let mut hr = 0.0;
            for c in &cells {
                hx += c.weight * d.h * c.mean_curvature * c.nu_axis;
                hr += c.weight * d.h * c.mean_curvature * c.nu_r;
            }
            let mut pairings = vec![DirectionPairing {
                direction: "e1".into(),
                value: hx,
            }];
            for i in 2..=d.n + 1 {
                pairings.push(DirectionPairing {
                    direction: format!("e{i}"),
                    value: hr * angular_mean,
                });
            }
            Ok(OrthogonalityRow { radius, pairings })
        })
        .collect()
}
