//! Acceptance run: one PASS/FAIL line per criterion with its runtime budget.

mod common;

use std::f64::consts::{E, PI};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shrinker_index::functional::{entropy, entropy_along_variation, stationarity_gradient};
use shrinker_index::geometry::{shrinker_residual, ProfileCurve, ProfilePoint};
use shrinker_index::operator::*;
use shrinker_index::profiles::*;
use shrinker_index::spectra::*;
use shrinker_index::variation::*;
use shrinker_index::Error;

use common::*;

/// Collects named checks for one criterion.
#[derive(Default)]
struct Checks {
    failed: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failed.push(what.into());
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

fn op(curve: &ProfileCurve, k: usize) -> ModeOperator {
    assemble_mode_operator(curve, k, BcPolicy::Natural).unwrap()
}

fn analytic_and_ode(c: &mut Checks) {
    for n in [2, 3] {
        let s = sphere(n, 1e-3);
        let cy = cylinder(n, 1e-3, 10.0);
        let (rs, rc) = (shrinker_residual(&s), shrinker_residual(&cy));
        c.check(rs < 1e-10, format!("sphere n={n} residual {rs:e}"));
        c.check(rc < 1e-10, format!("cylinder n={n} residual {rc:e}"));
        let radius = ((2 * (n - 1)) as f64).sqrt();
        let t = integrate_shrinker_ode(ProfilePoint::new(0.0, radius, 0.0), n, 1e-3, 10.0).unwrap();
        let drift = t
            .curve
            .points
            .iter()
            .map(|p| (p.r - radius).abs().max(p.phi.abs()))
            .fold(0.0, f64::max);
        let arc = t.curve.points.last().unwrap().x;
        c.check(drift < 1e-8 && (arc - 10.0).abs() < 1e-8, format!("cylinder n={n} ODE drift {drift:e}"));
        c.note(format!("ODE drift n={n} {drift:.1e}"));
    }
}

/// (label, residual) pairs of the known eigenfunctions on one profile.
fn known_residuals(curve: &ProfileCurve) -> Vec<(&'static str, f64)> {
    let mut out = Vec::new();
    let interior_nonzero = |u: &[f64]| max_abs(u) > 1e-8;
    let (_, h) = known_eigenfunction(curve, KnownFunction::Dilation).unwrap();
    out.push(("H", residual_check(&op(curve, 0), &h, -1.0).unwrap()));
    let (_, nx) = known_eigenfunction(curve, KnownFunction::AxialTranslation).unwrap();
    if interior_nonzero(&nx) {
        out.push(("e1.n", residual_check(&op(curve, 0), &nx, -0.5).unwrap()));
    }
    let (_, nr) = known_eigenfunction(curve, KnownFunction::RotationalTranslation).unwrap();
    if interior_nonzero(&nr) {
        out.push(("er.n", residual_check(&op(curve, 1), &nr, -0.5).unwrap()));
    }
    out
}

/// Residual of H written as ½⟨γ,ν⟩, which agrees with the mean curvature on a
/// shrinker but needs no differentiation of the sampled angle.
fn support_residual(curve: &ProfileCurve) -> f64 {
    let u: Vec<f64> = cell_geometry(curve)
        .unwrap()
        .iter()
        .map(|q| 0.5 * (q.x * q.nu_axis + q.r * q.nu_r))
        .collect();
    residual_check(&op(curve, 0), &u, -1.0).unwrap()
}

fn known_eigenfunctions(c: &mut Checks) {
    let families: Vec<(&str, Box<dyn Fn(f64) -> ProfileCurve>)> = vec![
        ("sphere", Box::new(|h| sphere(2, h))),
        ("cylinder", Box::new(|h| truncate(&cylinder(2, h, 13.0), 12.0).unwrap())),
        ("torus", Box::new(|h| shoot_torus(2, h))),
    ];
    for (name, make) in families {
        let (coarse, fine) = (make(1e-3), make(5e-4));
        let (rc_all, rf_all) = (known_residuals(&coarse), known_residuals(&fine));
        for ((label, rc), (_, rf)) in rc_all.iter().zip(&rf_all) {
            c.check(*rc < 1e-3, format!("{name} {label} residual {rc:e}"));
            // quadratic convergence down to a 1e-10 noise floor
            c.check(*rf <= rc / 3.0 + 1e-10, format!("{name} {label} {rc:e} -> {rf:e}"));
            if *rf > 1e-10 {
                c.note(format!("{name} {label} ratio {:.2}", rc / rf));
            }
        }
        let (sc, sf) = (support_residual(&coarse), support_residual(&fine));
        c.note(format!("{name} <x,nu>/2 {sc:.1e} -> {sf:.1e}"));
    }
}

fn dense_eigenvalues(o: &ModeOperator) -> Vec<f64> {
    let n = o.len();
    let k = &o.stiffness;
    let s: Vec<f64> = o.mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = k.diag[i] * s[i] * s[i];
        if i + 1 < n {
            a[(i, i + 1)] = k.off[i] * s[i] * s[i + 1];
            a[(i + 1, i)] = a[(i, i + 1)];
        }
    }
    if let Some(cc) = k.corner {
        a[(0, n - 1)] += cc * s[0] * s[n - 1];
        a[(n - 1, 0)] = a[(0, n - 1)];
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn spectral_ground_truth(c: &mut Checks) {
    let mu = lowest_eigenpairs(&op(&sphere(2, 1e-3), 0), 1).unwrap().eigenvalues[0];
    c.check((mu + 1.0).abs() < 2e-4, format!("sphere mu1(0) = {mu}"));

    let sweep = sweep_bottom_spectrum(&cylinder(2, 1e-3, 17.0), 0, &DEFAULT_SCHEDULE, DEFAULT_PLATEAU_TOL).unwrap();
    let v = &sweep.mu1_values;
    c.check(v.windows(2).all(|w| w[1] <= w[0] + 1e-10), format!("cylinder sweep not monotone {v:?}"));
    c.check(sweep.converged, "cylinder sweep plateau");
    c.check((sweep.mu1_limit + 1.0).abs() < 1e-3, format!("cylinder limit {}", sweep.mu1_limit));
    c.note(format!("cylinder mu1 limit {:.6}", sweep.mu1_limit));

    let torus_coarse = resample(torus(), 2e-2).unwrap();
    let cases: Vec<(String, ModeOperator)> = vec![
        ("sphere k0".into(), op(&sphere(2, 1e-2), 0)),
        ("sphere k1".into(), op(&sphere(2, 1e-2), 1)),
        ("torus k0".into(), op(&torus_coarse, 0)),
        ("torus k1".into(), op(&torus_coarse, 1)),
        ("cylinder R6 k0".into(), op(&truncate(&cylinder(2, 2e-2, 9.0), 6.0).unwrap(), 0)),
        ("cylinder R8 k1".into(), op(&truncate(&cylinder(2, 2e-2, 9.0), 8.0).unwrap(), 1)),
        ("plane R8 k0".into(), op(&truncate(&plane(2, 2e-2, 9.0), 8.0).unwrap(), 0)),
    ];
    let mut worst: f64 = 0.0;
    for (name, o) in &cases {
        assert!(o.len() <= 800);
        let s = lowest_eigenpairs(o, 3).unwrap();
        let dense = dense_eigenvalues(o);
        for (a, b) in s.eigenvalues.iter().zip(&dense) {
            worst = worst.max((a - b).abs());
            c.check((a - b).abs() < 1e-9, format!("{name}: Sturm {a} vs dense {b}"));
        }
    }
    c.note(format!("max |Sturm - dense| {worst:.1e}"));
}

fn torus_certificate(c: &mut Checks) {
    let problem = ShootingProblem::new(2, (0.3, 2.5));
    let report = shoot_closed_orbit(&problem).unwrap();
    c.check(report.converged && report.final_mismatch < 1e-8, format!("mismatch {:e}", report.final_mismatch));
    let curve = report.curve.unwrap();
    let cert = certify_index(&curve, &CertifyConfig::default()).unwrap();
    c.check(cert.index_lower_bound == Some(3), format!("verdict {:?} {:?}", cert.index_lower_bound, cert.failing_checks));
    c.check(cert.sweeps[0].mu1_limit < -1.0, "mu1(0) < -1");
    c.check(cert.sweeps[1].mu1_limit < -0.5, "mu1(1) < -1/2");
    c.check(cert.block_bounds.iter().all(|b| *b < -STABILITY_TOL), "A/B/C blocks");
    let random: Vec<_> = cert.trials.iter().skip(3).collect();
    c.check(random.len() == 64, "64 random trials");
    c.check(
        cert.trials.iter().all(|t| t.assessment.unstable && t.blocks_nonpositive),
        "random-combination instability",
    );
    c.note(format!(
        "r* {:.10} mu1(0) {:.6} mu1(1) {:.6} margins {:.4}/{:.4}",
        report.r_star, cert.sweeps[0].mu1_limit, cert.sweeps[1].mu1_limit, cert.margins[0], cert.margins[1]
    ));
}

fn orthogonality(c: &mut Checks) {
    let rows = orthogonality_report(torus(), &[]).unwrap();
    let worst = rows
        .iter()
        .flat_map(|r| r.pairings.iter().map(|p| p.value.abs()))
        .fold(0.0, f64::max);
    c.check(worst < 1e-8, format!("max |[H e_i.n]| {worst:e}"));
    c.note(format!("max |[H e_i.n]| {worst:.1e}"));
}

fn property_suites(c: &mut Checks) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce97);

    let mut bessel_ok = true;
    for _ in 0..10_000 {
        let mut draw = |dim: usize| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
        let (v, a, b) = (draw(50), draw(50), draw(50));
        let w: Vec<f64> = draw(50).iter().map(|x| 0.1 + x.abs()).collect();
        let ip = |x: &[f64], y: &[f64]| -> f64 { w.iter().zip(x).zip(y).map(|((w, p), q)| w * p * q).sum() };
        let eps = (ip(&a, &b).abs() / (ip(&a, &a) * ip(&b, &b)).sqrt()).min(0.999);
        bessel_ok &= almost_bessel_check(&v, &a, &b, &w, eps).is_ok_and(|r| r.holds);
    }
    c.check(bessel_ok, "almost-Bessel on 10^4 instances");

    let t = resample(torus(), 2e-2).unwrap();
    let o0 = op(&t, 0);
    let modes: Vec<(usize, Parity)> = (0..4)
        .flat_map(|k| [(k, Parity::Cos), (k, Parity::Sin)])
        .filter(|&(k, p)| !(k == 0 && p == Parity::Sin))
        .collect();
    let (mut worst_ip, mut h1_ok) = (0.0_f64, true);
    for _ in 0..100 {
        let mut field = AngularField::synthesize(&vec![0.0; o0.len()], 0, Parity::Cos, 24);
        for &(k, p) in &modes {
            let (a, b, f) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.0..3.0));
            let u: Vec<f64> = o0.cells.iter().map(|cell| a + b * (f * cell.s).sin()).collect();
            field.add(&AngularField::synthesize(&u, k, p, 24));
        }
        let full = angular_h1_norm_sq(&o0, &field).unwrap();
        let parts: Vec<AngularField> = modes
            .iter()
            .map(|&(k, p)| AngularField::synthesize(&fourier_project(&field, k, p).unwrap(), k, p, 24))
            .collect();
        for (i, pi) in parts.iter().enumerate() {
            h1_ok &= angular_h1_norm_sq(&o0, pi).unwrap() <= full * (1.0 + 1e-12);
            for pj in &parts[..i] {
                worst_ip = worst_ip.max(angular_l2_inner(&o0, pi, pj).unwrap().abs());
            }
        }
    }
    c.check(worst_ip < 1e-10, format!("Fourier orthogonality {worst_ip:e}"));
    c.check(h1_ok, "H1 non-expansion");

    let (mut symmetric, mut sbp_worst) = (true, 0.0_f64);
    for trial in 0..100 {
        let k = trial % 3;
        let o = op(&t, k);
        let u: Vec<f64> = (0..o.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..o.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        symmetric &= o.stiffness.bilinear(&u, &v).to_bits() == o.stiffness.bilinear(&v, &u).to_bits();

        let radius = rng.random_range(3.0..9.0);
        let oc = op(&truncate(&cylinder(2, 1e-2, 10.0), radius).unwrap(), k.min(1));
        let u: Vec<f64> = (0..oc.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let nc = oc.len();
        let mut terms = Vec::new();
        for j in 0..nc - 1 {
            terms.push(oc.face_weights[j + 1] * (u[j + 1] - u[j]).powi(2) / oc.h);
        }
        terms.push(2.0 * oc.face_weights[0] * u[0] * u[0] / oc.h);
        terms.push(2.0 * oc.face_weights[nc] * u[nc - 1] * u[nc - 1] / oc.h);
        for j in 0..nc {
            terms.push(-oc.mass[j] * oc.potential[j] * u[j] * u[j]);
        }
        let size: f64 = terms.iter().map(|x| x.abs()).sum();
        let rel = (oc.stiffness.bilinear(&u, &u) - terms.iter().sum::<f64>()).abs() / size;
        sbp_worst = sbp_worst.max(rel);
    }
    c.check(symmetric, "bit-exact self-adjointness");
    c.check(sbp_worst < 1e-12, format!("summation by parts {sbp_worst:e}"));

    let ctx = VariationContext::new(torus(), 1).unwrap();
    let u0 = lowest_eigenpairs(&ctx.ops[0], 1).unwrap().eigenfunctions[0].clone();
    let u1 = lowest_eigenpairs(&ctx.ops[1], 1).unwrap().eigenfunctions[0].clone();
    let mut scaling_ok = true;
    for _ in 0..100 {
        let (a, b, g, s) = (
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-5.0..5.0),
        );
        let f = |scale: f64| {
            let m = |k, p, u: &Vec<f64>, coef: f64| ModeFunction::new(k, p, u.iter().map(|x| scale * coef * x).collect());
            vec![m(0, Parity::Cos, &u0, a), m(1, Parity::Cos, &u1, b), m(1, Parity::Sin, &u1, g)]
        };
        let base = ctx.is_unstable(&f(1.0)).unwrap();
        let scaled = ctx.is_unstable(&f(s)).unwrap();
        scaling_ok &= (scaled.value - s * s * base.value).abs() <= 1e-10 * scaled.value.abs()
            && scaled.unstable == base.unstable;
    }
    c.check(scaling_ok, "second-variation scaling equivariance");
    c.note(format!("Fourier ip {worst_ip:.1e}, SBP {sbp_worst:.1e}"));
}

fn entropy_checks(c: &mut Checks) {
    let plane = entropy(&plane(2, 1e-3, 20.0)).unwrap();
    c.check((plane.lambda - 1.0).abs() < 1e-10, format!("plane {:.13}", plane.lambda));
    let sph = entropy(&sphere(2, 1e-3)).unwrap();
    c.check((sph.lambda - 4.0 / E).abs() < 1e-5, format!("sphere {}", sph.lambda));
    let cyl = entropy(&truncate(&cylinder(2, 1e-3, 21.0), 20.0).unwrap()).unwrap();
    let expect = (2.0 * PI / E).sqrt();
    c.check((cyl.lambda - expect).abs() < 1e-4, format!("cylinder {}", cyl.lambda));

    for (name, curve) in [("sphere", sphere(2, 1e-3)), ("torus", torus().clone())] {
        let g = stationarity_gradient(&curve, 1e-4).unwrap();
        let size = g.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        c.check(size < 1e-4, format!("{name} stationarity gradient {size:e}"));
    }

    let ctx = VariationContext::new(torus(), 0).unwrap();
    let u0 = lowest_eigenpairs(&ctx.ops[0], 1).unwrap().eigenfunctions[0].clone();
    let v = entropy_along_variation(torus(), &[ModeFunction::new(0, Parity::Cos, u0)], &[-0.02, -0.01, 0.01, 0.02]).unwrap();
    c.check(v.strictly_decreasing, format!("torus f0 samples {:?}", v.samples));
    c.check(v.fitted_curvature > 0.0, format!("fitted curvature {}", v.fitted_curvature));
    c.note(format!(
        "lambda plane {:.12} sphere {:.8} cylinder {:.8} torus {:.10}; f0 curvature {:.4}",
        plane.lambda, sph.lambda, cyl.lambda, v.lambda0, v.fitted_curvature
    ));
}

fn negative_controls(c: &mut Checks) {
    let cfg = CertifyConfig { trials: 8, ..CertifyConfig::default() };
    for (name, curve) in [("sphere", sphere(2, 1e-3)), ("cylinder", cylinder(2, 1e-3, 17.0))] {
        let cert = certify_index(&curve, &cfg).unwrap();
        c.check(cert.index_lower_bound == Some(0), format!("{name} verdict {:?}", cert.index_lower_bound));
        c.check(cert.status == CertificateStatus::HypothesisFailed, format!("{name} status {:?}", cert.status));
        let named = cert.failing_checks.iter().any(|f| f == CHECK_H || f == CHECK_ER_N);
        c.check(named, format!("{name} failing checks {:?}", cert.failing_checks));
        c.note(format!("{name}: {}", cert.failing_checks.join("; ")));
    }
    let unit = circle_profile(0.0, 3.0, 1.0, 2, 1e-3).unwrap();
    c.check(
        matches!(certify_index(&unit, &cfg), Err(Error::NotAShrinker { .. })),
        "unit circle rejected",
    );
}

fn main() {
    let criteria: [(&str, u64, fn(&mut Checks)); 8] = [
        ("analytic families and cylinder ODE", 1, analytic_and_ode),
        ("known-eigenfunction residuals, O(h^2)", 30, known_eigenfunctions),
        ("spectral ground truth", 60, spectral_ground_truth),
        ("torus certificate, index >= 3", 120, torus_certificate),
        ("orthogonality on the torus", 5, orthogonality),
        ("property suites", 60, property_suites),
        ("entropy", 180, entropy_checks),
        ("negative controls", 120, negative_controls),
    ];
    // shared torus shot outside the timed sections
    let _ = torus();
    let mut all = true;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let mut checks = Checks::default();
        let start = Instant::now();
        run(&mut checks);
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(*budget);
        if !in_time {
            checks.failed.push(format!("runtime over {budget} s"));
        }
        let ok = checks.failed.is_empty();
        all &= ok;
        println!(
            "criterion {}: {} {name} [{:.2} s / {budget} s] {}",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            checks.notes.join(", ")
        );
        for f in &checks.failed {
            println!("    failed: {f}");
        }
    }
    if !all {
        std::process::exit(1);
    }
}
