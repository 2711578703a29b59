#![allow(dead_code)]

use std::sync::OnceLock;

use shrinker_index::geometry::ProfileCurve;
use shrinker_index::profiles::{analytic_profile, shoot_closed_orbit, ProfileKind, ShootingProblem};

pub fn sphere(n: usize, h: f64) -> ProfileCurve {
    analytic_profile(ProfileKind::Sphere, n, h, 0.0).unwrap()
}

pub fn cylinder(n: usize, h: f64, half_length: f64) -> ProfileCurve {
    analytic_profile(ProfileKind::Cylinder, n, h, half_length).unwrap()
}

pub fn plane(n: usize, h: f64, half_length: f64) -> ProfileCurve {
    analytic_profile(ProfileKind::Plane, n, h, half_length).unwrap()
}

pub fn shoot_torus(n: usize, step: f64) -> ProfileCurve {
    let mut problem = ShootingProblem::new(n, (0.3, 2.5));
    problem.step = step;
    let report = shoot_closed_orbit(&problem).unwrap();
    assert!(report.converged);
    report.curve.unwrap()
}

/// Angenent torus for n = 2 at the default step 1e-3.
pub fn torus() -> &'static ProfileCurve {
    static T: OnceLock<ProfileCurve> = OnceLock::new();
    T.get_or_init(|| shoot_torus(2, 1e-3))
}

pub fn torus3() -> &'static ProfileCurve {
    static T: OnceLock<ProfileCurve> = OnceLock::new();
    T.get_or_init(|| shoot_torus(3, 1e-3))
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}
