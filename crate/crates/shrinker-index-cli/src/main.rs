//! `shrinker-index`: build profiles, sweep spectra, certify F-index and
//! evaluate entropy from the command line.

mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use shrinker_index::functional::{self, EntropyOptions, EntropyVariation};
use shrinker_index::geometry::{shrinker_residual, ProfileCurve};
use shrinker_index::operator::{assemble_mode_operator, BcPolicy};
use shrinker_index::profiles::{analytic_profile, shoot_closed_orbit, truncate, ProfileKind, ShootingProblem};
use shrinker_index::spectra::{lowest_eigenpairs, sweep_bottom_spectrum, DEFAULT_PLATEAU_TOL, DEFAULT_SCHEDULE};
use shrinker_index::variation::{
    certify_index, curve_hash, CertificateStatus, CertifyConfig, WitnessBundle, DEFAULT_MARGIN, WITNESS_SCHEMA,
};
use shrinker_index::Error;

use svg::Plot;

pub const PROFILE_SCHEMA: &str = "shrinker-index/profile/v1";
pub const SHOOTING_SCHEMA: &str = "shrinker-index/shooting/v1";
pub const SPECTRUM_SCHEMA: &str = "shrinker-index/spectrum/v1";
pub const ENTROPY_SCHEMA: &str = "shrinker-index/entropy/v1";

const EXIT_HELP: &str = "\
Exit codes:
  0  success (certify: F-index at least 3 certified)
  2  validation failure: bad arguments, unreadable or invalid input, non-shrinker profile
  3  shooting did not close an orbit
  4  eigensolver or optimizer failure (entropy: best-found value flagged approximate)
  5  certificate negative or withheld";

#[derive(Parser, Debug)]
#[command(name = "shrinker-index", version, about = "Rotationally symmetric shrinkers: profiles, Fourier-mode spectra, F-index certificates, entropy", after_help = EXIT_HELP)]
struct Cli {
    /// Worker threads for the parallel scans.
    #[arg(long, global = true, env = "SHRINKER_INDEX_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build an analytic profile or shoot for a closed orbit.
    Profile(ProfileArgs),
    /// Bottom of the restricted spectra per Fourier mode.
    Spectrum(SpectrumArgs),
    /// Certify F-index at least 3.
    Certify(CertifyArgs),
    /// Entropy, optionally along a certified witness.
    Entropy(EntropyArgs),
}

#[derive(Args, Debug)]
struct ProfileArgs {
    /// plane, sphere or cylinder.
    #[arg(long, conflicts_with = "shoot")]
    kind: Option<String>,
    /// Shoot for a closed orbit crossing the axis plane perpendicularly.
    #[arg(long)]
    shoot: bool,
    /// Initial-radius bracket lo:hi for --shoot.
    #[arg(long, default_value = "0.3:2.5")]
    bracket: String,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 1e-3)]
    h: f64,
    /// Half length of noncompact analytic profiles.
    #[arg(long, default_value_t = 20.0)]
    half_length: f64,
    /// Radii of the B_R circles drawn in the plot.
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[arg(long)]
    profile: PathBuf,
    /// Comma-separated Fourier modes.
    #[arg(long, default_value = "0,1")]
    k: String,
    /// Comma-separated truncation radii.
    #[arg(long)]
    schedule: Option<String>,
    /// Eigenvalues reported per (k, R).
    #[arg(long, default_value_t = 3)]
    count: usize,
    #[arg(long, default_value_t = DEFAULT_PLATEAU_TOL)]
    plateau_tol: f64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[arg(long)]
    profile: PathBuf,
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: f64,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
    #[arg(long, default_value_t = 64)]
    trials: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EntropyArgs {
    #[arg(long)]
    profile: PathBuf,
    /// witnesses.json written by `certify`.
    #[arg(long)]
    witness: Option<PathBuf>,
    /// Witness to vary along: f0, f1 or g1.
    #[arg(long, default_value = "f0")]
    which: String,
    #[arg(long, default_value = "-0.02,-0.01,0.01,0.02", allow_hyphen_values = true)]
    s_values: String,
    /// Angular quadrature points for off-axis centres; 0 uses the exact angular mean.
    #[arg(long, default_value_t = functional::DEFAULT_THETA_POINTS)]
    theta_points: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

/// Failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoOrbitFound { .. } => 3,
            Error::Solver(_) => 4,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|_| Failure::validation(format!("bad {what} entry '{t}'"))))
        .collect()
}

fn parse_schedule(s: Option<&str>) -> Result<Vec<f64>, Failure> {
    let schedule = match s {
        None => DEFAULT_SCHEDULE.to_vec(),
        Some(s) => parse_list::<f64>(s, "schedule")?,
    };
    if schedule.is_empty() {
        return Err(Failure::validation("empty schedule"));
    }
    if schedule.iter().any(|r| !(r.is_finite() && *r > 0.0)) || schedule.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Failure::validation("schedule radii must be positive and increasing"));
    }
    Ok(schedule)
}

fn read_profile(path: &Path) -> Result<ProfileCurve, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::validation(format!("{}: {e}", path.display())))?;
    Ok(ProfileCurve::from_json(&text)?)
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::validation(format!("{}: {e}", dir.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::validation(format!("{}: {e}", path.display())))
}

/// Pretty JSON with a leading "schema" field.
fn with_schema<T: Serialize>(schema: &str, value: &T) -> String {
    let mut map = serde_json::Map::new();
    map.insert("schema".into(), json!(schema));
    match serde_json::to_value(value).expect("reports serialize") {
        Value::Object(obj) => {
            for (k, v) in obj {
                if k != "schema" {
                    map.insert(k, v);
                }
            }
        }
        other => {
            map.insert("value".into(), other);
        }
    }
    serde_json::to_string_pretty(&Value::Object(map)).expect("reports serialize") + "\n"
}

fn profile_plot(curve: &ProfileCurve, title: &str, radii: &[f64]) -> Plot {
    let xs = curve.points.iter().map(|p| p.x);
    let x_lo = xs.clone().fold(f64::INFINITY, f64::min);
    let x_hi = xs.fold(f64::NEG_INFINITY, f64::max);
    let r_hi = curve.points.iter().map(|p| p.r).fold(0.0, f64::max);
    let extent = x_lo.abs().max(x_hi.abs()).max(r_hi);
    let shown: Vec<f64> = radii.iter().copied().filter(|&r| r <= 1.05 * extent).collect();
    let reach = shown.iter().copied().fold(extent, f64::max);
    let mut plot = Plot::new(title, (-reach, reach), (0.0, reach.max(r_hi)));
    for r in shown {
        plot.half_circle(r, "#4a7");
        plot.label(r * 0.70, r * 0.72, &format!("R={r}"));
    }
    let pts: Vec<(f64, f64)> = curve.points.iter().map(|p| (p.x, p.r)).collect();
    plot.polyline(&pts, "#124", 1.6, false);
    plot
}

fn cmd_profile(args: &ProfileArgs) -> CmdResult {
    if args.n < 2 {
        return Err(Failure::validation("--n must be at least 2"));
    }
    if !(args.h.is_finite() && args.h > 0.0) {
        return Err(Failure::validation("--h must be positive"));
    }
    let radii = parse_schedule(args.schedule.as_deref())?;
    ensure_dir(&args.out)?;
    let (curve, label) = if args.shoot {
        let (lo, hi) = args
            .bracket
            .split_once(':')
            .and_then(|(a, b)| Some((a.trim().parse::<f64>().ok()?, b.trim().parse::<f64>().ok()?)))
            .ok_or_else(|| Failure::validation(format!("bracket '{}' is not lo:hi", args.bracket)))?;
        let mut problem = ShootingProblem::new(args.n, (lo, hi));
        problem.step = args.h;
        let mut report = shoot_closed_orbit(&problem)?;
        let curve = report.curve.take();
        write_file(&args.out.join("shooting.json"), &with_schema(SHOOTING_SCHEMA, &report))?;
        println!(
            "shooting: r* = {:.12} mismatch {:.3e} after {} iterations",
            report.r_star,
            report.final_mismatch,
            report.mismatch_history.len()
        );
        match curve {
            Some(c) if report.converged => (c, format!("closed orbit n={} r*={:.6}", args.n, report.r_star)),
            _ => {
                return Err(Failure {
                    code: 3,
                    message: format!("shooting did not converge (mismatch {:.3e})", report.final_mismatch),
                })
            }
        }
    } else {
        let kind: ProfileKind = args
            .kind
            .as_deref()
            .ok_or_else(|| Failure::validation("give --kind or --shoot"))?
            .parse()?;
        let curve = analytic_profile(kind, args.n, args.h, args.half_length)?;
        (curve, format!("{kind:?} n={}", args.n).to_lowercase())
    };

    let residual = shrinker_residual(&curve);
    let mut doc: Value = serde_json::from_str(&curve.to_json()).expect("curve JSON parses");
    doc.as_object_mut()
        .expect("curve JSON is an object")
        .insert("schema".into(), json!(PROFILE_SCHEMA));
    write_file(&args.out.join("profile.json"), &(serde_json::to_string(&doc).expect("serializes") + "\n"))?;
    write_file(&args.out.join("profile.svg"), &profile_plot(&curve, &label, &radii).render())?;
    let csv = shrinker_index::geometry::to_csv(&curve)?;
    write_file(&args.out.join("profile.csv"), &csv)?;
    println!(
        "{label}: {} samples, h = {}, closed = {}, shrinker residual {residual:.3e}",
        curve.len(),
        curve.h,
        curve.closed
    );
    Ok(0)
}

#[derive(Serialize)]
struct SpectrumRow {
    k: usize,
    radius: Option<f64>,
    cells: usize,
    eigenvalues: Vec<f64>,
    residuals: Vec<f64>,
}

fn mode_threshold(k: usize) -> Option<f64> {
    match k {
        0 => Some(-1.0),
        1 => Some(-0.5),
        _ => None,
    }
}

fn cmd_spectrum(args: &SpectrumArgs) -> CmdResult {
    let ks: Vec<usize> = parse_list(&args.k, "k")?;
    if ks.is_empty() {
        return Err(Failure::validation("empty --k list"));
    }
    if args.count == 0 {
        return Err(Failure::validation("--count must be positive"));
    }
    let schedule = parse_schedule(args.schedule.as_deref())?;
    let curve = read_profile(&args.profile)?;
    ensure_dir(&args.out)?;

    let radii: Vec<Option<f64>> = if curve.closed {
        vec![None]
    } else {
        schedule.iter().map(|&r| Some(r)).collect()
    };
    let mut rows = Vec::new();
    let mut sweeps = Vec::new();
    let mut overlay = None;
    for &k in &ks {
        for &radius in &radii {
            let domain = match radius {
                Some(r) => truncate(&curve, r)?,
                None => curve.clone(),
            };
            let op = assemble_mode_operator(&domain, k, BcPolicy::Natural)?;
            let spec = lowest_eigenpairs(&op, args.count.min(op.len()))?;
            if overlay.is_none() && radius == *radii.last().expect("nonempty") {
                overlay = Some((op.cells.clone(), spec.eigenfunctions[0].clone(), k));
            }
            rows.push(SpectrumRow {
                k,
                radius,
                cells: op.len(),
                eigenvalues: spec.eigenvalues,
                residuals: spec.residuals,
            });
        }
        sweeps.push(sweep_bottom_spectrum(&curve, k, &schedule, args.plateau_tol)?);
    }

    let mut wtr = csv::Writer::from_writer(Vec::new());
    let _ = wtr.write_record(["k", "R", "index", "eigenvalue", "residual"]);
    for row in &rows {
        for (i, (mu, res)) in row.eigenvalues.iter().zip(&row.residuals).enumerate() {
            let r = row.radius.map_or("inf".to_string(), |r| r.to_string());
            let _ = wtr.write_record([row.k.to_string(), r, (i + 1).to_string(), format!("{mu:.15e}"), format!("{res:.3e}")]);
        }
    }
    let csv_text = String::from_utf8(wtr.into_inner().expect("in-memory writer")).expect("utf8");
    write_file(&args.out.join("spectrum.csv"), &csv_text)?;
    let report = json!({ "curve_sha256": curve_hash(&curve), "rows": rows, "sweeps": sweeps });
    write_file(&args.out.join("spectrum.json"), &with_schema(SPECTRUM_SCHEMA, &report))?;

    if let Some((cells, u, k)) = overlay {
        let mut plot = profile_plot(&curve, &format!("lowest eigenfunction, k={k}"), &[]);
        let extent = cells.iter().map(|c| c.x.abs().max(c.r)).fold(0.0, f64::max);
        let umax = u.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
        let eps = 0.15 * extent / umax;
        let pts: Vec<(f64, f64)> = cells
            .iter()
            .zip(&u)
            .map(|(c, v)| (c.x + eps * v * c.nu_axis, c.r + eps * v * c.nu_r))
            .collect();
        plot.polyline(&pts, "#c33", 1.2, true);
        write_file(&args.out.join("spectrum.svg"), &plot.render())?;
    }

    println!("{:>3} {:>8} {:>20} {:>8}", "k", "R", "mu1", "");
    for sweep in &sweeps {
        for (r, mu) in sweep.schedule.iter().zip(&sweep.mu1_values) {
            let mark = match mode_threshold(sweep.k) {
                Some(t) if *mu < t => format!("< {t}"),
                _ => String::new(),
            };
            let r = r.map_or("inf".to_string(), |r| format!("{r}"));
            println!("{:>3} {:>8} {:>20.12} {:>8}", sweep.k, r, mu, mark);
        }
        if !sweep.converged {
            println!("    k={} not plateaued within {:e}", sweep.k, sweep.plateau_tol);
        }
    }
    Ok(0)
}

fn cmd_certify(args: &CertifyArgs) -> CmdResult {
    let schedule = parse_schedule(args.schedule.as_deref())?;
    if !(args.margin.is_finite() && args.margin >= 0.0) {
        return Err(Failure::validation("--margin must be non-negative"));
    }
    if args.trials == 0 {
        return Err(Failure::validation("--trials must be positive"));
    }
    let curve = read_profile(&args.profile)?;
    ensure_dir(&args.out)?;
    let config = CertifyConfig {
        schedule,
        margin: args.margin,
        seed: args.seed,
        trials: args.trials,
        ..CertifyConfig::default()
    };
    let cert = certify_index(&curve, &config)?;
    write_file(
        &args.out.join("certificate.json"),
        &(serde_json::to_string_pretty(&cert).expect("certificate serializes") + "\n"),
    )?;
    if let Some(bundle) = cert.witness_bundle() {
        write_file(
            &args.out.join("witnesses.json"),
            &(serde_json::to_string(&bundle).expect("witnesses serialize") + "\n"),
        )?;
    }
    let verdict = cert.index_lower_bound.map_or("withheld".to_string(), |v| v.to_string());
    println!("status: {:?}", cert.status);
    println!("verdict: F-index >= {verdict}");
    println!("shrinker residual: {:.3e}", cert.shrinker_residual);
    println!("margins: mu1(0) clears -1 by {:.6e}, mu1(1) clears -1/2 by {:.6e}", cert.margins[0], cert.margins[1]);
    for check in &cert.hypothesis_checks {
        println!("check {:<20} {}", check.name, if check.passed { "pass" } else { "FAIL" });
    }
    for name in &cert.failing_checks {
        println!("failing: {name}");
    }
    Ok(if cert.status == CertificateStatus::Certified { 0 } else { 5 })
}

#[derive(Serialize)]
struct EntropyOutput {
    lambda: f64,
    argmax: functional::SpacetimeCenter,
    approximate: bool,
    tail_bound: f64,
    theta_points: usize,
    curve_sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    variation: Option<VariationOutput>,
}

#[derive(Serialize)]
struct VariationOutput {
    witness: String,
    result: EntropyVariation,
}

fn cmd_entropy(args: &EntropyArgs) -> CmdResult {
    if args.theta_points != 0 && args.theta_points < 4 {
        return Err(Failure::validation("--theta-points must be 0 or at least 4"));
    }
    let s_values: Vec<f64> = parse_list(&args.s_values, "s value")?;
    if s_values.iter().any(|s| !s.is_finite()) {
        return Err(Failure::validation("s values must be finite"));
    }
    let curve = read_profile(&args.profile)?;
    ensure_dir(&args.out)?;
    let opts = EntropyOptions {
        theta_points: args.theta_points,
        ..EntropyOptions::default()
    };
    let report = functional::entropy_with(&curve, &opts)?;

    let variation = match &args.witness {
        None => None,
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::validation(format!("{}: {e}", path.display())))?;
            let bundle: WitnessBundle =
                serde_json::from_str(&text).map_err(|e| Failure::validation(format!("{}: {e}", path.display())))?;
            if bundle.schema != WITNESS_SCHEMA {
                return Err(Failure::validation(format!("unexpected witness schema '{}'", bundle.schema)));
            }
            if bundle.curve_sha256 != curve_hash(&curve) {
                return Err(Failure::validation("witness file was produced for a different profile"));
            }
            let index = ["f0", "f1", "g1"]
                .iter()
                .position(|w| *w == args.which)
                .ok_or_else(|| Failure::validation(format!("--which must be f0, f1 or g1, got '{}'", args.which)))?;
            let f = bundle
                .witnesses
                .get(index)
                .ok_or_else(|| Failure::validation("witness file has too few witnesses"))?
                .clone();
            let result = functional::entropy_along_variation_with(&bundle.domain, &[f], &s_values, &opts)?;
            let mut wtr = csv::Writer::from_writer(Vec::new());
            let _ = wtr.write_record(["s", "lambda"]);
            for e in &result.samples {
                let _ = wtr.write_record([e.s.to_string(), format!("{:.15e}", e.lambda)]);
            }
            let csv_text = String::from_utf8(wtr.into_inner().expect("in-memory writer")).expect("utf8");
            write_file(&args.out.join("entropy_variation.csv"), &csv_text)?;
            Some(VariationOutput {
                witness: args.which.clone(),
                result,
            })
        }
    };

    println!(
        "lambda = {:.12} at a = {:.3e}, rho = {:.3e}, t0 = {:.9} (tail bound {:.1e}{})",
        report.lambda,
        report.argmax.a,
        report.argmax.rho,
        report.argmax.t0,
        report.tail_bound,
        if report.approximate { ", approximate" } else { "" }
    );
    if let Some(v) = &variation {
        println!("{:>8} {:>20} {:>14}", "s", "lambda", "change");
        for e in &v.result.samples {
            println!("{:>8} {:>20.12} {:>14.3e}", e.s, e.lambda, e.lambda - v.result.lambda0);
        }
        println!(
            "fitted curvature {:.6e}, strictly decreasing: {}",
            v.result.fitted_curvature, v.result.strictly_decreasing
        );
    }
    let approximate = report.approximate;
    let out = EntropyOutput {
        lambda: report.lambda,
        argmax: report.argmax,
        approximate,
        tail_bound: report.tail_bound,
        theta_points: args.theta_points,
        curve_sha256: curve_hash(&curve),
        variation,
    };
    write_file(&args.out.join("entropy.json"), &with_schema(ENTROPY_SCHEMA, &out))?;
    Ok(if approximate { 4 } else { 0 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Profile(a) => cmd_profile(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Entropy(a) => cmd_entropy(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
