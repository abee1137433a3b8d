//! Command-line driver for the `holegrasp` library.
//!
//! Every subcommand validates all of its inputs and finishes its analysis
//! before the first file is written, so a failing run leaves no output.

pub mod args;
pub mod output;

use std::ffi::OsString;
use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;

use holegrasp::maneuver::clamp_theta;
use holegrasp::stability::{
    axis_deg, default_alpha_axis, default_beta_axis, la_beta_sweep, DEFAULT_STEP_DEG,
};
use holegrasp::{
    align_phase, basis_wrenches, beta_upper_bound, plan_pivot, region_sweep,
    simulate_grasp_trajectory, wilson_ci, BetaBound, Catalog, CatalogEntry, ContactGeometry,
    FrictionSet, GraspConfig, GripperSpec, LaSchedule, ObjectPose, StabilityMode, TrialRecord,
};

use args::{parse_angle, parse_list, Cli, Command, ObjectArgs};
use output::CiRow;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("alpha is not balanced at beta = 0")]
    InfeasibleAtStart,
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io { .. } => 3,
            CliError::InfeasibleAtStart => 4,
            CliError::Internal(_) => 1,
        }
    }
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("--{field}: {msg}"))
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code. Reports go to stdout, errors to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    match execute(&cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command, writing the report to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let mut report = Vec::new();
    let result = match cli.parallel {
        None => dispatch(cli, &mut report),
        Some(0) => Err(invalid("parallel", "must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Internal(e.to_string()))
            .and_then(|pool| pool.install(|| dispatch(cli, &mut report))),
    };
    out.write_all(&report).map_err(stdout_err)?;
    let outputs = result?;
    write_all(&outputs)?;
    for (path, _) in &outputs {
        writeln!(out, "wrote {}", path.display()).map_err(stdout_err)?;
    }
    Ok(())
}

fn stdout_err(source: std::io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

type Outputs = Vec<(PathBuf, String)>;

fn write_all(outputs: &Outputs) -> Result<(), CliError> {
    for (path, text) in outputs {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|source| CliError::Io {
                path: dir.to_path_buf(),
                source,
            })?;
        }
        fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
    }
    Ok(())
}

fn dispatch(cli: &Cli, out: &mut Vec<u8>) -> Result<Outputs, CliError> {
    match &cli.command {
        Command::Region(a) => cmd_region(cli, a),
        Command::BetaUb(a) => cmd_beta_ub(cli, a, out),
        Command::Traj(a) => cmd_traj(cli, a),
        Command::Simulate(a) => cmd_simulate(cli, a),
        Command::Wrench(a) => cmd_wrench(cli, a, out),
        Command::Ci(a) => cmd_ci(a, out),
    }
}

fn load_catalog(path: Option<&Path>) -> Result<Catalog, CliError> {
    match path {
        None => Ok(Catalog::bundled()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|source| CliError::Io {
                path: p.to_path_buf(),
                source,
            })?;
            Catalog::from_json(&text).map_err(|e| invalid("catalog", e))
        }
    }
}

struct Target {
    entry: CatalogEntry,
    friction: FrictionSet,
}

fn resolve_target(cli: &Cli, a: &ObjectArgs) -> Result<Target, CliError> {
    let catalog = load_catalog(cli.catalog.as_deref())?;
    let mut entry = catalog.get(&a.object).map_err(|e| invalid("object", e))?;
    if let Some(w) = a.w_mm {
        let gripper = GripperSpec::new(w, entry.gripper.stroke).map_err(|e| invalid("w-mm", e))?;
        entry.geometry =
            ContactGeometry::new(&gripper, &entry.object).map_err(|e| invalid("w-mm", e))?;
        entry.gripper = gripper;
    }
    let mu = parse_list(&a.mu).map_err(|e| invalid("mu", e))?;
    let [s, h, g] = mu[..] else {
        return Err(invalid("mu", format!("expected 3 values, got {}", mu.len())));
    };
    let friction = FrictionSet::new(s, h, g).map_err(|e| invalid("mu", e))?;
    Ok(Target { entry, friction })
}

fn angle(field: &str, text: &str) -> Result<f64, CliError> {
    parse_angle(text).map_err(|e| invalid(field, e))
}

fn step_deg(field: &str, text: &str) -> Result<f64, CliError> {
    let deg = angle(field, text)?.to_degrees();
    if deg > 0.0 && deg <= 90.0 {
        Ok(deg)
    } else {
        Err(invalid(field, "step must lie in (0, 90] degrees"))
    }
}

fn check_la(field: &str, l_a: f64) -> Result<f64, CliError> {
    if l_a > 0.0 && l_a <= 1.0 {
        Ok(l_a)
    } else {
        Err(invalid(field, format!("l_a = {l_a} outside (0, 1]")))
    }
}

fn grasp_alpha(field: &str, text: &str) -> Result<f64, CliError> {
    let alpha = angle(field, text)?;
    if alpha > 0.0 && alpha < FRAC_PI_2 {
        Ok(alpha)
    } else {
        Err(invalid(field, format!("alpha = {alpha} rad outside (0, pi/2)")))
    }
}

fn config(t: &Target, l_a: f64, alpha: f64, beta: f64) -> Result<GraspConfig, CliError> {
    GraspConfig::new(l_a, alpha, beta, t.entry.geometry, &t.entry.object)
        .map_err(|e| CliError::Validation(e.to_string()))
}

fn analysis<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Internal(e.to_string())
}

fn cmd_region(cli: &Cli, a: &args::RegionArgs) -> Result<Outputs, CliError> {
    let t = resolve_target(cli, &a.target)?;
    let las = parse_list(&a.la)
        .map_err(|e| invalid("la", e))?
        .into_iter()
        .map(|v| check_la("la", v))
        .collect::<Result<Vec<_>, _>>()?;
    let mode: StabilityMode = a.mode.parse().map_err(|e| invalid("mode", e))?;
    let alpha_axis = default_alpha_axis(step_deg("alpha-step", &a.alpha_step)?);
    let beta_axis = default_beta_axis(step_deg("beta-step", &a.beta_step)?);
    if alpha_axis.is_empty() {
        return Err(invalid("alpha-step", "no grid points inside (0, 90) degrees"));
    }

    let mut outputs = Outputs::new();
    for l_a in las {
        let map = region_sweep(
            &t.entry.object,
            t.entry.geometry,
            &t.friction,
            l_a,
            &alpha_axis,
            &beta_axis,
            mode,
        )
        .map_err(analysis)?;
        let stem = format!("region_la{l_a:.3}");
        let csv_name = format!("{stem}.csv");
        outputs.push((
            cli.out_dir.join(format!("{stem}.json")),
            output::region_json(&map, &t.entry, &csv_name),
        ));
        outputs.push((cli.out_dir.join(csv_name), output::region_csv(&map)));
    }
    Ok(outputs)
}

/// Scans the default alpha grid for the most permissive bound: unbounded
/// first, then the largest finite value. Ties go to the smallest alpha.
fn best_alpha(t: &Target, l_a: f64) -> Result<(Option<f64>, BetaBound), CliError> {
    let (object, geometry) = (&t.entry.object, t.entry.geometry);
    let bounds = default_alpha_axis(DEFAULT_STEP_DEG)
        .into_par_iter()
        .map(|alpha| {
            beta_upper_bound(object, geometry, &t.friction, l_a, alpha).map(|b| (alpha, b))
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(analysis)?;
    let rank = |b: &BetaBound| match b {
        BetaBound::NotFinite => f64::INFINITY,
        BetaBound::Finite { value, .. } => *value,
        BetaBound::InfeasibleAtStart => f64::NEG_INFINITY,
    };
    let mut best: Option<(f64, BetaBound)> = None;
    for (alpha, b) in bounds {
        if b != BetaBound::InfeasibleAtStart
            && best.as_ref().is_none_or(|(_, cur)| rank(&b) > rank(cur))
        {
            best = Some((alpha, b));
        }
    }
    Ok(match best {
        Some((alpha, b)) => (Some(alpha), b),
        None => (None, BetaBound::InfeasibleAtStart),
    })
}

fn cmd_beta_ub(cli: &Cli, a: &args::BetaUbArgs, out: &mut dyn Write) -> Result<Outputs, CliError> {
    let t = resolve_target(cli, &a.target)?;
    let l_a = check_la("la", a.la)?;
    let (object, geometry) = (&t.entry.object, t.entry.geometry);
    let (alpha, bound) = if a.alpha.trim() == "auto" {
        best_alpha(&t, l_a)?
    } else {
        let alpha = config(&t, l_a, grasp_alpha("alpha", &a.alpha)?, 0.0)?.alpha;
        let bound =
            beta_upper_bound(object, geometry, &t.friction, l_a, alpha).map_err(analysis)?;
        (Some(alpha), bound)
    };
    let value = match (&bound, alpha) {
        (BetaBound::InfeasibleAtStart, _) | (_, None) => json!({ "error": "infeasible_at_start" }),
        (BetaBound::NotFinite, Some(alpha)) => {
            json!({ "beta_ub_rad": "none", "alpha_rad": output::num_v(alpha) })
        }
        (BetaBound::Finite { value, .. }, Some(alpha)) => json!({
            "beta_ub_rad": output::num_v(*value),
            "alpha_rad": output::num_v(alpha),
        }),
    };
    let text = output::pretty(&value);
    out.write_all(text.as_bytes()).map_err(stdout_err)?;
    if let Some(path) = &a.out {
        write_all(&vec![(path.clone(), text)])?;
    }
    match bound {
        BetaBound::InfeasibleAtStart => Err(CliError::InfeasibleAtStart),
        _ => Ok(Outputs::new()),
    }
}

fn cmd_traj(cli: &Cli, a: &args::TrajArgs) -> Result<Outputs, CliError> {
    let t = resolve_target(cli, &a.target)?;
    let cfg = config(&t, a.la, grasp_alpha("alpha", &a.alpha)?, 0.0)?;
    let mut theta = angle("theta", &a.theta)?;
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(invalid("theta", "pivot angle must lie in [0, pi/2]"));
    }
    if a.waypoints < 2 {
        return Err(invalid("waypoints", "at least 2 are required"));
    }
    if !a.corner_x.is_finite() {
        return Err(invalid("corner-x", "must be finite"));
    }
    let object = &t.entry.object;
    if a.clamp_beta_ub {
        let bound = beta_upper_bound(object, cfg.geometry(), &t.friction, cfg.l_a, cfg.alpha)
            .map_err(analysis)?;
        if bound == BetaBound::InfeasibleAtStart {
            return Err(CliError::InfeasibleAtStart);
        }
        theta = clamp_theta(theta, &bound, 0.0);
    }
    let pose = ObjectPose::resting(object, a.corner_x);
    let pivot = plan_pivot(object, &cfg, &pose, theta, a.waypoints)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let align = align_phase(object, &cfg, pivot.p_c, a.waypoints)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(vec![
        (cli.out_dir.join("pivot.json"), output::pivot_json(&pivot)),
        (cli.out_dir.join("align.json"), output::align_json(&align)),
    ])
}

fn parse_schedule(text: &str, theta: f64) -> Result<LaSchedule, CliError> {
    let values: Vec<&str> = text.split(':').collect();
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| invalid("la-schedule", format!("cannot parse number `{s}`")))
    };
    let schedule = match values[..] {
        [v] => LaSchedule::Constant { l_a: num(v)? },
        [s, e] => LaSchedule::linear(num(s)?, num(e)?, theta),
        _ => return Err(invalid("la-schedule", "expected `l_a` or `start:end`")),
    };
    schedule.validate().map_err(|e| invalid("la-schedule", e))?;
    Ok(schedule)
}

/// `step, 2 step, ...` up to 1, clamped so rounding never leaves (0, 1].
fn la_axis(step: f64) -> Vec<f64> {
    let n = (1.0 / step + 1e-9).floor() as usize;
    (1..=n).map(|i| (step * i as f64).min(1.0)).collect()
}

fn cmd_simulate(cli: &Cli, a: &args::SimulateArgs) -> Result<Outputs, CliError> {
    let t = resolve_target(cli, &a.target)?;
    let alpha = grasp_alpha("alpha", &a.alpha)?;
    let theta = angle("theta", &a.theta)?;
    if !(theta > 0.0 && theta <= FRAC_PI_2) {
        return Err(invalid("theta", "pivot angle must lie in (0, pi/2]"));
    }
    let schedule = parse_schedule(&a.la_schedule, theta)?;
    let beta_step = step_deg("beta-step", &a.beta_step)?;
    if !(a.la_step > 0.0 && a.la_step <= 1.0) {
        return Err(invalid("la-step", "must lie in (0, 1]"));
    }

    let betas: Vec<f64> = axis_deg(0.0, theta.to_degrees(), beta_step)
        .into_iter()
        .map(|b| b.min(theta))
        .collect();
    let (object, geometry) = (&t.entry.object, t.entry.geometry);
    let traj = simulate_grasp_trajectory(object, geometry, &t.friction, alpha, &schedule, &betas)
        .map_err(|e| invalid("la-schedule", e))?;
    let map = la_beta_sweep(
        object,
        geometry,
        &t.friction,
        alpha,
        &la_axis(a.la_step),
        &betas,
        StabilityMode::ForceBalance,
    )
    .map_err(analysis)?;

    let csv_name = "simulate_map.csv";
    Ok(vec![
        (cli.out_dir.join("trajectory.csv"), output::trajectory_csv(&traj)),
        (
            cli.out_dir.join("simulate_map.json"),
            output::la_beta_json(&map, &t.entry, csv_name, &traj),
        ),
        (cli.out_dir.join(csv_name), output::la_beta_csv(&map)),
    ])
}

fn cmd_wrench(cli: &Cli, a: &args::WrenchArgs, out: &mut dyn Write) -> Result<Outputs, CliError> {
    let t = resolve_target(cli, &a.target)?;
    let alpha = grasp_alpha("alpha", &a.alpha)?;
    let beta = angle("beta", &a.beta)?;
    let cfg = config(&t, a.la, alpha, beta)?;
    let text = output::wrench_csv(&basis_wrenches(&t.entry.object, &cfg, &t.friction));
    out.write_all(text.as_bytes()).map_err(stdout_err)?;
    Ok(a.out.iter().map(|p| (p.clone(), text.clone())).collect())
}

fn parse_record(text: &str, index: usize) -> Result<(String, u64, u64), CliError> {
    let (name, counts) = match text.split_once('=') {
        Some((n, c)) => (n.trim().to_string(), c),
        None => (format!("{}", index + 1), text),
    };
    let bad = || invalid("records", format!("cannot parse `{text}` (expected k/n or name=k/n)"));
    let (k, n) = counts.split_once('/').ok_or_else(bad)?;
    let k = k.trim().parse().map_err(|_| bad())?;
    let n = n.trim().parse().map_err(|_| bad())?;
    Ok((name, k, n))
}

#[derive(serde::Deserialize)]
struct CsvRecord {
    name: String,
    successes: u64,
    trials: u64,
}

fn cmd_ci(a: &args::CiArgs, out: &mut dyn Write) -> Result<Outputs, CliError> {
    let mut records = a
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| parse_record(r, i))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(path) = &a.csv {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        for row in reader.deserialize::<CsvRecord>() {
            let r = row.map_err(|e| invalid("csv", e))?;
            records.push((r.name, r.successes, r.trials));
        }
    }
    if records.is_empty() {
        return Err(invalid("records", "no records given"));
    }

    let rows = records
        .into_iter()
        .map(|(name, successes, trials)| {
            let ci = wilson_ci(&TrialRecord::new(successes, trials).with_z(a.z))
                .map_err(|e| invalid("records", format!("{name}: {e}")))?;
            Ok(CiRow {
                name,
                successes,
                trials,
                ci,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    out.write_all(output::ci_table(&rows).as_bytes())
        .map_err(stdout_err)?;
    Ok(a.out.iter().map(|p| (p.clone(), output::ci_csv(&rows))).collect())
}
