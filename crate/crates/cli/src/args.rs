use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "holegrasp", version)]
#[command(about = "Stability regions, pivot bounds and trajectories for hole grasps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Object catalog JSON; defaults to the bundled catalog
    #[arg(long, global = true)]
    pub catalog: Option<PathBuf>,

    /// Directory for output files
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,

    /// Worker threads for sweeps (output does not depend on it)
    #[arg(long, global = true)]
    pub parallel: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Stable-region maps over the (alpha, beta) plane, one per l_a
    Region(RegionArgs),
    /// Largest tilt for which gravity stays balanced
    BetaUb(BetaUbArgs),
    /// Pivot and align waypoints
    Traj(TrajArgs),
    /// Grasp trajectory through (l_a, beta) under a sliding schedule
    Simulate(SimulateArgs),
    /// Basis contact wrenches for one configuration
    Wrench(WrenchArgs),
    /// Wilson score confidence intervals
    Ci(CiArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ObjectArgs {
    /// Object name in the catalog
    #[arg(long)]
    pub object: String,

    /// Override the catalog finger width, mm
    #[arg(long)]
    pub w_mm: Option<f64>,

    /// Friction coefficients mu_S,mu_H,mu_G
    #[arg(long, default_value = "0,0,0")]
    pub mu: String,
}

#[derive(Args, Debug)]
pub struct RegionArgs {
    #[command(flatten)]
    pub target: ObjectArgs,

    /// Comma-separated l_a values
    #[arg(long, default_value = "0.5,0.6,0.7,0.8,0.9")]
    pub la: String,

    /// force_balance or form_closure
    #[arg(long, default_value = "force_balance")]
    pub mode: String,

    #[arg(long, default_value = "0.5deg")]
    pub alpha_step: String,

    #[arg(long, default_value = "0.5deg")]
    pub beta_step: String,
}

#[derive(Args, Debug)]
pub struct BetaUbArgs {
    #[command(flatten)]
    pub target: ObjectArgs,

    #[arg(long)]
    pub la: f64,

    /// Gripper angle; `auto` scans the 0.5 degree grid for the largest bound
    #[arg(long, default_value = "auto")]
    pub alpha: String,

    /// Also write the result to this file
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TrajArgs {
    #[command(flatten)]
    pub target: ObjectArgs,

    #[arg(long)]
    pub la: f64,

    #[arg(long)]
    pub alpha: String,

    /// Pivot angle
    #[arg(long, default_value = "90deg")]
    pub theta: String,

    #[arg(long, default_value_t = holegrasp::maneuver::DEFAULT_WAYPOINTS)]
    pub waypoints: usize,

    /// World x of the pivot corner, mm
    #[arg(long, default_value_t = 0.0)]
    pub corner_x: f64,

    /// Stop the pivot at the force-balance bound when one exists
    #[arg(long)]
    pub clamp_beta_ub: bool,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub target: ObjectArgs,

    #[arg(long)]
    pub alpha: String,

    /// `start:end` for linear sliding, or a single value for no sliding
    #[arg(long)]
    pub la_schedule: String,

    #[arg(long, default_value = "90deg")]
    pub theta: String,

    #[arg(long, default_value = "0.5deg")]
    pub beta_step: String,

    /// l_a resolution of the backdrop map
    #[arg(long, default_value_t = 0.01)]
    pub la_step: f64,
}

#[derive(Args, Debug)]
pub struct WrenchArgs {
    #[command(flatten)]
    pub target: ObjectArgs,

    #[arg(long)]
    pub la: f64,

    #[arg(long)]
    pub alpha: String,

    #[arg(long, default_value = "0")]
    pub beta: String,

    /// Also write the CSV to this file
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CiArgs {
    /// Records as `k/n` or `name=k/n`
    pub records: Vec<String>,

    /// CSV file with columns name,successes,trials
    #[arg(long)]
    pub csv: Option<PathBuf>,

    #[arg(long, default_value_t = holegrasp::stats::Z_95)]
    pub z: f64,

    /// Also write the table as CSV to this file
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `18deg`, `0.3rad`, `0.3`, `pi/10` or `pi/3.8rad`. Bare numbers are
/// radians.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let (body, to_rad) = if let Some(v) = t.strip_suffix("deg") {
        (v, PI / 180.0)
    } else if let Some(v) = t.strip_suffix("rad") {
        (v, 1.0)
    } else {
        (t, 1.0)
    };
    let body = body.trim();
    let value = if let Some(rest) = body.strip_prefix("pi") {
        let rest = rest.trim();
        if rest.is_empty() {
            PI
        } else if let Some(div) = rest.strip_prefix('/') {
            let d: f64 = div.trim().parse().map_err(|_| bad_angle(text))?;
            PI / d
        } else {
            return Err(bad_angle(text));
        }
    } else {
        body.parse::<f64>().map_err(|_| bad_angle(text))?
    };
    let rad = value * to_rad;
    if rad.is_finite() {
        Ok(rad)
    } else {
        Err(bad_angle(text))
    }
}

fn bad_angle(text: &str) -> String {
    format!("cannot parse angle `{text}` (expected e.g. 18deg, 0.31rad, pi/10)")
}

pub fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("cannot parse number `{}`", s.trim()))
        })
        .collect()
}
