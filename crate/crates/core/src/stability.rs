//! Stable-region maps and the pivot feasibility bound.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ContactGeometry, GraspConfig, ObjectSpec};
use crate::lp::{solve_force_balance_with, solve_form_closure_with, LpError, Tolerances};
use crate::wrench::{basis_wrenches, gravity_wrench, FrictionSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityMode {
    FormClosure,
    ForceBalance,
}

impl StabilityMode {
    pub fn as_str(self) -> &'static str {
        match self {
            StabilityMode::FormClosure => "form_closure",
            StabilityMode::ForceBalance => "force_balance",
        }
    }
}

impl fmt::Display for StabilityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StabilityMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "form_closure" | "form-closure" => Ok(StabilityMode::FormClosure),
            "force_balance" | "force-balance" => Ok(StabilityMode::ForceBalance),
            other => Err(format!("unknown stability mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilityError {
    #[error("LP failed at alpha = {alpha}, beta = {beta}: {source}")]
    Cell {
        alpha: f64,
        beta: f64,
        #[source]
        source: LpError,
    },
    #[error("invalid {axis} axis: {reason}")]
    Grid { axis: &'static str, reason: String },
}

/// Whether the selected LP is feasible at the configuration.
pub fn is_stable(
    object: &ObjectSpec,
    cfg: &GraspConfig,
    friction: &FrictionSet,
    mode: StabilityMode,
) -> Result<bool, LpError> {
    is_stable_with(object, cfg, friction, mode, &Tolerances::default())
}

pub fn is_stable_with(
    object: &ObjectSpec,
    cfg: &GraspConfig,
    friction: &FrictionSet,
    mode: StabilityMode,
    tol: &Tolerances,
) -> Result<bool, LpError> {
    let basis = basis_wrenches(object, cfg, friction);
    let outcome = match mode {
        StabilityMode::ForceBalance => solve_force_balance_with(&basis, gravity_wrench(object), tol)?,
        StabilityMode::FormClosure => solve_form_closure_with(&basis, tol)?,
    };
    Ok(outcome.feasible)
}

fn stable_at(
    object: &ObjectSpec,
    geometry: ContactGeometry,
    friction: &FrictionSet,
    mode: StabilityMode,
    (l_a, alpha, beta): (f64, f64, f64),
) -> Result<bool, StabilityError> {
    let cfg = GraspConfig::unchecked(l_a, alpha, beta, geometry);
    is_stable(object, &cfg, friction, mode).map_err(|source| StabilityError::Cell {
        alpha,
        beta,
        source,
    })
}

/// Grid of `start, start + step, ...` up to and including `stop` (within
/// rounding), built from integer multiples to avoid accumulated drift.
pub fn axis(start: f64, stop: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || stop < start {
        return Vec::new();
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + step * i as f64).collect()
}

/// Same as [`axis`] but in degrees, converted to radians.
pub fn axis_deg(start_deg: f64, stop_deg: f64, step_deg: f64) -> Vec<f64> {
    axis(start_deg, stop_deg, step_deg)
        .into_iter()
        .map(f64::to_radians)
        .collect()
}

/// Open interval `(0, 90)` degrees at the given step.
pub fn default_alpha_axis(step_deg: f64) -> Vec<f64> {
    let mut grid = axis_deg(step_deg, 90.0, step_deg);
    grid.retain(|a| *a < FRAC_PI_2 - 1e-12);
    grid
}

/// Closed interval `[0, 90]` degrees at the given step.
pub fn default_beta_axis(step_deg: f64) -> Vec<f64> {
    let mut grid = axis_deg(0.0, 90.0, step_deg);
    if let Some(last) = grid.last_mut() {
        if (*last - FRAC_PI_2).abs() < 1e-9 {
            *last = FRAC_PI_2;
        }
    }
    grid
}

pub const DEFAULT_STEP_DEG: f64 = 0.5;
pub const DEFAULT_LA_FAMILY: [f64; 5] = [0.5, 0.6, 0.7, 0.8, 0.9];

fn check_axis(
    name: &'static str,
    values: &[f64],
    lo: f64,
    hi: f64,
    open: bool,
) -> Result<(), StabilityError> {
    let err = |reason: String| StabilityError::Grid { axis: name, reason };
    if values.is_empty() {
        return Err(err("empty".into()));
    }
    if values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(err("values must be strictly increasing".into()));
    }
    for &v in values {
        let inside = if open { v > lo && v < hi } else { v >= lo && v <= hi };
        if !inside {
            return Err(err(format!("value {v} outside the allowed range")));
        }
    }
    Ok(())
}

/// Feasibility over the (alpha, beta) plane at fixed `l_a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMap {
    pub l_a: f64,
    pub friction: FrictionSet,
    pub alpha_axis: Vec<f64>,
    pub beta_axis: Vec<f64>,
    /// Row-major: `feasible[i * beta_axis.len() + j]` is cell (alpha_i, beta_j).
    pub feasible: Vec<bool>,
    pub mode: StabilityMode,
}

impl RegionMap {
    pub fn get(&self, alpha_idx: usize, beta_idx: usize) -> bool {
        self.feasible[alpha_idx * self.beta_axis.len() + beta_idx]
    }

    /// Stability along beta at one alpha.
    pub fn alpha_row(&self, alpha_idx: usize) -> &[bool] {
        let n = self.beta_axis.len();
        &self.feasible[alpha_idx * n..(alpha_idx + 1) * n]
    }

    pub fn feasible_count(&self) -> usize {
        self.feasible.iter().filter(|f| **f).count()
    }

    /// Cell-for-cell inclusion on identical grids.
    pub fn is_subset_of(&self, other: &RegionMap) -> bool {
        self.alpha_axis == other.alpha_axis
            && self.beta_axis == other.beta_axis
            && self
                .feasible
                .iter()
                .zip(&other.feasible)
                .all(|(a, b)| !*a || *b)
    }

    /// Smallest alpha with a feasible cell in the given beta column.
    pub fn min_alpha_at(&self, beta_idx: usize) -> Option<f64> {
        (0..self.alpha_axis.len())
            .find(|&i| self.get(i, beta_idx))
            .map(|i| self.alpha_axis[i])
    }

    /// Largest beta with any feasible cell.
    pub fn max_feasible_beta(&self) -> Option<f64> {
        (0..self.beta_axis.len())
            .rev()
            .find(|&j| (0..self.alpha_axis.len()).any(|i| self.get(i, j)))
            .map(|j| self.beta_axis[j])
    }
}

/// Evaluates `is_stable` on every (alpha, beta) cell. Cells are independent
/// and are evaluated on the current rayon pool; the result does not depend
/// on the pool size.
pub fn region_sweep(
    object: &ObjectSpec,
    geometry: ContactGeometry,
    friction: &FrictionSet,
    l_a: f64,
    alpha_axis: &[f64],
    beta_axis: &[f64],
    mode: StabilityMode,
) -> Result<RegionMap, StabilityError> {
    if !(l_a > 0.0 && l_a <= 1.0) {
        return Err(StabilityError::Grid {
            axis: "l_a",
            reason: format!("l_a = {l_a} outside (0, 1]"),
        });
    }
    check_axis("alpha", alpha_axis, 0.0, FRAC_PI_2, true)?;
    check_axis("beta", beta_axis, 0.0, FRAC_PI_2, false)?;

    let nb = beta_axis.len();
    let feasible = (0..alpha_axis.len() * nb)
        .into_par_iter()
        .map(|idx| {
            let (alpha, beta) = (alpha_axis[idx / nb], beta_axis[idx % nb]);
            stable_at(object, geometry, friction, mode, (l_a, alpha, beta))
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(RegionMap {
        l_a,
        friction: *friction,
        alpha_axis: alpha_axis.to_vec(),
        beta_axis: beta_axis.to_vec(),
        feasible,
        mode,
    })
}

/// Feasibility over the (l_a, beta) plane at fixed alpha; the backdrop for
/// grasp-trajectory overlays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaBetaMap {
    pub alpha: f64,
    pub friction: FrictionSet,
    pub la_axis: Vec<f64>,
    pub beta_axis: Vec<f64>,
    /// Row-major over (l_a, beta).
    pub feasible: Vec<bool>,
    pub mode: StabilityMode,
}

impl LaBetaMap {
    pub fn get(&self, la_idx: usize, beta_idx: usize) -> bool {
        self.feasible[la_idx * self.beta_axis.len() + beta_idx]
    }
}

pub fn la_beta_sweep(
    object: &ObjectSpec,
    geometry: ContactGeometry,
    friction: &FrictionSet,
    alpha: f64,
    la_axis: &[f64],
    beta_axis: &[f64],
    mode: StabilityMode,
) -> Result<LaBetaMap, StabilityError> {
    if !(alpha > 0.0 && alpha < FRAC_PI_2) {
        return Err(StabilityError::Grid {
            axis: "alpha",
            reason: format!("alpha = {alpha} outside (0, pi/2)"),
        });
    }
    check_axis("l_a", la_axis, 0.0, 1.0, false)?;
    if la_axis[0] <= 0.0 {
        return Err(StabilityError::Grid {
            axis: "l_a",
            reason: "values must be positive".into(),
        });
    }
    check_axis("beta", beta_axis, 0.0, FRAC_PI_2, false)?;

    let nb = beta_axis.len();
    let feasible = (0..la_axis.len() * nb)
        .into_par_iter()
        .map(|idx| {
            let (l_a, beta) = (la_axis[idx / nb], beta_axis[idx % nb]);
            stable_at(object, geometry, friction, mode, (l_a, alpha, beta))
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(LaBetaMap {
        alpha,
        friction: *friction,
        la_axis: la_axis.to_vec(),
        beta_axis: beta_axis.to_vec(),
        feasible,
        mode,
    })
}

pub const BETA_UB_RESOLUTION: f64 = 1e-4;

/// Upper bound on the object tilt for which gravity can still be balanced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BetaBound {
    /// Balanced all the way to vertical.
    NotFinite,
    Finite {
        /// First feasible-to-infeasible transition, radians.
        value: f64,
        /// Every feasible-to-infeasible transition seen while bracketing,
        /// refined to the same resolution. `transitions[0] == value`.
        transitions: Vec<f64>,
    },
    /// Already unbalanced when lying flat.
    InfeasibleAtStart,
}

impl BetaBound {
    pub fn value(&self) -> Option<f64> {
        match self {
            BetaBound::Finite { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, BetaBound::Finite { .. })
    }
}

/// Force-balance bound on beta: coarse 1 degree bracketing followed by
/// bisection down to [`BETA_UB_RESOLUTION`].
pub fn beta_upper_bound(
    object: &ObjectSpec,
    geometry: ContactGeometry,
    friction: &FrictionSet,
    l_a: f64,
    alpha: f64,
) -> Result<BetaBound, StabilityError> {
    let probe = |beta: f64| {
        stable_at(
            object,
            geometry,
            friction,
            StabilityMode::ForceBalance,
            (l_a, alpha, beta),
        )
    };

    let coarse = default_beta_axis(1.0);
    let flags = coarse
        .iter()
        .map(|&b| probe(b))
        .collect::<Result<Vec<_>, _>>()?;
    if !flags[0] {
        return Ok(BetaBound::InfeasibleAtStart);
    }

    let mut transitions = Vec::new();
    for i in 1..coarse.len() {
        if flags[i - 1] && !flags[i] {
            let (mut lo, mut hi) = (coarse[i - 1], coarse[i]);
            while hi - lo > BETA_UB_RESOLUTION {
                let mid = 0.5 * (lo + hi);
                if probe(mid)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            transitions.push(0.5 * (lo + hi));
        }
    }

    Ok(match transitions.first() {
        None => BetaBound::NotFinite,
        Some(&value) => BetaBound::Finite { value, transitions },
    })
}

/// Smallest grid alpha (step `step_deg`) at which gravity is balanced.
pub fn min_alpha(
    object: &ObjectSpec,
    geometry: ContactGeometry,
    friction: &FrictionSet,
    l_a: f64,
    beta: f64,
    step_deg: f64,
) -> Result<Option<f64>, StabilityError> {
    for alpha in default_alpha_axis(step_deg) {
        if stable_at(
            object,
            geometry,
            friction,
            StabilityMode::ForceBalance,
            (l_a, alpha, beta),
        )? {
            return Ok(Some(alpha));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn bushing() -> (ObjectSpec, ContactGeometry) {
        (
            ObjectSpec::cylinder("bushing", 34.0, 34.0, 28.0).unwrap(),
            ContactGeometry { x: 9.8, delta: 7.2 },
        )
    }

    fn ground_only() -> FrictionSet {
        FrictionSet::new(0.0, 0.0, 0.4).unwrap()
    }

    #[test]
    fn axes() {
        let alpha = default_alpha_axis(0.5);
        assert_eq!(alpha.len(), 179);
        assert!(alpha[0] > 0.0 && *alpha.last().unwrap() < FRAC_PI_2);
        let beta = default_beta_axis(0.5);
        assert_eq!(beta.len(), 181);
        assert_eq!(beta[0], 0.0);
        assert_eq!(*beta.last().unwrap(), FRAC_PI_2);
        assert_eq!(axis(0.0, 1.0, 0.25), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(axis(1.0, 0.0, 0.1).is_empty());
    }

    #[test]
    fn frictionless_flat_is_unstable() {
        let (obj, geom) = bushing();
        let fr = FrictionSet::frictionless();
        for mode in [StabilityMode::FormClosure, StabilityMode::ForceBalance] {
            for alpha in [0.1, 0.7, 1.4] {
                let cfg = GraspConfig::unchecked(0.8, alpha, 0.0, geom);
                assert!(!is_stable(&obj, &cfg, &fr, mode).unwrap());
            }
        }
    }

    #[test]
    fn full_friction_bushing_grasp_is_stable() {
        // Experimental bushing grasp at the start of the tilt.
        let (obj, geom) = bushing();
        let fr = FrictionSet::new(0.2, 0.4, 0.4).unwrap();
        let cfg = GraspConfig::unchecked(0.9, PI / 10.0, 0.0, geom);
        assert!(is_stable(&obj, &cfg, &fr, StabilityMode::ForceBalance).unwrap());
        assert!(!is_stable(&obj, &cfg, &FrictionSet::frictionless(), StabilityMode::ForceBalance).unwrap());
    }

    #[test]
    fn single_cell_sweep() {
        let (obj, geom) = bushing();
        let fr = FrictionSet::new(0.2, 0.4, 0.4).unwrap();
        let map = region_sweep(&obj, geom, &fr, 0.9, &[PI / 10.0], &[0.0], StabilityMode::ForceBalance).unwrap();
        let cfg = GraspConfig::unchecked(0.9, PI / 10.0, 0.0, geom);
        assert_eq!(map.feasible, vec![is_stable(&obj, &cfg, &fr, StabilityMode::ForceBalance).unwrap()]);
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let (obj, geom) = bushing();
        let fr = ground_only();
        let mode = StabilityMode::ForceBalance;
        assert!(region_sweep(&obj, geom, &fr, 0.5, &[], &[0.0], mode).is_err());
        assert!(region_sweep(&obj, geom, &fr, 0.5, &[0.0], &[0.0], mode).is_err());
        assert!(region_sweep(&obj, geom, &fr, 0.5, &[0.3, 0.2], &[0.0], mode).is_err());
        assert!(region_sweep(&obj, geom, &fr, 0.5, &[0.3], &[-0.1], mode).is_err());
        assert!(region_sweep(&obj, geom, &fr, 1.5, &[0.3], &[0.0], mode).is_err());
    }

    #[test]
    fn ground_friction_expands_region() {
        let (obj, geom) = bushing();
        let alpha = default_alpha_axis(3.0);
        let beta = default_beta_axis(3.0);
        let mode = StabilityMode::ForceBalance;
        let none = region_sweep(&obj, geom, &FrictionSet::frictionless(), 0.5, &alpha, &beta, mode).unwrap();
        let ground = region_sweep(&obj, geom, &ground_only(), 0.5, &alpha, &beta, mode).unwrap();
        assert!(none.is_subset_of(&ground));
        assert!(none.feasible_count() < ground.feasible_count());
    }

    #[test]
    fn larger_contact_distance_moves_region() {
        let (obj, geom) = bushing();
        let alpha = default_alpha_axis(1.0);
        let beta = default_beta_axis(1.0);
        let mode = StabilityMode::ForceBalance;
        let small = region_sweep(&obj, geom, &ground_only(), 0.5, &alpha, &beta, mode).unwrap();
        let large = region_sweep(&obj, geom, &ground_only(), 0.9, &alpha, &beta, mode).unwrap();
        assert!(large.min_alpha_at(0).unwrap() < small.min_alpha_at(0).unwrap());
        assert!(large.max_feasible_beta().unwrap() < small.max_feasible_beta().unwrap());
    }

    #[test]
    fn beta_bound_cases() {
        let (obj, geom) = bushing();
        let fr = ground_only();
        let alpha = 70f64.to_radians();

        // Below the analytic threshold 1 - b/(2 a mu_G) = 0.375 the grasp
        // holds through vertical.
        assert_eq!(beta_upper_bound(&obj, geom, &fr, 0.3, alpha).unwrap(), BetaBound::NotFinite);

        let bound = beta_upper_bound(&obj, geom, &fr, 0.9, alpha).unwrap();
        let value = bound.value().unwrap();
        assert!(value > (obj.a / obj.b).atan());
        let eps = BETA_UB_RESOLUTION;
        let probe = |b: f64| {
            is_stable(&obj, &GraspConfig::unchecked(0.9, alpha, b, geom), &fr, StabilityMode::ForceBalance).unwrap()
        };
        assert!(probe(value - 2.0 * eps));
        assert!(!probe(value + 2.0 * eps));

        assert_eq!(
            beta_upper_bound(&obj, geom, &fr, 0.4, PI / 4.0).unwrap(),
            BetaBound::InfeasibleAtStart
        );
    }

    #[test]
    fn min_alpha_cases() {
        let (obj, geom) = bushing();
        let at = |l_a: f64, fr: &FrictionSet| min_alpha(&obj, geom, fr, l_a, 0.0, 0.5).unwrap();
        assert_eq!(at(0.7, &FrictionSet::frictionless()), None);
        let mut last = f64::INFINITY;
        for l_a in [0.5, 0.6, 0.7, 0.8, 0.9] {
            let a = at(l_a, &ground_only()).unwrap();
            assert!(a <= last);
            last = a;
        }
    }

    #[test]
    fn min_alpha_singleton_grid() {
        // With a 30 degree step the only alpha candidates are 30 and 60;
        // at l_a = 0.4 with ground friction only 60 degrees balances.
        let (obj, geom) = bushing();
        let a = min_alpha(&obj, geom, &ground_only(), 0.4, 0.0, 30.0).unwrap();
        assert_eq!(a, Some(60f64.to_radians()));
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("form_closure".parse::<StabilityMode>().unwrap(), StabilityMode::FormClosure);
        assert_eq!("force-balance".parse::<StabilityMode>().unwrap(), StabilityMode::ForceBalance);
        assert!("closure".parse::<StabilityMode>().is_err());
    }
}
