//! Grasp, tilt and align: trajectory generation for the pivot maneuver and
//! grasp-trajectory simulation through the (l_a, beta) plane.
//!
//! World frame: the ground is `y = 0` with gravity along `-y`. In the body
//! frame the object occupies `[-a, a] x [-b, b]`; the contacts sit at
//!
//! ```text
//! S = (a - l, b)     finger on the outer surface
//! H = (a, b - delta) finger caught in the hole, on the end face
//! G = (-a, -b)       ground corner, the pivot
//! ```
//!
//! and a tilt `beta` rotates the body counter-clockwise about its centre.
//! The fingers point along `(-sin alpha, -cos alpha)` in the body frame, so
//! `alpha -> pi/2` lines them up with the hole axis.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ContactGeometry, GraspConfig, ObjectSpec};
use crate::lp::LpError;
use crate::stability::{is_stable, BetaBound, StabilityMode};
use crate::wrench::FrictionSet;

pub const DEFAULT_WAYPOINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GripperPose {
    pub x: f64,
    pub y: f64,
    /// World angle of the finger axis, palm towards fingertips.
    pub phi: f64,
}

impl GripperPose {
    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

/// Planar pose of the object: centre of mass position and tilt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectPose {
    pub x: f64,
    pub y: f64,
    pub tilt: f64,
}

impl ObjectPose {
    /// Lying flat on the ground with the pivot corner at `x = corner_x`.
    pub fn resting(object: &ObjectSpec, corner_x: f64) -> Self {
        ObjectPose {
            x: corner_x + object.a,
            y: object.b,
            tilt: 0.0,
        }
    }

    pub fn to_world(&self, body: [f64; 2]) -> [f64; 2] {
        let [x, y] = rotate(body, self.tilt);
        [self.x + x, self.y + y]
    }
}

fn rotate([x, y]: [f64; 2], angle: f64) -> [f64; 2] {
    let (s, c) = angle.sin_cos();
    [c * x - s * y, s * x + c * y]
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn add(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] + b[0], a[1] + b[1]]
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = sub(a, b);
    d[0].hypot(d[1])
}

/// Body-frame contact points (S, H, G).
pub fn contact_points(object: &ObjectSpec, cfg: &GraspConfig) -> [[f64; 2]; 3] {
    let (a, b) = (object.a, object.b);
    let l = cfg.contact_distance(object);
    [[a - l, b], [a, b - cfg.delta], [-a, -b]]
}

/// Finger axis angle in the body frame for a gripper-object angle `alpha`.
fn finger_angle(alpha: f64) -> f64 {
    -FRAC_PI_2 - alpha
}

/// Jaw midpoint in the body frame: halfway between the two finger contacts.
fn jaw_midpoint(object: &ObjectSpec, cfg: &GraspConfig) -> [f64; 2] {
    let [s, h, _] = contact_points(object, cfg);
    [0.5 * (s[0] + h[0]), 0.5 * (s[1] + h[1])]
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ManeuverError {
    #[error("pivot angle {0} rad must lie in [0, pi/2]")]
    ThetaOutOfRange(f64),
    #[error("at least 2 waypoints are required, got {0}")]
    TooFewWaypoints(usize),
    #[error("gripper centre at y = {y} lies below the ground plane (waypoint {index})")]
    GroundCollision { index: usize, y: f64 },
    #[error("l_a schedule: {0}")]
    Schedule(String),
    #[error("beta grid: {0}")]
    BetaGrid(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotPlan {
    pub p_i: GripperPose,
    pub p_c: [f64; 2],
    pub r: f64,
    pub theta: f64,
    pub start_tilt: f64,
    pub waypoints: Vec<GripperPose>,
}

impl PivotPlan {
    pub fn final_tilt(&self) -> f64 {
        self.start_tilt + self.theta
    }
}

/// Limits the pivot angle to the force-balance bound when one exists.
pub fn clamp_theta(theta: f64, bound: &BetaBound, start_tilt: f64) -> f64 {
    match bound.value() {
        Some(ub) => theta.min((ub - start_tilt).max(0.0)),
        None => theta,
    }
}

/// Circular pivot of the grasped object about its ground corner.
///
/// The gripper is rigidly attached to the object, so every waypoint is the
/// initial jaw midpoint rotated about `p_c` and the finger axis turns with it.
pub fn plan_pivot(
    object: &ObjectSpec,
    cfg: &GraspConfig,
    pose: &ObjectPose,
    theta: f64,
    n_waypoints: usize,
) -> Result<PivotPlan, ManeuverError> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(ManeuverError::ThetaOutOfRange(theta));
    }
    if n_waypoints < 2 {
        return Err(ManeuverError::TooFewWaypoints(n_waypoints));
    }

    let [_, _, g] = contact_points(object, cfg);
    let p_c = pose.to_world(g);
    let start = pose.to_world(jaw_midpoint(object, cfg));
    let p_i = GripperPose {
        x: start[0],
        y: start[1],
        phi: pose.tilt + finger_angle(cfg.alpha),
    };
    if p_i.y < 0.0 {
        return Err(ManeuverError::GroundCollision { index: 0, y: p_i.y });
    }

    let arm = sub(start, p_c);
    let last = (n_waypoints - 1) as f64;
    let waypoints = (0..n_waypoints)
        .map(|k| {
            let angle = theta * k as f64 / last;
            let [x, y] = add(p_c, rotate(arm, angle));
            GripperPose {
                x,
                y,
                phi: p_i.phi + angle,
            }
        })
        .collect::<Vec<_>>();

    if let Some((index, wp)) = waypoints.iter().enumerate().find(|(_, wp)| wp.y < 0.0) {
        return Err(ManeuverError::GroundCollision { index, y: wp.y });
    }

    Ok(PivotPlan {
        p_i,
        p_c,
        r: dist(start, p_c),
        theta,
        start_tilt: pose.tilt,
        waypoints,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignPlan {
    /// In-hole contact H, the fixed rotation centre.
    pub fingertip: [f64; 2],
    /// Distance from H to the jaw midpoint.
    pub r: f64,
    /// Signed gripper rotation, radians (negative: clockwise).
    pub rotation: f64,
    /// Gripper-object angle at each waypoint, `alpha` up to `pi/2`.
    pub grasp_angles: Vec<f64>,
    pub poses: Vec<GripperPose>,
}

/// Rotates the gripper about H until the fingers lie along the hole axis.
/// The object stands vertically on its pivot corner at `pivot_center`.
pub fn align_phase(
    object: &ObjectSpec,
    cfg: &GraspConfig,
    pivot_center: [f64; 2],
    n_waypoints: usize,
) -> Result<AlignPlan, ManeuverError> {
    if n_waypoints < 2 {
        return Err(ManeuverError::TooFewWaypoints(n_waypoints));
    }
    let [_, h, g] = contact_points(object, cfg);
    let upright = {
        let [gx, gy] = rotate(g, FRAC_PI_2);
        ObjectPose {
            x: pivot_center[0] - gx,
            y: pivot_center[1] - gy,
            tilt: FRAC_PI_2,
        }
    };
    let fingertip = upright.to_world(h);
    let start = upright.to_world(jaw_midpoint(object, cfg));
    let phi0 = FRAC_PI_2 + finger_angle(cfg.alpha);
    // Jaw midpoint relative to the fingertip, in the gripper frame.
    let offset = rotate(sub(start, fingertip), -phi0);

    let last = (n_waypoints - 1) as f64;
    let span = FRAC_PI_2 - cfg.alpha;
    let grasp_angles: Vec<f64> = (0..n_waypoints)
        .map(|k| cfg.alpha + span * k as f64 / last)
        .collect();
    let poses = grasp_angles
        .iter()
        .map(|&psi| {
            let phi = FRAC_PI_2 + finger_angle(psi);
            let [x, y] = add(fingertip, rotate(offset, phi));
            GripperPose { x, y, phi }
        })
        .collect();

    Ok(AlignPlan {
        fingertip,
        r: dist(start, fingertip),
        rotation: -span,
        grasp_angles,
        poses,
    })
}

/// Recovers the fingertip position implied by a gripper pose, given the
/// fingertip-to-midpoint offset in the gripper frame.
pub fn fingertip_from_pose(pose: &GripperPose, offset: [f64; 2]) -> [f64; 2] {
    sub(pose.position(), rotate(offset, pose.phi))
}

/// Prescribed contact distance as a function of tilt. Sliding at S only
/// ever shortens `l`, so schedules must be non-increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LaSchedule {
    Constant { l_a: f64 },
    Linear { start: f64, end: f64, beta_start: f64, beta_end: f64 },
    /// Piecewise linear through `(beta, l_a)` knots.
    Piecewise { knots: Vec<(f64, f64)> },
}

impl LaSchedule {
    /// Linear from `start` at beta = 0 to `end` at beta = `theta`.
    pub fn linear(start: f64, end: f64, theta: f64) -> Self {
        LaSchedule::Linear {
            start,
            end,
            beta_start: 0.0,
            beta_end: theta,
        }
    }

    pub fn validate(&self) -> Result<(), ManeuverError> {
        let err = |m: String| Err(ManeuverError::Schedule(m));
        let la_ok = |v: f64| v > 0.0 && v <= 1.0;
        match self {
            LaSchedule::Constant { l_a } => {
                if !la_ok(*l_a) {
                    return err(format!("l_a = {l_a} outside (0, 1]"));
                }
            }
            LaSchedule::Linear { start, end, beta_start, beta_end } => {
                if !la_ok(*start) || !la_ok(*end) {
                    return err(format!("l_a endpoints {start}, {end} outside (0, 1]"));
                }
                if end > start {
                    return err(format!("l_a must not increase ({start} -> {end})"));
                }
                if !(beta_end > beta_start) {
                    return err("beta range must be increasing".into());
                }
            }
            LaSchedule::Piecewise { knots } => {
                if knots.is_empty() {
                    return err("no knots".into());
                }
                for w in knots.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return err("knot betas must be strictly increasing".into());
                    }
                    if w[1].1 > w[0].1 {
                        return err(format!("l_a must not increase ({} -> {})", w[0].1, w[1].1));
                    }
                }
                if let Some((_, v)) = knots.iter().find(|(_, v)| !la_ok(*v)) {
                    return err(format!("l_a = {v} outside (0, 1]"));
                }
            }
        }
        Ok(())
    }

    /// Beta interval on which the schedule is defined, if bounded.
    pub fn domain(&self) -> Option<(f64, f64)> {
        match self {
            LaSchedule::Constant { .. } => None,
            LaSchedule::Linear { beta_start, beta_end, .. } => Some((*beta_start, *beta_end)),
            LaSchedule::Piecewise { knots } => Some((knots[0].0, knots[knots.len() - 1].0)),
        }
    }

    pub fn endpoints(&self) -> Option<((f64, f64), (f64, f64))> {
        match self {
            LaSchedule::Constant { .. } => None,
            LaSchedule::Linear { start, end, beta_start, beta_end } => {
                Some(((*beta_start, *start), (*beta_end, *end)))
            }
            LaSchedule::Piecewise { knots } => Some((knots[0], knots[knots.len() - 1])),
        }
    }

    pub fn eval(&self, beta: f64) -> f64 {
        match self {
            LaSchedule::Constant { l_a } => *l_a,
            LaSchedule::Linear { start, end, beta_start, beta_end } => {
                let t = ((beta - beta_start) / (beta_end - beta_start)).clamp(0.0, 1.0);
                start + (end - start) * t
            }
            LaSchedule::Piecewise { knots } => {
                if beta <= knots[0].0 {
                    return knots[0].1;
                }
                for w in knots.windows(2) {
                    let ((b0, l0), (b1, l1)) = (w[0], w[1]);
                    if beta <= b1 {
                        return l0 + (l1 - l0) * (beta - b0) / (b1 - b0);
                    }
                }
                knots[knots.len() - 1].1
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub beta: f64,
    pub l_a: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraspTrajectory {
    pub alpha: f64,
    pub samples: Vec<TrajectorySample>,
    /// (beta, l_a) where the grasp starts and ends.
    pub initial_mark: Option<(f64, f64)>,
    pub final_mark: Option<(f64, f64)>,
}

impl GraspTrajectory {
    /// Number of leading samples that are stable.
    pub fn stable_prefix_len(&self) -> usize {
        self.samples.iter().take_while(|s| s.stable).count()
    }

    /// First beta at which the grasp leaves the stable region.
    pub fn first_exit(&self) -> Option<f64> {
        self.samples.iter().find(|s| !s.stable).map(|s| s.beta)
    }
}

/// Follows a prescribed l_a schedule through the tilt and records
/// force-balance stability at every beta sample.
pub fn simulate_grasp_trajectory(
    object: &ObjectSpec,
    geometry: ContactGeometry,
    friction: &FrictionSet,
    alpha: f64,
    schedule: &LaSchedule,
    beta_grid: &[f64],
) -> Result<GraspTrajectory, ManeuverError> {
    schedule.validate()?;
    if beta_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(ManeuverError::BetaGrid("must be non-decreasing".into()));
    }
    if let Some(b) = beta_grid.iter().find(|b| !(**b >= 0.0 && **b <= FRAC_PI_2)) {
        return Err(ManeuverError::BetaGrid(format!("beta = {b} outside [0, pi/2]")));
    }
    if let Some((lo, hi)) = schedule.domain() {
        let slack = 1e-12;
        if let Some(b) = beta_grid.iter().find(|b| **b < lo - slack || **b > hi + slack) {
            return Err(ManeuverError::BetaGrid(format!(
                "beta = {b} outside the schedule domain [{lo}, {hi}]"
            )));
        }
    }

    let samples = beta_grid
        .iter()
        .map(|&beta| {
            let l_a = schedule.eval(beta);
            let cfg = GraspConfig::unchecked(l_a, alpha, beta, geometry);
            let stable = is_stable(object, &cfg, friction, StabilityMode::ForceBalance)?;
            Ok(TrajectorySample { beta, l_a, stable })
        })
        .collect::<Result<Vec<_>, ManeuverError>>()?;

    let (initial_mark, final_mark) = match schedule.endpoints() {
        Some((first, last)) => (Some(first), Some(last)),
        None => (
            samples.first().map(|s| (s.beta, s.l_a)),
            samples.last().map(|s| (s.beta, s.l_a)),
        ),
    };

    Ok(GraspTrajectory {
        alpha,
        samples,
        initial_mark,
        final_mark,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stability::{default_beta_axis, region_sweep};
    use std::f64::consts::PI;

    fn bushing() -> (ObjectSpec, ContactGeometry) {
        (
            ObjectSpec::cylinder("bushing", 34.0, 34.0, 28.0).unwrap(),
            ContactGeometry { x: 9.8, delta: 7.2 },
        )
    }

    fn cfg(l_a: f64, alpha: f64) -> GraspConfig {
        GraspConfig::unchecked(l_a, alpha, 0.0, bushing().1)
    }

    #[test]
    fn quarter_turn_ends_vertical() {
        let (obj, _) = bushing();
        let pose = ObjectPose::resting(&obj, 0.0);
        let plan = plan_pivot(&obj, &cfg(0.9, PI / 10.0), &pose, FRAC_PI_2, 64).unwrap();
        assert_eq!(plan.final_tilt(), FRAC_PI_2);
        assert_eq!(plan.p_c, [0.0, 0.0]);
        assert_eq!(plan.waypoints.len(), 64);
        let last = plan.waypoints.last().unwrap();
        assert!((last.phi - plan.p_i.phi - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn zero_turn_repeats_start() {
        let (obj, _) = bushing();
        let pose = ObjectPose::resting(&obj, 5.0);
        let plan = plan_pivot(&obj, &cfg(0.6, 0.4), &pose, 0.0, 2).unwrap();
        for wp in &plan.waypoints {
            assert!((wp.x - plan.p_i.x).abs() < 1e-12);
            assert!((wp.y - plan.p_i.y).abs() < 1e-12);
            assert_eq!(wp.phi, plan.p_i.phi);
        }
    }

    #[test]
    fn arc_radius_is_constant() {
        let (obj, _) = bushing();
        let pose = ObjectPose::resting(&obj, -12.0);
        let plan = plan_pivot(&obj, &cfg(0.75, 0.9), &pose, 1.2, 200).unwrap();
        let worst = plan
            .waypoints
            .iter()
            .map(|wp| (dist(wp.position(), plan.p_c) - plan.r).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-9 * plan.r);
        let steps: Vec<f64> = plan.waypoints.windows(2).map(|w| w[1].phi - w[0].phi).collect();
        for s in steps {
            assert!((s - 1.2 / 199.0).abs() < 1e-12);
        }
    }

    #[test]
    fn plan_rejections() {
        let (obj, _) = bushing();
        let pose = ObjectPose::resting(&obj, 0.0);
        let c = cfg(0.5, 0.5);
        assert!(matches!(
            plan_pivot(&obj, &c, &pose, 1.7, 10),
            Err(ManeuverError::ThetaOutOfRange(_))
        ));
        assert!(matches!(
            plan_pivot(&obj, &c, &pose, 1.0, 1),
            Err(ManeuverError::TooFewWaypoints(1))
        ));
        let buried = ObjectPose { y: -50.0, ..pose };
        assert!(matches!(
            plan_pivot(&obj, &c, &buried, 1.0, 10),
            Err(ManeuverError::GroundCollision { index: 0, .. })
        ));
    }

    #[test]
    fn clamp_to_bound() {
        let bound = BetaBound::Finite { value: 1.2, transitions: vec![1.2] };
        assert_eq!(clamp_theta(FRAC_PI_2, &bound, 0.0), 1.2);
        assert_eq!(clamp_theta(1.0, &bound, 0.0), 1.0);
        assert_eq!(clamp_theta(FRAC_PI_2, &BetaBound::NotFinite, 0.0), FRAC_PI_2);
    }

    #[test]
    fn align_interpolates_to_hole_axis() {
        let (obj, _) = bushing();
        let plan = align_phase(&obj, &cfg(0.9, PI / 10.0), [0.0, 0.0], 5).unwrap();
        assert_eq!(plan.grasp_angles.len(), 5);
        assert_eq!(plan.grasp_angles[0], PI / 10.0);
        assert!((plan.grasp_angles[4] - FRAC_PI_2).abs() < 1e-15);
        // Uniform steps of (pi/2 - pi/10) / 4 = pi/10.
        for w in plan.grasp_angles.windows(2) {
            assert!((w[1] - w[0] - PI / 10.0).abs() < 1e-15);
        }
        assert!((plan.rotation + 0.4 * PI).abs() < 1e-15);
    }

    #[test]
    fn align_holds_fingertip() {
        let (obj, _) = bushing();
        let plan = align_phase(&obj, &cfg(0.7, 0.3), [10.0, 0.0], 33).unwrap();
        let first = plan.poses[0];
        let offset = rotate(sub(first.position(), plan.fingertip), -first.phi);
        for pose in &plan.poses {
            let tip = fingertip_from_pose(pose, offset);
            assert!(dist(tip, plan.fingertip) < 1e-9);
        }
        // Upright object: H sits above the pivot corner.
        assert!(plan.fingertip[1] > 2.0 * obj.a - 1e-9);
    }

    #[test]
    fn align_at_hole_axis_is_stationary() {
        let (obj, _) = bushing();
        let plan = align_phase(&obj, &cfg(0.7, FRAC_PI_2), [0.0, 0.0], 4).unwrap();
        for pose in &plan.poses {
            assert_eq!(*pose, plan.poses[0]);
        }
    }

    #[test]
    fn schedules() {
        let lin = LaSchedule::linear(0.9, 0.65, FRAC_PI_2);
        lin.validate().unwrap();
        assert_eq!(lin.eval(0.0), 0.9);
        assert!((lin.eval(FRAC_PI_2) - 0.65).abs() < 1e-15);
        assert!((lin.eval(FRAC_PI_2 / 2.0) - 0.775).abs() < 1e-12);
        assert!(LaSchedule::linear(0.5, 0.6, 1.0).validate().is_err());
        assert!(LaSchedule::Constant { l_a: 1.2 }.validate().is_err());

        let pw = LaSchedule::Piecewise { knots: vec![(0.0, 0.9), (0.5, 0.9), (1.0, 0.6)] };
        pw.validate().unwrap();
        assert_eq!(pw.eval(0.25), 0.9);
        assert!((pw.eval(0.75) - 0.75).abs() < 1e-12);
        let bad = LaSchedule::Piecewise { knots: vec![(0.0, 0.5), (1.0, 0.6)] };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn empty_grid_gives_empty_trajectory() {
        let (obj, geom) = bushing();
        let fr = FrictionSet::new(0.2, 0.4, 0.4).unwrap();
        let traj = simulate_grasp_trajectory(&obj, geom, &fr, 0.3, &LaSchedule::Constant { l_a: 0.5 }, &[]).unwrap();
        assert!(traj.samples.is_empty());
        assert_eq!(traj.initial_mark, None);
    }

    #[test]
    fn constant_schedule_matches_region_row() {
        let (obj, geom) = bushing();
        let fr = FrictionSet::new(0.2, 0.4, 0.4).unwrap();
        let betas = default_beta_axis(2.0);
        let alphas = [PI / 10.0, 0.6, 1.2];
        let map = region_sweep(&obj, geom, &fr, 0.7, &alphas, &betas, StabilityMode::ForceBalance).unwrap();
        for (i, &alpha) in alphas.iter().enumerate() {
            let traj = simulate_grasp_trajectory(&obj, geom, &fr, alpha, &LaSchedule::Constant { l_a: 0.7 }, &betas).unwrap();
            let flags: Vec<bool> = traj.samples.iter().map(|s| s.stable).collect();
            assert_eq!(flags, map.alpha_row(i));
        }
    }

    #[test]
    fn trajectory_rejections() {
        let (obj, geom) = bushing();
        let fr = FrictionSet::new(0.2, 0.4, 0.4).unwrap();
        let lin = LaSchedule::linear(0.9, 0.65, 1.0);
        assert!(simulate_grasp_trajectory(&obj, geom, &fr, 0.3, &lin, &[0.5, 0.2]).is_err());
        assert!(simulate_grasp_trajectory(&obj, geom, &fr, 0.3, &lin, &[0.0, 1.2]).is_err());
        let rising = LaSchedule::linear(0.5, 0.9, 1.0);
        assert!(simulate_grasp_trajectory(&obj, geom, &fr, 0.3, &rising, &[0.0]).is_err());
    }
}
