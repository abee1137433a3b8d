//! Quasi-static analysis of asymmetric pivot manipulation for hole grasps.
//!
//! A hollow object lies on the ground. A parallel-jaw gripper closes with
//! one finger caught in the object's hole (contact H) and the other on the
//! outer surface (contact S), then pivots the object about its ground
//! corner (contact G) until it stands upright. This crate answers:
//!
//! * which `(l_a, alpha, beta)` configurations are stable, by linear
//!   programming over the friction-cone edge wrenches ([`lp`], [`stability`]);
//! * how far the object can be tilted before gravity can no longer be
//!   balanced ([`stability::beta_upper_bound`]);
//! * the gripper waypoints of the pivot and align motions ([`maneuver`]);
//! * Wilson score intervals for trial outcomes ([`stats`]).

pub mod catalog;
pub mod geometry;
pub mod lp;
pub mod maneuver;
pub mod stability;
pub mod stats;
pub mod wrench;

pub use catalog::{Catalog, CatalogEntry, CatalogError};
pub use geometry::{
    compute_delta, compute_x, validate_config, ConfigErrors, ConfigViolation, ContactGeometry,
    GeometryError, GraspConfig, GripperSpec, ObjectSpec,
};
pub use lp::{
    oracle_force_balance, solve_force_balance, solve_form_closure, LpError, LpOutcome, LpProblem,
    Tolerances,
};
pub use maneuver::{
    align_phase, plan_pivot, simulate_grasp_trajectory, AlignPlan, GraspTrajectory, GripperPose,
    LaSchedule, ManeuverError, ObjectPose, PivotPlan,
};
pub use stability::{
    beta_upper_bound, is_stable, min_alpha, region_sweep, BetaBound, RegionMap, StabilityError,
    StabilityMode,
};
pub use stats::{batch_ci, wilson_ci, ConfidenceInterval, StatsError, TrialRecord};
pub use wrench::{basis_wrenches, gravity_wrench, BasisLabel, FrictionSet, Wrench, WrenchBasis};
