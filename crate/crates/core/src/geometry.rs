//! Object, gripper and grasp-configuration parameters.
//!
//! Lengths are millimetres and angles are radians throughout. The object is
//! modelled in its own body frame as a `2a x 2b` rectangle centred on the
//! centre of mass, long axis along +x.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Rigid hollow object: a tube (or prism) with a through hole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub name: String,
    /// Half length.
    pub a: f64,
    /// Half height. Equal to `outer_diameter / 2` for cylinders.
    pub b: f64,
    pub outer_diameter: f64,
    pub inner_diameter: f64,
    /// Weight in solver units (m·g). Force-balance feasibility does not
    /// depend on it, so 1.0 is the usual choice.
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GripperSpec {
    /// Finger width.
    pub w: f64,
    /// Maximum jaw opening.
    pub stroke: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("{field} must be a positive finite number, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("inner diameter {inner} must be smaller than outer diameter {outer}")]
    HoleTooLarge { inner: f64, outer: f64 },
    #[error("finger width {w} does not fit the hole diameter {d} (need 0 < w/d < 1)")]
    FingerDoesNotFit { w: f64, d: f64 },
    #[error("offset x = {x} must satisfy 0 < x < d/2 = {half}")]
    OffsetOutOfRange { x: f64, half: f64 },
}

fn positive(field: &'static str, value: f64) -> Result<f64, GeometryError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(GeometryError::NonPositive { field, value })
    }
}

impl ObjectSpec {
    /// Cylindrical object: `b` is fixed to half the outer diameter.
    pub fn cylinder(
        name: impl Into<String>,
        a: f64,
        outer_diameter: f64,
        inner_diameter: f64,
    ) -> Result<Self, GeometryError> {
        Self::prism(name, a, outer_diameter / 2.0, outer_diameter, inner_diameter)
    }

    /// Object with an independently specified half height.
    pub fn prism(
        name: impl Into<String>,
        a: f64,
        b: f64,
        outer_diameter: f64,
        inner_diameter: f64,
    ) -> Result<Self, GeometryError> {
        let spec = ObjectSpec {
            name: name.into(),
            a,
            b,
            outer_diameter,
            inner_diameter,
            mass: 1.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_mass(mut self, mass: f64) -> Result<Self, GeometryError> {
        self.mass = positive("mass", mass)?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        positive("a", self.a)?;
        positive("b", self.b)?;
        positive("outer_diameter", self.outer_diameter)?;
        positive("inner_diameter", self.inner_diameter)?;
        positive("mass", self.mass)?;
        if self.inner_diameter >= self.outer_diameter {
            return Err(GeometryError::HoleTooLarge {
                inner: self.inner_diameter,
                outer: self.outer_diameter,
            });
        }
        Ok(())
    }
}

impl GripperSpec {
    pub fn new(w: f64, stroke: f64) -> Result<Self, GeometryError> {
        Ok(GripperSpec {
            w: positive("w", w)?,
            stroke: positive("stroke", stroke)?,
        })
    }
}

/// Distance between the in-hole finger and the hole centre line,
/// `x = (d/2)·sqrt(1 - (w/d)^2)`.
pub fn compute_x(gripper: &GripperSpec, object: &ObjectSpec) -> Result<f64, GeometryError> {
    let (w, d) = (gripper.w, object.inner_diameter);
    let ratio = w / d;
    if !(w > 0.0 && ratio < 1.0 && ratio.is_finite()) {
        return Err(GeometryError::FingerDoesNotFit { w, d });
    }
    Ok(0.5 * d * ((1.0 - ratio) * (1.0 + ratio)).sqrt())
}

/// Distance from the in-hole contact H to the object's outer corner.
pub fn compute_delta(object: &ObjectSpec, x: f64) -> Result<f64, GeometryError> {
    let half = object.inner_diameter / 2.0;
    if !(x > 0.0 && x < half) {
        return Err(GeometryError::OffsetOutOfRange { x, half });
    }
    Ok(object.outer_diameter / 2.0 - x)
}

/// Contact geometry that is fixed once the object and gripper are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactGeometry {
    pub x: f64,
    pub delta: f64,
}

impl ContactGeometry {
    pub fn new(gripper: &GripperSpec, object: &ObjectSpec) -> Result<Self, GeometryError> {
        let x = compute_x(gripper, object)?;
        let delta = compute_delta(object, x)?;
        Ok(ContactGeometry { x, delta })
    }
}

/// Grasp configuration: the three variable parameters plus the derived
/// contact geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraspConfig {
    /// Contact distance `l / 2a`.
    pub l_a: f64,
    /// Gripper-object angle.
    pub alpha: f64,
    /// Object-ground angle.
    pub beta: f64,
    pub delta: f64,
    pub x: f64,
}

impl GraspConfig {
    /// Builds and validates a configuration.
    pub fn new(
        l_a: f64,
        alpha: f64,
        beta: f64,
        geometry: ContactGeometry,
        object: &ObjectSpec,
    ) -> Result<Self, ConfigErrors> {
        validate_config(&Self::unchecked(l_a, alpha, beta, geometry), object)
    }

    /// Builds a configuration without range checks. Sweeps use this after
    /// validating their grids once.
    pub fn unchecked(l_a: f64, alpha: f64, beta: f64, geometry: ContactGeometry) -> Self {
        GraspConfig {
            l_a,
            alpha,
            beta,
            delta: geometry.delta,
            x: geometry.x,
        }
    }

    pub fn geometry(&self) -> ContactGeometry {
        ContactGeometry {
            x: self.x,
            delta: self.delta,
        }
    }

    /// Contact distance `l` in millimetres.
    pub fn contact_distance(&self, object: &ObjectSpec) -> f64 {
        2.0 * object.a * self.l_a
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }
}

/// One violated range constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConfigViolation {
    LaOutOfRange,
    /// `alpha = 0`: the finger cannot catch the hole, the grasp degenerates
    /// into a pinch grasp.
    AlphaDegeneratePinch,
    /// `alpha = pi/2`: the hole is grasped directly, which is the motion the
    /// pivot maneuver exists to avoid.
    AlphaDirectHoleGrasp,
    AlphaOutOfRange,
    BetaOutOfRange,
    DeltaOutOfRange,
    DeltaMismatch,
}

impl ConfigViolation {
    pub fn code(self) -> &'static str {
        match self {
            ConfigViolation::LaOutOfRange => "l_a_out_of_range",
            ConfigViolation::AlphaDegeneratePinch => "alpha_degenerate_pinch",
            ConfigViolation::AlphaDirectHoleGrasp => "alpha_direct_hole_grasp",
            ConfigViolation::AlphaOutOfRange => "alpha_out_of_range",
            ConfigViolation::BetaOutOfRange => "beta_out_of_range",
            ConfigViolation::DeltaOutOfRange => "delta_out_of_range",
            ConfigViolation::DeltaMismatch => "delta_mismatch",
        }
    }

    pub fn message(self) -> &'static str {
        match self {
            ConfigViolation::LaOutOfRange => "l_a must satisfy 0 < l_a <= 1",
            ConfigViolation::AlphaDegeneratePinch => {
                "alpha = 0 turns the hole grasp into a pinch grasp"
            }
            ConfigViolation::AlphaDirectHoleGrasp => {
                "alpha = pi/2 is a direct hole grasp, not an asymmetric pivot"
            }
            ConfigViolation::AlphaOutOfRange => "alpha must satisfy 0 < alpha < pi/2",
            ConfigViolation::BetaOutOfRange => "beta must satisfy 0 <= beta <= pi/2",
            ConfigViolation::DeltaOutOfRange => "delta must satisfy 0 < delta < D/2",
            ConfigViolation::DeltaMismatch => "delta must equal D/2 - x",
        }
    }
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code(), self.message())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid grasp configuration: {}", list(.0))]
pub struct ConfigErrors(pub Vec<ConfigViolation>);

fn list(violations: &[ConfigViolation]) -> String {
    violations
        .iter()
        .map(|v| v.code())
        .collect::<Vec<_>>()
        .join(", ")
}

impl ConfigErrors {
    pub fn contains(&self, violation: ConfigViolation) -> bool {
        self.0.contains(&violation)
    }
}

/// Checks every range constraint and reports all violations at once.
pub fn validate_config(cfg: &GraspConfig, object: &ObjectSpec) -> Result<GraspConfig, ConfigErrors> {
    let mut violations = Vec::new();

    if !(cfg.l_a > 0.0 && cfg.l_a <= 1.0) {
        violations.push(ConfigViolation::LaOutOfRange);
    }

    if cfg.alpha == 0.0 {
        violations.push(ConfigViolation::AlphaDegeneratePinch);
    } else if cfg.alpha == FRAC_PI_2 {
        violations.push(ConfigViolation::AlphaDirectHoleGrasp);
    } else if !(cfg.alpha > 0.0 && cfg.alpha < FRAC_PI_2) {
        violations.push(ConfigViolation::AlphaOutOfRange);
    }

    if !(cfg.beta >= 0.0 && cfg.beta <= FRAC_PI_2) {
        violations.push(ConfigViolation::BetaOutOfRange);
    }

    let half_outer = object.outer_diameter / 2.0;
    if !(cfg.delta > 0.0 && cfg.delta < half_outer) {
        violations.push(ConfigViolation::DeltaOutOfRange);
    } else if (cfg.delta - (half_outer - cfg.x)).abs() > 1e-12 * half_outer {
        violations.push(ConfigViolation::DeltaMismatch);
    }

    if violations.is_empty() {
        Ok(*cfg)
    } else {
        Err(ConfigErrors(violations))
    }
}
