//! Planar contact wrenches for the S, H and G contacts.
//!
//! A wrench is `(m, fx, fy)`: moment about the object's centre of mass
//! followed by the force components in the world frame. Each contact
//! contributes the two edges of its friction cone.

use std::fmt;
use std::ops::{Add, Mul, Neg};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GraspConfig, ObjectSpec};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Wrench {
    pub m: f64,
    pub fx: f64,
    pub fy: f64,
}

impl Wrench {
    pub const ZERO: Wrench = Wrench {
        m: 0.0,
        fx: 0.0,
        fy: 0.0,
    };

    pub const fn new(m: f64, fx: f64, fy: f64) -> Self {
        Wrench { m, fx, fy }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.m, self.fx, self.fy]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Wrench::new(v[0], v[1], v[2])
    }

    pub fn norm_inf(self) -> f64 {
        self.m.abs().max(self.fx.abs()).max(self.fy.abs())
    }

    pub fn force_norm(self) -> f64 {
        self.fx.hypot(self.fy)
    }
}

impl Add for Wrench {
    type Output = Wrench;
    fn add(self, rhs: Wrench) -> Wrench {
        Wrench::new(self.m + rhs.m, self.fx + rhs.fx, self.fy + rhs.fy)
    }
}

impl Neg for Wrench {
    type Output = Wrench;
    fn neg(self) -> Wrench {
        Wrench::new(-self.m, -self.fx, -self.fy)
    }
}

impl Mul<Wrench> for f64 {
    type Output = Wrench;
    fn mul(self, w: Wrench) -> Wrench {
        Wrench::new(self * w.m, self * w.fx, self * w.fy)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("friction coefficient {field} must be finite and non-negative, got {value}")]
pub struct FrictionError {
    pub field: &'static str,
    pub value: f64,
}

/// Coulomb friction at the three contacts and the matching cone half-angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrictionSet {
    pub mu_s: f64,
    pub mu_h: f64,
    pub mu_g: f64,
    pub gamma_s: f64,
    pub gamma_h: f64,
    pub gamma_g: f64,
}

impl FrictionSet {
    pub fn new(mu_s: f64, mu_h: f64, mu_g: f64) -> Result<Self, FrictionError> {
        for (field, value) in [("mu_S", mu_s), ("mu_H", mu_h), ("mu_G", mu_g)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(FrictionError { field, value });
            }
        }
        Ok(FrictionSet {
            mu_s,
            mu_h,
            mu_g,
            gamma_s: mu_s.atan(),
            gamma_h: mu_h.atan(),
            gamma_g: mu_g.atan(),
        })
    }

    pub fn frictionless() -> Self {
        FrictionSet::new(0.0, 0.0, 0.0).unwrap()
    }

    pub fn coefficients(&self) -> [f64; 3] {
        [self.mu_s, self.mu_h, self.mu_g]
    }

    /// Componentwise `self <= other`.
    pub fn dominated_by(&self, other: &FrictionSet) -> bool {
        self.mu_s <= other.mu_s && self.mu_h <= other.mu_h && self.mu_g <= other.mu_g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisLabel {
    S1,
    S2,
    H1,
    H2,
    G1,
    G2,
}

impl BasisLabel {
    pub const ALL: [BasisLabel; 6] = [
        BasisLabel::S1,
        BasisLabel::S2,
        BasisLabel::H1,
        BasisLabel::H2,
        BasisLabel::G1,
        BasisLabel::G2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BasisLabel::S1 => "S1",
            BasisLabel::S2 => "S2",
            BasisLabel::H1 => "H1",
            BasisLabel::H2 => "H2",
            BasisLabel::G1 => "G1",
            BasisLabel::G2 => "G2",
        }
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The six basis contact wrenches in the fixed order S1, S2, H1, H2, G1, G2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WrenchBasis {
    pub wrenches: [Wrench; 6],
}

impl WrenchBasis {
    pub fn get(&self, label: BasisLabel) -> Wrench {
        self.wrenches[label as usize]
    }

    pub fn labeled(&self) -> impl Iterator<Item = (BasisLabel, Wrench)> + '_ {
        BasisLabel::ALL.into_iter().zip(self.wrenches)
    }

    pub fn columns(&self) -> &[Wrench] {
        &self.wrenches
    }

    /// `sum k_i F_i`.
    pub fn combine(&self, coefficients: &[f64]) -> Wrench {
        self.wrenches
            .iter()
            .zip(coefficients)
            .fold(Wrench::ZERO, |acc, (w, k)| acc + *k * *w)
    }
}

/// Friction-cone edge wrenches at S, H and G for the given configuration.
pub fn basis_wrenches(object: &ObjectSpec, cfg: &GraspConfig, fr: &FrictionSet) -> WrenchBasis {
    let (a, b) = (object.a, object.b);
    let l = cfg.contact_distance(object);
    let (alpha, beta, delta) = (cfg.alpha, cfg.beta, cfg.delta);
    let (gs, gh, gg) = (fr.gamma_s, fr.gamma_h, fr.gamma_g);

    // Finger on the outer surface.
    let s1 = Wrench::new(
        (l - a) * gs.cos() - b * gs.sin(),
        (beta + gs).sin(),
        -(beta + gs).cos(),
    );
    let s2 = Wrench::new(
        (l - a) * gs.cos() + b * gs.sin(),
        (beta - gs).sin(),
        -(beta - gs).cos(),
    );

    // Finger caught in the hole.
    let h1 = Wrench::new(
        a * (alpha - gh).sin() + (b - delta) * (alpha - gh).cos(),
        -(alpha - beta - gh).cos(),
        (alpha - beta - gh).sin(),
    );
    let h2 = Wrench::new(
        a * (alpha + gh).sin() + (b - delta) * (alpha + gh).cos(),
        -(alpha - beta + gh).cos(),
        (alpha - beta + gh).sin(),
    );

    // Ground corner.
    let g1 = Wrench::new(
        -a * (gg - beta).cos() - b * (gg - beta).sin(),
        -gg.sin(),
        gg.cos(),
    );
    let g2 = Wrench::new(
        -a * (gg + beta).cos() + b * (gg + beta).sin(),
        gg.sin(),
        gg.cos(),
    );

    WrenchBasis {
        wrenches: [s1, s2, h1, h2, g1, g2],
    }
}

/// Gravity acting at the centre of mass: `(0, 0, -m·g)`.
pub fn gravity_wrench(object: &ObjectSpec) -> Wrench {
    Wrench::new(0.0, 0.0, -object.mass)
}
