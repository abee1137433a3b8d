//! Object catalog: JSON list of objects, each with the gripper used on it.
//!
//! ```json
//! {"name": "bushing", "a_mm": 34.0, "b_mm": null, "D_mm": 34.0, "d_mm": 28.0,
//!  "cylinder": true, "gripper": {"w_mm": 19.996, "stroke_mm": 82.0}}
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ContactGeometry, GeometryError, GripperSpec, ObjectSpec};

const BUNDLED: &str = include_str!("../data/objects.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GripperRecord {
    pub w_mm: f64,
    pub stroke_mm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectRecord {
    pub name: String,
    pub a_mm: f64,
    #[serde(default)]
    pub b_mm: Option<f64>,
    #[serde(rename = "D_mm")]
    pub outer_mm: f64,
    #[serde(rename = "d_mm")]
    pub inner_mm: f64,
    pub cylinder: bool,
    pub gripper: GripperRecord,
    /// Weight in solver units; defaults to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("malformed catalog: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("object `{name}`: {source}")]
    Geometry {
        name: String,
        #[source]
        source: GeometryError,
    },
    #[error("object `{0}`: b_mm is required for non-cylindrical objects")]
    MissingHeight(String),
    #[error("object `{0}` not found in catalog")]
    UnknownObject(String),
    #[error("object `{0}` appears more than once")]
    Duplicate(String),
}

/// Validated object, gripper and the contact geometry they imply.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub object: ObjectSpec,
    pub gripper: GripperSpec,
    pub geometry: ContactGeometry,
}

impl ObjectRecord {
    pub fn resolve(&self) -> Result<CatalogEntry, CatalogError> {
        let wrap = |source| CatalogError::Geometry {
            name: self.name.clone(),
            source,
        };
        let object = if self.cylinder {
            ObjectSpec::cylinder(&self.name, self.a_mm, self.outer_mm, self.inner_mm)
        } else {
            let b = self
                .b_mm
                .ok_or_else(|| CatalogError::MissingHeight(self.name.clone()))?;
            ObjectSpec::prism(&self.name, self.a_mm, b, self.outer_mm, self.inner_mm)
        }
        .map_err(wrap)?;
        let object = match self.mass {
            Some(m) => object.with_mass(m).map_err(wrap)?,
            None => object,
        };
        let gripper = GripperSpec::new(self.gripper.w_mm, self.gripper.stroke_mm).map_err(wrap)?;
        let geometry = ContactGeometry::new(&gripper, &object).map_err(wrap)?;
        Ok(CatalogEntry {
            object,
            gripper,
            geometry,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    records: Vec<ObjectRecord>,
}

impl Catalog {
    /// Parses and validates every record.
    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        let records: Vec<ObjectRecord> = serde_json::from_str(text)?;
        for (i, r) in records.iter().enumerate() {
            if records[..i].iter().any(|o| o.name == r.name) {
                return Err(CatalogError::Duplicate(r.name.clone()));
            }
            r.resolve()?;
        }
        Ok(Catalog { records })
    }

    /// The seven objects of the experimental campaign.
    pub fn bundled() -> Self {
        Catalog::from_json(BUNDLED).expect("bundled catalog is valid")
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.name.as_str())
    }

    pub fn record(&self, name: &str) -> Option<&ObjectRecord> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn get(&self, name: &str) -> Result<CatalogEntry, CatalogError> {
        self.record(name)
            .ok_or_else(|| CatalogError::UnknownObject(name.to_string()))?
            .resolve()
    }
}
