//! Wilson score confidence intervals for success/trial counts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Critical value for a two-sided 95% interval.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub successes: u64,
    pub trials: u64,
    pub z: f64,
}

impl TrialRecord {
    pub fn new(successes: u64, trials: u64) -> Self {
        TrialRecord {
            successes,
            trials,
            z: Z_95,
        }
    }

    pub fn with_z(mut self, z: f64) -> Self {
        self.z = z;
        self
    }

    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("no trials")]
    NoTrials,
    #[error("{successes} successes exceed {trials} trials")]
    TooManySuccesses { successes: u64, trials: u64 },
    #[error("critical value must be positive and finite")]
    BadZ,
}

/// Wilson score interval, clamped to `[0, 1]`.
pub fn wilson_ci(rec: &TrialRecord) -> Result<ConfidenceInterval, StatsError> {
    if rec.trials == 0 {
        return Err(StatsError::NoTrials);
    }
    if rec.successes > rec.trials {
        return Err(StatsError::TooManySuccesses {
            successes: rec.successes,
            trials: rec.trials,
        });
    }
    if !(rec.z.is_finite() && rec.z > 0.0) {
        return Err(StatsError::BadZ);
    }

    let n = rec.trials as f64;
    let p = rec.rate();
    let z2 = rec.z * rec.z;
    let centre = p + z2 / (2.0 * n);
    let spread = rec.z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let denom = 1.0 + z2 / n;

    // At p = 0 (p = 1) the lower (upper) bound is 0 (1) exactly; the
    // floating-point difference would leave a residue of order 1e-17.
    let lower = if rec.successes == 0 {
        0.0
    } else {
        ((centre - spread) / denom).clamp(0.0, 1.0)
    };
    let upper = if rec.successes == rec.trials {
        1.0
    } else {
        ((centre + spread) / denom).clamp(0.0, 1.0)
    };
    Ok(ConfidenceInterval { lower, upper })
}

/// Intervals for named records, in input order.
pub fn batch_ci(
    records: &[(String, TrialRecord)],
) -> Vec<(String, Result<ConfidenceInterval, StatsError>)> {
    records
        .iter()
        .map(|(name, rec)| (name.clone(), wilson_ci(rec)))
        .collect()
}
