use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Instant, SymptomId};

/// A patient-reported lifestyle bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckIn {
    pub at: Instant,
    /// 1 (low) to 5 (high).
    pub mood: u8,
    /// 1 (calm) to 5 (very stressed).
    pub stress: u8,
    pub sleep_hours: f64,
    #[serde(default)]
    pub symptoms: Vec<SymptomId>,
    #[serde(default)]
    pub diet_note: Option<String>,
    #[serde(default)]
    pub exercise_note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckInError {
    #[error("{field} must be between 1 and 5, got {value}")]
    ScaleOutOfRange { field: &'static str, value: u8 },
    #[error("sleep hours must be between 0 and 24, got {0}")]
    SleepOutOfRange(f64),
}

impl CheckIn {
    pub fn validate(&self) -> Result<(), CheckInError> {
        for (field, value) in [("mood", self.mood), ("stress", self.stress)] {
            if !(1..=5).contains(&value) {
                return Err(CheckInError::ScaleOutOfRange { field, value });
            }
        }
        if !(0.0..=24.0).contains(&self.sleep_hours) {
            return Err(CheckInError::SleepOutOfRange(self.sleep_hours));
        }
        Ok(())
    }
}
