//! Adherence metrics, deterioration alerts, behaviour stages and reports.

mod metrics;
mod report;
mod stage;

use chrono::Duration;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Instant, PatientId};

pub use metrics::{
    adherence_rate, count_doses, day_buckets, detect_adherence_drop, taken_streak, DayBucket,
    DoseCounts, WeeklyRates,
};
pub use report::{build_report, AdherenceReport, CheckInSummary, PatientRecords, RecordsSource};
pub use stage::{classify_stage, BehaviourStage};

/// Half-open interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: Instant,
    pub end: Instant,
}

impl Window {
    pub fn new(start: Instant, end: Instant) -> Result<Self, AnalyticsError> {
        if start < end {
            Ok(Self { start, end })
        } else {
            Err(AnalyticsError::MalformedWindow { start, end })
        }
    }

    /// The `days` days ending at `end`.
    pub fn trailing_days(end: Instant, days: u32) -> Result<Self, AnalyticsError> {
        Self::new(end - Duration::days(days.into()), end)
    }

    pub fn contains(&self, at: Instant) -> bool {
        self.start <= at && at < self.end
    }

    pub fn length(&self) -> Duration {
        self.end - self.start
    }

    /// The window of equal length that ends where this one starts.
    pub fn previous(&self) -> Self {
        Self {
            start: self.start - self.length(),
            end: self.start,
        }
    }
}

/// Rule parameters. The defaults are placeholders, not clinical guidance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// 7-day rate at or above which a patient is sustaining the behaviour.
    pub sustain_rate: f64,
    /// Weekly rate below which adherence counts as dropped.
    pub floor_rate: f64,
    /// Week-over-week fall that counts as a drop.
    pub drop_delta: f64,
    /// Days of tenure before a patient can leave the early stage.
    pub min_tenure_days: u32,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            sustain_rate: 0.8,
            floor_rate: 0.5,
            drop_delta: 0.2,
            min_tenure_days: 7,
        }
    }
}

/// Length of the stage and comparison windows.
pub const WEEK_DAYS: u32 = 7;
/// Days of history the drop rule looks at.
pub const DROP_HISTORY_DAYS: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyticsError {
    #[error("window start {start} is not before its end {end}")]
    MalformedWindow { start: Instant, end: Instant },
    #[error("need {needed} days of history with doses in both weeks, got {got}")]
    InsufficientHistory { needed: usize, got: usize },
    #[error("unknown patient {0}")]
    UnknownPatient(PatientId),
}
