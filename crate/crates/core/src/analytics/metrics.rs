use chrono::{Days, NaiveDate};
use chrono_tz::Tz;
use serde::{Deserialize, Serialize};

use super::{AnalyticsError, Thresholds, Window, DROP_HISTORY_DAYS};
use crate::domain::{Alert, AlertKind, DoseState, Instant, PatientId, ScheduledDose, Severity};

/// Slack for comparisons of rates built from small integer ratios.
const EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoseCounts {
    pub doses_due: u32,
    pub taken: u32,
    pub skipped: u32,
    pub missed: u32,
}

impl DoseCounts {
    fn add(&mut self, state: &DoseState) {
        match state {
            DoseState::Taken { .. } => self.taken += 1,
            DoseState::Skipped { .. } => self.skipped += 1,
            DoseState::Missed { .. } => self.missed += 1,
            DoseState::Pending | DoseState::Reminded { .. } => return,
        }
        self.doses_due += 1;
    }

    pub fn rate(&self) -> Option<f64> {
        (self.doses_due > 0).then(|| f64::from(self.taken) / f64::from(self.doses_due))
    }
}

/// Terminal doses due inside the window, by outcome.
pub fn count_doses(doses: &[ScheduledDose], window: &Window) -> DoseCounts {
    let mut counts = DoseCounts::default();
    for dose in doses.iter().filter(|d| window.contains(d.due_at)) {
        counts.add(&dose.state);
    }
    counts
}

/// Share of terminal doses in the window that were taken. `None` when no
/// dose in the window has an outcome yet.
pub fn adherence_rate(doses: &[ScheduledDose], window: &Window) -> Result<Option<f64>, AnalyticsError> {
    let window = Window::new(window.start, window.end)?;
    Ok(count_doses(doses, &window).rate())
}

/// Outcomes of the doses due on one patient-local calendar day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayBucket {
    pub date: NaiveDate,
    pub taken: u32,
    /// Doses with an outcome.
    pub countable: u32,
}

/// One bucket per local day for the `days` days ending on `last_day`,
/// oldest first.
pub fn day_buckets(doses: &[ScheduledDose], tz: Tz, last_day: NaiveDate, days: usize) -> Vec<DayBucket> {
    let first = last_day - Days::new(days.saturating_sub(1) as u64);
    let mut buckets: Vec<DayBucket> = (0..days)
        .map(|i| DayBucket {
            date: first + Days::new(i as u64),
            taken: 0,
            countable: 0,
        })
        .collect();
    for dose in doses {
        if !dose.state.is_terminal() {
            continue;
        }
        let date = dose.due_at.with_timezone(&tz).date_naive();
        let Ok(offset) = usize::try_from((date - first).num_days()) else {
            continue;
        };
        if let Some(bucket) = buckets.get_mut(offset) {
            bucket.countable += 1;
            bucket.taken += u32::from(matches!(dose.state, DoseState::Taken { .. }));
        }
    }
    buckets
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeeklyRates {
    pub previous: f64,
    pub current: f64,
}

impl WeeklyRates {
    /// Rates of the two weeks that make up the last 14 buckets.
    pub fn from_buckets(history: &[DayBucket]) -> Result<Self, AnalyticsError> {
        let insufficient = AnalyticsError::InsufficientHistory {
            needed: DROP_HISTORY_DAYS,
            got: history.len(),
        };
        if history.len() < DROP_HISTORY_DAYS {
            return Err(insufficient);
        }
        let recent = &history[history.len() - DROP_HISTORY_DAYS..];
        let (previous, current) = recent.split_at(DROP_HISTORY_DAYS / 2);
        let rate = |week: &[DayBucket]| {
            let countable: u32 = week.iter().map(|b| b.countable).sum();
            let taken: u32 = week.iter().map(|b| b.taken).sum();
            (countable > 0).then(|| f64::from(taken) / f64::from(countable))
        };
        match (rate(previous), rate(current)) {
            (Some(previous), Some(current)) => Ok(Self { previous, current }),
            _ => Err(insufficient),
        }
    }
}

/// Raises an `AdherenceDrop` alert when the latest week fell sharply or
/// sits below the floor. High when both hold.
pub fn detect_adherence_drop(
    patient_id: &PatientId,
    history: &[DayBucket],
    now: Instant,
    thresholds: &Thresholds,
) -> Result<Option<Alert>, AnalyticsError> {
    let rates = WeeklyRates::from_buckets(history)?;
    let dropped = rates.current - rates.previous <= -thresholds.drop_delta + EPSILON;
    let below_floor = rates.current < thresholds.floor_rate - EPSILON;
    let severity = match (dropped, below_floor) {
        (true, true) => Severity::High,
        (true, false) | (false, true) => Severity::Medium,
        (false, false) => return Ok(None),
    };
    let last_day = history[history.len() - 1].date;
    let detail = format!(
        "Weekly adherence went from {:.0}% to {:.0}%",
        rates.previous * 100.0,
        rates.current * 100.0
    );
    Ok(Some(Alert::raise(
        AlertKind::AdherenceDrop,
        severity,
        patient_id.clone(),
        &last_day.to_string(),
        now,
        detail,
    )))
}

/// Consecutive taken doses counting back from the latest terminal dose.
pub fn taken_streak(doses: &[ScheduledDose]) -> u32 {
    let mut terminal: Vec<&ScheduledDose> = doses.iter().filter(|d| d.state.is_terminal()).collect();
    terminal.sort_by(|a, b| b.due_at.cmp(&a.due_at).then_with(|| b.dose_id.cmp(&a.dose_id)));
    terminal
        .iter()
        .take_while(|d| matches!(d.state, DoseState::Taken { .. }))
        .count() as u32
}
