use chrono::NaiveTime;
use chrono_tz::Tz;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{PatientId, ProviderId};

pub const MAX_REMINDERS_CAP: u32 = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientProfile {
    pub patient_id: PatientId,
    pub display_name: String,
    /// Typed as a resolved IANA zone, so an unresolvable name cannot be stored.
    pub timezone: Tz,
    pub provider_id: ProviderId,
    #[serde(default)]
    pub condition_tags: Vec<String>,
    pub reminder_prefs: ReminderPrefs,
}

/// A local wall-clock interval `[start, end)` during which reminders are held
/// back. Wraps midnight when `end <= start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuietHours {
    pub start: NaiveTime,
    pub end: NaiveTime,
}

impl QuietHours {
    pub fn contains(&self, t: NaiveTime) -> bool {
        if self.start < self.end {
            t >= self.start && t < self.end
        } else if self.start > self.end {
            t >= self.start || t < self.end
        } else {
            // start == end: empty interval
            false
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReminderPrefs {
    pub snooze_minutes: u32,
    pub max_reminders_per_dose: u32,
    /// Minutes after the due time before an unanswered dose becomes Missed.
    pub response_window_minutes: u32,
    #[serde(default)]
    pub quiet_hours: Option<QuietHours>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrefsError {
    #[error("{field} must be at least 1")]
    NotPositive { field: &'static str },
    #[error("snooze ({snooze} min) must be shorter than the response window ({window} min)")]
    SnoozeNotShorterThanWindow { snooze: u32, window: u32 },
    #[error("at most {MAX_REMINDERS_CAP} reminders per dose are allowed, got {0}")]
    TooManyReminders(u32),
}

impl ReminderPrefs {
    pub fn validate(&self) -> Result<(), PrefsError> {
        for (field, v) in [
            ("snooze_minutes", self.snooze_minutes),
            ("max_reminders_per_dose", self.max_reminders_per_dose),
            ("response_window_minutes", self.response_window_minutes),
        ] {
            if v < 1 {
                return Err(PrefsError::NotPositive { field });
            }
        }
        if self.snooze_minutes >= self.response_window_minutes {
            return Err(PrefsError::SnoozeNotShorterThanWindow {
                snooze: self.snooze_minutes,
                window: self.response_window_minutes,
            });
        }
        if self.max_reminders_per_dose > MAX_REMINDERS_CAP {
            return Err(PrefsError::TooManyReminders(self.max_reminders_per_dose));
        }
        Ok(())
    }

    pub fn response_window(&self) -> chrono::Duration {
        chrono::Duration::minutes(i64::from(self.response_window_minutes))
    }

    pub fn snooze(&self) -> chrono::Duration {
        chrono::Duration::minutes(i64::from(self.snooze_minutes))
    }
}

impl Default for ReminderPrefs {
    fn default() -> Self {
        Self {
            snooze_minutes: 10,
            max_reminders_per_dose: 3,
            response_window_minutes: 60,
            quiet_hours: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(h: u32, m: u32) -> NaiveTime {
        NaiveTime::from_hms_opt(h, m, 0).unwrap()
    }

    #[test]
    fn default_prefs_are_valid() {
        ReminderPrefs::default().validate().unwrap();
    }

    #[test]
    fn snooze_must_be_shorter_than_window() {
        let prefs = ReminderPrefs {
            snooze_minutes: 60,
            ..ReminderPrefs::default()
        };
        assert!(matches!(
            prefs.validate(),
            Err(PrefsError::SnoozeNotShorterThanWindow { .. })
        ));
    }

    #[test]
    fn reminder_cap_is_bounded() {
        let prefs = ReminderPrefs {
            max_reminders_per_dose: 6,
            ..ReminderPrefs::default()
        };
        assert_eq!(prefs.validate(), Err(PrefsError::TooManyReminders(6)));
        let prefs = ReminderPrefs {
            max_reminders_per_dose: 0,
            ..ReminderPrefs::default()
        };
        assert!(matches!(prefs.validate(), Err(PrefsError::NotPositive { .. })));
    }

    #[test]
    fn quiet_hours_wrap_midnight() {
        let q = QuietHours { start: t(22, 0), end: t(7, 0) };
        assert!(q.contains(t(23, 30)));
        assert!(q.contains(t(0, 0)));
        assert!(q.contains(t(6, 59)));
        assert!(!q.contains(t(7, 0)));
        assert!(!q.contains(t(12, 0)));
        let day = QuietHours { start: t(13, 0), end: t(14, 0) };
        assert!(day.contains(t(13, 0)));
        assert!(!day.contains(t(14, 0)));
    }
}
