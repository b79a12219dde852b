use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{DoseId, Instant, MedicationId, ReminderPrefs};

/// Lifecycle of one scheduled dose. `Taken`, `Skipped` and `Missed` are
/// terminal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum DoseState {
    Pending,
    Reminded {
        count: u32,
        last_reminded_at: Instant,
        /// Set by a snooze; overrides `last_reminded_at + snooze` as the
        /// earliest time of the next repeat reminder.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        snoozed_until: Option<Instant>,
    },
    Taken {
        at: Instant,
    },
    Skipped {
        at: Instant,
        #[serde(default)]
        reason: Option<String>,
    },
    Missed {
        at: Instant,
    },
}

impl DoseState {
    pub fn is_terminal(&self) -> bool {
        matches!(self, Self::Taken { .. } | Self::Skipped { .. } | Self::Missed { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Pending => "pending",
            Self::Reminded { .. } => "reminded",
            Self::Taken { .. } => "taken",
            Self::Skipped { .. } => "skipped",
            Self::Missed { .. } => "missed",
        }
    }

    pub fn reminder_count(&self) -> u32 {
        match self {
            Self::Reminded { count, .. } => *count,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum DoseEvent {
    Remind,
    ReportTaken,
    ReportSkipped {
        #[serde(default)]
        reason: Option<String>,
    },
    Expire,
}

impl DoseEvent {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Remind => "remind",
            Self::ReportTaken => "report_taken",
            Self::ReportSkipped { .. } => "report_skipped",
            Self::Expire => "expire",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledDose {
    pub dose_id: DoseId,
    pub medication_id: MedicationId,
    pub due_at: Instant,
    pub state: DoseState,
}

impl ScheduledDose {
    pub fn pending(medication_id: MedicationId, due_at: Instant) -> Self {
        Self {
            dose_id: DoseId::for_due(&medication_id, &due_at),
            medication_id,
            due_at,
            state: DoseState::Pending,
        }
    }

    pub fn expires_at(&self, prefs: &ReminderPrefs) -> Instant {
        self.due_at + prefs.response_window()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DoseError {
    #[error("dose {dose_id}: `{event}` is not allowed in state `{state}`")]
    IllegalTransition {
        dose_id: DoseId,
        state: &'static str,
        event: &'static str,
    },
    #[error("dose {dose_id}: reminder cap of {cap} already reached")]
    ReminderCapExceeded { dose_id: DoseId, cap: u32 },
}

/// Applies one lifecycle event. Pure: the result depends only on the
/// arguments.
pub fn transition_dose(
    dose: &ScheduledDose,
    event: DoseEvent,
    now: Instant,
    prefs: &ReminderPrefs,
) -> Result<ScheduledDose, DoseError> {
    let illegal = || DoseError::IllegalTransition {
        dose_id: dose.dose_id.clone(),
        state: dose.state.name(),
        event: event.name(),
    };
    if dose.state.is_terminal() {
        return Err(illegal());
    }
    let state = match &event {
        DoseEvent::Remind => {
            let count = dose.state.reminder_count();
            if count >= prefs.max_reminders_per_dose {
                return Err(DoseError::ReminderCapExceeded {
                    dose_id: dose.dose_id.clone(),
                    cap: prefs.max_reminders_per_dose,
                });
            }
            DoseState::Reminded {
                count: count + 1,
                last_reminded_at: now,
                snoozed_until: None,
            }
        }
        DoseEvent::ReportTaken => DoseState::Taken { at: now },
        DoseEvent::ReportSkipped { reason } => DoseState::Skipped {
            at: now,
            reason: reason.clone(),
        },
        DoseEvent::Expire => {
            if now < dose.expires_at(prefs) {
                return Err(illegal());
            }
            DoseState::Missed { at: now }
        }
    };
    Ok(ScheduledDose {
        state,
        ..dose.clone()
    })
}

#[cfg(test)]
mod tests {
    use chrono::{Duration, TimeZone, Utc};

    use super::*;

    fn due() -> Instant {
        Utc.with_ymd_and_hms(2026, 10, 16, 8, 0, 0).unwrap()
    }

    fn dose(state: DoseState) -> ScheduledDose {
        ScheduledDose {
            state,
            ..ScheduledDose::pending(MedicationId::new("m1"), due())
        }
    }

    #[test]
    fn pending_taken_at_due_time() {
        let prefs = ReminderPrefs::default();
        let out = transition_dose(&dose(DoseState::Pending), DoseEvent::ReportTaken, due(), &prefs)
            .unwrap();
        assert_eq!(out.state, DoseState::Taken { at: due() });
    }

    #[test]
    fn taken_rejects_remind() {
        let prefs = ReminderPrefs::default();
        let err = transition_dose(
            &dose(DoseState::Taken { at: due() }),
            DoseEvent::Remind,
            due(),
            &prefs,
        )
        .unwrap_err();
        assert!(matches!(err, DoseError::IllegalTransition { state: "taken", event: "remind", .. }));
    }

    #[test]
    fn expire_waits_for_the_response_window() {
        let prefs = ReminderPrefs::default();
        let window_end = due() + Duration::minutes(60);
        let early = transition_dose(
            &dose(DoseState::Pending),
            DoseEvent::Expire,
            window_end - Duration::minutes(1),
            &prefs,
        );
        assert!(matches!(early, Err(DoseError::IllegalTransition { .. })));
        let missed =
            transition_dose(&dose(DoseState::Pending), DoseEvent::Expire, window_end, &prefs).unwrap();
        assert_eq!(missed.state, DoseState::Missed { at: window_end });
    }

    #[test]
    fn remind_clears_snooze_and_counts_up_to_the_cap() {
        let prefs = ReminderPrefs::default();
        let mut d = dose(DoseState::Reminded {
            count: 1,
            last_reminded_at: due(),
            snoozed_until: Some(due() + Duration::minutes(30)),
        });
        d = transition_dose(&d, DoseEvent::Remind, due() + Duration::minutes(30), &prefs).unwrap();
        assert_eq!(
            d.state,
            DoseState::Reminded {
                count: 2,
                last_reminded_at: due() + Duration::minutes(30),
                snoozed_until: None
            }
        );
        d = transition_dose(&d, DoseEvent::Remind, due(), &prefs).unwrap();
        assert_eq!(d.state.reminder_count(), 3);
        assert_eq!(
            transition_dose(&d, DoseEvent::Remind, due(), &prefs),
            Err(DoseError::ReminderCapExceeded {
                dose_id: d.dose_id.clone(),
                cap: 3
            })
        );
    }

    #[test]
    fn state_serializes_with_a_tag() {
        let json = serde_json::to_string(&DoseState::Taken { at: due() }).unwrap();
        assert_eq!(json, r#"{"state":"taken","at":"2026-10-16T08:00:00Z"}"#);
    }
}
