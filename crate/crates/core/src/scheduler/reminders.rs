use chrono_tz::Tz;
use serde::{Deserialize, Serialize};

use crate::domain::{
    transition_dose, DoseError, DoseEvent, DoseId, DoseState, Instant, PatientId, ReminderPrefs,
    ScheduledDose,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "n", rename_all = "snake_case")]
pub enum ReminderKind {
    InitialReminder,
    /// The n-th reminder for the dose, n >= 2.
    RepeatReminder(u32),
    EscalationAlert,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReminderEvent {
    pub patient_id: PatientId,
    pub dose_id: DoseId,
    pub kind: ReminderKind,
    pub fire_at: Instant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoseTransition {
    pub patient_id: PatientId,
    pub dose_id: DoseId,
    pub event: DoseEvent,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TickOutput {
    pub reminders: Vec<ReminderEvent>,
    /// One `Remind` per reminder plus one `Expire` per overdue dose.
    pub transitions: Vec<DoseTransition>,
}

impl TickOutput {
    pub fn is_empty(&self) -> bool {
        self.reminders.is_empty() && self.transitions.is_empty()
    }
}

/// A dose together with what the scheduler needs to reason about it.
#[derive(Debug, Clone, PartialEq)]
pub struct BookEntry {
    pub patient_id: PatientId,
    pub timezone: Tz,
    pub prefs: ReminderPrefs,
    pub dose: ScheduledDose,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScheduleBook {
    pub entries: Vec<BookEntry>,
}

impl ScheduleBook {
    pub fn find(&self, dose_id: &DoseId) -> Option<&BookEntry> {
        self.entries.iter().find(|e| &e.dose.dose_id == dose_id)
    }

    /// Applies the transitions of a tick in order.
    pub fn apply(&mut self, output: &TickOutput, now: Instant) -> Result<(), DoseError> {
        for t in &output.transitions {
            if let Some(entry) = self.entries.iter_mut().find(|e| e.dose.dose_id == t.dose_id) {
                entry.dose = transition_dose(&entry.dose, t.event.clone(), now, &entry.prefs)?;
            }
        }
        Ok(())
    }
}

fn in_quiet_hours(entry: &BookEntry, now: Instant) -> bool {
    entry
        .prefs
        .quiet_hours
        .is_some_and(|q| q.contains(now.with_timezone(&entry.timezone).time()))
}

/// Computes the reminders and transitions due at `now`.
///
/// Expiry takes precedence over reminding. Reminders falling inside quiet
/// hours are held until the first tick after the quiet period. The result is
/// idempotent: once applied, a second tick at the same `now` is empty.
pub fn tick(now: Instant, book: &ScheduleBook) -> TickOutput {
    let mut out = TickOutput::default();
    for entry in &book.entries {
        let dose = &entry.dose;
        if dose.state.is_terminal() || dose.due_at > now {
            continue;
        }
        let transition = |event| DoseTransition {
            patient_id: entry.patient_id.clone(),
            dose_id: dose.dose_id.clone(),
            event,
        };
        if now >= dose.expires_at(&entry.prefs) {
            out.transitions.push(transition(DoseEvent::Expire));
            continue;
        }
        let kind = match &dose.state {
            DoseState::Pending => ReminderKind::InitialReminder,
            DoseState::Reminded {
                count,
                last_reminded_at,
                snoozed_until,
            } => {
                let eligible_at = snoozed_until.unwrap_or(*last_reminded_at + entry.prefs.snooze());
                if *count >= entry.prefs.max_reminders_per_dose || eligible_at > now {
                    continue;
                }
                ReminderKind::RepeatReminder(count + 1)
            }
            _ => continue,
        };
        if in_quiet_hours(entry, now) {
            continue;
        }
        out.reminders.push(ReminderEvent {
            patient_id: entry.patient_id.clone(),
            dose_id: dose.dose_id.clone(),
            kind,
            fire_at: now,
        });
        out.transitions.push(transition(DoseEvent::Remind));
    }
    out
}

/// Defers the next repeat reminder to `now + snooze`. Does not count as a
/// reminder.
pub fn apply_snooze(
    dose: &ScheduledDose,
    now: Instant,
    prefs: &ReminderPrefs,
) -> Result<ScheduledDose, DoseError> {
    match &dose.state {
        DoseState::Reminded {
            count,
            last_reminded_at,
            ..
        } => Ok(ScheduledDose {
            state: DoseState::Reminded {
                count: *count,
                last_reminded_at: *last_reminded_at,
                snoozed_until: Some(now + prefs.snooze()),
            },
            ..dose.clone()
        }),
        other => Err(DoseError::IllegalTransition {
            dose_id: dose.dose_id.clone(),
            state: other.name(),
            event: "snooze",
        }),
    }
}
