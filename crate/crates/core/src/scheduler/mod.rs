//! Turns regimens into due instants, fires reminders with snooze and
//! escalation, and expires unanswered doses.

mod escalation;
mod recurrence;
mod reminders;

pub use escalation::{escalation_for, EscalationPolicy};
pub use recurrence::{next_due, resolve_local, ScheduleError};
pub use reminders::{
    apply_snooze, tick, BookEntry, DoseTransition, ReminderEvent, ReminderKind, ScheduleBook,
    TickOutput,
};
