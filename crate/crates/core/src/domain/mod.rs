//! Shared domain types and the pure dose-lifecycle state machine.
//!
//! Nothing in this module performs I/O or reads a clock; every operation takes
//! the current instant as an argument.

mod alert;
mod checkin;
mod dose;
mod ids;
mod intervention;
mod medication;
mod patient;

pub use alert::{Alert, AlertKind, Severity};
pub use checkin::{CheckIn, CheckInError};
pub use dose::{transition_dose, DoseError, DoseEvent, DoseState, ScheduledDose};
pub use ids::{AlertId, ConditionId, DocId, DoseId, MedicationId, PatientId, ProviderId, SymptomId};
pub use intervention::{InterventionMessage, InterventionThread, Sender};
pub use medication::{
    validate_medication, FieldError, Medication, MedicationDraft, Regimen, RegimenDraft,
    WeekdaySet,
};
pub use patient::{PatientProfile, PrefsError, QuietHours, ReminderPrefs};

/// A point on the UTC timeline. All stored instants are UTC; patient-local
/// wall clock is derived through the profile's timezone.
pub type Instant = chrono::DateTime<chrono::Utc>;
