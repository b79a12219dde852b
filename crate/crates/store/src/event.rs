use serde::{Deserialize, Serialize};

use roberto_core::dialogue::{ConversationSession, OutboundMessage};
use roberto_core::domain::{
    Alert, AlertId, CheckIn, DoseEvent, DoseId, Instant, InterventionMessage, Medication,
    PatientId, PatientProfile, ScheduledDose,
};
use roberto_core::scheduler::ReminderKind;

/// One appended record. Field order is the on-disk order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainEvent {
    pub seq: u64,
    pub at: Instant,
    pub patient_id: PatientId,
    pub payload: EventPayload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventPayload {
    ChatRegistered { chat_id: i64 },
    ProfileSaved { profile: PatientProfile },
    MedicationSaved { medication: Medication },
    DoseScheduled { dose: ScheduledDose },
    ReminderFired { dose_id: DoseId, kind: ReminderKind },
    /// Taken or skipped, as reported by the patient.
    DoseReported { dose_id: DoseId, event: DoseEvent },
    DoseSnoozed { dose_id: DoseId },
    DoseExpired { dose_id: DoseId },
    CheckInSaved { check_in: CheckIn },
    AlertRaised { alert: Alert },
    AlertAcked { alert_id: AlertId },
    InterventionAppended { message: InterventionMessage },
    AppointmentRequested { note: String },
    SessionUpdated { session: ConversationSession },
    DeliveryRecorded { record: DeliveryRecord },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    ChatRegistered,
    ProfileSaved,
    MedicationSaved,
    DoseScheduled,
    ReminderFired,
    DoseReported,
    DoseSnoozed,
    DoseExpired,
    CheckInSaved,
    AlertRaised,
    AlertAcked,
    InterventionAppended,
    AppointmentRequested,
    SessionUpdated,
    DeliveryRecorded,
}

impl EventPayload {
    pub fn kind(&self) -> EventKind {
        match self {
            Self::ChatRegistered { .. } => EventKind::ChatRegistered,
            Self::ProfileSaved { .. } => EventKind::ProfileSaved,
            Self::MedicationSaved { .. } => EventKind::MedicationSaved,
            Self::DoseScheduled { .. } => EventKind::DoseScheduled,
            Self::ReminderFired { .. } => EventKind::ReminderFired,
            Self::DoseReported { .. } => EventKind::DoseReported,
            Self::DoseSnoozed { .. } => EventKind::DoseSnoozed,
            Self::DoseExpired { .. } => EventKind::DoseExpired,
            Self::CheckInSaved { .. } => EventKind::CheckInSaved,
            Self::AlertRaised { .. } => EventKind::AlertRaised,
            Self::AlertAcked { .. } => EventKind::AlertAcked,
            Self::InterventionAppended { .. } => EventKind::InterventionAppended,
            Self::AppointmentRequested { .. } => EventKind::AppointmentRequested,
            Self::SessionUpdated { .. } => EventKind::SessionUpdated,
            Self::DeliveryRecorded { .. } => EventKind::DeliveryRecorded,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppointmentRequest {
    pub at: Instant,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DeliveryStatus {
    Queued { next_attempt_at: Instant },
    Delivered { at: Instant },
    Failed { at: Instant, reason: String },
}

/// An outbound message and what became of it. Later records with the same
/// `delivery_id` replace earlier ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeliveryRecord {
    pub delivery_id: u64,
    pub channel: String,
    pub message: OutboundMessage,
    pub attempts: u32,
    #[serde(flatten)]
    pub status: DeliveryStatus,
}
