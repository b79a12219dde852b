use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    Alert, CheckIn, DoseEvent, DoseId, InterventionMessage, Medication, PatientId, PatientProfile,
};

pub const MAX_QUICK_REPLIES: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuickReply {
    pub label: String,
    pub callback_token: String,
}

impl QuickReply {
    pub fn new(label: impl Into<String>, callback_token: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            callback_token: callback_token.into(),
        }
    }
}

/// Structured payload for a medication reminder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoseCard {
    pub title: String,
    pub medication_name: String,
    pub dose: String,
    /// Patient-local wall clock, `HH:MM`.
    pub due_time: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutboundMessage {
    pub patient_id: PatientId,
    pub body: String,
    #[serde(default)]
    pub quick_replies: Vec<QuickReply>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub card: Option<DoseCard>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MessageError {
    #[error("{0} quick replies, at most {MAX_QUICK_REPLIES} allowed")]
    TooManyQuickReplies(usize),
    #[error("callback token {0:?} appears more than once")]
    DuplicateToken(String),
}

impl OutboundMessage {
    pub fn text(patient_id: PatientId, body: impl Into<String>) -> Self {
        Self {
            patient_id,
            body: body.into(),
            quick_replies: Vec::new(),
            card: None,
        }
    }

    pub fn with_quick_replies(mut self, quick_replies: Vec<QuickReply>) -> Self {
        self.quick_replies = quick_replies;
        self
    }

    pub fn validate(&self) -> Result<(), MessageError> {
        if self.quick_replies.len() > MAX_QUICK_REPLIES {
            return Err(MessageError::TooManyQuickReplies(self.quick_replies.len()));
        }
        let mut seen = BTreeSet::new();
        for reply in &self.quick_replies {
            if !seen.insert(reply.callback_token.as_str()) {
                return Err(MessageError::DuplicateToken(reply.callback_token.clone()));
            }
        }
        Ok(())
    }
}

/// Everything the engine wants done outside the conversation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum DomainCommand {
    RecordDoseEvent { dose_id: DoseId, event: DoseEvent },
    SnoozeDose { dose_id: DoseId },
    SaveMedication { medication: Medication },
    SaveProfile { profile: PatientProfile },
    SaveCheckIn { check_in: CheckIn },
    RaiseAlert { alert: Alert },
    AppendIntervention { message: InterventionMessage },
    RequestAppointment { note: String },
}

/// A normalized inbound update.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum Inbound {
    Text(String),
    Callback(String),
}
