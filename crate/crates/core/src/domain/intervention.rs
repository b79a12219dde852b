use serde::{Deserialize, Serialize};

use super::{Instant, PatientId, ProviderId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sender {
    Patient,
    Provider,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterventionMessage {
    pub patient_id: PatientId,
    pub provider_id: ProviderId,
    pub sender: Sender,
    pub body: String,
    pub sent_at: Instant,
}

/// The asynchronous patient/provider conversation. Messages are kept ordered
/// by `sent_at`; equal timestamps keep insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterventionThread {
    pub messages: Vec<InterventionMessage>,
}

impl InterventionThread {
    pub fn push(&mut self, message: InterventionMessage) {
        let idx = self
            .messages
            .partition_point(|m| m.sent_at <= message.sent_at);
        self.messages.insert(idx, message);
    }
}
