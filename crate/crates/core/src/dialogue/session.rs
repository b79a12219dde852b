use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::NaiveTime;
use chrono_tz::Tz;
use serde::{Deserialize, Serialize};

use crate::domain::{DocId, DoseId, PatientId, SymptomId, WeekdaySet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowKind {
    Onboarding,
    AddMedication,
    DoseResponse,
    CheckIn,
    SymptomCheck,
    InfoBrowse,
    AppointmentRequest,
    ProviderChat,
}

impl FlowKind {
    pub const ALL: [FlowKind; 8] = [
        Self::Onboarding,
        Self::AddMedication,
        Self::DoseResponse,
        Self::CheckIn,
        Self::SymptomCheck,
        Self::InfoBrowse,
        Self::AppointmentRequest,
        Self::ProviderChat,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Onboarding => "onboarding",
            Self::AddMedication => "add_medication",
            Self::DoseResponse => "dose_response",
            Self::CheckIn => "check_in",
            Self::SymptomCheck => "symptom_check",
            Self::InfoBrowse => "info_browse",
            Self::AppointmentRequest => "appointment_request",
            Self::ProviderChat => "provider_chat",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for FlowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "flow", rename_all = "snake_case")]
pub enum ActiveFlow {
    #[default]
    Idle,
    Onboarding,
    AddMedication,
    DoseResponse { dose_id: DoseId },
    CheckIn,
    SymptomCheck,
    InfoBrowse { doc_id: DocId, cursor: usize },
    AppointmentRequest,
    ProviderChat,
}

impl ActiveFlow {
    pub fn kind(&self) -> Option<FlowKind> {
        Some(match self {
            Self::Idle => return None,
            Self::Onboarding => FlowKind::Onboarding,
            Self::AddMedication => FlowKind::AddMedication,
            Self::DoseResponse { .. } => FlowKind::DoseResponse,
            Self::CheckIn => FlowKind::CheckIn,
            Self::SymptomCheck => FlowKind::SymptomCheck,
            Self::InfoBrowse { .. } => FlowKind::InfoBrowse,
            Self::AppointmentRequest => FlowKind::AppointmentRequest,
            Self::ProviderChat => FlowKind::ProviderChat,
        })
    }
}

/// A captured answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum SlotValue {
    Text(String),
    /// An optional answer the patient chose not to give.
    Empty,
    Number(f64),
    Integer(i64),
    Times(Vec<NaiveTime>),
    Days(WeekdaySet),
    Symptoms(BTreeSet<SymptomId>),
    Choice(String),
    Timezone(Tz),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversationSession {
    pub patient_id: PatientId,
    #[serde(flatten)]
    pub active_flow: ActiveFlow,
    #[serde(default)]
    pub step: usize,
    #[serde(default)]
    pub slots: BTreeMap<String, SlotValue>,
}

impl ConversationSession {
    pub fn idle(patient_id: PatientId) -> Self {
        Self {
            patient_id,
            active_flow: ActiveFlow::Idle,
            step: 0,
            slots: BTreeMap::new(),
        }
    }

    pub fn is_idle(&self) -> bool {
        self.active_flow == ActiveFlow::Idle
    }

    pub(crate) fn enter(&mut self, flow: ActiveFlow) {
        self.active_flow = flow;
        self.step = 0;
        self.slots.clear();
    }

    pub(crate) fn reset(&mut self) {
        self.enter(ActiveFlow::Idle);
    }

    pub(crate) fn text(&self, slot: &str) -> Option<&str> {
        match self.slots.get(slot) {
            Some(SlotValue::Text(s) | SlotValue::Choice(s)) => Some(s),
            _ => None,
        }
    }

    pub(crate) fn optional_text(&self, slot: &str) -> Option<String> {
        self.text(slot).map(str::to_owned)
    }

    pub(crate) fn number(&self, slot: &str) -> Option<f64> {
        match self.slots.get(slot) {
            Some(SlotValue::Number(n)) => Some(*n),
            Some(SlotValue::Integer(n)) => Some(*n as f64),
            _ => None,
        }
    }

    pub(crate) fn integer(&self, slot: &str) -> Option<i64> {
        match self.slots.get(slot) {
            Some(SlotValue::Integer(n)) => Some(*n),
            _ => None,
        }
    }

    pub(crate) fn symptoms(&self, slot: &str) -> BTreeSet<SymptomId> {
        match self.slots.get(slot) {
            Some(SlotValue::Symptoms(s)) => s.clone(),
            _ => BTreeSet::new(),
        }
    }
}
