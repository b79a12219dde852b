use serde::{Deserialize, Serialize};

use super::{AlertId, Instant, PatientId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlertKind {
    MissedStreak,
    AdherenceDrop,
    SymptomFlag,
    PatientRequest,
}

impl AlertKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::MissedStreak => "missed_streak",
            Self::AdherenceDrop => "adherence_drop",
            Self::SymptomFlag => "symptom_flag",
            Self::PatientRequest => "patient_request",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Low,
    Medium,
    High,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alert {
    pub alert_id: AlertId,
    pub patient_id: PatientId,
    pub kind: AlertKind,
    pub severity: Severity,
    pub created_at: Instant,
    #[serde(default)]
    pub detail: String,
    pub acknowledged: bool,
}

impl Alert {
    /// Builds an unacknowledged alert whose id is derived from its kind, the
    /// patient and a discriminating key, so re-raising the same condition
    /// yields the same id.
    pub fn raise(
        kind: AlertKind,
        severity: Severity,
        patient_id: PatientId,
        key: &str,
        created_at: Instant,
        detail: impl Into<String>,
    ) -> Self {
        Self {
            alert_id: AlertId::new(format!("{}:{}:{}", kind.as_str(), patient_id, key)),
            patient_id,
            kind,
            severity,
            created_at,
            detail: detail.into(),
            acknowledged: false,
        }
    }

    /// Marks the alert acknowledged. Returns `false` when it already was.
    pub fn acknowledge(&mut self) -> bool {
        !std::mem::replace(&mut self.acknowledged, true)
    }
}

#[cfg(test)]
mod tests {
    use chrono::Utc;

    use super::*;

    #[test]
    fn acknowledge_only_flips_once() {
        let mut alert = Alert::raise(
            AlertKind::PatientRequest,
            Severity::Medium,
            PatientId::new("p1"),
            "k",
            Utc::now(),
            "",
        );
        assert_eq!(alert.alert_id.as_str(), "patient_request:p1:k");
        assert!(alert.acknowledge());
        assert!(!alert.acknowledge());
        assert!(alert.acknowledged);
    }
}
