use serde::{Deserialize, Serialize};

use crate::domain::{Alert, AlertKind, DoseState, PatientId, ScheduledDose, Severity};

/// Consecutive-miss thresholds for MissedStreak alerts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EscalationPolicy {
    pub medium_streak: u32,
    pub high_streak: u32,
}

impl Default for EscalationPolicy {
    fn default() -> Self {
        Self {
            medium_streak: 2,
            high_streak: 3,
        }
    }
}

/// Alert for a dose that has just been missed, based on how many doses of the
/// same medication in a row (this one included) were missed.
pub fn escalation_for(
    patient_id: &PatientId,
    dose: &ScheduledDose,
    recent_history: &[ScheduledDose],
    policy: &EscalationPolicy,
) -> Option<Alert> {
    let DoseState::Missed { at } = dose.state else {
        return None;
    };
    let mut earlier: Vec<&ScheduledDose> = recent_history
        .iter()
        .filter(|d| {
            d.medication_id == dose.medication_id
                && d.due_at < dose.due_at
                && d.state.is_terminal()
        })
        .collect();
    earlier.sort_by_key(|d| std::cmp::Reverse(d.due_at));
    let streak = 1 + earlier
        .iter()
        .take_while(|d| matches!(d.state, DoseState::Missed { .. }))
        .count() as u32;

    let severity = if streak >= policy.high_streak {
        Severity::High
    } else if streak >= policy.medium_streak {
        Severity::Medium
    } else {
        return None;
    };
    Some(Alert::raise(
        AlertKind::MissedStreak,
        severity,
        patient_id.clone(),
        dose.dose_id.as_str(),
        at,
        format!("{streak} consecutive missed doses of {}", dose.medication_id),
    ))
}
