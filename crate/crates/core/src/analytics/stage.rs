use serde::{Deserialize, Serialize};

use super::Thresholds;

/// Where a patient is on the path from first contact to a lasting habit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BehaviourStage {
    TriggerAttention,
    InfluenceDecisions,
    FacilitateAction,
    SustainBehaviour,
}

impl BehaviourStage {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::TriggerAttention => "trigger_attention",
            Self::InfluenceDecisions => "influence_decisions",
            Self::FacilitateAction => "facilitate_action",
            Self::SustainBehaviour => "sustain_behaviour",
        }
    }
}

pub fn classify_stage(
    tenure_days: i64,
    medications: usize,
    weekly_rate: Option<f64>,
    thresholds: &Thresholds,
) -> BehaviourStage {
    if medications == 0 {
        return BehaviourStage::TriggerAttention;
    }
    match weekly_rate {
        _ if tenure_days < i64::from(thresholds.min_tenure_days) => BehaviourStage::InfluenceDecisions,
        None => BehaviourStage::InfluenceDecisions,
        Some(rate) if rate >= thresholds.sustain_rate => BehaviourStage::SustainBehaviour,
        Some(_) => BehaviourStage::FacilitateAction,
    }
}
