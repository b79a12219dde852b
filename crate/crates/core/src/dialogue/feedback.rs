use serde::{Deserialize, Serialize};

/// How a dose ended, from the patient's side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DoseOutcome {
    Taken,
    Skipped,
    Missed,
}

pub const MILESTONE_STREAK: u32 = 7;

/// Picks the feedback template for an outcome.
///
/// `taken_streak` counts consecutive taken doses including this one.
pub fn feedback_for(outcome: DoseOutcome, taken_streak: u32) -> &'static str {
    feedback_with_milestone(outcome, taken_streak, MILESTONE_STREAK)
}

pub fn feedback_with_milestone(
    outcome: DoseOutcome,
    taken_streak: u32,
    milestone_streak: u32,
) -> &'static str {
    match outcome {
        DoseOutcome::Taken if taken_streak >= milestone_streak => "feedback_milestone",
        DoseOutcome::Taken => "feedback_taken",
        DoseOutcome::Skipped => "feedback_skipped",
        DoseOutcome::Missed => "feedback_missed",
    }
}
