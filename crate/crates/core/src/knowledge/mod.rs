//! Local symptom and disease knowledge: loading and validating the knowledge
//! file, intent matching, condition ranking and info lookup.
//!
//! The knowledge file mirrors the symptom/diagnosis shape of hosted symptom
//! checker APIs. Swapping in a live API means providing another source of a
//! [`KnowledgeBase`]; the matching and ranking functions only see the
//! in-memory model.

mod intent;
mod model;
mod triage;

pub use intent::{match_intent, Intent, IntentKind};
pub use model::{load_kb, Condition, InfoDocument, KbError, KnowledgeBase, Symptom, ValidationIssue};
pub use triage::{check_symptoms, get_info, ConditionScore, MAX_RANKED_CONDITIONS, TRIAGE_DISCLAIMER};

/// The demo knowledge file shipped with the crate. Not medical data.
pub const BUNDLED_KB: &str = include_str!("../../assets/knowledge.toml");
