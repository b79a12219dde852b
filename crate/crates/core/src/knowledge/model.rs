use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{ConditionId, DocId, SymptomId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Symptom {
    pub name: String,
    #[serde(default)]
    pub synonyms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    /// Weight in (0, 1] of each symptom for this condition.
    pub symptom_weights: BTreeMap<SymptomId, f64>,
    pub info_doc: DocId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfoDocument {
    /// Filled from the table key when loading.
    #[serde(default, skip_serializing)]
    pub doc_id: DocId,
    pub title: String,
    pub body: String,
}

impl Default for DocId {
    fn default() -> Self {
        DocId::new("")
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnowledgeBase {
    pub symptoms: BTreeMap<SymptomId, Symptom>,
    pub conditions: BTreeMap<ConditionId, Condition>,
    pub info_docs: BTreeMap<DocId, InfoDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationIssue {
    pub path: String,
    pub reason: String,
}

impl std::fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.reason)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KbError {
    #[error("knowledge file could not be parsed: {0}")]
    Parse(String),
    #[error("knowledge file is invalid: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Validation(Vec<ValidationIssue>),
    #[error("unknown symptom `{0}`")]
    UnknownSymptom(SymptomId),
    #[error("no information found for `{0}`")]
    NotFound(String),
}

/// Parses and validates a knowledge file. All referential-integrity problems
/// are reported together.
pub fn load_kb(contents: &str) -> Result<KnowledgeBase, KbError> {
    if contents.trim().is_empty() {
        return Err(KbError::Parse("empty document".into()));
    }
    let mut kb: KnowledgeBase =
        toml::from_str(contents).map_err(|e| KbError::Parse(e.message().to_owned()))?;
    for (id, doc) in kb.info_docs.iter_mut() {
        doc.doc_id = id.clone();
    }
    let issues = kb.validate();
    if issues.is_empty() {
        Ok(kb)
    } else {
        Err(KbError::Validation(issues))
    }
}

impl KnowledgeBase {
    pub fn validate(&self) -> Vec<ValidationIssue> {
        let mut issues = Vec::new();
        let mut issue = |path: String, reason: &str| {
            issues.push(ValidationIssue {
                path,
                reason: reason.to_owned(),
            })
        };

        for (id, symptom) in &self.symptoms {
            if symptom.name.trim().is_empty() {
                issue(format!("symptoms.{id}.name"), "must not be empty");
            }
            if symptom.synonyms.iter().any(|s| s.trim().is_empty()) {
                issue(format!("symptoms.{id}.synonyms"), "synonyms must not be empty");
            }
        }
        for (id, condition) in &self.conditions {
            if condition.name.trim().is_empty() {
                issue(format!("conditions.{id}.name"), "must not be empty");
            }
            if condition.symptom_weights.is_empty() {
                issue(format!("conditions.{id}.symptom_weights"), "at least one symptom is required");
            }
            for (symptom, weight) in &condition.symptom_weights {
                let path = format!("conditions.{id}.symptom_weights.{symptom}");
                if !self.symptoms.contains_key(symptom) {
                    issue(path, "unknown symptom");
                } else if !(*weight > 0.0 && *weight <= 1.0) {
                    issue(path, "weight must be in (0, 1]");
                }
            }
            if !self.info_docs.contains_key(&condition.info_doc) {
                issue(format!("conditions.{id}.info_doc"), "unknown info document");
            }
        }
        for (id, doc) in &self.info_docs {
            if doc.title.trim().is_empty() {
                issue(format!("info_docs.{id}.title"), "must not be empty");
            }
            if doc.body.trim().is_empty() {
                issue(format!("info_docs.{id}.body"), "must not be empty");
            }
        }
        issues
    }

    pub fn symptom(&self, id: &SymptomId) -> Option<&Symptom> {
        self.symptoms.get(id)
    }
}
