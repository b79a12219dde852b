use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::KnowledgeBase;
use crate::domain::SymptomId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IntentKind {
    SymptomReport { symptoms: BTreeSet<SymptomId> },
    AskInfo { topic: String },
    AddMedication,
    CheckInRequest,
    TalkToProvider,
    BookAppointment,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intent {
    pub kind: IntentKind,
    /// Matched content tokens over all content tokens, capped at 1. Zero for
    /// `Unknown`.
    pub confidence: f64,
}

impl Intent {
    fn unknown() -> Self {
        Self {
            kind: IntentKind::Unknown,
            confidence: 0.0,
        }
    }
}

/// Words that carry no intent on their own and are left out of the
/// confidence denominator.
const STOPWORDS: &[&str] = &[
    "a", "am", "an", "and", "are", "at", "be", "been", "bit", "but", "can", "could", "do", "does",
    "for", "from", "got", "had", "has", "have", "having", "hello", "hi", "i", "im", "in", "is",
    "it", "its", "just", "like", "little", "lot", "me", "my", "need", "of", "on", "or", "please",
    "quite", "really", "so", "some", "that", "the", "this", "to", "today", "too", "very", "want",
    "was", "with", "would", "you", "your",
];

type Route = (&'static [&'static str], fn() -> IntentKind);

/// Keyword routes in precedence order, tried after symptom matching.
/// More specific requests (adding a medication, booking) go before the broad
/// "talk to someone" route so "book an appointment with my doctor" books.
const ROUTES: &[Route] = &[
    (
        &["add", "new medication", "new medicine", "new pill", "prescribed", "prescription", "started taking"],
        || IntentKind::AddMedication,
    ),
    (
        &["appointment", "book", "booking", "reschedule", "visit"],
        || IntentKind::BookAppointment,
    ),
    (
        &["check in", "checkin", "log my", "mood", "diary", "journal", "how i feel"],
        || IntentKind::CheckInRequest,
    ),
    (
        &["doctor", "nurse", "provider", "talk", "speak", "human", "physician", "gp"],
        || IntentKind::TalkToProvider,
    ),
];

const INFO_TRIGGERS: &[&str] = &[
    "tell me about",
    "what is",
    "what are",
    "information about",
    "information on",
    "info about",
    "info on",
    "learn about",
    "read about",
];

fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

fn is_stopword(token: &str) -> bool {
    STOPWORDS.binary_search(&token).is_ok()
}

/// Start positions of `phrase` within `tokens`.
fn find_phrase(tokens: &[String], phrase: &[String]) -> Vec<usize> {
    if phrase.is_empty() || phrase.len() > tokens.len() {
        return Vec::new();
    }
    (0..=tokens.len() - phrase.len())
        .filter(|&i| tokens[i..i + phrase.len()] == *phrase)
        .collect()
}

/// Marks the token positions covered by any occurrence of the phrases.
fn cover(tokens: &[String], phrases: &[&str], covered: &mut [bool]) -> bool {
    let mut hit = false;
    for phrase in phrases {
        let phrase = tokenize(phrase);
        for start in find_phrase(tokens, &phrase) {
            covered[start..start + phrase.len()].iter_mut().for_each(|c| *c = true);
            hit = true;
        }
    }
    hit
}

fn confidence(tokens: &[String], covered: &[bool]) -> f64 {
    let content = tokens.iter().filter(|t| !is_stopword(t)).count();
    if content == 0 {
        return 0.0;
    }
    let matched = tokens
        .iter()
        .zip(covered)
        .filter(|(t, c)| **c && !is_stopword(t))
        .count();
    (matched as f64 / content as f64).min(1.0)
}

/// Rule-based intent recognition over lowercased tokens.
///
/// Precedence: any symptom name or synonym wins; then the keyword routes;
/// then an information request ("tell me about ..."); otherwise `Unknown`.
pub fn match_intent(text: &str, kb: &KnowledgeBase) -> Intent {
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return Intent::unknown();
    }

    let mut covered = vec![false; tokens.len()];
    let mut symptoms = BTreeSet::new();
    for (id, symptom) in &kb.symptoms {
        let phrases: Vec<&str> = std::iter::once(symptom.name.as_str())
            .chain(symptom.synonyms.iter().map(String::as_str))
            .collect();
        if cover(&tokens, &phrases, &mut covered) {
            symptoms.insert(id.clone());
        }
    }
    if !symptoms.is_empty() {
        return Intent {
            confidence: confidence(&tokens, &covered),
            kind: IntentKind::SymptomReport { symptoms },
        };
    }

    for (keywords, kind) in ROUTES {
        let mut covered = vec![false; tokens.len()];
        if cover(&tokens, keywords, &mut covered) {
            return Intent {
                confidence: confidence(&tokens, &covered),
                kind: kind(),
            };
        }
    }

    for trigger in INFO_TRIGGERS {
        let phrase = tokenize(trigger);
        if let Some(&start) = find_phrase(&tokens, &phrase).first() {
            let topic_tokens: Vec<&str> = tokens[start + phrase.len()..]
                .iter()
                .map(String::as_str)
                .filter(|t| !is_stopword(t))
                .collect();
            if topic_tokens.is_empty() {
                continue;
            }
            let covered: Vec<bool> = (0..tokens.len()).map(|i| i >= start).collect();
            return Intent {
                confidence: confidence(&tokens, &covered),
                kind: IntentKind::AskInfo {
                    topic: topic_tokens.join(" "),
                },
            };
        }
    }

    Intent::unknown()
}
