use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::message::MAX_QUICK_REPLIES;
use super::session::FlowKind;

pub const BUNDLED_SCRIPT: &str = include_str!("../../assets/dialogue.toml");

/// Token that leaves any flow.
pub const CANCEL: &str = "cancel";
/// Transition target that completes a flow.
pub const FINISH: &str = "finish";
/// Answer that ends a repeating step.
pub const DONE: &str = "done";

/// Words that must not appear in messages about a skipped or missed dose.
pub const BLAME_DENY_LIST: &[&str] = &["fail", "bad", "blame", "should have"];

/// Templates the engine refers to by id.
pub const REQUIRED_TEMPLATES: &[&str] = &[
    "onboarded",
    "medication_saved",
    "medication_discarded",
    "medication_invalid",
    "dose_card",
    "dose_card_repeat",
    "feedback_taken",
    "feedback_milestone",
    "feedback_skipped",
    "feedback_missed",
    "snoozed",
    "dose_closed",
    "dose_unknown",
    "cannot_snooze",
    "checkin_saved",
    "triage_result",
    "triage_empty",
    "info_not_found",
    "info_prompt",
    "appointment_requested",
    "appointment_discarded",
    "chat_forwarded",
    "chat_closed",
    "provider_message",
    "cancelled",
    "nothing_to_cancel",
    "menu",
    "fallback",
];

const SUPPORTIVE_TEMPLATES: &[&str] = &["feedback_skipped", "feedback_missed"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKind {
    Text,
    OptionalText,
    Quantity,
    Unit,
    Times,
    Days,
    Confirm,
    Choice,
    Scale,
    Hours,
    Symptoms,
    Timezone,
    Chat,
    ReadMore,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuickReplySpec {
    pub label: String,
    pub value: String,
}

impl QuickReplySpec {
    pub fn token(&self) -> &str {
        &self.value
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepSpec {
    pub id: String,
    #[serde(default)]
    pub slot: Option<String>,
    pub input: InputKind,
    pub prompt: String,
    pub help: String,
    #[serde(default)]
    pub quick_replies: Vec<QuickReplySpec>,
    #[serde(default)]
    pub on: BTreeMap<String, String>,
    #[serde(default)]
    pub repeat: bool,
}

/// Where a step goes after an accepted answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Next {
    Step(usize),
    Stay,
    Finish,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub steps: Vec<StepSpec>,
}

impl FlowSpec {
    pub fn slot_names(&self) -> BTreeSet<&str> {
        self.steps.iter().filter_map(|s| s.slot.as_deref()).collect()
    }

    fn step_index(&self, id: &str) -> Option<usize> {
        self.steps.iter().position(|s| s.id == id)
    }

    /// Transition for an accepted answer keyed by `answer`.
    pub fn next(&self, step: usize, answer: &str) -> Next {
        let spec = &self.steps[step];
        match spec.on.get(answer) {
            Some(target) if target == FINISH => Next::Finish,
            Some(target) => self.step_index(target).map_or(Next::Finish, Next::Step),
            None if spec.repeat => Next::Stay,
            None if step + 1 < self.steps.len() => Next::Step(step + 1),
            None => Next::Finish,
        }
    }

    /// Every target a step can reach, `None` meaning the flow finishes.
    pub fn successors(&self, step: usize) -> Vec<Option<usize>> {
        let spec = &self.steps[step];
        let mut out: Vec<Option<usize>> = spec
            .on
            .values()
            .map(|t| if t == FINISH { None } else { self.step_index(t) })
            .collect();
        if spec.repeat {
            out.push(Some(step));
            out.push(None);
        } else if step + 1 < self.steps.len() {
            out.push(Some(step + 1));
        } else {
            out.push(None);
        }
        out.sort();
        out.dedup();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    #[serde(default = "default_page_chars")]
    pub page_chars: usize,
    #[serde(default = "default_milestone")]
    pub milestone_streak: u32,
}

fn default_page_chars() -> usize {
    600
}

fn default_milestone() -> u32 {
    7
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            page_chars: default_page_chars(),
            milestone_streak: default_milestone(),
        }
    }
}

/// Templates and flow tables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DialogueScript {
    #[serde(default)]
    pub settings: Settings,
    pub templates: BTreeMap<String, String>,
    pub flows: BTreeMap<FlowKind, FlowSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScriptError {
    #[error("cannot parse dialogue script: {0}")]
    Parse(String),
    #[error("invalid dialogue script: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

impl DialogueScript {
    pub fn bundled() -> Self {
        Self::load(BUNDLED_SCRIPT).expect("bundled dialogue script is valid")
    }

    pub fn load(contents: &str) -> Result<Self, ScriptError> {
        let script: Self = toml::from_str(contents).map_err(|e| ScriptError::Parse(e.to_string()))?;
        let problems = script.problems();
        if problems.is_empty() {
            Ok(script)
        } else {
            Err(ScriptError::Invalid(problems))
        }
    }

    pub fn flow(&self, kind: FlowKind) -> &FlowSpec {
        &self.flows[&kind]
    }

    pub fn template(&self, id: &str) -> &str {
        self.templates.get(id).map_or("", String::as_str)
    }

    /// All consistency problems, empty when the script is usable.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.settings.page_chars == 0 {
            out.push("settings.page_chars must be at least 1".to_owned());
        }
        for id in REQUIRED_TEMPLATES {
            if !self.templates.contains_key(*id) {
                out.push(format!("templates.{id} is missing"));
            }
        }
        for id in SUPPORTIVE_TEMPLATES {
            if let Some(text) = self.templates.get(*id) {
                if let Some(word) = blame_word(text) {
                    out.push(format!("templates.{id} contains {word:?}"));
                }
            }
        }
        for kind in FlowKind::ALL {
            let Some(flow) = self.flows.get(&kind) else {
                out.push(format!("flows.{kind} is missing"));
                continue;
            };
            if flow.steps.is_empty() {
                out.push(format!("flows.{kind} has no steps"));
            }
            let mut ids = BTreeSet::new();
            let mut slots = BTreeSet::new();
            for step in &flow.steps {
                let at = format!("flows.{kind}.{}", step.id);
                if !ids.insert(step.id.as_str()) {
                    out.push(format!("{at}: duplicate step id"));
                }
                if let Some(slot) = &step.slot {
                    if !slots.insert(slot.as_str()) {
                        out.push(format!("{at}: slot {slot} is already filled by another step"));
                    }
                }
                for id in [&step.prompt, &step.help] {
                    if !self.templates.contains_key(id) {
                        out.push(format!("{at}: unknown template {id}"));
                    }
                }
                if step.quick_replies.len() > MAX_QUICK_REPLIES {
                    out.push(format!("{at}: more than {MAX_QUICK_REPLIES} quick replies"));
                }
                let values: BTreeSet<&str> =
                    step.quick_replies.iter().map(|q| q.value.as_str()).collect();
                if values.len() != step.quick_replies.len() {
                    out.push(format!("{at}: duplicate quick reply values"));
                }
                if step.input == InputKind::Choice && step.quick_replies.is_empty() {
                    out.push(format!("{at}: a choice needs quick replies"));
                }
                for (answer, target) in &step.on {
                    if target != FINISH && flow.step_index(target).is_none() {
                        out.push(format!("{at}: on.{answer} targets unknown step {target}"));
                    }
                }
            }
        }
        out
    }
}

/// First deny-listed word found in `text`, ignoring case.
pub fn blame_word(text: &str) -> Option<&'static str> {
    let lower = text.to_lowercase();
    BLAME_DENY_LIST.iter().copied().find(|w| lower.contains(w))
}

/// Fills `{name}` placeholders. Unknown placeholders are left as they are.
pub fn render<K: AsRef<str>, V: AsRef<str>>(template: &str, vars: &[(K, V)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) => {
                let key = &after[..close];
                match vars.iter().find(|(k, _)| k.as_ref() == key) {
                    Some((_, value)) => out.push_str(value.as_ref()),
                    None => {
                        out.push('{');
                        out.push_str(key);
                        out.push('}');
                    }
                }
                rest = &after[close + 1..];
            }
            None => {
                out.push_str(&rest[open..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_script_is_valid() {
        let script = DialogueScript::bundled();
        assert_eq!(script.flows.len(), FlowKind::ALL.len());
    }

    #[test]
    fn render_fills_known_placeholders() {
        let vars = [("name", "Ada".to_owned())];
        assert_eq!(render("Hi {name}, {other}", &vars), "Hi Ada, {other}");
        assert_eq!(render("no braces", &vars), "no braces");
        assert_eq!(render("open {name", &vars), "open {name");
    }

    #[test]
    fn problems_are_collected() {
        let mut script = DialogueScript::bundled();
        script.templates.remove("menu");
        script
            .templates
            .insert("feedback_missed".into(), "You should have taken it".into());
        let flow = script.flows.get_mut(&FlowKind::DoseResponse).unwrap();
        flow.steps[0].on.insert("taken".into(), "nowhere".into());
        let problems = script.problems();
        assert_eq!(problems.len(), 3, "{problems:?}");
    }

    #[test]
    fn deny_list_ignores_case() {
        assert_eq!(blame_word("That was BAD"), Some("bad"));
        assert_eq!(blame_word("It's okay"), None);
    }
}
