use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use chrono::{NaiveTime, Timelike};
use chrono_tz::Tz;

use super::answers;
use super::feedback::{feedback_with_milestone, DoseOutcome};
use super::message::{DomainCommand, DoseCard, Inbound, OutboundMessage, QuickReply};
use super::pagination::paginate;
use super::script::{render, DialogueScript, InputKind, Next, StepSpec, CANCEL, DONE};
use super::session::{ActiveFlow, ConversationSession, FlowKind, SlotValue};
use super::DialogueError;
use crate::domain::{
    validate_medication, Alert, AlertKind, CheckIn, DocId, DoseEvent, DoseId, DoseState, Instant,
    InterventionMessage, Medication, MedicationDraft, MedicationId, PatientId, PatientProfile,
    ProviderId, QuietHours, RegimenDraft, ReminderPrefs, ScheduledDose, Sender, Severity,
    SymptomId,
};
use crate::knowledge::{
    check_symptoms, get_info, match_intent, IntentKind, KnowledgeBase, TRIAGE_DISCLAIMER,
};
use crate::scheduler::ReminderKind;

/// Read-only view of the patient's records for one update.
#[derive(Debug, Clone, Copy)]
pub struct DialogueContext<'a> {
    /// `None` until onboarding has completed.
    pub profile: Option<&'a PatientProfile>,
    pub medications: &'a [Medication],
    pub doses: &'a [ScheduledDose],
    /// Consecutive taken doses before this update.
    pub taken_streak: u32,
    /// Assigned to patients who onboard without one.
    pub default_provider: &'a ProviderId,
}

/// Result of one update.
#[derive(Debug, Clone, PartialEq)]
pub struct Turn {
    pub session: ConversationSession,
    pub messages: Vec<OutboundMessage>,
    pub commands: Vec<DomainCommand>,
    /// Problems with the input worth logging, such as stale buttons.
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct DialogueEngine {
    script: DialogueScript,
    kb: Arc<KnowledgeBase>,
}

pub fn menu_quick_replies() -> Vec<QuickReply> {
    [
        ("Add medication", "menu:add_medication"),
        ("Check-in", "menu:check_in"),
        ("Symptom check", "menu:symptom_check"),
        ("Health info", "menu:info"),
        ("Appointment", "menu:appointment_request"),
        ("Talk to my care team", "menu:provider_chat"),
    ]
    .into_iter()
    .map(|(label, token)| QuickReply::new(label, token))
    .collect()
}

fn dose_quick_replies(dose_id: &DoseId) -> Vec<QuickReply> {
    vec![
        QuickReply::new("Taken", format!("taken:{dose_id}")),
        QuickReply::new("Skipped", format!("skipped:{dose_id}")),
        QuickReply::new("Snooze", format!("snooze:{dose_id}")),
    ]
}

fn dose_token(token: &str) -> Option<(&str, DoseId)> {
    let (action, dose_id) = token.split_once(':')?;
    (matches!(action, "taken" | "skipped" | "snooze") && !dose_id.is_empty())
        .then(|| (action, DoseId::new(dose_id)))
}

fn is_cancel(lower: &str) -> bool {
    matches!(lower, CANCEL | "/cancel" | "stop")
}

fn stamp(at: Instant) -> String {
    at.format("%Y%m%dT%H%M%SZ").to_string()
}

fn local_time(tz: Tz, at: Instant) -> String {
    let local = at.with_timezone(&tz);
    format!("{:02}:{:02}", local.hour(), local.minute())
}

fn dose_label(quantity: f64, unit: &str) -> String {
    format!("{quantity} {unit}")
}

impl DialogueEngine {
    pub fn new(script: DialogueScript, kb: Arc<KnowledgeBase>) -> Self {
        Self { script, kb }
    }

    pub fn script(&self) -> &DialogueScript {
        &self.script
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    /// Advances a conversation by one inbound update.
    pub fn handle_update(
        &self,
        session: &ConversationSession,
        inbound: &Inbound,
        now: Instant,
        ctx: &DialogueContext<'_>,
    ) -> Turn {
        let mut run = Run {
            engine: self,
            ctx,
            now,
            session: session.clone(),
            messages: Vec::new(),
            commands: Vec::new(),
            diagnostics: Vec::new(),
        };
        run.update(inbound);
        for note in &run.diagnostics {
            tracing::warn!(patient = %session.patient_id, "{note}");
        }
        Turn {
            session: run.session,
            messages: run.messages,
            commands: run.commands,
            diagnostics: run.diagnostics,
        }
    }

    /// Card asking the patient to report on a dose.
    pub fn render_dose_card(
        &self,
        profile: &PatientProfile,
        dose: &ScheduledDose,
        med: &Medication,
    ) -> Result<OutboundMessage, DialogueError> {
        self.card(profile, dose, med, "dose_card")
    }

    /// Message for a scheduler reminder. Escalations reuse the repeat wording.
    pub fn render_reminder(
        &self,
        profile: &PatientProfile,
        dose: &ScheduledDose,
        med: &Medication,
        kind: &ReminderKind,
    ) -> Result<OutboundMessage, DialogueError> {
        let template = match kind {
            ReminderKind::InitialReminder => "dose_card",
            _ => "dose_card_repeat",
        };
        self.card(profile, dose, med, template)
    }

    fn card(
        &self,
        profile: &PatientProfile,
        dose: &ScheduledDose,
        med: &Medication,
        template: &str,
    ) -> Result<OutboundMessage, DialogueError> {
        if dose.state.is_terminal() {
            return Err(DialogueError::IllegalState {
                dose_id: dose.dose_id.clone(),
                state: dose.state.name(),
            });
        }
        let card = DoseCard {
            title: "Medication reminder".to_owned(),
            medication_name: med.name.clone(),
            dose: med.dose_label(),
            due_time: local_time(profile.timezone, dose.due_at),
        };
        let body = render(
            self.script.template(template),
            &[
                ("name", card.medication_name.as_str()),
                ("dose", card.dose.as_str()),
                ("time", card.due_time.as_str()),
            ],
        );
        Ok(OutboundMessage {
            patient_id: profile.patient_id.clone(),
            body,
            quick_replies: dose_quick_replies(&dose.dose_id),
            card: Some(card),
        })
    }

    /// Supportive note after a dose expired unanswered, offering a check-in.
    pub fn missed_notice(
        &self,
        profile: &PatientProfile,
        dose: &ScheduledDose,
        med: &Medication,
    ) -> OutboundMessage {
        let body = render(
            self.script.template("feedback_missed"),
            &[
                ("name", med.name.clone()),
                ("time", local_time(profile.timezone, dose.due_at)),
            ],
        );
        OutboundMessage::text(profile.patient_id.clone(), body)
            .with_quick_replies(vec![QuickReply::new("Check in", "menu:check_in")])
    }

    /// Relays a care-team message to the patient.
    pub fn provider_message(&self, patient_id: &PatientId, body: &str) -> OutboundMessage {
        let text = render(self.script.template("provider_message"), &[("body", body)]);
        OutboundMessage::text(patient_id.clone(), text)
    }

    fn find_doc(&self, topic: &str) -> Option<&DocId> {
        if let Ok(doc) = get_info(topic, &self.kb) {
            return Some(&doc.doc_id);
        }
        let topic = topic.trim().to_lowercase();
        if topic.is_empty() {
            return None;
        }
        self.kb.info_docs.iter().find_map(|(id, doc)| {
            let spaced = id.as_str().replace('_', " ");
            (doc.title.to_lowercase().contains(&topic) || topic.contains(&spaced)).then_some(id)
        })
    }
}

struct Run<'a> {
    engine: &'a DialogueEngine,
    ctx: &'a DialogueContext<'a>,
    now: Instant,
    session: ConversationSession,
    messages: Vec<OutboundMessage>,
    commands: Vec<DomainCommand>,
    diagnostics: Vec<String>,
}

/// Outcome of reading an answer for a step.
enum Parsed {
    Value(SlotValue, String),
    Done,
    Invalid,
}

impl Run<'_> {
    fn script(&self) -> &DialogueScript {
        &self.engine.script
    }

    fn patient(&self) -> PatientId {
        self.session.patient_id.clone()
    }

    fn tz(&self) -> Tz {
        self.ctx.profile.map_or(Tz::UTC, |p| p.timezone)
    }

    fn say(&mut self, body: String, quick_replies: Vec<QuickReply>) {
        let message = OutboundMessage::text(self.patient(), body).with_quick_replies(quick_replies);
        self.messages.push(message);
    }

    fn say_template<K: AsRef<str>, V: AsRef<str>>(
        &mut self,
        id: &str,
        vars: &[(K, V)],
        quick_replies: Vec<QuickReply>,
    ) {
        let body = render(self.script().template(id), vars);
        self.say(body, quick_replies);
    }

    fn diagnose(&mut self, note: String) {
        self.diagnostics.push(note);
    }

    fn raise(&mut self, kind: AlertKind, severity: Severity, detail: String) {
        let alert = Alert::raise(
            kind,
            severity,
            self.patient(),
            &stamp(self.now),
            self.now,
            detail,
        );
        self.commands.push(DomainCommand::RaiseAlert { alert });
    }

    fn update(&mut self, inbound: &Inbound) {
        let (text, callback) = match inbound {
            Inbound::Text(t) => (t.trim(), None),
            Inbound::Callback(c) => (c.trim(), Some(c.trim())),
        };
        if is_cancel(&text.to_lowercase()) {
            return self.cancel();
        }
        if let Some((action, dose_id)) = callback.and_then(dose_token) {
            return self.dose_action(action, dose_id);
        }
        match self.session.active_flow.kind() {
            None => self.idle(text, callback),
            Some(FlowKind::InfoBrowse) => self.read_more(text, callback),
            Some(kind) => self.answer(kind, text, callback),
        }
    }

    fn cancel(&mut self) {
        let template = if self.session.is_idle() {
            "nothing_to_cancel"
        } else {
            "cancelled"
        };
        self.session.reset();
        self.say_template::<&str, &str>(template, &[], menu_quick_replies());
    }

    fn show_menu(&mut self, template: &str) {
        self.say_template::<&str, &str>(template, &[], menu_quick_replies());
    }

    fn idle(&mut self, text: &str, callback: Option<&str>) {
        if self.ctx.profile.is_none() {
            return self.start(ActiveFlow::Onboarding, BTreeMap::new());
        }
        if let Some(token) = callback {
            if let Some(flow) = token.strip_prefix("menu:") {
                return self.menu_choice(flow);
            }
            if let Some(doc) = token.strip_prefix("info:") {
                return self.open_doc(DocId::new(doc));
            }
            self.diagnose(format!("unexpected callback {token:?} while idle"));
            return self.show_menu("fallback");
        }
        match text.to_lowercase().as_str() {
            "/start" => return self.start(ActiveFlow::Onboarding, BTreeMap::new()),
            "/help" | "help" | "menu" | "/menu" => return self.show_menu("menu"),
            _ => {}
        }
        match match_intent(text, &self.engine.kb).kind {
            IntentKind::SymptomReport { symptoms } => {
                let slots = BTreeMap::from([("symptoms".to_owned(), SlotValue::Symptoms(symptoms))]);
                self.start(ActiveFlow::SymptomCheck, slots);
            }
            IntentKind::AskInfo { topic } => match self.engine.find_doc(&topic) {
                Some(doc_id) => self.open_doc(doc_id.clone()),
                None => self.say_template("info_not_found", &[("topic", topic)], vec![]),
            },
            IntentKind::AddMedication => self.start(ActiveFlow::AddMedication, BTreeMap::new()),
            IntentKind::CheckInRequest => self.start(ActiveFlow::CheckIn, BTreeMap::new()),
            IntentKind::TalkToProvider => self.start(ActiveFlow::ProviderChat, BTreeMap::new()),
            IntentKind::BookAppointment => {
                self.start(ActiveFlow::AppointmentRequest, BTreeMap::new())
            }
            IntentKind::Unknown => self.show_menu("fallback"),
        }
    }

    fn menu_choice(&mut self, flow: &str) {
        let flow = match flow {
            "info" => {
                return self.say_template::<&str, &str>("info_prompt", &[], vec![]);
            }
            "add_medication" => ActiveFlow::AddMedication,
            "check_in" => ActiveFlow::CheckIn,
            "symptom_check" => ActiveFlow::SymptomCheck,
            "appointment_request" => ActiveFlow::AppointmentRequest,
            "provider_chat" => ActiveFlow::ProviderChat,
            other => {
                self.diagnose(format!("unknown menu entry {other:?}"));
                return self.show_menu("fallback");
            }
        };
        self.start(flow, BTreeMap::new());
    }

    fn start(&mut self, flow: ActiveFlow, slots: BTreeMap<String, SlotValue>) {
        self.session.enter(flow);
        self.session.slots = slots;
        self.prompt(None);
    }

    fn step(&self) -> Option<&StepSpec> {
        let kind = self.session.active_flow.kind()?;
        self.script().flow(kind).steps.get(self.session.step)
    }

    fn prompt(&mut self, help: Option<&str>) {
        let Some(step) = self.step() else { return };
        let quick_replies = step
            .quick_replies
            .iter()
            .map(|q| QuickReply::new(q.label.clone(), q.token()))
            .collect();
        let prompt = render(self.script().template(&step.prompt), &self.vars());
        let body = match help {
            Some(help) if help != prompt => format!("{help}\n\n{prompt}"),
            _ => prompt,
        };
        self.say(body, quick_replies);
    }

    fn reprompt(&mut self) {
        let Some(step) = self.step() else { return };
        let help = render(self.script().template(&step.help), &self.vars());
        self.prompt(Some(&help));
    }

    /// Placeholder values for prompts of the active flow.
    fn vars(&self) -> Vec<(String, String)> {
        let mut vars = Vec::new();
        for (name, value) in &self.session.slots {
            let text = match value {
                SlotValue::Text(s) | SlotValue::Choice(s) => s.clone(),
                SlotValue::Empty => String::new(),
                SlotValue::Number(n) => n.to_string(),
                SlotValue::Integer(n) => n.to_string(),
                SlotValue::Times(t) => answers::format_times(t),
                SlotValue::Days(d) => d.to_string(),
                SlotValue::Symptoms(s) => self.symptom_names(s),
                SlotValue::Timezone(tz) => tz.name().to_owned(),
            };
            vars.push((name.clone(), text));
        }
        if let (Some(q), Some(u)) = (
            self.session.number("dose_quantity"),
            self.session.text("dose_unit"),
        ) {
            vars.push(("dose".into(), dose_label(q, u)));
        }
        if self.session.active_flow == ActiveFlow::SymptomCheck
            && self.session.symptoms("symptoms").is_empty()
        {
            vars.push(("symptoms".into(), "none yet".into()));
        }
        if let ActiveFlow::DoseResponse { dose_id } = &self.session.active_flow {
            if let Some((dose, med)) = self.dose_and_med(dose_id) {
                vars.push(("name".into(), med.name.clone()));
                vars.push(("dose".into(), med.dose_label()));
                vars.push(("time".into(), local_time(self.tz(), dose.due_at)));
            }
        }
        // Later entries win.
        vars.reverse();
        vars
    }

    fn symptom_names(&self, symptoms: &BTreeSet<SymptomId>) -> String {
        symptoms
            .iter()
            .map(|id| self.engine.kb.symptom(id).map_or(id.as_str(), |s| s.name.as_str()))
            .collect::<Vec<_>>()
            .join(", ")
    }

    fn dose_and_med(&self, dose_id: &DoseId) -> Option<(&ScheduledDose, &Medication)> {
        let dose = self.ctx.doses.iter().find(|d| &d.dose_id == dose_id)?;
        let med = self
            .ctx
            .medications
            .iter()
            .find(|m| m.medication_id == dose.medication_id)?;
        Some((dose, med))
    }

    fn dose_action(&mut self, action: &str, dose_id: DoseId) {
        let Some((dose, _)) = self.dose_and_med(&dose_id) else {
            self.diagnose(format!("callback for unknown dose {dose_id}"));
            return self.say_template::<&str, &str>("dose_unknown", &[], vec![]);
        };
        if dose.state.is_terminal() {
            let state = dose.state.name();
            return self.say_template("dose_closed", &[("state", state)], vec![]);
        }
        self.session.enter(ActiveFlow::DoseResponse { dose_id });
        self.accept(FlowKind::DoseResponse, action);
    }

    fn answer(&mut self, kind: FlowKind, text: &str, callback: Option<&str>) {
        let Some(step) = self.step() else {
            self.diagnose(format!("step {} is outside flow {kind}", self.session.step));
            self.session.reset();
            return self.show_menu("fallback");
        };
        let answer = match callback {
            None => text.to_owned(),
            Some(token) => match step.quick_replies.iter().find(|q| q.token() == token) {
                Some(reply) => reply.value.clone(),
                None => {
                    self.diagnose(format!(
                        "callback {token:?} does not belong to {kind} step {}",
                        step.id
                    ));
                    return self.reprompt();
                }
            },
        };
        self.accept(kind, &answer);
    }

    fn accept(&mut self, kind: FlowKind, answer: &str) {
        let flow = self.engine.script.flow(kind);
        let index = self.session.step;
        let step = &flow.steps[index];
        let (value, key) = match self.parse(step, answer) {
            Parsed::Invalid => return self.reprompt(),
            Parsed::Done => return self.finish(kind),
            Parsed::Value(value, key) => (value, key),
        };
        if let Some(slot) = &step.slot {
            let value = match (value, self.session.slots.get(slot)) {
                (SlotValue::Symptoms(new), Some(SlotValue::Symptoms(old))) if step.repeat => {
                    SlotValue::Symptoms(old.union(&new).cloned().collect())
                }
                (value, _) => value,
            };
            self.session.slots.insert(slot.clone(), value);
        }
        match flow.next(index, &key) {
            Next::Step(next) => {
                self.session.step = next;
                self.prompt(None);
            }
            Next::Finish => self.finish(kind),
            Next::Stay if kind == FlowKind::ProviderChat => self.forward_to_provider(answer),
            Next::Stay => self.prompt(None),
        }
    }

    fn parse(&self, step: &StepSpec, answer: &str) -> Parsed {
        let answer = answer.trim();
        let lower = answer.to_lowercase();
        let value = |v: Option<SlotValue>| v.map_or(Parsed::Invalid, |v| Parsed::Value(v, String::new()));
        match step.input {
            InputKind::Text | InputKind::Chat if step.repeat && lower == DONE => Parsed::Done,
            InputKind::Text | InputKind::Chat => value(
                (!answer.is_empty() && answer.chars().count() <= 1000)
                    .then(|| SlotValue::Text(answer.to_owned())),
            ),
            InputKind::OptionalText if lower == "skip" => Parsed::Value(SlotValue::Empty, lower),
            InputKind::OptionalText => value(
                (!answer.is_empty() && answer.chars().count() <= 1000)
                    .then(|| SlotValue::Text(answer.to_owned())),
            ),
            InputKind::Quantity => value(answers::quantity(answer).map(SlotValue::Number)),
            InputKind::Hours => value(answers::hours(answer).map(SlotValue::Number)),
            InputKind::Scale => value(answers::scale(answer).map(SlotValue::Integer)),
            InputKind::Unit => value(answers::unit(answer).map(SlotValue::Text)),
            InputKind::Times => value(answers::times(answer).map(SlotValue::Times)),
            InputKind::Days => value(answers::days(answer).map(SlotValue::Days)),
            InputKind::Timezone => value(answers::timezone(answer).map(SlotValue::Timezone)),
            InputKind::Confirm => match answers::yes_no(answer) {
                Some(yes) => {
                    let key = if yes { "yes" } else { "no" };
                    Parsed::Value(SlotValue::Choice(key.to_owned()), key.to_owned())
                }
                None => Parsed::Invalid,
            },
            InputKind::Choice => step
                .quick_replies
                .iter()
                .find(|q| q.value.to_lowercase() == lower || q.label.to_lowercase() == lower)
                .map_or(Parsed::Invalid, |q| {
                    Parsed::Value(SlotValue::Choice(q.value.clone()), q.value.clone())
                }),
            InputKind::Symptoms if step.repeat && lower == DONE => Parsed::Done,
            InputKind::Symptoms if matches!(lower.as_str(), "none" | "no" | "nothing") => {
                Parsed::Value(SlotValue::Symptoms(BTreeSet::new()), "none".to_owned())
            }
            InputKind::Symptoms => match match_intent(answer, &self.engine.kb).kind {
                IntentKind::SymptomReport { symptoms } => {
                    Parsed::Value(SlotValue::Symptoms(symptoms), String::new())
                }
                _ => Parsed::Invalid,
            },
            InputKind::ReadMore => Parsed::Invalid,
        }
    }

    fn forward_to_provider(&mut self, body: &str) {
        let provider_id = self
            .ctx
            .profile
            .map_or_else(|| self.ctx.default_provider.clone(), |p| p.provider_id.clone());
        let message = InterventionMessage {
            patient_id: self.patient(),
            provider_id,
            sender: Sender::Patient,
            body: body.trim().to_owned(),
            sent_at: self.now,
        };
        self.commands.push(DomainCommand::AppendIntervention { message });
        self.say_template::<&str, &str>("chat_forwarded", &[], vec![]);
    }

    fn finish(&mut self, kind: FlowKind) {
        match kind {
            FlowKind::Onboarding => self.finish_onboarding(),
            FlowKind::AddMedication => self.finish_medication(),
            FlowKind::DoseResponse => self.finish_dose(),
            FlowKind::CheckIn => self.finish_check_in(),
            FlowKind::SymptomCheck => self.finish_symptom_check(),
            FlowKind::AppointmentRequest => self.finish_appointment(),
            FlowKind::ProviderChat => self.say_template::<&str, &str>("chat_closed", &[], vec![]),
            FlowKind::InfoBrowse => {}
        }
        self.session.reset();
    }

    fn finish_onboarding(&mut self) {
        let s = &self.session;
        let existing = self.ctx.profile;
        let mut prefs = existing.map_or_else(ReminderPrefs::default, |p| p.reminder_prefs.clone());
        if let Some(minutes) = s.text("snooze_minutes").and_then(|m| m.parse().ok()) {
            prefs.snooze_minutes = minutes;
        }
        prefs.quiet_hours = s.text("quiet_hours").and_then(parse_quiet_hours);
        if prefs.validate().is_err() {
            prefs = ReminderPrefs::default();
        }
        let timezone = match s.slots.get("timezone") {
            Some(SlotValue::Timezone(tz)) => *tz,
            _ => self.tz(),
        };
        let display_name = s.text("display_name").unwrap_or_default().to_owned();
        let profile = PatientProfile {
            patient_id: self.patient(),
            display_name: display_name.clone(),
            timezone,
            provider_id: existing
                .map_or_else(|| self.ctx.default_provider.clone(), |p| p.provider_id.clone()),
            condition_tags: existing.map(|p| p.condition_tags.clone()).unwrap_or_default(),
            reminder_prefs: prefs,
        };
        self.commands.push(DomainCommand::SaveProfile { profile });
        self.say_template(
            "onboarded",
            &[("name", display_name)],
            vec![QuickReply::new("Add medication", "menu:add_medication")],
        );
    }

    fn finish_medication(&mut self) {
        let vars = self.vars();
        if self.session.text("confirm") != Some("yes") {
            return self.say_template::<&str, &str>("medication_discarded", &[], vec![]);
        }
        let s = &self.session;
        let draft = MedicationDraft {
            medication_id: Some(MedicationId::new(format!(
                "{}:med{}",
                s.patient_id,
                self.ctx.medications.len() + 1
            ))),
            name: s.optional_text("name"),
            dose_quantity: s.number("dose_quantity"),
            dose_unit: s.optional_text("dose_unit"),
            regimen: RegimenDraft {
                times_of_day: match s.slots.get("times") {
                    Some(SlotValue::Times(t)) => t.clone(),
                    _ => Vec::new(),
                },
                days_of_week: match s.slots.get("days") {
                    Some(SlotValue::Days(d)) => *d,
                    _ => Default::default(),
                },
                start_date: Some(self.now.with_timezone(&self.tz()).date_naive()),
                end_date: None,
            },
            ..MedicationDraft::default()
        };
        match validate_medication(draft) {
            Ok(medication) => {
                self.commands.push(DomainCommand::SaveMedication { medication });
                self.say_template("medication_saved", &vars, menu_quick_replies());
            }
            Err(errors) => {
                let errors = errors
                    .iter()
                    .map(|e| e.to_string())
                    .collect::<Vec<_>>()
                    .join(", ");
                self.say_template("medication_invalid", &[("errors", errors)], vec![]);
            }
        }
    }

    fn finish_dose(&mut self) {
        let ActiveFlow::DoseResponse { dose_id } = self.session.active_flow.clone() else {
            return;
        };
        let Some((dose, med)) = self.dose_and_med(&dose_id) else {
            self.diagnose(format!("dose {dose_id} vanished during the conversation"));
            return self.say_template::<&str, &str>("dose_unknown", &[], vec![]);
        };
        if dose.state.is_terminal() {
            let state = dose.state.name();
            return self.say_template("dose_closed", &[("state", state)], vec![]);
        }
        let reminded = matches!(dose.state, DoseState::Reminded { .. });
        let name = med.name.clone();
        let time = local_time(self.tz(), dose.due_at);
        let milestone = self.script().settings.milestone_streak;
        match self.session.text("outcome") {
            Some("taken") => {
                let streak = self.ctx.taken_streak + 1;
                let template = feedback_with_milestone(DoseOutcome::Taken, streak, milestone);
                self.commands.push(DomainCommand::RecordDoseEvent {
                    dose_id,
                    event: DoseEvent::ReportTaken,
                });
                self.say_template(
                    template,
                    &[("name", name), ("time", time), ("streak", streak.to_string())],
                    vec![],
                );
            }
            Some("skipped") => {
                let reason = self.session.optional_text("reason");
                self.commands.push(DomainCommand::RecordDoseEvent {
                    dose_id,
                    event: DoseEvent::ReportSkipped { reason },
                });
                let template = feedback_with_milestone(DoseOutcome::Skipped, 0, milestone);
                self.say_template(template, &[("name", name), ("time", time)], vec![]);
            }
            Some("snooze") if reminded => {
                let minutes = self
                    .ctx
                    .profile
                    .map_or_else(ReminderPrefs::default, |p| p.reminder_prefs.clone())
                    .snooze_minutes;
                self.commands.push(DomainCommand::SnoozeDose { dose_id });
                self.say_template("snoozed", &[("minutes", minutes.to_string())], vec![]);
            }
            Some("snooze") => self.say_template::<&str, &str>("cannot_snooze", &[], vec![]),
            other => {
                self.diagnose(format!("dose response finished without outcome {other:?}"));
                self.show_menu("fallback");
            }
        }
    }

    fn finish_check_in(&mut self) {
        let s = &self.session;
        let symptoms = s.symptoms("symptoms");
        let check_in = CheckIn {
            at: self.now,
            mood: s.integer("mood").unwrap_or(3) as u8,
            stress: s.integer("stress").unwrap_or(3) as u8,
            sleep_hours: s.number("sleep_hours").unwrap_or(0.0),
            symptoms: symptoms.iter().cloned().collect(),
            diet_note: s.optional_text("diet_note"),
            exercise_note: s.optional_text("exercise_note"),
        };
        self.commands.push(DomainCommand::SaveCheckIn { check_in });
        if !symptoms.is_empty() {
            let detail = format!("Reported at check-in: {}", self.symptom_names(&symptoms));
            self.raise(AlertKind::SymptomFlag, Severity::Low, detail);
        }
        self.say_template::<&str, &str>("checkin_saved", &[], vec![]);
    }

    fn finish_symptom_check(&mut self) {
        let symptoms = self.session.symptoms("symptoms");
        let kb = &self.engine.kb;
        let ranked = match check_symptoms(&symptoms, kb) {
            Ok(ranked) => ranked,
            Err(e) => {
                self.diagnose(format!("symptom check failed: {e}"));
                Vec::new()
            }
        };
        if ranked.is_empty() {
            return self.say_template::<&str, &str>("triage_empty", &[], menu_quick_replies());
        }
        let mut lines = Vec::new();
        let mut quick_replies: Vec<QuickReply> = Vec::new();
        for (i, scored) in ranked.iter().enumerate() {
            let condition = &kb.conditions[&scored.condition_id];
            lines.push(format!("{}. {} ({:.0}%)", i + 1, condition.name, scored.score * 100.0));
            let token = format!("info:{}", condition.info_doc);
            if quick_replies.len() < 3 && quick_replies.iter().all(|q| q.callback_token != token) {
                quick_replies.push(QuickReply::new(format!("About {}", condition.name), token));
            }
        }
        quick_replies.push(QuickReply::new("Talk to my care team", "menu:provider_chat"));
        let body = format!(
            "{}\n\n{TRIAGE_DISCLAIMER}",
            render(self.script().template("triage_result"), &[("ranking", lines.join("\n"))])
        );
        let detail = format!("Symptom check: {}", self.symptom_names(&symptoms));
        self.raise(AlertKind::SymptomFlag, Severity::Low, detail);
        self.say(body, quick_replies);
    }

    fn finish_appointment(&mut self) {
        if self.session.text("confirm") != Some("yes") {
            return self.say_template::<&str, &str>("appointment_discarded", &[], vec![]);
        }
        let note = self.session.text("note").unwrap_or_default().to_owned();
        self.commands.push(DomainCommand::RequestAppointment { note: note.clone() });
        self.raise(
            AlertKind::PatientRequest,
            Severity::Medium,
            format!("Appointment request: {note}"),
        );
        self.say_template::<&str, &str>("appointment_requested", &[], vec![]);
    }

    fn open_doc(&mut self, doc_id: DocId) {
        if !self.engine.kb.info_docs.contains_key(&doc_id) {
            self.diagnose(format!("unknown document {doc_id}"));
            self.session.reset();
            return self.say_template("info_not_found", &[("topic", doc_id.as_str())], vec![]);
        }
        self.session.enter(ActiveFlow::InfoBrowse { doc_id, cursor: 0 });
        self.show_page();
    }

    /// Sends the page at the session cursor and moves the cursor on.
    fn show_page(&mut self) {
        let ActiveFlow::InfoBrowse { doc_id, cursor } = self.session.active_flow.clone() else {
            return;
        };
        let kb = &self.engine.kb;
        let doc = &kb.info_docs[&doc_id];
        let page = match paginate(&doc.body, cursor, self.script().settings.page_chars) {
            Ok(page) => page,
            Err(e) => {
                self.diagnose(e.to_string());
                self.session.reset();
                return;
            }
        };
        let mut body = page.text.trim_end().to_owned();
        if cursor == 0 {
            body = format!("{}\n\n{body}", doc.title);
        }
        match page.next {
            Some(next) => {
                let token = format!("more:{doc_id}:{next}");
                self.session.active_flow = ActiveFlow::InfoBrowse { doc_id, cursor: next };
                self.say(body, vec![QuickReply::new("Read more", token)]);
            }
            None => {
                self.session.reset();
                self.say(body, vec![]);
            }
        }
    }

    fn read_more(&mut self, text: &str, callback: Option<&str>) {
        let ActiveFlow::InfoBrowse { doc_id, cursor } = self.session.active_flow.clone() else {
            return;
        };
        let expected = format!("more:{doc_id}:{cursor}");
        let wants_more = match callback {
            Some(token) => token == expected,
            None => matches!(text.to_lowercase().as_str(), "more" | "read more" | "next"),
        };
        if wants_more && self.engine.kb.info_docs.contains_key(&doc_id) {
            return self.show_page();
        }
        if let Some(token) = callback {
            self.diagnose(format!("callback {token:?} while reading {doc_id} at {cursor}"));
        }
        let help = self.script().template("help_read_more").to_owned();
        self.say(help, vec![QuickReply::new("Read more", expected)]);
    }
}

/// `"22:00-07:00"` or `"none"`.
fn parse_quiet_hours(s: &str) -> Option<QuietHours> {
    let (start, end) = s.split_once('-')?;
    let start = NaiveTime::parse_from_str(start.trim(), "%H:%M").ok()?;
    let end = NaiveTime::parse_from_str(end.trim(), "%H:%M").ok()?;
    Some(QuietHours { start, end })
}
