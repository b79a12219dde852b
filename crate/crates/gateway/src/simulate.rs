//! Scripted conversations on a virtual clock.
//!
//! A script is TOML:
//!
//! ```toml
//! start = "2026-03-02T07:00:00Z"
//! chat = 42            # default chat for steps without one
//! tick_minutes = 1     # clock resolution while advancing
//!
//! [[step]]
//! say = "hello"
//!
//! [[step]]
//! tap = "Taken"        # label of a button on the chat's latest keyboard
//!
//! [[step]]
//! advance_minutes = 90
//!
//! [[step]]
//! report = "p-42"      # trailing `days` (default 7) ending now
//!
//! [[step]]
//! roster = true
//!
//! [[step]]
//! intervene = "p-42"
//! body = "How are you feeling?"
//! ```
//!
//! Every inbound update goes through the webhook path, so the transcript
//! covers parsing, registration, the engine, the store and the outbox.

use std::collections::HashMap;
use std::sync::Arc;

use chrono::Duration;
use roberto_core::analytics::Window;
use roberto_core::domain::{Instant, PatientId};
use roberto_store::Store;
use serde::Deserialize;
use serde_json::json;
use thiserror::Error;

use crate::clock::{Clock, VirtualClock};
use crate::config::Config;
use crate::outbound::Outbox;
use crate::provider;
use crate::wire::{InlineKeyboardButton, SendMessage};
use crate::{bundled_engine, Gateway, GatewayError};

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("invalid script: {0}")]
    Script(#[from] toml::de::Error),
    #[error("step {step}: {reason}")]
    Step { step: usize, reason: String },
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Script {
    pub start: Instant,
    #[serde(default = "default_chat")]
    pub chat: i64,
    #[serde(default = "default_tick")]
    pub tick_minutes: i64,
    #[serde(default, rename = "step")]
    pub steps: Vec<Step>,
}

fn default_chat() -> i64 {
    1
}

fn default_tick() -> i64 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Step {
    Say {
        say: String,
        chat: Option<i64>,
    },
    Tap {
        tap: String,
        chat: Option<i64>,
    },
    Advance {
        advance_minutes: i64,
    },
    Report {
        report: PatientId,
        days: Option<i64>,
    },
    Roster {
        roster: bool,
    },
    Intervene {
        intervene: PatientId,
        body: String,
    },
}

impl Script {
    pub fn parse(text: &str) -> Result<Self, SimulationError> {
        Ok(toml::from_str(text)?)
    }
}

/// A gateway on a virtual clock with a recording outbox, plus the
/// transcript written so far.
pub struct Simulation {
    pub clock: Arc<VirtualClock>,
    pub outbox: Arc<Outbox>,
    pub gateway: Arc<Gateway>,
    next_update_id: i64,
    drained: usize,
    keyboards: HashMap<i64, Vec<InlineKeyboardButton>>,
    last_date: Option<chrono::NaiveDate>,
    transcript: String,
}

impl Simulation {
    pub fn new(start: Instant, store: Arc<Store>, config: Config) -> Self {
        let clock = Arc::new(VirtualClock::new(start));
        let outbox = Arc::new(Outbox::new());
        let gateway = Arc::new(Gateway::new(store, bundled_engine(), clock.clone(), outbox.clone(), config));
        Self {
            clock,
            outbox,
            gateway,
            next_update_id: 1,
            drained: 0,
            keyboards: HashMap::new(),
            last_date: None,
            transcript: String::new(),
        }
    }

    pub fn transcript(&self) -> &str {
        &self.transcript
    }

    fn stamp(&mut self) -> String {
        let now = self.clock.now();
        if self.last_date != Some(now.date_naive()) {
            self.last_date = Some(now.date_naive());
            self.transcript.push_str(&format!("== {} ==\n", now.format("%Y-%m-%d")));
        }
        now.format("%H:%MZ").to_string()
    }

    fn post(&mut self, update: serde_json::Value) -> Result<(), GatewayError> {
        self.next_update_id += 1;
        self.gateway.ingest_webhook(update.to_string().as_bytes())?;
        self.drain();
        Ok(())
    }

    pub fn say(&mut self, chat: i64, text: &str) -> Result<(), GatewayError> {
        let ts = self.stamp();
        self.transcript.push_str(&format!("{ts} {chat}> {text}\n"));
        let update = json!({
            "update_id": self.next_update_id,
            "message": { "chat": { "id": chat }, "text": text },
        });
        self.post(update)
    }

    /// Presses the button labelled `label` on the chat's latest keyboard.
    pub fn tap(&mut self, chat: i64, label: &str) -> Result<(), String> {
        let data = self
            .keyboards
            .get(&chat)
            .and_then(|k| k.iter().find(|b| b.text.eq_ignore_ascii_case(label)))
            .map(|b| b.callback_data.clone())
            .ok_or_else(|| format!("no button {label:?} on chat {chat}"))?;
        let ts = self.stamp();
        self.transcript.push_str(&format!("{ts} {chat}> [{label}]\n"));
        let update = json!({
            "update_id": self.next_update_id,
            "callback_query": { "data": data, "message": { "chat": { "id": chat } } },
        });
        self.post(update).map_err(|e| e.to_string())
    }

    /// Moves the clock forward, ticking at every step.
    pub fn advance(&mut self, minutes: i64, tick_minutes: i64) -> Result<(), GatewayError> {
        let step = tick_minutes.max(1);
        let mut left = minutes;
        while left > 0 {
            let by = step.min(left);
            self.clock.advance(Duration::minutes(by));
            left -= by;
            self.gateway.tick()?;
            self.drain();
        }
        Ok(())
    }

    fn drain(&mut self) {
        let sent = self.outbox.sent_after(self.drained);
        self.drained += sent.len();
        for msg in sent {
            self.write_outbound(&msg);
        }
    }

    fn write_outbound(&mut self, msg: &SendMessage) {
        let ts = self.stamp();
        let indent = " ".repeat(ts.len() + msg.chat_id.to_string().len() + 3);
        for (i, line) in msg.text.lines().enumerate() {
            if i == 0 {
                self.transcript.push_str(&format!("{ts} {}< {line}\n", msg.chat_id));
            } else {
                self.transcript.push_str(&format!("{indent}{line}\n"));
            }
        }
        let buttons: Vec<InlineKeyboardButton> = msg.buttons().cloned().collect();
        if !buttons.is_empty() {
            let labels: Vec<String> = buttons.iter().map(|b| format!("[{}]", b.text)).collect();
            self.transcript.push_str(&format!("{indent}{}\n", labels.join(" ")));
            self.keyboards.insert(msg.chat_id, buttons);
        }
    }

    pub fn report(&mut self, patient: &PatientId, days: i64) -> Result<(), GatewayError> {
        let now = self.clock.now();
        let window = Window::new(now - Duration::days(days), now)?;
        let report = provider::get_report(
            &self.gateway.store().snapshot(),
            patient,
            &window,
            &self.gateway.config().thresholds,
        )?;
        let ts = self.stamp();
        let body = serde_json::to_string(&report).expect("reports serialize");
        self.transcript.push_str(&format!("{ts} report {patient} {body}\n"));
        Ok(())
    }

    pub fn roster(&mut self) -> Result<(), GatewayError> {
        let roster = provider::list_patients(
            &self.gateway.store().snapshot(),
            self.clock.now(),
            &self.gateway.config().thresholds,
        )?;
        let ts = self.stamp();
        let body = serde_json::to_string(&roster).expect("rosters serialize");
        self.transcript.push_str(&format!("{ts} roster {body}\n"));
        Ok(())
    }

    pub fn intervene(&mut self, patient: &PatientId, body: &str) -> Result<(), GatewayError> {
        let ts = self.stamp();
        self.transcript.push_str(&format!("{ts} provider -> {patient}: {body}\n"));
        self.gateway.post_intervention(patient, body)?;
        self.drain();
        Ok(())
    }

    pub fn run(&mut self, script: &Script) -> Result<(), SimulationError> {
        for (i, step) in script.steps.iter().enumerate() {
            let fail = |reason: String| SimulationError::Step { step: i + 1, reason };
            match step {
                Step::Say { say, chat } => self.say(chat.unwrap_or(script.chat), say)?,
                Step::Tap { tap, chat } => self.tap(chat.unwrap_or(script.chat), tap).map_err(fail)?,
                Step::Advance { advance_minutes } => self.advance(*advance_minutes, script.tick_minutes)?,
                Step::Report { report, days } => self.report(report, days.unwrap_or(7))?,
                Step::Roster { roster } => {
                    if *roster {
                        self.roster()?;
                    }
                }
                Step::Intervene { intervene, body } => self.intervene(intervene, body)?,
            }
        }
        Ok(())
    }
}

/// Runs a script against a fresh in-memory store and returns the transcript.
pub fn run_script(script: &Script, config: Config) -> Result<String, SimulationError> {
    let mut sim = Simulation::new(script.start, Arc::new(Store::in_memory()), config);
    sim.run(script)?;
    Ok(sim.transcript.clone())
}
