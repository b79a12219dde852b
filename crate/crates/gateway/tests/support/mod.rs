#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use chrono::{NaiveDate, NaiveTime, TimeZone, Utc};
use http_body_util::BodyExt;
use roberto_core::domain::{
    Instant, Medication, MedicationId, PatientId, PatientProfile, ProviderId, Regimen, ReminderPrefs,
    WeekdaySet,
};
use roberto_gateway::api::{router, AppState};
use roberto_gateway::outbound::Outbox;
use roberto_gateway::{bundled_engine, Config, Gateway, VirtualClock};
use roberto_store::{EventPayload, Store};
use serde_json::json;
use tower::ServiceExt;

pub const TOKEN: &str = "test-token";

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn start() -> Instant {
    Utc.with_ymd_and_hms(2026, 3, 2, 6, 30, 0).unwrap()
}

pub fn config() -> Config {
    Config {
        auth_token: TOKEN.to_owned(),
        ..Config::default()
    }
}

pub struct Harness {
    pub clock: Arc<VirtualClock>,
    pub outbox: Arc<Outbox>,
    pub gateway: Arc<Gateway>,
}

impl Harness {
    pub fn new(store: Store, now: Instant, config: Config) -> Self {
        let clock = Arc::new(VirtualClock::new(now));
        let outbox = Arc::new(Outbox::new());
        let gateway = Arc::new(Gateway::new(
            Arc::new(store),
            bundled_engine(),
            clock.clone(),
            outbox.clone(),
            config,
        ));
        Self { clock, outbox, gateway }
    }

    pub fn empty() -> Self {
        Self::new(Store::in_memory(), start(), config())
    }

    pub fn app(&self) -> axum::Router {
        router(AppState {
            gateway: self.gateway.clone(),
            outbox: Some(self.outbox.clone()),
        })
    }

    pub fn text(&self, update_id: i64, chat: i64, text: &str) {
        let body = json!({ "update_id": update_id, "message": { "chat": { "id": chat }, "text": text } });
        self.gateway.ingest_webhook(body.to_string().as_bytes()).expect("update handled");
    }

    pub fn callback(&self, update_id: i64, chat: i64, data: &str) {
        let body = json!({ "update_id": update_id, "callback_query": { "data": data, "from": { "id": chat } } });
        self.gateway.ingest_webhook(body.to_string().as_bytes()).expect("update handled");
    }

    /// Texts sent to one chat, in order.
    pub fn sent_to(&self, chat: i64) -> Vec<String> {
        self.outbox
            .sent()
            .into_iter()
            .filter(|m| m.chat_id == chat)
            .map(|m| m.text)
            .collect()
    }
}

pub fn profile(pid: &PatientId, prefs: ReminderPrefs) -> PatientProfile {
    PatientProfile {
        patient_id: pid.clone(),
        display_name: "Test".into(),
        timezone: chrono_tz::UTC,
        provider_id: ProviderId::new("dr-rossi"),
        condition_tags: vec![],
        reminder_prefs: prefs,
    }
}

pub fn daily(pid: &PatientId, h: u32, m: u32, from: NaiveDate) -> Medication {
    Medication {
        medication_id: MedicationId::new(format!("{pid}:med1")),
        name: "Metformin".into(),
        icon: None,
        photo_ref: None,
        dose_quantity: 500.0,
        dose_unit: "mg".into(),
        regimen: Regimen {
            times_of_day: vec![NaiveTime::from_hms_opt(h, m, 0).unwrap()],
            days_of_week: WeekdaySet::ALL,
            start_date: from,
            end_date: None,
        },
        instructions: None,
    }
}

/// A registered patient with a profile and one daily medication, written
/// straight to the store.
pub fn enrolled(store: &Store, chat: i64, prefs: ReminderPrefs, med: Medication, at: Instant) -> PatientId {
    let pid = PatientId::new(format!("p-{chat}"));
    enrolled_as(store, chat, profile(&pid, prefs), med, at)
}

pub fn enrolled_as(store: &Store, chat: i64, profile: PatientProfile, med: Medication, at: Instant) -> PatientId {
    let pid = profile.patient_id.clone();
    store
        .append_all(
            &pid,
            [
                EventPayload::ChatRegistered { chat_id: chat },
                EventPayload::ProfileSaved { profile },
                EventPayload::MedicationSaved { medication: med },
            ],
            at,
        )
        .unwrap();
    pid
}

pub async fn call(
    app: &axum::Router,
    method: &str,
    path: &str,
    token: Option<&str>,
    body: Option<serde_json::Value>,
) -> (StatusCode, Vec<u8>) {
    let mut req = Request::builder().method(method).uri(path);
    if let Some(t) = token {
        req = req.header("authorization", format!("Bearer {t}"));
    }
    let body = match body {
        Some(b) => {
            req = req.header("content-type", "application/json");
            Body::from(b.to_string())
        }
        None => Body::empty(),
    };
    let response = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}
