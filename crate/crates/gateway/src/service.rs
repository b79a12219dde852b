use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use chrono::Duration;
use roberto_core::analytics::taken_streak;
use roberto_core::dialogue::{DialogueContext, DialogueEngine, DomainCommand, Inbound, OutboundMessage};
use roberto_core::domain::{
    Alert, AlertId, Instant, InterventionMessage, PatientId, ScheduledDose, Sender,
};
use roberto_core::scheduler::next_due;
use roberto_store::{DeliveryRecord, DeliveryStatus, EventPayload, PatientView, Store, StoreError};

use crate::clock::Clock;
use crate::config::Config;
use crate::ingest::{parse_update, patient_id_for_chat, ChannelKind, DedupWindow, NormalizedUpdate};
use crate::outbound::{after_failure, Transport};
use crate::GatewayError;

/// Upper bound on doses put on the schedule for one medication in one pass.
const MAX_DOSES_PER_PASS: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub enum IngestOutcome {
    /// The update id was already handled; nothing was done.
    Duplicate { update_id: i64 },
    Handled {
        update: NormalizedUpdate,
        deliveries: Vec<DeliveryRecord>,
    },
}

/// Ties the store, the dialogue engine, the clock and one outbound channel
/// together. Every write for a patient happens while holding that patient's
/// lock from the store, so one patient's updates never interleave.
pub struct Gateway {
    pub(crate) store: Arc<Store>,
    pub(crate) engine: DialogueEngine,
    pub(crate) clock: Arc<dyn Clock>,
    pub(crate) transport: Arc<dyn Transport>,
    pub(crate) config: Config,
    dedup: Mutex<DedupWindow>,
    next_delivery: AtomicU64,
}

impl Gateway {
    pub fn new(
        store: Arc<Store>,
        engine: DialogueEngine,
        clock: Arc<dyn Clock>,
        transport: Arc<dyn Transport>,
        config: Config,
    ) -> Self {
        let last_delivery = store
            .snapshot()
            .patients
            .values()
            .flat_map(|v| v.deliveries.iter().map(|d| d.delivery_id))
            .max()
            .unwrap_or(0);
        Self {
            dedup: Mutex::new(DedupWindow::new(config.dedup_window)),
            next_delivery: AtomicU64::new(last_delivery + 1),
            store,
            engine,
            clock,
            transport,
            config,
        }
    }

    pub fn store(&self) -> &Arc<Store> {
        &self.store
    }

    pub fn engine(&self) -> &DialogueEngine {
        &self.engine
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn now(&self) -> Instant {
        self.clock.now()
    }

    /// Handles one webhook body. Duplicates are acknowledged without effect;
    /// a failed update is forgotten by the dedup window so a redelivery is
    /// processed again.
    pub fn ingest_webhook(&self, raw: &[u8]) -> Result<IngestOutcome, GatewayError> {
        let parsed = parse_update(raw)?;
        if !self.dedup.lock().expect("dedup poisoned").insert(parsed.update_id) {
            return Ok(IngestOutcome::Duplicate {
                update_id: parsed.update_id,
            });
        }
        let result = self
            .normalize(ChannelKind::Webhook, parsed.chat_id, parsed.kind)
            .and_then(|update| {
                let deliveries = self.handle(&update)?;
                Ok(IngestOutcome::Handled { update, deliveries })
            });
        if result.is_err() {
            self.dedup.lock().expect("dedup poisoned").remove(parsed.update_id);
        }
        result
    }

    /// Resolves a chat to its patient. A chat seen for the first time gets a
    /// new patient, whose first update then starts onboarding.
    pub fn normalize(
        &self,
        channel: ChannelKind,
        chat_id: i64,
        kind: Inbound,
    ) -> Result<NormalizedUpdate, GatewayError> {
        let received_at = self.clock.now();
        let patient_id = match self.store.snapshot().patient_for_chat(chat_id) {
            Some(p) => p.clone(),
            None => self.register_chat(chat_id, received_at)?,
        };
        Ok(NormalizedUpdate {
            channel,
            external_chat_id: chat_id,
            patient_id,
            kind,
            received_at,
        })
    }

    fn register_chat(&self, chat_id: i64, now: Instant) -> Result<PatientId, GatewayError> {
        let pid = patient_id_for_chat(chat_id);
        let lock = self.store.patient_lock(&pid);
        let _guard = lock.lock().expect("patient lock poisoned");
        if let Some(owner) = self.store.snapshot().patient_for_chat(chat_id) {
            return Ok(owner.clone());
        }
        tracing::info!(chat_id, patient = %pid, "registering new chat");
        self.store.append(&pid, EventPayload::ChatRegistered { chat_id }, now)?;
        Ok(pid)
    }

    /// Runs one update through the dialogue engine and applies the outcome.
    pub fn handle(&self, update: &NormalizedUpdate) -> Result<Vec<DeliveryRecord>, GatewayError> {
        let pid = &update.patient_id;
        let lock = self.store.patient_lock(pid);
        let _guard = lock.lock().expect("patient lock poisoned");
        let now = update.received_at;
        let snapshot = self.store.snapshot();
        let view = snapshot
            .patient(pid)
            .ok_or_else(|| GatewayError::UnknownPatient(pid.clone()))?;
        let ctx = DialogueContext {
            profile: view.profile.as_ref(),
            medications: &view.medications,
            doses: &view.doses,
            taken_streak: taken_streak(&view.doses),
            default_provider: &self.config.default_provider,
        };
        let turn = self.engine.handle_update(&view.session, &update.kind, now, &ctx);
        for command in turn.commands {
            self.apply_command(pid, view, command, now)?;
        }
        if turn.session != view.session {
            self.store
                .append(pid, EventPayload::SessionUpdated { session: turn.session }, now)?;
        }
        self.dispatch_all(&turn.messages, now)
    }

    fn apply_command(
        &self,
        pid: &PatientId,
        before: &PatientView,
        command: DomainCommand,
        now: Instant,
    ) -> Result<(), GatewayError> {
        let mut saved_medication = false;
        let payload = match command {
            DomainCommand::RecordDoseEvent { dose_id, event } => EventPayload::DoseReported { dose_id, event },
            DomainCommand::SnoozeDose { dose_id } => EventPayload::DoseSnoozed { dose_id },
            DomainCommand::SaveMedication { medication } => {
                saved_medication = true;
                EventPayload::MedicationSaved { medication }
            }
            DomainCommand::SaveProfile { mut profile } => {
                if before.profile.is_none() {
                    let defaults = self.config.reminder_prefs();
                    profile.reminder_prefs.max_reminders_per_dose = defaults.max_reminders_per_dose;
                    profile.reminder_prefs.response_window_minutes = defaults.response_window_minutes;
                }
                EventPayload::ProfileSaved { profile }
            }
            DomainCommand::SaveCheckIn { check_in } => EventPayload::CheckInSaved { check_in },
            DomainCommand::RaiseAlert { alert } => EventPayload::AlertRaised { alert },
            DomainCommand::AppendIntervention { message } => EventPayload::InterventionAppended { message },
            DomainCommand::RequestAppointment { note } => EventPayload::AppointmentRequested { note },
        };
        match self.store.append(pid, payload, now) {
            Ok(_) => {}
            // The engine decided on an older view; the store keeps the log
            // consistent and the turn goes on.
            Err(StoreError::Rejected { reason, .. }) => {
                tracing::warn!(patient = %pid, %reason, "command rejected");
                return Ok(());
            }
            Err(e) => return Err(e.into()),
        }
        if saved_medication {
            self.schedule_doses_locked(pid, now)?;
        }
        Ok(())
    }

    /// Puts every dose due before the horizon on the schedule. Doses due
    /// within the last response window are included, so a short outage
    /// does not silently drop them.
    pub(crate) fn schedule_doses_locked(&self, pid: &PatientId, now: Instant) -> Result<usize, GatewayError> {
        let snapshot = self.store.snapshot();
        let Some(view) = snapshot.patient(pid) else { return Ok(0) };
        let Some(profile) = &view.profile else { return Ok(0) };
        let horizon = now + Duration::hours(i64::from(self.config.schedule_horizon_hours));
        let earliest = now - profile.reminder_prefs.response_window();
        let mut scheduled = 0;
        for med in &view.medications {
            let mut after = view
                .doses
                .iter()
                .filter(|d| d.medication_id == med.medication_id)
                .map(|d| d.due_at)
                .max()
                .map_or(now, |latest| latest.max(earliest));
            for _ in 0..MAX_DOSES_PER_PASS {
                let due = match next_due(&med.regimen, after, &profile.timezone) {
                    Ok(Some(due)) if due <= horizon => due,
                    Ok(_) => break,
                    Err(e) => {
                        tracing::warn!(patient = %pid, medication = %med.medication_id, "{e}");
                        break;
                    }
                };
                let dose = ScheduledDose::pending(med.medication_id.clone(), due);
                if view.dose(&dose.dose_id).is_none() {
                    self.store.append(pid, EventPayload::DoseScheduled { dose }, now)?;
                    scheduled += 1;
                }
                after = due;
            }
        }
        Ok(scheduled)
    }

    fn dispatch_all(&self, messages: &[OutboundMessage], now: Instant) -> Result<Vec<DeliveryRecord>, GatewayError> {
        let mut records = Vec::with_capacity(messages.len());
        for msg in messages {
            match self.dispatch_locked(msg, now) {
                Ok(r) => records.push(r),
                Err(GatewayError::ChannelUnavailable(p)) => {
                    tracing::warn!(patient = %p, "message recorded as failed: no channel");
                }
                Err(e) => return Err(e),
            }
        }
        Ok(records)
    }

    /// Sends one message and records the delivery. A send failure leaves the
    /// message queued for redelivery; a patient without a chat gets a failed
    /// record and `ChannelUnavailable`.
    pub fn dispatch_outbound(&self, msg: &OutboundMessage) -> Result<DeliveryRecord, GatewayError> {
        let lock = self.store.patient_lock(&msg.patient_id);
        let _guard = lock.lock().expect("patient lock poisoned");
        self.dispatch_locked(msg, self.clock.now())
    }

    pub(crate) fn dispatch_locked(&self, msg: &OutboundMessage, now: Instant) -> Result<DeliveryRecord, GatewayError> {
        let pid = &msg.patient_id;
        let snapshot = self.store.snapshot();
        let Some(view) = snapshot.patient(pid) else {
            return Err(GatewayError::ChannelUnavailable(pid.clone()));
        };
        if let Err(e) = msg.validate() {
            tracing::warn!(patient = %pid, "outbound message breaks channel limits: {e}");
        }
        let delivery_id = self.next_delivery.fetch_add(1, Ordering::SeqCst);
        let status = match view.chat_id {
            Some(chat_id) => self.attempt(chat_id, msg, 1, now),
            None => DeliveryStatus::Failed {
                at: now,
                reason: "no registered chat".to_owned(),
            },
        };
        let record = DeliveryRecord {
            delivery_id,
            channel: self.transport.kind().as_str().to_owned(),
            message: msg.clone(),
            attempts: 1,
            status,
        };
        self.store
            .append(pid, EventPayload::DeliveryRecorded { record: record.clone() }, now)?;
        if view.chat_id.is_none() {
            return Err(GatewayError::ChannelUnavailable(pid.clone()));
        }
        Ok(record)
    }

    fn attempt(&self, chat_id: i64, msg: &OutboundMessage, attempts: u32, now: Instant) -> DeliveryStatus {
        match self.transport.send(chat_id, msg) {
            Ok(()) => DeliveryStatus::Delivered { at: now },
            Err(e) => {
                tracing::warn!(patient = %msg.patient_id, attempts, "{e}");
                after_failure(attempts, now, &e.0, &self.config.delivery)
            }
        }
    }

    /// Retries queued deliveries whose backoff has elapsed.
    pub(crate) fn redeliver_locked(&self, view: &PatientView, now: Instant) -> Result<usize, GatewayError> {
        let mut retried = 0;
        for record in &view.deliveries {
            let DeliveryStatus::Queued { next_attempt_at } = record.status else { continue };
            if next_attempt_at > now {
                continue;
            }
            let attempts = record.attempts + 1;
            let status = match view.chat_id {
                Some(chat_id) => self.attempt(chat_id, &record.message, attempts, now),
                None => after_failure(attempts, now, "no registered chat", &self.config.delivery),
            };
            let record = DeliveryRecord {
                attempts,
                status,
                ..record.clone()
            };
            self.store
                .append(&view.patient_id, EventPayload::DeliveryRecorded { record }, now)?;
            retried += 1;
        }
        Ok(retried)
    }

    /// Appends a care-team message to the patient's thread and sends it.
    pub fn post_intervention(&self, patient_id: &PatientId, body: &str) -> Result<InterventionMessage, GatewayError> {
        let body = body.trim();
        if body.is_empty() {
            return Err(GatewayError::BadRequest("message body is empty".into()));
        }
        let lock = self.store.patient_lock(patient_id);
        let _guard = lock.lock().expect("patient lock poisoned");
        let now = self.clock.now();
        let snapshot = self.store.snapshot();
        let view = snapshot
            .patient(patient_id)
            .ok_or_else(|| GatewayError::UnknownPatient(patient_id.clone()))?;
        let message = InterventionMessage {
            patient_id: patient_id.clone(),
            provider_id: view
                .profile
                .as_ref()
                .map_or_else(|| self.config.default_provider.clone(), |p| p.provider_id.clone()),
            sender: Sender::Provider,
            body: body.to_owned(),
            sent_at: now,
        };
        self.store.append(
            patient_id,
            EventPayload::InterventionAppended {
                message: message.clone(),
            },
            now,
        )?;
        let outbound = self.engine.provider_message(patient_id, body);
        self.dispatch_all(std::slice::from_ref(&outbound), now)?;
        Ok(message)
    }

    /// Acknowledges an alert. Acknowledging twice succeeds without a new
    /// event.
    pub fn ack_alert(&self, alert_id: &AlertId) -> Result<Alert, GatewayError> {
        let unknown = || GatewayError::UnknownAlert(alert_id.clone());
        let owner = self
            .store
            .snapshot()
            .alert_owners
            .get(alert_id)
            .cloned()
            .ok_or_else(unknown)?;
        let lock = self.store.patient_lock(&owner);
        let _guard = lock.lock().expect("patient lock poisoned");
        let alert = self.store.snapshot().alert(alert_id).cloned().ok_or_else(unknown)?;
        if alert.acknowledged {
            return Ok(alert);
        }
        let event = self.store.append(
            &owner,
            EventPayload::AlertAcked {
                alert_id: alert_id.clone(),
            },
            self.clock.now(),
        )?;
        tracing::info!(alert = %alert_id, seq = event.seq, "alert acknowledged");
        Ok(Alert {
            acknowledged: true,
            ..alert
        })
    }
}
