use std::collections::BTreeMap;
use std::sync::Arc;

use roberto_core::analytics::{PatientRecords, RecordsSource};
use roberto_core::dialogue::ConversationSession;
use roberto_core::domain::{
    transition_dose, validate_medication, Alert, AlertId, CheckIn, DoseEvent, DoseId, Instant,
    InterventionThread, Medication, PatientId, PatientProfile, ReminderPrefs, ScheduledDose,
};
use roberto_core::scheduler::{apply_snooze, BookEntry, ScheduleBook};

use crate::event::{AppointmentRequest, DeliveryRecord, DomainEvent, EventPayload};
use crate::StoreError;

/// Current state of one patient.
#[derive(Debug, Clone, PartialEq)]
pub struct PatientView {
    pub patient_id: PatientId,
    /// Time of the patient's first event.
    pub enrolled_at: Instant,
    pub last_activity: Instant,
    pub chat_id: Option<i64>,
    pub profile: Option<PatientProfile>,
    pub medications: Vec<Medication>,
    /// In scheduling order.
    pub doses: Vec<ScheduledDose>,
    pub check_ins: Vec<CheckIn>,
    pub alerts: Vec<Alert>,
    pub thread: InterventionThread,
    pub appointments: Vec<AppointmentRequest>,
    pub session: ConversationSession,
    pub deliveries: Vec<DeliveryRecord>,
}

impl PatientView {
    fn new(patient_id: PatientId, at: Instant) -> Self {
        Self {
            session: ConversationSession::idle(patient_id.clone()),
            patient_id,
            enrolled_at: at,
            last_activity: at,
            chat_id: None,
            profile: None,
            medications: Vec::new(),
            doses: Vec::new(),
            check_ins: Vec::new(),
            alerts: Vec::new(),
            thread: InterventionThread::default(),
            appointments: Vec::new(),
            deliveries: Vec::new(),
        }
    }

    pub fn prefs(&self) -> ReminderPrefs {
        self.profile
            .as_ref()
            .map_or_else(ReminderPrefs::default, |p| p.reminder_prefs.clone())
    }

    pub fn dose(&self, dose_id: &DoseId) -> Option<&ScheduledDose> {
        self.doses.iter().rev().find(|d| &d.dose_id == dose_id)
    }

    pub fn medication(&self, dose: &ScheduledDose) -> Option<&Medication> {
        self.medications
            .iter()
            .find(|m| m.medication_id == dose.medication_id)
    }

    pub fn open_alerts(&self) -> impl Iterator<Item = &Alert> {
        self.alerts.iter().filter(|a| !a.acknowledged)
    }

    fn dose_mut(&mut self, dose_id: &DoseId) -> Result<&mut ScheduledDose, String> {
        self.doses
            .iter_mut()
            .rev()
            .find(|d| &d.dose_id == dose_id)
            .ok_or_else(|| format!("unknown dose {dose_id}"))
    }
}

/// Everything derived from the log. Patients are shared so that snapshots
/// stay cheap to take.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Views {
    pub last_seq: u64,
    pub patients: BTreeMap<PatientId, Arc<PatientView>>,
    pub chats: BTreeMap<i64, PatientId>,
    pub alert_owners: BTreeMap<AlertId, PatientId>,
}

impl Views {
    pub fn patient(&self, patient_id: &PatientId) -> Option<&PatientView> {
        self.patients.get(patient_id).map(Arc::as_ref)
    }

    pub fn patient_for_chat(&self, chat_id: i64) -> Option<&PatientId> {
        self.chats.get(&chat_id)
    }

    pub fn alert(&self, alert_id: &AlertId) -> Option<&Alert> {
        let owner = self.alert_owners.get(alert_id)?;
        self.patient(owner)?
            .alerts
            .iter()
            .find(|a| &a.alert_id == alert_id)
    }

    /// Open doses of every patient, for the scheduler.
    pub fn schedule_book(&self) -> ScheduleBook {
        let mut entries = Vec::new();
        for view in self.patients.values() {
            let Some(profile) = &view.profile else { continue };
            for dose in view.doses.iter().filter(|d| !d.state.is_terminal()) {
                entries.push(BookEntry {
                    patient_id: view.patient_id.clone(),
                    timezone: profile.timezone,
                    prefs: profile.reminder_prefs.clone(),
                    dose: dose.clone(),
                });
            }
        }
        ScheduleBook { entries }
    }

    /// Applies one event. On error the views are left unchanged.
    pub fn apply(&mut self, event: &DomainEvent) -> Result<(), StoreError> {
        let expected = self.last_seq + 1;
        if event.seq != expected {
            return Err(StoreError::CorruptLog {
                seq: event.seq,
                reason: format!("expected seq {expected}"),
            });
        }
        let created = !self.patients.contains_key(&event.patient_id);
        match self.fold(event) {
            Ok(()) => {
                self.last_seq = event.seq;
                Ok(())
            }
            Err(reason) => {
                if created {
                    self.patients.remove(&event.patient_id);
                }
                Err(StoreError::CorruptLog {
                    seq: event.seq,
                    reason,
                })
            }
        }
    }

    /// Every arm checks before it mutates, so a failed fold leaves the
    /// views as they were, apart from a freshly created patient entry.
    fn fold(&mut self, event: &DomainEvent) -> Result<(), String> {
        let pid = &event.patient_id;
        let at = event.at;
        if let EventPayload::ChatRegistered { chat_id } = &event.payload {
            match self.chats.get(chat_id) {
                Some(owner) if owner != pid => {
                    return Err(format!("chat {chat_id} already belongs to {owner}"));
                }
                _ => {
                    self.chats.insert(*chat_id, pid.clone());
                }
            }
        }
        if let EventPayload::AlertRaised { alert } = &event.payload {
            if alert.patient_id != *pid {
                return Err(format!("alert {} belongs to {}", alert.alert_id, alert.patient_id));
            }
            if self.alert_owners.contains_key(&alert.alert_id) {
                // Raising the same alert twice is a no-op.
                return Ok(());
            }
            self.alert_owners.insert(alert.alert_id.clone(), pid.clone());
        }
        let view = Arc::make_mut(
            self.patients
                .entry(pid.clone())
                .or_insert_with(|| Arc::new(PatientView::new(pid.clone(), at))),
        );
        let prefs = view.prefs();
        match &event.payload {
            EventPayload::ChatRegistered { chat_id } => view.chat_id = Some(*chat_id),
            EventPayload::ProfileSaved { profile } => {
                if profile.patient_id != *pid {
                    return Err(format!("profile of {} saved for {pid}", profile.patient_id));
                }
                profile.reminder_prefs.validate().map_err(|e| e.to_string())?;
                view.profile = Some(profile.clone());
            }
            EventPayload::MedicationSaved { medication } => {
                validate_medication(medication.clone().into()).map_err(|errors| {
                    errors.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
                })?;
                match view
                    .medications
                    .iter_mut()
                    .find(|m| m.medication_id == medication.medication_id)
                {
                    Some(existing) => *existing = medication.clone(),
                    None => view.medications.push(medication.clone()),
                }
            }
            EventPayload::DoseScheduled { dose } => {
                if view.dose(&dose.dose_id).is_some() {
                    return Err(format!("dose {} is already scheduled", dose.dose_id));
                }
                if dose.state.is_terminal() {
                    return Err(format!("dose {} scheduled in state {}", dose.dose_id, dose.state.name()));
                }
                view.doses.push(dose.clone());
            }
            EventPayload::ReminderFired { dose_id, .. } => {
                let dose = view.dose_mut(dose_id)?;
                *dose = transition_dose(dose, DoseEvent::Remind, at, &prefs).map_err(|e| e.to_string())?;
            }
            EventPayload::DoseReported { dose_id, event } => {
                if matches!(event, DoseEvent::Remind | DoseEvent::Expire) {
                    return Err(format!("{} is not a patient report", event.name()));
                }
                let dose = view.dose_mut(dose_id)?;
                *dose = transition_dose(dose, event.clone(), at, &prefs).map_err(|e| e.to_string())?;
            }
            EventPayload::DoseSnoozed { dose_id } => {
                let dose = view.dose_mut(dose_id)?;
                *dose = apply_snooze(dose, at, &prefs).map_err(|e| e.to_string())?;
            }
            EventPayload::DoseExpired { dose_id } => {
                let dose = view.dose_mut(dose_id)?;
                *dose = transition_dose(dose, DoseEvent::Expire, at, &prefs).map_err(|e| e.to_string())?;
            }
            EventPayload::CheckInSaved { check_in } => {
                check_in.validate().map_err(|e| e.to_string())?;
                view.check_ins.push(check_in.clone());
            }
            EventPayload::AlertRaised { alert } => view.alerts.push(alert.clone()),
            EventPayload::AlertAcked { alert_id } => {
                let alert = view
                    .alerts
                    .iter_mut()
                    .find(|a| &a.alert_id == alert_id)
                    .ok_or_else(|| format!("unknown alert {alert_id}"))?;
                alert.acknowledge();
            }
            EventPayload::InterventionAppended { message } => {
                if message.patient_id != *pid {
                    return Err(format!("message for {} appended to {pid}", message.patient_id));
                }
                view.thread.push(message.clone());
            }
            EventPayload::AppointmentRequested { note } => view.appointments.push(AppointmentRequest {
                at,
                note: note.clone(),
            }),
            EventPayload::SessionUpdated { session } => {
                if session.patient_id != *pid {
                    return Err(format!("session of {} saved for {pid}", session.patient_id));
                }
                view.session = session.clone();
            }
            EventPayload::DeliveryRecorded { record } => {
                if record.message.patient_id != *pid {
                    return Err(format!("delivery for {} recorded on {pid}", record.message.patient_id));
                }
                match view
                    .deliveries
                    .iter_mut()
                    .find(|d| d.delivery_id == record.delivery_id)
                {
                    Some(existing) => *existing = record.clone(),
                    None => view.deliveries.push(record.clone()),
                }
            }
        }
        view.last_activity = view.last_activity.max(at);
        Ok(())
    }
}

impl RecordsSource for Views {
    fn records(&self, patient_id: &PatientId) -> Option<PatientRecords<'_>> {
        let view = self.patient(patient_id)?;
        Some(PatientRecords {
            enrolled_at: view.enrolled_at,
            medications: &view.medications,
            doses: &view.doses,
            check_ins: &view.check_ins,
            alerts: &view.alerts,
        })
    }
}

/// Folds a whole log into views.
pub fn replay(events: &[DomainEvent]) -> Result<Views, StoreError> {
    let mut views = Views::default();
    for event in events {
        views.apply(event)?;
    }
    Ok(views)
}
