use chrono::Days;
use roberto_core::analytics::{day_buckets, detect_adherence_drop, DROP_HISTORY_DAYS};
use roberto_core::domain::{AlertKind, DoseEvent, Instant, PatientId};
use roberto_core::scheduler::{escalation_for, tick, BookEntry, ScheduleBook};
use roberto_store::{EventPayload, PatientView};
use serde::Serialize;

use crate::service::Gateway;
use crate::GatewayError;

/// What one clock tick did.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TickReport {
    pub doses_scheduled: usize,
    pub reminders: usize,
    pub expired: usize,
    pub alerts: usize,
    pub redeliveries: usize,
}

impl TickReport {
    fn add(&mut self, other: Self) {
        self.doses_scheduled += other.doses_scheduled;
        self.reminders += other.reminders;
        self.expired += other.expired;
        self.alerts += other.alerts;
        self.redeliveries += other.redeliveries;
    }
}

fn book_for(view: &PatientView) -> ScheduleBook {
    let Some(profile) = &view.profile else {
        return ScheduleBook::default();
    };
    ScheduleBook {
        entries: view
            .doses
            .iter()
            .filter(|d| !d.state.is_terminal())
            .map(|dose| BookEntry {
                patient_id: view.patient_id.clone(),
                timezone: profile.timezone,
                prefs: profile.reminder_prefs.clone(),
                dose: dose.clone(),
            })
            .collect(),
    }
}

impl Gateway {
    /// One pass of the clock loop at the current time: schedule upcoming
    /// doses, send due reminders, expire unanswered doses and escalate,
    /// retry queued deliveries and check for adherence drops.
    pub fn tick(&self) -> Result<TickReport, GatewayError> {
        let now = self.clock.now();
        let patients: Vec<PatientId> = self.store.snapshot().patients.keys().cloned().collect();
        let mut report = TickReport::default();
        for pid in patients {
            let lock = self.store.patient_lock(&pid);
            let _guard = lock.lock().expect("patient lock poisoned");
            report.add(self.tick_patient_locked(&pid, now)?);
        }
        Ok(report)
    }

    fn tick_patient_locked(&self, pid: &PatientId, now: Instant) -> Result<TickReport, GatewayError> {
        let mut report = TickReport {
            doses_scheduled: self.schedule_doses_locked(pid, now)?,
            ..TickReport::default()
        };
        let snapshot = self.store.snapshot();
        let Some(view) = snapshot.patient(pid) else { return Ok(report) };
        let output = tick(now, &book_for(view));

        for reminder in &output.reminders {
            self.store.append(
                pid,
                EventPayload::ReminderFired {
                    dose_id: reminder.dose_id.clone(),
                    kind: reminder.kind,
                },
                now,
            )?;
            report.reminders += 1;
            let snapshot = self.store.snapshot();
            let view = snapshot.patient(pid).expect("patient exists");
            let (Some(profile), Some(dose)) = (&view.profile, view.dose(&reminder.dose_id)) else { continue };
            let Some(med) = view.medication(dose) else { continue };
            match self.engine.render_reminder(profile, dose, med, &reminder.kind) {
                Ok(msg) => {
                    self.dispatch_locked(&msg, now)?;
                }
                Err(e) => tracing::warn!(patient = %pid, "{e}"),
            }
        }

        for transition in output.transitions.iter().filter(|t| t.event == DoseEvent::Expire) {
            self.store.append(
                pid,
                EventPayload::DoseExpired {
                    dose_id: transition.dose_id.clone(),
                },
                now,
            )?;
            report.expired += 1;
            let snapshot = self.store.snapshot();
            let view = snapshot.patient(pid).expect("patient exists");
            let (Some(profile), Some(dose)) = (&view.profile, view.dose(&transition.dose_id)) else { continue };
            if let Some(med) = view.medication(dose) {
                let notice = self.engine.missed_notice(profile, dose, med);
                self.dispatch_locked(&notice, now)?;
            }
            if let Some(alert) = escalation_for(pid, dose, &view.doses, &self.config.escalation) {
                if snapshot.alert(&alert.alert_id).is_none() {
                    self.store.append(pid, EventPayload::AlertRaised { alert }, now)?;
                    report.alerts += 1;
                }
            }
        }

        let snapshot = self.store.snapshot();
        let view = snapshot.patient(pid).expect("patient exists");
        report.redeliveries = self.redeliver_locked(view, now)?;
        report.alerts += usize::from(self.check_drop_locked(view, now)?);
        Ok(report)
    }

    /// Looks at the last 14 complete local days. Only one drop alert is open
    /// per patient at a time.
    fn check_drop_locked(&self, view: &PatientView, now: Instant) -> Result<bool, GatewayError> {
        let Some(profile) = &view.profile else { return Ok(false) };
        if view.open_alerts().any(|a| a.kind == AlertKind::AdherenceDrop) {
            return Ok(false);
        }
        let today = now.with_timezone(&profile.timezone).date_naive();
        let Some(yesterday) = today.checked_sub_days(Days::new(1)) else { return Ok(false) };
        let history = day_buckets(&view.doses, profile.timezone, yesterday, DROP_HISTORY_DAYS);
        let Ok(Some(alert)) = detect_adherence_drop(&view.patient_id, &history, now, &self.config.thresholds) else {
            return Ok(false);
        };
        if view.alerts.iter().any(|a| a.alert_id == alert.alert_id) {
            return Ok(false);
        }
        self.store
            .append(&view.patient_id, EventPayload::AlertRaised { alert }, now)?;
        Ok(true)
    }
}
