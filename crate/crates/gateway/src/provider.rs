//! Provider-facing reads. Each is a pure function of a store snapshot.

use roberto_core::analytics::{build_report, AdherenceReport, BehaviourStage, Thresholds, Window, WEEK_DAYS};
use roberto_core::domain::{
    Alert, AlertKind, CheckIn, Instant, InterventionMessage, PatientId, ScheduledDose, Severity,
};
use roberto_store::Views;
use serde::{Deserialize, Serialize};

use crate::GatewayError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub patient_id: PatientId,
    /// `None` until onboarding is finished.
    pub display_name: Option<String>,
    pub stage: BehaviourStage,
    pub adherence_rate_7d: Option<f64>,
    pub open_alerts: u32,
    pub open_high_alerts: u32,
    pub last_activity: Instant,
}

/// Every patient, ordered by id. The dashboard applies its own sort.
pub fn list_patients(views: &Views, now: Instant, thresholds: &Thresholds) -> Result<Vec<RosterEntry>, GatewayError> {
    let week = Window::trailing_days(now, WEEK_DAYS)?;
    views
        .patients
        .values()
        .map(|view| {
            let report = build_report(&view.patient_id, &week, views, thresholds)?;
            Ok(RosterEntry {
                patient_id: view.patient_id.clone(),
                display_name: view.profile.as_ref().map(|p| p.display_name.clone()),
                stage: report.stage,
                adherence_rate_7d: report.adherence_rate,
                open_alerts: view.open_alerts().count() as u32,
                open_high_alerts: view.open_alerts().filter(|a| a.severity == Severity::High).count() as u32,
                last_activity: view.last_activity,
            })
        })
        .collect()
}

pub fn get_report(
    views: &Views,
    patient_id: &PatientId,
    window: &Window,
    thresholds: &Thresholds,
) -> Result<AdherenceReport, GatewayError> {
    Ok(build_report(patient_id, window, views, thresholds)?)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlertFilter {
    pub patient_id: Option<PatientId>,
    pub kind: Option<AlertKind>,
    /// Only unacknowledged alerts when true, only acknowledged when false.
    pub open: Option<bool>,
}

/// Matching alerts ordered by `(created_at, alert_id)`.
pub fn list_alerts(views: &Views, filter: &AlertFilter) -> Vec<Alert> {
    let mut alerts: Vec<Alert> = views
        .patients
        .values()
        .filter(|v| filter.patient_id.as_ref().is_none_or(|p| *p == v.patient_id))
        .flat_map(|v| v.alerts.iter())
        .filter(|a| filter.kind.is_none_or(|k| k == a.kind))
        .filter(|a| filter.open.is_none_or(|open| open != a.acknowledged))
        .cloned()
        .collect();
    alerts.sort_by(|a, b| a.created_at.cmp(&b.created_at).then_with(|| a.alert_id.cmp(&b.alert_id)));
    alerts
}

pub fn get_thread(views: &Views, patient_id: &PatientId) -> Result<Vec<InterventionMessage>, GatewayError> {
    let view = views
        .patient(patient_id)
        .ok_or_else(|| GatewayError::UnknownPatient(patient_id.clone()))?;
    Ok(view.thread.messages.clone())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineDose {
    #[serde(flatten)]
    pub dose: ScheduledDose,
    pub medication_name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub patient_id: PatientId,
    pub window: Window,
    /// Doses due in the window, by due time.
    pub doses: Vec<TimelineDose>,
    /// Check-ins made in the window, by time.
    pub check_ins: Vec<CheckIn>,
}

pub fn get_timeline(views: &Views, patient_id: &PatientId, window: &Window) -> Result<Timeline, GatewayError> {
    let view = views
        .patient(patient_id)
        .ok_or_else(|| GatewayError::UnknownPatient(patient_id.clone()))?;
    let mut doses: Vec<TimelineDose> = view
        .doses
        .iter()
        .filter(|d| window.contains(d.due_at))
        .map(|d| TimelineDose {
            medication_name: view.medication(d).map(|m| m.name.clone()),
            dose: d.clone(),
        })
        .collect();
    doses.sort_by(|a, b| a.dose.due_at.cmp(&b.dose.due_at).then_with(|| a.dose.dose_id.cmp(&b.dose.dose_id)));
    let mut check_ins: Vec<CheckIn> = view.check_ins.iter().filter(|c| window.contains(c.at)).cloned().collect();
    check_ins.sort_by_key(|c| c.at);
    Ok(Timeline {
        patient_id: patient_id.clone(),
        window: *window,
        doses,
        check_ins,
    })
}
