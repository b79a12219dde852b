use serde::{Deserialize, Serialize};

use super::metrics::count_doses;
use super::{classify_stage, AnalyticsError, BehaviourStage, Thresholds, Window, WEEK_DAYS};
use crate::domain::{Alert, CheckIn, Instant, Medication, PatientId, ScheduledDose};

/// Everything a report reads about one patient.
#[derive(Debug, Clone, Copy)]
pub struct PatientRecords<'a> {
    pub enrolled_at: Instant,
    pub medications: &'a [Medication],
    pub doses: &'a [ScheduledDose],
    pub check_ins: &'a [CheckIn],
    pub alerts: &'a [Alert],
}

pub trait RecordsSource {
    fn records(&self, patient_id: &PatientId) -> Option<PatientRecords<'_>>;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckInSummary {
    pub count: u32,
    pub mood: Option<f64>,
    pub stress: Option<f64>,
    pub sleep_hours: Option<f64>,
}

impl CheckInSummary {
    fn of<'a>(check_ins: impl Iterator<Item = &'a CheckIn>) -> Self {
        let (mut count, mut mood, mut stress, mut sleep) = (0u32, 0.0, 0.0, 0.0);
        for c in check_ins {
            count += 1;
            mood += f64::from(c.mood);
            stress += f64::from(c.stress);
            sleep += c.sleep_hours;
        }
        let mean = |sum: f64| (count > 0).then(|| sum / f64::from(count));
        Self {
            count,
            mood: mean(mood),
            stress: mean(stress),
            sleep_hours: mean(sleep),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdherenceReport {
    pub patient_id: PatientId,
    pub window: Window,
    pub doses_due: u32,
    pub taken: u32,
    pub skipped: u32,
    pub missed: u32,
    pub adherence_rate: Option<f64>,
    /// Change in rate against the previous window of the same length.
    pub trend_delta: Option<f64>,
    pub stage: BehaviourStage,
    pub checkin_summary: CheckInSummary,
    pub alerts_open: u32,
}

pub fn build_report(
    patient_id: &PatientId,
    window: &Window,
    source: &impl RecordsSource,
    thresholds: &Thresholds,
) -> Result<AdherenceReport, AnalyticsError> {
    let window = Window::new(window.start, window.end)?;
    let records = source
        .records(patient_id)
        .ok_or_else(|| AnalyticsError::UnknownPatient(patient_id.clone()))?;
    let counts = count_doses(records.doses, &window);
    let rate = counts.rate();
    let previous = count_doses(records.doses, &window.previous()).rate();
    let trend_delta = rate.zip(previous).map(|(now, before)| now - before);

    let week = Window::trailing_days(window.end, WEEK_DAYS)?;
    let weekly_rate = count_doses(records.doses, &week).rate();
    let tenure_days = (window.end - records.enrolled_at).num_days();
    let medications = records
        .medications
        .iter()
        .filter(|m| m.regimen.start_date <= window.end.date_naive())
        .count();
    let stage = classify_stage(tenure_days, medications, weekly_rate, thresholds);

    Ok(AdherenceReport {
        patient_id: patient_id.clone(),
        window,
        doses_due: counts.doses_due,
        taken: counts.taken,
        skipped: counts.skipped,
        missed: counts.missed,
        adherence_rate: rate,
        trend_delta,
        stage,
        checkin_summary: CheckInSummary::of(records.check_ins.iter().filter(|c| window.contains(c.at))),
        alerts_open: records
            .alerts
            .iter()
            .filter(|a| !a.acknowledged && a.created_at < window.end)
            .count() as u32,
    })
}
