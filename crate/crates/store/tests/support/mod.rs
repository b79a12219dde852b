//! Generators for store tests.
#![allow(dead_code)]

use chrono::{Duration, NaiveDate, NaiveTime, TimeZone, Utc};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use roberto_core::dialogue::{ActiveFlow, ConversationSession, OutboundMessage};
use roberto_core::domain::{
    Alert, AlertKind, CheckIn, DoseEvent, DoseState, Instant, InterventionMessage, Medication,
    MedicationId, PatientId, PatientProfile, ProviderId, Regimen, ReminderPrefs, ScheduledDose,
    Sender, Severity, WeekdaySet,
};
use roberto_core::scheduler::ReminderKind;
use roberto_store::{DeliveryRecord, DeliveryStatus, DomainEvent, EventPayload, Views};

pub fn origin() -> Instant {
    Utc.with_ymd_and_hms(2026, 2, 1, 7, 0, 0).unwrap()
}

pub fn profile(patient: &PatientId) -> PatientProfile {
    PatientProfile {
        patient_id: patient.clone(),
        display_name: format!("Patient {patient}"),
        timezone: chrono_tz::Europe::Rome,
        provider_id: ProviderId::new("dr-rossi"),
        condition_tags: vec![],
        reminder_prefs: ReminderPrefs::default(),
    }
}

pub fn medication(patient: &PatientId, n: usize) -> Medication {
    Medication {
        medication_id: MedicationId::new(format!("{patient}:med{n}")),
        name: format!("Med {n}"),
        icon: None,
        photo_ref: None,
        dose_quantity: 10.0 * n as f64,
        dose_unit: "mg".into(),
        regimen: Regimen {
            times_of_day: vec![NaiveTime::from_hms_opt(8, 0, 0).unwrap()],
            days_of_week: WeekdaySet::ALL,
            start_date: NaiveDate::from_ymd_opt(2026, 2, 1).unwrap(),
            end_date: None,
        },
        instructions: None,
    }
}

/// A valid event sequence over a few patients with a clock that never goes
/// backwards. Uses a local fold to only pick events that apply.
pub fn random_events(rng: &mut ChaCha8Rng, n: usize) -> Vec<(PatientId, EventPayload, Instant)> {
    let patients: Vec<PatientId> = (0..3).map(|i| PatientId::new(format!("p{i}"))).collect();
    let mut views = Views::default();
    let mut out = Vec::new();
    let mut now = origin();
    fn push(
        views: &mut Views,
        out: &mut Vec<(PatientId, EventPayload, Instant)>,
        pid: &PatientId,
        payload: EventPayload,
        at: Instant,
    ) {
        let event = DomainEvent { seq: views.last_seq + 1, at, patient_id: pid.clone(), payload };
        if views.apply(&event).is_ok() {
            out.push((pid.clone(), event.payload, at));
        }
    }
    while out.len() < n {
        now += Duration::minutes(rng.random_range(0..40));
        let pid = patients.choose(rng).unwrap();
        let view = views.patient(pid).cloned();
        let Some(view) = view.filter(|v| v.profile.is_some()) else {
            let chat_id = 1000 + patients.iter().position(|p| p == pid).unwrap() as i64;
            push(&mut views, &mut out, pid, EventPayload::ChatRegistered { chat_id }, now);
            push(&mut views, &mut out, pid, EventPayload::ProfileSaved { profile: profile(pid) }, now);
            continue;
        };
        let open: Vec<&ScheduledDose> = view.doses.iter().filter(|d| !d.state.is_terminal()).collect();
        let payload = match rng.random_range(0..14) {
            0 => EventPayload::MedicationSaved { medication: medication(pid, view.medications.len() + 1) },
            1 | 2 => {
                let Some(med) = view.medications.choose(rng) else { continue };
                let due = now - Duration::minutes(rng.random_range(0..30));
                EventPayload::DoseScheduled { dose: ScheduledDose::pending(med.medication_id.clone(), due) }
            }
            3..=7 => {
                let Some(dose) = open.choose(rng) else { continue };
                let dose_id = dose.dose_id.clone();
                match rng.random_range(0..5) {
                    0 => EventPayload::ReminderFired {
                        kind: ReminderKind::RepeatReminder(dose.state.reminder_count() + 1),
                        dose_id,
                    },
                    1 => EventPayload::DoseReported { dose_id, event: DoseEvent::ReportTaken },
                    2 => EventPayload::DoseReported {
                        dose_id,
                        event: DoseEvent::ReportSkipped { reason: Some("ran out".into()) },
                    },
                    3 if matches!(dose.state, DoseState::Reminded { .. }) => EventPayload::DoseSnoozed { dose_id },
                    _ if now >= dose.due_at + Duration::minutes(60) => EventPayload::DoseExpired { dose_id },
                    _ => EventPayload::ReminderFired { kind: ReminderKind::InitialReminder, dose_id },
                }
            }
            8 => EventPayload::CheckInSaved {
                check_in: CheckIn {
                    at: now,
                    mood: rng.random_range(1..=5),
                    stress: rng.random_range(1..=5),
                    sleep_hours: f64::from(rng.random_range(0..=48)) / 2.0,
                    symptoms: vec![],
                    diet_note: None,
                    exercise_note: None,
                },
            },
            9 => EventPayload::AlertRaised {
                alert: Alert::raise(
                    AlertKind::SymptomFlag,
                    Severity::Low,
                    pid.clone(),
                    &format!("k{}", rng.random_range(0..20)),
                    now,
                    "flag",
                ),
            },
            10 => {
                let Some(alert) = view.alerts.choose(rng) else { continue };
                EventPayload::AlertAcked { alert_id: alert.alert_id.clone() }
            }
            11 => EventPayload::InterventionAppended {
                message: InterventionMessage {
                    patient_id: pid.clone(),
                    provider_id: ProviderId::new("dr-rossi"),
                    sender: if rng.random_bool(0.5) { Sender::Patient } else { Sender::Provider },
                    body: format!("message {}", out.len()),
                    sent_at: now,
                },
            },
            12 => EventPayload::SessionUpdated {
                session: ConversationSession {
                    active_flow: if rng.random_bool(0.5) { ActiveFlow::CheckIn } else { ActiveFlow::Idle },
                    ..ConversationSession::idle(pid.clone())
                },
            },
            _ => {
                let delivery_id = rng.random_range(1..6);
                EventPayload::DeliveryRecorded {
                    record: DeliveryRecord {
                        delivery_id,
                        channel: "webhook".into(),
                        message: OutboundMessage::text(pid.clone(), "hi"),
                        attempts: 1,
                        status: if rng.random_bool(0.5) {
                            DeliveryStatus::Delivered { at: now }
                        } else {
                            DeliveryStatus::Queued { next_attempt_at: now + Duration::seconds(2) }
                        },
                    },
                }
            }
        };
        push(&mut views, &mut out, pid, payload, now);
    }
    out.truncate(n);
    out
}

fn utc(d: u32, h: u32, m: u32) -> Instant {
    Utc.with_ymd_and_hms(2026, 2, d, h, m, 0).unwrap()
}

fn named_medication(patient: &str, name: &str, quantity: f64, h: u32) -> Medication {
    Medication {
        name: name.into(),
        dose_quantity: quantity,
        regimen: Regimen {
            times_of_day: vec![NaiveTime::from_hms_opt(h, 0, 0).unwrap()],
            ..medication(&PatientId::new(patient), 1).regimen
        },
        ..medication(&PatientId::new(patient), 1)
    }
}

/// Two patients over five days, 50 events. p1 takes four doses and skips
/// one; p2 takes two and then misses three, raising two streak alerts.
pub fn golden_scenario() -> Vec<(PatientId, EventPayload, Instant)> {
    let p1 = PatientId::new("p1");
    let p2 = PatientId::new("p2");
    let mut out = vec![
        (p1.clone(), EventPayload::ChatRegistered { chat_id: 101 }, utc(1, 10, 0)),
        (p1.clone(), EventPayload::ProfileSaved { profile: PatientProfile { display_name: "Ada".into(), ..profile(&p1) } }, utc(1, 10, 1)),
        (p1.clone(), EventPayload::MedicationSaved { medication: named_medication("p1", "Metformin", 500.0, 8) }, utc(1, 10, 2)),
        (p2.clone(), EventPayload::ChatRegistered { chat_id: 102 }, utc(1, 11, 0)),
        (p2.clone(), EventPayload::ProfileSaved { profile: PatientProfile { display_name: "Ben".into(), ..profile(&p2) } }, utc(1, 11, 1)),
        (p2.clone(), EventPayload::MedicationSaved { medication: named_medication("p2", "Lisinopril", 10.0, 9) }, utc(1, 11, 2)),
    ];
    let m1 = MedicationId::new("p1:med1");
    let m2 = MedicationId::new("p2:med1");
    for k in 0..5u32 {
        let day = 2 + k;
        let d1 = ScheduledDose::pending(m1.clone(), utc(day, 7, 0));
        let d2 = ScheduledDose::pending(m2.clone(), utc(day, 8, 0));
        out.push((p1.clone(), EventPayload::DoseScheduled { dose: d1.clone() }, utc(day, 0, 0)));
        out.push((p2.clone(), EventPayload::DoseScheduled { dose: d2.clone() }, utc(day, 0, 0)));
        out.push((p1.clone(), EventPayload::ReminderFired { dose_id: d1.dose_id.clone(), kind: ReminderKind::InitialReminder }, utc(day, 7, 0)));
        out.push((p2.clone(), EventPayload::ReminderFired { dose_id: d2.dose_id.clone(), kind: ReminderKind::InitialReminder }, utc(day, 8, 0)));
        if k == 3 {
            out.push((p1.clone(), EventPayload::DoseReported { dose_id: d1.dose_id.clone(), event: DoseEvent::ReportSkipped { reason: Some("felt sick".into()) } }, utc(day, 7, 10)));
        } else {
            out.push((p1.clone(), EventPayload::DoseReported { dose_id: d1.dose_id.clone(), event: DoseEvent::ReportTaken }, utc(day, 7, 5)));
        }
        if k < 2 {
            out.push((p2.clone(), EventPayload::DoseReported { dose_id: d2.dose_id.clone(), event: DoseEvent::ReportTaken }, utc(day, 8, 20)));
        } else {
            out.push((p2.clone(), EventPayload::ReminderFired { dose_id: d2.dose_id.clone(), kind: ReminderKind::RepeatReminder(2) }, utc(day, 8, 10)));
            out.push((p2.clone(), EventPayload::DoseExpired { dose_id: d2.dose_id.clone() }, utc(day, 9, 0)));
        }
    }
    let streak = |day: u32, severity| Alert {
        detail: "consecutive missed doses".into(),
        ..Alert::raise(AlertKind::MissedStreak, severity, p2.clone(), &format!("p2:med1@202602{day:02}T080000Z"), utc(day, 9, 0), String::new())
    };
    let medium = streak(5, Severity::Medium);
    let high = streak(6, Severity::High);
    let medium_id = medium.alert_id.clone();
    out.extend([
        (p2.clone(), EventPayload::AlertRaised { alert: medium }, utc(6, 12, 0)),
        (p2.clone(), EventPayload::AlertRaised { alert: high }, utc(6, 12, 0)),
        (p2.clone(), EventPayload::AlertAcked { alert_id: medium_id }, utc(6, 13, 0)),
        (p1.clone(), EventPayload::CheckInSaved { check_in: CheckIn { at: utc(6, 20, 0), mood: 4, stress: 2, sleep_hours: 7.5, symptoms: vec![], diet_note: None, exercise_note: Some("walk".into()) } }, utc(6, 20, 0)),
        (p1.clone(), EventPayload::CheckInSaved { check_in: CheckIn { at: utc(7, 20, 0), mood: 3, stress: 3, sleep_hours: 6.0, symptoms: vec!["headache".into()], diet_note: None, exercise_note: None } }, utc(7, 20, 0)),
        (p1.clone(), EventPayload::AlertRaised { alert: Alert::raise(AlertKind::SymptomFlag, Severity::Low, p1.clone(), "20260207T200000Z", utc(7, 20, 0), "Reported at check-in: headache") }, utc(7, 20, 0)),
        (p2.clone(), EventPayload::InterventionAppended { message: InterventionMessage { patient_id: p2.clone(), provider_id: ProviderId::new("dr-rossi"), sender: Sender::Provider, body: "How are you?".into(), sent_at: utc(7, 9, 0) } }, utc(7, 9, 0)),
        (p2.clone(), EventPayload::InterventionAppended { message: InterventionMessage { patient_id: p2.clone(), provider_id: ProviderId::new("dr-rossi"), sender: Sender::Patient, body: "Better, thanks".into(), sent_at: utc(7, 9, 30) } }, utc(7, 9, 30)),
        (p2.clone(), EventPayload::AppointmentRequested { note: "Blood pressure check".into() }, utc(7, 10, 0)),
        (p1.clone(), EventPayload::SessionUpdated { session: ConversationSession { active_flow: ActiveFlow::CheckIn, step: 2, ..ConversationSession::idle(p1.clone()) } }, utc(7, 21, 0)),
        (p1.clone(), EventPayload::DeliveryRecorded { record: DeliveryRecord { delivery_id: 1, channel: "webhook".into(), message: OutboundMessage::text(p1.clone(), "How many hours did you sleep last night?"), attempts: 1, status: DeliveryStatus::Delivered { at: utc(7, 21, 0) } } }, utc(7, 21, 0)),
    ]);
    out
}
