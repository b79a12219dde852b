//! Brute-force outcome counting over raw dose event logs.

use chrono::Duration;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use roberto_core::domain::{
    transition_dose, DoseEvent, Instant, MedicationId, ReminderPrefs, ScheduledDose,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RawEvent {
    Remind,
    Taken,
    Skipped,
    Expire,
}

#[derive(Debug, Clone)]
pub struct RawDose {
    pub due_at: Instant,
    /// In time order.
    pub events: Vec<(Instant, RawEvent)>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub taken: u32,
    pub skipped: u32,
    pub missed: u32,
}

/// The first outcome event decides the dose; reminders never do.
pub fn outcome(dose: &RawDose) -> Option<RawEvent> {
    dose.events
        .iter()
        .map(|(_, e)| *e)
        .find(|e| *e != RawEvent::Remind)
}

pub fn tally(doses: &[RawDose], start: Instant, end: Instant) -> Tally {
    let mut t = Tally::default();
    for dose in doses {
        if dose.due_at < start || dose.due_at >= end {
            continue;
        }
        match outcome(dose) {
            Some(RawEvent::Taken) => t.taken += 1,
            Some(RawEvent::Skipped) => t.skipped += 1,
            Some(RawEvent::Expire) => t.missed += 1,
            _ => {}
        }
    }
    t
}

/// A random log: doses every few hours from `origin`, each with reminders
/// and at most one outcome. Expiry comes after the response window.
pub fn random_log(rng: &mut ChaCha8Rng, origin: Instant, n: usize, prefs: &ReminderPrefs) -> Vec<RawDose> {
    let mut due = origin;
    (0..n)
        .map(|_| {
            due += Duration::minutes(rng.random_range(60..720));
            let mut events = Vec::new();
            let mut at = due;
            for _ in 0..rng.random_range(0..=prefs.max_reminders_per_dose) {
                at += Duration::minutes(rng.random_range(0..10));
                events.push((at, RawEvent::Remind));
            }
            match rng.random_range(0..4) {
                0 => events.push((at + Duration::minutes(3), RawEvent::Taken)),
                1 => events.push((at + Duration::minutes(3), RawEvent::Skipped)),
                2 => events.push((due + prefs.response_window(), RawEvent::Expire)),
                _ => {}
            }
            RawDose { due_at: due, events }
        })
        .collect()
}

/// Replays a raw log through the state machine.
pub fn replay(dose: &RawDose, prefs: &ReminderPrefs) -> ScheduledDose {
    let mut d = ScheduledDose::pending(MedicationId::new("m"), dose.due_at);
    for (at, event) in &dose.events {
        let event = match event {
            RawEvent::Remind => DoseEvent::Remind,
            RawEvent::Taken => DoseEvent::ReportTaken,
            RawEvent::Skipped => DoseEvent::ReportSkipped { reason: None },
            RawEvent::Expire => DoseEvent::Expire,
        };
        d = transition_dose(&d, event, *at, prefs).expect("generated logs are legal");
    }
    d
}
