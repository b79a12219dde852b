use std::collections::BTreeSet;

use chrono::{Duration, NaiveDate, NaiveDateTime, NaiveTime, TimeZone, Timelike, Utc};
use chrono_tz::Tz;
use rand::Rng;
use roberto_core::domain::{Instant, Regimen, WeekdaySet};

/// Every due instant in `(from, to]`, found by walking the UTC timeline one
/// minute at a time.
///
/// A slot fires at the first minute whose local wall clock reaches it. The
/// running maximum of local time seen so far ("high water") makes repeated
/// wall-clock hours after a fall-back count once, and lets every slot skipped
/// by a spring-forward jump fire at the first minute after the jump.
pub fn due_instants(regimen: &Regimen, tz: &Tz, from: Instant, to: Instant) -> BTreeSet<Instant> {
    let local = |m: Instant| m.with_timezone(tz).naive_local();
    let mut high_water = (0..=24 * 60)
        .map(|back| local(from - Duration::minutes(back)))
        .max()
        .unwrap();
    let mut out = BTreeSet::new();
    let mut m = from + Duration::minutes(1);
    while m <= to {
        let l = local(m);
        if l > high_water {
            let mut slot = high_water + Duration::minutes(1);
            while slot <= l {
                if regimen_matches(regimen, slot) {
                    out.insert(m);
                }
                slot += Duration::minutes(1);
            }
            high_water = l;
        }
        m += Duration::minutes(1);
    }
    out
}

fn regimen_matches(regimen: &Regimen, slot: NaiveDateTime) -> bool {
    use chrono::Datelike;
    let date = slot.date();
    date >= regimen.start_date
        && regimen.end_date.is_none_or(|e| date <= e)
        && regimen.days_of_week.contains(date.weekday())
        && regimen.times_of_day.iter().any(|t| *t == slot.time())
}

/// Minute-aligned UTC instant.
pub fn utc(y: i32, mo: u32, d: u32, h: u32, mi: u32) -> Instant {
    Utc.with_ymd_and_hms(y, mo, d, h, mi, 0).unwrap()
}

pub const ZONES: [Tz; 8] = [
    Tz::UTC,
    chrono_tz::Europe::Rome,
    chrono_tz::Europe::Berlin,
    chrono_tz::America::New_York,
    chrono_tz::America::Sao_Paulo,
    chrono_tz::Australia::Sydney,
    chrono_tz::Australia::Lord_Howe,
    chrono_tz::Asia::Kolkata,
];

/// A random valid regimen plus zone and a 30-day horizon start.
pub fn random_case(rng: &mut impl Rng) -> (Regimen, Tz, Instant) {
    let tz = ZONES[rng.random_range(0..ZONES.len())];
    let n_times = rng.random_range(1..=4);
    let mut minutes: BTreeSet<u32> = BTreeSet::new();
    while minutes.len() < n_times {
        // Bias towards the small hours so DST transitions get exercised.
        let m = if rng.random_bool(0.3) {
            rng.random_range(0..4 * 60)
        } else {
            rng.random_range(0..24 * 60)
        };
        minutes.insert(m);
    }
    let times_of_day = minutes
        .iter()
        .map(|m| NaiveTime::from_hms_opt(m / 60, m % 60, 0).unwrap())
        .collect();
    let mut days = WeekdaySet::from_bits(rng.random_range(1..=127u8));
    if days.is_empty() {
        days = WeekdaySet::ALL;
    }
    // Horizons across 2026 so both hemispheres' transitions appear.
    let horizon_start = utc(2026, 1, 1, 0, 0)
        + Duration::days(rng.random_range(0..340))
        + Duration::minutes(rng.random_range(0..1440));
    let horizon_date = horizon_start.date_naive();
    let start_date = horizon_date + Duration::days(rng.random_range(-10..20));
    let end_date = rng
        .random_bool(0.4)
        .then(|| start_date + Duration::days(rng.random_range(0..40)));
    (
        Regimen {
            times_of_day,
            days_of_week: days,
            start_date,
            end_date,
        },
        tz,
        horizon_start.with_second(0).unwrap(),
    )
}

pub fn daily_at(h: u32, m: u32, start: NaiveDate) -> Regimen {
    Regimen {
        times_of_day: vec![NaiveTime::from_hms_opt(h, m, 0).unwrap()],
        days_of_week: WeekdaySet::ALL,
        start_date: start,
        end_date: None,
    }
}
