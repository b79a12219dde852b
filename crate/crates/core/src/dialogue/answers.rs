//! Parsing of typed answers.

use chrono::{NaiveTime, Timelike, Weekday};
use chrono_tz::Tz;

use crate::domain::WeekdaySet;

pub(crate) fn yes_no(text: &str) -> Option<bool> {
    match text.trim().to_lowercase().trim_end_matches(['.', '!']) {
        "yes" | "y" | "yes please" | "ok" | "okay" | "sure" | "save" | "send" | "confirm" => {
            Some(true)
        }
        "no" | "n" | "nope" | "discard" | "no thanks" => Some(false),
        _ => None,
    }
}

pub(crate) fn quantity(text: &str) -> Option<f64> {
    let first = text.split_whitespace().next()?.replace(',', ".");
    let value: f64 = first.parse().ok()?;
    (value.is_finite() && value > 0.0).then_some(value)
}

pub(crate) fn hours(text: &str) -> Option<f64> {
    let first = text.split_whitespace().next()?.replace(',', ".");
    let value: f64 = first.trim_end_matches('h').parse().ok()?;
    (0.0..=24.0).contains(&value).then_some(value)
}

pub(crate) fn scale(text: &str) -> Option<i64> {
    let value: i64 = text.trim().parse().ok()?;
    (1..=5).contains(&value).then_some(value)
}

pub(crate) fn unit(text: &str) -> Option<String> {
    let unit = text.trim();
    (!unit.is_empty() && unit.chars().count() <= 20 && !unit.contains(char::is_numeric))
        .then(|| unit.to_owned())
}

pub(crate) fn timezone(text: &str) -> Option<Tz> {
    let name = text.trim();
    chrono_tz::TZ_VARIANTS
        .iter()
        .copied()
        .find(|tz| tz.name().eq_ignore_ascii_case(name))
}

/// `"08:00, 20:00"`, `"8am and 8:30pm"`. Returns the times sorted; a repeated
/// time is rejected.
pub(crate) fn times(text: &str) -> Option<Vec<NaiveTime>> {
    let lower = text.to_lowercase().replace(" and ", ",");
    let mut out: Vec<NaiveTime> = Vec::new();
    for part in lower.split([',', ';']).flat_map(str::split_whitespace) {
        out.push(time_of_day(part)?);
    }
    out.sort();
    let before = out.len();
    out.dedup();
    (!out.is_empty() && out.len() == before).then_some(out)
}

fn time_of_day(s: &str) -> Option<NaiveTime> {
    let (clock, offset) = if let Some(c) = s.strip_suffix("am") {
        (c, Some(0))
    } else if let Some(c) = s.strip_suffix("pm") {
        (c, Some(12))
    } else {
        (s, None)
    };
    let (h, m) = match clock.split_once([':', '.']) {
        Some((h, m)) if m.len() == 2 => (h.parse::<u32>().ok()?, m.parse::<u32>().ok()?),
        Some(_) => return None,
        None => (clock.parse::<u32>().ok()?, 0),
    };
    let h = match offset {
        Some(add) if (1..=12).contains(&h) => h % 12 + add,
        Some(_) => return None,
        None => h,
    };
    NaiveTime::from_hms_opt(h, m, 0)
}

/// `"every day"`, `"weekdays"`, `"weekends"` or a list of day names.
pub(crate) fn days(text: &str) -> Option<WeekdaySet> {
    let lower = text.trim().to_lowercase();
    match lower.as_str() {
        "every day" | "everyday" | "daily" | "all" | "all days" => return Some(WeekdaySet::ALL),
        "weekdays" => return Some(WeekdaySet::WEEKDAYS),
        "weekends" | "weekend" => return Some(WeekdaySet::from_days([Weekday::Sat, Weekday::Sun])),
        _ => {}
    }
    let mut set = WeekdaySet::EMPTY;
    for word in lower.replace(" and ", ",").split([',', ' ']).filter(|w| !w.is_empty()) {
        set = set.with(WeekdaySet::parse_day(word)?);
    }
    (!set.is_empty()).then_some(set)
}

pub(crate) fn format_time(t: NaiveTime) -> String {
    format!("{:02}:{:02}", t.hour(), t.minute())
}

pub(crate) fn format_times(times: &[NaiveTime]) -> String {
    times.iter().map(|t| format_time(*t)).collect::<Vec<_>>().join(", ")
}
