use chrono::{Days, Duration, LocalResult, NaiveDateTime, TimeZone, Timelike, Utc};
use chrono_tz::Tz;
use thiserror::Error;

use crate::domain::{Instant, Regimen};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("local time {local} cannot be placed on the {tz} timeline")]
    UnresolvableLocalTime { local: NaiveDateTime, tz: Tz },
}

/// Longest run of non-existent local minutes searched when a wall-clock time
/// falls in a transition gap.
const MAX_GAP_MINUTES: i64 = 24 * 60;

/// Maps a local wall-clock time onto the UTC timeline.
///
/// In a spring-forward gap the result is the first valid instant after the
/// gap; in a fall-back overlap it is the earlier of the two occurrences.
pub fn resolve_local(tz: &Tz, local: NaiveDateTime) -> Result<Instant, ScheduleError> {
    match tz.from_local_datetime(&local) {
        LocalResult::Single(t) => Ok(t.with_timezone(&Utc)),
        LocalResult::Ambiguous(a, b) => Ok(a.min(b).with_timezone(&Utc)),
        LocalResult::None => {
            let base = local
                .with_second(0)
                .and_then(|l| l.with_nanosecond(0))
                .unwrap_or(local);
            (1..=MAX_GAP_MINUTES)
                .find_map(|m| match tz.from_local_datetime(&(base + Duration::minutes(m))) {
                    LocalResult::Single(t) => Some(t.with_timezone(&Utc)),
                    LocalResult::Ambiguous(a, b) => Some(a.min(b).with_timezone(&Utc)),
                    LocalResult::None => None,
                })
                .ok_or(ScheduleError::UnresolvableLocalTime { local, tz: *tz })
        }
    }
}

/// Earliest due instant of `regimen` strictly after `after`, or `None` once
/// the regimen has ended.
pub fn next_due(regimen: &Regimen, after: Instant, tz: &Tz) -> Result<Option<Instant>, ScheduleError> {
    if regimen.times_of_day.is_empty() || regimen.days_of_week.is_empty() {
        return Ok(None);
    }
    // Resolution never moves an instant earlier than its wall-clock time by
    // more than a day, so starting one local day back is enough.
    let local_after = after.with_timezone(tz).date_naive();
    let mut date = local_after
        .checked_sub_days(Days::new(1))
        .unwrap_or(local_after)
        .max(regimen.start_date);
    // Every weekday appears within a week of any date.
    let horizon = date
        .checked_add_days(Days::new(9))
        .unwrap_or(chrono::NaiveDate::MAX);

    while date <= horizon {
        if regimen.end_date.is_some_and(|end| date > end) {
            return Ok(None);
        }
        if regimen.active_on(date) {
            for time in &regimen.times_of_day {
                let at = resolve_local(tz, date.and_time(*time))?;
                if at > after {
                    return Ok(Some(at));
                }
            }
        }
        date = match date.succ_opt() {
            Some(d) => d,
            None => return Ok(None),
        };
    }
    Ok(None)
}
