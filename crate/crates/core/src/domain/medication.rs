use std::fmt;

use chrono::{Datelike, NaiveDate, NaiveTime, Timelike, Weekday};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::MedicationId;

/// Non-empty-or-not subset of the seven weekdays, stored as a bitmask with
/// Monday in bit 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct WeekdaySet(u8);

const DAY_NAMES: [&str; 7] = ["mon", "tue", "wed", "thu", "fri", "sat", "sun"];
const FULL_DAY_NAMES: [&str; 7] = [
    "monday",
    "tuesday",
    "wednesday",
    "thursday",
    "friday",
    "saturday",
    "sunday",
];

impl WeekdaySet {
    pub const EMPTY: Self = Self(0);
    pub const ALL: Self = Self(0b111_1111);
    pub const WEEKDAYS: Self = Self(0b001_1111);

    pub fn from_days(days: impl IntoIterator<Item = Weekday>) -> Self {
        days.into_iter().fold(Self::EMPTY, |acc, d| acc.with(d))
    }

    pub fn with(self, day: Weekday) -> Self {
        Self(self.0 | 1 << day.num_days_from_monday())
    }

    pub fn contains(self, day: Weekday) -> bool {
        self.0 & (1 << day.num_days_from_monday()) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn from_bits(bits: u8) -> Self {
        Self(bits & Self::ALL.0)
    }

    pub fn iter(self) -> impl Iterator<Item = Weekday> {
        (0..7u8)
            .filter(move |i| self.0 & (1 << i) != 0)
            .map(|i| Weekday::try_from(i).expect("index below 7"))
    }

    /// Parses a three-letter or full English day name ("mon", "Monday").
    pub fn parse_day(s: &str) -> Option<Weekday> {
        let s = s.trim().to_ascii_lowercase();
        DAY_NAMES
            .iter()
            .zip(FULL_DAY_NAMES)
            .position(|(short, full)| s == *short || s == full)
            .and_then(|i| Weekday::try_from(i as u8).ok())
    }
}

impl fmt::Display for WeekdaySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::ALL => f.write_str("every day"),
            Self::WEEKDAYS => f.write_str("weekdays"),
            set => {
                let names: Vec<_> = set
                    .iter()
                    .map(|d| DAY_NAMES[d.num_days_from_monday() as usize])
                    .collect();
                f.write_str(&names.join(", "))
            }
        }
    }
}

impl Serialize for WeekdaySet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(
            self.iter()
                .map(|d| DAY_NAMES[d.num_days_from_monday() as usize]),
        )
    }
}

impl<'de> Deserialize<'de> for WeekdaySet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let names = Vec::<String>::deserialize(deserializer)?;
        names.iter().try_fold(Self::EMPTY, |acc, name| {
            Self::parse_day(name)
                .map(|d| acc.with(d))
                .ok_or_else(|| serde::de::Error::custom(format!("unknown weekday `{name}`")))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regimen {
    pub times_of_day: Vec<NaiveTime>,
    pub days_of_week: WeekdaySet,
    pub start_date: NaiveDate,
    #[serde(default)]
    pub end_date: Option<NaiveDate>,
}

impl Regimen {
    /// Whether a dose is scheduled at this local date and wall-clock time.
    pub fn matches(&self, date: NaiveDate, time: NaiveTime) -> bool {
        self.active_on(date) && self.times_of_day.contains(&time)
    }

    pub fn active_on(&self, date: NaiveDate) -> bool {
        date >= self.start_date
            && self.end_date.is_none_or(|end| date <= end)
            && self.days_of_week.contains(date.weekday())
    }

    fn check(&self, errors: &mut Vec<FieldError>) {
        let times = &self.times_of_day;
        if times.is_empty() {
            errors.push(FieldError::new("regimen.times_of_day", "at least one time is required"));
        } else if times.windows(2).any(|w| w[0] >= w[1]) {
            errors.push(FieldError::new(
                "regimen.times_of_day",
                "times must be strictly increasing without duplicates",
            ));
        } else if times.iter().any(|t| t.second() != 0 || t.nanosecond() != 0) {
            errors.push(FieldError::new(
                "regimen.times_of_day",
                "times must fall on whole minutes",
            ));
        }
        if self.days_of_week.is_empty() {
            errors.push(FieldError::new("regimen.days_of_week", "at least one day is required"));
        }
        if let Some(end) = self.end_date {
            if end < self.start_date {
                errors.push(FieldError::new("regimen.end_date", "end date precedes start date"));
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Medication {
    pub medication_id: MedicationId,
    pub name: String,
    #[serde(default)]
    pub icon: Option<String>,
    /// Opaque reference to an uploaded photo; never interpreted.
    #[serde(default)]
    pub photo_ref: Option<String>,
    pub dose_quantity: f64,
    pub dose_unit: String,
    pub regimen: Regimen,
    #[serde(default)]
    pub instructions: Option<String>,
}

impl Medication {
    /// "500 mg"
    pub fn dose_label(&self) -> String {
        format!("{} {}", self.dose_quantity, self.dose_unit)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RegimenDraft {
    pub times_of_day: Vec<NaiveTime>,
    pub days_of_week: WeekdaySet,
    pub start_date: Option<NaiveDate>,
    pub end_date: Option<NaiveDate>,
}

/// A medication as collected from a patient, possibly incomplete.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MedicationDraft {
    pub medication_id: Option<MedicationId>,
    pub name: Option<String>,
    pub icon: Option<String>,
    pub photo_ref: Option<String>,
    pub dose_quantity: Option<f64>,
    pub dose_unit: Option<String>,
    pub regimen: RegimenDraft,
    pub instructions: Option<String>,
}

impl From<Medication> for MedicationDraft {
    fn from(m: Medication) -> Self {
        Self {
            medication_id: Some(m.medication_id),
            name: Some(m.name),
            icon: m.icon,
            photo_ref: m.photo_ref,
            dose_quantity: Some(m.dose_quantity),
            dose_unit: Some(m.dose_unit),
            regimen: RegimenDraft {
                times_of_day: m.regimen.times_of_day,
                days_of_week: m.regimen.days_of_week,
                start_date: Some(m.regimen.start_date),
                end_date: m.regimen.end_date,
            },
            instructions: m.instructions,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub reason: String,
}

impl FieldError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

/// Turns a draft into a valid [`Medication`], or reports every violated
/// invariant. One error per field.
pub fn validate_medication(draft: MedicationDraft) -> Result<Medication, Vec<FieldError>> {
    let mut errors = Vec::new();

    let medication_id = draft.medication_id.filter(|id| !id.as_str().trim().is_empty());
    if medication_id.is_none() {
        errors.push(FieldError::new("medication_id", "missing"));
    }
    let name = draft.name.map(|n| n.trim().to_owned()).filter(|n| !n.is_empty());
    if name.is_none() {
        errors.push(FieldError::new("name", "must not be empty"));
    }
    let dose_quantity = draft.dose_quantity.filter(|q| q.is_finite() && *q > 0.0);
    if dose_quantity.is_none() {
        errors.push(FieldError::new("dose_quantity", "must be a positive number"));
    }
    let dose_unit = draft
        .dose_unit
        .map(|u| u.trim().to_owned())
        .filter(|u| !u.is_empty());
    if dose_unit.is_none() {
        errors.push(FieldError::new("dose_unit", "must not be empty"));
    }
    if draft.regimen.start_date.is_none() {
        errors.push(FieldError::new("regimen.start_date", "missing"));
    }
    let regimen = Regimen {
        times_of_day: draft.regimen.times_of_day,
        days_of_week: draft.regimen.days_of_week,
        start_date: draft.regimen.start_date.unwrap_or(NaiveDate::MIN),
        end_date: draft.regimen.end_date,
    };
    regimen.check(&mut errors);

    match (medication_id, name, dose_quantity, dose_unit) {
        (Some(medication_id), Some(name), Some(dose_quantity), Some(dose_unit))
            if errors.is_empty() =>
        {
            Ok(Medication {
                medication_id,
                name,
                icon: draft.icon,
                photo_ref: draft.photo_ref,
                dose_quantity,
                dose_unit,
                regimen,
                instructions: draft.instructions,
            })
        }
        _ => Err(errors),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(h: u32, m: u32) -> NaiveTime {
        NaiveTime::from_hms_opt(h, m, 0).unwrap()
    }

    fn metformin() -> Medication {
        Medication {
            medication_id: MedicationId::new("p1:med1"),
            name: "Metformin".into(),
            icon: Some("pill".into()),
            photo_ref: None,
            dose_quantity: 500.0,
            dose_unit: "mg".into(),
            regimen: Regimen {
                times_of_day: vec![t(8, 0), t(20, 0)],
                days_of_week: WeekdaySet::ALL,
                start_date: NaiveDate::from_ymd_opt(2026, 10, 1).unwrap(),
                end_date: None,
            },
            instructions: Some("with food".into()),
        }
    }

    #[test]
    fn valid_draft_round_trips_unchanged() {
        let med = metformin();
        assert_eq!(validate_medication(med.clone().into()), Ok(med));
    }

    #[test]
    fn empty_name_and_zero_quantity_give_two_errors() {
        let mut draft = MedicationDraft::from(metformin());
        draft.name = Some(String::new());
        draft.dose_quantity = Some(0.0);
        let errors = validate_medication(draft).unwrap_err();
        assert_eq!(errors.len(), 2, "{errors:?}");
        assert_eq!(errors[0].field, "name");
        assert_eq!(errors[1].field, "dose_quantity");
    }

    #[test]
    fn duplicate_time_names_the_regimen_field() {
        let mut draft = MedicationDraft::from(metformin());
        draft.regimen.times_of_day = vec![t(8, 0), t(8, 0)];
        let errors = validate_medication(draft).unwrap_err();
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].field, "regimen.times_of_day");
    }

    #[test]
    fn end_before_start_and_no_days_are_rejected() {
        let mut draft = MedicationDraft::from(metformin());
        draft.regimen.days_of_week = WeekdaySet::EMPTY;
        draft.regimen.end_date = NaiveDate::from_ymd_opt(2026, 9, 1);
        let fields: Vec<_> = validate_medication(draft)
            .unwrap_err()
            .into_iter()
            .map(|e| e.field)
            .collect();
        assert_eq!(fields, ["regimen.days_of_week", "regimen.end_date"]);
    }

    #[test]
    fn empty_draft_reports_every_missing_field() {
        let errors = validate_medication(MedicationDraft::default()).unwrap_err();
        let fields: Vec<_> = errors.iter().map(|e| e.field.as_str()).collect();
        assert_eq!(
            fields,
            [
                "medication_id",
                "name",
                "dose_quantity",
                "dose_unit",
                "regimen.start_date",
                "regimen.times_of_day",
                "regimen.days_of_week"
            ]
        );
    }

    #[test]
    fn weekday_names_parse_and_serialize() {
        assert_eq!(WeekdaySet::parse_day("Mon"), Some(Weekday::Mon));
        assert_eq!(WeekdaySet::parse_day("wednesday"), Some(Weekday::Wed));
        assert_eq!(WeekdaySet::parse_day("mo"), None);
        assert_eq!(WeekdaySet::parse_day("monkey"), None);
        let set = WeekdaySet::from_days([Weekday::Mon, Weekday::Fri]);
        let json = serde_json::to_string(&set).unwrap();
        assert_eq!(json, r#"["mon","fri"]"#);
        assert_eq!(serde_json::from_str::<WeekdaySet>(&json).unwrap(), set);
        assert_eq!(set.to_string(), "mon, fri");
    }
}
