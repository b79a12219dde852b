use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use roberto_core::analytics::Thresholds;
use roberto_core::domain::{ProviderId, ReminderPrefs};
use roberto_core::scheduler::EscalationPolicy;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Longest snooze a patient can pick during onboarding.
const LONGEST_SNOOZE_CHOICE: u32 = 30;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Reminder settings for new patients that onboarding does not ask about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReminderDefaults {
    pub max_reminders_per_dose: u32,
    pub response_window_minutes: u32,
}

impl Default for ReminderDefaults {
    fn default() -> Self {
        let prefs = ReminderPrefs::default();
        Self {
            max_reminders_per_dose: prefs.max_reminders_per_dose,
            response_window_minutes: prefs.response_window_minutes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeliveryConfig {
    /// Attempts before a message is marked failed.
    pub max_attempts: u32,
    /// Wait after the first failed attempt; doubles after each further one.
    pub backoff_base_secs: u32,
}

impl Default for DeliveryConfig {
    fn default() -> Self {
        Self {
            max_attempts: 5,
            backoff_base_secs: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub bind: SocketAddr,
    pub log_path: PathBuf,
    /// Static bearer token for the provider API. Placeholder auth only.
    pub auth_token: String,
    /// When set, webhook calls must carry it in `X-Telegram-Bot-Api-Secret-Token`.
    pub webhook_secret: Option<String>,
    pub tick_interval_secs: u64,
    /// How far ahead doses are put on the schedule.
    pub schedule_horizon_hours: u32,
    /// How many recent update ids are remembered for deduplication.
    pub dedup_window: usize,
    pub default_provider: ProviderId,
    pub thresholds: Thresholds,
    pub escalation: EscalationPolicy,
    pub reminders: ReminderDefaults,
    pub delivery: DeliveryConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            bind: SocketAddr::from(([127, 0, 0, 1], 8080)),
            log_path: PathBuf::from("roberto.log"),
            auth_token: "change-me".to_owned(),
            webhook_secret: None,
            tick_interval_secs: 30,
            schedule_horizon_hours: 24,
            dedup_window: 1024,
            default_provider: ProviderId::new("care-team"),
            thresholds: Thresholds::default(),
            escalation: EscalationPolicy::default(),
            reminders: ReminderDefaults::default(),
            delivery: DeliveryConfig::default(),
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: &str| Err(ConfigError::Invalid(m.to_owned()));
        if self.auth_token.trim().is_empty() {
            return invalid("auth_token must not be empty");
        }
        if self.tick_interval_secs == 0 {
            return invalid("tick_interval_secs must be at least 1");
        }
        if self.dedup_window == 0 {
            return invalid("dedup_window must be at least 1");
        }
        if self.delivery.max_attempts == 0 {
            return invalid("delivery.max_attempts must be at least 1");
        }
        if self.escalation.medium_streak > self.escalation.high_streak {
            return invalid("escalation.medium_streak must not exceed high_streak");
        }
        let t = &self.thresholds;
        for (name, v) in [
            ("sustain_rate", t.sustain_rate),
            ("floor_rate", t.floor_rate),
            ("drop_delta", t.drop_delta),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ConfigError::Invalid(format!("thresholds.{name} must be within [0, 1]")));
            }
        }
        let prefs = ReminderPrefs {
            snooze_minutes: LONGEST_SNOOZE_CHOICE,
            ..self.reminder_prefs()
        };
        prefs
            .validate()
            .map_err(|e| ConfigError::Invalid(format!("reminders: {e}")))
    }

    /// Prefs for a patient who has not chosen anything yet.
    pub fn reminder_prefs(&self) -> ReminderPrefs {
        ReminderPrefs {
            max_reminders_per_dose: self.reminders.max_reminders_per_dose,
            response_window_minutes: self.reminders.response_window_minutes,
            ..ReminderPrefs::default()
        }
    }
}
