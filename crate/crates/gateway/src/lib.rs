//! Service shell for the Roberto assistant: a Telegram-compatible webhook
//! and a console chat channel, the clock loop that drives reminders, and the
//! HTTP API providers use to follow their patients.

pub mod api;
pub mod clock;
pub mod config;
pub mod ingest;
pub mod outbound;
pub mod provider;
mod runtime;
mod service;
pub mod simulate;
pub mod wire;

use roberto_core::analytics::AnalyticsError;
use roberto_core::domain::{AlertId, PatientId};
use roberto_store::StoreError;
use thiserror::Error;

pub use clock::{Clock, SystemClock, VirtualClock};
pub use config::Config;
pub use ingest::{ChannelKind, NormalizedUpdate};
pub use runtime::TickReport;
pub use service::{Gateway, IngestOutcome};

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("malformed payload: {0}")]
    MalformedPayload(String),
    #[error("no chat channel registered for {0}")]
    ChannelUnavailable(PatientId),
    #[error("missing or wrong bearer token")]
    Unauthorized,
    #[error("unknown patient {0}")]
    UnknownPatient(PatientId),
    #[error("unknown alert {0}")]
    UnknownAlert(AlertId),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl From<AnalyticsError> for GatewayError {
    fn from(e: AnalyticsError) -> Self {
        match e {
            AnalyticsError::UnknownPatient(p) => Self::UnknownPatient(p),
            other => Self::BadRequest(other.to_string()),
        }
    }
}

/// Engine over the dialogue script and knowledge file shipped with the core
/// crate.
pub fn bundled_engine() -> roberto_core::dialogue::DialogueEngine {
    use roberto_core::knowledge::{load_kb, BUNDLED_KB};
    let kb = load_kb(BUNDLED_KB).expect("bundled knowledge file is valid");
    roberto_core::dialogue::DialogueEngine::new(
        roberto_core::dialogue::DialogueScript::bundled(),
        std::sync::Arc::new(kb),
    )
}
