//! Event-sourced storage: every change is a [`DomainEvent`] appended to a
//! line-delimited log, and the current state is a fold over that log.

mod event;
mod log;
mod store;
mod views;

pub use event::{
    AppointmentRequest, DeliveryRecord, DeliveryStatus, DomainEvent, EventKind, EventPayload,
};
pub use log::{read_log, LOG_HEADER};
pub use store::{QueryFilter, Store};
pub use views::{replay, PatientView, Views};

use roberto_core::domain::PatientId;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("storage failure: {0}")]
    StorageFailure(#[from] std::io::Error),
    #[error("log is corrupt at seq {seq}: {reason}")]
    CorruptLog { seq: u64, reason: String },
    #[error("event for {patient_id} rejected: {reason}")]
    Rejected { patient_id: PatientId, reason: String },
}
