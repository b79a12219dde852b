use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};

use roberto_core::domain::{Instant, PatientId};

use crate::event::{DomainEvent, EventKind, EventPayload};
use crate::log::{open_file, Backend, MemoryBackend};
use crate::views::Views;
use crate::StoreError;

/// Which events a query returns. Empty fields match everything; the window
/// is half-open on `at`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryFilter {
    pub patient_id: Option<PatientId>,
    pub kinds: Option<BTreeSet<EventKind>>,
    pub window: Option<(Instant, Instant)>,
}

impl QueryFilter {
    pub fn patient(patient_id: PatientId) -> Self {
        Self {
            patient_id: Some(patient_id),
            ..Self::default()
        }
    }

    pub fn kinds(mut self, kinds: impl IntoIterator<Item = EventKind>) -> Self {
        self.kinds = Some(kinds.into_iter().collect());
        self
    }

    pub fn window(mut self, start: Instant, end: Instant) -> Self {
        self.window = Some((start, end));
        self
    }

    pub fn matches(&self, event: &DomainEvent) -> bool {
        self.patient_id.as_ref().is_none_or(|p| p == &event.patient_id)
            && self
                .kinds
                .as_ref()
                .is_none_or(|k| k.contains(&event.payload.kind()))
            && self
                .window
                .is_none_or(|(start, end)| start <= event.at && event.at < end)
    }
}

struct Writer {
    backend: Box<dyn Backend>,
    views: Views,
}

/// The event log and its views.
///
/// Appends are serialized globally so sequence numbers are gap-free; reads
/// work on immutable snapshots and never block writers for long.
pub struct Store {
    writer: Mutex<Writer>,
    snapshot: RwLock<Arc<Views>>,
    events: RwLock<Vec<DomainEvent>>,
    patient_locks: Mutex<HashMap<PatientId, Arc<Mutex<()>>>>,
}

impl Store {
    pub fn in_memory() -> Self {
        Self::with_backend(Box::new(MemoryBackend), Vec::new(), Views::default())
    }

    /// Opens a log file, creating it when missing, and replays it.
    pub fn open(path: &Path) -> Result<Self, StoreError> {
        let (events, backend) = open_file(path)?;
        let views = crate::replay(&events)?;
        Ok(Self::with_backend(Box::new(backend), events, views))
    }

    fn with_backend(backend: Box<dyn Backend>, events: Vec<DomainEvent>, views: Views) -> Self {
        Self {
            snapshot: RwLock::new(Arc::new(views.clone())),
            events: RwLock::new(events),
            writer: Mutex::new(Writer { backend, views }),
            patient_locks: Mutex::new(HashMap::new()),
        }
    }

    /// Appends one event. It is durable and visible in snapshots when this
    /// returns. Events that do not apply to the current views are rejected
    /// without being written.
    pub fn append(
        &self,
        patient_id: &PatientId,
        payload: EventPayload,
        at: Instant,
    ) -> Result<DomainEvent, StoreError> {
        let mut writer = self.writer.lock().expect("store writer poisoned");
        let event = DomainEvent {
            seq: writer.views.last_seq + 1,
            at,
            patient_id: patient_id.clone(),
            payload,
        };
        writer.views.apply(&event).map_err(|e| match e {
            StoreError::CorruptLog { reason, .. } => StoreError::Rejected {
                patient_id: patient_id.clone(),
                reason,
            },
            other => other,
        })?;
        let line = serde_json::to_string(&event).expect("events serialize");
        if let Err(e) = writer.backend.append(&line) {
            // Not durable, so not applied.
            writer.views = self.snapshot().as_ref().clone();
            return Err(e.into());
        }
        self.events.write().expect("events poisoned").push(event.clone());
        *self.snapshot.write().expect("snapshot poisoned") = Arc::new(writer.views.clone());
        Ok(event)
    }

    /// Appends several events for one patient, stopping at the first failure.
    pub fn append_all(
        &self,
        patient_id: &PatientId,
        payloads: impl IntoIterator<Item = EventPayload>,
        at: Instant,
    ) -> Result<Vec<DomainEvent>, StoreError> {
        payloads
            .into_iter()
            .map(|p| self.append(patient_id, p, at))
            .collect()
    }

    /// The views as of the last completed append.
    pub fn snapshot(&self) -> Arc<Views> {
        self.snapshot.read().expect("snapshot poisoned").clone()
    }

    /// A copy of the whole log.
    pub fn events(&self) -> Vec<DomainEvent> {
        self.events.read().expect("events poisoned").clone()
    }

    /// Matching events ordered by `(at, seq)`.
    pub fn query(&self, filter: &QueryFilter) -> Vec<DomainEvent> {
        let mut out: Vec<DomainEvent> = self
            .events
            .read()
            .expect("events poisoned")
            .iter()
            .filter(|e| filter.matches(e))
            .cloned()
            .collect();
        out.sort_by(|a, b| a.at.cmp(&b.at).then(a.seq.cmp(&b.seq)));
        out
    }

    /// Token that serializes work on one patient. Hold its lock for the whole
    /// read-decide-append cycle of an update.
    pub fn patient_lock(&self, patient_id: &PatientId) -> Arc<Mutex<()>> {
        self.patient_locks
            .lock()
            .expect("patient locks poisoned")
            .entry(patient_id.clone())
            .or_default()
            .clone()
    }
}
