use std::sync::Mutex;

use chrono::{Duration, Utc};
use roberto_core::domain::Instant;

/// Source of "now". Injected so that tests run on a virtual timeline.
pub trait Clock: Send + Sync {
    fn now(&self) -> Instant;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> Instant {
        Utc::now()
    }
}

/// A clock that only moves when told to.
#[derive(Debug)]
pub struct VirtualClock {
    now: Mutex<Instant>,
}

impl VirtualClock {
    pub fn new(start: Instant) -> Self {
        Self {
            now: Mutex::new(start),
        }
    }

    pub fn set(&self, at: Instant) {
        *self.now.lock().expect("clock poisoned") = at;
    }

    pub fn advance(&self, by: Duration) -> Instant {
        let mut now = self.now.lock().expect("clock poisoned");
        *now += by;
        *now
    }
}

impl Clock for VirtualClock {
    fn now(&self) -> Instant {
        *self.now.lock().expect("clock poisoned")
    }
}
