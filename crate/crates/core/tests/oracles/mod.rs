//! Brute-force reference implementations used by the integration and
//! acceptance tests. Each one takes the slow, obvious route and shares no code
//! path with the implementation it checks.
#![allow(dead_code)]

pub mod adherence;
pub mod recurrence;
pub mod triage;
