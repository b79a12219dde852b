pub mod analytics;
pub mod dialogue;
pub mod domain;
pub mod knowledge;
pub mod scheduler;
