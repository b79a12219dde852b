use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(value: impl Into<String>) -> Self {
                Self(value.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(value: &str) -> Self {
                Self(value.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(value: String) -> Self {
                Self(value)
            }
        }
    };
}

string_id!(
    /// Identifies a patient across the store, sessions and channels.
    PatientId
);
string_id!(ProviderId);
string_id!(MedicationId);
string_id!(
    /// Globally unique: derived from the medication id and the due instant.
    DoseId
);
string_id!(AlertId);
string_id!(SymptomId);
string_id!(ConditionId);
string_id!(
    /// Identifies an information document in the knowledge base.
    DocId
);

impl DoseId {
    pub fn for_due(medication: &MedicationId, due_at: &crate::domain::Instant) -> Self {
        Self(format!("{}@{}", medication, due_at.format("%Y%m%dT%H%M%SZ")))
    }
}
