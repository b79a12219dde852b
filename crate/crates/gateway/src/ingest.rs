use std::collections::{HashSet, VecDeque};

use roberto_core::dialogue::Inbound;
use roberto_core::domain::{Instant, PatientId};
use serde::{Deserialize, Serialize};

use crate::wire::Update;
use crate::GatewayError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Webhook,
    Console,
}

impl ChannelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Webhook => "webhook",
            Self::Console => "console",
        }
    }
}

/// An inbound chat update resolved to a patient.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedUpdate {
    pub channel: ChannelKind,
    pub external_chat_id: i64,
    pub patient_id: PatientId,
    pub kind: Inbound,
    pub received_at: Instant,
}

/// A webhook update that passed schema checks but is not yet resolved to a
/// patient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedUpdate {
    pub update_id: i64,
    pub chat_id: i64,
    pub kind: Inbound,
}

/// Patient id given to a chat seen for the first time.
pub fn patient_id_for_chat(chat_id: i64) -> PatientId {
    PatientId::new(format!("p-{chat_id}"))
}

/// Checks a raw webhook body against the supported update schema.
pub fn parse_update(raw: &[u8]) -> Result<ParsedUpdate, GatewayError> {
    let malformed = |m: &str| GatewayError::MalformedPayload(m.to_owned());
    let update: Update =
        serde_json::from_slice(raw).map_err(|e| GatewayError::MalformedPayload(e.to_string()))?;
    let (chat_id, kind) = match (update.message, update.callback_query) {
        (Some(message), None) => {
            let text = message.text.ok_or_else(|| malformed("message has no text"))?;
            (message.chat.id, Inbound::Text(text))
        }
        (None, Some(query)) => {
            let data = query.data.ok_or_else(|| malformed("callback_query has no data"))?;
            let chat_id = query
                .message
                .map(|m| m.chat.id)
                .or(query.from.map(|u| u.id))
                .ok_or_else(|| malformed("callback_query has no chat"))?;
            (chat_id, Inbound::Callback(data))
        }
        (Some(_), Some(_)) => return Err(malformed("update has both message and callback_query")),
        (None, None) => return Err(malformed("update has neither message nor callback_query")),
    };
    Ok(ParsedUpdate {
        update_id: update.update_id,
        chat_id,
        kind,
    })
}

/// The most recent update ids, oldest evicted first.
#[derive(Debug)]
pub struct DedupWindow {
    capacity: usize,
    order: VecDeque<i64>,
    seen: HashSet<i64>,
}

impl DedupWindow {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            order: VecDeque::new(),
            seen: HashSet::new(),
        }
    }

    /// Records `id`. Returns `false` when it is already in the window.
    pub fn insert(&mut self, id: i64) -> bool {
        if !self.seen.insert(id) {
            return false;
        }
        self.order.push_back(id);
        if self.order.len() > self.capacity {
            if let Some(old) = self.order.pop_front() {
                self.seen.remove(&old);
            }
        }
        true
    }

    /// Forgets `id`, so that a redelivery of a failed update is processed.
    pub fn remove(&mut self, id: i64) {
        if self.seen.remove(&id) {
            self.order.retain(|x| *x != id);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_message() {
        let parsed = parse_update(br#"{"update_id":1,"message":{"chat":{"id":42},"text":"hello"}}"#).unwrap();
        assert_eq!(
            parsed,
            ParsedUpdate {
                update_id: 1,
                chat_id: 42,
                kind: Inbound::Text("hello".into())
            }
        );
    }

    #[test]
    fn callback_falls_back_to_the_sender() {
        let parsed = parse_update(br#"{"update_id":2,"callback_query":{"data":"menu:check_in","from":{"id":7}}}"#).unwrap();
        assert_eq!(parsed.chat_id, 7);
        assert_eq!(parsed.kind, Inbound::Callback("menu:check_in".into()));
    }

    #[test]
    fn malformed_updates() {
        for raw in [
            &br#"{"update_id":3}"#[..],
            br#"{"update_id":3,"message":{"chat":{"id":1}}}"#,
            br#"{"update_id":3,"callback_query":{"data":"x"}}"#,
            br#"{"update_id":3,"message":{"chat":{"id":1},"text":"a"},"callback_query":{"data":"x","from":{"id":1}}}"#,
            br#"{"message":{"chat":{"id":1},"text":"a"}}"#,
            b"not json",
        ] {
            assert!(matches!(parse_update(raw), Err(GatewayError::MalformedPayload(_))));
        }
    }

    #[test]
    fn window_forgets_the_oldest_id() {
        let mut w = DedupWindow::new(2);
        assert!(w.insert(1));
        assert!(!w.insert(1));
        assert!(w.insert(2));
        assert!(w.insert(3));
        assert!(w.insert(1));
        assert!(!w.insert(3));
        w.remove(3);
        assert!(w.insert(3));
    }
}
