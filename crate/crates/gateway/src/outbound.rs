use std::io::Write;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Mutex;

use chrono::Duration;
use roberto_core::dialogue::OutboundMessage;
use roberto_store::DeliveryStatus;
use thiserror::Error;

use crate::config::DeliveryConfig;
use crate::ingest::ChannelKind;
use crate::wire::SendMessage;
use roberto_core::domain::Instant;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("channel unavailable: {0}")]
pub struct TransportError(pub String);

/// Hands a rendered message to a chat channel.
pub trait Transport: Send + Sync {
    fn kind(&self) -> ChannelKind;
    fn send(&self, chat_id: i64, msg: &OutboundMessage) -> Result<(), TransportError>;
}

/// Webhook-side channel. Instead of calling a live bot API it keeps every
/// `sendMessage` body it would have sent, in order.
#[derive(Debug, Default)]
pub struct Outbox {
    sent: Mutex<Vec<SendMessage>>,
    failures_left: AtomicU32,
}

impl Outbox {
    pub fn new() -> Self {
        Self::default()
    }

    /// Makes the next `n` sends fail.
    pub fn fail_next(&self, n: u32) {
        self.failures_left.store(n, Ordering::SeqCst);
    }

    pub fn sent(&self) -> Vec<SendMessage> {
        self.sent.lock().expect("outbox poisoned").clone()
    }

    /// Messages after the first `after`.
    pub fn sent_after(&self, after: usize) -> Vec<SendMessage> {
        self.sent.lock().expect("outbox poisoned").iter().skip(after).cloned().collect()
    }
}

impl Transport for Outbox {
    fn kind(&self) -> ChannelKind {
        ChannelKind::Webhook
    }

    fn send(&self, chat_id: i64, msg: &OutboundMessage) -> Result<(), TransportError> {
        let fail = self
            .failures_left
            .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |n| n.checked_sub(1))
            .is_ok();
        if fail {
            return Err(TransportError("simulated outage".into()));
        }
        self.sent
            .lock()
            .expect("outbox poisoned")
            .push(SendMessage::from_outbound(chat_id, msg));
        Ok(())
    }
}

/// Plain-text channel for terminals.
pub struct Console {
    out: Mutex<Box<dyn Write + Send>>,
}

impl Console {
    pub fn new(out: Box<dyn Write + Send>) -> Self {
        Self { out: Mutex::new(out) }
    }

    pub fn stdout() -> Self {
        Self::new(Box::new(std::io::stdout()))
    }
}

impl Transport for Console {
    fn kind(&self) -> ChannelKind {
        ChannelKind::Console
    }

    fn send(&self, _chat_id: i64, msg: &OutboundMessage) -> Result<(), TransportError> {
        let mut out = self.out.lock().expect("console poisoned");
        out.write_all(render_console(msg).as_bytes())
            .and_then(|()| out.flush())
            .map_err(|e| TransportError(e.to_string()))
    }
}

/// Deterministic text rendering: the body prefixed with `bot> `, then one
/// numbered line of quick replies.
pub fn render_console(msg: &OutboundMessage) -> String {
    let mut text = String::new();
    for (i, line) in msg.body.lines().enumerate() {
        text.push_str(if i == 0 { "bot> " } else { "     " });
        text.push_str(line);
        text.push('\n');
    }
    if !msg.quick_replies.is_empty() {
        let buttons: Vec<String> = msg
            .quick_replies
            .iter()
            .enumerate()
            .map(|(i, r)| format!("[{}] {}", i + 1, r.label))
            .collect();
        text.push_str("     ");
        text.push_str(&buttons.join("  "));
        text.push('\n');
    }
    text
}

/// Status after `attempts` tries of which the last one failed at `now`.
pub fn after_failure(attempts: u32, now: Instant, reason: &str, policy: &DeliveryConfig) -> DeliveryStatus {
    if attempts >= policy.max_attempts {
        return DeliveryStatus::Failed {
            at: now,
            reason: reason.to_owned(),
        };
    }
    let factor = 1i64 << attempts.saturating_sub(1).min(20);
    DeliveryStatus::Queued {
        next_attempt_at: now + Duration::seconds(i64::from(policy.backoff_base_secs) * factor),
    }
}
