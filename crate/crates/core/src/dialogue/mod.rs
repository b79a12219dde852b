//! Per-patient guided conversations.

mod answers;
mod engine;
mod feedback;
mod message;
mod pagination;
mod script;
mod session;

use thiserror::Error;

use crate::domain::DoseId;

pub use engine::{menu_quick_replies, DialogueContext, DialogueEngine, Turn};
pub use feedback::{feedback_for, feedback_with_milestone, DoseOutcome, MILESTONE_STREAK};
pub use message::{
    DomainCommand, DoseCard, Inbound, MessageError, OutboundMessage, QuickReply, MAX_QUICK_REPLIES,
};
pub use pagination::{paginate, paginate_info, Page};
pub use script::{
    blame_word, render, DialogueScript, FlowSpec, InputKind, Next, QuickReplySpec, ScriptError,
    Settings, StepSpec, BLAME_DENY_LIST, BUNDLED_SCRIPT, CANCEL, DONE, FINISH, REQUIRED_TEMPLATES,
};
pub use session::{ActiveFlow, ConversationSession, FlowKind, SlotValue};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DialogueError {
    #[error("cursor {cursor} is past the end of a {len}-character document")]
    CursorOutOfRange { cursor: usize, len: usize },
    #[error("dose {dose_id} is already {state}")]
    IllegalState { dose_id: DoseId, state: &'static str },
}
