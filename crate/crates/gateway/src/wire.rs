//! The subset of the Telegram bot API the channel adapter speaks.
//!
//! Inbound: `Update` objects posted to the webhook. Only `update_id`,
//! `message.chat.id`, `message.text`, `callback_query.data` and the chat of
//! a callback are read; any other field is ignored.
//!
//! Outbound: `sendMessage` bodies with an optional inline keyboard. Buttons
//! are laid out in rows of at most [`BUTTONS_PER_ROW`].

use roberto_core::dialogue::{OutboundMessage, QuickReply};
use serde::{Deserialize, Serialize};

pub const BUTTONS_PER_ROW: usize = 3;
/// Telegram rejects longer `callback_data`.
pub const MAX_CALLBACK_DATA_BYTES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Update {
    pub update_id: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<Message>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub callback_query: Option<CallbackQuery>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub chat: Chat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chat {
    pub id: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct User {
    pub id: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallbackQuery {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
    /// The bot message whose button was pressed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<Message>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<User>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InlineKeyboardButton {
    pub text: String,
    pub callback_data: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InlineKeyboardMarkup {
    pub inline_keyboard: Vec<Vec<InlineKeyboardButton>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SendMessage {
    pub chat_id: i64,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reply_markup: Option<InlineKeyboardMarkup>,
}

impl SendMessage {
    pub fn from_outbound(chat_id: i64, msg: &OutboundMessage) -> Self {
        let reply_markup = (!msg.quick_replies.is_empty()).then(|| InlineKeyboardMarkup {
            inline_keyboard: msg
                .quick_replies
                .chunks(BUTTONS_PER_ROW)
                .map(|row| row.iter().map(button).collect())
                .collect(),
        });
        Self {
            chat_id,
            text: msg.body.clone(),
            reply_markup,
        }
    }

    pub fn buttons(&self) -> impl Iterator<Item = &InlineKeyboardButton> {
        self.reply_markup
            .iter()
            .flat_map(|m| m.inline_keyboard.iter().flatten())
    }
}

fn button(reply: &QuickReply) -> InlineKeyboardButton {
    InlineKeyboardButton {
        text: reply.label.clone(),
        callback_data: reply.callback_token.clone(),
    }
}

#[cfg(test)]
mod tests {
    use roberto_core::domain::PatientId;

    use super::*;

    fn with_replies(n: usize) -> OutboundMessage {
        OutboundMessage::text(PatientId::new("p1"), "hi").with_quick_replies(
            (0..n).map(|i| QuickReply::new(format!("L{i}"), format!("t{i}"))).collect(),
        )
    }

    #[test]
    fn three_quick_replies_become_three_buttons_in_one_row() {
        let send = SendMessage::from_outbound(5, &with_replies(3));
        let rows = &send.reply_markup.as_ref().unwrap().inline_keyboard;
        assert_eq!(rows.len(), 1);
        assert_eq!(send.buttons().count(), 3);
        assert_eq!(send.buttons().map(|b| b.callback_data.as_str()).collect::<Vec<_>>(), ["t0", "t1", "t2"]);
    }

    #[test]
    fn buttons_wrap_after_three_per_row() {
        let send = SendMessage::from_outbound(5, &with_replies(5));
        let sizes: Vec<usize> = send.reply_markup.unwrap().inline_keyboard.iter().map(Vec::len).collect();
        assert_eq!(sizes, [3, 2]);
    }

    #[test]
    fn plain_text_has_no_keyboard_field() {
        let send = SendMessage::from_outbound(5, &with_replies(0));
        assert_eq!(serde_json::to_string(&send).unwrap(), r#"{"chat_id":5,"text":"hi"}"#);
    }
}
