use serde::{Deserialize, Serialize};

use super::DialogueError;
use crate::knowledge::InfoDocument;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Page {
    pub text: String,
    /// Character offset of the next page, `None` on the last page.
    pub next: Option<usize>,
}

/// Returns the page of `doc.body` that starts at character offset `cursor`.
///
/// A page ends after the last whitespace within `page_chars` characters, or
/// exactly at `page_chars` when there is none. Pages reassemble to the body.
pub fn paginate_info(
    doc: &InfoDocument,
    cursor: usize,
    page_chars: usize,
) -> Result<Page, DialogueError> {
    paginate(&doc.body, cursor, page_chars)
}

pub fn paginate(text: &str, cursor: usize, page_chars: usize) -> Result<Page, DialogueError> {
    let page_chars = page_chars.max(1);
    let start = match text.char_indices().nth(cursor) {
        Some((byte, _)) => byte,
        None if cursor == text.chars().count() => text.len(),
        None => {
            return Err(DialogueError::CursorOutOfRange {
                cursor,
                len: text.chars().count(),
            })
        }
    };
    let rest = &text[start..];
    // Byte offset just past the page window, if the rest is longer than it.
    let Some((window_end, _)) = rest.char_indices().nth(page_chars) else {
        return Ok(Page {
            text: rest.to_owned(),
            next: None,
        });
    };
    let window = &rest[..window_end];
    let (cut_bytes, cut_chars) = match window.char_indices().rev().find(|(_, c)| c.is_whitespace()) {
        Some((byte, c)) => {
            let end = byte + c.len_utf8();
            (end, window[..end].chars().count())
        }
        None => (window_end, page_chars),
    };
    Ok(Page {
        text: rest[..cut_bytes].to_owned(),
        next: Some(cursor + cut_chars),
    })
}
