//! Action grammar shared by every game.
//!
//! An agent reply may contain prose; actions are the lines carrying an
//! `ACTION:` marker (case-insensitive, optionally inside a code fence or
//! wrapped in backticks). Each game parses the bodies of those lines.

use std::sync::LazyLock;

use regex::Regex;

static ACTION_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?im)\baction\s*:\s*(.+?)\s*$").unwrap());
static NUMBER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?$").unwrap());

/// Bodies of every `ACTION:` line, in order, with wrapping punctuation removed.
pub fn action_bodies(reply: &str) -> Vec<String> {
    ACTION_LINE
        .captures_iter(reply)
        .map(|c| {
            c[1].trim_matches(|ch: char| ch == '`' || ch == '*' || ch == '"' || ch == '\'')
                .trim()
                .to_string()
        })
        .filter(|b| !b.is_empty())
        .collect()
}

pub fn first_action(reply: &str) -> Option<String> {
    action_bodies(reply).into_iter().next()
}

/// Lower-cased words of an action body; commas and parentheses separate.
pub fn words(body: &str) -> Vec<String> {
    body.split(|c: char| c.is_whitespace() || c == ',' || c == ';')
        .filter(|w| !w.is_empty())
        .map(|w| w.to_ascii_lowercase())
        .collect()
}

/// Strict decimal number; rejects `nan`, `inf` and trailing junk.
pub fn number(token: &str) -> Option<f64> {
    let token = token.trim_end_matches(['°', '.']);
    if !NUMBER.is_match(token) {
        return None;
    }
    token.parse::<f64>().ok()
}
