//! Structured answers from the chat model. Only the last non-empty line of a
//! response counts; it reads `INTENT: <token>`, `SPO: <s> | <p> | <o>` or
//! `PREF: <+1|-1|none>`. The label may be omitted.

use thiserror::Error;

use super::Polarity;
use crate::Intent;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnswerError {
    #[error("empty response")]
    Empty,
    #[error("expected {expected}, found {found:?}")]
    Unexpected { expected: &'static str, found: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SpoAnswer {
    pub subject: Option<String>,
    pub predicate: Option<String>,
    pub object: Option<String>,
}

fn last_line(response: &str) -> Result<&str, AnswerError> {
    response
        .lines()
        .map(str::trim).rfind(|l| !l.is_empty())
        .ok_or(AnswerError::Empty)
}

/// Strip an optional `LABEL:` prefix (case-insensitive) and markdown emphasis.
fn unlabel<'a>(line: &'a str, label: &str) -> &'a str {
    let line = line.trim_matches(|c| c == '*' || c == '`').trim();
    match line.split_once(':') {
        Some((head, rest)) if head.trim().eq_ignore_ascii_case(label) => rest.trim().trim_matches('`').trim(),
        _ => line,
    }
}

pub fn parse_intent(response: &str) -> Result<Intent, AnswerError> {
    let value = unlabel(last_line(response)?, "INTENT");
    value
        .trim_end_matches('.')
        .parse()
        .map_err(|()| AnswerError::Unexpected { expected: "ADD, GET, DELETE or UNKNOWN", found: value.to_string() })
}

pub fn parse_spo(response: &str) -> Result<SpoAnswer, AnswerError> {
    let value = unlabel(last_line(response)?, "SPO");
    let parts: Vec<&str> = value.split('|').map(str::trim).collect();
    let [s, p, o] = parts[..] else {
        return Err(AnswerError::Unexpected { expected: "<subject> | <predicate> | <object>", found: value.to_string() });
    };
    let slot = |t: &str| {
        let t = t.trim_matches('"').trim();
        match t.to_ascii_lowercase().as_str() {
            "" | "-" | "_" | "none" | "?" => None,
            _ => Some(t.to_string()),
        }
    };
    let answer = SpoAnswer { subject: slot(s), predicate: slot(p), object: slot(o) };
    if answer == SpoAnswer::default() {
        return Err(AnswerError::Unexpected { expected: "at least one SPO element", found: value.to_string() });
    }
    Ok(answer)
}

pub fn parse_preference(response: &str) -> Result<Option<Polarity>, AnswerError> {
    let value = unlabel(last_line(response)?, "PREF");
    match value.trim_end_matches('.').to_ascii_lowercase().as_str() {
        "+1" | "1" | "positive" => Ok(Some(Polarity::Positive)),
        "-1" | "negative" => Ok(Some(Polarity::Negative)),
        "none" | "0" | "no-preference" | "no preference" => Ok(None),
        _ => Err(AnswerError::Unexpected { expected: "+1, -1 or none", found: value.to_string() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intents() {
        assert_eq!(parse_intent("ADD"), Ok(Intent::Add));
        assert_eq!(parse_intent("The user asks.\n\nINTENT: get\n"), Ok(Intent::Get));
        assert_eq!(parse_intent("**INTENT: DELETE**"), Ok(Intent::Delete));
        assert_eq!(parse_intent(""), Err(AnswerError::Empty));
        assert!(parse_intent("INTENT: ADD\nmaybe").is_err());
    }

    #[test]
    fn spo_slots() {
        let a = parse_spo("Reasoning...\nSPO: Bob | like | Oppenheimer").unwrap();
        assert_eq!(a.subject.as_deref(), Some("Bob"));
        assert_eq!(a.predicate.as_deref(), Some("like"));
        assert_eq!(a.object.as_deref(), Some("Oppenheimer"));
        let a = parse_spo("my mom | enjoy |").unwrap();
        assert_eq!(a.object, None);
        assert!(parse_spo("garbage").is_err());
        assert!(parse_spo("a | b").is_err());
        assert!(parse_spo(" | | ").is_err());
    }

    #[test]
    fn preferences() {
        assert_eq!(parse_preference("PREF: +1"), Ok(Some(Polarity::Positive)));
        assert_eq!(parse_preference("-1"), Ok(Some(Polarity::Negative)));
        assert_eq!(parse_preference("pref: none"), Ok(None));
        assert_eq!(parse_preference("no-preference"), Ok(None));
        assert!(parse_preference("+2").is_err());
    }
}
