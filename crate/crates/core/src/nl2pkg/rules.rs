//! Offline rule-based annotator over the relation and cue lexicons.

use super::lexicon::{CueKind, Lexicon};
use super::{AnnotatedUtterance, Annotator, Polarity};
use crate::Intent;

pub const RULE_ANNOTATOR_ID: &str = "rule";

#[derive(Debug, Clone)]
pub struct RuleAnnotator {
    lexicon: Lexicon,
}

impl RuleAnnotator {
    pub fn new(lexicon: Lexicon) -> Self {
        RuleAnnotator { lexicon }
    }
}

impl Default for RuleAnnotator {
    fn default() -> Self {
        RuleAnnotator::new(Lexicon::builtin().clone())
    }
}

impl Annotator for RuleAnnotator {
    fn id(&self) -> &str {
        RULE_ANNOTATOR_ID
    }

    fn annotate(&self, raw: &str) -> AnnotatedUtterance {
        annotate_with(&self.lexicon, raw)
    }
}

/// Annotate with the built-in lexicon.
pub fn rule_annotate(raw: &str) -> AnnotatedUtterance {
    annotate_with(Lexicon::builtin(), raw)
}

struct Token<'a> {
    surface: &'a str,
    key: String,
}

fn tokenize(text: &str) -> Vec<Token<'_>> {
    text.split_whitespace()
        .map(|surface| {
            let key = surface
                .replace('\u{2019}', "'")
                .to_lowercase()
                .trim_matches(|c: char| !c.is_alphanumeric() && c != '\'')
                .to_string();
            Token { surface, key }
        })
        .collect()
}

fn phrase(tokens: &[Token<'_>]) -> Option<String> {
    let text = tokens.iter().map(|t| t.surface).collect::<Vec<_>>().join(" ");
    let text = text.trim_matches(|c: char| c == ',' || c == '"' || c.is_whitespace());
    (!text.is_empty()).then(|| text.to_string())
}

fn strip_articles<'t, 'a>(lex: &Lexicon, mut ts: &'t [Token<'a>]) -> &'t [Token<'a>] {
    while ts.first().is_some_and(|t| lex.is(&t.key, CueKind::Article)) {
        ts = &ts[1..];
    }
    ts
}

fn annotate_with(lex: &Lexicon, raw: &str) -> AnnotatedUtterance {
    let trimmed = raw.trim();
    let question = trimmed.ends_with('?');
    let body = trimmed.trim_end_matches(['.', '!', '?', ';', ':', ',', ' ']);
    let tokens = tokenize(body);
    let unknown = || AnnotatedUtterance::unknown(raw, RULE_ANNOTATOR_ID);

    let mut start = tokens.iter().take_while(|t| t.key == "please").count();
    let Some(cue) = tokens.get(start) else {
        return unknown();
    };
    let intent = if lex.is(&cue.key, CueKind::Delete) {
        start += 1;
        Intent::Delete
    } else if lex.is(&cue.key, CueKind::Get) {
        start += 1;
        Intent::Get
    } else if question {
        Intent::Get
    } else {
        Intent::Add
    };
    if intent != Intent::Add {
        while tokens.get(start).is_some_and(|t| {
            lex.is(&t.key, CueKind::Filler) || lex.is(&t.key, CueKind::Aux) || lex.is(&t.key, CueKind::Get)
        }) {
            start += 1;
        }
    }
    let rest = &tokens[start..];

    let verb = rest.iter().enumerate().find_map(|(j, t)| lex.lemma(&t.key).map(|lemma| (j, lemma)));
    let mut out = AnnotatedUtterance { intent, ..unknown() };
    match verb {
        Some((j, lemma)) => {
            let mut k = j;
            let mut negated = false;
            while k > 0 {
                let key = &rest[k - 1].key;
                if lex.is(key, CueKind::Negation) {
                    negated = true;
                } else if !lex.is(key, CueKind::Adverb) && !lex.is(key, CueKind::Aux) {
                    break;
                }
                k -= 1;
            }
            let sign = lex.polarity(&lemma);
            out.subject_text = phrase(&rest[..k]);
            out.object_text = phrase(strip_articles(lex, &rest[j + 1..]));
            out.predicate_text = Some(if negated { format!("not {lemma}") } else { lemma });
            // A negated positive verb reads as a negative preference; a
            // negated negative verb is not a preference at all.
            out.preference_polarity = match (negated, sign) {
                (false, s) => Polarity::from_sign(s),
                (true, 1) => Some(Polarity::Negative),
                (true, _) => None,
            };
        }
        None if intent == Intent::Add => return unknown(),
        None => out.object_text = phrase(strip_articles(lex, rest)),
    }

    let complete = out.spo().iter().all(Option::is_some);
    let any = out.spo().iter().any(Option::is_some);
    match intent {
        Intent::Add if !complete => return unknown(),
        // Refuse to turn "delete" alone into a delete-everything pattern.
        Intent::Delete if !any => return unknown(),
        _ => {}
    }
    out.sanitized()
}
