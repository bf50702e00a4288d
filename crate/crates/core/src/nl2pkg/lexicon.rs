//! Word lists driving the rule-based annotator. The built-in lists live in
//! `data/` and can be replaced by files of the same format.

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::OnceLock;

use thiserror::Error;

const RELATIONS: &str = include_str!("../../data/relations.tsv");
const CUES: &str = include_str!("../../data/cues.tsv");

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("{file}:{line}: {message}")]
    Format { file: String, line: usize, message: String },
    #[error("cannot read {0}: {1}")]
    Io(String, std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CueKind {
    Get,
    Delete,
    Negation,
    Aux,
    Article,
    Filler,
    Adverb,
}

impl CueKind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "get" => CueKind::Get,
            "delete" => CueKind::Delete,
            "negation" => CueKind::Negation,
            "aux" => CueKind::Aux,
            "article" => CueKind::Article,
            "filler" => CueKind::Filler,
            "adverb" => CueKind::Adverb,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    relations: HashMap<String, i8>,
    cues: HashSet<(String, CueKind)>,
}

/// Non-comment, non-blank lines split on the first tab.
fn entries<'a>(file: &'a str, text: &'a str) -> impl Iterator<Item = Result<(usize, &'a str, &'a str), LexiconError>> + 'a {
    text.lines().enumerate().filter_map(move |(n, line)| {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            return None;
        }
        Some(match line.split_once('\t') {
            Some((key, value)) if !key.trim().is_empty() => Ok((n + 1, key.trim(), value.trim())),
            _ => Err(LexiconError::Format {
                file: file.to_string(),
                line: n + 1,
                message: "expected `word<TAB>value`".into(),
            }),
        })
    })
}

impl Lexicon {
    pub fn builtin() -> &'static Lexicon {
        static BUILTIN: OnceLock<Lexicon> = OnceLock::new();
        BUILTIN.get_or_init(|| Lexicon::parse(RELATIONS, CUES).expect("built-in lexicon is well-formed"))
    }

    pub fn parse(relations: &str, cues: &str) -> Result<Self, LexiconError> {
        let mut lex = Lexicon::default();
        for entry in entries("relations", relations) {
            let (line, lemma, polarity) = entry?;
            let polarity = match polarity {
                "+1" | "1" => 1,
                "-1" => -1,
                "0" => 0,
                other => {
                    return Err(LexiconError::Format {
                        file: "relations".into(),
                        line,
                        message: format!("polarity must be +1, -1 or 0, got {other:?}"),
                    })
                }
            };
            lex.relations.insert(lemma.to_lowercase(), polarity);
        }
        for entry in entries("cues", cues) {
            let (line, word, kind) = entry?;
            let kind = CueKind::parse(kind).ok_or_else(|| LexiconError::Format {
                file: "cues".into(),
                line,
                message: format!("unknown cue kind {kind:?}"),
            })?;
            lex.cues.insert((word.to_lowercase(), kind));
        }
        Ok(lex)
    }

    /// Load `relations.tsv` and `cues.tsv` from `dir`; a missing file falls
    /// back to the built-in list.
    pub fn load_dir(dir: &Path) -> Result<Self, LexiconError> {
        let read = |name: &str, fallback: &'static str| -> Result<String, LexiconError> {
            let path = dir.join(name);
            if path.exists() {
                std::fs::read_to_string(&path).map_err(|e| LexiconError::Io(path.display().to_string(), e))
            } else {
                Ok(fallback.to_string())
            }
        };
        Lexicon::parse(&read("relations.tsv", RELATIONS)?, &read("cues.tsv", CUES)?)
    }

    pub fn is(&self, word: &str, kind: CueKind) -> bool {
        self.cues.contains(&(word.to_lowercase(), kind))
    }

    /// Lemma of `token` if it is a relation verb, by suffix stripping.
    pub fn lemma(&self, token: &str) -> Option<String> {
        let word = token.to_lowercase();
        let mut candidates = vec![word.clone()];
        for (suffix, replacement) in [("ies", "y"), ("es", ""), ("s", ""), ("ied", "y"), ("ed", ""), ("d", ""), ("ing", ""), ("ing", "e")] {
            if let Some(stem) = word.strip_suffix(suffix) {
                if !stem.is_empty() {
                    candidates.push(format!("{stem}{replacement}"));
                }
            }
        }
        candidates.into_iter().find(|c| self.relations.contains_key(c))
    }

    pub fn polarity(&self, lemma: &str) -> i8 {
        self.relations.get(lemma).copied().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemmatizes_closed_lexicon() {
        let lex = Lexicon::builtin();
        assert_eq!(lex.lemma("likes").as_deref(), Some("like"));
        assert_eq!(lex.lemma("Loves").as_deref(), Some("love"));
        assert_eq!(lex.lemma("enjoyed").as_deref(), Some("enjoy"));
        assert_eq!(lex.lemma("hated").as_deref(), Some("hate"));
        assert_eq!(lex.lemma("watches").as_deref(), Some("watch"));
        assert_eq!(lex.lemma("studies").as_deref(), Some("study"));
        assert_eq!(lex.lemma("is").as_deref(), Some("is"));
        assert_eq!(lex.lemma("movies"), None);
        assert_eq!(lex.lemma("s"), None);
    }

    #[test]
    fn polarities() {
        let lex = Lexicon::builtin();
        assert_eq!(lex.polarity("like"), 1);
        assert_eq!(lex.polarity("dislike"), -1);
        assert_eq!(lex.polarity("watch"), 0);
    }

    #[test]
    fn malformed_files_rejected() {
        assert!(Lexicon::parse("like +1", "").is_err());
        assert!(Lexicon::parse("like\tmaybe", "").is_err());
        assert!(Lexicon::parse("", "show\tverb").is_err());
        let lex = Lexicon::parse("# comment\n\nadore\t+1\n", "gimme\tget\n").unwrap();
        assert_eq!(lex.lemma("adores").as_deref(), Some("adore"));
        assert!(lex.is("Gimme", CueKind::Get));
    }
}
