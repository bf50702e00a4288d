//! Tokenizer shared by the Turtle, N-Quads and SPARQL-subset parsers.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::vocab::{ns, Iri, Literal, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at {line}:{column}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl Pos {
    pub fn error(self, message: impl Into<String>) -> SyntaxError {
        SyntaxError {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    IriRef(String),
    /// `prefix:local`; `local` may be empty.
    PName(String, String),
    Var(String),
    Str(String),
    LangTag(String),
    /// `@prefix` or `@base`.
    AtKeyword(String),
    Number(String),
    Word(String),
    DoubleCaret,
    Punct(char),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::IriRef(i) => write!(f, "<{i}>"),
            Tok::PName(p, l) => write!(f, "{p}:{l}"),
            Tok::Var(v) => write!(f, "?{v}"),
            Tok::Str(_) => f.write_str("string literal"),
            Tok::LangTag(l) => write!(f, "@{l}"),
            Tok::AtKeyword(k) => write!(f, "@{k}"),
            Tok::Number(n) => f.write_str(n),
            Tok::Word(w) => f.write_str(w),
            Tok::DoubleCaret => f.write_str("^^"),
            Tok::Punct(c) => write!(f, "{c}"),
        }
    }
}

pub fn tokenize(input: &str) -> Result<Vec<(Tok, Pos)>, SyntaxError> {
    Lexer {
        chars: input.chars().collect(),
        i: 0,
        pos: Pos { line: 1, column: 1 },
    }
    .run()
}

struct Lexer {
    chars: Vec<char>,
    i: usize,
    pos: Pos,
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ':')
}

impl Lexer {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).copied()
    }

    fn peek_at(&self, k: usize) -> Option<char> {
        self.chars.get(self.i + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.i += 1;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    fn run(mut self) -> Result<Vec<(Tok, Pos)>, SyntaxError> {
        let mut out = Vec::new();
        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                c if c.is_whitespace() => {
                    self.bump();
                }
                '#' => {
                    while self.peek().is_some_and(|c| c != '\n') {
                        self.bump();
                    }
                }
                '<' => out.push((self.iri_ref()?, start)),
                '"' | '\'' => out.push((Tok::Str(self.string()?), start)),
                '?' | '$' => {
                    self.bump();
                    let name = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_');
                    if name.is_empty() {
                        return Err(start.error("empty variable name"));
                    }
                    out.push((Tok::Var(name), start));
                }
                '@' => {
                    self.bump();
                    let tag = self.take_while(|c| c.is_ascii_alphanumeric() || c == '-');
                    if tag.is_empty() {
                        return Err(start.error("expected language tag or directive after '@'"));
                    }
                    let tok = if tag == "prefix" || tag == "base" {
                        Tok::AtKeyword(tag)
                    } else {
                        Tok::LangTag(tag)
                    };
                    out.push((tok, start));
                }
                '^' => {
                    self.bump();
                    if self.bump() != Some('^') {
                        return Err(start.error("expected '^^'"));
                    }
                    out.push((Tok::DoubleCaret, start));
                }
                '{' | '}' | '(' | ')' | ';' | ',' | '=' | '*' | '[' | ']' => {
                    self.bump();
                    out.push((Tok::Punct(c), start));
                }
                '.' if !self.peek_at(1).is_some_and(|d| d.is_ascii_digit()) => {
                    self.bump();
                    out.push((Tok::Punct('.'), start));
                }
                c if c.is_ascii_digit() || matches!(c, '+' | '-' | '.') => out.push((self.number()?, start)),
                c if is_name_char(c) => out.push((self.name(start)?, start)),
                other => return Err(start.error(format!("unexpected character {other:?}"))),
            }
        }
        Ok(out)
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek().filter(|&c| f(c)) {
            s.push(c);
            self.bump();
        }
        s
    }

    fn iri_ref(&mut self) -> Result<Tok, SyntaxError> {
        let start = self.pos;
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(start.error("unterminated IRI")),
                Some('>') => return Ok(Tok::IriRef(s)),
                Some('\\') => s.push(self.unicode_escape(start)?),
                Some(c) if c.is_whitespace() || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`') => {
                    return Err(start.error(format!("character {c:?} not allowed in IRI")))
                }
                Some(c) => s.push(c),
            }
        }
    }

    fn unicode_escape(&mut self, start: Pos) -> Result<char, SyntaxError> {
        let width = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(start.error("invalid escape in IRI")),
        };
        self.hex(width, start)
    }

    fn hex(&mut self, width: usize, start: Pos) -> Result<char, SyntaxError> {
        let mut code = 0u32;
        for _ in 0..width {
            let d = self
                .bump()
                .and_then(|c| c.to_digit(16))
                .ok_or_else(|| start.error("invalid hex escape"))?;
            code = code * 16 + d;
        }
        char::from_u32(code).ok_or_else(|| start.error("escape is not a valid code point"))
    }

    fn string(&mut self) -> Result<String, SyntaxError> {
        let start = self.pos;
        let quote = self.bump().expect("caller saw a quote");
        let long = self.peek() == Some(quote) && self.peek_at(1) == Some(quote);
        if long {
            self.bump();
            self.bump();
        } else if self.peek() == Some(quote) {
            self.bump();
            return Ok(String::new());
        }
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(start.error("unterminated string")),
                Some(c) if c == quote => {
                    if !long {
                        return Ok(s);
                    }
                    if self.peek() == Some(quote) && self.peek_at(1) == Some(quote) {
                        self.bump();
                        self.bump();
                        return Ok(s);
                    }
                    s.push(c);
                }
                Some('\n' | '\r') if !long => return Err(start.error("newline in string")),
                Some('\\') => {
                    let c = match self.bump() {
                        Some('t') => '\t',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('b') => '\u{8}',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') => self.hex(4, start)?,
                        Some('U') => self.hex(8, start)?,
                        _ => return Err(start.error("invalid escape in string")),
                    };
                    s.push(c);
                }
                Some(c) => s.push(c),
            }
        }
    }

    fn number(&mut self) -> Result<Tok, SyntaxError> {
        let start = self.pos;
        let mut s = String::new();
        if let Some(sign) = self.peek().filter(|c| matches!(c, '+' | '-')) {
            s.push(sign);
            self.bump();
        }
        s.push_str(&self.take_while(|c| c.is_ascii_digit()));
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|d| d.is_ascii_digit()) {
            s.push('.');
            self.bump();
            s.push_str(&self.take_while(|c| c.is_ascii_digit()));
        }
        if !s.chars().any(|c| c.is_ascii_digit()) {
            return Err(start.error("malformed number"));
        }
        Ok(Tok::Number(s))
    }

    fn name(&mut self, start: Pos) -> Result<Tok, SyntaxError> {
        let mut s = self.take_while(is_name_char);
        // A trailing '.' terminates the statement rather than the name.
        while s.ends_with('.') {
            s.pop();
            self.i -= 1;
            self.pos.column -= 1;
        }
        if s.is_empty() {
            return Err(start.error("unexpected '.'"));
        }
        match s.split_once(':') {
            Some((prefix, local)) => {
                let prefix_ok = prefix.is_empty()
                    || (prefix.starts_with(|c: char| c.is_alphabetic())
                        && prefix.chars().all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.')));
                if !prefix_ok || local.contains(':') || local.starts_with(['-', '.']) {
                    return Err(start.error(format!("malformed prefixed name {s:?}")));
                }
                Ok(Tok::PName(prefix.to_string(), local.to_string()))
            }
            None => Ok(Tok::Word(s)),
        }
    }
}

/// Cursor over a token stream with prefix resolution.
pub struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    end: Pos,
    pub prefixes: HashMap<String, String>,
}

impl Parser {
    pub fn new(input: &str) -> Result<Self, SyntaxError> {
        let toks = tokenize(input)?;
        let end = end_pos(input);
        Ok(Parser {
            toks,
            i: 0,
            end,
            prefixes: HashMap::new(),
        })
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(t, _)| t)
    }

    pub fn pos(&self) -> Pos {
        self.toks.get(self.i).map(|(_, p)| *p).unwrap_or(self.end)
    }

    pub fn at_end(&self) -> bool {
        self.i >= self.toks.len()
    }

    pub fn next(&mut self) -> Result<(Tok, Pos), SyntaxError> {
        let item = self
            .toks
            .get(self.i)
            .cloned()
            .ok_or_else(|| self.end.error("unexpected end of input"))?;
        self.i += 1;
        Ok(item)
    }

    pub fn error(&self, message: impl Into<String>) -> SyntaxError {
        self.pos().error(message)
    }

    pub fn is_punct(&self, c: char) -> bool {
        self.peek() == Some(&Tok::Punct(c))
    }

    pub fn eat_punct(&mut self, c: char) -> bool {
        if self.is_punct(c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_punct(&mut self, c: char) -> Result<(), SyntaxError> {
        if self.eat_punct(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{c}'{}", self.found())))
        }
    }

    pub fn found(&self) -> String {
        match self.peek() {
            Some(t) => format!(", found {t}"),
            None => ", found end of input".into(),
        }
    }

    /// Case-insensitive keyword check.
    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(w)) if w.eq_ignore_ascii_case(kw))
    }

    pub fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_keyword(&mut self, kw: &str) -> Result<(), SyntaxError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.error(format!("expected {kw}{}", self.found())))
        }
    }

    /// `prefix: <iri>` after the PREFIX / @prefix keyword.
    pub fn prefix_decl(&mut self) -> Result<(), SyntaxError> {
        let (tok, pos) = self.next()?;
        let Tok::PName(prefix, local) = tok else {
            return Err(pos.error("expected prefix name"));
        };
        if !local.is_empty() {
            return Err(pos.error("prefix name must end with ':'"));
        }
        let (tok, pos) = self.next()?;
        let Tok::IriRef(iri) = tok else {
            return Err(pos.error("expected IRI in prefix declaration"));
        };
        Iri::new(iri.as_str()).map_err(|e| pos.error(e.to_string()))?;
        self.prefixes.insert(prefix, iri);
        Ok(())
    }

    /// An IRI from an IRIREF, a prefixed name, or `a` when `allow_a`.
    pub fn iri(&mut self, allow_a: bool) -> Result<Iri, SyntaxError> {
        let (tok, pos) = self.next()?;
        self.iri_from(tok, pos, allow_a)
    }

    pub fn iri_from(&self, tok: Tok, pos: Pos, allow_a: bool) -> Result<Iri, SyntaxError> {
        let text = match tok {
            Tok::IriRef(i) => i,
            Tok::PName(prefix, local) => {
                let ns = self
                    .prefixes
                    .get(&prefix)
                    .ok_or_else(|| pos.error(format!("undeclared prefix {prefix:?}")))?;
                format!("{ns}{local}")
            }
            Tok::Word(w) if allow_a && w == "a" => ns::rdf::TYPE.to_string(),
            other => return Err(pos.error(format!("expected IRI, found {other}"))),
        };
        Iri::new(text).map_err(|e| pos.error(e.to_string()))
    }

    /// Literal after its opening string token has been consumed.
    pub fn literal_tail(&mut self, lexical: String) -> Result<Literal, SyntaxError> {
        match self.peek() {
            Some(Tok::LangTag(_)) => {
                let (Tok::LangTag(tag), pos) = self.next()? else { unreachable!() };
                Literal::with_language(lexical, tag).map_err(|e| pos.error(e.to_string()))
            }
            Some(Tok::DoubleCaret) => {
                self.next()?;
                let pos = self.pos();
                let datatype = self.iri(false)?;
                Literal::from_parts(lexical, datatype, None).map_err(|e| pos.error(e.to_string()))
            }
            _ => Ok(Literal::string(lexical)),
        }
    }

    /// A ground term: IRI, literal, number or boolean.
    pub fn term_from(&mut self, tok: Tok, pos: Pos) -> Result<Term, SyntaxError> {
        match tok {
            Tok::Str(s) => Ok(Term::literal(self.literal_tail(s)?)),
            Tok::Number(n) => {
                let dt = if n.contains('.') { ns::xsd::DECIMAL } else { ns::xsd::INTEGER };
                Ok(Term::literal(Literal::typed(n, Iri::new(dt).expect("constant"))))
            }
            Tok::Word(w) if w == "true" || w == "false" => {
                Ok(Term::literal(Literal::typed(w, Iri::new(ns::xsd::BOOLEAN).expect("constant"))))
            }
            Tok::Punct('[') => Err(pos.error("blank node property lists are not supported")),
            Tok::Punct('(') => Err(pos.error("collections are not supported")),
            Tok::PName(p, _) if p == "_" => Err(pos.error("blank nodes are not supported")),
            other => self.iri_from(other, pos, false).map(Term::iri),
        }
    }
}

fn end_pos(input: &str) -> Pos {
    let mut pos = Pos { line: 1, column: 1 };
    for c in input.chars() {
        if c == '\n' {
            pos.line += 1;
            pos.column = 1;
        } else {
            pos.column += 1;
        }
    }
    pos
}
