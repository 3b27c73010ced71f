//! Parser for the formula surface syntax.
//!
//! ```text
//! formula := and ('|' formula)?
//! and     := unary ('&' and)?
//! unary   := '<' label '>' unary | '[' label ']' unary | atom
//! atom    := 'tt' | 'ff' | '(' formula ')'
//! ```
//!
//! `|` binds weakest, then `&`, then the modalities; both connectives are
//! right-associative. Labels are identifiers (an optional leading `'` marks
//! a co-name) or quoted strings. `#` starts a comment to end of line.

use std::str::FromStr;

use thiserror::Error;

use super::Formula;

/// Parse error with position, 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

// hard stop for `<a><a><a>...` and `(((...` towers; deeper input would
// otherwise exhaust the parser stack
const MAX_NESTING: usize = 1_000;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Amp,
    Pipe,
    LAngle,
    RAngle,
    LBrack,
    RBrack,
    LParen,
    RParen,
    Ident(String),
    Quoted(String),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Amp => "`&`".to_string(),
            Tok::Pipe => "`|`".to_string(),
            Tok::LAngle => "`<`".to_string(),
            Tok::RAngle => "`>`".to_string(),
            Tok::LBrack => "`[`".to_string(),
            Tok::RBrack => "`]`".to_string(),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
            Tok::Ident(name) => format!("`{name}`"),
            Tok::Quoted(name) => format!("label {name:?}"),
        }
    }
}

fn position(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.chars().rev().take_while(|&c| c != '\n').count() + 1;
    (line, col)
}

fn error_at(src: &str, offset: usize, message: impl Into<String>) -> ParseError {
    let (line, col) = position(src, offset);
    ParseError {
        line,
        col,
        message: message.into(),
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut toks = Vec::new();
    let mut it = src.char_indices().peekable();
    while let Some(&(i, c)) = it.peek() {
        match c {
            c if c.is_whitespace() => {
                it.next();
            }
            '#' => while it.next_if(|&(_, c)| c != '\n').is_some() {},
            '&' => {
                toks.push((Tok::Amp, i));
                it.next();
            }
            '|' => {
                toks.push((Tok::Pipe, i));
                it.next();
            }
            '<' => {
                toks.push((Tok::LAngle, i));
                it.next();
            }
            '>' => {
                toks.push((Tok::RAngle, i));
                it.next();
            }
            '[' => {
                toks.push((Tok::LBrack, i));
                it.next();
            }
            ']' => {
                toks.push((Tok::RBrack, i));
                it.next();
            }
            '(' => {
                toks.push((Tok::LParen, i));
                it.next();
            }
            ')' => {
                toks.push((Tok::RParen, i));
                it.next();
            }
            '"' => {
                it.next();
                let mut name = String::new();
                loop {
                    match it.next() {
                        Some((_, '"')) => break,
                        Some((_, '\\')) => match it.next() {
                            Some((_, e @ ('"' | '\\'))) => name.push(e),
                            Some((j, e)) => {
                                return Err(error_at(src, j, format!("unknown escape \\{e}")))
                            }
                            None => return Err(error_at(src, i, "unterminated quoted label")),
                        },
                        Some((_, c)) => name.push(c),
                        None => return Err(error_at(src, i, "unterminated quoted label")),
                    }
                }
                toks.push((Tok::Quoted(name), i));
            }
            c if c.is_ascii_alphabetic() || c == '_' || c == '\'' => {
                let mut name = String::new();
                if c == '\'' {
                    it.next();
                    if !matches!(it.peek(), Some(&(_, c)) if c.is_ascii_alphabetic() || c == '_') {
                        return Err(error_at(src, i, "expected a name after `'`"));
                    }
                    name.push('\'');
                }
                while let Some(&(_, c)) = it
                    .peek()
                    .filter(|&&(_, c)| c.is_ascii_alphanumeric() || c == '_')
                {
                    name.push(c);
                    it.next();
                }
                toks.push((Tok::Ident(name), i));
            }
            c => return Err(error_at(src, i, format!("unexpected character {c:?}"))),
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks
            .get(self.pos)
            .map_or(self.src.len(), |&(_, off)| off)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        error_at(self.src, self.offset(), message)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.eat(&tok) {
            return Ok(());
        }
        let found = match self.peek() {
            Some(t) => format!("found {}", t.describe()),
            None => "input ended".to_string(),
        };
        Err(self.error(format!("expected {}, {found}", tok.describe())))
    }

    fn formula(&mut self, depth: usize) -> Result<Formula<String>, ParseError> {
        let mut parts = vec![self.and_level(depth)?];
        while self.eat(&Tok::Pipe) {
            parts.push(self.and_level(depth)?);
        }
        // right-nest, matching the grammar's associativity
        Ok(parts
            .into_iter()
            .rev()
            .reduce(|acc, p| Formula::or(p, acc))
            .unwrap())
    }

    fn and_level(&mut self, depth: usize) -> Result<Formula<String>, ParseError> {
        let mut parts = vec![self.unary(depth)?];
        while self.eat(&Tok::Amp) {
            parts.push(self.unary(depth)?);
        }
        Ok(Formula::conj(parts))
    }

    fn unary(&mut self, depth: usize) -> Result<Formula<String>, ParseError> {
        if depth > MAX_NESTING {
            return Err(self.error(format!("formula nested deeper than {MAX_NESTING}")));
        }
        if self.eat(&Tok::LAngle) {
            let label = self.label()?;
            self.expect(Tok::RAngle)?;
            return Ok(Formula::diamond(label, self.unary(depth + 1)?));
        }
        if self.eat(&Tok::LBrack) {
            let label = self.label()?;
            self.expect(Tok::RBrack)?;
            return Ok(Formula::box_(label, self.unary(depth + 1)?));
        }
        if self.eat(&Tok::LParen) {
            let inner = self.formula(depth + 1)?;
            self.expect(Tok::RParen)?;
            return Ok(inner);
        }
        match self.peek() {
            Some(Tok::Ident(name)) if name == "tt" => {
                self.pos += 1;
                Ok(Formula::True)
            }
            Some(Tok::Ident(name)) if name == "ff" => {
                self.pos += 1;
                Ok(Formula::False)
            }
            Some(Tok::Ident(name)) => Err(self.error(format!(
                "expected a formula, found `{name}` (the atoms are `tt` and `ff`)"
            ))),
            Some(t) => Err(self.error(format!("expected a formula, found {}", t.describe()))),
            None => Err(self.error("expected a formula, input ended")),
        }
    }

    fn label(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(name)) | Some(Tok::Quoted(name)) => {
                let name = name.clone();
                self.pos += 1;
                Ok(name)
            }
            Some(t) => Err(self.error(format!("expected a label, found {}", t.describe()))),
            None => Err(self.error("expected a label, input ended")),
        }
    }
}

fn parse_tokens(src: &str, toks: Vec<(Tok, usize)>) -> Result<Formula<String>, ParseError> {
    let mut parser = Parser { src, toks, pos: 0 };
    if parser.peek().is_none() {
        return Err(parser.error("expected a formula, input is empty"));
    }
    let formula = parser.formula(0)?;
    match parser.peek() {
        None => Ok(formula),
        Some(t) => Err(parser.error(format!("unexpected {} after the formula", t.describe()))),
    }
}

impl FromStr for Formula<String> {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Formula<String>, ParseError> {
        parse_tokens(s, lex(s)?)
    }
}

/// Parses one formula per line; blank lines and `#` comments are skipped.
pub fn parse_formula_list(text: &str) -> Result<Vec<Formula<String>>, ParseError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let fix = |mut e: ParseError| {
            // the parser saw a single line, so only its column stands
            e.line = i + 1;
            e
        };
        let toks = lex(line).map_err(fix)?;
        if toks.is_empty() {
            continue;
        }
        out.push(parse_tokens(line, toks).map_err(fix)?);
    }
    Ok(out)
}
