//! Parser for the CCS surface syntax.
//!
//! A source file is line-oriented: `Name = process` lines define
//! constants, any other non-blank line is a root process, and `#` starts
//! a comment. Within a process, `+` binds weakest, then `|`, then
//! restriction `\ {a, b}`, then prefixing, and `+`/`|` associate to the
//! right. `tau` is the silent action and cannot name a channel or a
//! constant. An identifier is a constant unless a `.` follows it, which
//! makes it an action prefix.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use thiserror::Error;

use super::{Action, CcsDefs, CcsError, CcsProgram, GuardViolation, Process};

/// Where parsing failed and why. Lines and columns are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {message}")]
pub struct CcsParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

// guards the recursion into parenthesised groups; each group costs a
// handful of stack frames, so this stays well below the default stack
const MAX_NESTING: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Zero,
    Dot,
    Plus,
    Pipe,
    Backslash,
    LBrace,
    RBrace,
    Comma,
    Equals,
    LParen,
    RParen,
    Ident(String),
    CoIdent(String),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Zero => "`0`".to_string(),
            Tok::Dot => "`.`".to_string(),
            Tok::Plus => "`+`".to_string(),
            Tok::Pipe => "`|`".to_string(),
            Tok::Backslash => "`\\`".to_string(),
            Tok::LBrace => "`{`".to_string(),
            Tok::RBrace => "`}`".to_string(),
            Tok::Comma => "`,`".to_string(),
            Tok::Equals => "`=`".to_string(),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
            Tok::Ident(n) => format!("identifier `{n}`"),
            Tok::CoIdent(n) => format!("co-name `'{n}`"),
        }
    }
}

fn position(src: &str, offset: usize) -> (usize, usize) {
    let mut line = 1;
    let mut col = 1;
    for (i, c) in src.char_indices() {
        if i >= offset {
            break;
        }
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

// offsets in the errors are byte offsets into `src`
fn lex(src: &str) -> Result<Vec<(usize, Tok)>, (usize, String)> {
    let mut toks = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c == '#' {
            while chars.next_if(|&(_, c)| c != '\n').is_some() {}
            continue;
        }
        let simple = match c {
            '.' => Some(Tok::Dot),
            '+' => Some(Tok::Plus),
            '|' => Some(Tok::Pipe),
            '\\' => Some(Tok::Backslash),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ',' => Some(Tok::Comma),
            '=' => Some(Tok::Equals),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            chars.next();
            toks.push((i, tok));
            continue;
        }
        if c == '0' {
            chars.next();
            if chars.peek().is_some_and(|&(_, c)| is_ident_continue(c)) {
                return Err((i, "identifiers cannot start with a digit".to_string()));
            }
            toks.push((i, Tok::Zero));
            continue;
        }
        if c.is_ascii_digit() {
            return Err((i, "identifiers cannot start with a digit".to_string()));
        }
        if c == '\'' {
            chars.next();
            let start = match chars.peek() {
                Some(&(j, c)) if is_ident_start(c) => j,
                _ => return Err((i, "expected a name after `'`".to_string())),
            };
            let mut end = start;
            while let Some(&(j, c)) = chars.peek() {
                if is_ident_continue(c) {
                    end = j + c.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            toks.push((i, Tok::CoIdent(src[start..end].to_string())));
            continue;
        }
        if is_ident_start(c) {
            let mut end = i;
            while let Some(&(j, c)) = chars.peek() {
                if is_ident_continue(c) {
                    end = j + c.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            toks.push((i, Tok::Ident(src[i..end].to_string())));
            continue;
        }
        return Err((i, format!("unexpected character `{c}`")));
    }
    Ok(toks)
}

struct Parser<'a> {
    src_len: usize,
    toks: &'a [(usize, Tok)],
    pos: usize,
}

type PResult<T> = Result<T, (usize, String)>;

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.src_len, |&(i, _)| i)
    }

    fn bump(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t);
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: &Tok) -> PResult<()> {
        match self.peek() {
            Some(t) if t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err((
                self.offset(),
                format!("expected {}, found {}", want.describe(), t.describe()),
            )),
            None => Err((
                self.offset(),
                format!("expected {}, found end of input", want.describe()),
            )),
        }
    }

    fn sum(&mut self, depth: usize) -> PResult<Process> {
        let mut parts = vec![self.par(depth)?];
        while self.peek() == Some(&Tok::Plus) {
            self.pos += 1;
            parts.push(self.par(depth)?);
        }
        Ok(parts
            .into_iter()
            .rev()
            .reduce(|acc, p| Process::sum(p, acc))
            .expect("at least one summand"))
    }

    fn par(&mut self, depth: usize) -> PResult<Process> {
        let mut parts = vec![self.restrict(depth)?];
        while self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            parts.push(self.restrict(depth)?);
        }
        Ok(parts
            .into_iter()
            .rev()
            .reduce(|acc, p| Process::par(p, acc))
            .expect("at least one component"))
    }

    fn restrict(&mut self, depth: usize) -> PResult<Process> {
        let mut p = self.prefix(depth)?;
        while self.peek() == Some(&Tok::Backslash) {
            self.pos += 1;
            self.expect(&Tok::LBrace)?;
            let mut names = BTreeSet::new();
            if self.peek() != Some(&Tok::RBrace) {
                loop {
                    let at = self.offset();
                    match self.bump() {
                        Some(Tok::Ident(n)) if n == "tau" => {
                            return Err((at, "cannot restrict `tau`".to_string()));
                        }
                        Some(Tok::Ident(n)) => {
                            names.insert(n.clone());
                        }
                        Some(Tok::CoIdent(n)) => {
                            return Err((
                                at,
                                format!(
                                    "restriction sets list channel names; `{n}` covers `'{n}` too"
                                ),
                            ));
                        }
                        Some(t) => {
                            return Err((at, format!("expected a name, found {}", t.describe())));
                        }
                        None => {
                            return Err((at, "expected a name, found end of input".to_string()));
                        }
                    }
                    if self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
            }
            self.expect(&Tok::RBrace)?;
            p = Process::Restrict(Box::new(p), names);
        }
        Ok(p)
    }

    // an identifier or co-name followed by `.` is an action prefix; the
    // chain is collected iteratively so its length is unbounded
    fn prefix(&mut self, depth: usize) -> PResult<Process> {
        let mut actions = Vec::new();
        loop {
            let action = match (self.peek(), self.peek2()) {
                (Some(Tok::Ident(n)), Some(Tok::Dot)) if n == "tau" => Action::Tau,
                (Some(Tok::Ident(n)), Some(Tok::Dot)) => Action::Name(n.clone()),
                (Some(Tok::CoIdent(n)), Some(Tok::Dot)) => Action::CoName(n.clone()),
                (Some(Tok::Ident(n)), _) if n == "tau" => {
                    return Err((
                        self.offset(),
                        "`tau` is the silent action; expected `.` after it".to_string(),
                    ));
                }
                (Some(Tok::CoIdent(n)), _) => {
                    return Err((
                        self.offset(),
                        format!("co-name `'{n}` is an action; expected `.` after it"),
                    ));
                }
                _ => break,
            };
            actions.push(action);
            self.pos += 2;
        }
        let mut p = self.prim(depth)?;
        for a in actions.into_iter().rev() {
            p = Process::prefix(a, p);
        }
        Ok(p)
    }

    fn prim(&mut self, depth: usize) -> PResult<Process> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Zero) => Ok(Process::Nil),
            Some(Tok::Ident(n)) => Ok(Process::Const(n.clone())),
            Some(Tok::LParen) => {
                if depth >= MAX_NESTING {
                    return Err((at, format!("more than {MAX_NESTING} nested groups")));
                }
                let p = self.sum(depth + 1)?;
                self.expect(&Tok::RParen)?;
                Ok(p)
            }
            Some(t) => Err((at, format!("expected a process, found {}", t.describe()))),
            None => Err((at, "expected a process, found end of input".to_string())),
        }
    }
}

fn parse_tokens(src: &str, toks: &[(usize, Tok)]) -> PResult<Process> {
    let mut parser = Parser {
        src_len: src.len(),
        toks,
        pos: 0,
    };
    let p = parser.sum(0)?;
    match parser.peek() {
        None => Ok(p),
        Some(t) => Err((
            parser.offset(),
            format!("expected end of input, found {}", t.describe()),
        )),
    }
}

fn error_at(src: &str, base_line: usize, offset: usize, message: String) -> CcsParseError {
    let (line, col) = position(src, offset);
    CcsParseError {
        line: base_line + line - 1,
        col,
        message,
    }
}

/// Parses a single process expression.
///
/// Constants are kept symbolic — nothing here checks that they are
/// defined anywhere.
pub fn parse_process(text: &str) -> Result<Process, CcsParseError> {
    let toks = lex(text).map_err(|(off, msg)| error_at(text, 1, off, msg))?;
    if toks.is_empty() {
        return Err(error_at(
            text,
            1,
            text.len(),
            "expected a process".to_string(),
        ));
    }
    parse_tokens(text, &toks).map_err(|(off, msg)| error_at(text, 1, off, msg))
}

impl FromStr for CcsProgram {
    type Err = CcsParseError;

    fn from_str(s: &str) -> Result<CcsProgram, CcsParseError> {
        let mut defs: BTreeMap<String, Process> = BTreeMap::new();
        let mut def_lines: BTreeMap<String, usize> = BTreeMap::new();
        let mut roots: Vec<(usize, Process)> = Vec::new();
        for (i, raw) in s.lines().enumerate() {
            let lineno = i + 1;
            let toks = lex(raw).map_err(|(off, msg)| error_at(raw, lineno, off, msg))?;
            if toks.is_empty() {
                continue;
            }
            if let [(name_at, Tok::Ident(name)), (_, Tok::Equals), rest @ ..] = &toks[..] {
                if name == "tau" {
                    return Err(error_at(
                        raw,
                        lineno,
                        *name_at,
                        "`tau` is the silent action and cannot be defined".to_string(),
                    ));
                }
                if def_lines.contains_key(name) {
                    return Err(error_at(
                        raw,
                        lineno,
                        *name_at,
                        format!("duplicate definition of `{name}`"),
                    ));
                }
                let body = parse_tokens(raw, rest)
                    .map_err(|(off, msg)| error_at(raw, lineno, off, msg))?;
                def_lines.insert(name.clone(), lineno);
                defs.insert(name.clone(), body);
            } else {
                let root = parse_tokens(raw, &toks)
                    .map_err(|(off, msg)| error_at(raw, lineno, off, msg))?;
                roots.push((lineno, root));
            }
        }
        let defs = CcsDefs::new(defs).map_err(|e| {
            let definition = match &e {
                CcsError::UnresolvedIn { definition, .. } => definition,
                CcsError::Unguarded(GuardViolation { definition, .. }) => definition,
                _ => unreachable!("definition validation only reports those two"),
            };
            CcsParseError {
                line: def_lines[definition],
                col: 1,
                message: e.to_string(),
            }
        })?;
        for (line, root) in &roots {
            let mut used = BTreeSet::new();
            super::constants(root, &mut used);
            for c in used {
                if defs.get(c).is_none() {
                    return Err(CcsParseError {
                        line: *line,
                        col: 1,
                        message: format!("undefined constant `{c}`"),
                    });
                }
            }
        }
        Ok(CcsProgram {
            defs,
            roots: roots.into_iter().map(|(_, p)| p).collect(),
        })
    }
}
