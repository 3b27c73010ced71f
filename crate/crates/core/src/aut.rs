//! Reading and writing the Aldebaran `.aut` format.
//!
//! A file is a header `des (initial, num_transitions, num_states)` followed
//! by one `(source, label, target)` line per transition. Labels may be
//! quoted (with `\"` and `\\` escapes) or bare; the writer always quotes.
//!
//! The reader interns labels in sorted order, so the label table of a
//! parsed system depends only on the set of label names in the file, not on
//! the order transitions mention them. Label tables are recovered from the
//! transitions alone: a label that no transition uses does not survive a
//! write/read round trip.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::lts::{FiniteLts, LtsBuildError, StateId};

/// A labelled transition system together with its initial state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutFile {
    pub lts: FiniteLts,
    pub initial: StateId,
}

/// Error parsing an `.aut` file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("header declares {expected} transitions, file has {found}")]
    TransitionCount { expected: usize, found: usize },
    #[error("initial state {initial} out of range ({num_states} states)")]
    InitialOutOfRange { initial: usize, num_states: usize },
    #[error(transparent)]
    Lts(#[from] LtsBuildError),
}

impl FromStr for AutFile {
    type Err = AutParseError;

    fn from_str(s: &str) -> Result<AutFile, AutParseError> {
        let mut lines = s
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());

        let (line, header) = lines.next().ok_or(AutParseError::Syntax {
            line: 1,
            message: "empty file, expected a `des (...)` header".to_string(),
        })?;
        let (initial, num_transitions, num_states) = parse_header(header, line)?;

        let mut triples = Vec::with_capacity(num_transitions);
        let mut label_set = BTreeSet::new();
        for (line, text) in lines {
            let (src, label, dst) = parse_transition(text, line)?;
            label_set.insert(label.clone());
            triples.push((src, label, dst));
        }
        if triples.len() != num_transitions {
            return Err(AutParseError::TransitionCount {
                expected: num_transitions,
                found: triples.len(),
            });
        }

        let labels: Vec<String> = label_set.into_iter().collect();
        let indexed: Vec<(usize, usize, usize)> = triples
            .into_iter()
            .map(|(src, label, dst)| {
                // must be present: the set was built from these exact strings
                let id = labels.binary_search(&label).unwrap();
                (src, id, dst)
            })
            .collect();
        let lts = FiniteLts::from_parts(num_states, labels, indexed)?;
        if initial >= num_states {
            return Err(AutParseError::InitialOutOfRange {
                initial,
                num_states,
            });
        }
        Ok(AutFile {
            lts,
            initial: StateId(initial),
        })
    }
}

impl fmt::Display for AutFile {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        debug_assert!(self.lts.contains_state(self.initial));
        writeln!(
            f,
            "des ({},{},{})",
            self.initial,
            self.lts.num_transitions(),
            self.lts.num_states()
        )?;
        for &(src, label, dst) in self.lts.transitions() {
            write!(f, "({src},\"")?;
            for c in self.lts.label_name(label).chars() {
                if c == '"' || c == '\\' {
                    write!(f, "\\")?;
                }
                write!(f, "{c}")?;
            }
            writeln!(f, "\",{dst})")?;
        }
        Ok(())
    }
}

/// A cursor over one line of input.
struct Scan<'a> {
    rest: &'a str,
    line: usize,
}

impl<'a> Scan<'a> {
    fn new(text: &'a str, line: usize) -> Scan<'a> {
        Scan { rest: text, line }
    }

    fn error(&self, message: impl Into<String>) -> AutParseError {
        AutParseError::Syntax {
            line: self.line,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        self.rest = self.rest.trim_start();
    }

    fn expect(&mut self, c: char) -> Result<(), AutParseError> {
        self.skip_ws();
        match self.rest.strip_prefix(c) {
            Some(rest) => {
                self.rest = rest;
                Ok(())
            }
            None => Err(self.error(format!("expected {c:?} at {:?}", self.rest))),
        }
    }

    fn number(&mut self) -> Result<usize, AutParseError> {
        self.skip_ws();
        let end = self
            .rest
            .find(|c: char| !c.is_ascii_digit())
            .unwrap_or(self.rest.len());
        if end == 0 {
            return Err(self.error(format!("expected a number at {:?}", self.rest)));
        }
        let (digits, rest) = self.rest.split_at(end);
        self.rest = rest;
        digits
            .parse()
            .map_err(|_| self.error(format!("number {digits:?} out of range")))
    }

    /// A quoted or bare label, up to the next comma.
    fn label(&mut self) -> Result<String, AutParseError> {
        self.skip_ws();
        if let Some(rest) = self.rest.strip_prefix('"') {
            let mut out = String::new();
            let mut chars = rest.char_indices();
            while let Some((i, c)) = chars.next() {
                match c {
                    '"' => {
                        self.rest = &rest[i + 1..];
                        return Ok(out);
                    }
                    '\\' => match chars.next() {
                        Some((_, e @ ('"' | '\\'))) => out.push(e),
                        Some((_, e)) => {
                            return Err(self.error(format!("unknown escape \\{e} in label")))
                        }
                        None => break,
                    },
                    _ => out.push(c),
                }
            }
            Err(self.error("unterminated quoted label"))
        } else {
            let end = self.rest.find(',').unwrap_or(self.rest.len());
            let label = self.rest[..end].trim_end();
            if label.is_empty() || label.contains(['"', '(', ')']) {
                return Err(self.error(format!("expected a label at {:?}", self.rest)));
            }
            self.rest = &self.rest[end..];
            Ok(label.to_string())
        }
    }

    fn finish(&mut self) -> Result<(), AutParseError> {
        self.skip_ws();
        if self.rest.is_empty() {
            Ok(())
        } else {
            Err(self.error(format!("trailing input {:?}", self.rest)))
        }
    }
}

fn parse_header(text: &str, line: usize) -> Result<(usize, usize, usize), AutParseError> {
    let mut scan = Scan::new(text, line);
    scan.skip_ws();
    scan.rest = scan
        .rest
        .strip_prefix("des")
        .ok_or_else(|| scan.error("expected header `des (initial, transitions, states)`"))?;
    scan.expect('(')?;
    let initial = scan.number()?;
    scan.expect(',')?;
    let transitions = scan.number()?;
    scan.expect(',')?;
    let states = scan.number()?;
    scan.expect(')')?;
    scan.finish()?;
    Ok((initial, transitions, states))
}

fn parse_transition(text: &str, line: usize) -> Result<(usize, String, usize), AutParseError> {
    let mut scan = Scan::new(text, line);
    scan.expect('(')?;
    let src = scan.number()?;
    scan.expect(',')?;
    let label = scan.label()?;
    scan.expect(',')?;
    let dst = scan.number()?;
    scan.expect(')')?;
    scan.finish()?;
    Ok((src, label, dst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::LabelId;

    #[test]
    fn parses_a_small_file() {
        let aut: AutFile = "des (0,3,3)\n(0,\"a\",1)\n(1,\"b\",2)\n(2,\"a\",0)\n"
            .parse()
            .unwrap();
        assert_eq!(aut.initial, StateId(0));
        assert_eq!(aut.lts.num_states(), 3);
        assert_eq!(aut.lts.labels(), &["a".to_string(), "b".to_string()]);
        assert!(aut.lts.has_transition(StateId(2), LabelId(0), StateId(0)));
    }

    #[test]
    fn labels_intern_sorted_regardless_of_file_order() {
        let aut: AutFile = "des (0,2,2)\n(0,\"b\",1)\n(1,\"a\",0)\n".parse().unwrap();
        assert_eq!(aut.lts.labels(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn accepts_bare_labels_and_loose_whitespace() {
        let aut: AutFile = "des ( 1 , 2 , 3 )\n\n( 0 , tick tock , 1 )\n(1,a,2)\n"
            .parse()
            .unwrap();
        assert_eq!(aut.initial, StateId(1));
        assert_eq!(
            aut.lts.labels(),
            &["a".to_string(), "tick tock".to_string()]
        );
    }

    #[test]
    fn quoted_labels_unescape() {
        let aut: AutFile = r#"des (0,1,1)
(0,"say \"hi\" \\ wave",0)"#
            .parse()
            .unwrap();
        assert_eq!(aut.lts.labels(), &[r#"say "hi" \ wave"#.to_string()]);
    }

    #[test]
    fn display_round_trips() {
        let text = "des (1,3,3)\n(0,\"b\",1)\n(1,\"say \\\"hi\\\"\",2)\n(2,\"a\",0)\n";
        let aut: AutFile = text.parse().unwrap();
        let printed = aut.to_string();
        let reparsed: AutFile = printed.parse().unwrap();
        assert_eq!(reparsed, aut);
        // a second round is exact: labels are already sorted
        assert_eq!(reparsed.to_string(), printed);
    }

    #[test]
    fn rejects_wrong_transition_count() {
        let err = "des (0,2,2)\n(0,\"a\",1)\n".parse::<AutFile>().unwrap_err();
        assert_eq!(
            err,
            AutParseError::TransitionCount {
                expected: 2,
                found: 1
            }
        );
    }

    #[test]
    fn rejects_bad_initial_state() {
        let err = "des (2,1,2)\n(0,\"a\",1)\n".parse::<AutFile>().unwrap_err();
        assert_eq!(
            err,
            AutParseError::InitialOutOfRange {
                initial: 2,
                num_states: 2
            }
        );
        // zero states can have no initial state
        assert!("des (0,0,0)\n".parse::<AutFile>().is_err());
    }

    #[test]
    fn rejects_out_of_range_transition() {
        let err = "des (0,1,2)\n(0,\"a\",5)\n".parse::<AutFile>().unwrap_err();
        assert!(matches!(err, AutParseError::Lts(_)));
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = "des (0,1,2)\n(0,\"a\" 1)\n".parse::<AutFile>().unwrap_err();
        match err {
            AutParseError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
        assert!(matches!(
            "ddd (0,0,1)".parse::<AutFile>().unwrap_err(),
            AutParseError::Syntax { line: 1, .. }
        ));
    }
}
