//! Modal formulas.
//!
//! The grammar is negation-free: `tt`, `ff`, conjunction, disjunction and
//! the two modalities `<a>` ("some `a`-successor satisfies") and `[a]`
//! ("every `a`-successor satisfies"). Negation is the derived structural
//! transform [`Formula::neg`], which swaps the duals and pushes nothing
//! inward because there is nothing to push: the grammar is closed under it.
//!
//! Formulas are generic in the label type: parsers produce
//! `Formula<String>`, evaluation wants `Formula<LabelId>` (see
//! [`Formula::resolve`]).

mod parse;

pub use parse::{parse_formula_list, ParseError};

use std::fmt;

use thiserror::Error;

use crate::lts::{FiniteLts, LabelId};

/// A formula of Hennessy-Milner logic over labels `L`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula<L> {
    True,
    False,
    And(Box<Formula<L>>, Box<Formula<L>>),
    Or(Box<Formula<L>>, Box<Formula<L>>),
    Diamond(L, Box<Formula<L>>),
    Box(L, Box<Formula<L>>),
}

impl<L> Formula<L> {
    pub fn and(p: Formula<L>, q: Formula<L>) -> Formula<L> {
        Formula::And(Box::new(p), Box::new(q))
    }

    pub fn or(p: Formula<L>, q: Formula<L>) -> Formula<L> {
        Formula::Or(Box::new(p), Box::new(q))
    }

    pub fn diamond(label: L, body: Formula<L>) -> Formula<L> {
        Formula::Diamond(label, Box::new(body))
    }

    pub fn box_(label: L, body: Formula<L>) -> Formula<L> {
        Formula::Box(label, Box::new(body))
    }

    /// Right-nested conjunction of `parts`; the empty conjunction is `tt`.
    pub fn conj(parts: impl IntoIterator<Item = Formula<L>>) -> Formula<L> {
        let mut parts: Vec<Formula<L>> = parts.into_iter().collect();
        let Some(mut acc) = parts.pop() else {
            return Formula::True;
        };
        while let Some(p) = parts.pop() {
            acc = Formula::and(p, acc);
        }
        acc
    }

    /// The dual formula: a state satisfies `f.neg()` iff it does not
    /// satisfy `f`.
    pub fn neg(&self) -> Formula<L>
    where
        L: Clone,
    {
        match self {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::And(p, q) => Formula::or(p.neg(), q.neg()),
            Formula::Or(p, q) => Formula::and(p.neg(), q.neg()),
            Formula::Diamond(l, p) => Formula::box_(l.clone(), p.neg()),
            Formula::Box(l, p) => Formula::diamond(l.clone(), p.neg()),
        }
    }

    /// Maximum nesting depth of modalities.
    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::True | Formula::False => 0,
            Formula::And(p, q) | Formula::Or(p, q) => p.modal_depth().max(q.modal_depth()),
            Formula::Diamond(_, p) | Formula::Box(_, p) => 1 + p.modal_depth(),
        }
    }

    /// Number of AST nodes, counting each connective, modality and atom.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False => 1,
            Formula::And(p, q) | Formula::Or(p, q) => 1 + p.size() + q.size(),
            Formula::Diamond(_, p) | Formula::Box(_, p) => 1 + p.size(),
        }
    }

    pub fn map_labels<M>(&self, mut f: impl FnMut(&L) -> M) -> Formula<M> {
        fn go<L, M>(form: &Formula<L>, f: &mut impl FnMut(&L) -> M) -> Formula<M> {
            match form {
                Formula::True => Formula::True,
                Formula::False => Formula::False,
                Formula::And(p, q) => Formula::and(go(p, f), go(q, f)),
                Formula::Or(p, q) => Formula::or(go(p, f), go(q, f)),
                Formula::Diamond(l, p) => Formula::diamond(f(l), go(p, f)),
                Formula::Box(l, p) => Formula::box_(f(l), go(p, f)),
            }
        }
        go(self, &mut f)
    }

    pub fn try_map_labels<M, E>(
        &self,
        mut f: impl FnMut(&L) -> Result<M, E>,
    ) -> Result<Formula<M>, E> {
        fn go<L, M, E>(
            form: &Formula<L>,
            f: &mut impl FnMut(&L) -> Result<M, E>,
        ) -> Result<Formula<M>, E> {
            Ok(match form {
                Formula::True => Formula::True,
                Formula::False => Formula::False,
                Formula::And(p, q) => Formula::and(go(p, f)?, go(q, f)?),
                Formula::Or(p, q) => Formula::or(go(p, f)?, go(q, f)?),
                Formula::Diamond(l, p) => Formula::diamond(f(l)?, go(p, f)?),
                Formula::Box(l, p) => Formula::box_(f(l)?, go(p, f)?),
            })
        }
        go(self, &mut f)
    }
}

/// A formula mentions a label the system does not have.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("formula mentions label {name:?}, which the system does not have")]
pub struct UnknownLabelError {
    pub name: String,
}

impl Formula<String> {
    /// Replaces label names by their indices in `lts`.
    pub fn resolve(&self, lts: &FiniteLts) -> Result<Formula<LabelId>, UnknownLabelError> {
        self.try_map_labels(|name| {
            lts.label_id(name)
                .ok_or_else(|| UnknownLabelError { name: name.clone() })
        })
    }
}

impl Formula<LabelId> {
    /// Replaces label indices by their names in `lts`.
    ///
    /// Panics if the formula mentions an index out of range for `lts`.
    pub fn with_label_names(&self, lts: &FiniteLts) -> Formula<String> {
        self.map_labels(|&l| lts.label_name(l).to_string())
    }
}

// precedence levels for printing and parsing: `|` binds weakest, then `&`,
// then the modalities; both binary connectives are right-associative
const PREC_OR: u8 = 0;
const PREC_AND: u8 = 1;
const PREC_MODAL: u8 = 2;

fn label_is_bare(name: &str) -> bool {
    let rest = name.strip_prefix('\'').unwrap_or(name);
    let mut chars = rest.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn write_label(f: &mut fmt::Formatter, name: &str) -> fmt::Result {
    if label_is_bare(name) {
        return write!(f, "{name}");
    }
    write!(f, "\"")?;
    for c in name.chars() {
        if c == '"' || c == '\\' {
            write!(f, "\\")?;
        }
        write!(f, "{c}")?;
    }
    write!(f, "\"")
}

impl Formula<String> {
    fn fmt_prec(&self, f: &mut fmt::Formatter, min: u8) -> fmt::Result {
        match self {
            Formula::True => write!(f, "tt"),
            Formula::False => write!(f, "ff"),
            Formula::Or(p, q) => {
                let parens = min > PREC_OR;
                if parens {
                    write!(f, "(")?;
                }
                p.fmt_prec(f, PREC_OR + 1)?;
                write!(f, " | ")?;
                q.fmt_prec(f, PREC_OR)?;
                if parens {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Formula::And(p, q) => {
                let parens = min > PREC_AND;
                if parens {
                    write!(f, "(")?;
                }
                p.fmt_prec(f, PREC_AND + 1)?;
                write!(f, " & ")?;
                q.fmt_prec(f, PREC_AND)?;
                if parens {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Formula::Diamond(l, p) => {
                write!(f, "<")?;
                write_label(f, l)?;
                write!(f, ">")?;
                p.fmt_prec(f, PREC_MODAL)
            }
            Formula::Box(l, p) => {
                write!(f, "[")?;
                write_label(f, l)?;
                write!(f, "]")?;
                p.fmt_prec(f, PREC_MODAL)
            }
        }
    }
}

/// Prints with the minimal parentheses the grammar needs back.
impl fmt::Display for Formula<String> {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        self.fmt_prec(f, PREC_OR)
    }
}
