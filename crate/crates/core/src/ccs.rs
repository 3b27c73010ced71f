//! A small CCS front-end.
//!
//! Processes are built from inaction `0`, action prefixes `a.P` (with
//! co-actions `'a` and the silent action `tau`), choice `P + Q`, parallel
//! composition `P | Q`, restriction `P \ {a, b}` and named constants.
//! [`step`] implements the usual transition rules: a prefix fires, a sum
//! commits to a branch, parallel components interleave or synchronise a
//! name with its co-name into `tau`, restriction blocks the listed names
//! (never `tau`), and a constant unfolds to its definition.
//!
//! Definitions must be *guarded* — in every definition body, constants may
//! appear only under an action prefix. That keeps unfolding structural:
//! [`step`] terminates and [`reachable_lts`] explores a well-defined state
//! space one prefix at a time. Recursion through parallel composition can
//! still make that space infinite, so exploration carries a state budget.
//!
//! States of the resulting system are process terms up to structural
//! equality only; no algebraic laws are applied when deduplicating. Two
//! reachable terms like `0 | a.0` and `a.0 | 0` are distinct states (they
//! are, of course, bisimilar).

mod parse;

pub use parse::{parse_process, CcsParseError};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::lts::{FiniteLts, StateId};

/// An action: a name, its co-name, or the silent action.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Name(String),
    CoName(String),
    Tau,
}

impl Action {
    /// The transition label this action produces: `a`, `'a` or `tau`.
    pub fn label(&self) -> String {
        match self {
            Action::Name(n) => n.clone(),
            Action::CoName(n) => format!("'{n}"),
            Action::Tau => "tau".to_string(),
        }
    }

    /// The channel name, shared by an action and its co-action; `None`
    /// for `tau`.
    pub fn channel(&self) -> Option<&str> {
        match self {
            Action::Name(n) | Action::CoName(n) => Some(n),
            Action::Tau => None,
        }
    }

    /// The synchronisation partner: swaps name and co-name, fixes `tau`.
    pub fn co(&self) -> Action {
        match self {
            Action::Name(n) => Action::CoName(n.clone()),
            Action::CoName(n) => Action::Name(n.clone()),
            Action::Tau => Action::Tau,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            Action::Name(n) => write!(f, "{n}"),
            Action::CoName(n) => write!(f, "'{n}"),
            Action::Tau => write!(f, "tau"),
        }
    }
}

/// A process term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Process {
    Nil,
    Prefix(Action, Box<Process>),
    Sum(Box<Process>, Box<Process>),
    Par(Box<Process>, Box<Process>),
    /// Restriction by a set of channel names (names, not co-names).
    Restrict(Box<Process>, BTreeSet<String>),
    Const(String),
}

impl Process {
    pub fn prefix(action: Action, p: Process) -> Process {
        Process::Prefix(action, Box::new(p))
    }

    pub fn sum(l: Process, r: Process) -> Process {
        Process::Sum(Box::new(l), Box::new(r))
    }

    pub fn par(l: Process, r: Process) -> Process {
        Process::Par(Box::new(l), Box::new(r))
    }

    pub fn restrict(p: Process, names: impl IntoIterator<Item = String>) -> Process {
        Process::Restrict(Box::new(p), names.into_iter().collect())
    }
}

// precedence for printing and parsing: `+` binds weakest, then `|`, then
// restriction, then prefix; prefix bodies are prefix-level, so restriction
// under a prefix needs parentheses
const PREC_SUM: u8 = 0;
const PREC_PAR: u8 = 1;
const PREC_RESTRICT: u8 = 2;
const PREC_PREFIX: u8 = 3;

impl Process {
    fn fmt_prec(&self, f: &mut fmt::Formatter, min: u8) -> fmt::Result {
        match self {
            Process::Nil => write!(f, "0"),
            Process::Const(name) => write!(f, "{name}"),
            Process::Prefix(a, p) => {
                let parens = min > PREC_PREFIX;
                if parens {
                    write!(f, "(")?;
                }
                write!(f, "{a}.")?;
                p.fmt_prec(f, PREC_PREFIX)?;
                if parens {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Process::Restrict(p, names) => {
                let parens = min > PREC_RESTRICT;
                if parens {
                    write!(f, "(")?;
                }
                p.fmt_prec(f, PREC_RESTRICT)?;
                write!(f, " \\ {{")?;
                for (i, n) in names.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{n}")?;
                }
                write!(f, "}}")?;
                if parens {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Process::Par(l, r) => {
                let parens = min > PREC_PAR;
                if parens {
                    write!(f, "(")?;
                }
                l.fmt_prec(f, PREC_PAR + 1)?;
                write!(f, " | ")?;
                r.fmt_prec(f, PREC_PAR)?;
                if parens {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Process::Sum(l, r) => {
                let parens = min > PREC_SUM;
                if parens {
                    write!(f, "(")?;
                }
                l.fmt_prec(f, PREC_SUM + 1)?;
                write!(f, " + ")?;
                r.fmt_prec(f, PREC_SUM)?;
                if parens {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

/// Prints with minimal parentheses; parses back to the same term as long
/// as all names are plain identifiers (which the parser guarantees).
impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        self.fmt_prec(f, PREC_SUM)
    }
}

/// A constant occurs outside any action prefix in a definition body.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("definition {definition:?} is unguarded: constant {constant:?} occurs outside any action prefix")]
pub struct GuardViolation {
    pub definition: String,
    pub constant: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CcsError {
    #[error("definition {definition:?} mentions undefined constant {constant:?}")]
    UnresolvedIn {
        definition: String,
        constant: String,
    },
    #[error("undefined constant {constant:?}")]
    Unresolved { constant: String },
    #[error(transparent)]
    Unguarded(#[from] GuardViolation),
    #[error("state budget exceeded: more than {limit} reachable processes")]
    StateBudget { limit: usize },
}

/// Checks that every constant in every definition body sits under at
/// least one action prefix. The violation names the offending occurrence:
/// `A = B + a.0` is flagged at `A` (for `B`) even when `B` itself is
/// impeccably defined.
pub fn check_guarded(defs: &BTreeMap<String, Process>) -> Result<(), GuardViolation> {
    fn walk(def: &str, p: &Process, guarded: bool) -> Result<(), GuardViolation> {
        match p {
            Process::Nil => Ok(()),
            Process::Const(x) => {
                if guarded {
                    Ok(())
                } else {
                    Err(GuardViolation {
                        definition: def.to_string(),
                        constant: x.clone(),
                    })
                }
            }
            Process::Prefix(_, q) => walk(def, q, true),
            Process::Sum(l, r) | Process::Par(l, r) => {
                walk(def, l, guarded)?;
                walk(def, r, guarded)
            }
            Process::Restrict(q, _) => walk(def, q, guarded),
        }
    }
    for (name, body) in defs {
        walk(name, body, false)?;
    }
    Ok(())
}

fn constants<'a>(p: &'a Process, out: &mut BTreeSet<&'a str>) {
    match p {
        Process::Nil => {}
        Process::Const(x) => {
            out.insert(x);
        }
        Process::Prefix(_, q) | Process::Restrict(q, _) => constants(q, out),
        Process::Sum(l, r) | Process::Par(l, r) => {
            constants(l, out);
            constants(r, out);
        }
    }
}

/// A validated set of process definitions: every constant mentioned in a
/// body is defined, and every definition is guarded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CcsDefs {
    defs: BTreeMap<String, Process>,
}

impl CcsDefs {
    pub fn new(defs: BTreeMap<String, Process>) -> Result<CcsDefs, CcsError> {
        for (name, body) in &defs {
            let mut used = BTreeSet::new();
            constants(body, &mut used);
            for c in used {
                if !defs.contains_key(c) {
                    return Err(CcsError::UnresolvedIn {
                        definition: name.clone(),
                        constant: c.to_string(),
                    });
                }
            }
        }
        check_guarded(&defs)?;
        Ok(CcsDefs { defs })
    }

    pub fn empty() -> CcsDefs {
        CcsDefs {
            defs: BTreeMap::new(),
        }
    }

    pub fn get(&self, name: &str) -> Option<&Process> {
        self.defs.get(name)
    }

    /// Definitions in name order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &Process)> {
        self.defs.iter().map(|(n, p)| (n.as_str(), p))
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }
}

/// All transitions of `p`, by the standard rules.
///
/// The result is a set: branches that fire the same action into the same
/// term (like the two sides of `a.0 + a.0`) yield one transition.
/// Guardedness of `defs` keeps the unfolding finite; the only error is a
/// constant in `p` itself that `defs` does not define.
pub fn step(defs: &CcsDefs, p: &Process) -> Result<BTreeSet<(Action, Process)>, CcsError> {
    let mut out = BTreeSet::new();
    match p {
        Process::Nil => {}
        Process::Prefix(a, q) => {
            out.insert((a.clone(), (**q).clone()));
        }
        Process::Sum(l, r) => {
            out.extend(step(defs, l)?);
            out.extend(step(defs, r)?);
        }
        Process::Par(l, r) => {
            let left = step(defs, l)?;
            let right = step(defs, r)?;
            for (a, lp) in &left {
                out.insert((a.clone(), Process::par(lp.clone(), (**r).clone())));
            }
            for (b, rp) in &right {
                out.insert((b.clone(), Process::par((**l).clone(), rp.clone())));
            }
            // synchronisation: a name on one side, its co-name on the other
            for (a, lp) in &left {
                if *a == Action::Tau {
                    continue;
                }
                let partner = a.co();
                for (b, rp) in &right {
                    if *b == partner {
                        out.insert((Action::Tau, Process::par(lp.clone(), rp.clone())));
                    }
                }
            }
        }
        Process::Restrict(q, names) => {
            for (a, qp) in step(defs, q)? {
                let blocked = a.channel().is_some_and(|c| names.contains(c));
                if !blocked {
                    out.insert((a, Process::Restrict(Box::new(qp), names.clone())));
                }
            }
        }
        Process::Const(x) => {
            let body = defs.get(x).ok_or_else(|| CcsError::Unresolved {
                constant: x.clone(),
            })?;
            out = step(defs, body)?;
        }
    }
    Ok(out)
}

/// The transition system of all processes reachable from `roots`.
#[derive(Debug, Clone)]
pub struct CcsLts {
    pub lts: FiniteLts,
    /// The process term of each state.
    pub processes: Vec<Process>,
    /// States of the roots, in input order (duplicates collapse).
    pub roots: Vec<StateId>,
    index: HashMap<Process, usize>,
}

impl CcsLts {
    /// The state holding exactly this term, if it was reached.
    pub fn state_of(&self, p: &Process) -> Option<StateId> {
        self.index.get(p).copied().map(StateId)
    }
}

/// Default bound on the number of explored processes.
pub const DEFAULT_STATE_BUDGET: usize = 10_000;

/// Explores every process reachable from `roots`, deduplicating terms by
/// structural equality, and builds the finite system over them.
///
/// Labels are the action labels that occur, plus `tau` always, interned
/// in sorted order. Exploration aborts once more than `max_states`
/// distinct terms appear.
pub fn reachable_lts(
    defs: &CcsDefs,
    roots: &[Process],
    max_states: usize,
) -> Result<CcsLts, CcsError> {
    let mut processes: Vec<Process> = Vec::new();
    let mut index: HashMap<Process, usize> = HashMap::new();
    let mut root_ids = Vec::with_capacity(roots.len());
    let mut edges: Vec<(usize, Action, usize)> = Vec::new();

    let intern = |p: &Process,
                  processes: &mut Vec<Process>,
                  index: &mut HashMap<Process, usize>|
     -> Result<usize, CcsError> {
        if let Some(&i) = index.get(p) {
            return Ok(i);
        }
        if processes.len() == max_states {
            return Err(CcsError::StateBudget { limit: max_states });
        }
        processes.push(p.clone());
        index.insert(p.clone(), processes.len() - 1);
        Ok(processes.len() - 1)
    };

    for root in roots {
        root_ids.push(intern(root, &mut processes, &mut index)?);
    }
    let mut next = 0;
    while next < processes.len() {
        let from = processes[next].clone();
        for (action, to) in step(defs, &from)? {
            let j = intern(&to, &mut processes, &mut index)?;
            edges.push((next, action, j));
        }
        next += 1;
    }

    let mut label_set: BTreeSet<String> = edges.iter().map(|(_, a, _)| a.label()).collect();
    label_set.insert("tau".to_string());
    let labels: Vec<String> = label_set.into_iter().collect();
    let transitions: Vec<(usize, usize, usize)> = edges
        .into_iter()
        .map(|(i, a, j)| {
            let l = labels
                .binary_search(&a.label())
                .expect("label was collected");
            (i, l, j)
        })
        .collect();
    let lts = FiniteLts::from_parts(processes.len(), labels, transitions)
        .expect("interned states and labels are in range");
    Ok(CcsLts {
        lts,
        processes,
        roots: root_ids.into_iter().map(StateId).collect(),
        index,
    })
}

/// A parsed source file: definitions plus the root processes listed in it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CcsProgram {
    pub defs: CcsDefs,
    pub roots: Vec<Process>,
}

impl CcsProgram {
    /// [`reachable_lts`] from this program's roots.
    pub fn reachable_lts(&self, max_states: usize) -> Result<CcsLts, CcsError> {
        reachable_lts(&self.defs, &self.roots, max_states)
    }
}
