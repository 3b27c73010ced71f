//! Formula evaluation.
//!
//! Two routes to the same answer:
//!
//! - [`satisfies`] follows the satisfaction relation clause by clause,
//!   recursing over the formula and short-circuiting through successors;
//! - [`denotation`] computes the set of all satisfying states bottom-up,
//!   one [`StateSet`] per subformula.
//!
//! They agree on every state (see [`check_semantic_agreement`], which
//! reports the states where they would not).

use std::fmt;

use smallvec::{smallvec, SmallVec};
use thiserror::Error;

use crate::formula::Formula;
use crate::lts::{FiniteLts, LabelId, StateId};

/// A set of states of a fixed system, as a bit vector.
///
/// Sets of up to 64 states live inline without allocating. All binary
/// operations require both sides to have the same capacity.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StateSet {
    // trailing bits beyond `num_states` stay zero
    words: SmallVec<[u64; 1]>,
    num_states: usize,
}

impl StateSet {
    pub fn empty(num_states: usize) -> StateSet {
        StateSet {
            words: smallvec![0; num_states.div_ceil(64).max(1)],
            num_states,
        }
    }

    pub fn full(num_states: usize) -> StateSet {
        let mut set = StateSet::empty(num_states);
        set.complement();
        set
    }

    pub fn from_states(num_states: usize, states: impl IntoIterator<Item = StateId>) -> StateSet {
        let mut set = StateSet::empty(num_states);
        for s in states {
            set.insert(s);
        }
        set
    }

    /// Number of states of the underlying system, not of the set.
    pub fn capacity(&self) -> usize {
        self.num_states
    }

    pub fn insert(&mut self, state: StateId) {
        assert!(state.0 < self.num_states, "state {state} out of range");
        self.words[state.0 / 64] |= 1 << (state.0 % 64);
    }

    pub fn remove(&mut self, state: StateId) {
        assert!(state.0 < self.num_states, "state {state} out of range");
        self.words[state.0 / 64] &= !(1 << (state.0 % 64));
    }

    pub fn contains(&self, state: StateId) -> bool {
        assert!(state.0 < self.num_states, "state {state} out of range");
        self.words[state.0 / 64] & (1 << (state.0 % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn union_with(&mut self, other: &StateSet) {
        assert_eq!(self.num_states, other.num_states, "capacity mismatch");
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w |= o;
        }
    }

    pub fn intersect_with(&mut self, other: &StateSet) {
        assert_eq!(self.num_states, other.num_states, "capacity mismatch");
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w &= o;
        }
    }

    /// Flips the set in place.
    pub fn complement(&mut self) {
        for w in &mut self.words {
            *w = !*w;
        }
        // keep the invariant: bits past the capacity are zero
        let tail = self.num_states % 64;
        if tail != 0 {
            *self.words.last_mut().unwrap() &= (1 << tail) - 1;
        } else if self.num_states == 0 {
            self.words[0] = 0;
        }
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = StateId> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(StateId(i * 64 + bit))
            })
        })
    }
}

impl fmt::Display for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{{")?;
        for (i, s) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "StateSet({self} of {})", self.num_states)
    }
}

/// Evaluation refused to run or to continue.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("state {state} out of range ({num_states} states)")]
    StateOutOfRange { state: usize, num_states: usize },
    #[error("formula mentions label index {label}, but the system has {num_labels} labels")]
    LabelOutOfRange { label: usize, num_labels: usize },
    #[error("formula nests deeper than the recursion limit {limit}")]
    RecursionLimit { limit: usize },
}

/// Default bound on evaluation recursion depth.
///
/// Parsed formulas sit well below this; it exists so that formulas built
/// programmatically fail with an error instead of exhausting the stack.
pub const DEFAULT_RECURSION_LIMIT: usize = 10_000;

// labels are checked up front so that short-circuiting cannot hide a bad
// one behind `tt | ...`
fn check_labels(lts: &FiniteLts, formula: &Formula<LabelId>) -> Result<(), EvalError> {
    match formula {
        Formula::True | Formula::False => Ok(()),
        Formula::And(p, q) | Formula::Or(p, q) => {
            check_labels(lts, p)?;
            check_labels(lts, q)
        }
        Formula::Diamond(l, p) | Formula::Box(l, p) => {
            if l.0 >= lts.num_labels() {
                return Err(EvalError::LabelOutOfRange {
                    label: l.0,
                    num_labels: lts.num_labels(),
                });
            }
            check_labels(lts, p)
        }
    }
}

/// Whether `state` satisfies `formula`, by the satisfaction relation.
pub fn satisfies(
    lts: &FiniteLts,
    state: StateId,
    formula: &Formula<LabelId>,
) -> Result<bool, EvalError> {
    satisfies_with_limit(lts, state, formula, DEFAULT_RECURSION_LIMIT)
}

/// [`satisfies`] with an explicit recursion limit.
pub fn satisfies_with_limit(
    lts: &FiniteLts,
    state: StateId,
    formula: &Formula<LabelId>,
    limit: usize,
) -> Result<bool, EvalError> {
    if !lts.contains_state(state) {
        return Err(EvalError::StateOutOfRange {
            state: state.0,
            num_states: lts.num_states(),
        });
    }
    check_labels(lts, formula)?;
    satisfies_go(lts, state, formula, limit, limit)
}

fn satisfies_go(
    lts: &FiniteLts,
    state: StateId,
    formula: &Formula<LabelId>,
    depth_left: usize,
    limit: usize,
) -> Result<bool, EvalError> {
    if depth_left == 0 {
        return Err(EvalError::RecursionLimit { limit });
    }
    Ok(match formula {
        Formula::True => true,
        Formula::False => false,
        Formula::And(p, q) => {
            satisfies_go(lts, state, p, depth_left - 1, limit)?
                && satisfies_go(lts, state, q, depth_left - 1, limit)?
        }
        Formula::Or(p, q) => {
            satisfies_go(lts, state, p, depth_left - 1, limit)?
                || satisfies_go(lts, state, q, depth_left - 1, limit)?
        }
        Formula::Diamond(l, p) => {
            let mut found = false;
            for &t in lts.image(state, *l) {
                if satisfies_go(lts, t, p, depth_left - 1, limit)? {
                    found = true;
                    break;
                }
            }
            found
        }
        Formula::Box(l, p) => {
            let mut all = true;
            for &t in lts.image(state, *l) {
                if !satisfies_go(lts, t, p, depth_left - 1, limit)? {
                    all = false;
                    break;
                }
            }
            all
        }
    })
}

/// The set of all states satisfying `formula`, computed bottom-up.
pub fn denotation(lts: &FiniteLts, formula: &Formula<LabelId>) -> Result<StateSet, EvalError> {
    denotation_with_limit(lts, formula, DEFAULT_RECURSION_LIMIT)
}

/// [`denotation`] with an explicit recursion limit.
pub fn denotation_with_limit(
    lts: &FiniteLts,
    formula: &Formula<LabelId>,
    limit: usize,
) -> Result<StateSet, EvalError> {
    check_labels(lts, formula)?;
    if lts.num_states() <= 64 {
        let word = denotation_word(lts, formula, limit, limit)?;
        return Ok(StateSet {
            words: smallvec![word],
            num_states: lts.num_states(),
        });
    }
    denotation_go(lts, formula, limit, limit)
}

// states with a `label`-transition into `targets`
fn preimage_set(lts: &FiniteLts, label: LabelId, targets: &StateSet) -> StateSet {
    let mut out = StateSet::empty(lts.num_states());
    for t in targets.iter() {
        for &s in lts.preimage(t, label) {
            out.insert(s);
        }
    }
    out
}

fn denotation_go(
    lts: &FiniteLts,
    formula: &Formula<LabelId>,
    depth_left: usize,
    limit: usize,
) -> Result<StateSet, EvalError> {
    if depth_left == 0 {
        return Err(EvalError::RecursionLimit { limit });
    }
    Ok(match formula {
        Formula::True => StateSet::full(lts.num_states()),
        Formula::False => StateSet::empty(lts.num_states()),
        Formula::And(p, q) => {
            let mut set = denotation_go(lts, p, depth_left - 1, limit)?;
            set.intersect_with(&denotation_go(lts, q, depth_left - 1, limit)?);
            set
        }
        Formula::Or(p, q) => {
            let mut set = denotation_go(lts, p, depth_left - 1, limit)?;
            set.union_with(&denotation_go(lts, q, depth_left - 1, limit)?);
            set
        }
        Formula::Diamond(l, p) => {
            preimage_set(lts, *l, &denotation_go(lts, p, depth_left - 1, limit)?)
        }
        Formula::Box(l, p) => {
            // [l]p holds where no l-step leaves the denotation of p
            let mut body = denotation_go(lts, p, depth_left - 1, limit)?;
            body.complement();
            let mut out = preimage_set(lts, *l, &body);
            out.complement();
            out
        }
    })
}

// single-word variant of `denotation_go` for systems of at most 64 states;
// the exhaustive equivalence suites evaluate hundreds of millions of tiny
// instances, so the set bookkeeping of the general path is worth skipping.
fn denotation_word(
    lts: &FiniteLts,
    formula: &Formula<LabelId>,
    depth_left: usize,
    limit: usize,
) -> Result<u64, EvalError> {
    if depth_left == 0 {
        return Err(EvalError::RecursionLimit { limit });
    }
    let n = lts.num_states();
    let full = if n == 0 { 0 } else { u64::MAX >> (64 - n) };
    Ok(match formula {
        Formula::True => full,
        Formula::False => 0,
        Formula::And(p, q) => {
            denotation_word(lts, p, depth_left - 1, limit)?
                & denotation_word(lts, q, depth_left - 1, limit)?
        }
        Formula::Or(p, q) => {
            denotation_word(lts, p, depth_left - 1, limit)?
                | denotation_word(lts, q, depth_left - 1, limit)?
        }
        Formula::Diamond(l, p) => {
            preimage_word(lts, *l, denotation_word(lts, p, depth_left - 1, limit)?)
        }
        Formula::Box(l, p) => {
            let body = denotation_word(lts, p, depth_left - 1, limit)?;
            full & !preimage_word(lts, *l, full & !body)
        }
    })
}

fn preimage_word(lts: &FiniteLts, label: LabelId, targets: u64) -> u64 {
    let mut out = 0u64;
    let mut rest = targets;
    while rest != 0 {
        let t = StateId(rest.trailing_zeros() as usize);
        rest &= rest - 1;
        for &s in lts.preimage(t, label) {
            out |= 1 << s.0;
        }
    }
    out
}

/// States where [`satisfies`] and membership in [`denotation`] disagree.
///
/// Both semantics provably coincide, so the result being empty is an
/// invariant; the checker exists to make that claim testable.  The formula
/// is validated once rather than per state, so sweeping it over a large
/// family of systems costs little more than the evaluations themselves.
pub fn check_semantic_agreement(
    lts: &FiniteLts,
    formula: &Formula<LabelId>,
) -> Result<StateSet, EvalError> {
    check_labels(lts, formula)?;
    let limit = DEFAULT_RECURSION_LIMIT;
    let n = lts.num_states();
    let mut mismatches = StateSet::empty(n);
    if n <= 64 {
        let denoted = denotation_word(lts, formula, limit, limit)?;
        for s in lts.states() {
            if satisfies_go(lts, s, formula, limit, limit)? != (denoted >> s.0 & 1 == 1) {
                mismatches.insert(s);
            }
        }
    } else {
        let denoted = denotation_go(lts, formula, limit, limit)?;
        for s in lts.states() {
            if satisfies_go(lts, s, formula, limit, limit)? != denoted.contains(s) {
                mismatches.insert(s);
            }
        }
    }
    Ok(mismatches)
}
