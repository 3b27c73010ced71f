//! Bisimilarity, bisimulation checking and modal distinguishability.
//!
//! [`bisimilarity`] computes the coarsest bisimulation by signature-based
//! partition refinement, keeping the whole refinement forest so that
//! [`Partition::separation_round`] can answer *when* two states were told
//! apart. [`distinguishing_formula`] turns that answer into a modal formula
//! witnessing the difference, by the standard construction: pick a move one
//! side has into a class the other side cannot reach, then recurse into
//! strictly earlier rounds for the conjuncts.
//!
//! [`theory_eq`] decides "same modal theory". On finite systems that is the
//! same relation as bisimilarity (each class of the final partition is
//! characterised by a formula, so theory inclusion forces class equality),
//! which is what the implementation uses. [`theory_eq_bounded`] is the
//! independent route: enumerate all canonical formulas within given size
//! and depth bounds and compare satisfaction formula by formula. It is kept
//! deliberately separate so the two can be played against each other in
//! tests.

mod enumerate;

pub use enumerate::{canonical_formulas, TheoryOracle};

use std::collections::{BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::formula::Formula;
use crate::lts::{FiniteLts, LabelId, StateId};
use crate::semantics::{satisfies, EvalError};

/// One class instance in the refinement forest.
///
/// A node is the class of some round; when a later round splits it, the
/// fragments become child nodes. Roots are the classes of round 0.
#[derive(Debug, Clone, Copy)]
struct ForestNode {
    parent: usize,
    created_round: usize,
}

/// The result of partition refinement: the final classes plus the forest
/// recording how they were carved out, round by round.
#[derive(Debug, Clone)]
pub struct Partition {
    class_of: Vec<usize>,
    num_classes: usize,
    rounds: usize,
    // per state, the forest node of its final class
    leaf: Vec<usize>,
    nodes: Vec<ForestNode>,
}

impl Partition {
    pub fn num_states(&self) -> usize {
        self.class_of.len()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Rounds of refinement that changed something; the final partition is
    /// already stable after this many.
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Class of `state`, in `0..num_classes()`.
    ///
    /// Classes are numbered by smallest member, so class ids are stable
    /// across runs. Panics if `state` is out of range.
    pub fn class_of(&self, state: StateId) -> usize {
        self.class_of[state.0]
    }

    pub fn same_class(&self, a: StateId, b: StateId) -> bool {
        self.class_of[a.0] == self.class_of[b.0]
    }

    /// The classes, each sorted, indexed by class id.
    pub fn classes(&self) -> Vec<Vec<StateId>> {
        let mut out = vec![Vec::new(); self.num_classes];
        for (s, &c) in self.class_of.iter().enumerate() {
            out[c].push(StateId(s));
        }
        out
    }

    /// The first round that separated `a` from `b`, or `None` if they ended
    /// up in the same class.
    pub fn separation_round(&self, a: StateId, b: StateId) -> Option<usize> {
        let (mut na, mut nb) = (self.leaf[a.0], self.leaf[b.0]);
        if na == nb {
            return None;
        }
        // `created_round` strictly increases towards the leaves, so it
        // works as a depth for finding the common ancestor; the round that
        // split the ancestor is the creation round of its children
        let (mut ca, mut cb) = (na, nb);
        while na != nb {
            if self.nodes[na].created_round >= self.nodes[nb].created_round {
                ca = na;
                na = self.nodes[na].parent;
            } else {
                cb = nb;
                nb = self.nodes[nb].parent;
            }
        }
        debug_assert_eq!(self.nodes[ca].created_round, self.nodes[cb].created_round);
        Some(self.nodes[ca].created_round)
    }

    /// The forest node standing for the class of `state` after `round`
    /// rounds of refinement.
    fn node_at_round(&self, state: StateId, round: usize) -> usize {
        let mut n = self.leaf[state.0];
        while self.nodes[n].created_round > round {
            n = self.nodes[n].parent;
        }
        n
    }

    fn leaf_node(&self, state: StateId) -> usize {
        self.leaf[state.0]
    }

    /// The partition as an explicit relation: all pairs of same-class
    /// states, diagonal included. Quadratic in the class sizes.
    pub fn to_relation(&self) -> ExplicitRelation {
        let mut pairs = BTreeSet::new();
        for class in self.classes() {
            for &x in &class {
                for &y in &class {
                    pairs.insert((x, y));
                }
            }
        }
        ExplicitRelation { pairs }
    }
}

// a state's current class paired with its outgoing (label, class) signature
type SigKey<'a> = (usize, &'a [(usize, usize)]);

/// The coarsest partition of the states into bisimilarity classes.
///
/// Signature refinement: start from one class holding every state, then
/// repeatedly split classes by their outgoing (label, target class) sets
/// until nothing moves. Runs in O(rounds * transitions) with small
/// constants; rounds never exceeds the number of states.
pub fn bisimilarity(lts: &FiniteLts) -> Partition {
    let n = lts.num_states();
    if n == 0 {
        return Partition {
            class_of: Vec::new(),
            num_classes: 0,
            rounds: 0,
            leaf: Vec::new(),
            nodes: Vec::new(),
        };
    }

    let mut nodes = vec![ForestNode {
        parent: 0,
        created_round: 0,
    }];
    let mut current = vec![0usize; n];
    let mut rounds = 0;

    // per-state signatures, reused across rounds
    let mut sigs: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for round in 1.. {
        for sig in &mut sigs {
            sig.clear();
        }
        for &(src, label, dst) in lts.transitions() {
            sigs[src.0].push((label.0, current[dst.0]));
        }
        for sig in &mut sigs {
            sig.sort_unstable();
            sig.dedup();
        }

        // how many distinct signatures each class produced
        let mut distinct: HashSet<SigKey> = HashSet::new();
        for s in 0..n {
            distinct.insert((current[s], &sigs[s]));
        }
        let mut sig_count: HashMap<usize, usize> = HashMap::new();
        for &(class, _) in &distinct {
            *sig_count.entry(class).or_insert(0) += 1;
        }
        if sig_count.values().all(|&c| c == 1) {
            break;
        }
        rounds = round;

        // split in state order so fresh node ids are deterministic
        let mut assigned: HashMap<SigKey, usize> = HashMap::new();
        let old: Vec<usize> = current.clone();
        for s in 0..n {
            let class = old[s];
            if sig_count[&class] == 1 {
                continue;
            }
            let node = *assigned.entry((class, &sigs[s])).or_insert_with(|| {
                nodes.push(ForestNode {
                    parent: class,
                    created_round: round,
                });
                nodes.len() - 1
            });
            current[s] = node;
        }
    }

    // densify class ids by smallest member
    let mut class_of = vec![usize::MAX; n];
    let mut remap: HashMap<usize, usize> = HashMap::new();
    for s in 0..n {
        let next = remap.len();
        class_of[s] = *remap.entry(current[s]).or_insert(next);
    }
    let partition = Partition {
        class_of,
        num_classes: remap.len(),
        rounds,
        leaf: current,
        nodes,
    };
    debug_assert!(partition_is_stable(lts, &partition));
    partition
}

// every class must have one signature; cheap enough for a debug assert
fn partition_is_stable(lts: &FiniteLts, partition: &Partition) -> bool {
    let sig = |s: StateId| {
        let mut sig: Vec<(usize, usize)> = Vec::new();
        for l in lts.label_ids() {
            for &t in lts.image(s, l) {
                sig.push((l.0, partition.class_of(t)));
            }
        }
        sig.sort_unstable();
        sig.dedup();
        sig
    };
    let mut class_sig: Vec<Option<Vec<(usize, usize)>>> = vec![None; partition.num_classes()];
    lts.states().all(|s| {
        let expect = class_sig[partition.class_of(s)].get_or_insert_with(|| sig(s));
        *expect == sig(s)
    })
}

/// Whether `s1` and `s2` are bisimilar.
///
/// Computes the full partition; when asking about many pairs, call
/// [`bisimilarity`] once instead. Panics if a state is out of range.
pub fn bisimilar(lts: &FiniteLts, s1: StateId, s2: StateId) -> bool {
    assert!(lts.contains_state(s1), "state {s1} out of range");
    assert!(lts.contains_state(s2), "state {s2} out of range");
    bisimilarity(lts).same_class(s1, s2)
}

/// Whether `s1` and `s2` satisfy exactly the same formulas.
///
/// On finite (hence image-finite) systems this relation coincides with
/// bisimilarity: bisimilar states satisfy the same formulas (satisfaction
/// is invariant under bisimulation), and non-bisimilar states are told
/// apart by a concrete formula, the one [`distinguishing_formula`] builds.
/// So the implementation simply decides bisimilarity; the enumeration-based
/// [`theory_eq_bounded`] provides an independent check of the same answer.
pub fn theory_eq(lts: &FiniteLts, s1: StateId, s2: StateId) -> bool {
    bisimilar(lts, s1, s2)
}

/// An explicit relation on the states of one system, as ordered pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitRelation {
    pairs: BTreeSet<(StateId, StateId)>,
}

/// A relation was built with a state the system does not have.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("relation mentions state {state}, but the system has {num_states} states")]
pub struct RelationError {
    pub state: usize,
    pub num_states: usize,
}

impl ExplicitRelation {
    /// Builds a relation, checking every mentioned state against `lts`.
    pub fn from_pairs(
        lts: &FiniteLts,
        pairs: impl IntoIterator<Item = (StateId, StateId)>,
    ) -> Result<ExplicitRelation, RelationError> {
        let mut set = BTreeSet::new();
        for (a, b) in pairs {
            for s in [a, b] {
                if !lts.contains_state(s) {
                    return Err(RelationError {
                        state: s.0,
                        num_states: lts.num_states(),
                    });
                }
            }
            set.insert((a, b));
        }
        Ok(ExplicitRelation { pairs: set })
    }

    /// The identity relation on the states of `lts`.
    pub fn identity(lts: &FiniteLts) -> ExplicitRelation {
        ExplicitRelation {
            pairs: lts.states().map(|s| (s, s)).collect(),
        }
    }

    pub fn contains(&self, a: StateId, b: StateId) -> bool {
        self.pairs.contains(&(a, b))
    }

    /// Pairs in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (StateId, StateId)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Which side of a related pair made the unmatched move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Witness that a relation fails the bisimulation conditions: a related
/// pair, a move by one of its states, and no matching move on the other
/// side that lands back in the relation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct BisimViolation {
    pub left: StateId,
    pub right: StateId,
    pub label: LabelId,
    pub moved_to: StateId,
    pub side: Side,
}

impl std::fmt::Display for BisimViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        let (mover, stuck) = match self.side {
            Side::Left => (self.left, self.right),
            Side::Right => (self.right, self.left),
        };
        write!(
            f,
            "pair ({}, {}): {} moves via label {} to {}, and no move of {} matches it in the relation",
            self.left, self.right, mover, self.label, self.moved_to, stuck
        )
    }
}

/// Checks the two transfer conditions for every pair of `relation`.
///
/// For a pair (p, q): every move p --l--> p' needs some q --l--> q' with
/// (p', q') related, and every move q --l--> q' needs some p --l--> p' with
/// (p', q') related — pairs stay in left-right order in both directions, so
/// the relation itself need not be symmetric. The first failure in
/// (pair, label, target) order is returned.
pub fn is_bisimulation(lts: &FiniteLts, relation: &ExplicitRelation) -> Result<(), BisimViolation> {
    for (p, q) in relation.pairs() {
        for l in lts.label_ids() {
            let p_img = lts.image(p, l);
            let q_img = lts.image(q, l);
            for &pp in p_img {
                if !q_img.iter().any(|&qq| relation.contains(pp, qq)) {
                    return Err(BisimViolation {
                        left: p,
                        right: q,
                        label: l,
                        moved_to: pp,
                        side: Side::Left,
                    });
                }
            }
            for &qq in q_img {
                if !p_img.iter().any(|&pp| relation.contains(pp, qq)) {
                    return Err(BisimViolation {
                        left: p,
                        right: q,
                        label: l,
                        moved_to: qq,
                        side: Side::Right,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Outcome of asking for a distinguishing formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DistinguishResult {
    /// The states are bisimilar; no formula can separate them.
    Equivalent,
    /// `satisfied_by` satisfies `formula`, the other state does not.
    Distinguished {
        formula: Formula<LabelId>,
        satisfied_by: StateId,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistinguishError {
    #[error("state {state} out of range ({num_states} states)")]
    StateOutOfRange { state: usize, num_states: usize },
    #[error("internal error: synthesized formula does not distinguish {left} from {right}")]
    Verification { left: StateId, right: StateId },
    #[error("internal error: could not verify the synthesized formula: {0}")]
    Eval(#[from] EvalError),
}

/// Synthesizes a formula separating `s1` from `s2`, or reports them
/// bisimilar.
///
/// The formula is machine-checked against both states before being
/// returned; on success it is always satisfied by `s1`. Computes the
/// partition first — use [`distinguishing_formula_with`] to reuse one.
pub fn distinguishing_formula(
    lts: &FiniteLts,
    s1: StateId,
    s2: StateId,
) -> Result<DistinguishResult, DistinguishError> {
    distinguishing_formula_with(lts, &bisimilarity(lts), s1, s2)
}

/// [`distinguishing_formula`] against a precomputed [`bisimilarity`]
/// partition of the same system.
pub fn distinguishing_formula_with(
    lts: &FiniteLts,
    partition: &Partition,
    s1: StateId,
    s2: StateId,
) -> Result<DistinguishResult, DistinguishError> {
    assert_eq!(
        partition.num_states(),
        lts.num_states(),
        "partition was built for a different system"
    );
    for s in [s1, s2] {
        if !lts.contains_state(s) {
            return Err(DistinguishError::StateOutOfRange {
                state: s.0,
                num_states: lts.num_states(),
            });
        }
    }
    if partition.same_class(s1, s2) {
        return Ok(DistinguishResult::Equivalent);
    }
    let mut synth = Synth {
        lts,
        partition,
        memo: HashMap::new(),
    };
    let formula = synth.distinguish(s1, s2);
    match (satisfies(lts, s1, &formula)?, satisfies(lts, s2, &formula)?) {
        (true, false) => Ok(DistinguishResult::Distinguished {
            formula,
            satisfied_by: s1,
        }),
        _ => Err(DistinguishError::Verification {
            left: s1,
            right: s2,
        }),
    }
}

struct Synth<'a> {
    lts: &'a FiniteLts,
    partition: &'a Partition,
    // keyed by final-class pairs: bisimilar states share formulas
    memo: HashMap<(usize, usize), Formula<LabelId>>,
}

impl Synth<'_> {
    /// A formula satisfied by `x` but not by `y`; the states must be in
    /// different classes. Recursion is on the separation round, which
    /// strictly decreases.
    fn distinguish(&mut self, x: StateId, y: StateId) -> Formula<LabelId> {
        let (lts, part) = (self.lts, self.partition);
        let key = (part.leaf_node(x), part.leaf_node(y));
        if let Some(f) = self.memo.get(&key) {
            return f.clone();
        }
        let k = part
            .separation_round(x, y)
            .expect("states in distinct classes");
        // round k split them, so their (label, round k-1 class) signatures
        // differ: some move below leads into a class the other state
        // cannot reach in one step
        let prev = k - 1;

        // (max separation round among the opposing targets, label, target):
        // smallest wins, keeping the recursion shallow and the choice
        // deterministic
        let mut best: Option<(usize, usize, usize)> = None;
        let mut mirror = false;
        for (swap, from, other) in [(false, x, y), (true, y, x)] {
            for l in lts.label_ids() {
                let other_img = lts.image(other, l);
                let mut other_classes: Vec<usize> = other_img
                    .iter()
                    .map(|&t| part.node_at_round(t, prev))
                    .collect();
                other_classes.sort_unstable();
                other_classes.dedup();
                for &cand in lts.image(from, l) {
                    if other_classes
                        .binary_search(&part.node_at_round(cand, prev))
                        .is_ok()
                    {
                        continue;
                    }
                    let worst = other_img
                        .iter()
                        .map(|&t| {
                            part.separation_round(cand, t)
                                .expect("candidate shares no class with opposing targets")
                        })
                        .max()
                        .unwrap_or(0);
                    let score = (worst, l.0, cand.0);
                    if best.is_none() || score < best.unwrap() {
                        best = Some(score);
                    }
                }
            }
            if best.is_some() {
                mirror = swap;
                break;
            }
        }
        let (_, l, w) = best.expect("differing signatures yield a candidate on some side");
        let (label, witness) = (LabelId(l), StateId(w));

        // the witness move lands in a class none of the opposing moves can
        // hit; saying so takes one conjunct per opposing target
        let opposing = if mirror { x } else { y };
        let mut parts: Vec<Formula<LabelId>> = Vec::new();
        for &t in lts.image(opposing, label) {
            let piece = self.distinguish(witness, t);
            if !parts.contains(&piece) {
                parts.push(piece);
            }
        }
        let mut formula = Formula::diamond(label, Formula::conj(parts));
        if mirror {
            formula = formula.neg();
        }
        self.memo.insert(key, formula.clone());
        formula
    }
}

/// A pair of a checked relation on which some formula changed its truth
/// value, contradicting invariance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvarianceViolation {
    /// Index into the formulas passed to the report.
    pub formula: usize,
    pub left: StateId,
    pub right: StateId,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvarianceError {
    #[error("the relation is not a bisimulation: {0}")]
    NotABisimulation(BisimViolation),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Checks that `formula` has the same truth value across every pair of
/// `relation`, after first checking that `relation` is a bisimulation.
///
/// Satisfaction is invariant under bisimulation, so the returned list of
/// offending pairs is provably empty; the checker makes the claim
/// falsifiable. A relation that is not a bisimulation is a precondition
/// failure and carries its transfer-condition counterexample.
pub fn bisimulation_invariance_check(
    lts: &FiniteLts,
    relation: &ExplicitRelation,
    formula: &Formula<LabelId>,
) -> Result<Vec<(StateId, StateId)>, InvarianceError> {
    let report = bisimulation_invariance_report(lts, relation, std::slice::from_ref(formula))?;
    Ok(report.into_iter().map(|v| (v.left, v.right)).collect())
}

/// [`bisimulation_invariance_check`] for many formulas at once: the
/// relation is checked once and satisfaction is evaluated once per
/// (state, formula), not once per pair.
pub fn bisimulation_invariance_report(
    lts: &FiniteLts,
    relation: &ExplicitRelation,
    formulas: &[Formula<LabelId>],
) -> Result<Vec<InvarianceViolation>, InvarianceError> {
    is_bisimulation(lts, relation).map_err(InvarianceError::NotABisimulation)?;
    let mut out = Vec::new();
    let mut truth: Vec<Option<bool>> = Vec::new();
    for (i, formula) in formulas.iter().enumerate() {
        truth.clear();
        truth.resize(lts.num_states(), None);
        for (p, q) in relation.pairs() {
            let mut value = |s: StateId| -> Result<bool, InvarianceError> {
                if let Some(v) = truth[s.0] {
                    return Ok(v);
                }
                let v = satisfies(lts, s, formula)?;
                truth[s.0] = Some(v);
                Ok(v)
            };
            if value(p)? != value(q)? {
                out.push(InvarianceViolation {
                    formula: i,
                    left: p,
                    right: q,
                });
            }
        }
    }
    Ok(out)
}

/// Caps for the bounded-enumeration oracle; beyond these it refuses to
/// run rather than take unbounded time.
pub const ORACLE_MAX_STATES: usize = 8;
pub const ORACLE_MAX_LABELS: usize = 2;
pub const ORACLE_MAX_SIZE: usize = 8;
pub const ORACLE_MAX_DEPTH: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("state {state} out of range ({num_states} states)")]
    StateOutOfRange { state: usize, num_states: usize },
    #[error("bounded oracle refuses to run: {quantity} is {value}, cap is {max}")]
    TooLarge {
        quantity: &'static str,
        value: usize,
        max: usize,
    },
}

fn oracle_check(
    lts: &FiniteLts,
    max_size: usize,
    max_depth: usize,
    states: &[StateId],
) -> Result<(), OracleError> {
    let caps = [
        ("number of states", lts.num_states(), ORACLE_MAX_STATES),
        ("number of labels", lts.num_labels(), ORACLE_MAX_LABELS),
        ("formula size bound", max_size, ORACLE_MAX_SIZE),
        ("formula depth bound", max_depth, ORACLE_MAX_DEPTH),
    ];
    for (quantity, value, max) in caps {
        if value > max {
            return Err(OracleError::TooLarge {
                quantity,
                value,
                max,
            });
        }
    }
    for &s in states {
        if !lts.contains_state(s) {
            return Err(OracleError::StateOutOfRange {
                state: s.0,
                num_states: lts.num_states(),
            });
        }
    }
    Ok(())
}

/// The first canonical formula, in (size, structure) order, on which `s1`
/// and `s2` disagree — a smallest distinguishing formula within the bounds.
///
/// Unlike [`distinguishing_formula`] this decides nothing up front: it
/// tries every canonical formula with size at most `max_size` and modal
/// depth at most `max_depth` against the satisfaction relation. `None`
/// means the states agree on all of them, not that they are equivalent —
/// though on systems where every distinction shows up within the bounds
/// (for instance, any system that small), the two coincide.
pub fn bounded_distinguishing_formula(
    lts: &FiniteLts,
    s1: StateId,
    s2: StateId,
    max_size: usize,
    max_depth: usize,
) -> Result<Option<Formula<LabelId>>, OracleError> {
    oracle_check(lts, max_size, max_depth, &[s1, s2])?;
    for formula in canonical_formulas(lts.num_labels(), max_size, max_depth) {
        // the formula is within caps and the states were checked, so
        // evaluation cannot fail
        let a = satisfies(lts, s1, &formula).expect("formula within oracle caps");
        let b = satisfies(lts, s2, &formula).expect("formula within oracle caps");
        if a != b {
            return Ok(Some(formula));
        }
    }
    Ok(None)
}

/// Whether `s1` and `s2` satisfy the same canonical formulas within the
/// bounds; see [`bounded_distinguishing_formula`] for the fine print.
pub fn theory_eq_bounded(
    lts: &FiniteLts,
    s1: StateId,
    s2: StateId,
    max_size: usize,
    max_depth: usize,
) -> Result<bool, OracleError> {
    Ok(bounded_distinguishing_formula(lts, s1, s2, max_size, max_depth)?.is_none())
}

/// Partitions all states by their bounded theories in one pass.
///
/// Returns a class id per state, numbered by smallest member — directly
/// comparable with the `class_of` vector of [`bisimilarity`]. Evaluation
/// runs over a hash-consed DAG of all canonical subformulas and stops as
/// soon as the partition is discrete, which keeps exhaustive sweeps over
/// many small systems fast.
pub fn bounded_theory_classes(
    lts: &FiniteLts,
    max_size: usize,
    max_depth: usize,
) -> Result<Vec<usize>, OracleError> {
    oracle_check(lts, max_size, max_depth, &[])?;
    TheoryOracle::new(lts.num_labels(), max_size, max_depth)?.theory_classes(lts)
}
