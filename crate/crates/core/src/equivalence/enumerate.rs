//! Canonical formula enumeration for the bounded theory oracle.
//!
//! Conjunction and disjunction are associative, commutative and idempotent,
//! so enumerating raw syntax trees burns almost all its effort on
//! rearrangements of the same formula. A formula is *canonical* when every
//! `&`-chain is right-nested with strictly increasing, non-`&` elements
//! (increasing by the derived structural order), and dually for `|`. Any
//! formula can be flattened, sorted and deduplicated into a canonical
//! formula of the same meaning and no larger size, so checking all
//! canonical formulas up to a size bound covers all formulas up to it.

use std::collections::HashMap;

use crate::formula::Formula;
use crate::lts::{FiniteLts, LabelId};

use super::OracleError;

/// All canonical formulas over labels `0..num_labels`, with size at most
/// `max_size` and modal depth at most `max_depth`, ordered by size and
/// then by the derived structural order.
pub fn canonical_formulas(
    num_labels: usize,
    max_size: usize,
    max_depth: usize,
) -> Vec<Formula<LabelId>> {
    let pools = build_pools(num_labels, max_size, max_depth);
    let mut out = Vec::new();
    for pool in &pools[1..=max_size] {
        out.extend(pool[max_depth].any.iter().cloned());
    }
    out
}

#[derive(Default)]
struct Pool {
    // sorted; `any` is simple plus both chain kinds
    any: Vec<Formula<LabelId>>,
    simple: Vec<Formula<LabelId>>,
    and_chains: Vec<Formula<LabelId>>,
    or_chains: Vec<Formula<LabelId>>,
    // simple plus the opposite chain kind: the legal chain elements
    non_and: Vec<Formula<LabelId>>,
    non_or: Vec<Formula<LabelId>>,
}

// pools[size][depth]; row 0 stays empty, formulas have size at least 1
fn build_pools(num_labels: usize, max_size: usize, max_depth: usize) -> Vec<Vec<Pool>> {
    let mut pools: Vec<Vec<Pool>> = (0..=max_size)
        .map(|_| (0..=max_depth).map(|_| Pool::default()).collect())
        .collect();

    for size in 1..=max_size {
        for depth in 0..=max_depth {
            let mut pool = Pool::default();
            if size == 1 {
                pool.simple = vec![Formula::True, Formula::False];
            } else if depth > 0 {
                for l in 0..num_labels {
                    for body in &pools[size - 1][depth - 1].any {
                        pool.simple.push(Formula::diamond(LabelId(l), body.clone()));
                        pool.simple.push(Formula::box_(LabelId(l), body.clone()));
                    }
                }
            }
            pool.simple.sort_unstable();

            for seq in chains(|sz| &pools[sz][depth].non_and[..], size) {
                pool.and_chains.push(Formula::conj(seq));
            }
            for seq in chains(|sz| &pools[sz][depth].non_or[..], size) {
                pool.or_chains.push(disj(seq));
            }
            pool.and_chains.sort_unstable();
            pool.or_chains.sort_unstable();

            let sorted_union = |a: &[Formula<LabelId>], b: &[Formula<LabelId>]| {
                let mut out: Vec<Formula<LabelId>> = a.iter().chain(b).cloned().collect();
                out.sort_unstable();
                out
            };
            pool.non_and = sorted_union(&pool.simple, &pool.or_chains);
            pool.non_or = sorted_union(&pool.simple, &pool.and_chains);
            pool.any = sorted_union(&pool.non_and, &pool.and_chains);
            pools[size][depth] = pool;
        }
    }
    pools
}

// right-nested disjunction; elements come in ascending order
fn disj(parts: Vec<Formula<LabelId>>) -> Formula<LabelId> {
    parts
        .into_iter()
        .rev()
        .reduce(|acc, p| Formula::or(p, acc))
        .expect("chains have at least two elements")
}

/// Strictly increasing sequences of at least two elements, drawing
/// elements of size `sz` from the sorted `pool(sz)`. A sequence costs the
/// sum of its element sizes plus one connective per element after the
/// first, and must cost exactly `budget`.
fn chains<'a>(
    pool: impl Fn(usize) -> &'a [Formula<LabelId>],
    budget: usize,
) -> Vec<Vec<Formula<LabelId>>> {
    fn rec<'a, P: Fn(usize) -> &'a [Formula<LabelId>]>(
        pool: &P,
        remaining: usize,
        acc: &mut Vec<Formula<LabelId>>,
        out: &mut Vec<Vec<Formula<LabelId>>>,
    ) {
        if remaining == 0 {
            if acc.len() >= 2 {
                out.push(acc.clone());
            }
            return;
        }
        let connective = usize::from(!acc.is_empty());
        for size in 1..=remaining.saturating_sub(connective) {
            let elems = pool(size);
            let start = match acc.last() {
                None => 0,
                Some(last) => elems.partition_point(|e| e <= last),
            };
            for e in &elems[start..] {
                acc.push(e.clone());
                rec(pool, remaining - size - connective, acc, out);
                acc.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(&pool, budget, &mut Vec::new(), &mut out);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum DagNode {
    True,
    False,
    And(usize, usize),
    Or(usize, usize),
    Diamond(usize, usize),
    Box(usize, usize),
}

/// A reusable bounded theory checker.
///
/// Construction enumerates every canonical formula within the bounds and
/// hash-conses them into one DAG; [`TheoryOracle::theory_classes`] then
/// evaluates that DAG per system, sharing work across all the formulas.
/// Build it once when sweeping many systems with the same bounds.
pub struct TheoryOracle {
    num_labels: usize,
    // children precede parents
    nodes: Vec<DagNode>,
    // node of each canonical formula, in enumeration order
    roots: Vec<usize>,
}

impl TheoryOracle {
    pub fn new(
        num_labels: usize,
        max_size: usize,
        max_depth: usize,
    ) -> Result<TheoryOracle, OracleError> {
        let caps = [
            ("number of labels", num_labels, super::ORACLE_MAX_LABELS),
            ("formula size bound", max_size, super::ORACLE_MAX_SIZE),
            ("formula depth bound", max_depth, super::ORACLE_MAX_DEPTH),
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
        let mut nodes: Vec<DagNode> = Vec::new();
        let mut index: HashMap<DagNode, usize> = HashMap::new();
        fn intern(
            f: &Formula<LabelId>,
            nodes: &mut Vec<DagNode>,
            index: &mut HashMap<DagNode, usize>,
        ) -> usize {
            let node = match f {
                Formula::True => DagNode::True,
                Formula::False => DagNode::False,
                Formula::And(p, q) => {
                    DagNode::And(intern(p, nodes, index), intern(q, nodes, index))
                }
                Formula::Or(p, q) => DagNode::Or(intern(p, nodes, index), intern(q, nodes, index)),
                Formula::Diamond(l, p) => DagNode::Diamond(l.0, intern(p, nodes, index)),
                Formula::Box(l, p) => DagNode::Box(l.0, intern(p, nodes, index)),
            };
            *index.entry(node).or_insert_with(|| {
                nodes.push(node);
                nodes.len() - 1
            })
        }
        let roots = canonical_formulas(num_labels, max_size, max_depth)
            .iter()
            .map(|f| intern(f, &mut nodes, &mut index))
            .collect();
        Ok(TheoryOracle {
            num_labels,
            nodes,
            roots,
        })
    }

    /// Groups the states of `lts` by which of the enumerated formulas they
    /// satisfy. Class ids are dense, numbered by smallest member, so the
    /// result compares directly against a [`bisimilarity`] partition.
    ///
    /// Stops refining — and stops evaluating formulas — once every state
    /// sits alone in its class.
    ///
    /// [`bisimilarity`]: super::bisimilarity
    pub fn theory_classes(&self, lts: &FiniteLts) -> Result<Vec<usize>, OracleError> {
        let n = lts.num_states();
        if n > super::ORACLE_MAX_STATES {
            return Err(OracleError::TooLarge {
                quantity: "number of states",
                value: n,
                max: super::ORACLE_MAX_STATES,
            });
        }
        if lts.num_labels() != self.num_labels {
            return Err(OracleError::TooLarge {
                quantity: "number of labels",
                value: lts.num_labels(),
                max: self.num_labels,
            });
        }
        if n == 0 {
            return Ok(Vec::new());
        }

        // within the caps every state fits one machine word, so
        // denotations are plain u64 masks
        let full: u64 = !0 >> (64 - n);
        let num_labels = lts.num_labels();
        let mut image = vec![0u64; n * num_labels.max(1)];
        for &(src, label, dst) in lts.transitions() {
            image[src.0 * num_labels + label.0] |= 1 << dst.0;
        }

        let mut vals = vec![0u64; self.nodes.len()];
        let mut evaluated = 0;
        let mut class_of = vec![0usize; n];
        let mut num_classes = 1;
        // scratch for renumbering: (old class, member bit) -> new class
        let mut remap = vec![usize::MAX; 2 * n];

        for &root in &self.roots {
            while evaluated <= root {
                vals[evaluated] = match self.nodes[evaluated] {
                    DagNode::True => full,
                    DagNode::False => 0,
                    DagNode::And(p, q) => vals[p] & vals[q],
                    DagNode::Or(p, q) => vals[p] | vals[q],
                    DagNode::Diamond(l, p) => {
                        let mut w = 0;
                        for s in 0..n {
                            if image[s * num_labels + l] & vals[p] != 0 {
                                w |= 1 << s;
                            }
                        }
                        w
                    }
                    DagNode::Box(l, p) => {
                        let mut w = 0;
                        for s in 0..n {
                            if image[s * num_labels + l] & !vals[p] == 0 {
                                w |= 1 << s;
                            }
                        }
                        w
                    }
                };
                evaluated += 1;
            }

            let den = vals[root];
            remap[..2 * num_classes].fill(usize::MAX);
            let mut next = 0;
            for (s, class) in class_of.iter_mut().enumerate() {
                let key = 2 * *class + ((den >> s) & 1) as usize;
                if remap[key] == usize::MAX {
                    remap[key] = next;
                    next += 1;
                }
                *class = remap[key];
            }
            num_classes = next;
            if num_classes == n {
                break;
            }
        }
        Ok(class_of)
    }
}
