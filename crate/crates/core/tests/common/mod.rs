//! Generators shared by the integration suites: the exhaustive grid of
//! small systems, and seeded random systems, formulas and process terms.

use hml_core::ccs::{Action, CcsDefs, CcsProgram, Process};
use hml_core::{FiniteLts, Formula};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every system with exactly `num_states` states over `labels`, one per
/// subset of S × L × S. The bit for (s, l, t) is s·k·n + l·n + t.
pub fn all_systems(
    num_states: usize,
    labels: &'static [&'static str],
) -> impl Iterator<Item = FiniteLts> {
    let n = num_states;
    let k = labels.len();
    let bits = n * k * n;
    assert!(bits < 63, "grid too large to enumerate");
    (0u64..(1 << bits)).map(move |mask| {
        let transitions = (0..bits).filter(|b| mask >> b & 1 == 1).map(|b| {
            let t = b % n;
            let l = (b / n) % k;
            let s = b / (n * k);
            (s, l, t)
        });
        let labels = labels.iter().map(|s| s.to_string()).collect();
        FiniteLts::from_parts(n, labels, transitions).expect("grid transitions are in range")
    })
}

/// The full grid behind the exhaustive suites: every system with at most
/// 3 states and 1 or 2 labels — 262,936 systems in all.
pub fn small_grid() -> impl Iterator<Item = FiniteLts> {
    const ALPHABETS: [&[&str]; 2] = [&["a"], &["a", "b"]];
    (0..=3).flat_map(|n| ALPHABETS.into_iter().flat_map(move |ls| all_systems(n, ls)))
}

/// A random sparse system: 1..=max_states states, 1..=max_labels labels
/// named `l0`, `l1`, …, and at most `3n` transitions, so per-label
/// branching stays small. Labels may go unused.
pub fn random_lts(rng: &mut ChaCha8Rng, max_states: usize, max_labels: usize) -> FiniteLts {
    let n = rng.random_range(1..=max_states);
    let k = rng.random_range(1..=max_labels);
    let labels: Vec<String> = (0..k).map(|i| format!("l{i}")).collect();
    let m = rng.random_range(0..=3 * n);
    let transitions: Vec<(usize, usize, usize)> = (0..m)
        .map(|_| {
            (
                rng.random_range(0..n),
                rng.random_range(0..k),
                rng.random_range(0..n),
            )
        })
        .collect();
    FiniteLts::from_parts(n, labels, transitions).expect("generated transitions are in range")
}

/// Like [`random_lts`], but every label occurs in some transition and the
/// names exercise the `.aut` quoting rules — the shape an `.aut` file
/// represents faithfully.
pub fn random_aut_lts(rng: &mut ChaCha8Rng, max_states: usize, max_labels: usize) -> FiniteLts {
    let n = rng.random_range(1..=max_states);
    let k = rng.random_range(1..=max_labels);
    // sorted, as the parser interns them; index i keeps them distinct
    let labels: Vec<String> = (0..k)
        .map(|i| match i % 4 {
            0 => format!("l{i}"),
            1 => format!("act {i}"),
            2 => format!("q\"uote{i}"),
            _ => format!("'co{i}"),
        })
        .collect();
    let mut labels = labels;
    labels.sort();
    let mut transitions: Vec<(usize, usize, usize)> = (0..k)
        .map(|l| (rng.random_range(0..n), l, rng.random_range(0..n)))
        .collect();
    for _ in 0..rng.random_range(0..=3 * n) {
        transitions.push((
            rng.random_range(0..n),
            rng.random_range(0..k),
            rng.random_range(0..n),
        ));
    }
    FiniteLts::from_parts(n, labels, transitions).expect("generated transitions are in range")
}

/// A random formula over the given labels with modal depth ≤ `max_depth`,
/// kept small by a node budget.
pub fn random_formula(
    rng: &mut ChaCha8Rng,
    labels: &[String],
    max_depth: usize,
) -> Formula<String> {
    fn go(
        rng: &mut ChaCha8Rng,
        labels: &[String],
        depth: usize,
        fuel: &mut usize,
    ) -> Formula<String> {
        if *fuel == 0 {
            return if rng.random_bool(0.5) {
                Formula::True
            } else {
                Formula::False
            };
        }
        *fuel -= 1;
        let modal_ok = depth > 0 && !labels.is_empty();
        match rng.random_range(0..8u32) {
            0 => Formula::True,
            1 => Formula::False,
            2 => Formula::and(go(rng, labels, depth, fuel), go(rng, labels, depth, fuel)),
            3 => Formula::or(go(rng, labels, depth, fuel), go(rng, labels, depth, fuel)),
            n if modal_ok => {
                let label = labels[rng.random_range(0..labels.len())].clone();
                let body = go(rng, labels, depth - 1, fuel);
                if n % 2 == 0 {
                    Formula::diamond(label, body)
                } else {
                    Formula::box_(label, body)
                }
            }
            n => {
                if n % 2 == 0 {
                    Formula::True
                } else {
                    Formula::False
                }
            }
        }
    }
    let mut fuel = 40;
    go(rng, labels, max_depth, &mut fuel)
}

/// A random formula whose labels range over bare, co-name, quoted and
/// keyword-shaped names — food for the printer/parser round trip.
pub fn random_named_formula(rng: &mut ChaCha8Rng, max_depth: usize) -> Formula<String> {
    const NAMES: [&str; 8] = ["a", "b2", "'c", "tau", "tt", "_x", "odd label", "q\"uote"];
    let labels: Vec<String> = NAMES.iter().map(|s| s.to_string()).collect();
    random_formula(rng, &labels, max_depth)
}

/// A fixed guarded definition set for random process terms.
pub fn ccs_defs() -> CcsDefs {
    let program: CcsProgram = "A = a.A\nB = b.A + a.'b.B\nC = 'a.C + tau.A\n"
        .parse()
        .expect("the fixture parses");
    program.defs
}

/// A random process over [`ccs_defs`]: constants are guarded there, so
/// any term built from them keeps exploration finite per step.
pub fn random_term(rng: &mut ChaCha8Rng, depth: usize) -> Process {
    const ACTIONS: [&str; 5] = ["a", "b", "'a", "'b", "tau"];
    const CONSTS: [&str; 3] = ["A", "B", "C"];
    if depth == 0 {
        return match rng.random_range(0..3u32) {
            0 => Process::Nil,
            _ => Process::Const(CONSTS[rng.random_range(0..CONSTS.len())].to_string()),
        };
    }
    match rng.random_range(0..10u32) {
        0 => Process::Nil,
        1 => Process::Const(CONSTS[rng.random_range(0..CONSTS.len())].to_string()),
        2..=5 => {
            let name = ACTIONS[rng.random_range(0..ACTIONS.len())];
            let action = match name.strip_prefix('\'') {
                _ if name == "tau" => Action::Tau,
                Some(n) => Action::CoName(n.to_string()),
                None => Action::Name(name.to_string()),
            };
            Process::prefix(action, random_term(rng, depth - 1))
        }
        6 | 7 => Process::sum(random_term(rng, depth - 1), random_term(rng, depth - 1)),
        8 => Process::par(random_term(rng, depth - 1), random_term(rng, depth - 1)),
        _ => {
            let names: Vec<String> = ["a", "b"]
                .into_iter()
                .filter(|_| rng.random_bool(0.5))
                .map(|s| s.to_string())
                .collect();
            Process::restrict(random_term(rng, depth - 1), names)
        }
    }
}
