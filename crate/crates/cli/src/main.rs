//! `hml` — query finite labelled transition systems with
//! Hennessy–Milner Logic from the command line.
//!
//! Systems load from `.aut` files or compile from `.ccs` programs; the
//! subcommands evaluate formulas, compute bisimilarity, synthesise
//! distinguishing formulas, decide theory equivalence, and dump compiled
//! CCS state spaces. Exit codes are part of the interface: 0 for a
//! positive answer, 1 for a negative one, 2 for usage, parse and
//! resource errors, 3 for an internal invariant violation (which would
//! mean a bug, not bad input).

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use hml_core::aut::AutFile;
use hml_core::ccs::{parse_process, reachable_lts, CcsLts, CcsProgram};
use hml_core::equivalence::{
    bisimilarity, bounded_theory_classes, distinguishing_formula_with, theory_eq, DistinguishResult,
};
use hml_core::formula::parse_formula_list;
use hml_core::semantics::{denotation, satisfies};
use hml_core::{FiniteLts, Formula, StateId, StateSet};

#[derive(Parser)]
#[command(
    name = "hml",
    version,
    about = "Hennessy-Milner Logic queries over finite transition systems",
    after_help = "Systems are .aut files or .ccs programs (by extension). States are numeric \
                  ids; for .ccs systems a process expression works too and is added to the \
                  compiled roots. A formula argument starting with `@` names a file with one \
                  formula per line."
)]
struct Cli {
    /// Print machine-readable key=value records instead of prose.
    #[arg(long, global = true)]
    records: bool,
    /// Report elapsed wall-clock time.
    #[arg(long, global = true)]
    timings: bool,
    /// State budget when compiling .ccs programs.
    #[arg(long, global = true, value_name = "N", default_value_t = hml_core::ccs::DEFAULT_STATE_BUDGET)]
    max_states: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate formulas at a state (true/false).
    Check {
        system: PathBuf,
        state: String,
        #[arg(required = true)]
        formulas: Vec<String>,
        /// Also evaluate denotationally and verify both semantics agree.
        #[arg(long)]
        both_semantics: bool,
    },
    /// Print the set of states satisfying each formula.
    Denote {
        system: PathBuf,
        #[arg(required = true)]
        formulas: Vec<String>,
    },
    /// Compare two states for bisimilarity, or print the full partition.
    Bisim {
        system: PathBuf,
        /// Either no states (full partition) or exactly two.
        states: Vec<String>,
    },
    /// Synthesise a formula telling two states apart.
    Distinguish {
        system: PathBuf,
        left: String,
        right: String,
    },
    /// Decide whether two states satisfy exactly the same formulas.
    TheoryEq {
        system: PathBuf,
        left: String,
        right: String,
        /// Decide by enumerating all canonical formulas within the given
        /// bounds instead of via bisimilarity (tiny systems only).
        #[arg(long, num_args = 2, value_names = ["MAX_SIZE", "MAX_DEPTH"])]
        oracle: Option<Vec<usize>>,
    },
    /// Compile a CCS program to its reachable transition system.
    Ccs {
        program: PathBuf,
        /// Extra root processes to explore from, besides those in the file.
        roots: Vec<String>,
        /// Write the compiled system to an .aut file (initial = first root).
        #[arg(long, value_name = "PATH")]
        emit_aut: Option<PathBuf>,
    },
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> CliError {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> CliError {
        CliError {
            code: 3,
            message: message.into(),
        }
    }
}

/// Writes either prose or `key=value` records, never both.
struct Out {
    records: bool,
}

impl Out {
    fn kv(&self, key: &str, value: impl fmt::Display) {
        if self.records {
            println!("{key}={value}");
        }
    }

    fn prose(&self, line: impl fmt::Display) {
        if !self.records {
            println!("{line}");
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok(code) => {
            if cli.timings {
                let ms = start.elapsed().as_millis();
                if cli.records {
                    println!("time_ms={ms}");
                } else {
                    println!("time: {ms} ms");
                }
            }
            ExitCode::from(code)
        }
        Err(e) => {
            let prefix = if e.code == 3 {
                "internal error"
            } else {
                "error"
            };
            eprintln!("{prefix}: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    let out = Out {
        records: cli.records,
    };
    match &cli.command {
        Command::Check {
            system,
            state,
            formulas,
            both_semantics,
        } => cmd_check(
            &out,
            system,
            state,
            formulas,
            *both_semantics,
            cli.max_states,
        ),
        Command::Denote { system, formulas } => cmd_denote(&out, system, formulas, cli.max_states),
        Command::Bisim { system, states } => cmd_bisim(&out, system, states, cli.max_states),
        Command::Distinguish {
            system,
            left,
            right,
        } => cmd_distinguish(&out, system, left, right, cli.max_states),
        Command::TheoryEq {
            system,
            left,
            right,
            oracle,
        } => cmd_theory_eq(&out, system, left, right, oracle.as_deref(), cli.max_states),
        Command::Ccs {
            program,
            roots,
            emit_aut,
        } => cmd_ccs(&out, program, roots, cli.max_states, emit_aut.as_deref()),
    }
}

/// A loaded transition system; CCS-compiled ones keep their process table
/// so states can be referenced by expression.
enum System {
    Aut(FiniteLts),
    Ccs(CcsLts),
}

fn is_numeric(spec: &str) -> bool {
    !spec.is_empty() && spec.bytes().all(|b| b.is_ascii_digit())
}

fn load_system(path: &Path, state_refs: &[&String], max_states: usize) -> Result<System, CliError> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let read = || {
        fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
    };
    match ext {
        "aut" => {
            let aut: AutFile = read()?
                .parse()
                .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
            Ok(System::Aut(aut.lts))
        }
        "ccs" => {
            let program: CcsProgram = read()?
                .parse()
                .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
            let mut roots = program.roots.clone();
            // expression state references become roots, so they are
            // guaranteed to be states of the compiled system
            for spec in state_refs {
                if !is_numeric(spec) {
                    roots.push(
                        parse_process(spec)
                            .map_err(|e| CliError::usage(format!("state {spec:?}: {e}")))?,
                    );
                }
            }
            let ccs = reachable_lts(&program.defs, &roots, max_states)
                .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
            Ok(System::Ccs(ccs))
        }
        _ => Err(CliError::usage(format!(
            "{}: unsupported extension (expected .aut or .ccs)",
            path.display()
        ))),
    }
}

impl System {
    fn lts(&self) -> &FiniteLts {
        match self {
            System::Aut(lts) => lts,
            System::Ccs(ccs) => &ccs.lts,
        }
    }

    fn resolve_state(&self, spec: &str) -> Result<StateId, CliError> {
        if is_numeric(spec) {
            let id: usize = spec
                .parse()
                .map_err(|_| CliError::usage(format!("state {spec:?} is not a valid number")))?;
            if id >= self.lts().num_states() {
                return Err(CliError::usage(format!(
                    "state {id} is out of range ({} states)",
                    self.lts().num_states()
                )));
            }
            return Ok(StateId(id));
        }
        match self {
            System::Aut(_) => Err(CliError::usage(format!(
                "state {spec:?}: states of .aut systems are referenced by number"
            ))),
            System::Ccs(ccs) => {
                let term = parse_process(spec)
                    .map_err(|e| CliError::usage(format!("state {spec:?}: {e}")))?;
                ccs.state_of(&term).ok_or_else(|| {
                    CliError::usage(format!("process `{term}` is not a compiled state"))
                })
            }
        }
    }
}

/// Expands each argument: `@path` loads one formula per line, anything
/// else parses inline.
fn load_formulas(args: &[String]) -> Result<Vec<Formula<String>>, CliError> {
    let mut out = Vec::new();
    for arg in args {
        if let Some(path) = arg.strip_prefix('@') {
            let text =
                fs::read_to_string(path).map_err(|e| CliError::usage(format!("{path}: {e}")))?;
            let formulas =
                parse_formula_list(&text).map_err(|e| CliError::usage(format!("{path}: {e}")))?;
            if formulas.is_empty() {
                return Err(CliError::usage(format!("{path}: no formulas in file")));
            }
            out.extend(formulas);
        } else {
            out.push(
                arg.parse()
                    .map_err(|e| CliError::usage(format!("formula {arg:?}: {e}")))?,
            );
        }
    }
    Ok(out)
}

fn cmd_check(
    out: &Out,
    system: &Path,
    state: &str,
    formula_args: &[String],
    both: bool,
    max_states: usize,
) -> Result<u8, CliError> {
    let sys = load_system(system, &[&state.to_string()], max_states)?;
    let lts = sys.lts();
    let s = sys.resolve_state(state)?;
    let formulas = load_formulas(formula_args)?;
    out.kv("command", "check");
    out.kv("system", system.display());
    out.kv("state", s.0);
    let many = formulas.len() > 1;
    let mut all_true = true;
    for formula in &formulas {
        let resolved = formula
            .resolve(lts)
            .map_err(|e| CliError::usage(e.to_string()))?;
        let sat = satisfies(lts, s, &resolved).map_err(|e| CliError::usage(e.to_string()))?;
        out.kv("formula", formula);
        out.kv("result", sat);
        if both {
            let den = denotation(lts, &resolved).map_err(|e| CliError::usage(e.to_string()))?;
            if den.contains(s) != sat {
                return Err(CliError::internal(format!(
                    "inductive and denotational semantics disagree on {formula} at state {}",
                    s.0
                )));
            }
            out.kv("agreement", "ok");
        }
        if many {
            out.prose(format_args!("{formula}: {sat}"));
        } else {
            out.prose(sat);
        }
        all_true &= sat;
    }
    Ok(if all_true { 0 } else { 1 })
}

fn cmd_denote(
    out: &Out,
    system: &Path,
    formula_args: &[String],
    max_states: usize,
) -> Result<u8, CliError> {
    let sys = load_system(system, &[], max_states)?;
    let lts = sys.lts();
    let formulas = load_formulas(formula_args)?;
    out.kv("command", "denote");
    out.kv("system", system.display());
    let many = formulas.len() > 1;
    for formula in &formulas {
        let resolved = formula
            .resolve(lts)
            .map_err(|e| CliError::usage(e.to_string()))?;
        let set = denotation(lts, &resolved).map_err(|e| CliError::usage(e.to_string()))?;
        out.kv("formula", formula);
        out.kv("states", &set);
        if many {
            out.prose(format_args!("{formula}: {set}"));
        } else {
            out.prose(&set);
        }
    }
    Ok(0)
}

fn cmd_bisim(
    out: &Out,
    system: &Path,
    states: &[String],
    max_states: usize,
) -> Result<u8, CliError> {
    let refs: Vec<&String> = states.iter().collect();
    let sys = load_system(system, &refs, max_states)?;
    let lts = sys.lts();
    out.kv("command", "bisim");
    out.kv("system", system.display());
    match states {
        [] => {
            let partition = bisimilarity(lts);
            out.kv("num_classes", partition.num_classes());
            for class in partition.classes() {
                let set = StateSet::from_states(lts.num_states(), class.iter().copied());
                out.kv("class", &set);
            }
            for (i, class) in partition.classes().into_iter().enumerate() {
                let set = StateSet::from_states(lts.num_states(), class);
                out.prose(format_args!("class {i}: {set}"));
            }
            Ok(0)
        }
        [a, b] => {
            let (s1, s2) = (sys.resolve_state(a)?, sys.resolve_state(b)?);
            out.kv("left", s1.0);
            out.kv("right", s2.0);
            let same = hml_core::equivalence::bisimilar(lts, s1, s2);
            let verdict = if same { "bisimilar" } else { "not-bisimilar" };
            out.kv("result", verdict);
            out.prose(verdict);
            Ok(if same { 0 } else { 1 })
        }
        _ => Err(CliError::usage(
            "bisim takes either no states (full partition) or exactly two",
        )),
    }
}

fn cmd_distinguish(
    out: &Out,
    system: &Path,
    left: &str,
    right: &str,
    max_states: usize,
) -> Result<u8, CliError> {
    let sys = load_system(system, &[&left.to_string(), &right.to_string()], max_states)?;
    let lts = sys.lts();
    let (s1, s2) = (sys.resolve_state(left)?, sys.resolve_state(right)?);
    out.kv("command", "distinguish");
    out.kv("system", system.display());
    out.kv("left", s1.0);
    out.kv("right", s2.0);
    let partition = bisimilarity(lts);
    match distinguishing_formula_with(lts, &partition, s1, s2) {
        Ok(DistinguishResult::Equivalent) => {
            out.kv("result", "equivalent");
            out.prose("equivalent");
            Ok(1)
        }
        Ok(DistinguishResult::Distinguished {
            formula,
            satisfied_by,
        }) => {
            let named = formula.with_label_names(lts);
            let other = if satisfied_by == s1 { s2 } else { s1 };
            out.kv("result", "distinguished");
            out.kv("formula", &named);
            out.kv("satisfied_by", satisfied_by.0);
            out.prose(&named);
            out.prose(format_args!(
                "satisfied by state {}, not by state {}",
                satisfied_by.0, other.0
            ));
            Ok(0)
        }
        Err(e) => Err(CliError::internal(e.to_string())),
    }
}

fn cmd_theory_eq(
    out: &Out,
    system: &Path,
    left: &str,
    right: &str,
    oracle: Option<&[usize]>,
    max_states: usize,
) -> Result<u8, CliError> {
    let sys = load_system(system, &[&left.to_string(), &right.to_string()], max_states)?;
    let lts = sys.lts();
    let (s1, s2) = (sys.resolve_state(left)?, sys.resolve_state(right)?);
    out.kv("command", "theory-eq");
    out.kv("system", system.display());
    out.kv("left", s1.0);
    out.kv("right", s2.0);
    let equal = match oracle {
        None => {
            out.kv("method", "bisimilarity");
            theory_eq(lts, s1, s2)
        }
        Some(&[max_size, max_depth]) => {
            out.kv("method", "oracle");
            out.kv("oracle_size", max_size);
            out.kv("oracle_depth", max_depth);
            let classes = bounded_theory_classes(lts, max_size, max_depth)
                .map_err(|e| CliError::usage(e.to_string()))?;
            let bounded = classes[s1.0] == classes[s2.0];
            // on systems the oracle accepts, bounded enumeration at these
            // depths may still be coarser than full theory equivalence,
            // but it must never *split* a bisimilar pair
            if bounded != theory_eq(lts, s1, s2) {
                return Err(CliError::internal(format!(
                    "bounded theory oracle (size {max_size}, depth {max_depth}) disagrees \
                     with bisimilarity on states {} and {}",
                    s1.0, s2.0
                )));
            }
            bounded
        }
        Some(_) => unreachable!("clap enforces exactly two values"),
    };
    let verdict = if equal { "equal" } else { "not-equal" };
    out.kv("result", verdict);
    out.prose(verdict);
    Ok(if equal { 0 } else { 1 })
}

fn cmd_ccs(
    out: &Out,
    program: &Path,
    extra_roots: &[String],
    max_states: usize,
    emit_aut: Option<&Path>,
) -> Result<u8, CliError> {
    if program.extension().and_then(|e| e.to_str()) != Some("ccs") {
        return Err(CliError::usage(format!(
            "{}: expected a .ccs program",
            program.display()
        )));
    }
    let text = fs::read_to_string(program)
        .map_err(|e| CliError::usage(format!("{}: {e}", program.display())))?;
    let parsed: CcsProgram = text
        .parse()
        .map_err(|e| CliError::usage(format!("{}: {e}", program.display())))?;
    let mut roots = parsed.roots.clone();
    for spec in extra_roots {
        roots
            .push(parse_process(spec).map_err(|e| CliError::usage(format!("root {spec:?}: {e}")))?);
    }
    let ccs = reachable_lts(&parsed.defs, &roots, max_states)
        .map_err(|e| CliError::usage(format!("{}: {e}", program.display())))?;
    out.kv("command", "ccs");
    out.kv("system", program.display());
    out.kv("states", ccs.lts.num_states());
    out.kv("transitions", ccs.lts.num_transitions());
    out.kv("labels", ccs.lts.labels().join(" "));
    for root in &ccs.roots {
        out.kv("root", root.0);
    }
    for term in &ccs.processes {
        out.kv("process", term);
    }
    out.prose(format_args!("states: {}", ccs.lts.num_states()));
    out.prose(format_args!("transitions: {}", ccs.lts.num_transitions()));
    out.prose(format_args!("labels: {}", ccs.lts.labels().join(", ")));
    if !ccs.roots.is_empty() {
        let ids: Vec<String> = ccs.roots.iter().map(|r| r.0.to_string()).collect();
        out.prose(format_args!("roots: {}", ids.join(", ")));
    }
    for (i, term) in ccs.processes.iter().enumerate() {
        out.prose(format_args!("state {i}: {term}"));
    }
    if let Some(path) = emit_aut {
        let initial = *ccs
            .roots
            .first()
            .ok_or_else(|| CliError::usage("cannot emit .aut: the program has no root process"))?;
        let aut = AutFile {
            lts: ccs.lts.clone(),
            initial,
        };
        fs::write(path, aut.to_string())
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        out.kv("emitted", path.display());
        out.prose(format_args!("wrote {}", path.display()));
    }
    Ok(0)
}
