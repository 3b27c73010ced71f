//! Finite labelled transition systems and Hennessy-Milner logic.
//!
//! The crate provides:
//!
//! - [`lts`]: explicit finite labelled transition systems with interned
//!   labels and precomputed successor/predecessor images,
//! - [`aut`]: reading and writing the Aldebaran `.aut` exchange format,
//! - [`formula`]: the modal formula AST with parser, printer and the
//!   structural negation transform,
//! - [`semantics`]: formula evaluation, both per-state (the satisfaction
//!   relation) and per-formula (denotation as a state set), together with
//!   an agreement check between the two,
//! - [`equivalence`]: bisimilarity via partition refinement, bisimulation
//!   checking for explicit relations, distinguishing-formula synthesis and
//!   a bounded-enumeration oracle for modal-theory equivalence,
//! - [`ccs`]: a small CCS front-end (parser, SOS steps, reachable LTS).

pub mod aut;
pub mod ccs;
pub mod equivalence;
pub mod formula;
pub mod lts;
pub mod semantics;

pub use formula::Formula;
pub use lts::{FiniteLts, LabelId, StateId};
pub use semantics::StateSet;
