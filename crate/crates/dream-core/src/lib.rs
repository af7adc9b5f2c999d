//! Interpreter and execution engine for the DReAM coordination language.
//!
//! The crate is layered bottom-up:
//!
//! * [`component`] — the component model: types, instances, values,
//!   expressions and interactions.
//! * [`pil`] — propositional interaction logic: formulas, satisfaction,
//!   the characteristic-formula function and the disjunctive/conjunctive
//!   style translations.
//! * [`pilops`] — guarded-command terms: `guard -> ops`, the `&`/`|`
//!   operators, the rewrite axioms with DNF normalization and the
//!   conjunctive-term expansion.
//! * [`foil`] — the first-order layer: quantified declarations over
//!   component variables, restriction terms and constraint macros.
//! * [`motif`] — maps, address functions, reconfiguration operations and
//!   single-motif step semantics with snapshot operation application.
//! * [`system`] — system composition, migration terms and the execution
//!   engine (exhaustive maximal-interaction search with seeded random
//!   selection).

pub mod component;
pub mod testkit;
pub mod error;
pub mod foil;
pub mod motif;
pub mod pil;
pub mod pilops;
pub mod system;

pub use error::Error;
