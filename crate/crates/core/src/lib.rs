//! Clique-width guided SAT/QBF encodings for abstract argumentation.
//!
//! The pipeline: an [`af::Af`] plus a directed clique-width
//! [`kexpr::KExpr`] go through [`encoder`] into the [`formula`] IR, which the
//! embedded [`solver`] decides or counts. [`witness`] builds explicit
//! k'-expressions for the emitted formulas' incidence graphs, and
//! [`hardness`] generates 3SAT-derived instances.

pub mod af;
pub mod encoder;
pub mod formula;
pub mod hardness;
pub mod kexpr;
pub mod solver;
pub mod witness;

pub use af::{Af, Argument, Extension, Mode, SemanticsId};
pub use encoder::{encode, Encoding};
pub use formula::{Clause, Cnf, Lit, Qbf2, VarKey, VarTable};
pub use kexpr::KExpr;
