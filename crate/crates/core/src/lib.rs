//! Exact finite-instance tools for the modal logics of minimal and least
//! upper bounds: formulas, finite orders, model checking under both readings
//! of the fusion modality, supremum p-morphisms, the chain-copy extension
//! construction, and a Hilbert proof checker.

pub mod cli;
pub mod config;
pub mod error;
pub mod formula;
pub mod order;
pub mod pmorphism;
pub mod construction;
pub mod format;
pub mod proofcheck;
pub mod semantics;

pub use config::Limits;
pub use error::{Error, Result};
pub use formula::{parse, Formula};
pub use order::{FinOrder, PointSet, Triple};
pub use semantics::{Mode, Model, Verdict};
