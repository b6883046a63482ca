//! Operator-algebra tools for emergent subsystems: projections onto
//! algebras and commutants, the distance between algebras and its metric,
//! OTOC scrambling diagnostics, and their minimisation over unitary frames.

pub mod algebra;
pub mod error;
pub mod exec;
pub mod models;
pub mod opspace;
pub mod optim;
pub mod scrambling;
pub mod sweep;

pub use error::{Error, Result};
pub use exec::Exec;
