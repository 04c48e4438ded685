//! Maximal lengths of non-trivial Büchi sequences of quadratic polynomials
//! modulo odd prime powers.
//!
//! Two engines compute the same quantity: [`search`] enumerates every
//! polynomial exhaustively, [`formulas`] evaluates the closed-form recursion
//! on the p-adic order of the leading coefficient. [`verify`] compares them.

pub mod arith;
pub mod error;
pub mod formulas;
pub mod polyspace;
pub mod record;
pub mod search;
pub mod verify;

pub use arith::{ExtOrder, Limits, PrimePowerModulus, Residue};
pub use error::{Error, Result};
pub use polyspace::{LinearSquareIndex, QuadPoly};
pub use record::OutputRecord;
pub use search::{Length, OptValue, SearchOutcome, SearchTables};
