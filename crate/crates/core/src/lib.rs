//! B-spline Gram matrices, their inverses built by bordered rank-2 updates,
//! geometric decay bounds for the inverse entries, and exact
//! coefficient-sign certificates for the rational inequalities behind them.

pub mod decay;
pub mod error;
pub mod gram;
pub mod invstep;
pub mod knots;
pub mod partition;
pub mod polycert;
pub mod report;
pub mod scalar;
pub mod sweep;

pub use error::{Error, Result};
pub use gram::{MinorReport, SymBandedMatrix};
pub use invstep::{BorderVectors, GrowingInverse};
pub use knots::{Bracket, KnotSequence};
pub use scalar::{Rational, Scalar};
