//! Quantum relative entropies, positive maps, and seeded verification suites
//! for data-processing inequalities.
//!
//! Operators are dense complex matrices ([`linalg::ComplexMatrix`]). Validated
//! wrappers ([`PsdOperator`], [`Projector`], ...) check their invariants once
//! at construction against a [`ToleranceConfig`].

pub mod channels;
pub mod divergences;
pub mod error;
pub mod extended;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod random;
pub mod tolerance;

pub use channels::{MapRecipe, PositivityCertificate, SuperOperator, TraceTag};
pub use divergences::DivergenceFamily;
pub use error::{Error, Result};
pub use extended::{ExtendedReal, Gap};
pub use harness::{CheckReport, Outcome, Witness};
pub use io::{ChannelFile, ChannelRepresentation, MatrixFile, MatrixKind};
pub use linalg::{ComplexMatrix, HermitianOperator, Projector, PsdOperator};
pub use tolerance::ToleranceConfig;
