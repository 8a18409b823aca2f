//! Quantum channels as unital completely positive maps in Kraus form.
//!
//! The crate samples random channels of a given rank, decides whether they
//! break or preserve entanglement, computes their wedge invariants and tests
//! extremality. The [`experiments`] module runs seeded Monte Carlo studies of
//! how these properties are distributed.

pub mod channel;
pub mod entanglement;
pub mod error;
pub mod experiments;
pub mod invariants;
pub mod io;
pub mod linalg;
pub mod report;
pub mod sampling;

pub use channel::{from_holevo, recover_mixing_unitary, BipartiteDensity, HolevoForm, KrausChannel};
pub use entanglement::{ChannelClass, Verdict, VerdictKind};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector, Tolerance};
pub use sampling::SeedSpec;
