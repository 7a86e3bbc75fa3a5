//! Sweeps, verification suites and report emission on top of
//! `grasscount-core`.

pub mod emit;
pub mod error;
pub mod generate;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use generate::LatticeSource;
pub use sweep::{run_sweep, Format, SweepConfig, SweepReport, SweepRow};
pub use verify::{verify, Oracle, Reference, Suite, VerifyReport};
