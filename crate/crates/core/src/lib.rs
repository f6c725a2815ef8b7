//! Numerics for state-dependent quantum measurement error and disturbance.
//!
//! Observables are transported through measurements and quantum processes by
//! a pair of local maps: the *pullback* (the adjoint restricted to
//! equivalence classes under the seminorm `‖A‖_ρ = √Tr[A²ρ]`) and the
//! *pushforward* (its adjoint for the local inner products). Error and
//! disturbance are the contraction a pushforward induces, and the
//! uncertainty relations built from them are checked numerically here.
//!
//! Module map:
//! - [`systems`]: states, observables, local inner products, Gram/Riesz machinery.
//! - [`processes`]: measurements, channels, instruments, classical processes.
//! - [`transport`]: pullbacks and pushforwards.
//! - [`uncertainty`]: error, disturbance, bounds, relations and reductions.
//! - [`sampling`]: seeded random states, observables, channels, instruments.
//! - [`cli`]: sweeps, demos, scenario files and report emission.

pub mod cli;
pub mod error;
pub mod linalg;
pub mod processes;
pub mod report;
pub mod sampling;
pub mod scenario;
pub mod systems;
pub mod tolerance;
pub mod transport;
pub mod uncertainty;

pub use error::{Error, Result};
pub use processes::{Channel, ClassicalChannel, Instrument, JointMeasurement, KrausChannel, Povm, TransferMap};
pub use systems::{DensityOp, HermitianOp, ProbDist, RealFn, TangentC, TangentQ};
pub use tolerance::Tolerances;
