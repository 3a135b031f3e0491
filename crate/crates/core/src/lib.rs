//! Simulation and analysis toolkit for a collision model of qubit dephasing.
//!
//! A single system qubit evolves freely and suffers brief pairwise
//! collisions with fresh environment qubits at Poisson-distributed times.
//! Each collision dephases the system a little and writes a record of the
//! system's phase information into the environment. The crate provides
//!
//! * [`qcore`]: labeled multi-qubit density matrices and state vectors with
//!   the dense linear algebra everything else is built on,
//! * [`collision`]: the pairwise interaction unitary, the induced
//!   single-qubit channel and the continuous-time master equation,
//! * [`analytic`]: closed-form coherence curves and mutual-information
//!   curves between the system and environment fractions,
//! * [`stochastic`]: seeded Monte-Carlo trajectory sampling,
//! * [`oracle`]: exact dense construction of the joint
//!   system-environment state for small registers,
//! * [`analysis`]: plateau detection, information backflow and the
//!   rate-angle invariance scan,
//! * [`validate`]: the cross-check matrix wiring all of the above against
//!   each other.

pub mod analysis;
pub mod analytic;
pub mod collision;
mod error;
pub mod oracle;
pub mod qcore;
pub mod stochastic;
pub mod validate;

pub use error::{Error, Result};
