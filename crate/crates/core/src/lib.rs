//! Bell-inequality values for qubit and qutrit pairs, and their use as
//! witnesses that a bipartite state has no symmetric extension.
//!
//! * [`qubit`]: CHSH values (closed form and direct search), the two-qubit
//!   extendibility criterion, CHSH monogamy on three qubits.
//! * [`symmetric`]: two-qubit marginals of symmetric multiqubit pure states.
//! * [`cglmp`]: the CGLMP value of two-qutrit states and its maximisation.
//! * [`monogamy`]: random and parametrised three-qutrit scans.
//! * [`io`]: state files, CSV output and run manifests.

// Small dense kernels read best with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod cglmp;
pub mod error;
pub mod io;
pub mod linalg;
pub mod monogamy;
pub mod optimize;
pub mod qubit;
pub mod sampling;
pub mod symmetric;
pub mod tolerance;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DensityMatrix, StateVector, C64};
