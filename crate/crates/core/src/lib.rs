//! Correlation clustering on semi-random instances.
//!
//! The crate is organised around the pipeline a user runs end to end:
//!
//! * [`instance`] builds signed, costed graphs from the basic and adaptive
//!   semi-random models (and the G(n,p) planted family used for benchmarks);
//! * [`sdp`] solves the unit-vector relaxation with a projected first-order
//!   method on a low-rank nonnegative factor;
//! * [`ptas`] prunes edges the relaxation pays almost fully for and solves the
//!   residual instance combinatorially;
//! * [`recovery`] rounds the vectors with the greedy ball-graph procedure;
//! * [`metrics`] evaluates clusterings and measures the structural quantities
//!   the recovery guarantees are phrased in;
//! * [`game`] simulates the adaptive betting game behind the concentration
//!   argument.

pub mod bench;
pub mod error;
pub mod game;
pub mod instance;
pub mod io;
pub mod metrics;
pub mod ptas;
pub mod recovery;
pub mod rng;
pub mod sdp;

pub use error::{Error, Result};
pub use instance::{Clustering, Edge, GroundTruth, Instance, Sign};
pub use sdp::{SdpSolution, SolverOptions};
