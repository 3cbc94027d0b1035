//! Floquet Jaynes–Cummings spin–cavity simulations: quantum propagation,
//! semiclassical pumping and quasiperiodic almost-period prediction.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod output;
pub mod propagator;
pub mod quasiperiodicity;
pub mod semiclassics;
pub mod state;

pub use error::{BoostError, Result};
pub use model::{DrivenHamiltonian, FieldVector, Frame, ModelParams};
pub use state::{QuantumState, SpinSign};
