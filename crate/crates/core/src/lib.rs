//! Simulation and analysis of heralded W and Dicke state distribution over
//! lossy optical star networks.
//!
//! * [`fock`]: occupation vectors, Dicke states and sparse pure states.
//! * [`linear_optics`]: Hadamard trees, permanents, multi-photon
//!   interference and purified loss.
//! * [`protocol`]: the heralding protocol with photon-pair sources, in
//!   closed form and by exact simulation.
//! * [`gaussian`]: the same protocol with two-mode squeezed vacuum sources
//!   and threshold detectors, on a covariance engine and a truncated Fock
//!   engine.
//! * [`benchmarks`]: direct transmission and the squashed-entanglement bound.

pub mod benchmarks;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod linear_optics;
pub mod math;
pub mod protocol;

pub use error::{Error, Result};
pub use fock::{dicke_state, DickeSpec, OccupationVector, PureFockState};
pub use linear_optics::{hadamard_tree, InterferometerMatrix, LossChannel};
pub use protocol::{HeraldOutcome, ProtocolParams};
pub use gaussian::{DetectorModel, GaussianScenario, GaussianState, SqueezingSpec};
pub use benchmarks::StarChannel;
