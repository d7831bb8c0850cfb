//! Simulation of an entangled-pair "telegraph".
//!
//! A source emits photon pairs into one of two pipes. The signal photons
//! interfere on a screen; the idler photons can be intercepted by which-path
//! detectors. The crate models the device exactly on a discretized screen and
//! provides:
//!
//! - [`quantum`]: state vectors, density matrices, partial trace, Born sampling;
//! - [`device`]: the joint idler/screen state and its screen patterns;
//! - [`protocol`]: the sender/receiver protocol, likelihood-ratio receiver,
//!   sample-size planning and the staggered multi-telegraph ensemble;
//! - [`nosignal`]: checks that the receiver's statistics do not depend on the
//!   sender's setting under unitary quantum mechanics;
//! - [`relativity`]: the two-telegraph causal loop in 1+1 Minkowski space.
//!
//! All randomness flows through [`SeedStream`], so results are reproducible
//! for a given seed regardless of thread count.

pub mod device;
pub mod error;
pub mod nosignal;
pub mod protocol;
pub mod quantum;
pub mod relativity;
pub mod rng;
pub mod sampling;

pub use device::{DeviceConfig, Pipe, ScreenDistribution};
pub use error::{Error, Result};
pub use nosignal::{NoSignalReport, Tolerance};
pub use protocol::{
    DecisionResult, DetectorConfig, HitRecord, ModelMode, TransmissionPlan, Verdict,
};
pub use quantum::{Bipartition, DensityMatrix, Label, MeasurementBasis, StateVector, Subsystem};
pub use relativity::{Event, FrameStrategy, FrameVelocity, ParadoxTrace};
pub use rng::SeedStream;
