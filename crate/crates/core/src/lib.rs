//! Reservoir computing with Gaussian states of linear quantum
//! harmonic-oscillator networks.
//!
//! The pipeline is: an [`OscillatorNetwork`] and interaction time give a
//! [`SymplecticPropagator`]; a [`Reservoir`] drives its reservoir modes with
//! inputs encoded into an ancilla ([`EncodingScheme`]) and records a
//! [`TrajectoryRecord`]; [`readout`] trains linear or polynomial readouts on
//! it, and [`capacity`] estimates its information processing capacity.

pub mod error;
pub mod rng;
pub mod network;
pub mod gaussian;
pub mod propagator;
pub mod encoding;
pub mod reservoir;
pub mod legendre;
pub mod linalg;
pub mod readout;
pub mod tasks;
pub mod capacity;
pub mod esn;
pub mod experiment;

pub use capacity::{
    calibrate_threshold, capacity, capacity_budget, enumerate_products, enumerate_single_delay, total_ipc,
    CapacityEntry, CapacityEstimator, CapacityOptions, CapacityReport, FunctionFamily, IpcSource, TargetFunction,
};
pub use encoding::{encode, EncodingScheme};
pub use error::{Error, Result};
pub use esn::{esn_step, esn_trajectory, EsnParams};
pub use experiment::{ExperimentConfig, NetworkSpec};
pub use gaussian::{single_mode_state, symplectic_eigenvalues, GaussianState};
pub use network::{build_laplacian, OscillatorNetwork};
pub use readout::{build_features, nmse, predict, squared_error, train, FeatureMatrix, ReadoutWeights};
pub use propagator::{build_propagator, evolve, SymplecticPropagator};
pub use reservoir::{
    extract_observables, run_sequence, spectral_radius, split_blocks, step, ObservableKind, PropagatorBlocks,
    Reservoir, ReservoirState, TrajectoryRecord,
};
pub use rng::{SeededRng, Stream};
pub use tasks::{legendre_target, parity_target, run_task, InputDistribution, Lengths, TaskKind, TaskResult, TaskSpec};
