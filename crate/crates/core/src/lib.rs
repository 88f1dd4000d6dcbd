//! Numerical toolkit for multi-parameter estimation with networks of quantum
//! sensors.
//!
//! The crate models a network as a tensor product of sensor Hilbert spaces,
//! each carrying its own parameter generators and resource operator. On top
//! of that it computes quantum Fisher information matrices (pure-state and
//! SLD-based), weighted Cramér-Rao bounds, classical Fisher information of
//! concrete measurements, closed-form bounds for linear functions of the
//! parameters, and builds the probe states that those bounds are about:
//! separable surrogates, local purifications and GHZ-like network states.
//! The [`scenarios`] module turns all of this into seeded, reproducible
//! audits.

pub mod bounds;
pub mod error;
pub mod fisher;
pub mod hilbert;
pub mod network;
pub mod report;
pub mod scenarios;
pub mod states;

pub use error::{QsnError, Result};
pub use fisher::{BoundReport, Povm, Qfim, SldSet};
pub use hilbert::{
    ComplexMatrix, ComplexVector, DensityOperator, HermitianOperator, Layout, PureState, C64,
};
pub use network::{
    ParameterPoint, Partition, Probe, SensorFamily, SensorNetwork, SensorSpec, WeightMatrix,
};
