//! In-situ learning of entangling-gate control pulses on a simulated qubit
//! register.
//!
//! The crate is layered bottom-up:
//!
//! - [`linalg`]: dense complex operators, Pauli strings, partial traces,
//!   Choi states and matrix exponentials.
//! - [`system`]: drift and control Hamiltonians for spin-chain style
//!   registers (chain, ring, star, fully connected; Ising or Heisenberg).
//! - [`propagation`]: piecewise-constant pulse evolution with cached slot
//!   propagators.
//! - [`fidelity`]: gate fidelity, the local Choi-fidelity estimator, the
//!   finite-precision measurement model and shot-based certification.
//! - [`optimizer`]: gradient ascent (L-BFGS by default) on the measured
//!   local estimator.
//! - [`harness`]: success-probability statistics, precision thresholds,
//!   run-cost accounting and the scripted experiments.
//!
//! With the default `parallel` feature, independent trials, samples and
//! slot exponentials are fanned out with rayon. Results are always gathered
//! in index order so the output does not depend on scheduling.

pub mod error;
pub mod exec;
pub mod fidelity;
pub mod harness;
pub mod linalg;
pub mod optimizer;
pub mod propagation;
pub mod system;

pub use error::{Error, Result};
pub use fidelity::{MeasurementModel, TargetGate};
pub use linalg::{Operator, PureState, SubsystemPartition, C64};
pub use optimizer::{GradientMode, OptimizationOutcome, OptimizerConfig};
pub use propagation::{ControlSystem, PulseGrid};
pub use system::{CouplingKind, SpinSystem, Topology};
