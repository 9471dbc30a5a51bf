//! Statistics and experiment layer.
//!
//! Every random quantity is derived from a master seed through
//! [`derive_seed`], keyed by the position of the work item (qubit count,
//! trial index, sample index). Work items are independent, so they can run
//! on any number of workers and still aggregate to identical results.

mod cost;
mod experiment;
mod perturb;
mod psucc;
mod stats;
mod threshold;

pub use cost::{cost_report, CostModel, CostReport, NMeasMode};
pub use experiment::{
    run_experiment, AnumRow, CostSpec, ExperimentKind, ExperimentResult, ExperimentSpec, FitComparison,
    HarnessSpec, PulseSpec, ScalingRow, SystemSpec, TargetSpec, TopologyRow,
};
pub use perturb::{perturbation_scaling, PerturbationRow};
pub use psucc::{estimate_psucc, run_trials, Placement, PsuccEstimate, TrialConfig, TrialResult};
pub use stats::{fit_exponential, fit_linear, mean, stderr, Fit};
pub use threshold::{anum_at_psucc, interpolate_threshold, AnumThreshold};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seed for the work item at `path` under `master`. Each path component
/// selects a ChaCha stream, so sibling items never share a sequence.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(master, |seed, &key| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(key);
        rng.next_u64()
    })
}
