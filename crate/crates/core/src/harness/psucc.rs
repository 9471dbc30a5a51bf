//! Repeated seeded optimizations and their success statistics.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::derive_seed;
use super::stats::{mean, stderr};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Workers};
use crate::fidelity::{MeasurementModel, TargetGate};
use crate::optimizer::{optimize, OptimizerConfig, Termination};
use crate::propagation::{random_initial_pulse, ControlSystem};
use crate::system::SpinSystem;

/// Where the CNOT sits on the register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "placement", rename_all = "snake_case")]
pub enum Placement {
    Explicit { control: usize, target: usize },
    /// qubits 0 and 1
    Nearest,
    /// two qubits apart, centred on the register
    NextNearest,
    /// a fresh uniformly random ordered pair for every trial
    Random,
}

impl Placement {
    pub fn resolve<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<(usize, usize)> {
        let pair = match *self {
            Placement::Explicit { control, target } => (control, target),
            Placement::Nearest => (0, 1),
            Placement::NextNearest => {
                if n < 3 {
                    return Err(Error::InvalidArgument(format!(
                        "next-nearest placement needs at least 3 qubits, got {n}"
                    )));
                }
                let control = ((n - 1) / 2).saturating_sub(1);
                (control, control + 2)
            }
            Placement::Random => {
                let control = rng.random_range(0..n);
                let target = (control + rng.random_range(1..n)) % n;
                (control, target)
            }
        };
        for q in [pair.0, pair.1] {
            if q >= n {
                return Err(Error::QubitOutOfRange { index: q, n });
            }
        }
        if pair.0 == pair.1 {
            return Err(Error::InvalidArgument("control and target qubit must differ".into()));
        }
        Ok(pair)
    }
}

/// Everything one trial needs besides its seed.
#[derive(Debug, Clone)]
pub struct TrialConfig {
    pub system: SpinSystem,
    pub placement: Placement,
    pub t_gate: f64,
    pub n_ts: usize,
    pub optimizer: OptimizerConfig,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        self.optimizer.validate()?;
        if self.n_ts == 0 || !(self.t_gate > 0.0 && self.t_gate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "pulse needs n_ts >= 1 and t_gate > 0, got {} and {}",
                self.n_ts, self.t_gate
            )));
        }
        let mut probe = ChaCha8Rng::seed_from_u64(0);
        self.placement.resolve(self.system.n_qubits(), &mut probe).map(|_| ())
    }

    pub fn with_measurement(&self, measurement: MeasurementModel) -> TrialConfig {
        let mut out = self.clone();
        out.optimizer.measurement = measurement;
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub index: usize,
    pub seed: u64,
    pub control: usize,
    pub target: usize,
    pub success: bool,
    pub termination: Termination,
    pub n_upds: usize,
    pub n_fids: usize,
    pub final_f_le: f64,
}

fn run_one(cfg: &TrialConfig, sys: &ControlSystem, index: usize, seed: u64) -> Result<TrialResult> {
    let n = cfg.system.n_qubits();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pulse_seed = rng.next_u64();
    let (control, target) = cfg.placement.resolve(n, &mut rng)?;
    let gate = TargetGate::cnot(n, control, target)?;
    let init = random_initial_pulse(sys.n_controls(), cfg.n_ts, cfg.t_gate, pulse_seed)?;
    let mut opt = cfg.optimizer.clone();
    if let MeasurementModel::Sampled { shots, .. } = opt.measurement {
        opt.measurement = MeasurementModel::Sampled {
            shots,
            seed: rng.next_u64(),
        };
    }
    // the diagnostic full fidelity is not needed for statistics
    opt.record_exact = Some(false);
    let out = optimize(sys, &gate, &init, &opt)?;
    Ok(TrialResult {
        index,
        seed,
        control,
        target,
        success: out.success,
        termination: out.termination,
        n_upds: out.n_upds,
        n_fids: out.n_fids,
        final_f_le: out.final_f_le,
    })
}

/// `trials` independent optimizations; trial `i` is seeded by
/// `derive_seed(seed, [i])`.
pub fn run_trials(cfg: &TrialConfig, trials: usize, seed: u64, workers: Workers) -> Result<Vec<TrialResult>> {
    cfg.validate()?;
    let sys = cfg.system.control_system();
    map_indexed(trials, workers, |i| run_one(cfg, &sys, i, derive_seed(seed, &[i as u64])))
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsuccEstimate {
    pub trials: usize,
    pub successes: usize,
    pub p: f64,
    pub stderr: f64,
    /// mean updates over the successful trials
    pub mean_nupds: Option<f64>,
    pub stderr_nupds: Option<f64>,
}

impl PsuccEstimate {
    pub fn from_counts(successes: usize, trials: usize) -> Result<Self> {
        if trials == 0 || successes > trials {
            return Err(Error::InvalidArgument(format!(
                "need 0 <= successes <= trials and trials >= 1, got {successes}/{trials}"
            )));
        }
        let p = successes as f64 / trials as f64;
        Ok(PsuccEstimate {
            trials,
            successes,
            p,
            stderr: (p * (1.0 - p) / trials as f64).sqrt(),
            mean_nupds: None,
            stderr_nupds: None,
        })
    }

    pub fn from_trials(results: &[TrialResult]) -> Result<Self> {
        let upds: Vec<f64> = results.iter().filter(|r| r.success).map(|r| r.n_upds as f64).collect();
        let mut est = Self::from_counts(upds.len(), results.len())?;
        est.mean_nupds = mean(&upds);
        est.stderr_nupds = stderr(&upds);
        Ok(est)
    }
}

pub fn estimate_psucc(cfg: &TrialConfig, n_trials: usize, seed: u64, workers: Workers) -> Result<PsuccEstimate> {
    if n_trials == 0 {
        return Err(Error::InvalidArgument("n_trials must be at least 1".into()));
    }
    PsuccEstimate::from_trials(&run_trials(cfg, n_trials, seed, workers)?)
}
