//! Declarative experiment descriptions and their dispatcher.

use serde::Serialize;

use super::cost::NMeasMode;
use super::derive_seed;
use super::perturb::{perturbation_scaling, PerturbationRow};
use super::psucc::{run_trials, Placement, PsuccEstimate, TrialConfig};
use super::stats::{fit_exponential, fit_linear, Fit};
use super::threshold::anum_at_psucc;
use crate::error::{Error, Result};
use crate::exec::Workers;
use crate::fidelity::TargetGate;
use crate::optimizer::{optimize, OptimizationOutcome, OptimizerConfig};
use crate::propagation::random_initial_pulse;
use crate::system::{CouplingKind, SpinSystem, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// one optimization with its per-iteration fidelities
    FidelityTrace,
    /// success statistics for one system configuration
    TopologyTable,
    /// mean updates against register size
    NupdsScaling,
    /// accuracy threshold against register size
    AnumScaling,
    /// random perturbations of the target
    Perturbation,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::FidelityTrace,
        ExperimentKind::TopologyTable,
        ExperimentKind::NupdsScaling,
        ExperimentKind::AnumScaling,
        ExperimentKind::Perturbation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::FidelityTrace => "fidelity_trace",
            ExperimentKind::TopologyTable => "topology_table",
            ExperimentKind::NupdsScaling => "nupds_scaling",
            ExperimentKind::AnumScaling => "anum_scaling",
            ExperimentKind::Perturbation => "perturbation",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemSpec {
    pub n: usize,
    pub topology: Topology,
    pub coupling: CouplingKind,
    pub strengths: Option<Vec<f64>>,
    pub strength_seed: Option<u64>,
}

impl SystemSpec {
    /// The system at `n` qubits (explicit strengths only apply at the
    /// spec's own `n`).
    pub fn build(&self, n: usize) -> Result<SpinSystem> {
        let mut sys = SpinSystem::new(n, self.topology, self.coupling)?;
        if let Some(s) = &self.strengths {
            if n == self.n {
                sys = sys.with_strengths(s.clone())?;
            }
        }
        if let Some(seed) = self.strength_seed {
            sys = sys.randomize_strengths(seed);
        }
        Ok(sys)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetSpec {
    /// only `"cnot"` is supported
    pub gate: String,
    #[serde(flatten)]
    pub placement: Placement,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulseSpec {
    pub t_gate: f64,
    pub n_ts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarnessSpec {
    pub trials: usize,
    pub workers: Option<usize>,
    pub seed: u64,
    /// register sizes for the scaling experiments (defaults to `[n]`)
    pub n_values: Vec<usize>,
    pub anum_grid: Vec<f64>,
    pub target_p: f64,
    pub samples: usize,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostSpec {
    pub t_init: f64,
    pub t_meas: f64,
    pub n_meas_mode: NMeasMode,
    /// measured by running trials when absent
    pub n_upds: Option<f64>,
    pub p_succ: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub system: SystemSpec,
    pub target: TargetSpec,
    pub pulse: PulseSpec,
    pub optimizer: OptimizerConfig,
    pub harness: HarnessSpec,
    pub cost: CostSpec,
    pub output_dir: Option<String>,
}

impl ExperimentSpec {
    pub fn trial_config(&self, n: usize) -> Result<TrialConfig> {
        let cfg = TrialConfig {
            system: self.system.build(n)?,
            placement: self.target.placement,
            t_gate: self.pulse.t_gate,
            n_ts: self.pulse.n_ts,
            optimizer: self.optimizer.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.target.gate != "cnot" {
            return Err(Error::InvalidArgument(format!(
                "unsupported gate {:?}, only \"cnot\" is available",
                self.target.gate
            )));
        }
        if self.harness.trials == 0 {
            return Err(Error::InvalidArgument("harness.trials must be at least 1".into()));
        }
        for &n in self.n_values() {
            self.trial_config(n)?;
        }
        Ok(())
    }

    pub fn n_values(&self) -> &[usize] {
        if self.harness.n_values.is_empty() {
            std::slice::from_ref(&self.system.n)
        } else {
            &self.harness.n_values
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub estimate: PsuccEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopologyRow {
    pub topology: Topology,
    pub coupling: CouplingKind,
    pub n: usize,
    pub t_gate: f64,
    pub n_ts: usize,
    pub estimate: PsuccEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnumRow {
    pub n: usize,
    pub f_targ: f64,
    pub anum_at_p: Option<f64>,
    pub points: Vec<(f64, f64)>,
}

/// Linear against exponential least squares over the scaling means, with
/// three-qubit points left out.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitComparison {
    pub n_values: Vec<usize>,
    pub linear: Fit,
    pub exponential: Fit,
}

impl FitComparison {
    pub fn from_rows(rows: &[ScalingRow]) -> Option<Self> {
        let (x, y): (Vec<f64>, Vec<f64>) = rows
            .iter()
            .filter(|r| r.n != 3)
            .filter_map(|r| r.estimate.mean_nupds.map(|m| (r.n as f64, m)))
            .unzip();
        Some(FitComparison {
            n_values: x.iter().map(|v| *v as usize).collect(),
            linear: fit_linear(&x, &y).ok()?,
            exponential: fit_exponential(&x, &y).ok()?,
        })
    }

    pub fn linear_preferred(&self) -> bool {
        self.linear.rss < self.exponential.rss
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum ExperimentResult {
    Trace {
        control: usize,
        target: usize,
        outcome: OptimizationOutcome,
    },
    Topology(TopologyRow),
    Scaling {
        rows: Vec<ScalingRow>,
        fits: Option<FitComparison>,
    },
    Anum { rows: Vec<AnumRow> },
    Perturbation { rows: Vec<PerturbationRow> },
}

pub fn run_experiment(spec: &ExperimentSpec, workers: Workers) -> Result<ExperimentResult> {
    spec.validate()?;
    let seed = spec.harness.seed;
    Ok(match spec.kind {
        ExperimentKind::FidelityTrace => {
            let cfg = spec.trial_config(spec.system.n)?;
            let sys = cfg.system.control_system();
            let trial_seed = derive_seed(seed, &[0]);
            let (control, target) = {
                use rand::SeedableRng;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(trial_seed);
                cfg.placement.resolve(spec.system.n, &mut rng)?
            };
            let gate = TargetGate::cnot(spec.system.n, control, target)?;
            let init = random_initial_pulse(sys.n_controls(), cfg.n_ts, cfg.t_gate, trial_seed)?;
            let mut opt = cfg.optimizer.clone();
            opt.record_exact = Some(true);
            ExperimentResult::Trace {
                control,
                target,
                outcome: optimize(&sys, &gate, &init, &opt)?,
            }
        }
        ExperimentKind::TopologyTable => {
            let cfg = spec.trial_config(spec.system.n)?;
            let trials = run_trials(&cfg, spec.harness.trials, seed, workers)?;
            ExperimentResult::Topology(TopologyRow {
                topology: spec.system.topology,
                coupling: spec.system.coupling,
                n: spec.system.n,
                t_gate: spec.pulse.t_gate,
                n_ts: spec.pulse.n_ts,
                estimate: PsuccEstimate::from_trials(&trials)?,
            })
        }
        ExperimentKind::NupdsScaling => {
            let rows = spec
                .n_values()
                .iter()
                .map(|&n| {
                    let cfg = spec.trial_config(n)?;
                    let trials = run_trials(&cfg, spec.harness.trials, derive_seed(seed, &[n as u64]), workers)?;
                    Ok(ScalingRow {
                        n,
                        estimate: PsuccEstimate::from_trials(&trials)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let fits = FitComparison::from_rows(&rows);
            ExperimentResult::Scaling { rows, fits }
        }
        ExperimentKind::AnumScaling => ExperimentResult::Anum {
            rows: spec
                .n_values()
                .iter()
                .map(|&n| {
                    let cfg = spec.trial_config(n)?;
                    let th = anum_at_psucc(
                        &cfg,
                        spec.harness.target_p,
                        &spec.harness.anum_grid,
                        spec.harness.trials,
                        seed,
                        workers,
                    )?;
                    Ok(AnumRow {
                        n,
                        f_targ: spec.optimizer.f_targ,
                        anum_at_p: th.anum,
                        points: th.points,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        },
        ExperimentKind::Perturbation => ExperimentResult::Perturbation {
            rows: perturbation_scaling(spec.n_values(), spec.harness.norm, spec.harness.samples, seed, workers)?,
        },
    })
}
