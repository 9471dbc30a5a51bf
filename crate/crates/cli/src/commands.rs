//! Subcommand dispatch and the CSV schemas.
//!
//! | schema   | columns |
//! |----------|---------|
//! | trace    | iteration, f_le_measured, f_le_exact, f_exact |
//! | scaling  | n, mean_nupds, stderr_nupds, trials, p_succ |
//! | topology | topology, coupling, n, t_gate, n_ts, mean_nupds, stderr_nupds, trials, p_succ |
//! | anum     | n, f_targ, anum_at_50, grid_points |
//! | perturb  | n, mean_f, mean_fle, samples |
//! | cost     | symbol, value |
//!
//! `grid_points` packs the measured success curve as `a:p;a:p;…`.
//! `anum_at_50` is the threshold at the spec's `harness.target_p`
//! (0.5 unless overridden).

use std::path::{Path, PathBuf};

use insitu_core::exec::Workers;
use insitu_core::harness::{
    cost_report, derive_seed, estimate_psucc, run_experiment, AnumRow, CostModel, CostReport, ExperimentKind,
    ExperimentResult, ExperimentSpec, PerturbationRow, ScalingRow, TopologyRow,
};
use insitu_core::{PulseGrid, TargetGate};
use rand::SeedableRng;
use serde::Serialize;

use crate::artifact::{fmt_f64, fmt_opt, write_artifacts, Format, Metadata, Table, ARTIFACT_VERSION};
use crate::spec::{parse_spec, SpecError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::Subcommand)]
pub enum Command {
    /// Run the experiment named by the spec's `kind`
    Run,
    /// Success probability and mean updates at each register size
    Psucc,
    /// Accuracy threshold for the target success probability
    AnumThreshold,
    /// Run-cost breakdown
    Cost,
    /// Fidelity of randomly perturbed targets
    Perturb,
    /// One optimization with its per-iteration fidelities
    Trace,
    /// Render an artifact CSV as an SVG line chart
    Plot,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::Psucc => "psucc",
            Command::AnumThreshold => "anum-threshold",
            Command::Cost => "cost",
            Command::Perturb => "perturb",
            Command::Trace => "trace",
            Command::Plot => "plot",
        }
    }

    fn forced_kind(self) -> Option<ExperimentKind> {
        match self {
            Command::Psucc => Some(ExperimentKind::NupdsScaling),
            Command::AnumThreshold => Some(ExperimentKind::AnumScaling),
            Command::Perturb => Some(ExperimentKind::Perturbation),
            Command::Trace => Some(ExperimentKind::FidelityTrace),
            _ => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("spec error: {0}")]
    Spec(String),
    #[error("{0}")]
    Core(#[from] insitu_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        CliError::Spec(e.0)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Spec(_) | CliError::Usage(_) => 2,
            CliError::Core(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Command,
    pub spec: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub format: Format,
    pub timestamp: Option<u64>,
}

/// What a successful invocation wrote, and whether the run itself failed
/// (no successful trial, target not reached, no threshold found).
#[derive(Debug, Clone)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub failure: Option<String>,
}

pub fn load_spec(path: &Path) -> Result<ExperimentSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Spec(format!("cannot read {}: {e}", path.display())))?;
    parse_spec(&text).map_err(|e| CliError::Spec(format!("{}: {}", path.display(), e.0)))
}

pub fn execute(inv: &Invocation) -> Result<Report, CliError> {
    if inv.command == Command::Plot {
        let input = inv
            .input
            .as_deref()
            .ok_or_else(|| CliError::Usage("plot needs --input <CSV>".into()))?;
        let file = crate::plot::plot_csv(input, inv.out.as_deref())?;
        return Ok(Report {
            files: vec![file],
            failure: None,
        });
    }
    let path = inv
        .spec
        .as_deref()
        .ok_or_else(|| CliError::Usage(format!("{} needs --spec <PATH>", inv.command.name())))?;
    let mut spec = load_spec(path)?;
    if let Some(seed) = inv.seed {
        spec.harness.seed = seed;
    }
    if let Some(kind) = inv.command.forced_kind() {
        spec.kind = kind;
    }
    let workers = match inv.workers.or(spec.harness.workers) {
        Some(0) => return Err(CliError::Usage("--workers must be at least 1".into())),
        Some(w) => Workers::new(w),
        None => Workers::available(),
    };
    let dir = inv
        .out
        .clone()
        .or_else(|| spec.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));

    let (name, table, failure, result) = if inv.command == Command::Cost {
        let (value, failure) = cost(&spec, workers)?;
        let table = match &value {
            Some(c) => cost_table(&c.report),
            None => Table {
                schema: "cost",
                header: COST_HEADER,
                rows: vec![],
            },
        };
        ("cost", table, failure, serde_json::to_value(&value).map_err(std::io::Error::from)?)
    } else {
        let result = run_experiment(&spec, workers)?;
        let (name, table) = tabulate(&result);
        let failure = run_failure(&result);
        (name, table, failure, serde_json::to_value(&result).map_err(std::io::Error::from)?)
    };
    let meta = Metadata {
        artifact_version: ARTIFACT_VERSION,
        command: inv.command.name().to_string(),
        schema: table.schema.to_string(),
        seed: spec.harness.seed,
        spec: serde_json::to_value(&spec).map_err(std::io::Error::from)?,
        timestamp: inv.timestamp,
    };
    let files = write_artifacts(&dir, name, &meta, &result, &table, inv.format)?;
    Ok(Report { files, failure })
}

#[derive(Debug, Clone, Serialize)]
pub struct CostResult {
    pub model: CostModel,
    /// `measured` when n_upds or p_succ came from running trials
    pub source: &'static str,
    pub report: CostReport,
}

fn cost(spec: &ExperimentSpec, workers: Workers) -> Result<(Option<CostResult>, Option<String>), CliError> {
    let n = spec.system.n;
    let cfg = spec.trial_config(n)?;
    let sys = cfg.system.control_system();
    let pulse = PulseGrid::zeros(sys.n_controls(), spec.pulse.n_ts, spec.pulse.t_gate)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed(spec.harness.seed, &[0]));
    let (control, target) = cfg.placement.resolve(n, &mut rng)?;
    let dims = TargetGate::cnot(n, control, target)?.partition().dims();

    let (n_upds, p_succ, source) = match (spec.cost.n_upds, spec.cost.p_succ) {
        (Some(u), Some(p)) => (u, p, "spec"),
        (u, p) => {
            let est = estimate_psucc(&cfg, spec.harness.trials, spec.harness.seed, workers)?;
            match (u.or(est.mean_nupds), p.unwrap_or(est.p)) {
                (Some(u), p) if p > 0.0 => (u, p, "measured"),
                _ => {
                    return Ok((
                        None,
                        Some(format!("no successful trial in {}, cost is undefined", est.trials)),
                    ))
                }
            }
        }
    };
    let model = CostModel {
        t_init: spec.cost.t_init,
        t_meas: spec.cost.t_meas,
        t_gate: spec.pulse.t_gate,
        n_meas_mode: spec.cost.n_meas_mode,
        a_num: spec.optimizer.measurement.a_num(),
        n_fids: spec.optimizer.n_fids(&pulse) as u64,
        n_upds,
        p_succ,
    };
    let report = cost_report(&model, n, &dims)?;
    Ok((Some(CostResult { model, source, report }), None))
}

const COST_HEADER: &[&str] = &["symbol", "value"];
const SCALING_HEADER: &[&str] = &["n", "mean_nupds", "stderr_nupds", "trials", "p_succ"];

fn cost_table(report: &CostReport) -> Table {
    Table {
        schema: "cost",
        header: COST_HEADER,
        rows: report.rows().into_iter().map(|(s, v)| vec![s.to_string(), fmt_f64(v)]).collect(),
    }
}

fn scaling_row(r: &ScalingRow) -> Vec<String> {
    vec![
        r.n.to_string(),
        fmt_opt(r.estimate.mean_nupds),
        fmt_opt(r.estimate.stderr_nupds),
        r.estimate.trials.to_string(),
        fmt_f64(r.estimate.p),
    ]
}

fn topology_row(r: &TopologyRow) -> Vec<String> {
    vec![
        r.topology.as_str().to_string(),
        r.coupling.as_str().to_string(),
        r.n.to_string(),
        fmt_f64(r.t_gate),
        r.n_ts.to_string(),
        fmt_opt(r.estimate.mean_nupds),
        fmt_opt(r.estimate.stderr_nupds),
        r.estimate.trials.to_string(),
        fmt_f64(r.estimate.p),
    ]
}

fn anum_row(r: &AnumRow) -> Vec<String> {
    let grid: Vec<String> = r.points.iter().map(|(a, p)| format!("{a}:{p}")).collect();
    vec![r.n.to_string(), fmt_f64(r.f_targ), fmt_opt(r.anum_at_p), grid.join(";")]
}

fn perturb_row(r: &PerturbationRow) -> Vec<String> {
    vec![r.n.to_string(), fmt_f64(r.mean_f), fmt_f64(r.mean_fle), r.samples.to_string()]
}

pub fn tabulate(result: &ExperimentResult) -> (&'static str, Table) {
    match result {
        ExperimentResult::Trace { outcome, .. } => (
            "trace",
            Table {
                schema: "trace",
                header: &["iteration", "f_le_measured", "f_le_exact", "f_exact"],
                rows: outcome
                    .trace
                    .iter()
                    .map(|t| {
                        vec![
                            t.iteration.to_string(),
                            fmt_f64(t.f_le_measured),
                            fmt_f64(t.f_le_exact),
                            fmt_opt(t.f_exact),
                        ]
                    })
                    .collect(),
            },
        ),
        ExperimentResult::Topology(row) => (
            "topology",
            Table {
                schema: "topology",
                header: &[
                    "topology",
                    "coupling",
                    "n",
                    "t_gate",
                    "n_ts",
                    "mean_nupds",
                    "stderr_nupds",
                    "trials",
                    "p_succ",
                ],
                rows: vec![topology_row(row)],
            },
        ),
        ExperimentResult::Scaling { rows, .. } => (
            "scaling",
            Table {
                schema: "scaling",
                header: SCALING_HEADER,
                rows: rows.iter().map(scaling_row).collect(),
            },
        ),
        ExperimentResult::Anum { rows } => (
            "anum",
            Table {
                schema: "anum",
                header: &["n", "f_targ", "anum_at_50", "grid_points"],
                rows: rows.iter().map(anum_row).collect(),
            },
        ),
        ExperimentResult::Perturbation { rows } => (
            "perturb",
            Table {
                schema: "perturb",
                header: &["n", "mean_f", "mean_fle", "samples"],
                rows: rows.iter().map(perturb_row).collect(),
            },
        ),
    }
}

fn run_failure(result: &ExperimentResult) -> Option<String> {
    match result {
        ExperimentResult::Trace { outcome, .. } if !outcome.success => Some(format!(
            "optimization ended without reaching the target ({:?} after {} updates)",
            outcome.termination, outcome.n_upds
        )),
        ExperimentResult::Topology(row) if row.estimate.successes == 0 => {
            Some(format!("p_succ = 0 over {} trials", row.estimate.trials))
        }
        ExperimentResult::Scaling { rows, .. } => rows
            .iter()
            .find(|r| r.estimate.successes == 0)
            .map(|r| format!("p_succ = 0 at n = {} over {} trials", r.n, r.estimate.trials)),
        ExperimentResult::Anum { rows } => rows
            .iter()
            .find(|r| r.anum_at_p.is_none())
            .map(|r| format!("no threshold crossing inside the a_num grid at n = {}", r.n)),
        _ => None,
    }
}
