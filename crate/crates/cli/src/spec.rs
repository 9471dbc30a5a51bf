//! Experiment spec files.
//!
//! A spec is a TOML document with a top-level `kind` and the sections
//! `[system]`, `[target]`, `[pulse]`, `[optimizer]`, `[harness]`, `[cost]`
//! and `[output]`. Every key is checked against a fixed schema; unknown
//! keys are rejected with the closest known key as a suggestion.

use insitu_core::fidelity::MeasurementModel;
use insitu_core::harness::{
    CostSpec, ExperimentKind, ExperimentSpec, HarnessSpec, NMeasMode, Placement, PulseSpec, SystemSpec,
    TargetSpec,
};
use insitu_core::optimizer::{GradientMode, OptimizerConfig, SearchDirection};
use insitu_core::{CouplingKind, Topology};
use toml::{Table, Value};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct SpecError(pub String);

fn err<T>(msg: impl Into<String>) -> Result<T, SpecError> {
    Err(SpecError(msg.into()))
}

const KEYS: &[&str] = &[
    "kind",
    "system.n",
    "system.topology",
    "system.coupling",
    "system.strengths",
    "system.strength_seed",
    "target.gate",
    "target.placement",
    "target.control",
    "target.target",
    "pulse.t_gate",
    "pulse.n_ts",
    "optimizer.f_targ",
    "optimizer.max_upds",
    "optimizer.gradient_mode",
    "optimizer.direction",
    "optimizer.a_num",
    "optimizer.shots",
    "optimizer.fd_step",
    "optimizer.stall_window",
    "optimizer.stall_eps",
    "optimizer.initial_step",
    "optimizer.step_growth",
    "optimizer.contraction",
    "optimizer.max_backtracks",
    "optimizer.armijo_c",
    "harness.trials",
    "harness.workers",
    "harness.seed",
    "harness.n_values",
    "harness.anum_grid",
    "harness.target_p",
    "harness.samples",
    "harness.norm",
    "cost.t_init",
    "cost.t_meas",
    "cost.n_meas_mode",
    "cost.n_upds",
    "cost.p_succ",
    "output.dir",
];

const SECTIONS: &[&str] = &["system", "target", "pulse", "optimizer", "harness", "cost", "output"];

fn suggestion(path: &str) -> Option<&'static str> {
    KEYS.iter()
        .map(|k| (k, strsim::levenshtein(path, k)))
        .filter(|(_, d)| *d <= 3)
        .min_by_key(|(_, d)| *d)
        .map(|(k, _)| *k)
}

fn unknown(path: &str) -> SpecError {
    match suggestion(path) {
        Some(s) => SpecError(format!("unknown key `{path}`; did you mean `{s}`?")),
        None => SpecError(format!("unknown key `{path}`")),
    }
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::String(_) => "a string",
        Value::Integer(_) => "an integer",
        Value::Float(_) => "a float",
        Value::Boolean(_) => "a boolean",
        Value::Datetime(_) => "a datetime",
        Value::Array(_) => "an array",
        Value::Table(_) => "a table",
    }
}

/// Typed access to a validated key set.
struct Doc<'a> {
    root: &'a Table,
}

impl<'a> Doc<'a> {
    fn get(&self, path: &str) -> Option<&'a Value> {
        match path.split_once('.') {
            Some((section, key)) => self.root.get(section)?.as_table()?.get(key),
            None => self.root.get(path),
        }
    }

    fn mismatch<T>(path: &str, want: &str, v: &Value) -> Result<T, SpecError> {
        err(format!("`{path}`: expected {want}, found {}", type_name(v)))
    }

    fn required<T>(&self, path: &str, v: Option<T>) -> Result<T, SpecError> {
        v.map_or_else(|| err(format!("missing required key `{path}`")), Ok)
    }

    fn f64(&self, path: &str) -> Result<Option<f64>, SpecError> {
        match self.get(path) {
            None => Ok(None),
            Some(Value::Float(f)) => Ok(Some(*f)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(v) => Self::mismatch(path, "a number", v),
        }
    }

    fn u64(&self, path: &str) -> Result<Option<u64>, SpecError> {
        match self.get(path) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(Value::Integer(i)) => err(format!("`{path}`: must be non-negative, got {i}")),
            Some(v) => Self::mismatch(path, "a non-negative integer", v),
        }
    }

    fn usize(&self, path: &str) -> Result<Option<usize>, SpecError> {
        self.u64(path).map(|v| v.map(|x| x as usize))
    }

    fn str(&self, path: &str) -> Result<Option<&'a str>, SpecError> {
        match self.get(path) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(v) => Self::mismatch(path, "a string", v),
        }
    }

    fn list<T>(&self, path: &str, item: impl Fn(&Value) -> Option<T>, want: &str) -> Result<Option<Vec<T>>, SpecError> {
        match self.get(path) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .enumerate()
                .map(|(i, v)| match item(v) {
                    Some(x) => Ok(x),
                    None => err(format!("`{path}[{i}]`: expected {want}, found {}", type_name(v))),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(v) => Self::mismatch(path, "an array", v),
        }
    }

    fn f64_list(&self, path: &str) -> Result<Option<Vec<f64>>, SpecError> {
        self.list(
            path,
            |v| match v {
                Value::Float(f) => Some(*f),
                Value::Integer(i) => Some(*i as f64),
                _ => None,
            },
            "a number",
        )
    }

    fn usize_list(&self, path: &str) -> Result<Option<Vec<usize>>, SpecError> {
        self.list(
            path,
            |v| match v {
                Value::Integer(i) if *i >= 0 => Some(*i as usize),
                _ => None,
            },
            "a non-negative integer",
        )
    }

    fn choice<T>(&self, path: &str, options: &[(&str, T)]) -> Result<Option<T>, SpecError>
    where
        T: Copy,
    {
        let Some(s) = self.str(path)? else {
            return Ok(None);
        };
        match options.iter().find(|(name, _)| *name == s) {
            Some((_, v)) => Ok(Some(*v)),
            None => {
                let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                err(format!("`{path}`: unknown value {s:?}, expected one of {}", names.join(", ")))
            }
        }
    }
}

/// A gate time: a number, or a multiple of π written like `"4pi"`,
/// `"0.5*pi"` or `"pi"`.
pub fn parse_duration(s: &str) -> Option<f64> {
    let t = s.trim().to_ascii_lowercase();
    let t = t.trim();
    let (coef, pi) = match t.strip_suffix("pi").or_else(|| t.strip_suffix('π')) {
        Some(rest) => (rest.trim().trim_end_matches('*').trim(), true),
        None => (t, false),
    };
    let c = if coef.is_empty() && pi { 1.0 } else { coef.parse::<f64>().ok()? };
    Some(if pi { c * std::f64::consts::PI } else { c })
}

fn check_keys(root: &Table) -> Result<(), SpecError> {
    for (key, value) in root {
        if SECTIONS.contains(&key.as_str()) {
            let Value::Table(section) = value else {
                return err(format!("`{key}` must be a section, found {}", type_name(value)));
            };
            for sub in section.keys() {
                let path = format!("{key}.{sub}");
                if !KEYS.contains(&path.as_str()) {
                    return Err(unknown(&path));
                }
            }
        } else if let Value::Table(section) = value {
            // an unknown section: report its first key with the full path
            match section.keys().next() {
                Some(sub) => return Err(unknown(&format!("{key}.{sub}"))),
                None => return Err(unknown(key)),
            }
        } else if !KEYS.contains(&key.as_str()) {
            return Err(unknown(key));
        }
    }
    Ok(())
}

pub fn parse_spec(text: &str) -> Result<ExperimentSpec, SpecError> {
    let root: Table = text
        .parse()
        .map_err(|e: toml::de::Error| SpecError(format!("malformed spec: {}", e.message())))?;
    check_keys(&root)?;
    let d = Doc { root: &root };

    let kind_name = d.required("kind", d.str("kind")?)?;
    let kind = ExperimentKind::parse(kind_name).map_or_else(
        || {
            let names: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.as_str()).collect();
            err(format!("`kind`: unknown experiment {kind_name:?}, expected one of {}", names.join(", ")))
        },
        Ok,
    )?;

    let n = d.required("system.n", d.usize("system.n")?)?;
    let topology_name = d.required("system.topology", d.str("system.topology")?)?;
    let topology: Topology = topology_name
        .parse()
        .map_err(|_| SpecError(format!("`system.topology`: unknown value {topology_name:?}")))?;
    let coupling_name = d.required("system.coupling", d.str("system.coupling")?)?;
    let coupling: CouplingKind = coupling_name
        .parse()
        .map_err(|_| SpecError(format!("`system.coupling`: unknown value {coupling_name:?}")))?;
    let system = SystemSpec {
        n,
        topology,
        coupling,
        strengths: d.f64_list("system.strengths")?,
        strength_seed: d.u64("system.strength_seed")?,
    };

    let control = d.usize("target.control")?;
    let target_q = d.usize("target.target")?;
    let placement_name = d.str("target.placement")?.unwrap_or(match (control, target_q) {
        (None, None) => "nearest",
        _ => "explicit",
    });
    let placement = match placement_name {
        "explicit" => {
            let c = d.required("target.control", control)?;
            let t = d.required("target.target", target_q)?;
            if c == t {
                return err(format!(
                    "`target.control` and `target.target` must name different qubits, both are {c}"
                ));
            }
            for (key, q) in [("target.control", c), ("target.target", t)] {
                if q >= n {
                    return err(format!("`{key}` = {q} is out of range for `system.n` = {n}"));
                }
            }
            Placement::Explicit { control: c, target: t }
        }
        other => {
            if control.is_some() || target_q.is_some() {
                return err(format!(
                    "`target.control`/`target.target` only apply to placement \"explicit\", not {other:?}"
                ));
            }
            match other {
                "nearest" => Placement::Nearest,
                "next_nearest" => Placement::NextNearest,
                "random" => Placement::Random,
                _ => {
                    return err(format!(
                        "`target.placement`: unknown value {other:?}, expected one of explicit, nearest, next_nearest, random"
                    ))
                }
            }
        }
    };
    let target = TargetSpec {
        gate: d.str("target.gate")?.unwrap_or("cnot").to_string(),
        placement,
    };
    if target.gate != "cnot" {
        return err(format!("`target.gate`: unsupported gate {:?}, only \"cnot\" is available", target.gate));
    }

    let t_gate = match d.get("pulse.t_gate") {
        None => return err("missing required key `pulse.t_gate`"),
        Some(Value::String(s)) => parse_duration(s)
            .ok_or_else(|| SpecError(format!("`pulse.t_gate`: cannot read {s:?} as a duration")))?,
        Some(_) => d.f64("pulse.t_gate")?.expect("present"),
    };
    if !(t_gate > 0.0 && t_gate.is_finite()) {
        return err(format!("`pulse.t_gate` must be positive, got {t_gate}"));
    }
    let n_ts = d.required("pulse.n_ts", d.usize("pulse.n_ts")?)?;
    if n_ts == 0 {
        return err("`pulse.n_ts` must be at least 1");
    }
    let pulse = PulseSpec { t_gate, n_ts };

    let defaults = OptimizerConfig::default();
    let f_targ = d.required("optimizer.f_targ", d.f64("optimizer.f_targ")?)?;
    if !(f_targ > 0.0 && f_targ < 1.0) {
        return err(format!("`optimizer.f_targ` must lie in (0, 1), got {f_targ}"));
    }
    let a_num = d.f64("optimizer.a_num")?.unwrap_or(0.0);
    if !(a_num >= 0.0 && a_num.is_finite()) {
        return err(format!("`optimizer.a_num` must be non-negative, got {a_num}"));
    }
    let measurement = match d.usize("optimizer.shots")? {
        Some(_) if a_num > 0.0 => return err("`optimizer.shots` and `optimizer.a_num` are mutually exclusive"),
        Some(0) => return err("`optimizer.shots` must be at least 1"),
        Some(shots) => MeasurementModel::Sampled { shots, seed: 0 },
        None => MeasurementModel::from_a_num(a_num).map_err(|e| SpecError(format!("`optimizer.a_num`: {e}")))?,
    };
    let optimizer = OptimizerConfig {
        f_targ,
        max_upds: d.usize("optimizer.max_upds")?.unwrap_or(defaults.max_upds),
        gradient_mode: d
            .choice(
                "optimizer.gradient_mode",
                &[("analytic", GradientMode::Analytic), ("finite_difference", GradientMode::FiniteDifference)],
            )?
            .unwrap_or(defaults.gradient_mode),
        direction: d
            .choice(
                "optimizer.direction",
                &[
                    ("lbfgs", SearchDirection::Lbfgs),
                    ("conjugate_gradient", SearchDirection::ConjugateGradient),
                    ("steepest", SearchDirection::Steepest),
                ],
            )?
            .unwrap_or(defaults.direction),
        fd_step: d.f64("optimizer.fd_step")?,
        measurement,
        stall_window: d.usize("optimizer.stall_window")?.unwrap_or(defaults.stall_window),
        stall_eps: d.f64("optimizer.stall_eps")?.unwrap_or(defaults.stall_eps),
        initial_step: d.f64("optimizer.initial_step")?.unwrap_or(defaults.initial_step),
        step_growth: d.f64("optimizer.step_growth")?.unwrap_or(defaults.step_growth),
        contraction: d.f64("optimizer.contraction")?.unwrap_or(defaults.contraction),
        max_backtracks: d.usize("optimizer.max_backtracks")?.unwrap_or(defaults.max_backtracks),
        armijo_c: d.f64("optimizer.armijo_c")?.unwrap_or(defaults.armijo_c),
        record_exact: None,
    };
    optimizer
        .validate()
        .map_err(|e| SpecError(format!("[optimizer]: {e}")))?;

    let harness = HarnessSpec {
        trials: d.usize("harness.trials")?.unwrap_or(20),
        workers: d.usize("harness.workers")?,
        seed: d.u64("harness.seed")?.unwrap_or(0),
        n_values: d.usize_list("harness.n_values")?.unwrap_or_default(),
        anum_grid: d.f64_list("harness.anum_grid")?.unwrap_or_default(),
        target_p: d.f64("harness.target_p")?.unwrap_or(0.5),
        samples: d.usize("harness.samples")?.unwrap_or(100),
        norm: d.f64("harness.norm")?.unwrap_or(0.1),
    };
    if harness.trials == 0 {
        return err("`harness.trials` must be at least 1");
    }
    if harness.workers == Some(0) {
        return err("`harness.workers` must be at least 1");
    }
    if !(harness.target_p > 0.0 && harness.target_p < 1.0) {
        return err(format!("`harness.target_p` must lie in (0, 1), got {}", harness.target_p));
    }
    if harness.anum_grid.windows(2).any(|w| w[0] >= w[1]) || harness.anum_grid.iter().any(|a| !(*a > 0.0)) {
        return err("`harness.anum_grid` must be positive and strictly ascending");
    }
    if kind == ExperimentKind::AnumScaling && harness.anum_grid.is_empty() {
        return err("`harness.anum_grid` is required for kind \"anum_scaling\"");
    }

    let cost = CostSpec {
        t_init: d.f64("cost.t_init")?.unwrap_or(1.0),
        t_meas: d.f64("cost.t_meas")?.unwrap_or(1.0),
        n_meas_mode: d
            .choice(
                "cost.n_meas_mode",
                &[
                    ("full", NMeasMode::Full),
                    ("sequential_local", NMeasMode::SequentialLocal),
                    ("parallel_local", NMeasMode::ParallelLocal),
                ],
            )?
            .unwrap_or(NMeasMode::ParallelLocal),
        n_upds: d.f64("cost.n_upds")?,
        p_succ: d.f64("cost.p_succ")?,
    };

    let spec = ExperimentSpec {
        kind,
        system,
        target,
        pulse,
        optimizer,
        harness,
        cost,
        output_dir: d.str("output.dir")?.map(str::to_string),
    };
    spec.validate().map_err(|e| SpecError(format!("invalid spec: {e}")))?;
    Ok(spec)
}
