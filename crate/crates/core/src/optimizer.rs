//! Steepest ascent on the measured local estimator.
//!
//! Each update measures `F_LE`, stops if it has reached `f_targ`, and
//! otherwise takes a gradient step chosen by backtracking Armijo search on
//! the measured value. The gradient is either analytic (exact `F_LE`, from
//! the cached slot propagators) or forward finite differences of the
//! measured `F_LE`.
//!
//! Gradients are laid out like [`PulseGrid::amplitudes`]: entry `c * n_ts + k`
//! is the derivative with respect to control `c` in slot `k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fidelity::{
    estimator_from_locals, local_fidelities_unchecked, overlap_matrices, trace_overlap,
    MeasurementModel, TargetGate,
};
use crate::linalg::{adj_mul, matmul, Operator, C64};
use crate::propagation::{propagate, with_slot_replaced, ControlSystem, PropagationResult, PulseGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMode {
    Analytic,
    FiniteDifference,
}

/// How the ascent direction is built from successive gradients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchDirection {
    Steepest,
    /// Polak-Ribière with automatic restarts.
    ConjugateGradient,
    /// Limited-memory BFGS on the gradient history.
    Lbfgs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub f_targ: f64,
    pub max_upds: usize,
    pub gradient_mode: GradientMode,
    pub direction: SearchDirection,
    /// `None` picks 1e-3 under quantized measurement and 1e-6 otherwise.
    pub fd_step: Option<f64>,
    pub measurement: MeasurementModel,
    pub stall_window: usize,
    pub stall_eps: f64,
    pub initial_step: f64,
    /// Each line search starts from the last accepted step times this
    /// factor; 1 restarts every search from `initial_step`.
    pub step_growth: f64,
    pub contraction: f64,
    pub max_backtracks: usize,
    pub armijo_c: f64,
    /// Record the full gate fidelity in the trace. `None` records it up to
    /// seven qubits.
    pub record_exact: Option<bool>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            f_targ: 0.999,
            max_upds: 1000,
            gradient_mode: GradientMode::Analytic,
            direction: SearchDirection::Lbfgs,
            fd_step: None,
            measurement: MeasurementModel::Exact,
            stall_window: 50,
            stall_eps: 1e-6,
            initial_step: 0.2,
            step_growth: 2.0,
            contraction: 0.5,
            max_backtracks: 8,
            armijo_c: 1e-4,
            record_exact: None,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.f_targ > 0.0 && self.f_targ < 1.0) {
            return bad(format!("f_targ must lie in (0, 1), got {}", self.f_targ));
        }
        if self.max_upds == 0 {
            return bad("max_upds must be at least 1".into());
        }
        if let Some(h) = self.fd_step {
            if !(h > 0.0 && h.is_finite()) {
                return bad(format!("fd_step must be positive, got {h}"));
            }
        }
        if self.stall_window == 0 || !(self.stall_eps >= 0.0) {
            return bad("stall_window must be positive and stall_eps non-negative".into());
        }
        if !(self.initial_step > 0.0) || !(self.contraction > 0.0 && self.contraction < 1.0) {
            return bad("line search needs initial_step > 0 and contraction in (0, 1)".into());
        }
        if !(self.step_growth >= 1.0 && self.step_growth.is_finite()) {
            return bad(format!("step_growth must be at least 1, got {}", self.step_growth));
        }
        if !(self.armijo_c >= 0.0 && self.armijo_c < 1.0) {
            return bad(format!("armijo_c must lie in [0, 1), got {}", self.armijo_c));
        }
        self.measurement.validate()
    }

    pub fn effective_fd_step(&self) -> f64 {
        self.fd_step.unwrap_or(match self.measurement {
            MeasurementModel::Exact => 1e-6,
            _ => 1e-3,
        })
    }

    /// Fidelity evaluations per update: one, plus one per control amplitude
    /// when the gradient is measured by finite differences.
    pub fn n_fids(&self, pulse: &PulseGrid) -> usize {
        match self.gradient_mode {
            GradientMode::Analytic => 1,
            GradientMode::FiniteDifference => 1 + pulse.amplitudes().len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub f_le_measured: f64,
    pub f_le_exact: f64,
    pub f_exact: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TargetReached,
    MaxUpdates,
    Stalled,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationOutcome {
    pub success: bool,
    pub termination: Termination,
    pub n_upds: usize,
    pub n_fids: usize,
    /// every fidelity evaluation, line-search probes included
    pub evaluations: usize,
    pub final_f_le: f64,
    pub final_pulse: PulseGrid,
    pub trace: Vec<TraceRecord>,
}

/// `G` with `dF_LE = Re Tr[G dV]`.
fn estimator_cotangent(v: &Operator, target: &TargetGate) -> Operator {
    let d = v.nrows();
    let mut g = Operator::zeros(d, d);
    for ((lay, u), x) in target.layouts().iter().zip(target.factors()).zip(overlap_matrices(v, target)) {
        let scale = 2.0 / (d * lay.off_in.len()) as f64;
        for (a, &ia) in lay.off_in.iter().enumerate() {
            for (a2, &ia2) in lay.off_in.iter().enumerate() {
                let ua = u[(a2, a)].conj() * scale;
                if ua.norm_sqr() == 0.0 {
                    continue;
                }
                for (b, &ib) in lay.off_out.iter().enumerate() {
                    for (b2, &ib2) in lay.off_out.iter().enumerate() {
                        g[(ia | ib2, ia2 | ib)] += ua * x[(b, b2)].conj();
                    }
                }
            }
        }
    }
    g
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

fn analytic_from(sys: &ControlSystem, prop: &PropagationResult, target: &TargetGate, n_ts: usize) -> Vec<f64> {
    let g = estimator_cotangent(prop.total(), target);
    let dt = prop.dt;
    let n_ctrl = sys.n_controls();
    let mut grad = vec![0.0; n_ctrl * n_ts];
    // lam = G · U_{N-1} ⋯ U_{k+1}, extended one slot at a time from the end
    let mut lam = g;
    for k in (0..n_ts).rev() {
        let w = match prop.before(k) {
            Some(r) => matmul(r, &lam),
            None => lam.clone(),
        };
        let slot = &prop.slots[k];
        let e = &slot.eigen.vectors;
        let vals = &slot.eigen.values;
        let wt = matmul(&adj_mul(e, &w), e);
        let y = Operator::from_fn(vals.len(), vals.len(), |j, l| {
            let (lj, ll) = (vals[j], vals[l]);
            let gamma = C64::new(0.0, -dt)
                * C64::new(0.0, -dt * (lj + ll) / 2.0).exp()
                * sinc(dt * (lj - ll) / 2.0);
            // transposed: y[j][l] = wt[j][l] · Γ[l][j]
            wt[(j, l)] * gamma
        });
        let z = crate::linalg::mul_adj(&matmul(e, &y), e);
        for c in 0..n_ctrl {
            grad[c * n_ts + k] = sys.sparse_control(c).trace_product(&z).re;
        }
        if k > 0 {
            lam = matmul(&lam, &slot.unitary);
        }
    }
    grad
}

/// Exact `∂F_LE/∂u[c][k]`.
pub fn gradient_analytic(sys: &ControlSystem, pulse: &PulseGrid, target: &TargetGate) -> Result<Vec<f64>> {
    check_dims(sys, target)?;
    let prop = propagate(sys, pulse)?;
    Ok(analytic_from(sys, &prop, target, pulse.n_slots()))
}

fn check_dims(sys: &ControlSystem, target: &TargetGate) -> Result<()> {
    if sys.n_qubits() != target.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "system has {} qubits, target acts on {}",
            sys.n_qubits(),
            target.n_qubits()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDifferenceGradient {
    pub gradient: Vec<f64>,
    /// fidelity evaluations consumed, `1 + N_ctrl · N_ts`
    pub evaluations: usize,
}

struct Measurer<'a> {
    target: &'a TargetGate,
    model: MeasurementModel,
    count: u64,
}

impl Measurer<'_> {
    fn measure(&mut self, v: &Operator) -> f64 {
        let f = estimator_from_locals(&self.model.measure(v, self.target, self.count));
        self.count += 1;
        f
    }
}

fn fd_from(
    sys: &ControlSystem,
    pulse: &PulseGrid,
    prop: &PropagationResult,
    measurer: &mut Measurer,
    base: f64,
    step: f64,
) -> Vec<f64> {
    let n_ts = pulse.n_slots();
    let mut grad = vec![0.0; pulse.amplitudes().len()];
    for k in 0..n_ts {
        for c in 0..pulse.n_controls() {
            let amps = pulse.slot(k).enumerate().map(|(cc, a)| if cc == c { a + step } else { a });
            let v = with_slot_replaced(sys, prop, k, amps);
            grad[c * n_ts + k] = (measurer.measure(&v) - base) / step;
        }
    }
    grad
}

/// Forward differences of the measured `F_LE`.
pub fn gradient_finite_difference(
    sys: &ControlSystem,
    pulse: &PulseGrid,
    target: &TargetGate,
    measurement: &MeasurementModel,
    fd_step: f64,
) -> Result<FiniteDifferenceGradient> {
    check_dims(sys, target)?;
    measurement.validate()?;
    if !(fd_step > 0.0 && fd_step.is_finite()) {
        return Err(Error::InvalidArgument(format!("fd_step must be positive, got {fd_step}")));
    }
    let prop = propagate(sys, pulse)?;
    let mut measurer = Measurer {
        target,
        model: *measurement,
        count: 0,
    };
    let base = measurer.measure(prop.total());
    let gradient = fd_from(sys, pulse, &prop, &mut measurer, base, fd_step);
    Ok(FiniteDifferenceGradient {
        gradient,
        evaluations: measurer.count as usize,
    })
}

const LBFGS_MEMORY: usize = 10;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct DirectionState {
    kind: SearchDirection,
    prev_x: Vec<f64>,
    prev_grad: Vec<f64>,
    prev_dir: Vec<f64>,
    /// `(s, y, 1 / s·y)` for the minimization of `-F`
    pairs: std::collections::VecDeque<(Vec<f64>, Vec<f64>, f64)>,
}

impl DirectionState {
    fn new(kind: SearchDirection) -> Self {
        DirectionState {
            kind,
            prev_x: Vec::new(),
            prev_grad: Vec::new(),
            prev_dir: Vec::new(),
            pairs: Default::default(),
        }
    }

    fn has_curvature(&self) -> bool {
        !self.pairs.is_empty()
    }

    fn reset(&mut self) {
        self.prev_x.clear();
        self.prev_grad.clear();
        self.prev_dir.clear();
        self.pairs.clear();
    }

    fn direction(&mut self, x: &[f64], g: &[f64]) -> Vec<f64> {
        let have_prev = !self.prev_grad.is_empty();
        let d = match self.kind {
            SearchDirection::Steepest => g.to_vec(),
            SearchDirection::ConjugateGradient if have_prev => {
                let diff: f64 = g.iter().zip(&self.prev_grad).map(|(a, b)| a * (a - b)).sum();
                let beta = (diff / dot(&self.prev_grad, &self.prev_grad)).max(0.0);
                g.iter().zip(&self.prev_dir).map(|(a, b)| a + beta * b).collect()
            }
            SearchDirection::ConjugateGradient => g.to_vec(),
            SearchDirection::Lbfgs => {
                if have_prev {
                    let s: Vec<f64> = x.iter().zip(&self.prev_x).map(|(a, b)| a - b).collect();
                    let y: Vec<f64> = self.prev_grad.iter().zip(g).map(|(a, b)| a - b).collect();
                    let sy = dot(&s, &y);
                    if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
                        if self.pairs.len() == LBFGS_MEMORY {
                            self.pairs.pop_front();
                        }
                        self.pairs.push_back((s, y, 1.0 / sy));
                    }
                }
                self.two_loop(g)
            }
        };
        let d = if dot(&d, g) > 0.0 {
            d
        } else {
            self.pairs.clear();
            g.to_vec()
        };
        self.prev_x = x.to_vec();
        self.prev_grad = g.to_vec();
        self.prev_dir = d.clone();
        d
    }

    fn two_loop(&self, g: &[f64]) -> Vec<f64> {
        let mut q = g.to_vec();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = self.pairs.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|qi| *qi *= gamma);
        }
        for ((s, y, rho), a) in self.pairs.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        q
    }
}

fn trace_record(
    iteration: usize,
    measured: f64,
    v: &Operator,
    target: &TargetGate,
    with_exact: bool,
) -> TraceRecord {
    TraceRecord {
        iteration,
        f_le_measured: measured,
        f_le_exact: estimator_from_locals(&local_fidelities_unchecked(v, target)),
        f_exact: with_exact.then(|| trace_overlap(v, target.full_unitary())),
    }
}

/// Runs the optimization loop from `init`.
pub fn optimize(
    sys: &ControlSystem,
    target: &TargetGate,
    init: &PulseGrid,
    cfg: &OptimizerConfig,
) -> Result<OptimizationOutcome> {
    cfg.validate()?;
    check_dims(sys, target)?;
    let with_exact = cfg.record_exact.unwrap_or(sys.n_qubits() <= 7);
    let fd_step = cfg.effective_fd_step();
    let mut measurer = Measurer {
        target,
        model: cfg.measurement,
        count: 0,
    };

    let mut pulse = init.clone();
    let mut prop = propagate(sys, &pulse)?;
    let mut current = measurer.measure(prop.total());
    let mut trace = vec![trace_record(0, current, prop.total(), target, with_exact)];
    // best measured value after each update, for stall detection
    let mut best_history = vec![current];
    let mut n_upds = 0;
    let mut start_step = cfg.initial_step;
    let mut directions = DirectionState::new(cfg.direction);

    let termination = loop {
        if !current.is_finite() {
            break Termination::NonFinite;
        }
        if current >= cfg.f_targ {
            break Termination::TargetReached;
        }
        if n_upds >= cfg.max_upds {
            break Termination::MaxUpdates;
        }
        if n_upds >= cfg.stall_window {
            let best = best_history[n_upds];
            if best - best_history[n_upds - cfg.stall_window] < cfg.stall_eps {
                break Termination::Stalled;
            }
        }

        let grad = match cfg.gradient_mode {
            GradientMode::Analytic => analytic_from(sys, &prop, target, pulse.n_slots()),
            GradientMode::FiniteDifference => fd_from(sys, &pulse, &prop, &mut measurer, current, fd_step),
        };
        if grad.iter().any(|g| !g.is_finite()) {
            break Termination::NonFinite;
        }
        let dir = directions.direction(pulse.amplitudes(), &grad);
        let slope = dot(&dir, &grad);
        n_upds += 1;

        let mut step = if directions.has_curvature() { 1.0 } else { start_step };
        let mut accepted = false;
        if slope > 0.0 {
            for _ in 0..=cfg.max_backtracks {
                let candidate = pulse.stepped(&dir, step);
                let cand_prop = propagate(sys, &candidate)?;
                let value = measurer.measure(cand_prop.total());
                if value >= current + cfg.armijo_c * step * slope {
                    pulse = candidate;
                    prop = cand_prop;
                    current = value;
                    accepted = true;
                    break;
                }
                step *= cfg.contraction;
            }
        }
        start_step = if accepted {
            step * cfg.step_growth
        } else {
            directions.reset();
            cfg.initial_step
        };
        trace.push(trace_record(n_upds, current, prop.total(), target, with_exact));
        let best = best_history[n_upds - 1].max(current);
        best_history.push(best);
    };

    Ok(OptimizationOutcome {
        success: termination == Termination::TargetReached,
        termination,
        n_upds,
        n_fids: cfg.n_fids(&pulse),
        evaluations: measurer.count as usize,
        final_f_le: current,
        final_pulse: pulse,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, sigma, PauliAxis, SubsystemPartition};
    use crate::propagation::random_initial_pulse;
    use crate::system::{CouplingKind, SpinSystem, Topology};
    use approx::assert_abs_diff_eq;

    fn single_qubit() -> (ControlSystem, TargetGate) {
        let sys = ControlSystem::new(1, Operator::zeros(2, 2), vec![sigma(PauliAxis::X)]).unwrap();
        let p = SubsystemPartition::new(1, vec![vec![0]]).unwrap();
        (sys, TargetGate::new(p, vec![identity(2)]).unwrap())
    }

    fn central_difference(sys: &ControlSystem, pulse: &PulseGrid, target: &TargetGate, h: f64) -> Vec<f64> {
        let f = |p: &PulseGrid| {
            let v = crate::propagation::evolve(sys, p).unwrap();
            estimator_from_locals(&local_fidelities_unchecked(&v, target))
        };
        (0..pulse.amplitudes().len())
            .map(|i| {
                let mut e = vec![0.0; pulse.amplitudes().len()];
                e[i] = 1.0;
                (f(&pulse.stepped(&e, h)) - f(&pulse.stepped(&e, -h))) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn single_qubit_closed_form() {
        let (sys, target) = single_qubit();
        let u = 0.4;
        let pulse = PulseGrid::new(1, 1, 1.0, vec![u]).unwrap();
        let g = gradient_analytic(&sys, &pulse, &target).unwrap();
        assert_abs_diff_eq!(g[0], -(2.0 * u).sin(), epsilon = 1e-12);
        // the same constant split over several slots sums to the same derivative
        let split = PulseGrid::new(1, 4, 1.0, vec![u; 4]).unwrap();
        let g4 = gradient_analytic(&sys, &split, &target).unwrap();
        assert_abs_diff_eq!(g4.iter().sum::<f64>(), -(2.0 * u).sin(), epsilon = 1e-12);
    }

    #[test]
    fn stationary_at_target() {
        let sys = SpinSystem::new(2, Topology::Chain, CouplingKind::Ising)
            .unwrap()
            .control_system();
        let target = TargetGate::cnot(2, 0, 1).unwrap();
        // a zero pulse at T = π realizes -1, which matches the identity target up to phase
        let id_target = TargetGate::new(
            SubsystemPartition::new(2, vec![vec![0], vec![1]]).unwrap(),
            vec![identity(2), identity(2)],
        )
        .unwrap();
        let pulse = PulseGrid::zeros(4, 6, std::f64::consts::PI).unwrap();
        let g = gradient_analytic(&sys, &pulse, &id_target).unwrap();
        assert!(g.iter().map(|x| x * x).sum::<f64>().sqrt() <= 1e-6);
        assert!(gradient_analytic(&sys, &pulse, &TargetGate::cnot(3, 0, 1).unwrap()).is_err());
        let _ = target;
    }

    #[test]
    fn matches_central_differences_on_chain() {
        let sys = SpinSystem::new(3, Topology::Chain, CouplingKind::Ising)
            .unwrap()
            .control_system();
        let target = TargetGate::cnot(3, 0, 1).unwrap();
        for seed in 0..3 {
            let pulse = random_initial_pulse(6, 8, std::f64::consts::PI, seed).unwrap();
            let a = gradient_analytic(&sys, &pulse, &target).unwrap();
            let fd = central_difference(&sys, &pulse, &target, 1e-6);
            let scale = fd.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for (x, y) in a.iter().zip(&fd) {
                assert!((x - y).abs() <= 1e-4 * scale, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn forward_differences_track_analytic() {
        let sys = SpinSystem::new(2, Topology::Chain, CouplingKind::Ising)
            .unwrap()
            .control_system();
        let target = TargetGate::cnot(2, 0, 1).unwrap();
        let pulse = random_initial_pulse(4, 6, std::f64::consts::PI, 3).unwrap();
        let a = gradient_analytic(&sys, &pulse, &target).unwrap();
        let fd = gradient_finite_difference(&sys, &pulse, &target, &MeasurementModel::Exact, 1e-5).unwrap();
        assert_eq!(fd.evaluations, 1 + 4 * 6);
        let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (x, y) in a.iter().zip(&fd.gradient) {
            assert!((x - y).abs() <= 1e-3 * scale);
        }
    }

    #[test]
    fn quantization_floor_flattens_differences() {
        let sys = SpinSystem::new(2, Topology::Chain, CouplingKind::Ising)
            .unwrap()
            .control_system();
        let target = TargetGate::cnot(2, 0, 1).unwrap();
        let pulse = random_initial_pulse(4, 6, std::f64::consts::PI, 5).unwrap();
        let coarse = MeasurementModel::Quantized { a_num: 0.1 };
        let fd = gradient_finite_difference(&sys, &pulse, &target, &coarse, 1e-9).unwrap();
        assert!(fd.gradient.iter().all(|g| *g == 0.0));
    }

    #[test]
    fn evaluation_count_for_five_qubits() {
        let pulse = PulseGrid::zeros(10, 12, 1.0).unwrap();
        let cfg = OptimizerConfig {
            gradient_mode: GradientMode::FiniteDifference,
            ..OptimizerConfig::default()
        };
        assert_eq!(cfg.n_fids(&pulse), 121);
        assert_eq!(OptimizerConfig::default().n_fids(&pulse), 1);
    }

    #[test]
    fn starts_at_target() {
        let (sys, target) = single_qubit();
        let pulse = PulseGrid::new(1, 3, 1.0, vec![0.0; 3]).unwrap();
        let out = optimize(&sys, &target, &pulse, &OptimizerConfig::default()).unwrap();
        assert!(out.success);
        assert_eq!(out.n_upds, 0);
        assert_eq!(out.trace.len(), 1);
    }

    #[test]
    fn config_validation() {
        let bad = [
            OptimizerConfig { f_targ: 1.0, ..Default::default() },
            OptimizerConfig { max_upds: 0, ..Default::default() },
            OptimizerConfig { fd_step: Some(0.0), ..Default::default() },
            OptimizerConfig { contraction: 1.0, ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err());
        }
        assert_eq!(OptimizerConfig::default().effective_fd_step(), 1e-6);
        let q = OptimizerConfig {
            measurement: MeasurementModel::Quantized { a_num: 0.01 },
            ..Default::default()
        };
        assert_eq!(q.effective_fd_step(), 1e-3);
    }

    #[test]
    fn single_qubit_run_reaches_target() {
        let (sys, target) = single_qubit();
        let pulse = PulseGrid::new(1, 2, 1.0, vec![0.9, -0.3]).unwrap();
        let cfg = OptimizerConfig { f_targ: 0.9999, ..Default::default() };
        let out = optimize(&sys, &target, &pulse, &cfg).unwrap();
        assert!(out.success);
        assert!(out.final_f_le >= 0.9999);
        for w in out.trace.windows(2) {
            assert!(w[1].f_le_measured >= w[0].f_le_measured);
        }
    }
}
