//! Piecewise-constant evolution.
//!
//! Slot `k` evolves under `H_k = H_drift + Σ_c u[c][k] H_c` for `dt`, and the
//! full propagator is `V = U_{N-1} ⋯ U_1 U_0` (slot 0 acts first).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::map_ambient;
use crate::linalg::{ensure_finite, is_hermitian, matmul, HermitianEigen, Operator, C64};

/// Nonzero entries of a control operator, for `Tr(Z H)` and `H += u·H_c` in
/// `O(nnz)` instead of `O(d²)`.
#[derive(Debug, Clone)]
pub(crate) struct SparseOp {
    entries: Vec<(usize, usize, C64)>,
}

impl SparseOp {
    fn from_dense(m: &Operator) -> Self {
        let mut entries = Vec::new();
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                let v = m[(r, c)];
                if v.norm() > 0.0 {
                    entries.push((r, c, v));
                }
            }
        }
        SparseOp { entries }
    }

    /// `Tr(z · self)`.
    pub(crate) fn trace_product(&self, z: &Operator) -> C64 {
        self.entries.iter().map(|&(r, c, v)| z[(c, r)] * v).sum()
    }

    fn add_scaled_to(&self, target: &mut Operator, scale: f64) {
        for &(r, c, v) in &self.entries {
            target[(r, c)] += v * scale;
        }
    }
}

/// Drift plus controllable Hamiltonians on an `n`-qubit register.
#[derive(Debug, Clone)]
pub struct ControlSystem {
    n: usize,
    drift: Operator,
    controls: Vec<Operator>,
    sparse: Vec<SparseOp>,
}

impl ControlSystem {
    pub fn new(n: usize, drift: Operator, controls: Vec<Operator>) -> Result<Self> {
        let dim = 1usize << n;
        let check = |m: &Operator, what: &str| -> Result<()> {
            if m.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch(format!(
                    "{what} is {}x{}, expected {dim}x{dim}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            ensure_finite(m, what)?;
            if !is_hermitian(m) {
                return Err(Error::InvalidArgument(format!("{what} is not Hermitian")));
            }
            Ok(())
        };
        check(&drift, "drift Hamiltonian")?;
        for (i, c) in controls.iter().enumerate() {
            check(c, &format!("control Hamiltonian {i}"))?;
        }
        let sparse = controls.iter().map(SparseOp::from_dense).collect();
        Ok(ControlSystem {
            n,
            drift,
            controls,
            sparse,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn drift(&self) -> &Operator {
        &self.drift
    }

    pub fn controls(&self) -> &[Operator] {
        &self.controls
    }

    pub fn n_controls(&self) -> usize {
        self.controls.len()
    }

    pub(crate) fn sparse_control(&self, c: usize) -> &SparseOp {
        &self.sparse[c]
    }

    /// Same controls, drift multiplied by `factor`.
    pub fn with_drift_scaled(&self, factor: f64) -> ControlSystem {
        ControlSystem {
            drift: &self.drift * C64::new(factor, 0.0),
            ..self.clone()
        }
    }

    /// `H_drift + Σ_c amplitudes[c] H_c`.
    pub fn hamiltonian(&self, amplitudes: impl IntoIterator<Item = f64>) -> Operator {
        let mut h = self.drift.clone();
        for (op, u) in self.sparse.iter().zip(amplitudes) {
            op.add_scaled_to(&mut h, u);
        }
        h
    }

    fn check_pulse(&self, pulse: &PulseGrid) -> Result<()> {
        if pulse.n_controls() != self.n_controls() {
            return Err(Error::DimensionMismatch(format!(
                "pulse has {} control rows, system has {} controls",
                pulse.n_controls(),
                self.n_controls()
            )));
        }
        Ok(())
    }
}

/// Control amplitudes `u[c][k]` on `n_ts` equal slots spanning `t_gate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseGrid {
    n_ctrl: usize,
    n_ts: usize,
    t_gate: f64,
    /// row-major `[c * n_ts + k]`
    amps: Vec<f64>,
}

impl PulseGrid {
    pub fn new(n_ctrl: usize, n_ts: usize, t_gate: f64, amps: Vec<f64>) -> Result<Self> {
        if n_ts == 0 {
            return Err(Error::InvalidArgument("n_ts must be positive".into()));
        }
        if !(t_gate > 0.0 && t_gate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "t_gate must be positive, got {t_gate}"
            )));
        }
        if amps.len() != n_ctrl * n_ts {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for {n_ctrl} controls x {n_ts} slots",
                amps.len()
            )));
        }
        if amps.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("pulse amplitudes".into()));
        }
        Ok(PulseGrid {
            n_ctrl,
            n_ts,
            t_gate,
            amps,
        })
    }

    pub fn zeros(n_ctrl: usize, n_ts: usize, t_gate: f64) -> Result<Self> {
        Self::new(n_ctrl, n_ts, t_gate, vec![0.0; n_ctrl * n_ts])
    }

    pub fn n_controls(&self) -> usize {
        self.n_ctrl
    }

    pub fn n_slots(&self) -> usize {
        self.n_ts
    }

    pub fn t_gate(&self) -> f64 {
        self.t_gate
    }

    pub fn dt(&self) -> f64 {
        self.t_gate / self.n_ts as f64
    }

    pub fn get(&self, c: usize, k: usize) -> f64 {
        self.amps[c * self.n_ts + k]
    }

    pub fn set(&mut self, c: usize, k: usize, value: f64) {
        self.amps[c * self.n_ts + k] = value;
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amps
    }

    /// Amplitudes of every control during slot `k`.
    pub fn slot(&self, k: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_ctrl).map(move |c| self.get(c, k))
    }

    /// `self + step · direction`, elementwise over the flattened grid.
    pub fn stepped(&self, direction: &[f64], step: f64) -> PulseGrid {
        debug_assert_eq!(direction.len(), self.amps.len());
        PulseGrid {
            amps: self
                .amps
                .iter()
                .zip(direction)
                .map(|(a, d)| a + step * d)
                .collect(),
            ..self.clone()
        }
    }
}

/// Amplitudes i.i.d. uniform on `[-1, 1]`.
pub fn random_initial_pulse(n_ctrl: usize, n_ts: usize, t_gate: f64, seed: u64) -> Result<PulseGrid> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps = (0..n_ctrl * n_ts)
        .map(|_| rng.random_range(-1.0..=1.0))
        .collect();
    PulseGrid::new(n_ctrl, n_ts, t_gate, amps)
}

/// `exp(-i H_k dt)` together with the spectral data it came from.
#[derive(Debug, Clone)]
pub struct SlotPropagator {
    pub eigen: HermitianEigen,
    pub unitary: Operator,
}

impl SlotPropagator {
    fn new(h: &Operator, dt: f64) -> Self {
        let eigen = HermitianEigen::new(h);
        let unitary = eigen.map(|lambda| C64::new(0.0, -lambda * dt).exp());
        SlotPropagator { eigen, unitary }
    }
}

#[derive(Debug, Clone)]
pub struct PropagationResult {
    pub slots: Vec<SlotPropagator>,
    /// `forward[k] = U_k ⋯ U_0`
    pub forward: Vec<Operator>,
    /// `backward[k] = U_{N-1} ⋯ U_k`
    pub backward: Vec<Operator>,
    pub dt: f64,
}

impl PropagationResult {
    /// The full gate `V`.
    pub fn total(&self) -> &Operator {
        self.forward.last().expect("at least one slot")
    }

    /// `U_{N-1} ⋯ U_{k+1}` (identity for the last slot).
    pub fn after(&self, k: usize) -> Option<&Operator> {
        self.backward.get(k + 1)
    }

    /// `U_{k-1} ⋯ U_0` (identity for the first slot).
    pub fn before(&self, k: usize) -> Option<&Operator> {
        k.checked_sub(1).map(|j| &self.forward[j])
    }
}

fn slot_propagators(sys: &ControlSystem, pulse: &PulseGrid) -> Result<Vec<SlotPropagator>> {
    sys.check_pulse(pulse)?;
    let dt = pulse.dt();
    let slots = map_ambient(pulse.n_slots(), |k| {
        SlotPropagator::new(&sys.hamiltonian(pulse.slot(k)), dt)
    });
    for s in &slots {
        ensure_finite(&s.unitary, "slot propagator")?;
    }
    Ok(slots)
}

/// Full evolution with cached slot propagators and both cumulative products.
pub fn propagate(sys: &ControlSystem, pulse: &PulseGrid) -> Result<PropagationResult> {
    let slots = slot_propagators(sys, pulse)?;
    let n = slots.len();
    let mut forward: Vec<Operator> = Vec::with_capacity(n);
    for (k, s) in slots.iter().enumerate() {
        let next = match k {
            0 => s.unitary.clone(),
            _ => matmul(&s.unitary, &forward[k - 1]),
        };
        forward.push(next);
    }
    let mut backward: Vec<Operator> = vec![Operator::zeros(0, 0); n];
    for k in (0..n).rev() {
        backward[k] = if k + 1 == n {
            slots[k].unitary.clone()
        } else {
            matmul(&backward[k + 1], &slots[k].unitary)
        };
    }
    Ok(PropagationResult {
        slots,
        forward,
        backward,
        dt: pulse.dt(),
    })
}

/// Only the total propagator `V`, folded left to right in slot order.
pub fn evolve(sys: &ControlSystem, pulse: &PulseGrid) -> Result<Operator> {
    let slots = slot_propagators(sys, pulse)?;
    let mut it = slots.into_iter();
    let first = it.next().expect("at least one slot").unitary;
    Ok(it.fold(first, |acc, s| matmul(&s.unitary, &acc)))
}

/// `V` with slot `k` replaced by `exp(-i H' dt)` for the given amplitudes.
pub(crate) fn with_slot_replaced(
    sys: &ControlSystem,
    prop: &PropagationResult,
    k: usize,
    amplitudes: impl IntoIterator<Item = f64>,
) -> Operator {
    let u = SlotPropagator::new(&sys.hamiltonian(amplitudes), prop.dt).unitary;
    let right = match prop.before(k) {
        Some(b) => matmul(&u, b),
        None => u,
    };
    match prop.after(k) {
        Some(a) => matmul(a, &right),
        None => right,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, matrix_exponential, max_abs, sigma, unitarity_deviation, PauliAxis};
    use crate::system::{CouplingKind, SpinSystem, Topology};
    use std::f64::consts::PI;

    fn pair() -> ControlSystem {
        SpinSystem::new(2, Topology::Chain, CouplingKind::Ising)
            .unwrap()
            .control_system()
    }

    #[test]
    fn free_ising_pair_at_pi_is_minus_identity() {
        let sys = pair();
        for n_ts in [1, 5, 12] {
            let pulse = PulseGrid::zeros(4, n_ts, PI).unwrap();
            let v = evolve(&sys, &pulse).unwrap();
            assert!(max_abs(&(v + identity(4))) < 1e-12);
        }
    }

    #[test]
    fn constant_control_without_drift() {
        let sys = ControlSystem::new(1, Operator::zeros(2, 2), vec![sigma(PauliAxis::X)]).unwrap();
        let (a, t) = (0.8, 1.7);
        let pulse = PulseGrid::new(1, 4, t, vec![a; 4]).unwrap();
        let v = evolve(&sys, &pulse).unwrap();
        let expect = matrix_exponential(&sigma(PauliAxis::X), C64::new(0.0, -a * t)).unwrap();
        assert!(max_abs(&(v - expect)) < 1e-12);
    }

    #[test]
    fn slot_count_does_not_matter_for_constant_amplitudes() {
        let sys = pair();
        let amps = [0.3, -0.2, 0.5, 0.1];
        let one = PulseGrid::new(4, 1, 2.0, amps.to_vec()).unwrap();
        let eight = PulseGrid::new(4, 8, 2.0, amps.iter().flat_map(|a| [*a; 8]).collect()).unwrap();
        let a = evolve(&sys, &one).unwrap();
        let b = evolve(&sys, &eight).unwrap();
        assert!(max_abs(&(a - b)) < 1e-10);
    }

    #[test]
    fn cumulative_products_are_consistent() {
        let sys = SpinSystem::new(3, Topology::Chain, CouplingKind::Heisenberg)
            .unwrap()
            .control_system();
        let pulse = random_initial_pulse(6, 7, 2.5, 1).unwrap();
        let prop = propagate(&sys, &pulse).unwrap();
        let mut product = identity(8);
        for s in &prop.slots {
            assert!(unitarity_deviation(&s.unitary) < 1e-12);
            product = matmul(&s.unitary, &product);
        }
        assert!(max_abs(&(prop.total() - &product)) < 1e-10);
        assert!(max_abs(&(&prop.backward[0] - &product)) < 1e-10);
        assert!(max_abs(&(evolve(&sys, &pulse).unwrap() - &product)) < 1e-10);
        for k in 0..7 {
            let amps: Vec<f64> = pulse.slot(k).collect();
            let v = with_slot_replaced(&sys, &prop, k, amps);
            assert!(max_abs(&(v - &product)) < 1e-10);
        }
    }

    #[test]
    fn time_reversal_returns_identity() {
        let sys = pair();
        let pulse = random_initial_pulse(4, 9, 3.0, 7).unwrap();
        let v = evolve(&sys, &pulse).unwrap();
        let mut reversed = PulseGrid::zeros(4, 9, 3.0).unwrap();
        for c in 0..4 {
            for k in 0..9 {
                reversed.set(c, k, -pulse.get(c, 8 - k));
            }
        }
        let back = evolve(&sys.with_drift_scaled(-1.0), &reversed).unwrap();
        assert!(max_abs(&(matmul(&back, &v) - identity(4))) < 1e-9);
    }

    #[test]
    fn random_pulses_are_seeded_and_bounded() {
        let a = random_initial_pulse(10, 12, PI, 99).unwrap();
        let b = random_initial_pulse(10, 12, PI, 99).unwrap();
        assert_eq!(a, b);
        assert!(a.amplitudes().iter().all(|x| (-1.0..=1.0).contains(x)));
        let big = random_initial_pulse(100, 100, 1.0, 5).unwrap();
        let mean = big.amplitudes().iter().sum::<f64>() / 1e4;
        assert!(mean.abs() < 0.05);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let sys = pair();
        let pulse = PulseGrid::zeros(6, 3, 1.0).unwrap();
        assert!(matches!(propagate(&sys, &pulse), Err(Error::DimensionMismatch(_))));
        assert!(PulseGrid::new(2, 3, 1.0, vec![0.0; 5]).is_err());
        assert!(PulseGrid::new(1, 1, 1.0, vec![f64::INFINITY]).is_err());
        assert!(PulseGrid::zeros(1, 0, 1.0).is_err());
        assert!(PulseGrid::zeros(1, 1, -1.0).is_err());
    }

    #[test]
    fn repeated_propagation_is_bit_identical() {
        let sys = SpinSystem::new(3, Topology::Ring, CouplingKind::Ising)
            .unwrap()
            .control_system();
        let pulse = random_initial_pulse(6, 10, PI, 3).unwrap();
        let a = propagate(&sys, &pulse).unwrap();
        let b = propagate(&sys, &pulse).unwrap();
        assert_eq!(a.total(), b.total());
    }
}
