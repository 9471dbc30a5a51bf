//! Shot-level certification of the local fidelities.
//!
//! Each local fidelity is estimated by direct fidelity estimation on the
//! group's Choi state: pick a Pauli `P` uniformly, prepare a random
//! eigenstate of it (eigenvalue `w`), run the gate, measure a Pauli `Q`
//! chosen with probability `c_PQ²` where `c_PQ = Tr(Q U P U†)/d`, and record
//! `w·x/c_PQ` for the ±1 outcome `x`. The mean of that variable is
//! `F(M, U)`; for Clifford targets `|c_PQ| = 1` and every shot is ±1.
//!
//! In the sequential protocol one group is probed at a time while the rest of
//! the register starts in uniformly random computational basis states. In the
//! parallel protocol every group is probed at once and a single shot yields
//! one sample per group.

use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TargetGate;
use crate::error::{Error, Result};
use crate::linalg::{ensure_unitary, kron, matmul, mul_adj, sigma, trace, Operator, PauliAxis, SubsystemPartition, C64};
use crate::propagation::{evolve, ControlSystem, PulseGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Sequential,
    Parallel,
}

/// Number of distinct preparation settings a protocol needs for the
/// partition.
pub fn settings_count(partition: &SubsystemPartition, protocol: Protocol) -> usize {
    let sq = partition.dims().into_iter().map(|d| d * d);
    match protocol {
        Protocol::Sequential => sq.sum(),
        Protocol::Parallel => sq.max().unwrap_or(0),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificationResult {
    pub protocol: Protocol,
    /// per-group estimates of the local fidelities
    pub estimates: Vec<f64>,
    /// per-group empirical standard errors
    pub stderrs: Vec<f64>,
    pub f_le: f64,
    pub f_le_stderr: f64,
    pub shots_per_group: usize,
    pub settings: usize,
}

// Pauli labels are base-4 integers over the group's qubits, first qubit most
// significant; digits 0..4 stand for I, X, Y, Z.
fn digit(label: usize, j: usize, m: usize) -> usize {
    (label >> (2 * (m - 1 - j))) & 3
}

fn pauli_string(label: usize, m: usize) -> Operator {
    (0..m).fold(Operator::from_element(1, 1, C64::new(1.0, 0.0)), |acc, j| {
        let f = match digit(label, j, m) {
            0 => Operator::identity(2, 2),
            1 => sigma(PauliAxis::X),
            2 => sigma(PauliAxis::Y),
            _ => sigma(PauliAxis::Z),
        };
        kron(&acc, &f)
    })
}

#[derive(Debug, Clone)]
struct DfeTable {
    qubits: Vec<usize>,
    /// for each input Pauli, the output Paulis with non-zero `c_PQ`
    entries: Vec<Vec<(usize, f64)>>,
    /// cumulative sampling weights matching `entries`
    cumulative: Vec<Vec<f64>>,
}

impl DfeTable {
    fn new(u: &Operator, qubits: &[usize]) -> Self {
        let m = qubits.len();
        let d = (1usize << m) as f64;
        let n_paulis = 1usize << (2 * m);
        let paulis: Vec<Operator> = (0..n_paulis).map(|l| pauli_string(l, m)).collect();
        let mut entries = Vec::with_capacity(n_paulis);
        let mut cumulative = Vec::with_capacity(n_paulis);
        for p in &paulis {
            let image = mul_adj(&matmul(u, p), u);
            let row: Vec<(usize, f64)> = paulis
                .iter()
                .enumerate()
                .filter_map(|(q, qm)| {
                    let c = trace(&matmul(qm, &image)).re / d;
                    (c.abs() > 1e-12).then_some((q, c))
                })
                .collect();
            let total: f64 = row.iter().map(|(_, c)| c * c).sum();
            let mut acc = 0.0;
            cumulative.push(
                row.iter()
                    .map(|(_, c)| {
                        acc += c * c / total;
                        acc
                    })
                    .collect(),
            );
            entries.push(row);
        }
        DfeTable {
            qubits: qubits.to_vec(),
            entries,
            cumulative,
        }
    }

    fn m(&self) -> usize {
        self.qubits.len()
    }

    fn nonzero_count(&self) -> usize {
        self.entries.iter().map(Vec::len).sum()
    }

    fn sample_output<R: Rng + ?Sized>(&self, p: usize, rng: &mut R) -> (usize, f64) {
        let r: f64 = rng.random();
        let cum = &self.cumulative[p];
        let idx = cum.partition_point(|&x| x < r).min(cum.len() - 1);
        self.entries[p][idx]
    }
}

/// Single-qubit eigenstate of the Pauli with index `digit` (I and Z share
/// the computational basis); `bit = 1` selects eigenvalue -1.
fn local_state(digit: usize, bit: bool) -> [C64; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let sign = if bit { -1.0 } else { 1.0 };
    match digit {
        1 => [C64::new(s, 0.0), C64::new(sign * s, 0.0)],
        2 => [C64::new(s, 0.0), C64::new(0.0, sign * s)],
        _ if bit => [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        _ => [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
    }
}

fn product_state(locals: &[[C64; 2]]) -> DVector<C64> {
    let n = locals.len();
    DVector::from_fn(1 << n, |i, _| {
        (0..n).fold(C64::new(1.0, 0.0), |acc, q| acc * locals[q][(i >> (n - 1 - q)) & 1])
    })
}

/// Rotates qubit `q` so that a computational-basis readout measures the
/// Pauli with index `digit`.
fn rotate_for_readout(state: &mut DVector<C64>, q: usize, n: usize, digit: usize) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let g = match digit {
        1 => [[s, s], [s, -s]].map(|r| r.map(|x| C64::new(x, 0.0))),
        // H·S†
        2 => [
            [C64::new(s, 0.0), C64::new(0.0, -s)],
            [C64::new(s, 0.0), C64::new(0.0, s)],
        ],
        _ => return,
    };
    let bit = 1usize << (n - 1 - q);
    for i in (0..state.len()).filter(|i| i & bit == 0) {
        let (a, b) = (state[i], state[i | bit]);
        state[i] = g[0][0] * a + g[0][1] * b;
        state[i | bit] = g[1][0] * a + g[1][1] * b;
    }
}

fn sample_outcome<R: Rng + ?Sized>(state: &DVector<C64>, rng: &mut R) -> usize {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    for (i, a) in state.iter().enumerate() {
        acc += a.norm_sqr();
        if r < acc {
            return i;
        }
    }
    state.len() - 1
}

/// One probe of a group: the input Pauli, its eigenvalue sign and the
/// sampled readout Pauli with its coefficient.
struct Probe {
    p: usize,
    sign: f64,
    q: usize,
    c: f64,
}

impl Probe {
    fn draw<R: Rng + ?Sized>(table: &DfeTable, locals: &mut [[C64; 2]], rng: &mut R) -> Probe {
        let m = table.m();
        let p = rng.random_range(0..1usize << (2 * m));
        let mut sign = 1.0;
        for (j, &qubit) in table.qubits.iter().enumerate() {
            let dg = digit(p, j, m);
            let bit: bool = rng.random();
            if dg != 0 && bit {
                sign = -sign;
            }
            locals[qubit] = local_state(dg, bit);
        }
        let (q, c) = table.sample_output(p, rng);
        Probe { p, sign, q, c }
    }

    fn rotate(&self, table: &DfeTable, state: &mut DVector<C64>, n: usize) {
        for (j, &qubit) in table.qubits.iter().enumerate() {
            rotate_for_readout(state, qubit, n, digit(self.q, j, table.m()));
        }
    }

    fn sample_value(&self, table: &DfeTable, outcome: usize, n: usize) -> f64 {
        let m = table.m();
        let parity = table
            .qubits
            .iter()
            .enumerate()
            .filter(|(j, &qubit)| digit(self.q, *j, m) != 0 && (outcome >> (n - 1 - qubit)) & 1 == 1)
            .count();
        let x = if parity % 2 == 0 { 1.0 } else { -1.0 };
        debug_assert!(self.p < table.entries.len());
        self.sign * x / self.c
    }
}

fn tables(target: &TargetGate) -> Vec<DfeTable> {
    target
        .partition()
        .groups()
        .iter()
        .zip(target.factors())
        .map(|(g, u)| DfeTable::new(u, g))
        .collect()
}

#[derive(Default, Clone)]
struct Moments {
    count: usize,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    fn stderr(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        let k = self.count as f64;
        let var = ((self.sum_sq - self.sum * self.sum / k) / (k - 1.0)).max(0.0);
        (var / k).sqrt()
    }
}

fn finish(protocol: Protocol, moments: Vec<Moments>, shots: usize, target: &TargetGate) -> CertificationResult {
    let estimates: Vec<f64> = moments.iter().map(Moments::mean).collect();
    let stderrs: Vec<f64> = moments.iter().map(Moments::stderr).collect();
    CertificationResult {
        protocol,
        f_le: super::estimator_from_locals(&estimates),
        f_le_stderr: stderrs.iter().map(|s| s * s).sum::<f64>().sqrt(),
        estimates,
        stderrs,
        shots_per_group: shots,
        settings: settings_count(target.partition(), protocol),
    }
}

fn check_inputs(v: &Operator, target: &TargetGate, shots: usize) -> Result<()> {
    target.check_operator(v)?;
    ensure_unitary(v)?;
    if shots == 0 {
        return Err(Error::InvalidArgument("certification needs at least one shot".into()));
    }
    Ok(())
}

/// Sequential protocol on a given gate, `shots` per group.
pub fn certify_sequential_unitary<R: Rng + ?Sized>(
    v: &Operator,
    target: &TargetGate,
    shots: usize,
    rng: &mut R,
) -> Result<CertificationResult> {
    check_inputs(v, target, shots)?;
    let n = target.n_qubits();
    let tables = tables(target);
    let mut moments = vec![Moments::default(); tables.len()];
    let mut locals = vec![local_state(0, false); n];
    for (table, mom) in tables.iter().zip(moments.iter_mut()) {
        for _ in 0..shots {
            for slot in locals.iter_mut() {
                *slot = local_state(0, rng.random());
            }
            let probe = Probe::draw(table, &mut locals, rng);
            let mut state = v * product_state(&locals);
            probe.rotate(table, &mut state, n);
            let outcome = sample_outcome(&state, rng);
            mom.push(probe.sample_value(table, outcome, n));
        }
    }
    Ok(finish(Protocol::Sequential, moments, shots, target))
}

pub(super) fn parallel_estimates<R: Rng + ?Sized>(
    v: &Operator,
    target: &TargetGate,
    shots: usize,
    rng: &mut R,
) -> CertificationResult {
    let n = target.n_qubits();
    let tables = tables(target);
    let mut moments = vec![Moments::default(); tables.len()];
    let mut locals = vec![local_state(0, false); n];
    for _ in 0..shots {
        let probes: Vec<Probe> = tables.iter().map(|t| Probe::draw(t, &mut locals, rng)).collect();
        let mut state = v * product_state(&locals);
        for (probe, table) in probes.iter().zip(&tables) {
            probe.rotate(table, &mut state, n);
        }
        let outcome = sample_outcome(&state, rng);
        for ((probe, table), mom) in probes.iter().zip(&tables).zip(moments.iter_mut()) {
            mom.push(probe.sample_value(table, outcome, n));
        }
    }
    finish(Protocol::Parallel, moments, shots, target)
}

/// Parallel protocol on a given gate; every shot probes all groups.
pub fn certify_parallel_unitary<R: Rng + ?Sized>(
    v: &Operator,
    target: &TargetGate,
    shots: usize,
    rng: &mut R,
) -> Result<CertificationResult> {
    check_inputs(v, target, shots)?;
    Ok(parallel_estimates(v, target, shots, rng))
}

/// Sequential protocol on the gate produced by `pulse`.
pub fn certify_sequential(
    sys: &ControlSystem,
    pulse: &PulseGrid,
    target: &TargetGate,
    shots: usize,
    seed: u64,
) -> Result<CertificationResult> {
    let v = evolve(sys, pulse)?;
    certify_sequential_unitary(&v, target, shots, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Parallel protocol on the gate produced by `pulse`.
pub fn certify_parallel(
    sys: &ControlSystem,
    pulse: &PulseGrid,
    target: &TargetGate,
    shots: usize,
    seed: u64,
) -> Result<CertificationResult> {
    let v = evolve(sys, pulse)?;
    certify_parallel_unitary(&v, target, shots, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Standard error of the single-group estimate after `shots` shots when the
/// true local fidelity is `fidelity`. The second moment of the per-shot
/// variable is the number of non-zero `c_PQ` over `d²`.
pub fn analytic_stderr(target: &TargetGate, group: usize, fidelity: f64, shots: usize) -> Result<f64> {
    let groups = target.partition().groups();
    if group >= groups.len() {
        return Err(Error::InvalidArgument(format!(
            "group {group} does not exist, the target has {}",
            groups.len()
        )));
    }
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be positive".into()));
    }
    let table = DfeTable::new(&target.factors()[group], &groups[group]);
    let d = (1usize << table.m()) as f64;
    let second = table.nonzero_count() as f64 / (d * d);
    Ok(((second - fidelity * fidelity).max(0.0) / shots as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fidelity::local_fidelities;
    use crate::linalg::{cnot, identity, matrix_exponential, random_hamiltonian, random_unitary};
    use approx::assert_abs_diff_eq;

    #[test]
    fn cnot_table_is_clifford() {
        let t = DfeTable::new(&cnot(), &[0, 1]);
        for (row, cum) in t.entries.iter().zip(&t.cumulative) {
            assert_eq!(row.len(), 1);
            assert_abs_diff_eq!(row[0].1.abs(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(*cum.last().unwrap(), 1.0, epsilon = 1e-12);
        }
        // X on the control spreads to X⊗X
        assert_eq!(t.entries[0b0100][0].0, 0b0101);
    }

    #[test]
    fn readout_rotations_map_eigenstates_to_basis() {
        for dg in [1, 2, 3] {
            for bit in [false, true] {
                let mut s = product_state(&[local_state(dg, bit)]);
                rotate_for_readout(&mut s, 0, 1, dg);
                let want = usize::from(bit);
                assert_abs_diff_eq!(s[want].norm_sqr(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn exact_gate_certifies_to_one() {
        let t = TargetGate::cnot(3, 0, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let seq = certify_sequential_unitary(t.full_unitary(), &t, 500, &mut rng).unwrap();
        let par = certify_parallel_unitary(t.full_unitary(), &t, 500, &mut rng).unwrap();
        for r in [seq, par] {
            for e in &r.estimates {
                assert_eq!(*e, 1.0);
            }
        }
    }

    #[test]
    fn estimates_track_exact_values() {
        let t = TargetGate::cnot(2, 0, 1).unwrap();
        let h = random_hamiltonian(2, 1.0, 4).unwrap();
        let v = matmul(&matrix_exponential(&h, C64::new(0.0, -0.4)).unwrap(), t.full_unitary());
        let exact = local_fidelities(&v, &t).unwrap()[0];
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let r = certify_parallel_unitary(&v, &t, 20_000, &mut rng).unwrap();
        let sigma = analytic_stderr(&t, 0, exact, 20_000).unwrap();
        assert!((r.estimates[0] - exact).abs() < 5.0 * sigma);
        assert!((r.stderrs[0] / sigma - 1.0).abs() < 0.1);
    }

    #[test]
    fn non_clifford_target_is_unbiased() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = random_unitary(2, &mut rng);
        let p = SubsystemPartition::new(1, vec![vec![0]]).unwrap();
        let t = TargetGate::new(p, vec![u]).unwrap();
        let v = matmul(&matrix_exponential(&sigma(PauliAxis::X), C64::new(0.0, -0.3)).unwrap(), t.full_unitary());
        let exact = local_fidelities(&v, &t).unwrap()[0];
        let r = certify_sequential_unitary(&v, &t, 40_000, &mut rng).unwrap();
        let sigma = analytic_stderr(&t, 0, exact, 40_000).unwrap();
        assert!((r.estimates[0] - exact).abs() < 5.0 * sigma);
    }

    #[test]
    fn settings_counts() {
        let t = TargetGate::cnot(4, 0, 1).unwrap();
        assert_eq!(settings_count(t.partition(), Protocol::Sequential), 16 + 4 + 4);
        assert_eq!(settings_count(t.partition(), Protocol::Parallel), 16);
    }

    #[test]
    fn input_validation() {
        let t = TargetGate::cnot(2, 0, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(certify_parallel_unitary(&identity(4), &t, 0, &mut rng).is_err());
        assert!(certify_parallel_unitary(&identity(8), &t, 10, &mut rng).is_err());
        assert!(analytic_stderr(&t, 3, 0.9, 10).is_err());
    }
}
