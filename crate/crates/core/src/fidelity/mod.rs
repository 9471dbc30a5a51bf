//! Gate fidelities and the local estimator.
//!
//! For a target `U = ⊗_i U_i` over a partition of the register, the local
//! estimator is
//!
//! ```text
//! F_LE = 1 - Σ_i (1 - F(M_i, U_i))
//! ```
//!
//! where `M_i` is the channel seen by group `i` when every other qubit starts
//! maximally mixed. Its Choi state is the partial trace of the full Choi
//! state over everything except group `i` in both the system and copy
//! blocks. `F_LE` never exceeds the full Choi fidelity and meets it as the
//! gate approaches the target.

mod certify;

pub use certify::{
    analytic_stderr, certify_parallel, certify_parallel_unitary, certify_sequential,
    certify_sequential_unitary, settings_count, CertificationResult, Protocol,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    choi_vector, cnot, embed_factors, ensure_unitary, hs_inner, identity, qubit_offsets, Operator,
    PureState, SubsystemPartition, C64,
};

/// Index bookkeeping for one group of a partition.
#[derive(Debug, Clone)]
pub(crate) struct GroupLayout {
    /// full-register offset of each group basis index
    pub off_in: Vec<usize>,
    /// full-register offset of each complement basis index
    pub off_out: Vec<usize>,
}

/// Tensor-product target `⊗_i U_i` over a qubit partition.
#[derive(Debug, Clone)]
pub struct TargetGate {
    partition: SubsystemPartition,
    factors: Vec<Operator>,
    full: Operator,
    factor_choi: Vec<PureState>,
    layouts: Vec<GroupLayout>,
    label: String,
}

impl TargetGate {
    pub fn new(partition: SubsystemPartition, factors: Vec<Operator>) -> Result<Self> {
        if factors.len() != partition.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} factors for {} groups",
                factors.len(),
                partition.len()
            )));
        }
        for (f, d) in factors.iter().zip(partition.dims()) {
            if f.shape() != (d, d) {
                return Err(Error::DimensionMismatch(format!(
                    "factor is {}x{}, group dimension is {d}",
                    f.nrows(),
                    f.ncols()
                )));
            }
            ensure_unitary(f)?;
        }
        let n = partition.n_qubits();
        let full = embed_factors(&partition, &factors);
        let factor_choi = factors.iter().map(choi_vector).collect();
        let layouts = (0..partition.len())
            .map(|i| {
                GroupLayout {
                    off_in: qubit_offsets(&partition.groups()[i], n),
                    off_out: qubit_offsets(&partition.complement(i), n),
                }
            })
            .collect();
        Ok(TargetGate {
            partition,
            factors,
            full,
            factor_choi,
            layouts,
            label: "custom".into(),
        })
    }

    /// CNOT on `(control, target)` and identity on every other qubit. The
    /// CNOT group comes first, followed by singletons in ascending order.
    pub fn cnot(n: usize, control: usize, target: usize) -> Result<Self> {
        for q in [control, target] {
            if q >= n {
                return Err(Error::QubitOutOfRange { index: q, n });
            }
        }
        if control == target {
            return Err(Error::InvalidArgument(
                "control and target qubit must differ".into(),
            ));
        }
        let mut groups = vec![vec![control, target]];
        let mut factors = vec![cnot()];
        for q in (0..n).filter(|q| *q != control && *q != target) {
            groups.push(vec![q]);
            factors.push(identity(2));
        }
        let mut gate = Self::new(SubsystemPartition::new(n, groups)?, factors)?;
        gate.label = format!("cnot({control},{target})");
        Ok(gate)
    }

    pub fn n_qubits(&self) -> usize {
        self.partition.n_qubits()
    }

    pub fn partition(&self) -> &SubsystemPartition {
        &self.partition
    }

    pub fn factors(&self) -> &[Operator] {
        &self.factors
    }

    pub fn full_unitary(&self) -> &Operator {
        &self.full
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub(crate) fn layouts(&self) -> &[GroupLayout] {
        &self.layouts
    }

    fn check_operator(&self, v: &Operator) -> Result<()> {
        let dim = 1usize << self.n_qubits();
        if v.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{}, target acts on {} qubits",
                v.nrows(),
                v.ncols(),
                self.n_qubits()
            )));
        }
        Ok(())
    }
}

fn check_pair(v: &Operator, u: &Operator) -> Result<()> {
    if v.shape() != u.shape() || !v.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            v.nrows(),
            v.ncols(),
            u.nrows(),
            u.ncols()
        )));
    }
    ensure_unitary(v)?;
    ensure_unitary(u)
}

/// `|Tr(V†U)/d|²`.
pub fn gate_fidelity_unitary(v: &Operator, u: &Operator) -> Result<f64> {
    check_pair(v, u)?;
    Ok(trace_overlap(v, u))
}

pub(crate) fn trace_overlap(v: &Operator, u: &Operator) -> f64 {
    (hs_inner(v, u) / v.nrows() as f64).norm_sqr()
}

/// `⟨ψ_U|ρ_V|ψ_U⟩` computed on the Choi states themselves.
pub fn choi_fidelity(v: &Operator, u: &Operator) -> Result<f64> {
    check_pair(v, u)?;
    Ok(choi_vector(u).inner(&choi_vector(v)).norm_sqr())
}

/// `F(M_i, U_i)` for every group of the target.
pub fn local_fidelities(v: &Operator, target: &TargetGate) -> Result<Vec<f64>> {
    target.check_operator(v)?;
    ensure_unitary(v)?;
    Ok(local_fidelities_unchecked(v, target))
}

pub(crate) fn local_fidelities_unchecked(v: &Operator, target: &TargetGate) -> Vec<f64> {
    let n = target.n_qubits();
    let choi = choi_vector(v);
    target
        .partition
        .groups()
        .iter()
        .zip(&target.factor_choi)
        .map(|(group, psi)| {
            // the group in the system block, then the same group in the copy block
            let keep: Vec<usize> = group.iter().copied().chain(group.iter().map(|q| q + n)).collect();
            let rho = choi
                .reduced_density(2 * n, &keep)
                .expect("group indices lie within the doubled register");
            let amp = psi.amplitudes();
            (amp.adjoint() * rho * amp)[(0, 0)].re
        })
        .collect()
}

/// `1 - Σ_i (1 - f_i)`.
pub fn estimator_from_locals(locals: &[f64]) -> f64 {
    1.0 - locals.iter().map(|f| 1.0 - f).sum::<f64>()
}

/// The local estimator `F_LE(V, ⊗U_i)`.
pub fn local_estimator(v: &Operator, target: &TargetGate) -> Result<f64> {
    local_fidelities(v, target).map(|f| estimator_from_locals(&f))
}

/// Per-group overlap matrices `X_i = Tr_i[(U_i† ⊗ 1) V]` (a `d_out × d_out`
/// matrix on the complement), with `F(M_i, U_i) = ‖X_i‖²_F / (d · d_i)`.
pub(crate) fn overlap_matrices(v: &Operator, target: &TargetGate) -> Vec<Operator> {
    target
        .layouts
        .iter()
        .zip(&target.factors)
        .map(|(lay, u)| {
            let d_in = lay.off_in.len();
            let d_out = lay.off_out.len();
            Operator::from_fn(d_out, d_out, |b, b2| {
                let mut acc = C64::new(0.0, 0.0);
                for a in 0..d_in {
                    let col = lay.off_in[a] | lay.off_out[b2];
                    for a2 in 0..d_in {
                        acc += u[(a2, a)].conj() * v[(lay.off_in[a2] | lay.off_out[b], col)];
                    }
                }
                acc
            })
        })
        .collect()
}

/// Nearest multiple of `a_num` (ties to the even multiple); `a_num = 0`
/// leaves `f` unchanged.
pub fn quantize(f: f64, a_num: f64) -> Result<f64> {
    if !(a_num >= 0.0) || !a_num.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "a_num must be a non-negative number, got {a_num}"
        )));
    }
    if a_num == 0.0 {
        return Ok(f);
    }
    Ok((f / a_num).round_ties_even() * a_num)
}

/// How the optimizer observes the local fidelities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum MeasurementModel {
    /// Full numerical precision.
    Exact,
    /// Each local fidelity rounded to a multiple of `a_num`.
    Quantized { a_num: f64 },
    /// Each evaluation estimated from `shots` simulated parallel-protocol
    /// shots.
    Sampled { shots: usize, seed: u64 },
}

impl MeasurementModel {
    /// `Exact` for `a_num = 0`, `Quantized` otherwise.
    pub fn from_a_num(a_num: f64) -> Result<Self> {
        let model = if a_num == 0.0 {
            MeasurementModel::Exact
        } else {
            MeasurementModel::Quantized { a_num }
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            MeasurementModel::Exact => Ok(()),
            MeasurementModel::Quantized { a_num } if a_num > 0.0 && a_num.is_finite() => Ok(()),
            MeasurementModel::Quantized { a_num } => Err(Error::InvalidArgument(format!(
                "quantized measurement needs a_num > 0, got {a_num}"
            ))),
            MeasurementModel::Sampled { shots, .. } if shots >= 1 => Ok(()),
            MeasurementModel::Sampled { .. } => {
                Err(Error::InvalidArgument("sampled measurement needs shots >= 1".into()))
            }
        }
    }

    pub fn a_num(&self) -> f64 {
        match *self {
            MeasurementModel::Quantized { a_num } => a_num,
            _ => 0.0,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, MeasurementModel::Exact)
    }

    /// Measured local fidelities of `v`. `eval_index` decorrelates the shot
    /// noise of successive sampled evaluations.
    pub fn measure(&self, v: &Operator, target: &TargetGate, eval_index: u64) -> Vec<f64> {
        match *self {
            MeasurementModel::Exact => local_fidelities_unchecked(v, target),
            MeasurementModel::Quantized { a_num } => local_fidelities_unchecked(v, target)
                .into_iter()
                .map(|f| (f / a_num).round_ties_even() * a_num)
                .collect(),
            MeasurementModel::Sampled { shots, seed } => {
                use rand::SeedableRng;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(eval_index);
                certify::parallel_estimates(v, target, shots, &mut rng).estimates
            }
        }
    }
}
