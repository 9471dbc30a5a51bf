//! Fidelity and local estimator of randomly perturbed targets,
//! `V = exp(-iH)·U` with `‖H‖ = norm`, as the register grows.

use serde::Serialize;

use super::derive_seed;
use super::stats::{mean, stderr};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Workers};
use crate::fidelity::{estimator_from_locals, local_fidelities_unchecked, trace_overlap, TargetGate};
use crate::linalg::{matmul, matrix_exponential, random_hamiltonian, C64};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationRow {
    pub n: usize,
    pub mean_f: f64,
    pub mean_fle: f64,
    pub stderr_f: f64,
    pub stderr_fle: f64,
    pub samples: usize,
}

/// One row per qubit count, target CNOT on (0, 1) and identity elsewhere.
/// Sample `s` at `n` qubits draws its Hamiltonian from
/// `derive_seed(seed, [n, s])`.
pub fn perturbation_scaling(
    n_range: &[usize],
    norm: f64,
    samples: usize,
    seed: u64,
    workers: Workers,
) -> Result<Vec<PerturbationRow>> {
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::InvalidArgument(format!("norm must be positive, got {norm}")));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    n_range
        .iter()
        .map(|&n| {
            let target = TargetGate::cnot(n, 0, 1)?;
            let pairs = map_indexed(samples, workers, |s| -> Result<(f64, f64)> {
                let h = random_hamiltonian(n, norm, derive_seed(seed, &[n as u64, s as u64]))?;
                let v = matmul(&matrix_exponential(&h, C64::new(0.0, -1.0))?, target.full_unitary());
                let f = trace_overlap(&v, target.full_unitary());
                let fle = estimator_from_locals(&local_fidelities_unchecked(&v, &target));
                Ok((f, fle))
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
            let fs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let fles: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            Ok(PerturbationRow {
                n,
                mean_f: mean(&fs).unwrap_or(f64::NAN),
                mean_fle: mean(&fles).unwrap_or(f64::NAN),
                stderr_f: stderr(&fs).unwrap_or(0.0),
                stderr_fle: stderr(&fles).unwrap_or(0.0),
                samples,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishing_norm_leaves_target() {
        let rows = perturbation_scaling(&[2, 3], 1e-9, 3, 1, Workers::SEQUENTIAL).unwrap();
        for r in rows {
            assert!((1.0 - r.mean_f) < 1e-12 && (1.0 - r.mean_fle) < 1e-12);
        }
    }

    #[test]
    fn estimator_stays_below_fidelity() {
        let rows = perturbation_scaling(&[3], 0.1, 20, 2, Workers::SEQUENTIAL).unwrap();
        assert!(rows[0].mean_fle <= rows[0].mean_f);
        assert_eq!(rows[0].samples, 20);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(perturbation_scaling(&[3], 0.0, 5, 1, Workers::SEQUENTIAL).is_err());
        assert!(perturbation_scaling(&[3], 0.1, 0, 1, Workers::SEQUENTIAL).is_err());
    }
}
