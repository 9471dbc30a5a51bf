//! Dense complex linear algebra for few-qubit registers.
//!
//! Qubit 0 is the most significant tensor factor: in an `n`-qubit basis
//! index `i`, qubit `q` is bit `n - 1 - q`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense square complex matrix. Hamiltonians, unitaries and density
/// operators all share this representation.
pub type Operator = DMatrix<C64>;

pub const UNITARY_TOL: f64 = 1e-10;
pub const HERMITIAN_TOL: f64 = 1e-12;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

/// `a * b` through matrixmultiply's complex kernel.
fn gemm(a: &Operator, b: &Operator) -> Operator {
    let (m, k) = a.shape();
    let (kb, n) = b.shape();
    assert_eq!(k, kb, "inner dimensions differ: {k} vs {kb}");
    let mut c = Operator::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    let standard = matrixmultiply::CGemmOption::Standard;
    // SAFETY: Complex64 is repr(C) with layout [f64; 2]; nalgebra's dense
    // storage is contiguous column-major, and the strides address exactly
    // the m×k, k×n and m×n extents of the three buffers.
    unsafe {
        matrixmultiply::zgemm(
            standard,
            standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    c
}

/// `a * b`.
pub fn matmul(a: &Operator, b: &Operator) -> Operator {
    gemm(a, b)
}

/// `a† * b`.
pub fn adj_mul(a: &Operator, b: &Operator) -> Operator {
    gemm(&a.adjoint(), b)
}

/// `a * b†`.
pub fn mul_adj(a: &Operator, b: &Operator) -> Operator {
    gemm(a, &b.adjoint())
}

pub fn identity(dim: usize) -> Operator {
    Operator::identity(dim, dim)
}

/// `a ⊗ b`, with `a` the more significant factor.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    a.kronecker(b)
}

pub fn trace(a: &Operator) -> C64 {
    a.diagonal().iter().sum()
}

/// Hilbert–Schmidt inner product `Tr(a† b)`.
pub fn hs_inner(a: &Operator, b: &Operator) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// 2×2 Pauli matrix.
pub fn sigma(axis: PauliAxis) -> Operator {
    let (a, b, c, d) = match axis {
        PauliAxis::X => (ZERO, ONE, ONE, ZERO),
        PauliAxis::Y => (ZERO, -I, I, ZERO),
        PauliAxis::Z => (ONE, ZERO, ZERO, -ONE),
    };
    Operator::from_row_slice(2, 2, &[a, b, c, d])
}

/// Controlled-NOT with the first (most significant) qubit as control.
pub fn cnot() -> Operator {
    let mut m = Operator::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 1)] = ONE;
    m[(2, 3)] = ONE;
    m[(3, 2)] = ONE;
    m
}

/// `I ⊗ … ⊗ σ_axis ⊗ … ⊗ I` acting on `qubit` of an `n`-qubit register.
pub fn pauli(axis: PauliAxis, qubit: usize, n: usize) -> Result<Operator> {
    if qubit >= n {
        return Err(Error::QubitOutOfRange { index: qubit, n });
    }
    let dim = 1usize << n;
    let mask = 1usize << (n - 1 - qubit);
    let mut m = Operator::zeros(dim, dim);
    for col in 0..dim {
        let bit_set = col & mask != 0;
        match axis {
            PauliAxis::X => m[(col ^ mask, col)] = ONE,
            PauliAxis::Y => m[(col ^ mask, col)] = if bit_set { -I } else { I },
            PauliAxis::Z => m[(col, col)] = if bit_set { -ONE } else { ONE },
        }
    }
    Ok(m)
}

pub fn max_abs(a: &Operator) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |A - A†|` elementwise.
pub fn hermiticity_deviation(a: &Operator) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    let n = a.nrows();
    let mut dev: f64 = 0.0;
    for j in 0..n {
        for i in 0..=j {
            dev = dev.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn is_hermitian(a: &Operator) -> bool {
    hermiticity_deviation(a) <= HERMITIAN_TOL * (1.0 + max_abs(a))
}

/// `max |A†A - I|` elementwise.
pub fn unitarity_deviation(a: &Operator) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    let mut g = adj_mul(a, a);
    for i in 0..g.nrows() {
        g[(i, i)] -= ONE;
    }
    max_abs(&g)
}

pub fn is_unitary(a: &Operator) -> bool {
    unitarity_deviation(a) <= UNITARY_TOL
}

pub(crate) fn ensure_unitary(a: &Operator) -> Result<()> {
    let dev = unitarity_deviation(a);
    if dev <= UNITARY_TOL {
        Ok(())
    } else {
        Err(Error::NotUnitary(dev))
    }
}

pub(crate) fn ensure_finite(a: &Operator, what: &str) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// Spectral decomposition `H = V diag(λ) V†` of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Operator,
}

impl HermitianEigen {
    /// Decomposes the Hermitian part `(H + H†)/2`.
    pub fn new(h: &Operator) -> Self {
        let sym = (h + h.adjoint()) * C64::new(0.5, 0.0);
        let eig = sym.symmetric_eigen();
        HermitianEigen {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        }
    }

    /// `V diag(f(λ)) V†`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> Operator {
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let fj = f(lambda);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= fj);
        }
        mul_adj(&scaled, &self.vectors)
    }
}

/// `exp(scale · h)`.
///
/// Hermitian inputs go through the spectral decomposition, which keeps
/// `exp(-i t H)` unitary to rounding. Anything else falls back to
/// nalgebra's Padé scaling-and-squaring.
pub fn matrix_exponential(h: &Operator, scale: C64) -> Result<Operator> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "exponent must be square, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    ensure_finite(h, "matrix exponent")?;
    if !(scale.re.is_finite() && scale.im.is_finite()) {
        return Err(Error::NonFinite("exponent scale".into()));
    }
    let out = if is_hermitian(h) {
        HermitianEigen::new(h).map(|lambda| (scale * lambda).exp())
    } else {
        (h * scale).exp()
    };
    ensure_finite(&out, "matrix exponential")?;
    Ok(out)
}

/// Largest singular value.
pub fn spectral_norm(a: &Operator) -> f64 {
    if is_hermitian(a) {
        HermitianEigen::new(a)
            .values
            .iter()
            .fold(0.0, |m: f64, v| m.max(v.abs()))
    } else {
        a.clone().singular_values().max()
    }
}

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState(DVector<C64>);

impl PureState {
    pub const NORM_TOL: f64 = 1e-12;

    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e2 * Self::NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "state norm {norm} is not 1"
            )));
        }
        Ok(PureState(amplitudes))
    }

    /// Rescales to unit norm; fails on the zero vector.
    pub fn normalized(amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize state".into()));
        }
        Ok(PureState(amplitudes / C64::new(norm, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.0
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.0.dotc(&other.0)
    }

    pub fn projector(&self) -> Operator {
        &self.0 * self.0.adjoint()
    }

    /// Reduced density operator on `keep` (in the given order), for a state
    /// on `n` qubits.
    pub fn reduced_density(&self, n: usize, keep: &[usize]) -> Result<Operator> {
        check_dim(self.dim(), n)?;
        let (keep_off, trace_off) = split_offsets(n, keep)?;
        let m = Operator::from_fn(keep_off.len(), trace_off.len(), |k, t| {
            self.0[keep_off[k] | trace_off[t]]
        });
        Ok(mul_adj(&m, &m))
    }
}

/// Disjoint qubit groups covering a register.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemPartition {
    n: usize,
    groups: Vec<Vec<usize>>,
}

impl SubsystemPartition {
    pub fn new(n: usize, groups: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        for group in &groups {
            if group.is_empty() {
                return Err(Error::InvalidPartition("empty group".into()));
            }
            for &q in group {
                if q >= n {
                    return Err(Error::QubitOutOfRange { index: q, n });
                }
                if seen[q] {
                    return Err(Error::InvalidPartition(format!(
                        "qubit {q} appears in more than one group"
                    )));
                }
                seen[q] = true;
            }
        }
        if let Some(q) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!("qubit {q} is not covered")));
        }
        Ok(SubsystemPartition { n, groups })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// `d_i = 2^|group i|`.
    pub fn dims(&self) -> Vec<usize> {
        self.groups.iter().map(|g| 1usize << g.len()).collect()
    }

    /// Qubits outside `group`, ascending.
    pub fn complement(&self, group: usize) -> Vec<usize> {
        let g = &self.groups[group];
        (0..self.n).filter(|q| !g.contains(q)).collect()
    }
}

fn check_dim(dim: usize, n: usize) -> Result<()> {
    if n >= usize::BITS as usize || dim != 1usize << n {
        return Err(Error::DimensionMismatch(format!(
            "dimension {dim} does not match {n} qubits"
        )));
    }
    Ok(())
}

/// Offsets of each local basis index of `qubits` inside the full register
/// index. Local index bit order follows the order of `qubits` (first is most
/// significant). Offsets of disjoint qubit sets combine with `|`.
pub fn qubit_offsets(qubits: &[usize], n: usize) -> Vec<usize> {
    let m = qubits.len();
    (0..1usize << m)
        .map(|local| {
            qubits.iter().enumerate().fold(0, |acc, (j, &q)| {
                if (local >> (m - 1 - j)) & 1 == 1 {
                    acc | (1 << (n - 1 - q))
                } else {
                    acc
                }
            })
        })
        .collect()
}

/// Local basis index of `qubits` (first most significant) within `full`.
pub fn local_index(full: usize, qubits: &[usize], n: usize) -> usize {
    qubits
        .iter()
        .fold(0, |acc, &q| (acc << 1) | ((full >> (n - 1 - q)) & 1))
}

fn split_offsets(n: usize, keep: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut seen = vec![false; n];
    for &q in keep {
        if q >= n {
            return Err(Error::QubitOutOfRange { index: q, n });
        }
        if seen[q] {
            return Err(Error::InvalidArgument(format!("qubit {q} kept twice")));
        }
        seen[q] = true;
    }
    let traced: Vec<usize> = (0..n).filter(|&q| !seen[q]).collect();
    Ok((qubit_offsets(keep, n), qubit_offsets(&traced, n)))
}

/// Trace out every qubit not in `keep`. The result is ordered as `keep`.
pub fn partial_trace(rho: &Operator, n: usize, keep: &[usize]) -> Result<Operator> {
    if !rho.is_square() {
        return Err(Error::DimensionMismatch("operator must be square".into()));
    }
    check_dim(rho.nrows(), n)?;
    let (keep_off, trace_off) = split_offsets(n, keep)?;
    let dk = keep_off.len();
    Ok(Operator::from_fn(dk, dk, |r, c| {
        trace_off
            .iter()
            .map(|&t| rho[(keep_off[r] | t, keep_off[c] | t)])
            .sum()
    }))
}

/// Normalized Choi state `(U ⊗ 1) |Ω⟩`, `|Ω⟩ = d^{-1/2} Σ_k |k⟩|k⟩`, laid out
/// as (system block ⊗ copy block).
pub fn choi_state(u: &Operator) -> Result<PureState> {
    ensure_unitary(u)?;
    Ok(choi_vector(u))
}

pub(crate) fn choi_vector(u: &Operator) -> PureState {
    let d = u.nrows();
    let scale = 1.0 / (d as f64).sqrt();
    // index = system * d + copy, amplitude U[system, copy] / sqrt(d)
    PureState(DVector::from_fn(d * d, |idx, _| {
        u[(idx / d, idx % d)] * scale
    }))
}

/// Random Hermitian operator: i.i.d. complex Gaussian entries, Hermitized as
/// `(M + M†)/2`, then rescaled to spectral norm `norm`.
pub fn random_hamiltonian(n: usize, norm: f64, seed: u64) -> Result<Operator> {
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "norm must be positive, got {norm}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 1usize << n;
    let m = Operator::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let current = spectral_norm(&h);
    Ok(h * C64::new(norm / current, 0.0))
}

/// Haar-random unitary (QR of a complex Ginibre matrix with the phases of
/// `R`'s diagonal divided out).
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Operator {
    let g = Operator::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    q
}

/// Embed a tensor product of group factors into the full register ordering.
pub fn embed_factors(partition: &SubsystemPartition, factors: &[Operator]) -> Operator {
    let n = partition.n_qubits();
    let dim = 1usize << n;
    let locals: Vec<Vec<usize>> = partition
        .groups()
        .iter()
        .map(|g| (0..dim).map(|full| local_index(full, g, n)).collect())
        .collect();
    Operator::from_fn(dim, dim, |r, c| {
        let mut acc = ONE;
        for (f, local) in factors.iter().zip(&locals) {
            acc *= f[(local[r], local[c])];
            if acc == ZERO {
                break;
            }
        }
        acc
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn close(a: &Operator, b: &Operator, tol: f64) -> bool {
        a.shape() == b.shape() && max_abs(&(a - b)) <= tol
    }

    #[test]
    fn pauli_z_single_qubit() {
        let z = pauli(PauliAxis::Z, 0, 1).unwrap();
        assert!(close(&z, &sigma(PauliAxis::Z), 0.0));
    }

    #[test]
    fn pauli_x_on_second_of_two() {
        let x = pauli(PauliAxis::X, 1, 2).unwrap();
        assert!(close(&x, &kron(&identity(2), &sigma(PauliAxis::X)), 0.0));
        assert_eq!(trace(&x), ZERO);
        assert!(close(&matmul(&x, &x), &identity(4), 0.0));
    }

    #[test]
    fn pauli_y_spectrum_on_three_qubits() {
        let y = pauli(PauliAxis::Y, 0, 3).unwrap();
        assert!(is_hermitian(&y));
        let mut vals = HermitianEigen::new(&y).values;
        vals.sort_by(f64::total_cmp);
        for (k, v) in vals.iter().enumerate() {
            let expect = if k < 4 { -1.0 } else { 1.0 };
            assert_abs_diff_eq!(*v, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn pauli_rejects_out_of_range_qubit() {
        assert_eq!(
            pauli(PauliAxis::X, 3, 3),
            Err(Error::QubitOutOfRange { index: 3, n: 3 })
        );
    }

    #[test]
    fn kron_examples() {
        assert!(close(&kron(&identity(2), &identity(2)), &identity(4), 0.0));
        let zz = kron(&sigma(PauliAxis::Z), &sigma(PauliAxis::Z));
        let expect = Operator::from_diagonal(&DVector::from_vec(vec![ONE, -ONE, -ONE, ONE]));
        assert!(close(&zz, &expect, 0.0));
    }

    #[test]
    fn kron_trace_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_unitary(2, &mut rng);
        let b = random_unitary(2, &mut rng);
        let t = trace(&kron(&a, &b));
        assert!((t - trace(&a) * trace(&b)).norm() < 1e-14);
    }

    #[test]
    fn gemm_variants_match_nalgebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_unitary(8, &mut rng);
        let b = random_unitary(8, &mut rng);
        assert!(close(&matmul(&a, &b), &(&a * &b), 1e-13));
        assert!(close(&adj_mul(&a, &b), &(a.adjoint() * &b), 1e-13));
        assert!(close(&mul_adj(&a, &b), &(&a * b.adjoint()), 1e-13));
        let rect = Operator::from_fn(3, 5, |i, j| C64::new(i as f64, j as f64 - 1.0));
        let other = Operator::from_fn(5, 2, |i, j| C64::new(j as f64, i as f64));
        assert!(close(&matmul(&rect, &other), &(&rect * &other), 1e-13));
    }

    #[test]
    fn exp_of_zz_at_pi_is_minus_identity() {
        let zz = kron(&sigma(PauliAxis::Z), &sigma(PauliAxis::Z));
        let u = matrix_exponential(&zz, C64::new(0.0, -PI)).unwrap();
        assert!(close(&u, &(-identity(4)), 1e-12));
    }

    #[test]
    fn exp_with_zero_scale_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_unitary(4, &mut rng);
        let h = (&u + u.adjoint()) * C64::new(0.5, 0.0);
        assert!(close(&matrix_exponential(&h, ZERO).unwrap(), &identity(4), 1e-12));
        // non-Hermitian argument takes the Padé path
        assert!(close(&matrix_exponential(&u, ZERO).unwrap(), &identity(4), 1e-12));
    }

    #[test]
    fn exp_of_sigma_x_matches_closed_form() {
        let theta = PI / 3.0;
        let x = sigma(PauliAxis::X);
        let u = matrix_exponential(&x, C64::new(0.0, -theta)).unwrap();
        let expect = identity(2) * C64::new(theta.cos(), 0.0) - &x * C64::new(0.0, theta.sin());
        assert!(close(&u, &expect, 1e-14));
    }

    #[test]
    fn pade_fallback_agrees_with_spectral_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u = random_unitary(4, &mut rng);
        let h = (&u + u.adjoint()) * C64::new(0.5, 0.0);
        let spectral = matrix_exponential(&h, C64::new(0.0, -0.7)).unwrap();
        let pade = (&h * C64::new(0.0, -0.7)).exp();
        assert!(close(&spectral, &pade, 1e-12));
    }

    #[test]
    fn exp_rejects_non_finite() {
        let mut h = identity(2);
        h[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(
            matrix_exponential(&h, ONE),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn partial_trace_of_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = random_unitary(2, &mut rng);
        let b = random_unitary(2, &mut rng);
        let ab = kron(&a, &b);
        let kept = partial_trace(&ab, 2, &[0]).unwrap();
        assert!(close(&kept, &(&a * trace(&b)), 1e-13));
        let kept = partial_trace(&ab, 2, &[1]).unwrap();
        assert!(close(&kept, &(&b * trace(&a)), 1e-13));
    }

    #[test]
    fn bell_state_marginals_are_maximally_mixed() {
        let bell = choi_state(&identity(2)).unwrap();
        let rho = bell.projector();
        let half = identity(2) * C64::new(0.5, 0.0);
        assert!(close(&partial_trace(&rho, 2, &[0]).unwrap(), &half, 1e-15));
        assert!(close(&partial_trace(&rho, 2, &[1]).unwrap(), &half, 1e-15));
        assert!(close(&bell.reduced_density(2, &[1]).unwrap(), &half, 1e-15));
    }

    #[test]
    fn tracing_nothing_is_identity_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_unitary(8, &mut rng);
        assert!(close(&partial_trace(&a, 3, &[0, 1, 2]).unwrap(), &a, 0.0));
    }

    #[test]
    fn partial_trace_respects_keep_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_unitary(2, &mut rng);
        let b = random_unitary(2, &mut rng);
        let c = random_unitary(2, &mut rng);
        let abc = kron(&kron(&a, &b), &c);
        let kept = partial_trace(&abc, 3, &[2, 0]).unwrap();
        assert!(close(&kept, &(kron(&c, &a) * trace(&b)), 1e-13));
    }

    #[test]
    fn partial_trace_rejects_bad_keep() {
        let a = identity(4);
        assert!(partial_trace(&a, 2, &[2]).is_err());
        assert!(partial_trace(&a, 2, &[0, 0]).is_err());
        assert!(partial_trace(&a, 3, &[0]).is_err());
    }

    #[test]
    fn choi_of_identity_is_bell() {
        let s = choi_state(&identity(2)).unwrap();
        let r = 1.0 / 2f64.sqrt();
        let expect = [r, 0.0, 0.0, r];
        for (z, e) in s.amplitudes().iter().zip(expect) {
            assert_abs_diff_eq!(z.re, e, epsilon = 1e-15);
            assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn choi_rejects_non_unitary() {
        let m = identity(2) * C64::new(2.0, 0.0);
        assert!(matches!(choi_state(&m), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn choi_overlap_matches_trace_formula() {
        // brute-force inner product against |Tr(U†V)/d|^2
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = random_unitary(4, &mut rng);
        let v = random_unitary(4, &mut rng);
        let cu = choi_state(&u).unwrap();
        let cv = choi_state(&v).unwrap();
        assert_abs_diff_eq!(cu.amplitudes().norm(), 1.0, epsilon = 1e-12);
        let lhs = cu.inner(&cv).norm_sqr();
        let rhs = (hs_inner(&u, &v) / 4.0).norm_sqr();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
    }

    #[test]
    fn random_hamiltonian_has_requested_norm() {
        for seed in 0..5 {
            let h = random_hamiltonian(3, 0.1, seed).unwrap();
            assert!(is_hermitian(&h));
            assert_abs_diff_eq!(spectral_norm(&h), 0.1, epsilon = 1e-12);
        }
        let a = random_hamiltonian(2, 0.3, 17).unwrap();
        let b = random_hamiltonian(2, 0.3, 17).unwrap();
        assert_eq!(a, b);
        assert!(random_hamiltonian(2, 0.0, 1).is_err());
    }

    #[test]
    fn spectral_norm_of_general_matrix() {
        let m = Operator::from_row_slice(2, 2, &[ONE, C64::new(2.0, 0.0), ZERO, ONE]);
        // singular values of [[1,2],[0,1]] are 1 ± sqrt(2)
        assert_abs_diff_eq!(spectral_norm(&m), 1.0 + 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn partition_validation() {
        assert!(SubsystemPartition::new(3, vec![vec![0, 1], vec![2]]).is_ok());
        assert!(SubsystemPartition::new(3, vec![vec![0, 1]]).is_err());
        assert!(SubsystemPartition::new(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(SubsystemPartition::new(3, vec![vec![0, 1, 2], vec![]]).is_err());
        assert!(SubsystemPartition::new(2, vec![vec![0, 2]]).is_err());
        let p = SubsystemPartition::new(4, vec![vec![2, 0], vec![1], vec![3]]).unwrap();
        assert_eq!(p.dims(), vec![4, 2, 2]);
        assert_eq!(p.complement(0), vec![1, 3]);
    }

    #[test]
    fn embedding_matches_kron_for_natural_order() {
        let p = SubsystemPartition::new(3, vec![vec![0, 1], vec![2]]).unwrap();
        let full = embed_factors(&p, &[cnot(), identity(2)]);
        assert!(close(&full, &kron(&cnot(), &identity(2)), 0.0));
        // swapped control/target qubits within the group
        let p = SubsystemPartition::new(2, vec![vec![1, 0]]).unwrap();
        let full = embed_factors(&p, &[cnot()]);
        let swap = embed_factors(
            &SubsystemPartition::new(2, vec![vec![0], vec![1]]).unwrap(),
            &[identity(2), identity(2)],
        );
        assert!(is_unitary(&full));
        assert!(close(&swap, &identity(4), 0.0));
        // control on qubit 1: |01> -> |11>
        assert_eq!(full[(3, 1)], ONE);
        assert_eq!(full[(1, 3)], ONE);
        assert_eq!(full[(2, 2)], ONE);
    }
}
