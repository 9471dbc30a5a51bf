//! Drift and control Hamiltonians for interacting qubit registers.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{matmul, pauli, Operator, PauliAxis};
use crate::propagation::ControlSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Chain,
    Ring,
    Star,
    FullyConnected,
}

impl Topology {
    /// Undirected interaction edges for `n` qubits, `i < j` within each pair
    /// except the ring's closing edge `(n-1, 0)`.
    pub fn edges(self, n: usize) -> Vec<(usize, usize)> {
        let chain = || (0..n.saturating_sub(1)).map(|i| (i, i + 1));
        match self {
            Topology::Chain => chain().collect(),
            Topology::Ring => {
                let mut e: Vec<_> = chain().collect();
                // for n = 2 the closing edge duplicates (0, 1)
                if n > 2 {
                    e.push((n - 1, 0));
                }
                e
            }
            Topology::Star => (1..n).map(|i| (0, i)).collect(),
            Topology::FullyConnected => (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .collect(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Topology::Chain => "chain",
            Topology::Ring => "ring",
            Topology::Star => "star",
            Topology::FullyConnected => "fully_connected",
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chain" => Ok(Topology::Chain),
            "ring" => Ok(Topology::Ring),
            "star" => Ok(Topology::Star),
            "fully_connected" => Ok(Topology::FullyConnected),
            other => Err(Error::InvalidArgument(format!(
                "unknown topology `{other}` (expected chain, ring, star or fully_connected)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingKind {
    /// `σz ⊗ σz`
    Ising,
    /// `σx ⊗ σx + σy ⊗ σy + σz ⊗ σz`
    Heisenberg,
}

impl CouplingKind {
    fn axes(self) -> &'static [PauliAxis] {
        match self {
            CouplingKind::Ising => &[PauliAxis::Z],
            CouplingKind::Heisenberg => &[PauliAxis::X, PauliAxis::Y, PauliAxis::Z],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CouplingKind::Ising => "ising",
            CouplingKind::Heisenberg => "heisenberg",
        }
    }
}

impl fmt::Display for CouplingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CouplingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ising" => Ok(CouplingKind::Ising),
            "heisenberg" => Ok(CouplingKind::Heisenberg),
            other => Err(Error::InvalidArgument(format!(
                "unknown coupling `{other}` (expected ising or heisenberg)"
            ))),
        }
    }
}

/// A register of `n` qubits with pairwise couplings along a topology and
/// σx/σy drives on every qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinSystem {
    n: usize,
    topology: Topology,
    coupling: CouplingKind,
    strengths: Vec<f64>,
}

impl SpinSystem {
    /// Unit strength on every edge.
    pub fn new(n: usize, topology: Topology, coupling: CouplingKind) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "a spin system needs at least 2 qubits, got {n}"
            )));
        }
        let edges = topology.edges(n).len();
        Ok(SpinSystem {
            n,
            topology,
            coupling,
            strengths: vec![1.0; edges],
        })
    }

    pub fn with_strengths(mut self, strengths: Vec<f64>) -> Result<Self> {
        let edges = self.edges().len();
        if strengths.len() != edges {
            return Err(Error::DimensionMismatch(format!(
                "{} strengths for {edges} edges",
                strengths.len()
            )));
        }
        if let Some(s) = strengths.iter().find(|s| !s.is_finite() || **s == 0.0) {
            return Err(Error::InvalidArgument(format!(
                "edge strengths must be finite and nonzero, got {s}"
            )));
        }
        self.strengths = strengths;
        Ok(self)
    }

    /// Strengths drawn i.i.d. uniform on `[0.5, 1.5]`.
    pub fn randomize_strengths(&self, seed: u64) -> SpinSystem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let strengths = (0..self.strengths.len())
            .map(|_| rng.random_range(0.5..=1.5))
            .collect();
        SpinSystem {
            strengths,
            ..self.clone()
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn coupling(&self) -> CouplingKind {
        self.coupling
    }

    pub fn strengths(&self) -> &[f64] {
        &self.strengths
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.topology.edges(self.n)
    }

    /// `Σ_edges s_e · H^{i,j}`.
    pub fn build_drift(&self) -> Operator {
        let dim = 1usize << self.n;
        let mut h = Operator::zeros(dim, dim);
        for ((i, j), &s) in self.edges().into_iter().zip(&self.strengths) {
            for &axis in self.coupling.axes() {
                let term = matmul(&self.pauli(axis, i), &self.pauli(axis, j));
                h += term * crate::linalg::C64::new(s, 0.0);
            }
        }
        h
    }

    /// `[σx⁰, σy⁰, σx¹, σy¹, …]`, so `N_ctrl = 2n`.
    pub fn build_controls(&self) -> Vec<Operator> {
        (0..self.n)
            .flat_map(|q| [self.pauli(PauliAxis::X, q), self.pauli(PauliAxis::Y, q)])
            .collect()
    }

    pub fn n_controls(&self) -> usize {
        2 * self.n
    }

    pub fn control_system(&self) -> ControlSystem {
        ControlSystem::new(self.n, self.build_drift(), self.build_controls())
            .expect("spin-system Hamiltonians are consistent by construction")
    }

    fn pauli(&self, axis: PauliAxis, q: usize) -> Operator {
        pauli(axis, q, self.n).expect("qubit index within register")
    }
}
