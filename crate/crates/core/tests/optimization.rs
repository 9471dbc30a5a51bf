use insitu_core::exec::Workers;
use insitu_core::fidelity::{choi_fidelity, local_estimator, MeasurementModel};
use insitu_core::harness::{estimate_psucc, Placement, TrialConfig};
use insitu_core::linalg::{matmul, matrix_exponential, random_hamiltonian};
use insitu_core::optimizer::{optimize, GradientMode};
use insitu_core::propagation::random_initial_pulse;
use insitu_core::{CouplingKind, OptimizerConfig, PulseGrid, SpinSystem, TargetGate, Topology, C64};

fn pair_config(optimizer: OptimizerConfig) -> TrialConfig {
    TrialConfig {
        system: SpinSystem::new(2, Topology::Chain, CouplingKind::Ising).unwrap(),
        placement: Placement::Explicit { control: 0, target: 1 },
        t_gate: std::f64::consts::PI,
        n_ts: 12,
        optimizer,
    }
}

#[test]
fn two_qubit_cnot_succeeds_for_most_seeds() {
    let cfg = pair_config(OptimizerConfig::default());
    let est = estimate_psucc(&cfg, 50, 2024, Workers::available()).unwrap();
    assert!(est.successes >= 45, "{est:?}");
}

#[test]
fn two_qubit_cnot_with_finite_differences_and_quantized_measurement() {
    let cfg = pair_config(OptimizerConfig {
        f_targ: 0.99,
        gradient_mode: GradientMode::FiniteDifference,
        measurement: MeasurementModel::Quantized { a_num: 1e-6 },
        ..OptimizerConfig::default()
    });
    let sys = cfg.system.control_system();
    let target = TargetGate::cnot(2, 0, 1).unwrap();
    let init = random_initial_pulse(sys.n_controls(), 12, cfg.t_gate, 8).unwrap();
    let out = optimize(&sys, &target, &init, &cfg.optimizer).unwrap();
    assert!(out.success, "{:?} after {}", out.termination, out.n_upds);
    assert_eq!(out.n_fids, 1 + 12 * sys.n_controls());
    // measured values sit on the quantization grid
    for r in &out.trace {
        let k = r.f_le_measured / 1e-6;
        assert!((k - k.round()).abs() < 1e-6, "{}", r.f_le_measured);
    }
}

#[test]
fn infidelity_gap_closes_near_target() {
    let target = TargetGate::cnot(4, 1, 2).unwrap();
    let u = target.full_unitary();
    let mut last = None;
    for eps in [0.2, 0.1, 0.05] {
        let h = random_hamiltonian(4, 1.0, 99).unwrap();
        let v = matmul(&matrix_exponential(&h, C64::new(0.0, -eps)).unwrap(), u);
        let inf_f = 1.0 - choi_fidelity(&v, u).unwrap();
        let inf_le = 1.0 - local_estimator(&v, &target).unwrap();
        assert!(inf_le >= inf_f - 1e-12);
        assert!(inf_le / inf_f < 10.0, "ratio {}", inf_le / inf_f);
        if let Some((pf, ple)) = last {
            assert!(inf_f < pf && inf_le < ple);
        }
        last = Some((inf_f, inf_le));
    }
}

#[test]
fn already_at_target_needs_no_update() {
    // a free Ising pair at T = π gives -1; any phase is fine for CNOT-free targets
    let sys = SpinSystem::new(2, Topology::Chain, CouplingKind::Ising).unwrap().control_system();
    let partition = insitu_core::SubsystemPartition::new(2, vec![vec![0], vec![1]]).unwrap();
    let z = insitu_core::linalg::pauli(insitu_core::linalg::PauliAxis::Z, 0, 1).unwrap();
    let target = TargetGate::new(partition, vec![z.clone(), z]).unwrap();
    let pulse = PulseGrid::zeros(sys.n_controls(), 4, std::f64::consts::FRAC_PI_2).unwrap();
    let out = optimize(&sys, &target, &pulse, &OptimizerConfig::default()).unwrap();
    assert!(out.success);
    assert_eq!(out.n_upds, 0);
    assert_eq!(out.trace.len(), 1);
}
