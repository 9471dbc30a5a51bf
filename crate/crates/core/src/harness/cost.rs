//! Run-cost accounting.
//!
//! ```text
//! T_total = T_run · N_runs / p_succ
//! T_run   = T_init + T_gate + T_meas
//! N_runs  = N_meas · N_prec · N_fids · N_upds
//! ```
//!
//! `N_prec` is taken as `ceil(a_num⁻²)` (one run for exact measurement);
//! only the scaling is fixed by the statistics, so the unit constant is
//! reported alongside.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NMeasMode {
    /// full process characterization, `d²` settings
    Full,
    /// one group at a time, `Σ d_i²`
    SequentialLocal,
    /// all groups at once, `max d_i²`
    ParallelLocal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub t_init: f64,
    pub t_meas: f64,
    pub t_gate: f64,
    pub n_meas_mode: NMeasMode,
    pub a_num: f64,
    pub n_fids: u64,
    /// mean updates per successful run, so not necessarily an integer
    pub n_upds: f64,
    pub p_succ: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    pub n_qubits: usize,
    pub n_meas_mode: NMeasMode,
    pub n_meas: u64,
    pub n_prec: u64,
    pub n_prec_constant: f64,
    pub n_fids: u64,
    pub n_upds: f64,
    pub n_runs: f64,
    pub t_init: f64,
    pub t_gate: f64,
    pub t_meas: f64,
    pub t_run: f64,
    pub p_succ: f64,
    pub t_total: f64,
}

impl CostReport {
    /// `(symbol, value)` rows in a fixed order.
    pub fn rows(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("n_meas", self.n_meas as f64),
            ("n_prec", self.n_prec as f64),
            ("n_fids", self.n_fids as f64),
            ("n_upds", self.n_upds),
            ("n_runs", self.n_runs),
            ("t_init", self.t_init),
            ("t_gate", self.t_gate),
            ("t_meas", self.t_meas),
            ("t_run", self.t_run),
            ("p_succ", self.p_succ),
            ("t_total", self.t_total),
        ]
    }
}

/// `ceil(a⁻²)`, treating values within rounding of an integer as that
/// integer so that e.g. `a = 0.01` gives exactly 10⁴.
fn n_prec(a_num: f64) -> u64 {
    if a_num == 0.0 {
        return 1;
    }
    let x = 1.0 / (a_num * a_num);
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x {
        r as u64
    } else {
        x.ceil() as u64
    }
}

pub fn cost_report(cm: &CostModel, n: usize, subsystem_dims: &[usize]) -> Result<CostReport> {
    let bad = |msg: String| Err(Error::InvalidArgument(msg));
    if !(cm.p_succ > 0.0 && cm.p_succ <= 1.0) {
        return bad(format!("p_succ must lie in (0, 1], got {}", cm.p_succ));
    }
    if cm.n_fids < 1 || !(cm.n_upds >= 1.0 && cm.n_upds.is_finite()) {
        return bad(format!("n_fids and n_upds must be at least 1, got {} and {}", cm.n_fids, cm.n_upds));
    }
    if !(cm.a_num >= 0.0 && cm.a_num.is_finite()) {
        return bad(format!("a_num must be non-negative, got {}", cm.a_num));
    }
    for (name, t) in [("t_init", cm.t_init), ("t_meas", cm.t_meas), ("t_gate", cm.t_gate)] {
        if !(t >= 0.0 && t.is_finite()) {
            return bad(format!("{name} must be non-negative, got {t}"));
        }
    }
    if n == 0 || n > 31 {
        return bad(format!("qubit count {n} outside 1..=31"));
    }
    if subsystem_dims.is_empty()
        || subsystem_dims.iter().any(|&d| d < 2 || !d.is_power_of_two())
        || subsystem_dims.iter().map(|d| d.trailing_zeros() as usize).sum::<usize>() != n
    {
        return bad(format!("subsystem dimensions {subsystem_dims:?} do not factor {n} qubits"));
    }
    let sq = subsystem_dims.iter().map(|&d| (d * d) as u64);
    let n_meas = match cm.n_meas_mode {
        NMeasMode::Full => 1u64 << (2 * n),
        NMeasMode::SequentialLocal => sq.sum(),
        NMeasMode::ParallelLocal => sq.max().unwrap_or(1),
    };
    let n_prec = n_prec(cm.a_num);
    let n_runs = (n_meas as f64) * (n_prec as f64) * (cm.n_fids as f64) * cm.n_upds;
    let t_run = cm.t_init + cm.t_gate + cm.t_meas;
    Ok(CostReport {
        n_qubits: n,
        n_meas_mode: cm.n_meas_mode,
        n_meas,
        n_prec,
        n_prec_constant: 1.0,
        n_fids: cm.n_fids,
        n_upds: cm.n_upds,
        n_runs,
        t_init: cm.t_init,
        t_gate: cm.t_gate,
        t_meas: cm.t_meas,
        t_run,
        p_succ: cm.p_succ,
        t_total: t_run * n_runs / cm.p_succ,
    })
}
