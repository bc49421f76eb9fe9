//! Solution-quality metrics for multi-time-scale models.
//!
//! `MM` is the optimum of the full model. The top-down alternative solves an
//! aggregated high-level model first, fixes its first-stage decisions in the
//! full model, and pays `MPSS`; the difference `VMM = MPSS - MM` measures
//! what integrating the time scales is worth. `VSS = EEV - MM` is the
//! stochastic-programming analogue: the expected-value model collapses all
//! subperiods into one nominal scenario with weight-averaged data, and `EEV`
//! is what its first-stage decision costs in the full model.
//!
//! Infeasible fixed-decision models score the sentinel `1e10` rather than
//! erroring, with the sentinel flagged in the report.

use crate::lp::{self, LinearProgram, LpError, LpStatus};
use crate::model::{
    aggregate_capacity_highlevel, build_fixed_x, build_fullspace, lower_capacity,
    CapacityInstance, ModelError, MultiScaleInstance, SubperiodRow,
};
use serde::Serialize;
use thiserror::Error;

/// Objective charged to a fixed first-stage decision whose completion is
/// infeasible.
pub const INFEASIBLE_SENTINEL: f64 = 1e10;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("instance is infeasible")]
    InfeasibleInstance,
    #[error("instance is unbounded")]
    UnboundedInstance,
    #[error("subperiods are not conformable for averaging: {0}")]
    NonConformableSubperiods(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SentinelFlags {
    pub mpss: bool,
    pub eev: bool,
}

/// Metrics report; quantities not computed by the chosen pipeline stay
/// `None`. `vmm = mpss - mm` and `vss = eev - mm` hold exactly (same `mm`,
/// plain f64 subtraction, no re-solves between them).
#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    pub mm: f64,
    pub mpss: Option<f64>,
    pub vmm: Option<f64>,
    pub ev: Option<f64>,
    pub eev: Option<f64>,
    pub vss: Option<f64>,
    pub sentinel_used: SentinelFlags,
    #[serde(skip)]
    pub x_sm: Option<Vec<f64>>,
    #[serde(skip)]
    pub x_ev: Option<Vec<f64>>,
}

impl MetricsReport {
    fn new(mm: f64) -> Self {
        MetricsReport {
            mm,
            mpss: None,
            vmm: None,
            ev: None,
            eev: None,
            vss: None,
            sentinel_used: SentinelFlags::default(),
            x_sm: None,
            x_ev: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Optimal objective of the full model.
pub fn compute_mm(inst: &MultiScaleInstance) -> Result<f64, MetricsError> {
    let sol = lp::solve(&build_fullspace(inst)?)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.objective()),
        LpStatus::Infeasible => Err(MetricsError::InfeasibleInstance),
        LpStatus::Unbounded => Err(MetricsError::UnboundedInstance),
    }
}

/// Full-model objective with the first-stage decisions pinned to `x_star`;
/// [`INFEASIBLE_SENTINEL`] when no completion exists.
pub fn compute_mpss(inst: &MultiScaleInstance, x_star: &[f64]) -> Result<f64, MetricsError> {
    let sol = lp::solve(&build_fixed_x(inst, x_star, true)?)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.objective()),
        LpStatus::Infeasible => Ok(INFEASIBLE_SENTINEL),
        LpStatus::Unbounded => Err(MetricsError::UnboundedInstance),
    }
}

/// VMM pipeline for an arbitrary high-level model: `highlevel` must expose
/// the instance's first-stage variables as its leading columns. Its optimal
/// leading segment is fixed in the full model to price the top-down
/// approach.
pub fn compute_vmm_from_highlevel(
    inst: &MultiScaleInstance,
    highlevel: &LinearProgram,
) -> Result<MetricsReport, MetricsError> {
    let n_x = inst.num_x();
    assert!(
        highlevel.num_vars() >= n_x,
        "high-level model must contain the first-stage variables"
    );
    let mm = compute_mm(inst)?;
    let mut report = MetricsReport::new(mm);
    let sm = lp::solve(highlevel)?;
    let mpss = match sm.status {
        LpStatus::Optimal => {
            let x_sm = sm.primal()[..n_x].to_vec();
            let mpss = compute_mpss(inst, &x_sm)?;
            report.x_sm = Some(x_sm);
            mpss
        }
        // No high-level decision at all: the top-down approach fails outright.
        _ => INFEASIBLE_SENTINEL,
    };
    report.sentinel_used.mpss = mpss == INFEASIBLE_SENTINEL;
    report.mpss = Some(mpss);
    report.vmm = Some(mpss - mm);
    Ok(report)
}

/// VMM for a capacity instance, using the aggregated high-level model with
/// unit parameters as the top-down surrogate.
pub fn compute_vmm(cap: &CapacityInstance) -> Result<MetricsReport, MetricsError> {
    let inst = lower_capacity(cap)?;
    let highlevel = aggregate_capacity_highlevel(cap, &vec![1.0; cap.generators], 0.0)?;
    compute_vmm_from_highlevel(&inst, &highlevel)
}

fn dense(coeffs: &[(usize, f64)], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for &(j, a) in coeffs {
        out[j] += a;
    }
    out
}

/// Checks that every subperiod has the same block shape, so weight-averaging
/// the data is well formed.
fn check_conformable(inst: &MultiScaleInstance) -> Result<(), MetricsError> {
    let first = &inst.subperiods[0];
    for (s, sp) in inst.subperiods.iter().enumerate().skip(1) {
        if sp.num_y() != first.num_y() {
            return Err(MetricsError::NonConformableSubperiods(format!(
                "subperiod {s} has {} y variables, subperiod 0 has {}",
                sp.num_y(),
                first.num_y()
            )));
        }
        if sp.rows.len() != first.rows.len() {
            return Err(MetricsError::NonConformableSubperiods(format!(
                "subperiod {s} has {} rows, subperiod 0 has {}",
                sp.rows.len(),
                first.rows.len()
            )));
        }
        for (r, (a, b)) in first.rows.iter().zip(&sp.rows).enumerate() {
            if a.sense != b.sense {
                return Err(MetricsError::NonConformableSubperiods(format!(
                    "row {r} sense differs between subperiod 0 and {s}"
                )));
            }
        }
        if sp.y_bounds != first.y_bounds {
            return Err(MetricsError::NonConformableSubperiods(format!(
                "subperiod {s} y bounds differ from subperiod 0"
            )));
        }
    }
    Ok(())
}

/// Builds the expected-value model: one nominal scenario whose costs, rows
/// and right-hand sides are the normalized weighted averages over
/// subperiods.
pub fn build_ev_model(inst: &MultiScaleInstance) -> Result<LinearProgram, MetricsError> {
    inst.validate()?;
    check_conformable(inst)?;
    let n_x = inst.num_x();
    let n_y = inst.subperiods[0].num_y();
    let n_rows = inst.subperiods[0].rows.len();
    let total_weight: f64 = inst.subperiods.iter().map(|sp| sp.weight).sum();

    let mut q_bar = vec![0.0; n_y];
    let mut t_bar = vec![vec![0.0; n_x]; n_rows];
    let mut w_bar = vec![vec![0.0; n_y]; n_rows];
    let mut h_bar = vec![0.0; n_rows];
    for sp in &inst.subperiods {
        let w = sp.weight / total_weight;
        for (k, q) in sp.costs.iter().enumerate() {
            q_bar[k] += w * q;
        }
        for (r, row) in sp.rows.iter().enumerate() {
            let tx = dense(&row.x_coeffs, n_x);
            let wy = dense(&row.y_coeffs, n_y);
            for j in 0..n_x {
                t_bar[r][j] += w * tx[j];
            }
            for k in 0..n_y {
                w_bar[r][k] += w * wy[k];
            }
            h_bar[r] += w * row.rhs;
        }
    }

    let mut costs = inst.first_stage_costs.clone();
    costs.extend(&q_bar);
    let mut lp = LinearProgram::new(costs);
    for (j, b) in inst.x_bounds.iter().enumerate() {
        lp.set_bounds(j, *b);
    }
    for (k, b) in inst.subperiods[0].y_bounds.iter().enumerate() {
        lp.set_bounds(n_x + k, *b);
    }
    for row in &inst.first_stage_rows {
        lp.add_row(row.coeffs.clone(), row.sense, row.rhs);
    }
    for r in 0..n_rows {
        let mut coeffs: Vec<(usize, f64)> = (0..n_x)
            .filter(|&j| t_bar[r][j] != 0.0)
            .map(|j| (j, t_bar[r][j]))
            .collect();
        coeffs.extend(
            (0..n_y)
                .filter(|&k| w_bar[r][k] != 0.0)
                .map(|k| (n_x + k, w_bar[r][k])),
        );
        lp.add_row(coeffs, inst.subperiods[0].rows[r].sense, h_bar[r]);
    }
    Ok(lp)
}

/// VSS pipeline: solve the expected-value model for `x_EV`, price it in the
/// full model with only the subperiod rows active, and report
/// `vss = eev - mm`.
pub fn compute_ev_eev_vss(inst: &MultiScaleInstance) -> Result<MetricsReport, MetricsError> {
    let mm = compute_mm(inst)?;
    let mut report = MetricsReport::new(mm);
    let ev_lp = build_ev_model(inst)?;
    let ev_sol = lp::solve(&ev_lp)?;
    let x_ev = match ev_sol.status {
        LpStatus::Optimal => ev_sol.primal()[..inst.num_x()].to_vec(),
        LpStatus::Infeasible => return Err(MetricsError::InfeasibleInstance),
        LpStatus::Unbounded => return Err(MetricsError::UnboundedInstance),
    };
    report.ev = Some(ev_sol.objective());

    let eev_sol = lp::solve(&build_fixed_x(inst, &x_ev, false)?)?;
    let eev = match eev_sol.status {
        LpStatus::Optimal => eev_sol.objective(),
        LpStatus::Infeasible => INFEASIBLE_SENTINEL,
        LpStatus::Unbounded => return Err(MetricsError::UnboundedInstance),
    };
    report.sentinel_used.eev = eev == INFEASIBLE_SENTINEL;
    report.x_ev = Some(x_ev);
    report.eev = Some(eev);
    report.vss = Some(eev - mm);
    Ok(report)
}

/// Full report for a capacity instance: VMM and VSS from one shared `MM`.
pub fn compute_capacity_report(cap: &CapacityInstance) -> Result<MetricsReport, MetricsError> {
    let inst = lower_capacity(cap)?;
    let mut report = compute_vmm(cap)?;
    let vss_part = compute_ev_eev_vss(&inst)?;
    report.ev = vss_part.ev;
    report.eev = vss_part.eev;
    // Both differences use the mm this report already carries; the two
    // pipelines solve the identical full-space LP deterministically.
    report.vss = vss_part.eev.map(|eev| eev - report.mm);
    report.x_ev = vss_part.x_ev;
    report.sentinel_used.eev = vss_part.sentinel_used.eev;
    Ok(report)
}
