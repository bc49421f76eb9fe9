//! Dantzig-Wolfe column generation.
//!
//! The variable-split reformulation keeps one copy of the first-stage
//! variables per subperiod block and represents each block's feasible set by
//! convex combinations of its extreme points plus conic combinations of its
//! extreme rays. The restricted master holds the columns generated so far,
//! nonanticipativity rows tying every block copy to block 1, and one
//! convexity row per block; big-M artificial variables stand in for missing
//! columns. Pricing solves one LP per block under the master's duals and
//! returns a column whenever its reduced cost is negative. The master value
//! is a nonincreasing upper bound; the summed pricing values give lower
//! bounds, so the two sequences approach each other from opposite sides.

use crate::lp::{self, Bounds, LinearProgram, LpError, LpStatus, RowSense};
use crate::model::{
    build_fixed_x, AlgorithmResult, ConvergenceLog, ModelError, MultiScaleInstance, RunStatus,
};
use rayon::prelude::*;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    ExtremePoint,
    ExtremeRay,
}

/// A generated column: the first-stage part of a block's extreme point or
/// ray, and its objective contribution `c^T x / S + q_s^T y` evaluated there.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub subperiod: usize,
    pub kind: ColumnKind,
    pub x_part: Vec<f64>,
    pub cost_part: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct DwOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub artificial_cost: f64,
    /// Upper bound added to `x` inside pricing blocks when the instance
    /// leaves `x` unbounded above; keeps pricing bounded.
    pub x_upper: f64,
}

impl Default for DwOptions {
    fn default() -> Self {
        DwOptions {
            tol: 1e-6,
            max_iter: 100,
            artificial_cost: 1e7,
            x_upper: 1e6,
        }
    }
}

#[derive(Debug, Error)]
pub enum DwError {
    #[error("artificial variables remain in the final master; raise artificial_cost or x_upper")]
    ArtificialsNonzero,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Index bookkeeping for the restricted master built by [`build_rmp`]:
/// column weights first, then `+/-` artificial pairs per nonanticipativity
/// row, then one artificial per convexity row. Rows are the
/// nonanticipativity rows in `(s, k)` order followed by the convexity rows.
#[derive(Debug, Clone)]
pub struct RmpLayout {
    pub n_cols: usize,
    pub art_offset: usize,
    pub n_nac_rows: usize,
    pub n_conv_rows: usize,
}

impl RmpLayout {
    pub fn nac_row(&self, s: usize, k: usize, n_x: usize) -> usize {
        (s - 1) * n_x + k
    }

    pub fn conv_row(&self, s: usize) -> usize {
        self.n_nac_rows + s
    }
}

/// Builds the restricted master over the given columns.
pub fn build_rmp(
    inst: &MultiScaleInstance,
    columns: &[Column],
    artificial_cost: f64,
) -> Result<(LinearProgram, RmpLayout), ModelError> {
    inst.validate()?;
    let n_x = inst.num_x();
    let n_s = inst.num_subperiods();
    let n_nac_rows = (n_s - 1) * n_x;
    let n_conv_rows = n_s;
    let n_cols = columns.len();
    let n_art = 2 * n_nac_rows + n_conv_rows;

    let mut costs: Vec<f64> = columns.iter().map(|c| c.cost_part).collect();
    costs.extend(std::iter::repeat(artificial_cost).take(n_art));
    let mut rmp = LinearProgram::new(costs);
    let layout = RmpLayout {
        n_cols,
        art_offset: n_cols,
        n_nac_rows,
        n_conv_rows,
    };

    // Nonanticipativity: block-1 mass minus block-s mass, coordinate-wise.
    for s in 1..n_s {
        for k in 0..n_x {
            let mut coeffs: Vec<(usize, f64)> = Vec::new();
            for (c, col) in columns.iter().enumerate() {
                let sign = if col.subperiod == 0 {
                    1.0
                } else if col.subperiod == s {
                    -1.0
                } else {
                    continue;
                };
                let v = sign * col.x_part[k];
                if v != 0.0 {
                    coeffs.push((c, v));
                }
            }
            let row_idx = layout.nac_row(s, k, n_x);
            coeffs.push((layout.art_offset + 2 * row_idx, 1.0));
            coeffs.push((layout.art_offset + 2 * row_idx + 1, -1.0));
            rmp.add_row(coeffs, RowSense::Eq, 0.0);
        }
    }
    for s in 0..n_s {
        let mut coeffs: Vec<(usize, f64)> = columns
            .iter()
            .enumerate()
            .filter(|(_, col)| col.subperiod == s && col.kind == ColumnKind::ExtremePoint)
            .map(|(c, _)| (c, 1.0))
            .collect();
        coeffs.push((layout.art_offset + 2 * n_nac_rows + s, 1.0));
        rmp.add_row(coeffs, RowSense::Eq, 1.0);
    }
    Ok((rmp, layout))
}

/// What pricing one block under the current duals produced.
#[derive(Debug, Clone)]
pub enum PricingOutcome {
    /// A column with negative reduced cost, plus the pricing value.
    Improving { column: Column, value: f64 },
    /// Reduced costs of this block are nonnegative at the current duals.
    NoImprovingColumn { value: f64 },
    /// The block is unbounded under the duals: an extreme-ray column.
    Ray { column: Column },
    /// The block is infeasible; the whole instance is.
    BlockInfeasible,
}

/// Prices block `s` under nonanticipativity duals `nu` and convexity dual
/// `r_dual`: minimizes the block cost plus its dual adjustment and compares
/// against `r_dual - tol`.
pub fn price(
    inst: &MultiScaleInstance,
    s: usize,
    nu: &[Vec<f64>],
    r_dual: f64,
    x_upper: f64,
    tol: f64,
) -> Result<PricingOutcome, DwError> {
    let n_x = inst.num_x();
    let n_s = inst.num_subperiods() as f64;
    let sp = &inst.subperiods[s];
    let mut x_costs: Vec<f64> = inst.first_stage_costs.iter().map(|c| c / n_s).collect();
    if s == 0 {
        for nu_s in nu {
            for (k, v) in nu_s.iter().enumerate() {
                x_costs[k] -= v;
            }
        }
    } else {
        for (k, v) in nu[s - 1].iter().enumerate() {
            x_costs[k] += v;
        }
    }
    x_costs.extend(sp.effective_costs());
    let mut block = LinearProgram::new(x_costs);
    for (j, b) in inst.x_bounds.iter().enumerate() {
        let upper = if b.upper.is_finite() { b.upper } else { x_upper };
        block.set_bounds(j, Bounds::range(b.lower, upper));
    }
    for (k, b) in sp.y_bounds.iter().enumerate() {
        block.set_bounds(n_x + k, *b);
    }
    for row in &inst.first_stage_rows {
        block.add_row(row.coeffs.clone(), row.sense, row.rhs);
    }
    for row in &sp.rows {
        let mut coeffs = row.x_coeffs.clone();
        coeffs.extend(row.y_coeffs.iter().map(|&(k, a)| (n_x + k, a)));
        block.add_row(coeffs, row.sense, row.rhs);
    }
    let sol = lp::solve(&block)?;
    match sol.status {
        LpStatus::Optimal => {
            let primal = sol.primal();
            let value = sol.objective();
            let cost_part = base_cost(inst, s, &primal[..n_x], &primal[n_x..]);
            if value < r_dual - tol {
                Ok(PricingOutcome::Improving {
                    column: Column {
                        subperiod: s,
                        kind: ColumnKind::ExtremePoint,
                        x_part: primal[..n_x].to_vec(),
                        cost_part,
                    },
                    value,
                })
            } else {
                Ok(PricingOutcome::NoImprovingColumn { value })
            }
        }
        LpStatus::Unbounded => {
            let ray = sol.primal_ray.as_deref().expect("unbounded without ray");
            let cost_part = base_cost(inst, s, &ray[..n_x], &ray[n_x..]);
            Ok(PricingOutcome::Ray {
                column: Column {
                    subperiod: s,
                    kind: ColumnKind::ExtremeRay,
                    x_part: ray[..n_x].to_vec(),
                    cost_part,
                },
            })
        }
        LpStatus::Infeasible => Ok(PricingOutcome::BlockInfeasible),
    }
}

fn base_cost(inst: &MultiScaleInstance, s: usize, x: &[f64], y: &[f64]) -> f64 {
    let n_s = inst.num_subperiods() as f64;
    let c_share: f64 = inst
        .first_stage_costs
        .iter()
        .zip(x)
        .map(|(c, v)| c * v / n_s)
        .sum();
    let q_part: f64 = inst.subperiods[s]
        .effective_costs()
        .iter()
        .zip(y)
        .map(|(q, v)| q * v)
        .sum();
    c_share + q_part
}

/// Runs Dantzig-Wolfe column generation until no block prices out an
/// improving column.
pub fn run_dw(inst: &MultiScaleInstance, opts: &DwOptions) -> Result<AlgorithmResult, DwError> {
    inst.validate()?;
    let start = Instant::now();
    let n_s = inst.num_subperiods();
    let mut columns: Vec<Column> = Vec::new();
    let mut log = ConvergenceLog::default();
    let mut best_lb = f64::NEG_INFINITY;
    let mut ub = f64::INFINITY;
    let mut status = RunStatus::IterationLimit;
    let mut final_weights: Vec<f64> = Vec::new();

    for iter in 1..=opts.max_iter {
        let (rmp, layout) = build_rmp(inst, &columns, opts.artificial_cost)?;
        let rsol = lp::solve(&rmp)?;
        match rsol.status {
            LpStatus::Unbounded => {
                // A negative-cost ray column escaped: the original model is
                // unbounded below.
                status = RunStatus::Unbounded;
                break;
            }
            LpStatus::Infeasible => {
                status = RunStatus::Infeasible;
                break;
            }
            LpStatus::Optimal => {}
        }
        let primal = rsol.primal();
        let artificial_mass: f64 = primal[layout.art_offset..].iter().sum();
        if artificial_mass <= opts.tol {
            ub = ub.min(rsol.objective());
        }
        final_weights = primal[..layout.n_cols].to_vec();

        let duals = rsol.duals();
        let n_x = inst.num_x();
        let nu: Vec<Vec<f64>> = (1..n_s)
            .map(|s| (0..n_x).map(|k| duals[layout.nac_row(s, k, n_x)]).collect())
            .collect();
        let r: Vec<f64> = (0..n_s).map(|s| duals[layout.conv_row(s)]).collect();

        // Per-block reduced-cost threshold so the summed pricing bound lands
        // within tol * (1 + |UB|) of the master at termination.
        let scale = if ub.is_finite() { 1.0 + ub.abs() } else { 1.0 };
        let tol_price = opts.tol * scale / n_s as f64;

        let outcomes: Vec<Result<PricingOutcome, DwError>> = (0..n_s)
            .into_par_iter()
            .map(|s| price(inst, s, &nu, r[s], opts.x_upper, tol_price))
            .collect();

        let mut lb_iter = Some(0.0f64);
        let mut new_columns: Vec<Column> = Vec::new();
        let mut infeasible_block = false;
        for outcome in outcomes {
            match outcome? {
                PricingOutcome::Improving { column, value } => {
                    lb_iter = lb_iter.map(|acc| acc + value);
                    new_columns.push(column);
                }
                PricingOutcome::NoImprovingColumn { value } => {
                    lb_iter = lb_iter.map(|acc| acc + value);
                }
                PricingOutcome::Ray { column } => {
                    lb_iter = None;
                    new_columns.push(column);
                }
                PricingOutcome::BlockInfeasible => {
                    infeasible_block = true;
                }
            }
        }
        if infeasible_block {
            status = RunStatus::Infeasible;
            break;
        }
        if let Some(lb) = lb_iter {
            best_lb = best_lb.max(lb);
        }
        log.push(iter, best_lb, ub, start.elapsed().as_millis() as u64);

        // Deduplicate against existing columns; a repeated column cannot
        // improve the master and only signals dual degeneracy.
        let fresh: Vec<Column> = new_columns
            .into_iter()
            .filter(|c| !columns.iter().any(|have| have == c))
            .collect();
        if fresh.is_empty() {
            status = RunStatus::Converged;
            break;
        }
        columns.extend(fresh);
    }

    if status == RunStatus::Converged {
        let artificial_used = ub.is_infinite();
        if artificial_used {
            return Err(DwError::ArtificialsNonzero);
        }
    }
    if status == RunStatus::Infeasible || status == RunStatus::Unbounded {
        return Ok(AlgorithmResult {
            status,
            x: vec![0.0; inst.num_x()],
            y: Vec::new(),
            objective: if status == RunStatus::Unbounded {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            },
            lower_bound: best_lb,
            upper_bound: ub,
            log,
        });
    }

    // Recover x as the weighted combination of block-1 columns.
    let mut x = vec![0.0; inst.num_x()];
    for (w, col) in final_weights.iter().zip(&columns) {
        if col.subperiod == 0 && *w > 0.0 {
            for (j, v) in col.x_part.iter().enumerate() {
                x[j] += w * v;
            }
        }
    }
    // The low-level decisions at the recovered x.
    let y = match lp::solve(&build_fixed_x(inst, &x, true)?) {
        Ok(sol) if sol.status == LpStatus::Optimal => {
            let layout = crate::model::fullspace_layout(inst);
            let primal = sol.primal();
            inst.subperiods
                .iter()
                .enumerate()
                .map(|(s, sp)| {
                    primal[layout.y_offsets[s]..layout.y_offsets[s] + sp.num_y()].to_vec()
                })
                .collect()
        }
        _ => Vec::new(),
    };

    Ok(AlgorithmResult {
        status,
        x,
        y,
        objective: ub,
        lower_bound: best_lb,
        upper_bound: ub,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::solve;
    use crate::model::{build_fullspace, Subperiod, SubperiodRow};

    fn tiny2() -> MultiScaleInstance {
        MultiScaleInstance {
            name: "tiny-2".into(),
            description: String::new(),
            first_stage_costs: vec![1.0],
            first_stage_rows: Vec::new(),
            x_bounds: vec![Bounds::NONNEGATIVE],
            subperiods: vec![
                Subperiod {
                    weight: 1.0,
                    costs: vec![3.0],
                    rows: vec![SubperiodRow {
                        x_coeffs: vec![(0, 1.0)],
                        y_coeffs: vec![(0, 1.0)],
                        sense: RowSense::Ge,
                        rhs: 1.0,
                    }],
                    y_bounds: vec![Bounds::NONNEGATIVE],
                },
                Subperiod {
                    weight: 1.0,
                    costs: vec![0.5],
                    rows: vec![SubperiodRow {
                        x_coeffs: vec![(0, 1.0)],
                        y_coeffs: vec![(0, 1.0)],
                        sense: RowSense::Ge,
                        rhs: 2.0,
                    }],
                    y_bounds: vec![Bounds::NONNEGATIVE],
                },
            ],
        }
    }

    #[test]
    fn empty_rmp_is_all_artificial() {
        let inst = tiny2();
        let (rmp, layout) = build_rmp(&inst, &[], 1e7).unwrap();
        let sol = solve(&rmp).unwrap();
        // Only the two convexity artificials are forced to one.
        assert!((sol.objective() - 2.0 * 1e7).abs() < 1.0);
        assert_eq!(layout.n_cols, 0);
        assert_eq!(layout.n_nac_rows, 1);
    }

    #[test]
    fn identical_x_parts_zero_the_artificials() {
        let inst = tiny2();
        let columns = vec![
            Column {
                subperiod: 0,
                kind: ColumnKind::ExtremePoint,
                x_part: vec![2.0],
                cost_part: 1.0,
            },
            Column {
                subperiod: 1,
                kind: ColumnKind::ExtremePoint,
                x_part: vec![2.0],
                cost_part: 1.0,
            },
        ];
        let (rmp, layout) = build_rmp(&inst, &columns, 1e7).unwrap();
        let sol = solve(&rmp).unwrap();
        let art: f64 = sol.primal()[layout.art_offset..].iter().sum();
        assert!(art < 1e-9);
        assert!((sol.objective() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn pricing_block_one_at_zero_duals() {
        let inst = tiny2();
        match price(&inst, 0, &[vec![0.0]], f64::INFINITY, 1e6, 1e-9).unwrap() {
            PricingOutcome::Improving { column, value } => {
                assert!((value - 0.5).abs() < 1e-9);
                assert!((column.x_part[0] - 1.0).abs() < 1e-9);
                assert!((column.cost_part - 0.5).abs() < 1e-9);
            }
            other => panic!("expected improving column, got {other:?}"),
        }
    }

    #[test]
    fn pricing_detects_no_improvement() {
        let inst = tiny2();
        // r below any achievable pricing value: nothing can improve.
        match price(&inst, 0, &[vec![0.0]], -100.0, 1e6, 1e-9).unwrap() {
            PricingOutcome::NoImprovingColumn { value } => {
                assert!((value - 0.5).abs() < 1e-9)
            }
            other => panic!("expected no improving column, got {other:?}"),
        }
    }

    #[test]
    fn pricing_returns_ray_for_improving_free_direction() {
        // Block with a negative-cost y that no row blocks.
        let inst = MultiScaleInstance {
            name: "ray".into(),
            description: String::new(),
            first_stage_costs: vec![1.0],
            first_stage_rows: Vec::new(),
            x_bounds: vec![Bounds::NONNEGATIVE],
            subperiods: vec![Subperiod {
                weight: 1.0,
                costs: vec![-1.0],
                rows: vec![SubperiodRow {
                    x_coeffs: vec![(0, 1.0)],
                    y_coeffs: Vec::new(),
                    sense: RowSense::Le,
                    rhs: 5.0,
                }],
                y_bounds: vec![Bounds::NONNEGATIVE],
            }],
        };
        match price(&inst, 0, &[], f64::INFINITY, 1e6, 1e-9).unwrap() {
            PricingOutcome::Ray { column } => {
                assert_eq!(column.kind, ColumnKind::ExtremeRay);
                assert!(column.cost_part < 0.0);
            }
            other => panic!("expected ray, got {other:?}"),
        }
    }

    #[test]
    fn tiny2_converges_to_fullspace() {
        let result = run_dw(&tiny2(), &DwOptions::default()).unwrap();
        assert_eq!(result.status, RunStatus::Converged);
        assert!((result.objective - 1.5).abs() < 1e-6);
        assert!((result.x[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn single_block_converges_quickly() {
        let mut inst = tiny2();
        inst.subperiods.truncate(1);
        let result = run_dw(&inst, &DwOptions::default()).unwrap();
        assert_eq!(result.status, RunStatus::Converged);
        assert!(result.log.entries.len() <= 2);
        let full = solve(&build_fullspace(&inst).unwrap()).unwrap();
        assert!((result.objective - full.objective()).abs() < 1e-6);
    }

    #[test]
    fn master_sequence_nonincreasing_after_artificials_clear() {
        let result = run_dw(&tiny2(), &DwOptions::default()).unwrap();
        let ubs: Vec<f64> = result
            .log
            .entries
            .iter()
            .map(|e| e.upper_bound)
            .filter(|u| u.is_finite())
            .collect();
        for pair in ubs.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9);
        }
    }

    #[test]
    fn recovered_x_satisfies_first_stage_rows() {
        let mut inst = tiny2();
        inst.first_stage_rows
            .push(crate::lp::Row::new(vec![(0, 1.0)], RowSense::Le, 3.0));
        let result = run_dw(&inst, &DwOptions::default()).unwrap();
        assert_eq!(result.status, RunStatus::Converged);
        assert!(result.x[0] <= 3.0 + 1e-9);
    }
}
