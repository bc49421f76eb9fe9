//! Lagrangian decomposition by subperiod.
//!
//! The instance is rewritten with one copy `x_s` of the first-stage
//! variables per subperiod, tied together by nonanticipativity constraints
//! `x_1 = x_s`. Dualizing those constraints with multipliers `nu_s` makes the
//! blocks independent: block `s` minimizes `c^T x / S + q_s^T y` plus its
//! `nu` term over its own rows and a replica of the first-stage rows. The
//! summed block values lower-bound the optimum for any multipliers; the
//! multipliers are improved either by subgradient steps or by the
//! cutting-plane master over all recorded block solutions. Upper bounds come
//! from fixing candidate first-stage vectors in the full model.

use crate::lp::{self, Bounds, LinearProgram, LpError, LpStatus, RowSense};
use crate::model::{
    build_fixed_x, fullspace_layout, AlgorithmResult, ConvergenceLog, ModelError,
    MultiScaleInstance, RunStatus,
};
use rayon::prelude::*;
use std::time::Instant;
use thiserror::Error;

/// Nonanticipativity multipliers: one vector over `x` per non-first
/// subperiod, so the shape is `(S - 1) x dim(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Multipliers {
    pub nu: Vec<Vec<f64>>,
}

impl Multipliers {
    pub fn zeros(inst: &MultiScaleInstance) -> Self {
        Multipliers {
            nu: vec![vec![0.0; inst.num_x()]; inst.num_subperiods().saturating_sub(1)],
        }
    }

    pub fn max_abs_diff(&self, other: &Multipliers) -> f64 {
        self.nu
            .iter()
            .flatten()
            .zip(other.nu.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Solution of one block of the dualized problem.
#[derive(Debug, Clone)]
pub struct BlockSolution {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Block objective including its `nu` term.
    pub objective: f64,
    /// `c^T x / S + q_s^T y` without the `nu` term; the cutting-plane master
    /// needs this part.
    pub base_cost: f64,
}

/// Value and per-block solutions of one dual evaluation.
#[derive(Debug, Clone)]
pub struct DualEvaluation {
    pub value: f64,
    pub blocks: Vec<BlockSolution>,
}

#[derive(Debug, Error)]
pub enum LagrangianError {
    #[error("subproblem {subperiod} is unbounded; the instance violates the boundedness assumption")]
    SubproblemUnbounded { subperiod: usize },
    #[error("subproblem {subperiod} is infeasible even with x free; the instance is infeasible")]
    InfeasibleSubproblem { subperiod: usize },
    #[error("cutting-plane master infeasible; this indicates a bug")]
    MasterInfeasible,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn block_lp(inst: &MultiScaleInstance, s: usize, nu: &Multipliers) -> LinearProgram {
    let n_x = inst.num_x();
    let n_s = inst.num_subperiods() as f64;
    let sp = &inst.subperiods[s];
    let mut x_costs: Vec<f64> = inst.first_stage_costs.iter().map(|c| c / n_s).collect();
    if s == 0 {
        for nu_s in &nu.nu {
            for (k, v) in nu_s.iter().enumerate() {
                x_costs[k] += v;
            }
        }
    } else {
        for (k, v) in nu.nu[s - 1].iter().enumerate() {
            x_costs[k] -= v;
        }
    }
    x_costs.extend(sp.effective_costs());
    let mut lp = LinearProgram::new(x_costs);
    for (j, b) in inst.x_bounds.iter().enumerate() {
        lp.set_bounds(j, *b);
    }
    for (k, b) in sp.y_bounds.iter().enumerate() {
        lp.set_bounds(n_x + k, *b);
    }
    for row in &inst.first_stage_rows {
        lp.add_row(row.coeffs.clone(), row.sense, row.rhs);
    }
    for row in &sp.rows {
        let mut coeffs = row.x_coeffs.clone();
        coeffs.extend(row.y_coeffs.iter().map(|&(k, a)| (n_x + k, a)));
        lp.add_row(coeffs, row.sense, row.rhs);
    }
    lp
}

/// Evaluates the Lagrangian dual function at `nu`: solves every block and
/// sums the objectives. The value lower-bounds the full-space optimum for
/// any multipliers (weak duality).
pub fn evaluate_dual(
    inst: &MultiScaleInstance,
    nu: &Multipliers,
) -> Result<DualEvaluation, LagrangianError> {
    inst.validate()?;
    let n_s = inst.num_subperiods();
    if nu.nu.len() + 1 != n_s && !(n_s == 1 && nu.nu.is_empty()) {
        return Err(LagrangianError::Model(ModelError::DimensionMismatch(
            format!("{} multiplier vectors for {} subperiods", nu.nu.len(), n_s),
        )));
    }
    let n_x = inst.num_x();
    let n_sf = n_s as f64;
    let blocks: Vec<Result<BlockSolution, LagrangianError>> = (0..n_s)
        .into_par_iter()
        .map(|s| {
            let lp = block_lp(inst, s, nu);
            let sol = lp::solve(&lp)?;
            match sol.status {
                LpStatus::Optimal => {
                    let primal = sol.primal();
                    let x = primal[..n_x].to_vec();
                    let y = primal[n_x..].to_vec();
                    let c_share: f64 = inst
                        .first_stage_costs
                        .iter()
                        .zip(&x)
                        .map(|(c, v)| c * v / n_sf)
                        .sum();
                    let q_part: f64 = inst.subperiods[s]
                        .effective_costs()
                        .iter()
                        .zip(&y)
                        .map(|(q, v)| q * v)
                        .sum();
                    Ok(BlockSolution {
                        x,
                        y,
                        objective: sol.objective(),
                        base_cost: c_share + q_part,
                    })
                }
                LpStatus::Unbounded => {
                    Err(LagrangianError::SubproblemUnbounded { subperiod: s })
                }
                LpStatus::Infeasible => {
                    Err(LagrangianError::InfeasibleSubproblem { subperiod: s })
                }
            }
        })
        .collect();
    let mut value = 0.0;
    let mut out = Vec::with_capacity(n_s);
    for b in blocks {
        let b = b?;
        value += b.objective;
        out.push(b);
    }
    Ok(DualEvaluation { value, blocks: out })
}

/// State threaded through subgradient iterations.
#[derive(Debug, Clone)]
pub struct SubgradientState {
    pub nu: Multipliers,
    pub best_lb: f64,
    pub best_ub: f64,
    pub incumbent_x: Vec<f64>,
    pub k: usize,
    /// Dual value of the latest evaluation at `nu`; the step size uses it.
    pub last_dual_value: f64,
}

/// Result of one multiplier update.
#[derive(Debug, Clone)]
pub enum SubgradientStep {
    Updated(Multipliers),
    /// All copies agree; the nonanticipativity constraints hold and the
    /// current point is optimal for the dual. Terminate.
    ZeroSubgradient,
}

/// One subgradient update
/// `nu_s <- nu_s + lambda (x_1 - x_s)` with step size
/// `lambda = (v_star - v_k) / sum_s ||x_1 - x_s||^2`.
pub fn subgradient_step(
    state: &SubgradientState,
    per_subperiod_x: &[Vec<f64>],
    v_star: f64,
) -> SubgradientStep {
    let x1 = &per_subperiod_x[0];
    let mut denom = 0.0;
    for xs in &per_subperiod_x[1..] {
        denom += x1
            .iter()
            .zip(xs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    }
    if denom <= 1e-12 {
        return SubgradientStep::ZeroSubgradient;
    }
    let lambda = (v_star - state.last_dual_value) / denom;
    let mut nu = state.nu.clone();
    for (s, xs) in per_subperiod_x[1..].iter().enumerate() {
        for k in 0..x1.len() {
            nu.nu[s][k] += lambda * (x1[k] - xs[k]);
        }
    }
    SubgradientStep::Updated(nu)
}

/// Solution of the cutting-plane master: new multipliers, the master value
/// (an upper bound on the dual function restricted to the recorded cuts),
/// and per-block convex-combination weights over history entries.
#[derive(Debug, Clone)]
pub struct MasterSolution {
    pub nu: Multipliers,
    pub value: f64,
    pub weights: Vec<Vec<f64>>,
}

/// Solves the cutting-plane master over all recorded block solutions:
/// maximize `sum_s eta_s` subject to one cut per history entry and block,
/// with every multiplier boxed in `[-nu_box, nu_box]`.
pub fn cutting_plane_update(
    inst: &MultiScaleInstance,
    history: &[Vec<BlockSolution>],
    nu_box: f64,
) -> Result<MasterSolution, LagrangianError> {
    assert!(!history.is_empty(), "cutting-plane master needs history");
    let n_s = inst.num_subperiods();
    let n_x = inst.num_x();
    let n_nu = n_s.saturating_sub(1) * n_x;
    // Variables: eta_1..eta_S (free), then nu blocks; minimize -sum eta.
    let mut costs = vec![-1.0; n_s];
    costs.extend(std::iter::repeat(0.0).take(n_nu));
    let mut master = LinearProgram::new(costs);
    for s in 0..n_s {
        master.set_bounds(s, Bounds::FREE);
    }
    for v in 0..n_nu {
        master.set_bounds(n_s + v, Bounds::range(-nu_box, nu_box));
    }
    let nu_index = |s: usize, k: usize| n_s + (s - 1) * n_x + k;
    // Row layout: for each entry, the block-1 cut then blocks 2..S in order.
    for entry in history {
        let block1 = &entry[0];
        let mut coeffs: Vec<(usize, f64)> = vec![(0, 1.0)];
        for s in 1..n_s {
            for k in 0..n_x {
                if block1.x[k] != 0.0 {
                    coeffs.push((nu_index(s, k), -block1.x[k]));
                }
            }
        }
        master.add_row(coeffs, RowSense::Le, block1.base_cost);
        for s in 1..n_s {
            let block = &entry[s];
            let mut coeffs: Vec<(usize, f64)> = vec![(s, 1.0)];
            for k in 0..n_x {
                if block.x[k] != 0.0 {
                    coeffs.push((nu_index(s, k), block.x[k]));
                }
            }
            master.add_row(coeffs, RowSense::Le, block.base_cost);
        }
    }
    let sol = lp::solve(&master)?;
    if sol.status != LpStatus::Optimal {
        return Err(LagrangianError::MasterInfeasible);
    }
    let primal = sol.primal();
    let duals = sol.duals();
    let mut nu = Multipliers {
        nu: vec![vec![0.0; n_x]; n_s.saturating_sub(1)],
    };
    for s in 1..n_s {
        for k in 0..n_x {
            nu.nu[s - 1][k] = primal[nu_index(s, k)];
        }
    }
    // Row duals of each block's cuts are (negated) convex-combination
    // weights over that block's recorded solutions.
    let mut weights = vec![vec![0.0; history.len()]; n_s];
    for (e, _) in history.iter().enumerate() {
        for s in 0..n_s {
            weights[s][e] = -duals[e * n_s + s];
        }
    }
    Ok(MasterSolution {
        nu,
        value: -sol.objective(),
        weights,
    })
}

/// Best objective over fixing each candidate `x` in the full model.
#[derive(Debug, Clone)]
pub struct UbResult {
    pub value: f64,
    pub x: Vec<f64>,
    pub y: Vec<Vec<f64>>,
}

/// Fixes each candidate first-stage vector in the full model and returns the
/// best finite outcome; infeasible candidates contribute `+inf`.
pub fn ub_heuristic(
    inst: &MultiScaleInstance,
    candidates: &[Vec<f64>],
) -> Result<UbResult, LagrangianError> {
    assert!(!candidates.is_empty(), "ub_heuristic needs candidates");
    let layout = fullspace_layout(inst);
    let solved: Vec<Result<Option<(f64, Vec<f64>, Vec<Vec<f64>>)>, LagrangianError>> = candidates
        .par_iter()
        .map(|x_hat| {
            let lp = build_fixed_x(inst, x_hat, true)?;
            let sol = lp::solve(&lp)?;
            match sol.status {
                LpStatus::Optimal => {
                    let primal = sol.primal();
                    let ys: Vec<Vec<f64>> = inst
                        .subperiods
                        .iter()
                        .enumerate()
                        .map(|(s, sp)| {
                            primal[layout.y_offsets[s]..layout.y_offsets[s] + sp.num_y()].to_vec()
                        })
                        .collect();
                    Ok(Some((sol.objective(), x_hat.clone(), ys)))
                }
                _ => Ok(None),
            }
        })
        .collect();
    let mut best: Option<(f64, Vec<f64>, Vec<Vec<f64>>)> = None;
    for item in solved {
        if let Some((v, x, y)) = item? {
            if best.as_ref().map_or(true, |(bv, _, _)| v < *bv) {
                best = Some((v, x, y));
            }
        }
    }
    match best {
        Some((value, x, y)) => Ok(UbResult { value, x, y }),
        None => Ok(UbResult {
            value: f64::INFINITY,
            x: candidates[0].clone(),
            y: Vec::new(),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiplierMethod {
    Subgradient,
    CuttingPlane,
}

#[derive(Debug, Clone, Copy)]
pub struct LagrangianOptions {
    pub method: MultiplierMethod,
    pub tol: f64,
    pub max_iter: usize,
    pub nu_box: f64,
}

impl Default for LagrangianOptions {
    fn default() -> Self {
        LagrangianOptions {
            method: MultiplierMethod::CuttingPlane,
            tol: 1e-6,
            max_iter: 100,
            nu_box: 1e6,
        }
    }
}

/// Runs Lagrangian decomposition with the chosen multiplier update.
///
/// Terminates when `UB - LB <= tol * (1 + |UB|)`, when consecutive
/// multipliers repeat to within `1e-9` (cutting plane), on a zero
/// subgradient, or at `max_iter`.
pub fn run_lagrangian(
    inst: &MultiScaleInstance,
    opts: &LagrangianOptions,
) -> Result<AlgorithmResult, LagrangianError> {
    inst.validate()?;
    let start = Instant::now();
    let n_s = inst.num_subperiods();
    let mut nu = Multipliers::zeros(inst);
    let mut best_lb = f64::NEG_INFINITY;
    let mut best_ub = f64::INFINITY;
    let mut incumbent_x: Vec<f64> = vec![0.0; inst.num_x()];
    let mut incumbent_y: Vec<Vec<f64>> = Vec::new();
    let mut history: Vec<Vec<BlockSolution>> = Vec::new();
    let mut log = ConvergenceLog::default();
    let mut status = RunStatus::IterationLimit;

    for k in 1..=opts.max_iter {
        let eval = match evaluate_dual(inst, &nu) {
            Ok(eval) => eval,
            Err(LagrangianError::InfeasibleSubproblem { .. }) => {
                return Ok(AlgorithmResult {
                    status: RunStatus::Infeasible,
                    x: incumbent_x,
                    y: incumbent_y,
                    objective: f64::INFINITY,
                    lower_bound: best_lb,
                    upper_bound: best_ub,
                    log,
                });
            }
            Err(e) => return Err(e),
        };
        best_lb = best_lb.max(eval.value);

        let mut candidates: Vec<Vec<f64>> = eval.blocks.iter().map(|b| b.x.clone()).collect();
        candidates.dedup();

        // Cutting plane: update multipliers from the master over all
        // recorded solutions; its convex-combination weights give one more
        // upper-bound candidate per block.
        let mut next_nu = None;
        if opts.method == MultiplierMethod::CuttingPlane {
            history.push(eval.blocks.clone());
            let master = cutting_plane_update(inst, &history, opts.nu_box)?;
            for s in 0..n_s {
                let mut xbar = vec![0.0; inst.num_x()];
                let mut total = 0.0;
                for (e, w) in master.weights[s].iter().enumerate() {
                    if *w > 1e-12 {
                        total += *w;
                        for (j, v) in history[e][s].x.iter().enumerate() {
                            xbar[j] += w * v;
                        }
                    }
                }
                if total > 1e-9 {
                    for v in &mut xbar {
                        *v /= total;
                    }
                    candidates.push(xbar);
                }
            }
            next_nu = Some(master.nu);
        }

        let ub = ub_heuristic(inst, &candidates)?;
        if ub.value < best_ub {
            best_ub = ub.value;
            incumbent_x = ub.x;
            incumbent_y = ub.y;
        }
        log.push(k, best_lb, best_ub, start.elapsed().as_millis() as u64);

        if best_ub.is_finite() && best_ub - best_lb <= opts.tol * (1.0 + best_ub.abs()) {
            status = RunStatus::Converged;
            break;
        }

        match opts.method {
            MultiplierMethod::CuttingPlane => {
                let new_nu = next_nu.expect("master solved above");
                if new_nu.max_abs_diff(&nu) <= 1e-9 {
                    status = RunStatus::Converged;
                    break;
                }
                nu = new_nu;
            }
            MultiplierMethod::Subgradient => {
                let state = SubgradientState {
                    nu: nu.clone(),
                    best_lb,
                    best_ub,
                    incumbent_x: incumbent_x.clone(),
                    k,
                    last_dual_value: eval.value,
                };
                let xs: Vec<Vec<f64>> = eval.blocks.iter().map(|b| b.x.clone()).collect();
                match subgradient_step(&state, &xs, best_ub) {
                    SubgradientStep::Updated(new_nu) => nu = new_nu,
                    SubgradientStep::ZeroSubgradient => {
                        status = RunStatus::Converged;
                        break;
                    }
                }
            }
        }
    }

    Ok(AlgorithmResult {
        status,
        x: incumbent_x,
        y: incumbent_y,
        objective: best_ub,
        lower_bound: best_lb,
        upper_bound: best_ub,
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
    fn dual_at_zero_matches_hand_solution() {
        let inst = tiny2();
        let eval = evaluate_dual(&inst, &Multipliers::zeros(&inst)).unwrap();
        assert!((eval.blocks[0].objective - 0.5).abs() < 1e-9);
        assert!((eval.blocks[0].x[0] - 1.0).abs() < 1e-9);
        assert!((eval.blocks[1].objective - 1.0).abs() < 1e-9);
        assert!((eval.value - 1.5).abs() < 1e-9);
    }

    #[test]
    fn single_block_dual_equals_fullspace() {
        let mut inst = tiny2();
        inst.subperiods.truncate(1);
        let eval = evaluate_dual(&inst, &Multipliers::zeros(&inst)).unwrap();
        let full = solve(&build_fullspace(&inst).unwrap()).unwrap();
        assert!((eval.value - full.objective()).abs() < 1e-9);
    }

    #[test]
    fn subgradient_step_arithmetic() {
        let state = SubgradientState {
            nu: Multipliers {
                nu: vec![vec![0.0]],
            },
            best_lb: 8.0,
            best_ub: 10.0,
            incumbent_x: vec![0.0],
            k: 1,
            last_dual_value: 8.0,
        };
        let xs = vec![vec![2.0], vec![0.0]];
        match subgradient_step(&state, &xs, 10.0) {
            SubgradientStep::Updated(nu) => assert!((nu.nu[0][0] - 1.0).abs() < 1e-12),
            SubgradientStep::ZeroSubgradient => panic!("nonzero subgradient expected"),
        }
    }

    #[test]
    fn equal_copies_signal_zero_subgradient() {
        let state = SubgradientState {
            nu: Multipliers {
                nu: vec![vec![0.0]],
            },
            best_lb: 0.0,
            best_ub: 1.0,
            incumbent_x: vec![0.0],
            k: 1,
            last_dual_value: 0.5,
        };
        let xs = vec![vec![1.5], vec![1.5]];
        assert!(matches!(
            subgradient_step(&state, &xs, 1.0),
            SubgradientStep::ZeroSubgradient
        ));
    }

    #[test]
    fn equal_bounds_give_zero_step() {
        let state = SubgradientState {
            nu: Multipliers {
                nu: vec![vec![0.25]],
            },
            best_lb: 7.0,
            best_ub: 7.0,
            incumbent_x: vec![0.0],
            k: 3,
            last_dual_value: 7.0,
        };
        let xs = vec![vec![2.0], vec![1.0]];
        match subgradient_step(&state, &xs, 7.0) {
            SubgradientStep::Updated(nu) => assert_eq!(nu.nu[0][0], 0.25),
            SubgradientStep::ZeroSubgradient => panic!("subgradient is nonzero"),
        }
    }

    #[test]
    fn master_upper_bounds_recorded_dual_value() {
        let inst = tiny2();
        let eval = evaluate_dual(&inst, &Multipliers::zeros(&inst)).unwrap();
        let master = cutting_plane_update(&inst, &[eval.blocks.clone()], 1e6).unwrap();
        assert!(master.value >= 1.5 - 1e-9);
    }

    #[test]
    fn empty_box_returns_zero_multipliers() {
        let inst = tiny2();
        let eval = evaluate_dual(&inst, &Multipliers::zeros(&inst)).unwrap();
        let master = cutting_plane_update(&inst, &[eval.blocks.clone()], 0.0).unwrap();
        assert_eq!(master.nu.nu, vec![vec![0.0]]);
    }

    #[test]
    fn identical_copies_keep_master_at_dual_value() {
        // One entry with equal x across blocks: the nu terms cancel, so the
        // master value equals the recorded dual value.
        let inst = tiny2();
        let blocks = vec![
            BlockSolution {
                x: vec![1.0],
                y: vec![0.0],
                objective: 0.5,
                base_cost: 0.5,
            },
            BlockSolution {
                x: vec![1.0],
                y: vec![1.0],
                objective: 1.0,
                base_cost: 1.0,
            },
        ];
        let master = cutting_plane_update(&inst, &[blocks], 1e6).unwrap();
        assert!((master.value - 1.5).abs() < 1e-9);
    }

    #[test]
    fn ub_heuristic_fixed_candidates() {
        let inst = tiny2();
        let at_one = ub_heuristic(&inst, &[vec![1.0]]).unwrap();
        assert!((at_one.value - 1.5).abs() < 1e-9);
        let at_zero = ub_heuristic(&inst, &[vec![0.0]]).unwrap();
        assert!((at_zero.value - 4.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_candidate_contributes_infinity() {
        let mut inst = tiny2();
        inst.first_stage_rows
            .push(crate::lp::Row::new(vec![(0, 1.0)], RowSense::Ge, 0.5));
        let res = ub_heuristic(&inst, &[vec![0.0]]).unwrap();
        assert_eq!(res.value, f64::INFINITY);
    }

    #[test]
    fn tiny2_converges_with_both_methods() {
        for method in [MultiplierMethod::CuttingPlane, MultiplierMethod::Subgradient] {
            let opts = LagrangianOptions {
                method,
                ..LagrangianOptions::default()
            };
            let result = run_lagrangian(&tiny2(), &opts).unwrap();
            assert_eq!(result.status, RunStatus::Converged, "{method:?}");
            assert!((result.objective - 1.5).abs() < 1e-6, "{method:?}");
            assert!(result.log.entries.len() <= 2, "{method:?}");
            assert!(
                (result.lower_bound - result.upper_bound).abs() <= 1e-6 * 2.5,
                "{method:?}"
            );
        }
    }

    #[test]
    fn weak_duality_at_arbitrary_multipliers() {
        let inst = tiny2();
        let full = solve(&build_fullspace(&inst).unwrap()).unwrap();
        // x has no upper bound in tiny-2, so blocks stay bounded only for
        // multipliers in [-0.5, 0.5].
        for v in [-0.4, -0.3, 0.1, 0.45] {
            let nu = Multipliers { nu: vec![vec![v]] };
            let eval = evaluate_dual(&inst, &nu).unwrap();
            assert!(eval.value <= full.objective() + 1e-6, "nu = {v}");
        }
    }
}
