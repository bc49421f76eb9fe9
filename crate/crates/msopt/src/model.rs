//! Instance data model and model builders.
//!
//! [`MultiScaleInstance`] is the canonical two-level structure every
//! algorithm in this crate consumes: a first-stage block `min c^T x` with
//! rows `A x {<=,=,>=} b`, plus one block per subperiod with costs `q_s` and
//! rows `T_s x + W_s y_s {<=,=,>=} h_s`. Subperiod weights are folded into
//! effective costs `w_s * q_s` at build time, so the algorithms all see the
//! same unweighted shape.
//!
//! [`CapacityInstance`] is the generator capacity-expansion problem used in
//! the guide: install capacities `x_j` once, operate per part-of-day and per
//! representative day, buy shortfall power at a premium. It lowers into a
//! [`MultiScaleInstance`] via [`lower_capacity`] and aggregates into a
//! single-scale high-level LP via [`aggregate_capacity_highlevel`].

use crate::lp::{Bounds, LinearProgram, Row, RowSense};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
}

/// One constraint row of a subperiod block, split into its `x` and `y`
/// coefficient parts (`T_s` and `W_s` slices of one row).
#[derive(Debug, Clone, PartialEq)]
pub struct SubperiodRow {
    pub x_coeffs: Vec<(usize, f64)>,
    pub y_coeffs: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

/// A low-level block: weight, costs over its own `y` variables, and rows
/// coupling `y` to the shared first-stage `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Subperiod {
    pub weight: f64,
    pub costs: Vec<f64>,
    pub rows: Vec<SubperiodRow>,
    pub y_bounds: Vec<Bounds>,
}

impl Subperiod {
    pub fn num_y(&self) -> usize {
        self.costs.len()
    }

    /// Weight-scaled costs `w_s * q_s`; the only form the algorithms use.
    pub fn effective_costs(&self) -> Vec<f64> {
        self.costs.iter().map(|q| q * self.weight).collect()
    }
}

/// A two-level multi-time-scale instance (first stage plus subperiods).
#[derive(Debug, Clone, PartialEq)]
pub struct MultiScaleInstance {
    pub name: String,
    pub description: String,
    /// First-stage costs `c`.
    pub first_stage_costs: Vec<f64>,
    /// First-stage rows `A x {<=,=,>=} b`, over `x` only.
    pub first_stage_rows: Vec<Row>,
    pub x_bounds: Vec<Bounds>,
    pub subperiods: Vec<Subperiod>,
}

impl MultiScaleInstance {
    pub fn num_x(&self) -> usize {
        self.first_stage_costs.len()
    }

    pub fn num_subperiods(&self) -> usize {
        self.subperiods.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let n_x = self.num_x();
        if self.x_bounds.len() != n_x {
            return Err(ModelError::DimensionMismatch(format!(
                "{} x bounds for {} x variables",
                self.x_bounds.len(),
                n_x
            )));
        }
        if self.subperiods.is_empty() {
            return Err(ModelError::InvalidInstance(
                "instance has no subperiods".into(),
            ));
        }
        for row in &self.first_stage_rows {
            for &(j, _) in &row.coeffs {
                if j >= n_x {
                    return Err(ModelError::DimensionMismatch(format!(
                        "first-stage row references x[{j}] but there are {n_x} x variables"
                    )));
                }
            }
        }
        for (s, sp) in self.subperiods.iter().enumerate() {
            if !(sp.weight > 0.0) {
                return Err(ModelError::InvalidInstance(format!(
                    "subperiod {s} has non-positive weight {}",
                    sp.weight
                )));
            }
            let n_y = sp.num_y();
            if sp.y_bounds.len() != n_y {
                return Err(ModelError::DimensionMismatch(format!(
                    "subperiod {s}: {} y bounds for {} y variables",
                    sp.y_bounds.len(),
                    n_y
                )));
            }
            for row in &sp.rows {
                for &(j, _) in &row.x_coeffs {
                    if j >= n_x {
                        return Err(ModelError::DimensionMismatch(format!(
                            "subperiod {s} row references x[{j}] out of range"
                        )));
                    }
                }
                for &(j, _) in &row.y_coeffs {
                    if j >= n_y {
                        return Err(ModelError::DimensionMismatch(format!(
                            "subperiod {s} row references y[{j}] out of range"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Offsets of each variable group inside the full-space LP built by
/// [`build_fullspace`]: `x` first, then each subperiod's `y` block in order.
#[derive(Debug, Clone)]
pub struct FullspaceLayout {
    pub y_offsets: Vec<usize>,
    pub total_vars: usize,
}

pub fn fullspace_layout(inst: &MultiScaleInstance) -> FullspaceLayout {
    let mut offset = inst.num_x();
    let mut y_offsets = Vec::with_capacity(inst.num_subperiods());
    for sp in &inst.subperiods {
        y_offsets.push(offset);
        offset += sp.num_y();
    }
    FullspaceLayout {
        y_offsets,
        total_vars: offset,
    }
}

/// Builds the monolithic LP over `(x, y_1, ..., y_S)`:
/// `min c^T x + sum_s w_s q_s^T y_s` subject to all first-stage and
/// subperiod rows.
pub fn build_fullspace(inst: &MultiScaleInstance) -> Result<LinearProgram, ModelError> {
    inst.validate()?;
    let layout = fullspace_layout(inst);
    let mut costs = inst.first_stage_costs.clone();
    for sp in &inst.subperiods {
        costs.extend(sp.effective_costs());
    }
    let mut lp = LinearProgram::new(costs);
    for (j, b) in inst.x_bounds.iter().enumerate() {
        lp.set_bounds(j, *b);
    }
    for (s, sp) in inst.subperiods.iter().enumerate() {
        for (k, b) in sp.y_bounds.iter().enumerate() {
            lp.set_bounds(layout.y_offsets[s] + k, *b);
        }
    }
    for row in &inst.first_stage_rows {
        lp.add_row(row.coeffs.clone(), row.sense, row.rhs);
    }
    for (s, sp) in inst.subperiods.iter().enumerate() {
        let off = layout.y_offsets[s];
        for row in &sp.rows {
            let mut coeffs = row.x_coeffs.clone();
            coeffs.extend(row.y_coeffs.iter().map(|&(j, a)| (off + j, a)));
            lp.add_row(coeffs, row.sense, row.rhs);
        }
    }
    Ok(lp)
}

/// Full-space LP with `x` pinned to `x_star` via equality rows.
///
/// With `keep_first_stage_rows = false` the first-stage rows are dropped,
/// which is the shape the expected-value assessment uses; everything else
/// keeps them so an `x_star` violating the first stage shows up as
/// infeasible.
pub fn build_fixed_x(
    inst: &MultiScaleInstance,
    x_star: &[f64],
    keep_first_stage_rows: bool,
) -> Result<LinearProgram, ModelError> {
    if x_star.len() != inst.num_x() {
        return Err(ModelError::DimensionMismatch(format!(
            "fixed x has {} entries for {} x variables",
            x_star.len(),
            inst.num_x()
        )));
    }
    let mut lp = build_fullspace(inst)?;
    if !keep_first_stage_rows {
        lp.rows.drain(..inst.first_stage_rows.len());
    }
    for (j, &v) in x_star.iter().enumerate() {
        lp.add_row(vec![(j, 1.0)], RowSense::Eq, v);
    }
    Ok(lp)
}

/// The generator capacity-expansion problem: `J` generators, `I` parts per
/// day, `S` representative days. Indexing follows `a[s][i][j]`, `d[s][i]`,
/// `f[i][j]`, `g[s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityInstance {
    pub generators: usize,
    pub parts_per_day: usize,
    pub days: usize,
    /// Availability fraction of generator `j` in part `i` of day `s`.
    pub availability: Vec<Vec<Vec<f64>>>,
    /// Amortized fixed cost per kW per day.
    pub fixed_cost: Vec<f64>,
    /// Demand (kW) in part `i` of day `s`.
    pub demand: Vec<Vec<f64>>,
    /// Operating cost per kW of generator `j` in part `i`.
    pub op_cost: Vec<Vec<f64>>,
    /// Purchase cost per kW on day `s`.
    pub purchase_cost: Vec<f64>,
    /// Optional per-generator cap on installable capacity.
    pub capacity_limit: Option<Vec<f64>>,
}

impl CapacityInstance {
    pub fn validate(&self) -> Result<(), ModelError> {
        let (j_n, i_n, s_n) = (self.generators, self.parts_per_day, self.days);
        if j_n == 0 || i_n == 0 || s_n == 0 {
            return Err(ModelError::InvalidInstance(
                "generator, part and day counts must all be positive".into(),
            ));
        }
        let dim_err = |what: &str| ModelError::DimensionMismatch(what.to_string());
        if self.availability.len() != s_n {
            return Err(dim_err("availability outer dimension is not S"));
        }
        for day in &self.availability {
            if day.len() != i_n {
                return Err(dim_err("availability middle dimension is not I"));
            }
            for part in day {
                if part.len() != j_n {
                    return Err(dim_err("availability inner dimension is not J"));
                }
                for &a in part {
                    if !(0.0..=1.0).contains(&a) {
                        return Err(ModelError::InvalidInstance(format!(
                            "availability {a} outside [0, 1]"
                        )));
                    }
                }
            }
        }
        if self.fixed_cost.len() != j_n {
            return Err(dim_err("fixed_cost length is not J"));
        }
        if self.demand.len() != s_n || self.demand.iter().any(|d| d.len() != i_n) {
            return Err(dim_err("demand shape is not S x I"));
        }
        if self.op_cost.len() != i_n || self.op_cost.iter().any(|f| f.len() != j_n) {
            return Err(dim_err("op_cost shape is not I x J"));
        }
        if self.purchase_cost.len() != s_n {
            return Err(dim_err("purchase_cost length is not S"));
        }
        if let Some(lim) = &self.capacity_limit {
            if lim.len() != j_n {
                return Err(dim_err("capacity_limit length is not J"));
            }
        }
        let all = self
            .fixed_cost
            .iter()
            .chain(self.demand.iter().flatten())
            .chain(self.op_cost.iter().flatten())
            .chain(self.purchase_cost.iter());
        for &v in all {
            if !v.is_finite() || v < 0.0 {
                return Err(ModelError::InvalidInstance(format!(
                    "parameter {v} is not finite and nonnegative"
                )));
            }
        }
        Ok(())
    }

    /// Largest single-day total demand; the natural ceiling for a
    /// minimum-capacity parameter.
    pub fn max_daily_demand(&self) -> f64 {
        self.demand
            .iter()
            .map(|d| d.iter().sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Index of operating variable `(i, j)` inside a lowered subperiod block.
    pub fn op_index(&self, i: usize, j: usize) -> usize {
        i * self.generators + j
    }

    /// Index of the purchase variable for part `i` inside a lowered block.
    pub fn purchase_index(&self, i: usize) -> usize {
        self.parts_per_day * self.generators + i
    }
}

/// Lowers a capacity-expansion instance to the canonical two-level form.
///
/// Per day `s` the block holds operating variables `y[i][j]` (i-major) then
/// purchase variables `ytilde[i]`, with rows
/// `y[i][j] - a[s][i][j] x[j] <= 0` and `sum_j y[i][j] + ytilde[i] >= d[s][i]`.
/// The first-stage cost per `x[j]` is `S * c[j]`, matching the day-summed
/// objective of the full model.
pub fn lower_capacity(cap: &CapacityInstance) -> Result<MultiScaleInstance, ModelError> {
    cap.validate()?;
    let (j_n, i_n, s_n) = (cap.generators, cap.parts_per_day, cap.days);
    let first_stage_costs: Vec<f64> = cap.fixed_cost.iter().map(|c| c * s_n as f64).collect();
    let x_bounds: Vec<Bounds> = match &cap.capacity_limit {
        Some(lim) => lim.iter().map(|&u| Bounds::range(0.0, u)).collect(),
        None => vec![Bounds::NONNEGATIVE; j_n],
    };
    let mut subperiods = Vec::with_capacity(s_n);
    for s in 0..s_n {
        let n_y = i_n * j_n + i_n;
        let mut costs = Vec::with_capacity(n_y);
        for i in 0..i_n {
            for j in 0..j_n {
                costs.push(cap.op_cost[i][j]);
            }
        }
        costs.extend(std::iter::repeat(cap.purchase_cost[s]).take(i_n));
        let mut rows = Vec::with_capacity(i_n * j_n + i_n);
        for i in 0..i_n {
            for j in 0..j_n {
                rows.push(SubperiodRow {
                    x_coeffs: vec![(j, -cap.availability[s][i][j])],
                    y_coeffs: vec![(cap.op_index(i, j), 1.0)],
                    sense: RowSense::Le,
                    rhs: 0.0,
                });
            }
        }
        for i in 0..i_n {
            let mut y_coeffs: Vec<(usize, f64)> =
                (0..j_n).map(|j| (cap.op_index(i, j), 1.0)).collect();
            y_coeffs.push((cap.purchase_index(i), 1.0));
            rows.push(SubperiodRow {
                x_coeffs: Vec::new(),
                y_coeffs,
                sense: RowSense::Ge,
                rhs: cap.demand[s][i],
            });
        }
        subperiods.push(Subperiod {
            weight: 1.0,
            costs,
            rows,
            y_bounds: vec![Bounds::NONNEGATIVE; n_y],
        });
    }
    Ok(MultiScaleInstance {
        name: "capacity-expansion".into(),
        description: format!("{j_n} generators, {i_n} parts per day, {s_n} days"),
        first_stage_costs,
        first_stage_rows: Vec::new(),
        x_bounds,
        subperiods,
    })
}

/// Builds the aggregated single-scale high-level LP for a capacity instance.
///
/// Variables are `(x_1..x_J, y_1..y_J, ytilde)`: net operating level per
/// generator and net purchased power for the whole horizon. `prefactors[j]`
/// scales the aggregated availability of generator `j`; `min_capacity` adds
/// rows `x_j >= min_capacity` when positive. Unit parameters
/// (`prefactors = 1`, `min_capacity = 0`) give the plain aggregated model.
pub fn aggregate_capacity_highlevel(
    cap: &CapacityInstance,
    prefactors: &[f64],
    min_capacity: f64,
) -> Result<LinearProgram, ModelError> {
    cap.validate()?;
    let (j_n, i_n, s_n) = (cap.generators, cap.parts_per_day, cap.days);
    if prefactors.len() != j_n {
        return Err(ModelError::DimensionMismatch(format!(
            "{} availability prefactors for {} generators",
            prefactors.len(),
            j_n
        )));
    }
    let mut costs = Vec::with_capacity(2 * j_n + 1);
    for j in 0..j_n {
        costs.push(cap.fixed_cost[j] * s_n as f64);
    }
    for j in 0..j_n {
        let f_sum: f64 = (0..i_n).map(|i| cap.op_cost[i][j]).sum();
        costs.push(f_sum * s_n as f64);
    }
    costs.push(cap.purchase_cost.iter().sum());
    let mut lp = LinearProgram::new(costs);
    if let Some(lim) = &cap.capacity_limit {
        for (j, &u) in lim.iter().enumerate() {
            lp.set_bounds(j, Bounds::range(0.0, u));
        }
    }
    for j in 0..j_n {
        let agg_avail: f64 = (0..s_n)
            .map(|s| (0..i_n).map(|i| cap.availability[s][i][j]).sum::<f64>())
            .sum();
        lp.add_row(
            vec![(j_n + j, 1.0), (j, -prefactors[j] * agg_avail)],
            RowSense::Le,
            0.0,
        );
    }
    let total_demand: f64 = cap.demand.iter().flatten().sum();
    let mut demand_row: Vec<(usize, f64)> = (0..j_n).map(|j| (j_n + j, 1.0)).collect();
    demand_row.push((2 * j_n, 1.0));
    lp.add_row(demand_row, RowSense::Ge, total_demand);
    if min_capacity > 0.0 {
        for j in 0..j_n {
            lp.add_row(vec![(j, 1.0)], RowSense::Ge, min_capacity);
        }
    }
    Ok(lp)
}

/// Dimensions for [`generate_random_instance`].
#[derive(Debug, Clone, Copy)]
pub struct RandomDims {
    pub n_x: usize,
    pub n_y: usize,
    pub m_sub: usize,
    pub n_subperiods: usize,
}

/// Generates a seeded random instance with complete recourse.
///
/// Every subperiod's last `y` column is a penalty variable covering all of
/// that block's rows (`-1` on `<=` rows, `+1` on `>=` rows) with cost in
/// `[5, 50]`, so any `x` within bounds leaves every block feasible; `x`
/// carries finite upper bounds in `[1, 100]`, so the full space is bounded.
/// Identical seeds reproduce the instance bit for bit.
pub fn generate_random_instance(
    seed: u64,
    dims: &RandomDims,
) -> Result<MultiScaleInstance, ModelError> {
    if dims.n_x == 0 || dims.n_y == 0 || dims.m_sub == 0 || dims.n_subperiods == 0 {
        return Err(ModelError::InvalidInstance(
            "all generator dimensions must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_x = dims.n_x;
    let n_y = dims.n_y;

    let x_upper: Vec<f64> = (0..n_x).map(|_| rng.gen_range(1.0..100.0)).collect();
    let x_bounds: Vec<Bounds> = x_upper.iter().map(|&u| Bounds::range(0.0, u)).collect();
    let first_stage_costs: Vec<f64> = (0..n_x).map(|_| rng.gen_range(1.0..10.0)).collect();
    let budget = rng.gen_range(0.6..0.95) * x_upper.iter().sum::<f64>();
    let first_stage_rows = vec![Row::new(
        (0..n_x).map(|j| (j, 1.0)).collect(),
        RowSense::Le,
        budget,
    )];

    let mut subperiods = Vec::with_capacity(dims.n_subperiods);
    for _ in 0..dims.n_subperiods {
        let weight = rng.gen_range(0.5..1.5);
        let mut costs: Vec<f64> = (0..n_y - 1).map(|_| rng.gen_range(1.0..10.0)).collect();
        costs.push(rng.gen_range(5.0..50.0));
        let mut rows = Vec::with_capacity(dims.m_sub);
        for _ in 0..dims.m_sub {
            let sense = if rng.gen_bool(0.5) {
                RowSense::Le
            } else {
                RowSense::Ge
            };
            let mut x_coeffs = Vec::new();
            for j in 0..n_x {
                let a: f64 = rng.gen_range(-2.0..2.0);
                let keep = rng.gen_bool(0.75);
                if keep {
                    x_coeffs.push((j, a));
                }
            }
            let mut y_coeffs = Vec::new();
            for k in 0..n_y - 1 {
                let a: f64 = rng.gen_range(-2.0..2.0);
                let keep = rng.gen_bool(0.75);
                if keep {
                    y_coeffs.push((k, a));
                }
            }
            let penalty_coeff = match sense {
                RowSense::Le => -1.0,
                _ => 1.0,
            };
            y_coeffs.push((n_y - 1, penalty_coeff));
            let rhs = rng.gen_range(-5.0..5.0);
            rows.push(SubperiodRow {
                x_coeffs,
                y_coeffs,
                sense,
                rhs,
            });
        }
        subperiods.push(Subperiod {
            weight,
            costs,
            rows,
            y_bounds: vec![Bounds::NONNEGATIVE; n_y],
        });
    }
    Ok(MultiScaleInstance {
        name: format!("random-{seed}"),
        description: format!(
            "seeded random instance, dims ({n_x}, {n_y}, {}, {})",
            dims.m_sub, dims.n_subperiods
        ),
        first_stage_costs,
        first_stage_rows,
        x_bounds,
        subperiods,
    })
}

/// Termination status shared by every algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    IterationLimit,
    Infeasible,
    Unbounded,
}

/// One logged iteration of an algorithm run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogEntry {
    pub iteration: usize,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub gap: f64,
    pub wall_millis: u64,
}

/// Per-iteration bound trajectory plus free-form notes (for example a
/// warning that an epigraph variable rested on its big-M bound).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceLog {
    pub entries: Vec<LogEntry>,
    pub notes: Vec<String>,
}

impl ConvergenceLog {
    pub fn push(&mut self, iteration: usize, lower_bound: f64, upper_bound: f64, wall_millis: u64) {
        self.entries.push(LogEntry {
            iteration,
            lower_bound,
            upper_bound,
            gap: upper_bound - lower_bound,
            wall_millis,
        });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// CSV with the exact columns
    /// `iteration,lower_bound,upper_bound,gap,wall_millis`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,lower_bound,upper_bound,gap,wall_millis\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                e.iteration, e.lower_bound, e.upper_bound, e.gap, e.wall_millis
            ));
        }
        out
    }
}

/// Solution, bounds and log returned by every algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmResult {
    pub status: RunStatus,
    pub x: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub objective: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub log: ConvergenceLog,
}

/// [`AlgorithmResult`] without the log; the JSON summary the CLI emits.
#[derive(Debug, Clone, Serialize)]
pub struct ResultSummary {
    pub status: RunStatus,
    pub objective: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub x: Vec<f64>,
    pub iterations: usize,
}

impl AlgorithmResult {
    pub fn summary(&self) -> ResultSummary {
        ResultSummary {
            status: self.status,
            objective: self.objective,
            lower_bound: self.lower_bound,
            upper_bound: self.upper_bound,
            x: self.x.clone(),
            iterations: self.log.entries.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{solve, LpStatus};

    fn tiny1() -> MultiScaleInstance {
        MultiScaleInstance {
            name: "tiny-1".into(),
            description: String::new(),
            first_stage_costs: vec![1.0],
            first_stage_rows: Vec::new(),
            x_bounds: vec![Bounds::NONNEGATIVE],
            subperiods: vec![Subperiod {
                weight: 1.0,
                costs: vec![3.0],
                rows: vec![SubperiodRow {
                    x_coeffs: vec![(0, 1.0)],
                    y_coeffs: vec![(0, 1.0)],
                    sense: RowSense::Ge,
                    rhs: 1.0,
                }],
                y_bounds: vec![Bounds::NONNEGATIVE],
            }],
        }
    }

    fn tiny2() -> MultiScaleInstance {
        let mut inst = tiny1();
        inst.name = "tiny-2".into();
        inst.subperiods.push(Subperiod {
            weight: 1.0,
            costs: vec![0.5],
            rows: vec![SubperiodRow {
                x_coeffs: vec![(0, 1.0)],
                y_coeffs: vec![(0, 1.0)],
                sense: RowSense::Ge,
                rhs: 2.0,
            }],
            y_bounds: vec![Bounds::NONNEGATIVE],
        });
        inst
    }

    fn micro_capacity() -> CapacityInstance {
        CapacityInstance {
            generators: 1,
            parts_per_day: 1,
            days: 2,
            availability: vec![vec![vec![1.0]], vec![vec![1.0]]],
            fixed_cost: vec![1.0],
            demand: vec![vec![1.0], vec![2.0]],
            op_cost: vec![vec![1.0]],
            purchase_cost: vec![10.0, 10.0],
            capacity_limit: None,
        }
    }

    #[test]
    fn tiny1_structure() {
        let lp = build_fullspace(&tiny1()).unwrap();
        assert_eq!(lp.num_vars(), 2);
        assert_eq!(lp.num_rows(), 1);
    }

    #[test]
    fn tiny2_fullspace_optimum() {
        let lp = build_fullspace(&tiny2()).unwrap();
        assert_eq!(lp.num_vars(), 3);
        assert_eq!(lp.num_rows(), 2);
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective() - 1.5).abs() < 1e-9);
        assert!((sol.primal()[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn capacity_lowering_counts() {
        let cap = CapacityInstance {
            generators: 2,
            parts_per_day: 3,
            days: 3,
            availability: vec![vec![vec![1.0; 2]; 3]; 3],
            fixed_cost: vec![1.0, 2.0],
            demand: vec![vec![1.0; 3]; 3],
            op_cost: vec![vec![1.0; 2]; 3],
            purchase_cost: vec![10.0; 3],
            capacity_limit: None,
        };
        let inst = lower_capacity(&cap).unwrap();
        assert_eq!(inst.num_x(), 2);
        for sp in &inst.subperiods {
            assert_eq!(sp.num_y(), 9);
            assert_eq!(sp.rows.len(), 9);
        }
        let lp = build_fullspace(&inst).unwrap();
        assert_eq!(lp.num_vars(), 2 + 3 * 9);
        assert_eq!(lp.num_rows(), 3 * 9);
    }

    #[test]
    fn micro_capacity_fullspace_optimum() {
        let inst = lower_capacity(&micro_capacity()).unwrap();
        let sol = solve(&build_fullspace(&inst).unwrap()).unwrap();
        assert!((sol.objective() - 7.0).abs() < 1e-9);
        assert!((sol.primal()[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn zero_availability_forces_purchases() {
        let mut cap = micro_capacity();
        cap.availability = vec![vec![vec![0.0]], vec![vec![0.0]]];
        let inst = lower_capacity(&cap).unwrap();
        let sol = solve(&build_fullspace(&inst).unwrap()).unwrap();
        // All demand bought at 10/kW: 10 * (1 + 2).
        assert!((sol.objective() - 30.0).abs() < 1e-9);
        assert!(sol.primal()[0].abs() < 1e-9);
    }

    #[test]
    fn aggregate_highlevel_unit_params() {
        let cap = micro_capacity();
        let lp = aggregate_capacity_highlevel(&cap, &[1.0], 0.0).unwrap();
        assert_eq!(lp.num_vars(), 3);
        assert_eq!(lp.num_rows(), 2);
        let sol = solve(&lp).unwrap();
        assert!((sol.objective() - 9.0).abs() < 1e-9);
        assert!((sol.primal()[0] - 1.5).abs() < 1e-9);
    }

    #[test]
    fn aggregate_highlevel_prefactor() {
        let cap = micro_capacity();
        let lp = aggregate_capacity_highlevel(&cap, &[0.75], 0.0).unwrap();
        let sol = solve(&lp).unwrap();
        assert!((sol.primal()[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn aggregate_highlevel_min_capacity() {
        let cap = micro_capacity();
        let lp = aggregate_capacity_highlevel(&cap, &[1.0], 5.0).unwrap();
        let sol = solve(&lp).unwrap();
        assert!(sol.primal()[0] >= 5.0 - 1e-9);
    }

    #[test]
    fn random_instance_deterministic_and_solvable() {
        let dims = RandomDims {
            n_x: 2,
            n_y: 2,
            m_sub: 2,
            n_subperiods: 3,
        };
        let a = generate_random_instance(0, &dims).unwrap();
        let b = generate_random_instance(0, &dims).unwrap();
        assert_eq!(a, b);
        for sp in &a.subperiods {
            assert!(*sp.costs.last().unwrap() > 0.0);
        }
        let sol = solve(&build_fullspace(&a).unwrap()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
    }

    #[test]
    fn fixed_x_matches_manual_substitution() {
        let inst = tiny2();
        let lp = build_fixed_x(&inst, &[0.0], true).unwrap();
        let sol = solve(&lp).unwrap();
        // x = 0: y1 = 1 at cost 3, y2 = 2 at cost 0.5 each.
        assert!((sol.objective() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn csv_log_shape() {
        let mut log = ConvergenceLog::default();
        log.push(1, 0.5, 2.0, 0);
        let csv = log.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "iteration,lower_bound,upper_bound,gap,wall_millis"
        );
        assert_eq!(lines.next().unwrap(), "1,0.5,2,1.5,0");
    }
}
