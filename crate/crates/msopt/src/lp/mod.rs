//! Dense LP solver with certified solutions.
//!
//! Every decomposition algorithm in this crate leans on the same contract:
//! a solve either returns an optimal primal/dual pair, a Farkas ray proving
//! infeasibility, or a primal ray proving unboundedness. [`verify_certificate`]
//! checks any of the three outcomes against the problem data alone, so tests
//! can validate solver output without trusting the solver.
//!
//! Problems are always minimized. Rows are kept in row-sense form
//! (`LE`/`GE`/`EQ`); variables carry individual bounds with `±inf` allowed.

mod simplex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sense of a single constraint row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RowSense {
    /// `a^T x <= rhs`
    Le,
    /// `a^T x >= rhs`
    Ge,
    /// `a^T x == rhs`
    Eq,
}

/// One constraint row with a sparse coefficient list.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

impl Row {
    pub fn new(coeffs: Vec<(usize, f64)>, sense: RowSense, rhs: f64) -> Self {
        Row { coeffs, sense, rhs }
    }

    /// Evaluates the row's left-hand side at `x`.
    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }
}

/// Per-variable bounds; use `f64::NEG_INFINITY` / `f64::INFINITY` for free sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub const NONNEGATIVE: Bounds = Bounds {
        lower: 0.0,
        upper: f64::INFINITY,
    };
    pub const FREE: Bounds = Bounds {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };

    pub fn fixed(v: f64) -> Self {
        Bounds { lower: v, upper: v }
    }

    pub fn range(lower: f64, upper: f64) -> Self {
        Bounds { lower, upper }
    }
}

/// A minimization LP in row-sense form.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    /// Objective coefficients, one per variable. Always minimized.
    pub costs: Vec<f64>,
    pub rows: Vec<Row>,
    pub bounds: Vec<Bounds>,
    pub var_names: Option<Vec<String>>,
    pub row_names: Option<Vec<String>>,
}

impl LinearProgram {
    /// New program over `costs.len()` variables, all bounded `[0, +inf)`.
    pub fn new(costs: Vec<f64>) -> Self {
        let n = costs.len();
        LinearProgram {
            costs,
            rows: Vec::new(),
            bounds: vec![Bounds::NONNEGATIVE; n],
            var_names: None,
            row_names: None,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.costs.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, sense: RowSense, rhs: f64) {
        self.rows.push(Row::new(coeffs, sense, rhs));
    }

    pub fn set_bounds(&mut self, var: usize, bounds: Bounds) {
        self.bounds[var] = bounds;
    }

    /// Checks the structural invariants: indices in range, `lower <= upper`,
    /// and every entry finite except declared infinite bounds.
    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(LpError::InvalidProgram(format!(
                "{} bounds for {} variables",
                self.bounds.len(),
                n
            )));
        }
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(LpError::InvalidProgram(format!(
                        "row {i} references variable {j} but there are only {n}"
                    )));
                }
                if !a.is_finite() {
                    return Err(LpError::InvalidProgram(format!(
                        "row {i} has non-finite coefficient on variable {j}"
                    )));
                }
            }
            if !row.rhs.is_finite() {
                return Err(LpError::InvalidProgram(format!("row {i} has non-finite rhs")));
            }
        }
        for (j, c) in self.costs.iter().enumerate() {
            if !c.is_finite() {
                return Err(LpError::InvalidProgram(format!(
                    "non-finite cost on variable {j}"
                )));
            }
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if b.lower > b.upper {
                return Err(LpError::InvalidProgram(format!(
                    "variable {j} has lower bound {} above upper bound {}",
                    b.lower, b.upper
                )));
            }
            if b.lower.is_nan() || b.upper.is_nan() || b.lower == f64::INFINITY
                || b.upper == f64::NEG_INFINITY
            {
                return Err(LpError::InvalidProgram(format!(
                    "variable {j} has malformed bounds [{}, {}]",
                    b.lower, b.upper
                )));
            }
        }
        Ok(())
    }

    /// Objective value `c^T x`.
    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.costs.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Plain-text dump in an LP-file-like layout, for external cross-checks.
    pub fn to_lp_text(&self) -> String {
        use std::fmt::Write;
        let name = |j: usize| -> String {
            self.var_names
                .as_ref()
                .and_then(|v| v.get(j).cloned())
                .unwrap_or_else(|| format!("x{j}"))
        };
        let mut out = String::from("minimize\n ");
        for (j, c) in self.costs.iter().enumerate() {
            if *c != 0.0 {
                let _ = write!(out, " {c:+} {}", name(j));
            }
        }
        out.push_str("\nsubject to\n");
        for (i, row) in self.rows.iter().enumerate() {
            let label = self
                .row_names
                .as_ref()
                .and_then(|v| v.get(i).cloned())
                .unwrap_or_else(|| format!("r{i}"));
            let _ = write!(out, " {label}:");
            for &(j, a) in &row.coeffs {
                let _ = write!(out, " {a:+} {}", name(j));
            }
            let op = match row.sense {
                RowSense::Le => "<=",
                RowSense::Ge => ">=",
                RowSense::Eq => "=",
            };
            let _ = writeln!(out, " {op} {}", row.rhs);
        }
        out.push_str("bounds\n");
        for (j, b) in self.bounds.iter().enumerate() {
            let _ = writeln!(out, " {} <= {} <= {}", b.lower, name(j), b.upper);
        }
        out.push_str("end\n");
        out
    }
}

/// Outcome classification of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// A certified solve outcome. Field presence follows `status`:
/// `primal`/`duals`/`objective` for `Optimal`, `farkas_ray` for `Infeasible`,
/// `primal_ray` for `Unbounded`.
///
/// A Farkas ray `f` is indexed by rows and satisfies `f_i >= 0` on `LE` rows,
/// `f_i <= 0` on `GE` rows (free on `EQ`); the aggregated row `A^T f` has a
/// finite box infimum that strictly exceeds `f^T rhs`, proving the feasible
/// set empty. A primal ray `d` is a cost-decreasing recession direction.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Option<Vec<f64>>,
    pub duals: Option<Vec<f64>>,
    pub objective: Option<f64>,
    pub farkas_ray: Option<Vec<f64>>,
    pub primal_ray: Option<Vec<f64>>,
    pub iterations: usize,
}

impl LpSolution {
    /// Primal vector of an optimal solution; panics if not optimal.
    pub fn primal(&self) -> &[f64] {
        self.primal.as_deref().expect("solution is not Optimal")
    }

    /// Row duals of an optimal solution; panics if not optimal.
    pub fn duals(&self) -> &[f64] {
        self.duals.as_deref().expect("solution is not Optimal")
    }

    /// Objective of an optimal solution; panics if not optimal.
    pub fn objective(&self) -> f64 {
        self.objective.expect("solution is not Optimal")
    }
}

/// Solver options. `max_pivots` bounds total pivots across both phases;
/// the pivot rule degrades from Dantzig to Bland after `10 * (n + m)` pivots
/// to rule out cycling.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tol_feas: f64,
    pub tol_opt: f64,
    pub max_pivots: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol_feas: 1e-7,
            tol_opt: 1e-9,
            max_pivots: 20_000,
        }
    }
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("invalid linear program: {0}")]
    InvalidProgram(String),
    #[error("pivot limit of {limit} exceeded")]
    MaxPivotsExceeded { limit: usize },
    #[error("numerical breakdown: pivot magnitude {magnitude:e} below 1e-12")]
    NumericalBreakdown { magnitude: f64 },
    #[error("solution shape disagrees with program: {0}")]
    ShapeMismatch(String),
}

/// Solves `lp` with a bounded-variable two-phase primal simplex.
///
/// Deterministic: identical inputs produce bit-identical outputs.
pub fn solve_lp(lp: &LinearProgram, opts: &SolveOptions) -> Result<LpSolution, LpError> {
    lp.validate()?;
    simplex::solve(lp, opts)
}

/// Convenience wrapper with [`SolveOptions::default`].
pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    solve_lp(lp, &SolveOptions::default())
}

/// Verdict of [`verify_certificate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Valid,
    /// First violated condition, with the magnitude of the violation.
    Violated { condition: String, magnitude: f64 },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

fn violated(condition: impl Into<String>, magnitude: f64) -> Verdict {
    Verdict::Violated {
        condition: condition.into(),
        magnitude,
    }
}

/// Checks an [`LpSolution`] against `lp` from first principles.
///
/// For `Optimal` this checks primal feasibility, dual sign conditions,
/// complementary slackness, reduced-cost/bound activity and strong duality;
/// for `Infeasible` the Farkas conditions; for `Unbounded` the ray conditions.
/// Returns the first violated condition, or `Valid`.
pub fn verify_certificate(
    lp: &LinearProgram,
    sol: &LpSolution,
    tol: f64,
) -> Result<Verdict, LpError> {
    lp.validate()?;
    let n = lp.num_vars();
    let m = lp.num_rows();
    match sol.status {
        LpStatus::Optimal => {
            let x = sol
                .primal
                .as_ref()
                .ok_or_else(|| LpError::ShapeMismatch("Optimal without primal".into()))?;
            let y = sol
                .duals
                .as_ref()
                .ok_or_else(|| LpError::ShapeMismatch("Optimal without duals".into()))?;
            let obj = sol
                .objective
                .ok_or_else(|| LpError::ShapeMismatch("Optimal without objective".into()))?;
            if x.len() != n {
                return Err(LpError::ShapeMismatch(format!(
                    "primal has {} entries for {} variables",
                    x.len(),
                    n
                )));
            }
            if y.len() != m {
                return Err(LpError::ShapeMismatch(format!(
                    "duals have {} entries for {} rows",
                    y.len(),
                    m
                )));
            }
            Ok(check_optimal(lp, x, y, obj, tol))
        }
        LpStatus::Infeasible => {
            let f = sol
                .farkas_ray
                .as_ref()
                .ok_or_else(|| LpError::ShapeMismatch("Infeasible without farkas_ray".into()))?;
            if f.len() != m {
                return Err(LpError::ShapeMismatch(format!(
                    "farkas_ray has {} entries for {} rows",
                    f.len(),
                    m
                )));
            }
            Ok(check_farkas(lp, f, tol))
        }
        LpStatus::Unbounded => {
            let d = sol
                .primal_ray
                .as_ref()
                .ok_or_else(|| LpError::ShapeMismatch("Unbounded without primal_ray".into()))?;
            if d.len() != n {
                return Err(LpError::ShapeMismatch(format!(
                    "primal_ray has {} entries for {} variables",
                    d.len(),
                    n
                )));
            }
            Ok(check_ray(lp, d, tol))
        }
    }
}

fn check_optimal(lp: &LinearProgram, x: &[f64], y: &[f64], obj: f64, tol: f64) -> Verdict {
    // Primal feasibility: bounds, then rows.
    for (j, b) in lp.bounds.iter().enumerate() {
        let below = b.lower - x[j];
        if below > tol * (1.0 + b.lower.abs()) {
            return violated(format!("primal feasibility: x[{j}] below lower bound"), below);
        }
        let above = x[j] - b.upper;
        if above > tol * (1.0 + b.upper.abs()) {
            return violated(format!("primal feasibility: x[{j}] above upper bound"), above);
        }
    }
    for (i, row) in lp.rows.iter().enumerate() {
        let resid = row.lhs(x) - row.rhs;
        let scale = tol * (1.0 + row.rhs.abs());
        let viol = match row.sense {
            RowSense::Le => resid,
            RowSense::Ge => -resid,
            RowSense::Eq => resid.abs(),
        };
        if viol > scale {
            return violated(format!("primal feasibility: row {i}"), viol);
        }
    }
    // Dual sign conditions.
    for (i, row) in lp.rows.iter().enumerate() {
        let bad = match row.sense {
            RowSense::Le => y[i],
            RowSense::Ge => -y[i],
            RowSense::Eq => 0.0,
        };
        if bad > tol {
            return violated(format!("dual sign: row {i}"), bad);
        }
    }
    // Complementary slackness on rows.
    for (i, row) in lp.rows.iter().enumerate() {
        if row.sense == RowSense::Eq {
            continue;
        }
        let slack = (row.lhs(x) - row.rhs).abs();
        let prod = y[i].abs() * slack;
        if prod > tol * (1.0 + row.rhs.abs()) * (1.0 + y[i].abs()) {
            return violated(format!("complementary slackness: row {i}"), prod);
        }
    }
    // Reduced costs must match bound activity (dual feasibility).
    let mut bound_term = 0.0;
    for j in 0..lp.num_vars() {
        let mut d = lp.costs[j];
        for (i, row) in lp.rows.iter().enumerate() {
            for &(k, a) in &row.coeffs {
                if k == j {
                    d -= y[i] * a;
                }
            }
        }
        let b = lp.bounds[j];
        let dtol = tol * (1.0 + lp.costs[j].abs());
        if d > dtol {
            if !b.lower.is_finite() {
                return violated(
                    format!("dual feasibility: positive reduced cost on free-below x[{j}]"),
                    d,
                );
            }
            let gap = x[j] - b.lower;
            if gap > tol * (1.0 + b.lower.abs()) * (1.0 + d) {
                return violated(format!("bound activity: x[{j}] not at lower"), gap * d);
            }
            bound_term += d * b.lower;
        } else if d < -dtol {
            if !b.upper.is_finite() {
                return violated(
                    format!("dual feasibility: negative reduced cost on free-above x[{j}]"),
                    -d,
                );
            }
            let gap = b.upper - x[j];
            if gap > tol * (1.0 + b.upper.abs()) * (1.0 - d) {
                return violated(format!("bound activity: x[{j}] not at upper"), -gap * d);
            }
            bound_term += d * b.upper;
        }
    }
    // Strong duality.
    let dual_obj: f64 = lp
        .rows
        .iter()
        .zip(y)
        .map(|(row, yi)| yi * row.rhs)
        .sum::<f64>()
        + bound_term;
    let gap = (lp.objective_at(x) - dual_obj).abs();
    if gap > tol * (1.0 + obj.abs()) {
        return violated("strong duality", gap);
    }
    let drift = (lp.objective_at(x) - obj).abs();
    if drift > tol * (1.0 + obj.abs()) {
        return violated("reported objective", drift);
    }
    Verdict::Valid
}

fn check_farkas(lp: &LinearProgram, f: &[f64], tol: f64) -> Verdict {
    for (i, row) in lp.rows.iter().enumerate() {
        let bad = match row.sense {
            RowSense::Le => -f[i],
            RowSense::Ge => f[i],
            RowSense::Eq => 0.0,
        };
        if bad > tol {
            return violated(format!("farkas sign: row {i}"), bad);
        }
    }
    // Aggregate the rows and take the infimum over the variable box.
    let n = lp.num_vars();
    let mut g = vec![0.0; n];
    for (i, row) in lp.rows.iter().enumerate() {
        for &(j, a) in &row.coeffs {
            g[j] += f[i] * a;
        }
    }
    let mut inf = 0.0;
    for (j, b) in lp.bounds.iter().enumerate() {
        if g[j] > tol {
            if !b.lower.is_finite() {
                return violated(format!("farkas cone: x[{j}] unbounded below"), g[j]);
            }
            inf += g[j] * b.lower;
        } else if g[j] < -tol {
            if !b.upper.is_finite() {
                return violated(format!("farkas cone: x[{j}] unbounded above"), -g[j]);
            }
            inf += g[j] * b.upper;
        }
    }
    let fb: f64 = lp.rows.iter().zip(f).map(|(row, fi)| fi * row.rhs).sum();
    let margin = inf - fb;
    if margin <= tol {
        return violated("farkas margin", margin);
    }
    Verdict::Valid
}

fn check_ray(lp: &LinearProgram, d: &[f64], tol: f64) -> Verdict {
    for (i, row) in lp.rows.iter().enumerate() {
        let along = row.lhs(d);
        let bad = match row.sense {
            RowSense::Le => along,
            RowSense::Ge => -along,
            RowSense::Eq => along.abs(),
        };
        if bad > tol {
            return violated(format!("ray violates row {i} direction"), bad);
        }
    }
    for (j, b) in lp.bounds.iter().enumerate() {
        if d[j] > tol && b.upper.is_finite() {
            return violated(format!("ray increases bounded-above x[{j}]"), d[j]);
        }
        if d[j] < -tol && b.lower.is_finite() {
            return violated(format!("ray decreases bounded-below x[{j}]"), -d[j]);
        }
    }
    let descent: f64 = lp.costs.iter().zip(d).map(|(c, v)| c * v).sum();
    if descent >= -tol {
        return violated("ray is not cost-decreasing", descent);
    }
    Verdict::Valid
}
