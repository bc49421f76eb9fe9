//! Two-phase bounded-variable primal simplex with an explicit basis inverse.
//!
//! Each row gets a slack variable with bounds encoding its sense, so the
//! working system is `[A | I] v = b` throughout. Phase 1 adds unit-cost
//! artificial columns only on rows whose initial slack value violates its
//! bounds; the Farkas ray of an infeasible program is the negated phase-1
//! dual vector. Pivoting uses Dantzig's rule with a Bland fallback after
//! `10 * (n + m)` pivots, and ties break on the smallest variable index, so
//! solves are deterministic.

use super::{Bounds, LinearProgram, LpError, LpSolution, LpStatus, RowSense, SolveOptions};

const PIVOT_MIN: f64 = 1e-12;
const RATIO_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Nonbasic free variable, parked at zero.
    FreeZero,
}

enum Phase2 {
    Optimal,
    Unbounded { entering: usize, sigma: f64 },
}

struct Core {
    m: usize,
    n_struct: usize,
    n_total: usize,
    cols: Vec<Vec<f64>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    value: Vec<f64>,
    state: Vec<State>,
    artificial: Vec<bool>,
    basis: Vec<usize>,
    binv: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    pivots: usize,
    pivots_since_refactor: usize,
    bland_after: usize,
    max_pivots: usize,
    tol_feas: f64,
    tol_opt: f64,
}

pub(super) fn solve(lp: &LinearProgram, opts: &SolveOptions) -> Result<LpSolution, LpError> {
    let mut core = Core::build(lp, opts);
    let needs_phase1 = core.install_artificials();
    if needs_phase1 {
        let phase1_cost = core.phase1_costs();
        match core.run(&phase1_cost)? {
            Phase2::Optimal => {}
            // The phase-1 objective is bounded below by zero.
            Phase2::Unbounded { .. } => {
                return Err(LpError::NumericalBreakdown { magnitude: 0.0 })
            }
        }
        let infeasibility: f64 = (0..core.n_total)
            .filter(|&j| core.artificial[j])
            .map(|j| core.value[j])
            .sum();
        if infeasibility > core.tol_feas {
            let y = core.duals(&phase1_cost);
            let ray = normalized(y.iter().map(|v| -v).collect());
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                primal: None,
                duals: None,
                objective: None,
                farkas_ray: Some(ray),
                primal_ray: None,
                iterations: core.pivots,
            });
        }
        core.retire_artificials()?;
    }

    let mut phase2_cost = vec![0.0; core.n_total];
    phase2_cost[..core.n_struct].copy_from_slice(&lp.costs);
    match core.run(&phase2_cost)? {
        Phase2::Optimal => {
            core.refactor()?;
            core.recompute_basic_values();
            let primal = core.value[..core.n_struct].to_vec();
            let duals = core.duals(&phase2_cost);
            let objective = lp.objective_at(&primal);
            Ok(LpSolution {
                status: LpStatus::Optimal,
                primal: Some(primal),
                duals: Some(duals),
                objective: Some(objective),
                farkas_ray: None,
                primal_ray: None,
                iterations: core.pivots,
            })
        }
        Phase2::Unbounded { entering, sigma } => {
            let w = core.ftran(entering);
            let mut ray = vec![0.0; core.n_struct];
            if entering < core.n_struct {
                ray[entering] = sigma;
            }
            for slot in 0..core.m {
                let j = core.basis[slot];
                if j < core.n_struct {
                    ray[j] = -sigma * w[slot];
                }
            }
            Ok(LpSolution {
                status: LpStatus::Unbounded,
                primal: None,
                duals: None,
                objective: None,
                farkas_ray: None,
                primal_ray: Some(normalized(ray)),
                iterations: core.pivots,
            })
        }
    }
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let scale = v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if scale > 0.0 {
        for x in &mut v {
            *x /= scale;
        }
    }
    v
}

impl Core {
    fn build(lp: &LinearProgram, opts: &SolveOptions) -> Core {
        let m = lp.num_rows();
        let n = lp.num_vars();
        let mut cols: Vec<Vec<f64>> = vec![vec![0.0; m]; n + m];
        let mut lower = Vec::with_capacity(n + m);
        let mut upper = Vec::with_capacity(n + m);
        for b in &lp.bounds {
            lower.push(b.lower);
            upper.push(b.upper);
        }
        let mut rhs = Vec::with_capacity(m);
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                cols[j][i] += a;
            }
            cols[n + i][i] = 1.0;
            let slack = match row.sense {
                RowSense::Le => Bounds::NONNEGATIVE,
                RowSense::Ge => Bounds::range(f64::NEG_INFINITY, 0.0),
                RowSense::Eq => Bounds::fixed(0.0),
            };
            lower.push(slack.lower);
            upper.push(slack.upper);
            rhs.push(row.rhs);
        }

        // Structural variables start nonbasic at their nearest finite bound;
        // slacks start basic.
        let mut state = Vec::with_capacity(n + m);
        let mut value = Vec::with_capacity(n + m);
        for j in 0..n {
            let (s, v) = initial_state(lower[j], upper[j]);
            state.push(s);
            value.push(v);
        }
        let mut basis = Vec::with_capacity(m);
        for i in 0..m {
            state.push(State::Basic(i));
            value.push(0.0);
            basis.push(n + i);
        }
        let binv = identity(m);

        let mut core = Core {
            m,
            n_struct: n,
            n_total: n + m,
            cols,
            lower,
            upper,
            value,
            state,
            artificial: vec![false; n + m],
            basis,
            binv,
            rhs,
            pivots: 0,
            pivots_since_refactor: 0,
            bland_after: 10 * (n + m),
            max_pivots: opts.max_pivots,
            tol_feas: opts.tol_feas,
            tol_opt: opts.tol_opt,
        };
        core.recompute_basic_values();
        core
    }

    /// Adds a `+/-1` artificial column on every row whose basic slack sits
    /// outside its bounds, making the starting basis feasible. Returns
    /// whether a phase-1 run is required.
    fn install_artificials(&mut self) -> bool {
        let mut any = false;
        for i in 0..self.m {
            let s = self.basis[i];
            let v = self.value[s];
            let (excess, parked, coeff) = if v > self.upper[s] {
                (v - self.upper[s], State::AtUpper, 1.0)
            } else if v < self.lower[s] {
                (self.lower[s] - v, State::AtLower, -1.0)
            } else {
                continue;
            };
            any = true;
            let mut col = vec![0.0; self.m];
            col[i] = coeff;
            // The basis stays diagonal here: replacing slack +e_i by the
            // artificial `coeff * e_i` flips the inverse's diagonal entry.
            self.binv[i][i] = coeff;
            let t = self.n_total;
            self.cols.push(col);
            self.lower.push(0.0);
            self.upper.push(f64::INFINITY);
            self.value.push(excess);
            self.state.push(State::Basic(i));
            self.artificial.push(true);
            self.n_total += 1;
            // Park the displaced slack at the violated bound.
            self.state[s] = parked;
            self.value[s] = if parked == State::AtUpper {
                self.upper[s]
            } else {
                self.lower[s]
            };
            self.basis[i] = t;
        }
        any
    }

    fn phase1_costs(&self) -> Vec<f64> {
        (0..self.n_total)
            .map(|j| if self.artificial[j] { 1.0 } else { 0.0 })
            .collect()
    }

    /// After a feasible phase 1: pin artificials to zero and pivot basic ones
    /// out where a structural or slack column can replace them. An artificial
    /// stuck on a redundant row stays basic at zero, fixed.
    fn retire_artificials(&mut self) -> Result<(), LpError> {
        for j in 0..self.n_total {
            if self.artificial[j] {
                self.lower[j] = 0.0;
                self.upper[j] = 0.0;
                if !matches!(self.state[j], State::Basic(_)) {
                    self.state[j] = State::AtLower;
                    self.value[j] = 0.0;
                }
            }
        }
        for slot in 0..self.m {
            let j = self.basis[slot];
            if !self.artificial[j] {
                continue;
            }
            let mut replacement = None;
            for q in 0..self.n_total {
                if self.artificial[q] || matches!(self.state[q], State::Basic(_)) {
                    continue;
                }
                let w = self.ftran(q);
                if w[slot].abs() > 1e-7 {
                    replacement = Some((q, w));
                    break;
                }
            }
            if let Some((q, w)) = replacement {
                // Degenerate exchange: the artificial leaves at zero, the
                // replacement enters at its current value.
                self.apply_pivot(q, slot, &w, 0.0, 1.0, State::AtLower)?;
            }
        }
        Ok(())
    }

    fn run(&mut self, cost: &[f64]) -> Result<Phase2, LpError> {
        loop {
            let y = self.duals_full(cost);
            let entering = self.select_entering(cost, &y);
            let (q, sigma) = match entering {
                None => return Ok(Phase2::Optimal),
                Some(pair) => pair,
            };
            let w = self.ftran(q);
            let step = self.ratio_test(q, sigma, &w);
            match step {
                Ratio::Unbounded => return Ok(Phase2::Unbounded { entering: q, sigma }),
                Ratio::BoundFlip(t) => {
                    self.move_along(q, sigma, t, &w);
                    self.state[q] = match self.state[q] {
                        State::AtLower => State::AtUpper,
                        State::AtUpper => State::AtLower,
                        other => other,
                    };
                    self.value[q] = if self.state[q] == State::AtUpper {
                        self.upper[q]
                    } else {
                        self.lower[q]
                    };
                    self.bump_pivot_count()?;
                }
                Ratio::Leave { slot, t, to_upper } => {
                    let leave_state = if to_upper { State::AtUpper } else { State::AtLower };
                    self.apply_pivot(q, slot, &w, t, sigma, leave_state)?;
                    self.bump_pivot_count()?;
                }
            }
        }
    }

    fn bump_pivot_count(&mut self) -> Result<(), LpError> {
        self.pivots += 1;
        self.pivots_since_refactor += 1;
        if self.pivots > self.max_pivots {
            return Err(LpError::MaxPivotsExceeded {
                limit: self.max_pivots,
            });
        }
        if self.pivots_since_refactor >= REFACTOR_EVERY {
            self.refactor()?;
            self.recompute_basic_values();
        }
        Ok(())
    }

    /// Reduced-cost pricing. Dantzig's rule until `bland_after` pivots, then
    /// Bland's smallest-index rule; ties always break on the smaller index.
    fn select_entering(&self, cost: &[f64], y: &[f64]) -> Option<(usize, f64)> {
        let bland = self.pivots >= self.bland_after;
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.n_total {
            let (eligible, sigma, score) = match self.state[j] {
                State::Basic(_) => continue,
                _ if self.lower[j] == self.upper[j] => continue,
                State::AtLower => {
                    let d = self.reduced_cost(j, cost, y);
                    (d < -self.tol_opt, 1.0, -d)
                }
                State::AtUpper => {
                    let d = self.reduced_cost(j, cost, y);
                    (d > self.tol_opt, -1.0, d)
                }
                State::FreeZero => {
                    let d = self.reduced_cost(j, cost, y);
                    (d.abs() > self.tol_opt, if d < 0.0 { 1.0 } else { -1.0 }, d.abs())
                }
            };
            if !eligible {
                continue;
            }
            if bland {
                return Some((j, sigma));
            }
            match best {
                Some((_, _, s)) if s >= score => {}
                _ => best = Some((j, sigma, score)),
            }
        }
        best.map(|(j, sigma, _)| (j, sigma))
    }

    fn reduced_cost(&self, j: usize, cost: &[f64], y: &[f64]) -> f64 {
        let mut d = cost[j];
        let col = &self.cols[j];
        for i in 0..self.m {
            d -= y[i] * col[i];
        }
        d
    }

    /// `B^-1 * column(q)`.
    fn ftran(&self, q: usize) -> Vec<f64> {
        let col = &self.cols[q];
        (0..self.m)
            .map(|i| {
                let row = &self.binv[i];
                let mut acc = 0.0;
                for k in 0..self.m {
                    acc += row[k] * col[k];
                }
                acc
            })
            .collect()
    }

    fn ratio_test(&self, q: usize, sigma: f64, w: &[f64]) -> Ratio {
        let span = self.upper[q] - self.lower[q];
        let mut best_t = if span.is_finite() { span } else { f64::INFINITY };
        let mut leaving: Option<(usize, bool)> = None;
        for slot in 0..self.m {
            let j = self.basis[slot];
            let denom = sigma * w[slot];
            let (t, to_upper) = if denom > RATIO_TOL {
                if !self.lower[j].is_finite() {
                    continue;
                }
                ((self.value[j] - self.lower[j]) / denom, false)
            } else if denom < -RATIO_TOL {
                if !self.upper[j].is_finite() {
                    continue;
                }
                ((self.value[j] - self.upper[j]) / denom, true)
            } else {
                continue;
            };
            let t = t.max(0.0);
            let replace = match leaving {
                None => t < best_t || (t == best_t && best_t.is_finite()),
                Some((cur_slot, _)) => {
                    t < best_t || (t == best_t && self.basis[cur_slot] > j)
                }
            };
            if replace {
                best_t = t;
                leaving = Some((slot, to_upper));
            }
        }
        match leaving {
            Some((slot, to_upper)) => Ratio::Leave {
                slot,
                t: best_t,
                to_upper,
            },
            None if best_t.is_finite() => Ratio::BoundFlip(best_t),
            None => Ratio::Unbounded,
        }
    }

    fn move_along(&mut self, q: usize, sigma: f64, t: f64, w: &[f64]) {
        self.value[q] += sigma * t;
        for slot in 0..self.m {
            let j = self.basis[slot];
            self.value[j] -= sigma * t * w[slot];
        }
    }

    fn apply_pivot(
        &mut self,
        q: usize,
        slot: usize,
        w: &[f64],
        t: f64,
        sigma: f64,
        leave_state: State,
    ) -> Result<(), LpError> {
        let pivot = w[slot];
        if pivot.abs() < PIVOT_MIN {
            return Err(LpError::NumericalBreakdown {
                magnitude: pivot.abs(),
            });
        }
        self.move_along(q, sigma, t, w);
        let leaving = self.basis[slot];
        self.state[leaving] = leave_state;
        self.value[leaving] = if leave_state == State::AtUpper {
            self.upper[leaving]
        } else {
            self.lower[leaving]
        };
        if self.artificial[leaving] {
            // Artificials never come back.
            self.lower[leaving] = 0.0;
            self.upper[leaving] = 0.0;
            self.value[leaving] = 0.0;
            self.state[leaving] = State::AtLower;
        }
        self.basis[slot] = q;
        self.state[q] = State::Basic(slot);

        // Eta update of the explicit inverse.
        let pivot_row: Vec<f64> = self.binv[slot].iter().map(|v| v / pivot).collect();
        for i in 0..self.m {
            if i == slot {
                continue;
            }
            let factor = w[i];
            if factor != 0.0 {
                for k in 0..self.m {
                    self.binv[i][k] -= factor * pivot_row[k];
                }
            }
        }
        self.binv[slot] = pivot_row;
        Ok(())
    }

    /// Rebuilds `binv` from the basis columns by Gauss-Jordan elimination
    /// with partial pivoting.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let mut a: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let mut row: Vec<f64> = self.basis.iter().map(|&j| self.cols[j][i]).collect();
                row.extend((0..m).map(|k| if k == i { 1.0 } else { 0.0 }));
                row
            })
            .collect();
        for col in 0..m {
            let mut piv = col;
            for r in col + 1..m {
                if a[r][col].abs() > a[piv][col].abs() {
                    piv = r;
                }
            }
            let magnitude = a[piv][col].abs();
            if magnitude < PIVOT_MIN {
                return Err(LpError::NumericalBreakdown { magnitude });
            }
            a.swap(col, piv);
            let scale = a[col][col];
            for k in 0..2 * m {
                a[col][k] /= scale;
            }
            for r in 0..m {
                if r != col && a[r][col] != 0.0 {
                    let f = a[r][col];
                    for k in 0..2 * m {
                        a[r][k] -= f * a[col][k];
                    }
                }
            }
        }
        for i in 0..m {
            for k in 0..m {
                self.binv[i][k] = a[i][m + k];
            }
        }
        Ok(())
    }

    /// `x_B = B^-1 (b - N x_N)`, refreshing basic values from the nonbasics.
    fn recompute_basic_values(&mut self) {
        let mut resid = self.rhs.clone();
        for j in 0..self.n_total {
            if matches!(self.state[j], State::Basic(_)) {
                continue;
            }
            let v = self.value[j];
            if v != 0.0 {
                let col = &self.cols[j];
                for i in 0..self.m {
                    resid[i] -= col[i] * v;
                }
            }
        }
        for slot in 0..self.m {
            let mut acc = 0.0;
            for k in 0..self.m {
                acc += self.binv[slot][k] * resid[k];
            }
            self.value[self.basis[slot]] = acc;
        }
    }

    fn duals_full(&self, cost: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        for slot in 0..self.m {
            let c = cost[self.basis[slot]];
            if c != 0.0 {
                let row = &self.binv[slot];
                for i in 0..self.m {
                    y[i] += c * row[i];
                }
            }
        }
        y
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        self.duals_full(cost)
    }
}

enum Ratio {
    /// The entering variable traverses its whole span without blocking.
    BoundFlip(f64),
    Leave { slot: usize, t: f64, to_upper: bool },
    Unbounded,
}

fn initial_state(lower: f64, upper: f64) -> (State, f64) {
    if lower.is_finite() {
        (State::AtLower, lower)
    } else if upper.is_finite() {
        (State::AtUpper, upper)
    } else {
        (State::FreeZero, 0.0)
    }
}

fn identity(m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|i| (0..m).map(|k| if k == i { 1.0 } else { 0.0 }).collect())
        .collect()
}
