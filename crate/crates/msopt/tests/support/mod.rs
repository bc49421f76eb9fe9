//! Shared test apparatus: spec fixtures, seeded LP generators, and a
//! brute-force vertex-enumeration oracle that is independent of the simplex
//! implementation it checks.

#![allow(dead_code)]

use msopt::lp::{Bounds, LinearProgram, RowSense};
use msopt::model::{CapacityInstance, MultiScaleInstance, Subperiod, SubperiodRow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One subperiod: min x + 3 y, x + y >= 1.
pub fn tiny1() -> MultiScaleInstance {
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

/// Tiny-1 plus a second subperiod (q = 0.5, x + y >= 2); optimum 1.5 at x=1.
pub fn tiny2() -> MultiScaleInstance {
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

/// One subperiod whose block is infeasible for x < 1: y >= 1 and y <= x.
/// Exercises Benders feasibility cuts; optimum 1 at x=1.
pub fn tiny3() -> MultiScaleInstance {
    MultiScaleInstance {
        name: "tiny-3".into(),
        description: String::new(),
        first_stage_costs: vec![1.0],
        first_stage_rows: Vec::new(),
        x_bounds: vec![Bounds::NONNEGATIVE],
        subperiods: vec![Subperiod {
            weight: 1.0,
            costs: vec![0.0],
            rows: vec![
                SubperiodRow {
                    x_coeffs: Vec::new(),
                    y_coeffs: vec![(0, 1.0)],
                    sense: RowSense::Ge,
                    rhs: 1.0,
                },
                SubperiodRow {
                    x_coeffs: vec![(0, -1.0)],
                    y_coeffs: vec![(0, 1.0)],
                    sense: RowSense::Le,
                    rhs: 0.0,
                },
            ],
            y_bounds: vec![Bounds::NONNEGATIVE],
        }],
    }
}

/// One generator, one part per day, two days; MM = 7 at x = 2,
/// aggregated-model MPSS = 10.5 at x = 1.5.
pub fn micro_capacity() -> CapacityInstance {
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

/// Seeded random capacity instance (availability in [0,1], nonnegative data).
pub fn random_capacity(seed: u64) -> CapacityInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xCA9A);
    let j_n = rng.gen_range(1..=3usize);
    let i_n = rng.gen_range(1..=3usize);
    let s_n = rng.gen_range(1..=3usize);
    let availability = (0..s_n)
        .map(|_| {
            (0..i_n)
                .map(|_| (0..j_n).map(|_| rng.gen_range(0.0..1.0)).collect())
                .collect()
        })
        .collect();
    CapacityInstance {
        generators: j_n,
        parts_per_day: i_n,
        days: s_n,
        availability,
        fixed_cost: (0..j_n).map(|_| rng.gen_range(1.0..10.0)).collect(),
        demand: (0..s_n)
            .map(|_| (0..i_n).map(|_| rng.gen_range(0.0..10.0)).collect())
            .collect(),
        op_cost: (0..i_n)
            .map(|_| (0..j_n).map(|_| rng.gen_range(1.0..5.0)).collect())
            .collect(),
        purchase_cost: (0..s_n).map(|_| rng.gen_range(5.0..20.0)).collect(),
        capacity_limit: None,
    }
}

/// Random LP that is feasible (a margin-interior point is built in) and
/// bounded (every variable is boxed). n <= 3 variables, <= 5 rows.
pub fn random_feasible_bounded_lp(seed: u64) -> LinearProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=3usize);
    let m = rng.gen_range(0..=5usize);
    let mut lp = LinearProgram::new((0..n).map(|_| rng.gen_range(-5.0..5.0)).collect());
    let mut x0 = vec![0.0; n];
    for j in 0..n {
        let lo = rng.gen_range(-5.0..0.0);
        let hi = lo + rng.gen_range(0.5..8.0);
        lp.set_bounds(j, Bounds::range(lo, hi));
        x0[j] = lo + rng.gen_range(0.1..0.9) * (hi - lo);
    }
    for _ in 0..m {
        let coeffs: Vec<(usize, f64)> = (0..n).map(|j| (j, rng.gen_range(-3.0..3.0))).collect();
        let at_x0: f64 = coeffs.iter().map(|&(j, a)| a * x0[j]).sum();
        let sense = match rng.gen_range(0..3) {
            0 => RowSense::Le,
            1 => RowSense::Ge,
            _ => RowSense::Eq,
        };
        let rhs = match sense {
            RowSense::Le => at_x0 + rng.gen_range(0.05..3.0),
            RowSense::Ge => at_x0 - rng.gen_range(0.05..3.0),
            RowSense::Eq => at_x0,
        };
        lp.add_row(coeffs, sense, rhs);
    }
    lp
}

/// Random LP made infeasible by one row demanding more than the box allows.
pub fn random_infeasible_lp(seed: u64) -> LinearProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xFEED);
    let mut lp = random_feasible_bounded_lp(seed);
    let n = lp.num_vars();
    let coeffs: Vec<(usize, f64)> = (0..n)
        .map(|j| {
            let mut a: f64 = rng.gen_range(-2.0..2.0);
            if a.abs() < 0.2 {
                a = 1.0;
            }
            (j, a)
        })
        .collect();
    let sup: f64 = coeffs
        .iter()
        .map(|&(j, a)| {
            let b = lp.bounds[j];
            (a * b.lower).max(a * b.upper)
        })
        .sum();
    lp.add_row(coeffs, RowSense::Ge, sup + rng.gen_range(0.5..2.0));
    lp
}

/// Random LP with a cost-improving free direction: the last variable is
/// unbounded above with negative cost and appears in no row.
pub fn random_unbounded_lp(seed: u64) -> LinearProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xBEEF);
    let mut lp = random_feasible_bounded_lp(seed);
    lp.costs.push(-rng.gen_range(0.5..2.0));
    lp.bounds.push(Bounds::NONNEGATIVE);
    lp
}

/// Solves the square system `a x = b` by Gaussian elimination with partial
/// pivoting; `None` when near-singular.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for k in col..n {
                        a[r][k] -= f * a[col][k];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn feasible(lp: &LinearProgram, x: &[f64], tol: f64) -> bool {
    for (j, b) in lp.bounds.iter().enumerate() {
        if x[j] < b.lower - tol || x[j] > b.upper + tol {
            return false;
        }
    }
    for row in &lp.rows {
        let v = row.lhs(x) - row.rhs;
        let ok = match row.sense {
            RowSense::Le => v <= tol,
            RowSense::Ge => v >= -tol,
            RowSense::Eq => v.abs() <= tol,
        };
        if !ok {
            return false;
        }
    }
    true
}

/// Brute-force oracle: enumerates every intersection of `n` constraints
/// (rows taken as equalities plus finite bounds), keeps the feasible ones,
/// and returns the minimum objective. `None` means no feasible vertex, which
/// for a fully boxed LP means infeasible. Only sensible for `n <= 3`.
pub fn vertex_enumeration_minimum(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_vars();
    // Candidate tight sets: each row as an equality, each finite bound.
    let mut candidates: Vec<(Vec<f64>, f64)> = Vec::new();
    for row in &lp.rows {
        let mut dense = vec![0.0; n];
        for &(j, a) in &row.coeffs {
            dense[j] += a;
        }
        candidates.push((dense, row.rhs));
    }
    for (j, b) in lp.bounds.iter().enumerate() {
        for bound in [b.lower, b.upper] {
            if bound.is_finite() {
                let mut dense = vec![0.0; n];
                dense[j] = 1.0;
                candidates.push((dense, bound));
            }
        }
    }
    let mut best: Option<f64> = None;
    let k = candidates.len();
    let mut pick = vec![0usize; n];
    // Iterate over all strictly increasing index tuples of length n.
    fn visit(
        lp: &LinearProgram,
        candidates: &[(Vec<f64>, f64)],
        pick: &mut Vec<usize>,
        depth: usize,
        start: usize,
        best: &mut Option<f64>,
    ) {
        let n = lp.num_vars();
        if depth == n {
            let a: Vec<Vec<f64>> = pick.iter().map(|&i| candidates[i].0.clone()).collect();
            let b: Vec<f64> = pick.iter().map(|&i| candidates[i].1).collect();
            if let Some(x) = gauss_solve(a, b) {
                if feasible(lp, &x, 1e-7) {
                    let obj = lp.objective_at(&x);
                    *best = Some(match *best {
                        Some(cur) => cur.min(obj),
                        None => obj,
                    });
                }
            }
            return;
        }
        for i in start..candidates.len() {
            pick[depth] = i;
            visit(lp, candidates, pick, depth + 1, i + 1, best);
        }
    }
    if k >= n {
        visit(lp, &candidates, &mut pick, 0, 0, &mut best);
    }
    best
}
