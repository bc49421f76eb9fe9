//! Parametric autotuning of the top-down approach.
//!
//! The aggregated high-level model systematically misjudges what the full
//! model can do with its capacity, so it gets tunable parameters: one
//! availability prefactor per generator plus a minimum-capacity floor. The
//! black-box function maps a parameter vector to the cost of fixing the
//! parameterized high-level model's decisions in the full model (the
//! "MBBF"); a derivative-free tuner then minimizes it. Evaluations whose
//! models turn out infeasible score the `1e10` sentinel.
//!
//! Two self-contained tuner backends are provided: a deterministic
//! coordinate pattern search and a seeded genetic algorithm with tournament
//! selection, arithmetic crossover and clipped Gaussian mutation. Both
//! evaluate the unit parameters first, so the tuned result never trails the
//! plain aggregated model.

use crate::lp::{self, LpError, LpStatus};
use crate::metrics::{compute_mm, INFEASIBLE_SENTINEL};
use crate::model::{
    aggregate_capacity_highlevel, build_fixed_x, fullspace_layout, lower_capacity,
    AlgorithmResult, CapacityInstance, ConvergenceLog, ModelError, MultiScaleInstance, RunStatus,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PamsoError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("instance is infeasible or unbounded; nothing to tune against")]
    BadInstance,
}

/// A tunable parameter vector with componentwise box bounds. For a capacity
/// instance the layout is `[rho_1..rho_J, rho_min]`: availability prefactors
/// per generator, then the minimum-capacity floor.
#[derive(Debug, Clone, PartialEq)]
pub struct PamsoParams {
    pub rho: Vec<f64>,
    pub bounds: Vec<(f64, f64)>,
}

impl PamsoParams {
    /// Unit parameters for a capacity instance: prefactors 1, floor 0, with
    /// the default ranges (prefactors in `[0, 1.5]`, floor up to the largest
    /// single-day demand).
    pub fn unit(cap: &CapacityInstance) -> Self {
        let mut rho = vec![1.0; cap.generators];
        rho.push(0.0);
        let mut bounds = vec![(0.0, 1.5); cap.generators];
        bounds.push((0.0, cap.max_daily_demand()));
        PamsoParams { rho, bounds }
    }

    pub fn with_rho(&self, rho: Vec<f64>) -> Self {
        PamsoParams {
            rho,
            bounds: self.bounds.clone(),
        }
    }

    pub fn clip(&self, mut rho: Vec<f64>) -> Vec<f64> {
        for (v, (lo, hi)) in rho.iter_mut().zip(&self.bounds) {
            *v = v.clamp(*lo, *hi);
        }
        rho
    }

    pub fn in_bounds(&self) -> bool {
        self.rho
            .iter()
            .zip(&self.bounds)
            .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }
}

/// One black-box evaluation.
#[derive(Debug, Clone)]
pub struct MbbfRecord {
    pub rho: PamsoParams,
    pub objective: f64,
    pub x: Vec<f64>,
    pub feasible: bool,
}

/// Evaluates the multi-time-scale black-box function: solve the
/// parameterized high-level model, fix its capacities in the full model,
/// return the full-model cost (or the sentinel when either stage is
/// infeasible).
pub fn evaluate_mbbf(cap: &CapacityInstance, rho: &PamsoParams) -> Result<MbbfRecord, PamsoError> {
    debug_assert!(rho.in_bounds(), "parameters outside their bounds");
    let j_n = cap.generators;
    let prefactors = &rho.rho[..j_n];
    let min_capacity = rho.rho[j_n];
    let sentinel = |rho: &PamsoParams| MbbfRecord {
        rho: rho.clone(),
        objective: INFEASIBLE_SENTINEL,
        x: Vec::new(),
        feasible: false,
    };
    let highlevel = aggregate_capacity_highlevel(cap, prefactors, min_capacity)?;
    let hl_sol = lp::solve(&highlevel)?;
    if hl_sol.status != LpStatus::Optimal {
        return Ok(sentinel(rho));
    }
    let x = hl_sol.primal()[..j_n].to_vec();
    let inst = lower_capacity(cap)?;
    let low_sol = lp::solve(&build_fixed_x(&inst, &x, true)?)?;
    if low_sol.status != LpStatus::Optimal {
        return Ok(sentinel(rho));
    }
    Ok(MbbfRecord {
        rho: rho.clone(),
        objective: low_sol.objective(),
        x,
        feasible: true,
    })
}

/// Best record plus the full evaluation sequence.
#[derive(Debug, Clone)]
pub struct TuneOutcome {
    pub best: MbbfRecord,
    pub trace: Vec<MbbfRecord>,
}

#[derive(Debug, Clone, Copy)]
pub struct PatternSearchOptions {
    pub budget: usize,
    pub init_step: f64,
    pub shrink: f64,
}

impl Default for PatternSearchOptions {
    fn default() -> Self {
        PatternSearchOptions {
            budget: 100,
            init_step: 0.25,
            shrink: 0.5,
        }
    }
}

/// Deterministic coordinate pattern search: poll `+/-step` on every
/// coordinate, move to the best improving probe, shrink the step when no
/// probe improves. Probes are clipped to the bounds; the start point is
/// evaluated first.
pub fn tune_pattern_search<F>(
    objective: F,
    start: &PamsoParams,
    opts: &PatternSearchOptions,
) -> Result<TuneOutcome, PamsoError>
where
    F: Fn(&PamsoParams) -> Result<MbbfRecord, PamsoError> + Sync,
{
    assert!(opts.budget >= 1, "budget must allow the start evaluation");
    let mut trace = Vec::with_capacity(opts.budget);
    let mut best = objective(start)?;
    trace.push(best.clone());
    let mut step = opts.init_step;
    let dim = start.rho.len();

    while trace.len() < opts.budget && step > 1e-12 {
        let mut probes: Vec<Vec<f64>> = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            for delta in [step, -step] {
                let mut rho = best.rho.rho.clone();
                rho[i] += delta;
                let rho = start.clip(rho);
                if rho != best.rho.rho {
                    probes.push(rho);
                }
            }
        }
        probes.truncate(opts.budget - trace.len());
        if probes.is_empty() {
            break;
        }
        let results: Vec<Result<MbbfRecord, PamsoError>> = probes
            .par_iter()
            .map(|rho| objective(&start.with_rho(rho.clone())))
            .collect();
        let mut poll_best: Option<MbbfRecord> = None;
        for r in results {
            let r = r?;
            trace.push(r.clone());
            if r.objective < poll_best.as_ref().map_or(f64::INFINITY, |b| b.objective) {
                poll_best = Some(r);
            }
        }
        match poll_best {
            Some(candidate) if candidate.objective < best.objective => best = candidate,
            _ => step *= opts.shrink,
        }
    }
    Ok(TuneOutcome { best, trace })
}

#[derive(Debug, Clone, Copy)]
pub struct GeneticOptions {
    pub pop_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    /// Mutation standard deviation as a fraction of each coordinate's range.
    pub mutation_sigma: f64,
    pub seed: u64,
}

impl Default for GeneticOptions {
    fn default() -> Self {
        GeneticOptions {
            pop_size: 20,
            generations: 30,
            tournament_size: 2,
            crossover_rate: 0.9,
            mutation_rate: 0.25,
            mutation_sigma: 0.1,
            seed: 0,
        }
    }
}

/// Winner of one tournament among `entrants` (indices into `fitness`):
/// smallest objective, earliest entrant on ties.
pub fn tournament_winner(fitness: &[f64], entrants: &[usize]) -> usize {
    let mut best = entrants[0];
    for &i in &entrants[1..] {
        if fitness[i] < fitness[best] {
            best = i;
        }
    }
    best
}

/// Seeded genetic algorithm: uniform initial population with `baseline`
/// injected as individual 0, tournament selection, arithmetic crossover,
/// clipped Gaussian mutation, generational replacement with a single elite.
pub fn tune_genetic<F>(
    objective: F,
    baseline: &PamsoParams,
    opts: &GeneticOptions,
) -> Result<TuneOutcome, PamsoError>
where
    F: Fn(&PamsoParams) -> Result<MbbfRecord, PamsoError> + Sync,
{
    assert!(opts.pop_size >= 2, "population needs at least two members");
    let dim = baseline.rho.len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut trace: Vec<MbbfRecord> = Vec::new();

    let mut population: Vec<Vec<f64>> = Vec::with_capacity(opts.pop_size);
    population.push(baseline.rho.clone());
    for _ in 1..opts.pop_size {
        population.push(
            baseline
                .bounds
                .iter()
                .map(|(lo, hi)| if hi > lo { rng.gen_range(*lo..*hi) } else { *lo })
                .collect(),
        );
    }

    let evaluate = |pop: &[Vec<f64>],
                    trace: &mut Vec<MbbfRecord>|
     -> Result<Vec<MbbfRecord>, PamsoError> {
        let results: Vec<Result<MbbfRecord, PamsoError>> = pop
            .par_iter()
            .map(|rho| objective(&baseline.with_rho(rho.clone())))
            .collect();
        let mut out = Vec::with_capacity(pop.len());
        for r in results {
            let r = r?;
            trace.push(r.clone());
            out.push(r);
        }
        Ok(out)
    };

    let mut records = evaluate(&population, &mut trace)?;
    let mut best = records
        .iter()
        .min_by(|a, b| a.objective.total_cmp(&b.objective))
        .expect("population is nonempty")
        .clone();

    for _ in 0..opts.generations {
        let fitness: Vec<f64> = records.iter().map(|r| r.objective).collect();
        let mut next: Vec<Vec<f64>> = Vec::with_capacity(opts.pop_size);
        next.push(best.rho.rho.clone());
        while next.len() < opts.pop_size {
            let mut pick = |rng: &mut ChaCha8Rng| -> usize {
                let entrants: Vec<usize> = (0..opts.tournament_size)
                    .map(|_| rng.gen_range(0..population.len()))
                    .collect();
                tournament_winner(&fitness, &entrants)
            };
            let p1 = population[pick(&mut rng)].clone();
            let p2 = population[pick(&mut rng)].clone();
            let mut child = if rng.gen_bool(opts.crossover_rate) {
                let w: f64 = rng.gen_range(0.0..1.0);
                p1.iter()
                    .zip(&p2)
                    .map(|(a, b)| w * a + (1.0 - w) * b)
                    .collect()
            } else {
                p1
            };
            for (k, v) in child.iter_mut().enumerate() {
                if rng.gen_bool(opts.mutation_rate) {
                    let (lo, hi) = baseline.bounds[k];
                    let sigma = opts.mutation_sigma * (hi - lo).max(1e-12);
                    let normal = Normal::new(0.0, sigma).expect("positive sigma");
                    *v += normal.sample(&mut rng);
                }
            }
            next.push(baseline.clip(child));
        }
        population = next;
        records = evaluate(&population, &mut trace)?;
        for r in &records {
            if r.objective < best.objective {
                best = r.clone();
            }
        }
    }
    Ok(TuneOutcome { best, trace })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfoBackend {
    PatternSearch,
    Genetic,
}

#[derive(Debug, Clone)]
pub struct PamsoOptions {
    pub dfo: DfoBackend,
    /// Componentwise bounds for `[rho_1..rho_J, rho_min]`; defaults to
    /// prefactors in `[0, 1.5]` and the floor up to the peak daily demand.
    pub bounds: Option<Vec<(f64, f64)>>,
    pub budget: usize,
    pub seed: u64,
}

impl Default for PamsoOptions {
    fn default() -> Self {
        PamsoOptions {
            dfo: DfoBackend::PatternSearch,
            bounds: None,
            budget: 200,
            seed: 0,
        }
    }
}

/// Autotunes the high-level model's parameters against the full model and
/// reports the best evaluation. The log records one pseudo-iteration per
/// evaluation with the best objective so far as the upper bound and the
/// full-model optimum as the lower bound.
pub fn run_pamso(
    cap: &CapacityInstance,
    opts: &PamsoOptions,
) -> Result<AlgorithmResult, PamsoError> {
    cap.validate()?;
    let start = Instant::now();
    let mut unit = PamsoParams::unit(cap);
    if let Some(bounds) = &opts.bounds {
        assert_eq!(
            bounds.len(),
            cap.generators + 1,
            "need one bound pair per prefactor plus the capacity floor"
        );
        unit.bounds = bounds.clone();
        unit.rho = unit.clip(unit.rho.clone());
    }
    let inst = lower_capacity(cap)?;
    let mm = match compute_mm(&inst) {
        Ok(v) => v,
        Err(_) => return Err(PamsoError::BadInstance),
    };

    let objective = |rho: &PamsoParams| evaluate_mbbf(cap, rho);
    let outcome = match opts.dfo {
        DfoBackend::PatternSearch => {
            let ps = PatternSearchOptions {
                budget: opts.budget,
                ..PatternSearchOptions::default()
            };
            tune_pattern_search(objective, &unit, &ps)?
        }
        DfoBackend::Genetic => {
            let pop_size = 20.min(opts.budget.max(2));
            let generations = opts.budget.saturating_sub(pop_size) / pop_size;
            let ga = GeneticOptions {
                pop_size,
                generations,
                seed: opts.seed,
                ..GeneticOptions::default()
            };
            tune_genetic(objective, &unit, &ga)?
        }
    };

    let mut log = ConvergenceLog::default();
    let mut best_so_far = f64::INFINITY;
    let elapsed = start.elapsed().as_millis() as u64;
    for (k, rec) in outcome.trace.iter().enumerate() {
        best_so_far = best_so_far.min(rec.objective);
        log.push(k + 1, mm, best_so_far, elapsed);
    }

    // Low-level decisions at the winning capacities, for the result body.
    let y = if outcome.best.feasible {
        let sol = lp::solve(&build_fixed_x(&inst, &outcome.best.x, true)?)?;
        if sol.status == LpStatus::Optimal {
            let layout = fullspace_layout(&inst);
            let primal = sol.primal();
            inst.subperiods
                .iter()
                .enumerate()
                .map(|(s, sp)| {
                    primal[layout.y_offsets[s]..layout.y_offsets[s] + sp.num_y()].to_vec()
                })
                .collect()
        } else {
            Vec::new()
        }
    } else {
        Vec::new()
    };

    Ok(AlgorithmResult {
        status: RunStatus::Converged,
        x: outcome.best.x.clone(),
        y,
        objective: outcome.best.objective,
        lower_bound: mm,
        upper_bound: outcome.best.objective,
        log,
    })
}

/// The multi-scale instance a capacity problem lowers to; exposed so callers
/// can cross-check PAMSO results against the other algorithms.
pub fn lowered(cap: &CapacityInstance) -> Result<MultiScaleInstance, PamsoError> {
    Ok(lower_capacity(cap)?)
}

#[cfg(test)]
mod tests {
    use super::*;

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

    fn quadratic(target: f64) -> impl Fn(&PamsoParams) -> Result<MbbfRecord, PamsoError> + Sync {
        move |p: &PamsoParams| {
            let v = p.rho[0] - target;
            Ok(MbbfRecord {
                rho: p.clone(),
                objective: v * v,
                x: Vec::new(),
                feasible: true,
            })
        }
    }

    fn scalar_params(start: f64) -> PamsoParams {
        PamsoParams {
            rho: vec![start],
            bounds: vec![(0.0, 1.5)],
        }
    }

    #[test]
    fn mbbf_unit_params_is_mpss() {
        let cap = micro_capacity();
        let rec = evaluate_mbbf(&cap, &PamsoParams::unit(&cap)).unwrap();
        assert!(rec.feasible);
        assert!((rec.objective - 10.5).abs() < 1e-9);
        assert!((rec.x[0] - 1.5).abs() < 1e-9);
    }

    #[test]
    fn mbbf_tuned_prefactor_reaches_mm() {
        let cap = micro_capacity();
        let unit = PamsoParams::unit(&cap);
        let rec = evaluate_mbbf(&cap, &unit.with_rho(vec![0.75, 0.0])).unwrap();
        assert!((rec.objective - 7.0).abs() < 1e-9);
        assert!((rec.x[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn mbbf_sentinel_on_infeasible_floor() {
        let mut cap = micro_capacity();
        cap.capacity_limit = Some(vec![1.0]);
        let unit = PamsoParams::unit(&cap);
        let rec = evaluate_mbbf(&cap, &unit.with_rho(vec![1.0, 1.5])).unwrap();
        assert!(!rec.feasible);
        assert_eq!(rec.objective, INFEASIBLE_SENTINEL);
    }

    #[test]
    fn pattern_search_finds_quadratic_minimum() {
        let opts = PatternSearchOptions {
            budget: 100,
            init_step: 0.25,
            shrink: 0.5,
        };
        let out = tune_pattern_search(quadratic(0.5), &scalar_params(0.0), &opts).unwrap();
        assert!((out.best.rho.rho[0] - 0.5).abs() <= 1e-2);
    }

    #[test]
    fn pattern_search_budget_one_is_start_only() {
        let opts = PatternSearchOptions {
            budget: 1,
            ..PatternSearchOptions::default()
        };
        let out = tune_pattern_search(quadratic(0.5), &scalar_params(0.0), &opts).unwrap();
        assert_eq!(out.trace.len(), 1);
        assert_eq!(out.best.rho.rho[0], 0.0);
    }

    #[test]
    fn tournament_selects_minima() {
        let fitness = [5.0, 3.0, 9.0, 7.0];
        assert_eq!(tournament_winner(&fitness, &[0, 1]), 1);
        assert_eq!(tournament_winner(&fitness, &[2, 3]), 3);
    }

    #[test]
    fn genetic_on_constant_landscape_is_flat() {
        let constant = |p: &PamsoParams| {
            Ok(MbbfRecord {
                rho: p.clone(),
                objective: 4.25,
                x: Vec::new(),
                feasible: true,
            })
        };
        let opts = GeneticOptions {
            pop_size: 6,
            generations: 3,
            seed: 7,
            ..GeneticOptions::default()
        };
        let out = tune_genetic(constant, &scalar_params(0.5), &opts).unwrap();
        assert_eq!(out.best.objective, 4.25);
        assert!(out.trace.iter().all(|r| r.objective == 4.25));
    }

    #[test]
    fn genetic_finds_quadratic_minimum() {
        let opts = GeneticOptions {
            pop_size: 20,
            generations: 30,
            seed: 0,
            ..GeneticOptions::default()
        };
        let out = tune_genetic(quadratic(0.5), &scalar_params(0.0), &opts).unwrap();
        assert!((out.best.rho.rho[0] - 0.5).abs() <= 5e-2);
        let again = tune_genetic(quadratic(0.5), &scalar_params(0.0), &opts).unwrap();
        assert_eq!(out.best.rho.rho, again.best.rho.rho);
        assert_eq!(out.trace.len(), again.trace.len());
    }

    #[test]
    fn pamso_pattern_search_reaches_mm_on_micro() {
        let result = run_pamso(&micro_capacity(), &PamsoOptions::default()).unwrap();
        assert!((result.objective - 7.0).abs() < 1e-6);
        assert!((result.x[0] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn pamso_budget_one_returns_baseline() {
        let opts = PamsoOptions {
            budget: 1,
            ..PamsoOptions::default()
        };
        let result = run_pamso(&micro_capacity(), &opts).unwrap();
        assert!((result.objective - 10.5).abs() < 1e-9);
    }

    #[test]
    fn both_backends_no_worse_than_baseline() {
        for dfo in [DfoBackend::PatternSearch, DfoBackend::Genetic] {
            let opts = PamsoOptions {
                dfo,
                budget: 60,
                ..PamsoOptions::default()
            };
            let result = run_pamso(&micro_capacity(), &opts).unwrap();
            assert!(result.objective <= 10.5 + 1e-9, "{dfo:?}");
        }
    }

    #[test]
    fn best_so_far_log_is_monotone() {
        let result = run_pamso(&micro_capacity(), &PamsoOptions::default()).unwrap();
        let ubs: Vec<f64> = result.log.entries.iter().map(|e| e.upper_bound).collect();
        for pair in ubs.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12);
        }
        assert!(result.log.entries.iter().all(|e| e.lower_bound == 7.0));
    }
}
