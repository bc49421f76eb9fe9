//! `msopt` — solve, score and generate multi-time-scale instances.
//!
//! Exit codes: 0 converged/ok, 1 usage or input errors, 2 iteration limit,
//! 3 infeasible or unbounded. Summaries are JSON on stdout (or `--out`);
//! convergence logs are CSV via `--log`. `MSOPT_LOG_LEVEL` (error, info,
//! debug) controls diagnostics on stderr.

use clap::{error::ErrorKind, Parser, Subcommand, ValueEnum};
use log::{debug, info};
use msopt::benders::{run_benders, BendersError, BendersOptions};
use msopt::dantzig_wolfe::{run_dw, DwError, DwOptions};
use msopt::io::{instance_to_json, read_instance, write_instance, Instance, IoError};
use msopt::lagrangian::{run_lagrangian, LagrangianError, LagrangianOptions, MultiplierMethod};
use msopt::lp::{solve_lp, LpStatus, SolveOptions};
use msopt::metrics::{compute_capacity_report, compute_ev_eev_vss, compute_vmm, MetricsError};
use msopt::model::{
    build_fullspace, fullspace_layout, generate_random_instance, lower_capacity,
    AlgorithmResult, ConvergenceLog, MultiScaleInstance, RandomDims, RunStatus,
};
use msopt::pamso::{run_pamso, DfoBackend, PamsoOptions};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "msopt", version, about = "Multi-time-scale optimization toolkit")]
struct Cli {
    /// Cap worker threads for concurrent subproblem solves.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance file with a chosen algorithm.
    Solve {
        #[arg(long, value_enum)]
        algorithm: Algorithm,
        #[arg(long)]
        instance: PathBuf,
        /// Relative convergence tolerance.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
        /// Epigraph bound for Benders; artificial cost for Dantzig-Wolfe.
        #[arg(long, default_value_t = 1e7)]
        big_m: f64,
        /// Multiplier box for the Lagrangian cutting-plane master.
        #[arg(long, default_value_t = 1e6)]
        nu_box: f64,
        /// Derivative-free tuner backend for pamso.
        #[arg(long, value_enum, default_value_t = Dfo::PatternSearch)]
        dfo: Dfo,
        /// Evaluation budget for pamso.
        #[arg(long, default_value_t = 200)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the summary JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the per-iteration convergence CSV here.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Compute VMM/VSS quality metrics for an instance file.
    Metrics {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Report::All)]
        report: Report,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a seeded random complete-recourse instance file.
    Generate {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2)]
        n_x: usize,
        #[arg(long, default_value_t = 3)]
        n_y: usize,
        #[arg(long, default_value_t = 3)]
        m_sub: usize,
        #[arg(long, default_value_t = 3)]
        n_subperiods: usize,
    },
    /// Lower a capacity instance file to a multiscale instance file.
    Convert {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Algorithm {
    Fullspace,
    Benders,
    LagrangianCp,
    LagrangianSg,
    Dw,
    Pamso,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Dfo {
    PatternSearch,
    Genetic,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Report {
    Vmm,
    Vss,
    All,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::new().filter_or("MSOPT_LOG_LEVEL", "error"),
    )
    .format_timestamp(None)
    .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("msopt: cannot configure {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let code = match cli.command {
        Command::Solve {
            algorithm,
            instance,
            tol,
            max_iter,
            big_m,
            nu_box,
            dfo,
            budget,
            seed,
            out,
            log,
        } => cmd_solve(SolveArgs {
            algorithm,
            instance,
            tol,
            max_iter,
            big_m,
            nu_box,
            dfo,
            budget,
            seed,
            out,
            log,
        }),
        Command::Metrics {
            instance,
            report,
            out,
        } => cmd_metrics(&instance, report, out.as_deref()),
        Command::Generate {
            seed,
            out,
            n_x,
            n_y,
            m_sub,
            n_subperiods,
        } => cmd_generate(seed, &out, n_x, n_y, m_sub, n_subperiods),
        Command::Convert { instance, out } => cmd_convert(&instance, &out),
    };
    ExitCode::from(code)
}

struct SolveArgs {
    algorithm: Algorithm,
    instance: PathBuf,
    tol: f64,
    max_iter: usize,
    big_m: f64,
    nu_box: f64,
    dfo: Dfo,
    budget: usize,
    seed: u64,
    out: Option<PathBuf>,
    log: Option<PathBuf>,
}

fn status_code(status: RunStatus) -> u8 {
    match status {
        RunStatus::Converged => 0,
        RunStatus::IterationLimit => 2,
        RunStatus::Infeasible | RunStatus::Unbounded => 3,
    }
}

fn fail(message: impl std::fmt::Display) -> u8 {
    eprintln!("msopt: {message}");
    1
}

fn load(path: &PathBuf) -> Result<Instance, IoError> {
    let inst = read_instance(path)?;
    info!("loaded {}", path.display());
    Ok(inst)
}

fn cmd_solve(args: SolveArgs) -> u8 {
    let instance = match load(&args.instance) {
        Ok(inst) => inst,
        Err(e) => return fail(e),
    };
    let started = Instant::now();
    let result = match args.algorithm {
        Algorithm::Pamso => {
            let cap = match instance.as_capacity() {
                Some(cap) => cap.clone(),
                None => return fail("pamso requires a capacity instance"),
            };
            let opts = PamsoOptions {
                dfo: match args.dfo {
                    Dfo::PatternSearch => DfoBackend::PatternSearch,
                    Dfo::Genetic => DfoBackend::Genetic,
                },
                bounds: None,
                budget: args.budget,
                seed: args.seed,
            };
            match run_pamso(&cap, &opts) {
                Ok(result) => result,
                Err(e) => return fail(e),
            }
        }
        _ => {
            let inst = match instance.into_multiscale() {
                Ok(inst) => inst,
                Err(e) => return fail(e),
            };
            match run_multiscale(&args, &inst) {
                Ok(result) => result,
                Err(code) => return code,
            }
        }
    };
    debug!(
        "{:?} finished in {} ms with status {:?}",
        args.algorithm,
        started.elapsed().as_millis(),
        result.status
    );
    for note in &result.log.notes {
        info!("{note}");
    }
    let mut summary = serde_json::to_string_pretty(&result.summary()).expect("summary serializes");
    summary.push('\n');
    if let Some(path) = &args.out {
        if let Err(e) = std::fs::write(path, &summary) {
            return fail(e);
        }
    } else {
        print!("{summary}");
    }
    if let Some(path) = &args.log {
        if let Err(e) = std::fs::write(path, result.log.to_csv()) {
            return fail(e);
        }
    }
    status_code(result.status)
}

fn run_multiscale(args: &SolveArgs, inst: &MultiScaleInstance) -> Result<AlgorithmResult, u8> {
    match args.algorithm {
        Algorithm::Fullspace => solve_fullspace(inst).map_err(fail),
        Algorithm::Benders => {
            let opts = BendersOptions {
                tol: args.tol,
                max_iter: args.max_iter,
                big_m: args.big_m,
            };
            run_benders(inst, &opts).map_err(|e| match e {
                BendersError::SubproblemUnbounded { .. } => {
                    eprintln!("msopt: {e}");
                    3
                }
                other => fail(other),
            })
        }
        Algorithm::LagrangianCp | Algorithm::LagrangianSg => {
            let opts = LagrangianOptions {
                method: if args.algorithm == Algorithm::LagrangianCp {
                    MultiplierMethod::CuttingPlane
                } else {
                    MultiplierMethod::Subgradient
                },
                tol: args.tol,
                max_iter: args.max_iter,
                nu_box: args.nu_box,
            };
            run_lagrangian(inst, &opts).map_err(|e| match e {
                LagrangianError::SubproblemUnbounded { .. } => {
                    eprintln!("msopt: {e}");
                    3
                }
                other => fail(other),
            })
        }
        Algorithm::Dw => {
            let opts = DwOptions {
                tol: args.tol,
                max_iter: args.max_iter,
                artificial_cost: args.big_m,
                x_upper: 1e6,
            };
            run_dw(inst, &opts).map_err(|e| match e {
                DwError::ArtificialsNonzero => fail(e),
                other => fail(other),
            })
        }
        Algorithm::Pamso => unreachable!("handled by the caller"),
    }
}

fn solve_fullspace(inst: &MultiScaleInstance) -> Result<AlgorithmResult, msopt::lp::LpError> {
    let started = Instant::now();
    let lp = build_fullspace(inst).expect("instance validated on load");
    let sol = solve_lp(&lp, &SolveOptions::default())?;
    let mut log = ConvergenceLog::default();
    let result = match sol.status {
        LpStatus::Optimal => {
            let layout = fullspace_layout(inst);
            let primal = sol.primal();
            let x = primal[..inst.num_x()].to_vec();
            let y = inst
                .subperiods
                .iter()
                .enumerate()
                .map(|(s, sp)| {
                    primal[layout.y_offsets[s]..layout.y_offsets[s] + sp.num_y()].to_vec()
                })
                .collect();
            let objective = sol.objective();
            log.push(1, objective, objective, started.elapsed().as_millis() as u64);
            AlgorithmResult {
                status: RunStatus::Converged,
                x,
                y,
                objective,
                lower_bound: objective,
                upper_bound: objective,
                log,
            }
        }
        LpStatus::Infeasible => AlgorithmResult {
            status: RunStatus::Infeasible,
            x: Vec::new(),
            y: Vec::new(),
            objective: f64::INFINITY,
            lower_bound: f64::INFINITY,
            upper_bound: f64::INFINITY,
            log,
        },
        LpStatus::Unbounded => AlgorithmResult {
            status: RunStatus::Unbounded,
            x: Vec::new(),
            y: Vec::new(),
            objective: f64::NEG_INFINITY,
            lower_bound: f64::NEG_INFINITY,
            upper_bound: f64::NEG_INFINITY,
            log,
        },
    };
    Ok(result)
}

fn cmd_metrics(instance: &PathBuf, report: Report, out: Option<&std::path::Path>) -> u8 {
    let loaded = match load(instance) {
        Ok(inst) => inst,
        Err(e) => return fail(e),
    };
    let computed = match (&loaded, report) {
        (Instance::Capacity(cap), Report::Vmm) => compute_vmm(cap),
        (Instance::Capacity(cap), Report::All) => compute_capacity_report(cap),
        (Instance::Capacity(cap), Report::Vss) => {
            lower_capacity(cap)
                .map_err(MetricsError::from)
                .and_then(|inst| compute_ev_eev_vss(&inst))
        }
        (Instance::MultiScale(_), Report::Vmm) => {
            return fail("vmm requires a high-level builder; capacity instances provide one")
        }
        (Instance::MultiScale(inst), _) => compute_ev_eev_vss(inst),
    };
    let report = match computed {
        Ok(report) => report,
        Err(MetricsError::InfeasibleInstance) | Err(MetricsError::UnboundedInstance) => {
            eprintln!("msopt: instance has no finite optimum to compare against");
            return 3;
        }
        Err(e) => return fail(e),
    };
    let mut text = report.to_json();
    text.push('\n');
    if let Some(path) = out {
        if let Err(e) = std::fs::write(path, &text) {
            return fail(e);
        }
    } else {
        print!("{text}");
    }
    0
}

fn cmd_generate(seed: u64, out: &PathBuf, n_x: usize, n_y: usize, m_sub: usize, n_sub: usize) -> u8 {
    let dims = RandomDims {
        n_x,
        n_y,
        m_sub,
        n_subperiods: n_sub,
    };
    let inst = match generate_random_instance(seed, &dims) {
        Ok(inst) => inst,
        Err(e) => return fail(e),
    };
    match write_instance(&Instance::MultiScale(inst), out) {
        Ok(()) => {
            info!("wrote {}", out.display());
            0
        }
        Err(e) => fail(e),
    }
}

fn cmd_convert(instance: &PathBuf, out: &PathBuf) -> u8 {
    let loaded = match load(instance) {
        Ok(inst) => inst,
        Err(e) => return fail(e),
    };
    let cap = match loaded.as_capacity() {
        Some(cap) => cap,
        None => return fail("convert expects a capacity instance"),
    };
    let lowered = match lower_capacity(cap) {
        Ok(inst) => inst,
        Err(e) => return fail(e),
    };
    match instance_to_json(&Instance::MultiScale(lowered)) {
        Ok(text) => match std::fs::write(out, text) {
            Ok(()) => 0,
            Err(e) => fail(e),
        },
        Err(e) => fail(e),
    }
}
