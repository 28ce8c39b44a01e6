//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 when the computation completes but the
//! answer is negative (divergent or indeterminate integral, uncertified
//! exhaustion, failed probe or self-test), 1 on errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::barrier::{
    check_integrability, compute_barrier, compute_k, supersolution_margins, BarrierError, Classification,
    DEFAULT_SLACK_FACTOR,
};
use crate::exhaustion::{probe_solution, solve_entire, ExhaustionConfig, ExhaustionError, ProbeStatus};
use crate::io::config::{load_config, ConfigError, Format, RunConfig};
use crate::io::output::{barrier_csv, eigen_csv, solution_csv, write_json, write_text, OutputError, SolveJson};
use crate::io::svg::{line_plot, Series};
use crate::manufactured::Manufactured;
use crate::model::{majorant, validate_problem, MajorantError, ValidationReport};
use crate::radial::{choose_epsilon, first_eigenpair, RadialError, RadialGrid};

const CONFIG_HELP: &str = concat!(
    "Config file (unknown keys are errors):\n\n",
    "  [problem]  N, gamma, a, p, q (required; p, q, phi are expressions in r or numbers)\n",
    "             phi (majorant of p, optional), p_radial (default true)\n",
    "  [solver]   h, radii | r0 + levels, cauchy_tol, tail_tol, newton_tol, max_iter,\n",
    "             quad_tol, eigen_tol\n",
    "  [output]   dir (default \"out\"), formats (any of \"csv\", \"json\", \"svg\")",
);

#[derive(Debug, Parser)]
#[command(
    name = "efsolve",
    version,
    about = "Positive entire solutions of -Δu + q|∇u|^a = p u^(-γ) in R^N",
    long_about = "Positive entire solutions of -Δu + q(x)|∇u|^a = p(x)u^(-γ) in R^N (N >= 3) that \
                  vanish at infinity, computed by exhausting R^N with balls bracketed between an \
                  eigenfunction subsolution and an explicit radial supersolution.\n\n\
                  Exit codes: 0 success, 2 negative answer (divergent integral, uncertified run, \
                  failed probe or self-test), 1 error.",
    after_long_help = CONFIG_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Run configuration ([problem], [solver], [output] sections).
    config: PathBuf,
    /// Output directory; overrides `dir` in [output].
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify ∫₀^∞ rΦ(r) dr and print its estimate.
    Check {
        #[command(flatten)]
        common: Common,
    },
    /// Compute K, c and the barrier; write r,w,v,margin to barrier.csv.
    Barrier {
        #[command(flatten)]
        common: Common,
        /// Ball radius for the sampled barrier.
        #[arg(long, default_value_t = 40.0)]
        radius: f64,
        /// Grid spacing; defaults to `h` in [solver].
        #[arg(long)]
        h: Option<f64>,
    },
    /// First Dirichlet eigenpair on a ball; write r,phi1 to eigen.csv.
    Eigen {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        radius: f64,
        /// Grid spacing; defaults to `h` in [solver].
        #[arg(long)]
        h: Option<f64>,
    },
    /// Exhaustion by balls; write solution.csv (r,u,v), report.json and
    /// optionally solution.svg.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Solve once per listed value, concurrently, e.g. `gamma=0.5,1,2`
        /// or `a=1,2`. Files get a `-<key>-<value>` suffix.
        #[arg(long, value_name = "KEY=V1,V2,...")]
        sweep: Option<String>,
    },
    /// Manufactured-solution self-test with u*(r) = (1+r²)^(-1/2).
    Verify {
        #[arg(long, default_value_t = 3)]
        dimension: usize,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        /// Constant gradient coefficient.
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        #[arg(long, default_value_t = 2.0)]
        a: f64,
        /// Ball radius of the refinement study.
        #[arg(long, default_value_t = 20.0)]
        radius: f64,
        /// Coarse spacing; the study also solves at h/2.
        #[arg(long, default_value_t = 0.02)]
        h: f64,
        /// Minimum observed order.
        #[arg(long, default_value_t = 1.7)]
        min_order: f64,
        /// Maximum error of the exhaustion limit on [0, 5].
        #[arg(long, default_value_t = 5e-3)]
        max_error: f64,
    },
    /// Re-solve the final ball from two starts and compare.
    Probe {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error(transparent)]
    Validation(#[from] ValidationReport),
    #[error(transparent)]
    Majorant(#[from] MajorantError),
    #[error(transparent)]
    Barrier(#[from] BarrierError),
    #[error(transparent)]
    Radial(#[from] RadialError),
    #[error(transparent)]
    Exhaustion(#[from] ExhaustionError),
    #[error("invalid sweep `{0}`: expected gamma=V1,V2,... or a=V1,V2,...")]
    Sweep(String),
}

impl CliError {
    /// A divergent majorant is a negative answer, not a failure.
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Barrier(BarrierError::NotConvergent(_))
            | CliError::Exhaustion(ExhaustionError::Barrier(BarrierError::NotConvergent(_))) => 2,
            _ => 1,
        }
    }
}

type Outcome = Result<bool, CliError>;

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(true) => 0,
        Ok(false) => 2,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Check { common } => check(&common),
        Command::Barrier { common, radius, h } => barrier(&common, radius, h),
        Command::Eigen { common, radius, h } => eigen(&common, radius, h),
        Command::Solve { common, sweep } => solve(&common, sweep.as_deref()),
        Command::Verify { dimension, gamma, q, a, radius, h, min_order, max_error } => {
            verify(Manufactured::new(dimension, gamma, q, a), radius, h, min_order, max_error)
        }
        Command::Probe { common } => probe(&common),
    }
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let mut config = load_config(&common.config)?;
    if let Some(out) = &common.out {
        config.output.dir = out.clone();
    }
    Ok(config)
}

fn check(common: &Common) -> Outcome {
    let config = load(common)?;
    let problem = validate_problem(config.problem()?)?;
    let phi = majorant(&problem)?;
    let verdict = check_integrability(&phi, config.solver.quad_tol)?;
    let label = match verdict.classification {
        Classification::Convergent => "convergent",
        Classification::Divergent => "divergent",
        Classification::Indeterminate => "indeterminate",
    };
    println!("classification: {label}");
    println!("integral_r_phi: {:.12e}", verdict.value_estimate);
    println!("relative_change: {:.3e}", verdict.error_estimate);
    println!("tail_radius: {}", verdict.tail_bound_used);
    Ok(verdict.classification == Classification::Convergent)
}

fn grid_for(radius: f64, h: Option<f64>, config: &RunConfig) -> Result<RadialGrid, CliError> {
    Ok(RadialGrid::with_spacing(radius, h.unwrap_or(config.solver.h))?)
}

fn barrier(common: &Common, radius: f64, h: Option<f64>) -> Outcome {
    let config = load(common)?;
    let problem = validate_problem(config.problem()?)?;
    let phi = majorant(&problem)?;
    let k = compute_k(&phi, problem.dimension, config.solver.quad_tol)?;
    let grid = grid_for(radius, h, &config)?;
    let data = compute_barrier(&phi, problem.dimension, problem.gamma, k.reduced, grid)?;
    let report = supersolution_margins(&data, &phi, DEFAULT_SLACK_FACTOR)?;
    println!("K_double: {:.12e}", k.double);
    println!("K_reduced: {:.12e}", k.reduced);
    println!("c: {:.12e}", data.c);
    println!("v_at_radius: {:.12e}", data.v.values[grid.last()]);
    println!("worst_margin: {:.6e} at r = {}", report.worst_margin, grid.node(report.worst_index));
    println!("supersolution: {}", if report.passed() { "verified" } else { "violated" });
    let out = &config.output;
    if out.wants(Format::Csv) {
        write_text(&out.dir.join("barrier.csv"), &barrier_csv(&data, &report)?)?;
    }
    if out.wants(Format::Json) {
        #[derive(Serialize)]
        struct BarrierJson<'a> {
            k: &'a crate::barrier::KValues,
            c: f64,
            radius: f64,
            h: f64,
            supersolution: &'a crate::barrier::SupersolutionReport,
        }
        let json = BarrierJson { k: &k, c: data.c, radius, h: grid.h(), supersolution: &report };
        write_json(&out.dir.join("barrier.json"), &json)?;
    }
    Ok(report.passed())
}

fn eigen(common: &Common, radius: f64, h: Option<f64>) -> Outcome {
    let config = load(common)?;
    let problem = validate_problem(config.problem()?)?;
    let grid = grid_for(radius, h, &config)?;
    let eig = first_eigenpair(grid, problem.dimension, config.solver.eigen_tol)?;
    let epsilon = choose_epsilon(&problem, &eig)?;
    println!("lambda1: {:.12e}", eig.lambda1);
    println!("epsilon: {epsilon:.6e}");
    println!("iterations: {}", eig.iterations);
    if config.output.wants(Format::Csv) {
        write_text(&config.output.dir.join("eigen.csv"), &eigen_csv(&eig)?)?;
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SweepKey {
    Gamma,
    A,
}

fn parse_sweep(text: &str) -> Result<(SweepKey, Vec<f64>), CliError> {
    let bad = || CliError::Sweep(text.to_string());
    let (key, values) = text.split_once('=').ok_or_else(bad)?;
    let key = match key.trim() {
        "gamma" => SweepKey::Gamma,
        "a" => SweepKey::A,
        _ => return Err(bad()),
    };
    let values =
        values.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(bad());
    }
    Ok((key, values))
}

fn solve(common: &Common, sweep: Option<&str>) -> Outcome {
    let config = load(common)?;
    let Some(sweep) = sweep else {
        return solve_one(&config, "");
    };
    let (key, values) = parse_sweep(sweep)?;
    let runs: Vec<(RunConfig, String)> = values
        .iter()
        .map(|&value| {
            let mut c = config.clone();
            let name = match key {
                SweepKey::Gamma => {
                    c.problem.gamma = value;
                    "gamma"
                }
                SweepKey::A => {
                    c.problem.a = value;
                    "a"
                }
            };
            (c, format!("-{name}-{value}"))
        })
        .collect();
    let outcomes: Vec<Outcome> = std::thread::scope(|s| {
        let handles: Vec<_> = runs.iter().map(|(c, suffix)| s.spawn(move || solve_one(c, suffix))).collect();
        handles.into_iter().map(|h| h.join().expect("solve thread panicked")).collect()
    });
    let mut all_certified = true;
    for outcome in outcomes {
        all_certified &= outcome?;
    }
    Ok(all_certified)
}

fn solve_one(config: &RunConfig, suffix: &str) -> Outcome {
    let problem = config.problem()?;
    let exhaustion = config.solver.exhaustion();
    let solution = solve_entire(&problem, &exhaustion)?;
    let tag = if suffix.is_empty() { String::new() } else { format!("[{}] ", &suffix[1..]) };
    println!(
        "{tag}certified: {} (radii {:?}, last gap {:.3e}, v(R) = {:.3e})",
        solution.certified,
        solution.radii_used,
        solution.successive_gaps.last().copied().unwrap_or(f64::NAN),
        solution.tail_value
    );
    println!("{tag}u(0): {:.12e}", solution.profile.values[0]);
    let out = &config.output;
    let file = |stem: &str, ext: &str| out.dir.join(format!("{stem}{suffix}.{ext}"));
    if out.wants(Format::Csv) {
        write_text(&file("solution", "csv"), &solution_csv(&solution)?)?;
    }
    if out.wants(Format::Json) {
        write_json(&file("report", "json"), &SolveJson::new(&solution))?;
    }
    if out.wants(Format::Svg) {
        let r: Vec<f64> = solution.profile.grid.nodes().collect();
        let svg = line_plot(
            "u and v",
            &[
                Series { label: "u", x: &r, y: &solution.profile.values },
                Series { label: "v", x: &r, y: &solution.barrier.values },
            ],
            Some(4.0 * solution.window_radius),
        );
        write_text(&file("solution", "svg"), &svg)?;
    }
    Ok(solution.certified)
}

fn verify(m: Manufactured, radius: f64, h: f64, min_order: f64, max_error: f64) -> Outcome {
    let defaults = ExhaustionConfig::default();
    let study = m.convergence_study(radius, h, defaults.newton_tol, defaults.max_iter)?;
    for (h, e) in study.spacings.iter().zip(&study.max_errors) {
        println!("h = {h}: max |u - u*| = {e:.6e}");
    }
    println!("observed_order: {:.4}", study.observed_order);
    let solution = solve_entire(&m.problem(), &defaults)?;
    let window = RadialGrid::with_spacing(solution.window_radius, defaults.h)?;
    let window_error = m.max_error(&solution.profile.resample(window));
    println!(
        "exhaustion: certified = {}, max |u - u*| on [0, {}] = {window_error:.6e}",
        solution.certified, solution.window_radius
    );
    let passed = study.observed_order >= min_order && solution.certified && window_error <= max_error;
    println!("verify: {}", if passed { "passed" } else { "failed" });
    Ok(passed)
}

fn probe(common: &Common) -> Outcome {
    let config = load(common)?;
    let exhaustion = config.solver.exhaustion();
    let solution = solve_entire(&config.problem()?, &exhaustion)?;
    let report = probe_solution(&solution, &exhaustion)?;
    let status = match report.status {
        ProbeStatus::Passed => "passed",
        ProbeStatus::Failed => "failed",
        ProbeStatus::NotApplicable => "not-applicable (run not certified)",
    };
    println!("probe: {status}");
    if let Some(d) = report.max_difference {
        println!("max_difference: {d:.6e} (threshold {:.1e}) on R = {}", report.threshold, report.radius);
    }
    if config.output.wants(Format::Json) {
        write_json(&config.output.dir.join("probe.json"), &report)?;
    }
    Ok(report.status == ProbeStatus::Passed)
}

/// Path helper for tests and callers that want the default file names.
pub fn solution_paths(dir: &Path, suffix: &str) -> [PathBuf; 3] {
    ["csv", "json", "svg"].map(|ext| {
        let stem = if ext == "json" { "report" } else { "solution" };
        dir.join(format!("{stem}{suffix}.{ext}"))
    })
}
