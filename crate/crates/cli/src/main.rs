mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use genperm_core::approx::{approximate, interpolate_parameters, InterpolationSchedule};
use genperm_core::convergence::{converge, ConvergenceOptions, ConvergenceReport, CSV_HEADER};
use genperm_core::fixtures::random_selection;
use genperm_core::patterns::{
    density_in_permuton_mc, density_in_selection, density_in_step_permuton_exact_with_budget,
    DEFAULT_ENUMERATION_BUDGET,
};
use genperm_core::sampling::{
    concentration_experiment_with_budget, random_subpermuton, sample_points, DEFAULT_SQUARE_BUDGET,
};
use genperm_core::{
    d_inf, d_square, embed_selection, extract_selection, rng, Error, Exact, PatternDensityResult, Permutation, Scalar,
    StepPermuton, Witness,
};
use serde::Serialize;

use crate::io::{read_measure, read_permuton, read_selection, read_value, CliResult, Failure, Measure, Sink};

/// Generalized permutons: embeddings, pattern densities, distances, sampling
/// and certified approximation.
#[derive(Parser)]
#[command(name = "genperm", version)]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Slack used when validating input measures.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tolerance: f64,

    /// Write the result to a file instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Uniform,
    Planted,
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    Inf,
    Square,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    /// Exact enumeration, falling back to Monte Carlo over budget.
    Auto,
    Exact,
    Mc,
}

#[derive(Subcommand)]
enum Command {
    /// Draw an ordered selection from V_(n,m).
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value = "uniform")]
        model: Model,
        /// Target permuton for the planted model.
        #[arg(long)]
        target: Option<PathBuf>,
        /// Grid parameter N of the planted model (n = N k).
        #[arg(long = "N")]
        big_n: Option<usize>,
        /// Grid parameter M of the planted model (m = M k).
        #[arg(long = "M")]
        big_m: Option<usize>,
    },
    /// Embed an ordered selection as a step permuton.
    Embed { selection: PathBuf },
    /// Recover the ordered selection of an embedded step permuton.
    Extract { permuton: PathBuf },
    /// Pattern densities in a selection or a step permuton.
    Density {
        input: PathBuf,
        /// Patterns such as "(1,3,2)"; repeatable.
        #[arg(long)]
        tau: Vec<Permutation>,
        /// Use every pattern of this size.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum, default_value = "auto")]
        method: Method,
        /// Monte Carlo draws.
        #[arg(long, default_value_t = 1 << 20)]
        samples: u64,
        /// Cap on cell multisets for exact enumeration.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
        budget: u128,
    },
    /// Distance between two measures.
    Dist {
        #[arg(long, value_enum, default_value = "inf")]
        metric: Metric,
        a: PathBuf,
        b: PathBuf,
    },
    /// Sample the random pattern mu^(k), or with --measure the subpermuton sigma(k, mu).
    Sample {
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        measure: bool,
    },
    /// Repeated d_inf(mu, sigma(k, mu)) against the 4 k^(-1/4) threshold.
    Concentrate {
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        /// Skip d_square when Q^2 P exceeds this.
        #[arg(long, default_value_t = DEFAULT_SQUARE_BUDGET)]
        square_budget: u128,
    },
    /// Certified (Nk, Mk)-permutation approximating a target with lambda = M/N.
    Approximate {
        target: PathBuf,
        #[arg(long = "N")]
        big_n: usize,
        #[arg(long = "M")]
        big_m: usize,
        #[arg(long)]
        k: usize,
    },
    /// Intermediate boards from beta_(k+1) down to W_(Nk, Mk).
    Interpolate {
        beta: PathBuf,
        #[arg(long = "N")]
        big_n: usize,
        #[arg(long = "M")]
        big_m: usize,
    },
    /// Convergence diagnostics for a sequence of selections.
    Converge {
        #[arg(long)]
        target: PathBuf,
        #[arg(long, default_value_t = 3)]
        max_k: usize,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
        budget: u128,
        #[arg(required = false)]
        sequence: Vec<PathBuf>,
    },
    /// Convert a JSON convergence report to CSV.
    Export { report: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(io::EXIT_PARAMETER) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("genperm: {failure}");
            ExitCode::from(failure.code)
        }
    }
}

fn format_or(cli_format: Option<Format>, default: Format) -> Format {
    cli_format.unwrap_or(default)
}

fn json_only(format: Option<Format>, command: &str) -> CliResult<()> {
    match format {
        Some(Format::Csv) => Err(Failure::parameter(format!("{command} has no CSV output"))),
        _ => Ok(()),
    }
}

fn check_valid(mu: &StepPermuton, tolerance: f64) -> CliResult<()> {
    let report = mu.validate_with_tolerance(&tolerance);
    if report.is_valid() {
        Ok(())
    } else {
        let detail = serde_json::to_string(&report.violations).unwrap_or_default();
        Err(Failure::validation(format!("not a lambda-permuton: {detail}")))
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let sink = Sink::new(cli.output);
    let (seed, format, tolerance) = (cli.seed, cli.format, cli.tolerance);
    match cli.command {
        Command::Generate { n, m, model, target, big_n, big_m } => {
            json_only(format, "generate")?;
            if m == 0 || m > n {
                return Err(Failure::parameter(format!("need 1 <= m <= n, got n = {n}, m = {m}")));
            }
            let nu = match model {
                Model::Uniform => random_selection(n, m, &mut rng::stream(seed, 0)),
                Model::Planted => {
                    let path = target.ok_or_else(|| Failure::parameter("the planted model needs --target"))?;
                    let mu = read_permuton(&path)?;
                    check_valid(&mu, tolerance)?;
                    let (big_n, big_m) = match (big_n, big_m) {
                        (Some(a), Some(b)) => (a, b),
                        (None, None) => (n, m),
                        _ => return Err(Failure::parameter("give both --N and --M or neither")),
                    };
                    if big_n == 0 || n % big_n != 0 || big_m * (n / big_n) != m {
                        return Err(Failure::parameter(format!(
                            "(n, m) = ({n}, {m}) is not (N k, M k) for N = {big_n}, M = {big_m}"
                        )));
                    }
                    approximate(&mu, big_n, big_m, n / big_n, seed)?.selection
                }
            };
            sink.json(&nu)
        }
        Command::Embed { selection } => {
            json_only(format, "embed")?;
            sink.json(&embed_selection::<f64>(&read_selection(&selection)?))
        }
        Command::Extract { permuton } => {
            json_only(format, "extract")?;
            sink.json(&extract_selection(&read_permuton(&permuton)?)?)
        }
        Command::Density { input, tau, k, method, samples, budget } => {
            let patterns = match (tau.is_empty(), k) {
                (false, None) => tau,
                (true, Some(k)) if k >= 1 => Permutation::all(k),
                _ => return Err(Failure::parameter("give either --tau (repeatable) or --k")),
            };
            let results = densities(read_measure(&input)?, &patterns, method, samples, budget, seed)?;
            match format_or(format, Format::Json) {
                Format::Json => sink.json(&results),
                Format::Csv => {
                    let rows: Vec<_> = results
                        .iter()
                        .map(|r| (r.tau.to_string(), r.value, r.method, r.std_error, r.sample_count))
                        .collect();
                    sink.csv(&["tau", "value", "method", "std_error", "samples"], &rows)
                }
            }
        }
        Command::Dist { metric, a, b } => {
            let (a, b) = (read_permuton(&a)?, read_permuton(&b)?);
            let result = match metric {
                Metric::Inf => d_inf(&a, &b),
                Metric::Square => d_square(&a, &b),
            };
            match format_or(format, Format::Json) {
                Format::Json => sink.json(&result),
                Format::Csv => {
                    let corners = match result.witness {
                        Witness::Point { x, y } => vec![x, y],
                        Witness::Rectangle { x1, x2, y1, y2 } => vec![x1, x2, y1, y2],
                    };
                    let row = (result.value, corners.iter().map(f64::to_string).collect::<Vec<_>>().join(" "));
                    sink.csv(&["value", "witness"], &[row])
                }
            }
        }
        Command::Sample { input, k, measure } => {
            let mu = read_permuton(&input)?;
            if measure {
                json_only(format, "sample --measure")?;
                return sink.json(&random_subpermuton(&mu, k, seed)?);
            }
            let batch = sample_points(&mu, k, seed)?;
            let pattern = genperm_core::patterns::pattern_of_points(&batch.points)?;
            match format_or(format, Format::Json) {
                Format::Json => sink.json(&SampleOutput {
                    pattern,
                    seed,
                    resample_count: batch.resample_count,
                    points: batch.points,
                }),
                Format::Csv => {
                    let rows: Vec<_> = pattern.values().iter().enumerate().map(|(i, v)| (i + 1, *v)).collect();
                    sink.csv(&["position", "value"], &rows)
                }
            }
        }
        Command::Concentrate { input, k, trials, square_budget } => {
            let mu = read_permuton(&input)?;
            let report = concentration_experiment_with_budget(&mu, k, trials, seed, square_budget)?;
            match format_or(format, Format::Csv) {
                Format::Json => sink.json(&report),
                Format::Csv => {
                    let rows: Vec<_> = report
                        .trials
                        .iter()
                        .map(|t| (t.trial, t.d_inf, t.d_square, report.threshold_inf, report.threshold_square))
                        .collect();
                    sink.csv(&["trial", "d_inf", "d_square", "threshold_inf", "threshold_square"], &rows)
                }
            }
        }
        Command::Approximate { target, big_n, big_m, k } => {
            json_only(format, "approximate")?;
            let mu = read_permuton(&target)?;
            check_valid(&mu, tolerance)?;
            sink.json(&approximate(&mu, big_n, big_m, k, seed)?)
        }
        Command::Interpolate { beta, big_n, big_m } => {
            let nu = read_selection(&beta)?;
            let schedule = InterpolationSchedule::for_board(nu.n(), nu.m(), big_n, big_m)?;
            let steps = interpolate_parameters(&embed_selection::<Exact>(&nu), schedule)?;
            let steps: Vec<StepOutput> = steps
                .into_iter()
                .enumerate()
                .map(|(i, s)| StepOutput {
                    step: i + 1,
                    phase: s.phase,
                    rows: s.rows,
                    columns: s.columns,
                    selection: s.selection,
                    step_distance: s.step_distance.to_f64(),
                    step_bound: s.step_bound.to_f64(),
                    distance_from_start: s.distance_from_start.to_f64(),
                })
                .collect();
            match format_or(format, Format::Json) {
                Format::Json => sink.json(&steps),
                Format::Csv => {
                    let rows: Vec<_> = steps
                        .iter()
                        .map(|s| {
                            (s.step, s.phase, s.rows, s.columns, s.step_distance, s.step_bound, s.distance_from_start)
                        })
                        .collect();
                    sink.csv(
                        &["step", "phase", "rows", "columns", "step_distance", "step_bound", "distance_from_start"],
                        &rows,
                    )
                }
            }
        }
        Command::Converge { target, max_k, budget, sequence } => {
            let mu = read_permuton(&target)?;
            let nus = sequence.iter().map(|p| read_selection(p)).collect::<CliResult<Vec<_>>>()?;
            let options = ConvergenceOptions { max_k, budget, seed, ..Default::default() };
            let report = converge(&nus, &mu, &options)?;
            emit_report(&sink, &report, format_or(format, Format::Json))
        }
        Command::Export { report } => {
            let report: ConvergenceReport = read_value(&report)?;
            emit_report(&sink, &report, format_or(format, Format::Csv))
        }
    }
}

fn emit_report(sink: &Sink, report: &ConvergenceReport, format: Format) -> CliResult<()> {
    match format {
        Format::Json => sink.json(report),
        Format::Csv => sink.csv(&CSV_HEADER, &report.rows()),
    }
}

fn densities(
    input: Measure,
    patterns: &[Permutation],
    method: Method,
    samples: u64,
    budget: u128,
    seed: u64,
) -> CliResult<Vec<PatternDensityResult>> {
    let mut out = Vec::with_capacity(patterns.len());
    for (i, tau) in patterns.iter().enumerate() {
        let result = match &input {
            Measure::Selection(nu) => density_in_selection::<f64>(tau, nu)?,
            Measure::Permuton(mu) => {
                let mc = || density_in_permuton_mc(tau, mu, samples, rng::trial_seed(seed, i as u64));
                match method {
                    Method::Mc => mc()?,
                    Method::Exact => density_in_step_permuton_exact_with_budget(tau, mu, budget)?,
                    Method::Auto => match density_in_step_permuton_exact_with_budget(tau, mu, budget) {
                        Err(Error::Resource { .. }) => mc()?,
                        other => other?,
                    },
                }
            }
        };
        out.push(result);
    }
    Ok(out)
}

#[derive(Serialize)]
struct SampleOutput {
    pattern: Permutation,
    seed: u64,
    resample_count: u64,
    points: Vec<(f64, f64)>,
}

#[derive(Serialize)]
struct StepOutput {
    step: usize,
    phase: genperm_core::approx::InterpolationPhase,
    rows: usize,
    columns: usize,
    selection: genperm_core::OrderedSelection,
    step_distance: f64,
    step_bound: f64,
    distance_from_start: f64,
}
