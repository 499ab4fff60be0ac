use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use compopt::experiment::{run_benchmark, sweep, write_rows, BenchConfig, BenchMode, SweepAxis};
use compopt::flownet::{network_from_json, netflow_with, IncidenceStorage};
use compopt::freevect::norm_inf;
use compopt::morphisms::gad;
use compopt::problems::SaddleObjective;
use compopt::suite::{coherence_suite, naturality_suite, CoherenceKind, SolverKind, SuiteConfig, SuiteReport};
use compopt::uwd::validate_json;
use compopt::{mix64, Uwd};

#[derive(Parser)]
#[command(name = "compopt", version, about = "Compose optimization problems over wiring diagrams and solve them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Standard vs hierarchical dual decomposition on three glued random networks.
    Bench(BenchArgs),
    /// Solve one flow network by dual ascent and print the flows as JSON.
    Solve(SolveArgs),
    /// Lint a diagram or network JSON file.
    Validate(ValidateArgs),
    /// Run the randomized naturality and coherence suites.
    Naturality(NaturalityArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Standard,
    Hierarchical,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepArg {
    /// Nodes per subgraph 10..=150 at the given --p.
    Nodes,
    /// Edge probability 0.1..=1.0 at the given --nodes.
    P,
}

#[derive(clap::Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Vertices in each of the three networks.
    #[arg(long, default_value_t = 40)]
    nodes: usize,
    /// Edge probability.
    #[arg(long, default_value_t = 0.2)]
    p: f64,
    #[arg(long, default_value_t = 0.01)]
    gamma: f64,
    /// Outer dual iterations.
    #[arg(long, default_value_t = 10)]
    iters: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    mode: ModeArg,
    /// CSV destination; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Step subsystems concurrently in the hierarchical pipeline.
    #[arg(long)]
    parallel: bool,
    /// Timed repetitions per pipeline (minimum reported).
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// Sweep one parameter instead of a single run.
    #[arg(long, value_enum)]
    sweep: Option<SweepArg>,
    /// Seeds per configuration, derived from --seed.
    #[arg(long, default_value_t = 1)]
    seeds: usize,
}

#[derive(clap::Args)]
struct SolveArgs {
    /// Network JSON file.
    network: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    gamma: f64,
    /// Iteration cap.
    #[arg(long, default_value_t = 1_000_000)]
    iters: usize,
    /// Stop once ‖Ax − b‖∞ falls below this.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FileKind {
    Auto,
    Uwd,
    Network,
}

#[derive(clap::Args)]
struct ValidateArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value_t = FileKind::Auto)]
    kind: FileKind,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    Gd,
    Gad,
    PdSubg,
    Coherence,
    All,
}

#[derive(clap::Args)]
struct NaturalityArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    suite: SuiteArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    instances: usize,
    #[arg(long, default_value_t = 100)]
    iters: usize,
    #[arg(long, default_value_t = 0.02)]
    gamma: f64,
    /// Trajectory tolerance (coherence uses 1e-10 relative).
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Bench(a) => bench(a),
        Command::Solve(a) => solve(a),
        Command::Validate(a) => validate(a),
        Command::Naturality(a) => naturality(a),
    }
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn bench(a: BenchArgs) -> Result<ExitCode> {
    if a.seeds == 0 {
        bail!("--seeds must be at least 1");
    }
    let base = BenchConfig {
        seed: a.seed,
        nodes_per_subgraph: a.nodes,
        edge_prob: a.p,
        gamma: a.gamma,
        outer_iters: a.iters,
        mode: match a.mode {
            ModeArg::Standard => BenchMode::Standard,
            ModeArg::Hierarchical => BenchMode::Hierarchical,
            ModeArg::Both => BenchMode::Both,
        },
        output_path: None,
        parallel: a.parallel,
        repeats: a.repeats,
    };
    let seeds: Vec<u64> = if a.seeds == 1 {
        vec![a.seed]
    } else {
        (0..a.seeds as u64).map(|i| mix64(a.seed, i)).collect()
    };
    let configs = match a.sweep {
        None => seeds.iter().map(|&seed| BenchConfig { seed, ..base.clone() }).collect(),
        Some(SweepArg::Nodes) => sweep(&base, SweepAxis::Nodes, &seeds),
        Some(SweepArg::P) => sweep(&base, SweepAxis::EdgeProb, &seeds),
    };
    let mut rows = Vec::new();
    for cfg in &configs {
        rows.extend(run_benchmark(cfg)?);
    }
    write_rows(sink(a.out.as_deref())?, &rows)?;
    Ok(ExitCode::SUCCESS)
}

fn solve(a: SolveArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(&a.network).with_context(|| format!("reading {}", a.network.display()))?;
    let g = network_from_json(&text).with_context(|| format!("parsing {}", a.network.display()))?;
    let (q, dual) = netflow_with(&g, IncidenceStorage::Dense);
    let step = gad(&SaddleObjective::concave(q.payload), a.gamma)?;
    let mut lambda = vec![0.0; g.domain_size];
    let mut iterations = 0;
    let mut point = dual.at(&lambda)?;
    while norm_inf(&point.supergradient) > a.tol && iterations < a.iters {
        lambda = step.apply(&lambda);
        iterations += 1;
        point = dual.at(&lambda)?;
    }
    let residual = norm_inf(&point.supergradient);
    let report = serde_json::json!({
        "flows": point.flows,
        "lambda": lambda,
        "cost": g.payload.cost(&point.flows),
        "dual_value": point.value,
        "residual": residual,
        "iterations": iterations,
        "converged": residual <= a.tol,
    });
    let mut w = sink(a.out.as_deref())?;
    serde_json::to_writer_pretty(&mut w, &report)?;
    writeln!(w)?;
    Ok(if residual <= a.tol {
        ExitCode::SUCCESS
    } else {
        eprintln!("not converged after {iterations} iterations (residual {residual:e})");
        ExitCode::from(1)
    })
}

fn validate(a: ValidateArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(&a.file).with_context(|| format!("reading {}", a.file.display()))?;
    let kind = match a.kind {
        FileKind::Auto => {
            let v: serde_json::Value = serde_json::from_str(&text).context("not JSON")?;
            if v.get("boxes").is_some() {
                FileKind::Uwd
            } else if v.get("src").is_some() {
                FileKind::Network
            } else {
                bail!("cannot tell whether {} is a diagram or a network; pass --kind", a.file.display());
            }
        }
        k => k,
    };
    let problems = match kind {
        FileKind::Uwd => {
            let mut p = validate_json(&text);
            if p.is_empty() {
                if let Err(e) = Uwd::from_json(&text) {
                    p.push(e.to_string());
                }
            }
            p
        }
        FileKind::Network => network_from_json(&text).err().map(|e| e.to_string()).into_iter().collect(),
        FileKind::Auto => unreachable!("resolved above"),
    };
    if problems.is_empty() {
        println!("{}: ok", a.file.display());
        Ok(ExitCode::SUCCESS)
    } else {
        for p in &problems {
            println!("{}: {p}", a.file.display());
        }
        Ok(ExitCode::from(1))
    }
}

fn print_report(r: &SuiteReport) {
    println!(
        "{} {:<8} instances={} max_discrepancy={:.3e} tol={:e}{}",
        if r.pass() { "PASS" } else { "FAIL" },
        r.name,
        r.instances,
        r.max_discrepancy,
        r.tolerance,
        match (r.pass(), r.worst_instance) {
            (false, Some(i)) => format!(" worst_instance={i}"),
            _ => String::new(),
        }
    );
    for (i, e) in &r.errors {
        println!("  instance {i}: {e}");
    }
}

fn naturality(a: NaturalityArgs) -> Result<ExitCode> {
    let cfg = SuiteConfig {
        instances: a.instances,
        steps: a.iters,
        gamma: a.gamma,
        seed: a.seed,
        tolerance: a.tol,
    };
    let mut reports = Vec::new();
    let solvers = [
        (SuiteArg::Gd, SolverKind::Gd),
        (SuiteArg::Gad, SolverKind::Gad),
        (SuiteArg::PdSubg, SolverKind::PdSubg),
    ];
    for (arg, kind) in solvers {
        if a.suite == arg || a.suite == SuiteArg::All {
            reports.push(naturality_suite(kind, &cfg));
        }
    }
    if matches!(a.suite, SuiteArg::Coherence | SuiteArg::All) {
        for kind in CoherenceKind::ALL {
            reports.push(coherence_suite(kind, a.instances, 20, a.seed, 1e-10));
        }
    }
    reports.iter().for_each(print_report);
    Ok(if reports.iter().all(SuiteReport::pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
