use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pflab::experiments::{registry, run_experiment, selectors, RunConfig};
use pflab::strict_local::rho_curve;
use pflab::{asian, Error};

/// Checks closed-form results on last passage times, past-future
/// martingales and Black–Scholes identities against Monte Carlo and
/// quadrature. Exit status: 0 all checks pass, 1 a check failed, 2 usage.
#[derive(Parser, Debug)]
#[command(name = "pflab", version, about, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Experiment to run, or `all`.
    #[arg(long, short = 'e', env = "PFLAB_EXPERIMENT", default_value = "all")]
    experiment: String,
    #[arg(long, env = "PFLAB_SEED", default_value_t = 42)]
    seed: u64,
    /// Monte Carlo paths per check (at least 100).
    #[arg(long, env = "PFLAB_PATHS", default_value_t = 100_000)]
    paths: usize,
    /// Cells per unit time for discretized paths (a power of two).
    #[arg(long, env = "PFLAB_GRID", default_value_t = 512)]
    grid: usize,
    /// Scales every k-sigma gate.
    #[arg(long, env = "PFLAB_TOL_MULTIPLIER", default_value_t = 1.0)]
    tol_multiplier: f64,
    /// Output file; stdout when absent.
    #[arg(long, short = 'o', env = "PFLAB_OUT")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, env = "PFLAB_FORMAT", default_value_t = Format::Json)]
    format: Format,
    /// Worker threads; results do not depend on it.
    #[arg(long, env = "PFLAB_THREADS")]
    threads: Option<usize>,
    /// Do not print per-check lines to stderr.
    #[arg(long, short = 'q')]
    quiet: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List experiment selectors.
    List,
    /// Write (u, rho(u), t, r(t)) on log-spaced t as CSV.
    RhoCurve {
        #[arg(long, default_value_t = 1e-4)]
        t_min: f64,
        #[arg(long, default_value_t = 400.0)]
        t_max: f64,
        #[arg(long, default_value_t = 400)]
        points: usize,
        #[arg(long, short = 'o')]
        out: Option<PathBuf>,
    },
    /// Write (t, a_1(t), ..., a_n(t)) by quadrature as CSV.
    AsianCurve {
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(1..=4))]
        n_max: u8,
        #[arg(long, default_value_t = 2.0)]
        t_max: f64,
        #[arg(long, default_value_t = 40)]
        points: usize,
        #[arg(long, short = 'o')]
        out: Option<PathBuf>,
    },
}

fn emit(out: Option<&PathBuf>, text: &str) -> io::Result<()> {
    match out {
        Some(p) => fs::write(p, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn run(args: RunArgs) -> ExitCode {
    if let Some(n) = args.threads {
        if n == 0 {
            return usage("--threads must be positive");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            return usage(e);
        }
    }
    let cfg = RunConfig {
        seed: args.seed,
        paths: args.paths,
        grid: args.grid,
        tol_multiplier: args.tol_multiplier,
    };
    let summary = match run_experiment(&args.experiment, &cfg) {
        Ok(s) => s,
        Err(e @ Error::UnknownExperiment(_)) => {
            return usage(format!("{e}; selectors: {}", selectors().join(", ")));
        }
        Err(e @ Error::Config(_)) => return usage(e),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if !args.quiet {
        for r in &summary.reports {
            eprintln!("{}", r.summary_line());
        }
    }
    eprintln!(
        "{}: {} passed, {} failed in {:.1}s",
        summary.experiment, summary.passed, summary.failed, summary.wall_time_secs
    );
    let text = match args.format {
        Format::Json => match summary.to_json() {
            Ok(mut s) => {
                s.push('\n');
                s
            }
            Err(e) => return usage(e),
        },
        Format::Csv => summary.to_csv(),
    };
    if let Err(e) = emit(args.out.as_ref(), &text) {
        return usage(format!("cannot write output: {e}"));
    }
    if summary.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn rho_csv(t_min: f64, t_max: f64, points: usize) -> pflab::Result<String> {
    let curve = rho_curve(t_min, t_max, points)?;
    let mut s = String::from("u,rho,t,r\n");
    for p in &curve {
        s.push_str(&format!("{},{},{},{}\n", p.u, p.rho, p.t, p.r));
    }
    let peak = curve
        .iter()
        .max_by(|a, b| a.r.total_cmp(&b.r))
        .expect("at least two points");
    eprintln!(
        "{} points, r peaks at t={:.4} with r={:.6}",
        curve.len(),
        peak.t,
        peak.r
    );
    Ok(s)
}

fn asian_csv(n_max: usize, t_max: f64, points: usize) -> pflab::Result<String> {
    let rows = asian::a_n_curve(n_max, t_max, points)?;
    let mut s = String::from("t");
    for n in 1..=n_max {
        s.push_str(&format!(",a_{n}"));
    }
    s.push('\n');
    for (t, vals) in rows {
        s.push_str(&t.to_string());
        for v in vals {
            s.push_str(&format!(",{v}"));
        }
        s.push('\n');
    }
    Ok(s)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (text, out) = match cli.command {
        None => return run(cli.run),
        Some(Command::List) => {
            let mut s = String::from("all\tevery experiment below, in order\n");
            for e in registry() {
                s.push_str(&format!("{}\t{}\n", e.name, e.about));
            }
            (Ok(s), None)
        }
        Some(Command::RhoCurve {
            t_min,
            t_max,
            points,
            out,
        }) => (rho_csv(t_min, t_max, points), out),
        Some(Command::AsianCurve {
            n_max,
            t_max,
            points,
            out,
        }) => (asian_csv(usize::from(n_max), t_max, points), out),
    };
    match text {
        Ok(t) => match emit(out.as_ref(), &t) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => usage(format!("cannot write output: {e}")),
        },
        Err(e) => usage(e),
    }
}
