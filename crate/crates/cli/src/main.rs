use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use conelab_cli::commands::{self, GeodesicArgs, RunOptions, SplitBase, SplitExample};
use conelab_cli::report::Report;
use conelab_cli::DslError;

#[derive(Parser, Debug)]
#[command(name = "conelab", version, about = "Numerical checks for cones, warped products and spinors")]
struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the default tolerance of every check.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Random seed; falls back to the manifest, then CONELAB_SEED, then 42.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Leave wall times out of the report.
    #[arg(long, global = true)]
    no_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the checks listed in a manifest.
    Check { manifest: PathBuf },
    /// Closed-form cone geodesic over a one-dimensional base against integration.
    #[command(allow_negative_numbers = true)]
    Geodesic {
        #[arg(long)]
        r0: f64,
        #[arg(long)]
        a: f64,
        /// Causal class of the base velocity: -1, 0 or 1.
        #[arg(long)]
        c: i32,
        #[arg(long, default_value_t = 1.0)]
        l: f64,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, default_value_t = 50.0)]
        horizon: f64,
        /// Write the trajectory table to this file.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        csv_samples: usize,
    },
    /// Holonomy algebra sample and invariant subspaces of a manifest's metric.
    #[command(allow_negative_numbers = true)]
    Holonomy {
        manifest: PathBuf,
        #[arg(long, default_value_t = 60)]
        probes: usize,
        /// Comma-separated base point; random inside the chart when omitted.
        #[arg(long, value_delimiter = ',')]
        point: Option<Vec<f64>>,
    },
    /// Parallel field, potential and splitting of a stock example.
    Split {
        #[arg(long, value_enum)]
        example: ExampleArg,
        #[arg(long, value_enum, default_value = "torus")]
        base: BaseArg,
    },
    /// Clifford representation and Dirac current checks.
    Spin {
        /// `r,s` with r time-like and s space-like directions.
        #[arg(long, value_parser = parse_signature)]
        signature: (usize, usize),
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
    /// Candidate irreducible holonomy algebras of a cone.
    Berger {
        #[arg(long, value_parser = parse_signature)]
        signature: (usize, usize),
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExampleArg {
    Cosh,
    Horosphere,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BaseArg {
    Torus,
    Sphere,
}

fn parse_signature(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected `r,s`")?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}

fn run(cli: &Cli) -> Result<Report, DslError> {
    let opts = RunOptions {
        seed: cli.seed,
        tol: cli.tol,
        timing: !cli.no_timing,
    };
    match &cli.command {
        Command::Check { manifest } => commands::run_check(manifest, &opts),
        Command::Geodesic {
            r0,
            a,
            c,
            l,
            eps,
            horizon,
            csv,
            csv_samples,
        } => {
            let args = GeodesicArgs {
                r0: *r0,
                a: *a,
                c: *c,
                l: *l,
                eps: *eps,
                horizon: *horizon,
            };
            let report = commands::run_geodesic(&args, &opts)?;
            if let Some(path) = csv {
                let table = commands::geodesic_csv(&args, *csv_samples)?;
                std::fs::write(path, table)
                    .map_err(|e| conelab_cli::error::usage(format!("cannot write {}: {e}", path.display())))?;
            }
            Ok(report)
        }
        Command::Holonomy {
            manifest,
            probes,
            point,
        } => commands::run_holonomy(manifest, point.clone(), *probes, &opts),
        Command::Split { example, base } => {
            let example = match example {
                ExampleArg::Cosh => SplitExample::Cosh,
                ExampleArg::Horosphere => SplitExample::Horosphere,
            };
            let base = match base {
                BaseArg::Torus => SplitBase::Torus,
                BaseArg::Sphere => SplitBase::Sphere,
            };
            commands::run_split(example, base, &opts)
        }
        Command::Spin { signature, trials } => commands::run_spin(signature.0, signature.1, *trials, &opts),
        Command::Berger { signature } => commands::run_berger(signature.0, signature.1, &opts),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let json = report.to_json();
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &json) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{json}"),
    }
    ExitCode::from(report.exit_code() as u8)
}
