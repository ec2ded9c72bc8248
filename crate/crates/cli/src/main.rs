//! `manivar`: denoise, decompose and generate manifold-valued images.

mod commands;
mod solve;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use manivar::Error;

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

#[derive(Parser)]
#[command(name = "manivar", version, about = "Variational restoration of manifold-valued images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Restore an image and write the result.
    Denoise(solve::SolveArgs),
    /// Like `denoise`, and also write the model components.
    Decompose(solve::SolveArgs),
    /// Corrupt an image with seeded noise.
    Noise(commands::NoiseArgs),
    /// Print the mean squared geodesic distance of two images.
    Mse(commands::MseArgs),
    /// Write a synthetic test image.
    Synth(commands::SynthArgs),
    /// Finite-difference checks of all model gradients.
    Gradcheck(commands::GradcheckArgs),
    /// CSV of pixel values or of a run log.
    Plotdata(commands::PlotArgs),
}

#[derive(Args, Clone, Debug)]
pub struct ThreadArgs {
    /// Worker threads for pixel loops (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Exit status classes.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or unusable input files.
    Usage(String),
    /// The computation itself broke down.
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e.root() {
            Error::CutLocus(_)
            | Error::ConjugatePoint(_)
            | Error::AmbiguousMidpoint
            | Error::ZeroVector
            | Error::Ladder { .. } => Failure::Numerical(msg),
            _ => Failure::Usage(msg),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

pub type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Denoise(a) => solve::run(&a, false),
        Command::Decompose(a) => solve::run(&a, true),
        Command::Noise(a) => commands::noise(&a),
        Command::Mse(a) => commands::mse(&a),
        Command::Synth(a) => commands::synth(&a),
        Command::Gradcheck(a) => commands::gradcheck(&a),
        Command::Plotdata(a) => commands::plotdata(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(2)
        }
    }
}

pub fn set_threads(t: &ThreadArgs) -> CliResult<()> {
    if let Some(n) = t.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(())
}
