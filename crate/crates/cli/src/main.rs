use std::path::PathBuf;
use std::process::ExitCode;

use bopo_cli::commands;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bopo", version, about = "Ground states of the zero-mass Schrödinger–Bopp–Podolsky system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fixed-ε ground state.
    Solve { config: PathBuf },
    /// Continuation of the ground state towards ε = 0.
    Continue {
        config: PathBuf,
        /// Restart after the last completed ε in the output directory's checkpoint.
        #[arg(long)]
        resume: bool,
    },
    /// Property suites: kernel, energy, inequalities, functionals or all.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// K, C, Y and derivatives on log-spaced radii, as CSV on stdout.
    KernelTable {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        rmin: f64,
        #[arg(long)]
        rmax: f64,
        #[arg(long)]
        n: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { commands::EXIT_CONFIG } else { commands::EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = match cli.command {
        Command::Solve { config } => commands::cmd_solve(&config),
        Command::Continue { config, resume } => commands::cmd_continue(&config, resume),
        Command::Verify { suite, seed } => commands::cmd_verify(&suite, seed),
        Command::KernelTable { a, rmin, rmax, n } => commands::cmd_kernel_table(a, rmin, rmax, n),
    };
    ExitCode::from(code as u8)
}
