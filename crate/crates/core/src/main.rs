use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ldbem::cli::{cmd_mesh, cmd_run, MeshCommand, EXIT_CONFIG, EXIT_RUNTIME};
use ldbem::verify::run_suite;

#[derive(Parser)]
#[command(name = "ldbem", version, about = "Local domain BEM solver for the time-fractional Fisher-KPP equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a TOML configuration file.
    Run { config: PathBuf },
    /// Generate a mesh file.
    Mesh {
        #[command(subcommand)]
        generator: Generator,
    },
    /// Run a built-in verification suite.
    Verify { suite: String },
}

#[derive(Subcommand)]
enum Generator {
    /// Structured rectangle with tags left/right/bottom/top.
    Rectangle {
        #[arg(long)]
        nx: usize,
        #[arg(long)]
        ny: usize,
        #[arg(long, num_args = 2, default_values_t = [0.0, 1.0], allow_negative_numbers = true)]
        x_range: Vec<f64>,
        #[arg(long, num_args = 2, default_values_t = [0.0, 1.0], allow_negative_numbers = true)]
        y_range: Vec<f64>,
        out: PathBuf,
    },
    /// Structured annulus with tags inner/outer.
    Annulus {
        #[arg(long)]
        nr: usize,
        #[arg(long)]
        ntheta: usize,
        #[arg(long, default_value_t = 1.0)]
        r_in: f64,
        #[arg(long, default_value_t = 2.0)]
        r_out: f64,
        out: PathBuf,
    },
    /// Disk with a square core and four ring blocks, tag "rim".
    Disk {
        #[arg(long)]
        n_core: usize,
        #[arg(long)]
        n_ring: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        out: PathBuf,
    },
    /// Star-shaped boundary points as x,y CSV.
    Star {
        #[arg(long, default_value_t = 200)]
        n_points: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config } => match cmd_run(&config) {
            Ok(outcome) => {
                for e in &outcome.errors {
                    println!(
                        "probe {} t={}: E_inf = {:.6e}  E_2 = {:.6e}  ({} nodes)",
                        e.probe, e.time, e.e_inf, e.e_2, e.nodes
                    );
                }
                println!("{} steps, {} nonlinear iterations", outcome.stats.steps, outcome.stats.nonlinear_iterations);
                0
            }
            Err(e) => {
                eprintln!("{e}");
                e.exit_code()
            }
        },
        Command::Mesh { generator } => {
            let (cmd, out) = match generator {
                Generator::Rectangle { nx, ny, x_range, y_range, out } => (
                    MeshCommand::Rectangle { nx, ny, x_range: [x_range[0], x_range[1]], y_range: [y_range[0], y_range[1]] },
                    out,
                ),
                Generator::Annulus { nr, ntheta, r_in, r_out, out } => (MeshCommand::Annulus { nr, ntheta, r_in, r_out }, out),
                Generator::Disk { n_core, n_ring, radius, out } => (MeshCommand::Disk { n_core, n_ring, radius }, out),
                Generator::Star { n_points, radius, out } => (MeshCommand::Star { n_points, radius }, out),
            };
            match cmd_mesh(&cmd, &out) {
                Ok(()) => 0,
                Err(e) => {
                    eprintln!("{e}");
                    e.exit_code()
                }
            }
        }
        Command::Verify { suite } => match run_suite(&suite) {
            Ok(checks) => {
                for c in &checks {
                    println!("{c}");
                }
                if checks.iter().all(|c| c.pass()) {
                    0
                } else {
                    1
                }
            }
            Err(e @ ldbem::Error::Config(_)) => {
                eprintln!("{e}");
                EXIT_CONFIG
            }
            Err(e) => {
                eprintln!("{e}");
                EXIT_RUNTIME
            }
        },
    };
    ExitCode::from(code as u8)
}
