use std::process::ExitCode;

use clap::{Parser, Subcommand};
use infogeo_cli::commands::{cmd_plan, cmd_render, cmd_simulate, cmd_sweep, PlanArgs, RenderArgs, SimulateArgs, SweepArgs};
use infogeo_cli::{CliError, CliResult};

/// Belief-space RRT* planning, path-following simulation and rendering.
#[derive(Debug, Parser)]
#[command(name = "infogeo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Grow a planner tree and extract the best path.
    Plan(PlanArgs),
    /// Follow a planned path with event-triggered sensing, many times.
    Simulate(SimulateArgs),
    /// Plan (and optionally simulate) over a grid of α values and seeds.
    Sweep(SweepArgs),
    /// Draw a tree or path artifact as SVG.
    Render(RenderArgs),
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("INFOGEO_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Validation(format!("INFOGEO_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Plan(a) => cmd_plan(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Render(a) => cmd_render(a),
    });
    let err = match result {
        Ok(report) => match report.failure {
            None => return ExitCode::SUCCESS,
            Some(e) => e,
        },
        Err(e) => e,
    };
    eprintln!("error: {err}");
    ExitCode::from(err.exit_code() as u8)
}
