//! Command-line front end: track, evaluate, synthesize, ablate and render.
//!
//! Each subcommand is also callable as a function taking its parsed arguments.

pub mod args;
pub mod commands;
pub mod error;

pub use args::{Cli, Command};
pub use commands::{cmd_ablate_bt, cmd_eval, cmd_render, cmd_synth, cmd_track};
pub use error::CliError;

/// Runs a parsed command line, printing tables to stdout.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Track(a) => {
            for o in cmd_track(a)? {
                if let Some(p) = &o.results_path {
                    println!("{}\t{}", o.name, p.display());
                }
            }
        }
        Command::Eval(a) => print!("{}", cmd_eval(a)?),
        Command::Synth(a) => {
            for p in cmd_synth(a)? {
                println!("{}", p.display());
            }
        }
        Command::AblateBt(a) => print!("{}", cmd_ablate_bt(a)?),
        Command::Render(a) => println!("{} frames", cmd_render(a)?),
    }
    Ok(())
}
