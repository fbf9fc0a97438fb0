//! Command-line front end for `hiersim`.

pub mod args;
pub mod commands;
pub mod config;
pub mod svg;
pub mod table;

pub use args::Cli;
pub use commands::OutputBundle;
pub use config::UsageError;

use args::Command;

/// Runs one parsed command, writing its outputs.
pub fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Dynamics(a) => {
            let b = commands::dynamics(a)?;
            commands::deliver(&b, a.out.as_deref(), a.svg.as_deref(), true)
        }
        Command::Measure(a) => {
            commands::deliver(&commands::measure(a)?, a.out.as_deref(), None, false)
        }
        Command::Critical(a) => {
            commands::deliver(&commands::critical(a)?, a.out.as_deref(), None, false)
        }
        Command::Sweep(a) => {
            let b = commands::sweep_command(a)?;
            commands::deliver(&b, a.out.as_deref(), a.svg.as_deref(), true)
        }
        Command::ReproFig2(a) => commands::deliver_repro(&commands::repro(2, a)?, &a.out),
        Command::ReproFig3(a) => commands::deliver_repro(&commands::repro(3, a)?, &a.out),
        Command::ReproFig4(a) => commands::deliver_repro(&commands::repro(4, a)?, &a.out),
        Command::ReproFig5(a) => commands::deliver_repro(&commands::repro(5, a)?, &a.out),
    }
}

/// Exit status for an error returned by [`run`].
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.is::<UsageError>() {
        2
    } else {
        1
    }
}
