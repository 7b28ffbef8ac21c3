//! Command-line experiment runner for `heislim-core`.

pub mod accept;
pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

use args::{Command, GadgetsCommand};
use error::{CliError, Result};
use output::{num, resolve_target, CsvSink};

pub fn execute<I, T>(argv: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let inv = config::parse(argv)?;
    if inv.cli.threads > 0 {
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(inv.cli.threads)
            .build_global();
    }
    let target = resolve_target(inv.cli.out.as_deref(), &inv.name());
    if let Command::Accept(a) = &inv.cli.command {
        return accept_command(&inv, a, target);
    }
    let mut out = CsvSink::open(target)?;
    match &inv.cli.command {
        Command::Phi(a) => commands::phi_table(a, &inv, &mut out)?,
        Command::Threshold(a) => commands::threshold_table(a, &inv, &mut out)?,
        Command::Cover(a) => commands::cover_table(a, &inv, &mut out)?,
        Command::Energy(a) | Command::Capacity(a) => commands::energy_table(a, &inv, &mut out)?,
        Command::Simulate(a) => commands::simulate_table(a, &inv, &mut out)?,
        Command::Gadgets(GadgetsCommand::Coeffs(a)) => commands::coeffs_table(a, &inv, &mut out)?,
        Command::Accept(_) => unreachable!(),
    }
    out.finish()
}

fn accept_command(
    inv: &config::Invocation,
    a: &args::AcceptArgs,
    target: Option<std::path::PathBuf>,
) -> Result<()> {
    let outcomes = accept::run_suite(a.seed, &a.only, |o| {
        println!("{}", o.line());
        let _ = std::io::stdout().flush();
    });
    if let Some(path) = target {
        let mut out = CsvSink::open(Some(path))?;
        out.preamble(inv, &["criterion", "passed", "elapsed_s", "budget_s"])?;
        for o in &outcomes {
            out.row(&[
                o.id.to_string(),
                o.passed.to_string(),
                num(o.elapsed.as_secs_f64()),
                o.budget.as_secs().to_string(),
            ])?;
        }
        out.finish()?;
    }
    let failed: Vec<u8> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.id)
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Acceptance(failed))
    }
}

/// Runs the tool and returns the process exit code: 0 on success, 1 for
/// usage and input errors, 2 when acceptance criteria fail.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match execute(argv) {
        Ok(()) => 0,
        Err(CliError::Clap(e)) => {
            let _ = e.print();
            CliError::Clap(e).exit_code()
        }
        Err(e) => {
            eprintln!("heislim: {e}");
            e.exit_code()
        }
    }
}
