use std::process::ExitCode;

use clap::Parser;
use cpd_core::Error;

mod args;
mod commands;
mod settings;

use args::{Cli, Command};
use commands::Outcome;
use settings::Settings;

const EXIT_IO: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => EXIT_IO,
        Error::Csv(c) if matches!(c.kind(), csv::ErrorKind::Io(_)) => EXIT_IO,
        Error::SamplingFailed { .. } => EXIT_NOT_CONVERGED,
        _ => EXIT_INVALID,
    }
}

fn resolve(cli: &Cli) -> cpd_core::Result<Settings> {
    let mut s = Settings::default();
    if let Some(path) = &cli.config {
        s.apply_file(path)?;
    }
    match &cli.command {
        Command::Ingest(c) => {
            c.ingest.apply(&mut s)?;
            if let Some(t) = c.sentiment {
                s.sentiment = t;
            }
        }
        Command::Fit(c) => {
            c.model.apply(&mut s)?;
            c.sampler.apply(&mut s)?;
        }
        Command::Report(c) => c.report.apply(&mut s)?,
        Command::Synth(_) => {}
        Command::Run(c) => {
            c.ingest.apply(&mut s)?;
            c.model.apply(&mut s)?;
            c.sampler.apply(&mut s)?;
            c.report.apply(&mut s)?;
        }
    }
    s.validate()?;
    Ok(s)
}

fn dispatch(cli: &Cli) -> cpd_core::Result<Outcome> {
    let settings = resolve(cli)?;
    match &cli.command {
        Command::Ingest(c) => commands::ingest(&c.input, &c.out, &settings).map(|()| Outcome::Converged),
        Command::Fit(c) => commands::fit(&c.series, &c.out_dir, &settings),
        Command::Report(c) => {
            let settings = commands::fit_settings(&c.fit_dir, &settings)?;
            settings.validate()?;
            commands::report(&c.series, &c.fit_dir, &c.out_dir, &settings)
        }
        Command::Synth(c) => commands::synth(c, &settings).map(|()| Outcome::Converged),
        Command::Run(c) => commands::run_all(&c.input, &c.out_dir, &settings),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(Outcome::Converged) => ExitCode::SUCCESS,
        Ok(Outcome::NotConverged) => {
            eprintln!("warning: sampler did not converge (r_hat above threshold); outputs were written");
            ExitCode::from(EXIT_NOT_CONVERGED)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
