mod args;
mod jobs;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use zipstrat::Execution;

use args::{Cli, Command, ExecArg};
use jobs::{CliError, Document};

fn run(cli: &Cli) -> Result<Document, CliError> {
    let exec = match cli.exec {
        ExecArg::Sequential => Execution::Sequential,
        ExecArg::Parallel => Execution::Parallel,
    };
    match &cli.command {
        Command::Roots(a) => jobs::roots(a, cli.format),
        Command::Cosets(a) => jobs::cosets(a, cli.format, exec),
        Command::ZipPoset(a) => jobs::zip_poset(a, cli.format, exec),
        Command::BruhatStrata(a) => jobs::bruhat(a, cli.format),
        Command::PurityReport(a) => jobs::purity_report(a, cli.format, exec),
        Command::Oracle(a) => jobs::oracle(a, cli.format, exec),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let doc = match run(&cli) {
        Ok(doc) => doc,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &doc.body),
        None => std::io::stdout().write_all(doc.body.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: io: {e}");
        return ExitCode::from(1);
    }
    if doc.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
