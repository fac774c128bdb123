//! `toklens`: tokenizer training, over-tokenization analysis, the
//! prefix-stripping codec and quadrant classification from the command line.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors. Failures
//! print a single `error: <code>: <message>` line on stderr.

mod args;
mod commands;
mod report;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Format};
use report::{envelope, to_json_bytes, Failure, Inputs, Outcome, Output};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&Failure::usage(clap_message(&e))),
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => fail(&f),
    }
}

fn fail(f: &Failure) -> ExitCode {
    eprintln!("{f}");
    ExitCode::from(f.exit_code() as u8)
}

/// First line of a clap error without its own `error: ` lead.
fn clap_message(e: &clap::Error) -> String {
    let rendered = e.render().to_string();
    let first = rendered.lines().next().unwrap_or_default();
    first.strip_prefix("error: ").unwrap_or(first).to_string()
}

fn run(cli: &Cli) -> Outcome<()> {
    let mut inputs = Inputs::default();
    let output = commands::run(&cli.command, cli.seed, &mut inputs)?;
    let bytes = match output {
        Output::Raw(bytes) => {
            if cli.format == Some(Format::Csv) {
                return Err(Failure::usage("this command does not write csv"));
            }
            bytes
        }
        Output::Report { command, body, csv } => match (format(cli), csv) {
            (Format::Json, _) => to_json_bytes(&envelope(command, &inputs.digest(), body)),
            (Format::Csv, Some(rows)) => rows,
            (Format::Csv, None) => return Err(Failure::usage(format!("`{command}` does not write csv"))),
        },
    };
    write_out(cli, &bytes)
}

fn format(cli: &Cli) -> Format {
    cli.format.unwrap_or_else(|| match &cli.out {
        Some(p) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => Format::Csv,
        _ => Format::Json,
    })
}

fn write_out(cli: &Cli, bytes: &[u8]) -> Outcome<()> {
    let result = match &cli.out {
        Some(path) => std::fs::write(path, bytes),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes).and_then(|()| stdout.flush())
        }
    };
    result.map_err(|e| Failure::Data {
        code: "io",
        message: match &cli.out {
            Some(p) => format!("{}: {e}", p.display()),
            None => format!("stdout: {e}"),
        },
    })
}
