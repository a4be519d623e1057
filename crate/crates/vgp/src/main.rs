use std::io::{Read, Write};
use std::process::ExitCode;

use clap::Parser;
use vgp::error::exit;
use vgp::{execute, Cli, CliError, CommandResult};

fn read_input(path: Option<&std::path::Path>) -> Result<String, CliError> {
    match path {
        Some(p) => std::fs::read_to_string(p).map_err(|source| CliError::Io { path: p.display().to_string(), source }),
        None => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|source| CliError::Io { path: "<stdin>".into(), source })?;
            Ok(s)
        }
    }
}

fn emit(result: &CommandResult, output: Option<&std::path::Path>) -> Result<(), std::io::Error> {
    if let Some(doc) = &result.stdout_doc {
        let mut text = serde_json::to_string_pretty(doc).map_err(std::io::Error::other)?;
        text.push('\n');
        match output {
            Some(p) => std::fs::write(p, text)?,
            None => std::io::stdout().lock().write_all(text.as_bytes())?,
        }
    }
    std::io::stderr().write_all(result.stderr_text.as_bytes())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = execute(&cli.global, &cli.command, || read_input(cli.global.input.as_deref()));
    let code = match emit(&result, cli.global.output.as_deref()) {
        Ok(()) => result.exit_code,
        Err(e) => {
            eprintln!("error: cannot write output: {e}");
            exit::INVALID
        }
    };
    ExitCode::from(code as u8)
}
