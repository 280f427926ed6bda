use std::io::Write;
use std::process::ExitCode;

use areamean_cli::{configure_jobs, expand_config, run, write_file, Cli, CliError};
use clap::Parser;

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}

fn real_main() -> Result<u8, CliError> {
    let args = expand_config(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version go to stdout with success; usage errors exit 2.
            let _ = e.print();
            return Ok(e.exit_code() as u8);
        }
    };
    let config = cli.command.config();
    configure_jobs(config.jobs)?;
    let report = run(&cli.command)?;
    for note in &report.notes {
        eprintln!("{note}");
    }
    match &config.output {
        Some(path) => write_file(path, &report.body)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(report.body.as_bytes())
                .and_then(|()| out.flush())
                .map_err(|e| CliError::input(format!("stdout: {e}")))?;
        }
    }
    Ok(report.code)
}
