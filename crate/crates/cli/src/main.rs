use std::io::Write;
use std::process::ExitCode;

use causalbox_cli::{run, Cli, ExitStatus};
use clap::Parser;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // help and version requests are not usage errors
            return if e.use_stderr() {
                ExitCode::from(ExitStatus::Usage as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(outcome.stdout.as_bytes());
            ExitCode::from(outcome.status as u8)
        }
        Err(e) => {
            eprintln!("causalbox: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
