use std::process::ExitCode;

use clap::Parser;
use debound::{run, Cli, Status};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(Status::Usage.code()) } else { ExitCode::SUCCESS };
        }
    };
    let status = run(&cli.command, &mut std::io::stdout().lock());
    ExitCode::from(status.code())
}
