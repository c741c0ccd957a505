use std::process::ExitCode;

use clap::Parser;
use nahn_cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match nahn_cli::run(&cli) {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("nahn: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
