use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = rou_cli::Cli::parse();
    match rou_cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rou: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
