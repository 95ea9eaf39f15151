use std::process::ExitCode;

use clap::Parser;
use manakov_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("checks failed; see the written report");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("manakov: {e}");
            e.exit_code()
        }
    }
}
