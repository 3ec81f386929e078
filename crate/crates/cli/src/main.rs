use std::process::ExitCode;

use clap::Parser;
use gmfuse_cli::{execute, Cli, EXIT_PROPERTY, EXIT_USAGE};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            return ExitCode::from(code as u8);
        }
    };
    match execute(&cli.command) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) if f.code == EXIT_PROPERTY => {
            print!("{}", f.message);
            eprintln!("error: property suite failed");
            ExitCode::from(f.code as u8)
        }
        Err(f) => {
            eprintln!("error: {}", f.message.trim_end());
            ExitCode::from(f.code as u8)
        }
    }
}
