use std::process::ExitCode;

use clap::Parser;
use crashsim::{max_threads_from_env, run, Cli, CliError};

fn configure_threads() -> Result<(), CliError> {
    if let Some(n) = max_threads_from_env()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| run(&cli));
    match result {
        Ok(out) => {
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("crashsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
