use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use oamspace::cli::{exit_code, run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let code = match run(&cli, &mut lock) {
        Ok(code) => code,
        // output piped into a reader that stopped early
        Err(oamspace::Error::Io { source, .. }) if source.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    };
    let _ = lock.flush();
    ExitCode::from(code)
}
