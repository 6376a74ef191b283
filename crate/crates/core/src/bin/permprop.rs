use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use permprop::cli::{self, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        pool = pool.num_threads(t);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(1);
        }
    };

    let mut stderr = std::io::stderr();
    let report = match pool.install(|| cli::run(&cli, &mut stderr)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };

    let written = match &cli.out {
        Some(path) => std::fs::write(path, report.as_bytes()),
        None => std::io::stdout().lock().write_all(report.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: writing output: {e}");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
