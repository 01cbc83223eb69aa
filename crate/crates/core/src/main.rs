use std::process::ExitCode;

use clap::Parser;
use docforge::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    // stderr stays unlocked: progress lines come from worker threads.
    let code = run(cli, &mut std::io::stdout().lock(), &mut std::io::stderr());
    ExitCode::from(code)
}
