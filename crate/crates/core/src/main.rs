use std::process::ExitCode;

use clap::Parser;

use fieldscope::cli::{self, Cli};

fn main() -> ExitCode {
    let args = Cli::parse();
    let code = cli::run(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    ExitCode::from(code)
}
