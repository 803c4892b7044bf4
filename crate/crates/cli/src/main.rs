use clap::Parser;
use lorentz_cli::{report_error, run};
use lorentz_cli::args::Cli;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        std::process::exit(report_error(&e));
    }
}
