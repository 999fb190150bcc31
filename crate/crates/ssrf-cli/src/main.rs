use clap::Parser;
use ssrf_cli::config::Cli;
use ssrf_cli::run;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run::dispatch(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
