use clap::Parser;

fn main() {
    let cli = ballotflow_cli::Cli::parse();
    if let Err(e) = ballotflow_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
