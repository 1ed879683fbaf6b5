use clap::Parser;
use reglab_cli::{run_command, Cli, Outcome};

fn main() {
    let cli = Cli::parse();
    match run_command(&cli.command, &cli.out, cli.tol, cli.parallel) {
        Ok(Outcome::Pass) => {}
        Ok(Outcome::VerificationFailed(reason)) => {
            eprintln!("verification failed: {reason}");
            std::process::exit(1);
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    }
}
