use clap::Parser;
use otfs_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("otfs: {e}");
        std::process::exit(e.exit_code());
    }
}
