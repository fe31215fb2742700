use clap::Parser;

use wetbench_cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
        }
        Err(e) => {
            eprintln!("wetbench: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
