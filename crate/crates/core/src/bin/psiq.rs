use std::process::ExitCode;

use clap::Parser;
use psiq::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            match &out.destination {
                Some(path) => eprintln!("wrote {}", path.display()),
                None => print!("{}", out.body),
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
