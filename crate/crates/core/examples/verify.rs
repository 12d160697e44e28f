//! Running the property suites from code instead of the command line.

use clap::Parser;
use psiq::cli::{run, Cli};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for p in ["2", "3", "5"] {
        let cli = Cli::parse_from(["psiq", "--p", p, "--seed", "3", "verify"]);
        let out = run(&cli)?;
        println!("p = {p}: {}", if out.ok { "all checks pass" } else { "failures" });
        print!("{}", out.body);
    }
    Ok(())
}
