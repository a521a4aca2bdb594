use clap::Parser;
use kerr_array::cli::{error_json, execute, exit_code, Cli};

fn main() {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(summary) => println!("{}", serde_json::to_string_pretty(&summary).expect("serializable")),
        Err(e) => {
            eprintln!("{}", error_json(&e));
            std::process::exit(exit_code(&e));
        }
    }
}
