mod commands;
mod svg;

use clap::Parser;

use commands::{Cli, ExitKind};

fn main() {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => {}
        Err(err) => {
            // Machine-readable error envelope on stdout, context on stderr.
            println!("{}", serde_json::json!({ "error": err.name }));
            eprintln!("error: {}", err.message);
            let code = match err.kind {
                ExitKind::Validation => 2,
                ExitKind::Numerical => 3,
            };
            std::process::exit(code);
        }
    }
}
