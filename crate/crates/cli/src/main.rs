use std::io::Write;
use std::process::ExitCode;

use stressfirst_cli::{parse_args, run, EXIT_INPUT};

fn main() -> ExitCode {
    let (outcome, out_path) = match parse_args(std::env::args_os()) {
        Ok(config) => (run(&config), config.out),
        Err(outcome) => (outcome, None),
    };
    let mut code = outcome.code;
    match out_path {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, &outcome.output) {
                eprintln!("error: {}: {e}", path.display());
                code = EXIT_INPUT;
            }
        }
        None => {
            let _ = std::io::stdout().write_all(outcome.output.as_bytes());
        }
    }
    if let Some(msg) = &outcome.error {
        eprintln!("error: {}", msg.trim_end());
    }
    ExitCode::from(code as u8)
}
