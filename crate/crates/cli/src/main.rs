use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use crheat_cli::commands::{run, Cli};
use crheat_cli::{classify, init_threads};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| run(&cli));
    match result {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.stdout.as_bytes()).and_then(|()| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            if let Some(note) = out.stderr {
                eprintln!("crheat: {note}");
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            let (code, message) = classify(&e);
            eprintln!("crheat: error: {message}");
            ExitCode::from(code)
        }
    }
}
