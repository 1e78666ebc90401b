//! `qedsim <script> [--name value ...]`

use std::io::{self, Write};
use std::process::ExitCode;

use qedsim::driver::{run_script, EXIT_USAGE, SCRIPTS};

fn main() -> ExitCode {
    let mut args = std::env::args().skip(1);
    let stdout = io::stdout();
    let stderr = io::stderr();
    let Some(script) = args.next().filter(|s| !s.starts_with("--")) else {
        let _ = writeln!(
            stderr.lock(),
            "usage: qedsim <script> [--name value ...]\nscripts: {}\nuse `qedsim <script> --help` to list parameters",
            SCRIPTS.join(", ")
        );
        return ExitCode::from(EXIT_USAGE as u8);
    };
    let rest: Vec<String> = args.collect();
    let code = run_script(&script, &rest, &mut io::BufWriter::new(stdout.lock()), &mut stderr.lock());
    ExitCode::from(code as u8)
}
