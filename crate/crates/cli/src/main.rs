use std::process::ExitCode;

use clap::Parser;
use hopfharm::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    let outcome = run(cli);
    let json = outcome.report.to_json();
    if let Err(e) = std::fs::create_dir_all(&out).and_then(|_| std::fs::write(out.join("report.json"), format!("{json}\n"))) {
        eprintln!("hopfharm: cannot write report.json in {}: {e}", out.display());
    }
    println!("{}", outcome.stdout.unwrap_or(json));
    if let hopfharm::Status::Error { message, .. } = &outcome.report.status {
        eprintln!("hopfharm: {message}");
    }
    ExitCode::from(outcome.report.exit_code() as u8)
}
