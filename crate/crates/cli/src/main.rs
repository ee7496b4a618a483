mod args;
mod commands;
mod config;
mod output;

use clap::Parser;

use args::{Cli, Command};
use output::{Failure, EXIT_OK, EXIT_USAGE};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            if code != EXIT_OK {
                let first = e.to_string().lines().next().unwrap_or_default().to_string();
                eprintln!("{}", Failure::new("usage", code, first).record());
            }
            std::process::exit(code);
        }
    };

    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let outcome = match &cli.command {
        Command::Sweep(a) => commands::sweep(a),
        Command::Boundaries(a) => commands::boundaries_cmd(a),
        Command::Discord(a) => commands::discord(a),
        Command::Oddeven(a) => commands::oddeven(a),
        Command::Validate(a) => commands::validate(a),
    };
    if let Err(f) = outcome {
        eprintln!("error: {}", f.message);
        for m in &f.missing {
            eprintln!("  {m}");
        }
        eprintln!("{}", f.record());
        std::process::exit(f.code);
    }
}
