use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use walkspec::cli::Cli;
use walkspec::commands::run;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    let out = cli.common.out.clone();
    let json = cli.common.json;
    let outcome = match run(cli, argv) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match (&out, &outcome.table) {
        (Some(path), Some(table)) => {
            if let Err(e) = table.write(path, json) {
                eprintln!("error: writing {}: {e}", path.display());
                return ExitCode::from(2);
            }
            for (suffix, contents) in &outcome.extras {
                let mut p = PathBuf::from(path);
                p.set_extension(suffix.trim_start_matches('.'));
                if let Err(e) = std::fs::write(&p, contents) {
                    eprintln!("error: writing {}: {e}", p.display());
                    return ExitCode::from(2);
                }
            }
            print!("{}", outcome.text);
        }
        (None, Some(table)) if json => print!("{}", table.to_json()),
        _ => print!("{}", outcome.text),
    }
    if outcome.success {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
