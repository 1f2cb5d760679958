use clap::Parser;
use nematic_cli::config::Cli;
use nematic_cli::error::CliError;

fn main() {
    let cli = Cli::parse();
    match nematic_cli::run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Solver {
                report: Some(report),
                ..
            } = &e
            {
                if let Ok(text) = serde_json::to_string(report) {
                    eprintln!("{text}");
                }
            }
            std::process::exit(e.exit_code());
        }
    }
}
