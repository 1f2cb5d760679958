//! Command-line front end for `nematic-core`: parameter sweeps written as
//! CSV tables, JSON documents or SVG plots.

pub mod commands;
pub mod config;
pub mod error;
pub mod svg;
pub mod table;

use std::path::PathBuf;

use config::{Cli, ConfigFile, Format};
use error::CliError;

/// Runs one subcommand and returns the files it wrote. All results are
/// computed before the first file is touched.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let cfg = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile {
            schema_version: config::SCHEMA_VERSION,
            ..Default::default()
        },
    };
    let name = cli.command.name();
    if let Some(c) = &cfg.command {
        if c != name {
            return Err(CliError::Config(format!(
                "config file is for `{c}`, not `{name}`"
            )));
        }
    }
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output.path.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let format = cli.format.or(cfg.output.format).unwrap_or(Format::Csv);
    let out = commands::dispatch(&cli.command, &cfg)?;

    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut written = Vec::new();
    let mut write = |file: String, text: &str| -> Result<(), CliError> {
        let path = dir.join(file);
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    match format {
        Format::Json => {
            let doc = commands::to_json(name, &out);
            let text =
                serde_json::to_string_pretty(&doc).map_err(|e| CliError::Format(e.to_string()))?;
            write(format!("{name}.json"), &text)?;
        }
        Format::Csv | Format::Svg => {
            if format == Format::Csv {
                for (stem, table) in &out.tables {
                    let mut buf = Vec::new();
                    table.write_to(&mut buf)?;
                    write(format!("{stem}.csv"), &String::from_utf8_lossy(&buf))?;
                }
            }
            for (stem, svg) in &out.figures {
                write(format!("{stem}.svg"), svg)?;
            }
        }
    }
    for (key, value) in &out.summary {
        eprintln!("{key} = {value}");
    }
    Ok(written)
}
