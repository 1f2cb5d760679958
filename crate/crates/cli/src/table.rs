//! Numeric CSV tables: one `#` comment line with units, a header row, and
//! values written with 17 significant digits so they reload bit-identically.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use nematic_core::pde::{DirectorField, PolarGrid};
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub comment: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(comment: impl Into<String>, header: &[&str]) -> Self {
        Self {
            comment: comment.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<(), CliError> {
        writeln!(out, "# {}", self.comment)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format_value(*v)))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        self.write_to(std::io::BufWriter::new(file))
    }

    pub fn read_from<R: Read>(input: R) -> Result<Self, CliError> {
        let mut input = BufReader::new(input);
        let mut first = String::new();
        input.read_line(&mut first)?;
        let comment = first
            .trim_end()
            .strip_prefix("# ")
            .ok_or_else(|| CliError::Format("missing leading `#` comment line".into()))?
            .to_string();
        let mut r = csv::Reader::from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for record in r.records() {
            let record = record?;
            let row = record
                .iter()
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| CliError::Format(format!("not a number: {v:?}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != header.len() {
                return Err(CliError::Format(format!(
                    "row has {} fields, header has {}",
                    row.len(),
                    header.len()
                )));
            }
            rows.push(row);
        }
        Ok(Self {
            comment,
            header,
            rows,
        })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
        Self::read_from(file)
    }
}

/// Shortest round-trip form is not fixed-width; `{:.16e}` always carries
/// 17 significant digits and is stable across platforms.
fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Director field as `r,phi,theta` in storage order.
pub fn field_table(field: &DirectorField, comment: impl Into<String>) -> Table {
    let mut t = Table::new(comment, &["r", "phi", "theta"]);
    for (r, phi, theta) in field.samples() {
        t.push(vec![r, phi, theta]);
    }
    t
}

/// Rebuilds a field on `template`'s grid from an `r,phi,theta` table,
/// checking that the node coordinates match exactly.
pub fn field_from_table(
    template: &DirectorField,
    table: &Table,
) -> Result<DirectorField, CliError> {
    let (r, phi, theta) = match (
        table.column("r"),
        table.column("phi"),
        table.column("theta"),
    ) {
        (Some(r), Some(p), Some(t)) => (r, p, t),
        _ => return Err(CliError::Format("expected columns r,phi,theta".into())),
    };
    let grid: PolarGrid = template.grid;
    if theta.len() != grid.len() {
        return Err(CliError::Format(format!(
            "{} rows for a grid of {} nodes",
            theta.len(),
            grid.len()
        )));
    }
    for (k, (rk, pk)) in r.iter().zip(&phi).enumerate() {
        let (i, j) = (k / grid.nphi(), k % grid.nphi());
        if *rk != grid.r(i) || *pk != grid.phi(j) {
            return Err(CliError::Format(format!(
                "row {k} is not grid node ({i}, {j})"
            )));
        }
    }
    Ok(DirectorField {
        theta,
        ..template.clone()
    })
}
