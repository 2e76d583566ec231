//! Report envelope and the json, csv and human renderers.

use serde::{Deserialize, Serialize};

use crate::args::Format;
use crate::{CliError, Outcome, RunConfig, TOOL};

/// Fixed-column view of a result, used by the csv and human formats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Shortens non-integer numbers to ten significant digits.
fn human_cell(cell: &str) -> String {
    match cell.parse::<f64>() {
        Ok(x) if cell.contains('.') && x != 0.0 => {
            if (1e-4..1e9).contains(&x.abs()) {
                let digits = (9 - x.abs().log10().floor() as i32).max(0) as usize;
                let s = format!("{x:.digits$}");
                let s = s.trim_end_matches('0');
                s.trim_end_matches('.').to_string()
            } else {
                format!("{x:.9e}")
            }
        }
        _ => cell.to_string(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub config: serde_json::Value,
    pub result: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(config: &RunConfig, outcome: Outcome, wall_time_seconds: Option<f64>) -> Self {
        Report {
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.echo(),
            result: outcome.result,
            wall_time_seconds,
            tables: outcome.tables,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One csv block per table, separated by blank lines.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut out = String::new();
        for (i, table) in self.tables.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::Io(e.to_string());
            w.write_record(&table.columns).map_err(io)?;
            for row in &table.rows {
                w.write_record(row).map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
            out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
        }
        Ok(out)
    }

    pub fn to_human(&self) -> String {
        let mut out = format!("{} {}  seed={}\n", self.tool, self.version, self.config["seed"]);
        if let Some(w) = self.wall_time_seconds {
            out.push_str(&format!("wall time {w:.3} s\n"));
        }
        for table in &self.tables {
            out.push_str(&format!("\n[{}]\n", table.name));
            let rows: Vec<Vec<String>> =
                table.rows.iter().map(|r| r.iter().map(|c| human_cell(c)).collect()).collect();
            let widths: Vec<usize> = (0..table.columns.len())
                .map(|c| rows.iter().map(|r| r[c].len()).chain([table.columns[c].len()]).max().unwrap_or(0))
                .collect();
            let line = |cells: &[String]| {
                let padded: Vec<String> = cells.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect();
                format!("{}\n", padded.join("  ").trim_end())
            };
            out.push_str(&line(&table.columns));
            for row in &rows {
                out.push_str(&line(row));
            }
        }
        out
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => Ok(self.to_json()),
            Format::Csv => self.to_csv(),
            Format::Human => Ok(self.to_human()),
        }
    }
}
