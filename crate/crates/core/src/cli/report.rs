use std::fs;

use serde_json::{json, Value};

use super::{CliError, RunConfig};
use crate::output::{write_atomic, SCHEMA_VERSION};

/// One CSV file. `schema_version` is prepended and `seed` appended to
/// every row when written.
#[derive(Clone, Debug)]
pub struct Table {
    pub file: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: impl Into<String>, columns: &[&'static str]) -> Self {
        Self {
            file: file.into(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, seed: u64) -> Result<Vec<u8>, CliError> {
        let err = |e: csv::Error| CliError::Run(crate::Error::Parse(e.to_string()));
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["schema_version"];
        header.extend(&self.columns);
        header.push("seed");
        w.write_record(&header).map_err(err)?;
        let (version, seed) = (SCHEMA_VERSION.to_string(), seed.to_string());
        for row in &self.rows {
            w.write_record(std::iter::once(&version).chain(row).chain(std::iter::once(&seed)))
                .map_err(err)?;
        }
        w.into_inner()
            .map_err(|e| CliError::Run(crate::Error::Parse(e.to_string())))
    }
}

/// Output of one subcommand: CSV tables, a JSON result block and the
/// lines echoed to stdout.
#[derive(Clone, Debug)]
pub struct Report {
    pub experiment: &'static str,
    pub pass: bool,
    pub tables: Vec<Table>,
    pub results: Value,
    pub summary: Vec<String>,
}

impl Report {
    /// Writes every table and `<experiment>.json` into `config.out`.
    pub fn write(&self, config: &RunConfig, wall_time_s: f64) -> Result<(), CliError> {
        fs::create_dir_all(&config.out)
            .map_err(|e| CliError::Config(format!("{}: {e}", config.out.display())))?;
        let mut files = Vec::new();
        for t in &self.tables {
            write_atomic(&config.out.join(&t.file), &t.to_csv(config.seed)?)?;
            files.push(t.file.clone());
        }
        let json_name = format!("{}.json", self.experiment);
        files.push(json_name.clone());
        let doc = json!({
            "experiment": self.experiment,
            "schema_version": SCHEMA_VERSION,
            "pass": self.pass,
            "config": config,
            "results": self.results,
            "files": files,
            "provenance": {
                "seed": config.seed,
                "version": env!("CARGO_PKG_VERSION"),
                "wall_time_s": wall_time_s,
                "workers": config.workers,
            },
        });
        let mut bytes = serde_json::to_vec_pretty(&doc)
            .map_err(|e| CliError::Run(crate::Error::Parse(e.to_string())))?;
        bytes.push(b'\n');
        write_atomic(&config.out.join(json_name), &bytes)?;
        Ok(())
    }
}

/// Shortest round-trip decimal, switching to exponent form for very small
/// or very large magnitudes.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(num(0.25), "0.25");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(1.5e-7), "1.5e-7");
        assert_eq!(opt_num(None), "");
    }

    #[test]
    fn csv_carries_version_and_seed() {
        let mut t = Table::new("x.csv", &["a", "b"]);
        t.push(vec!["1".into(), "two".into()]);
        let text = String::from_utf8(t.to_csv(42).unwrap()).unwrap();
        assert_eq!(text, "schema_version,a,b,seed\n1,1,two,42\n");
    }
}
