//! Tables go out as CSV (with a schema comment line) or JSON, to files under
//! --out or to stdout. All writes happen on the calling thread.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::args::{Format, Settings};
use crate::error::{CliError, CliResult};

pub const CSV_SCHEMA: &str = "landauer-csv/v1";
pub const JSON_SCHEMA: &str = "landauer-json/v1";

pub struct Sink {
    command: &'static str,
    settings: Settings,
    written: Vec<PathBuf>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Output {
        path: path.display().to_string(),
        source,
    }
}

impl Sink {
    /// Creates the output directory and checks it takes files.
    pub fn new(command: &'static str, settings: &Settings) -> CliResult<Self> {
        if let Some(dir) = &settings.out {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
            let probe = dir.join(".landauer-probe");
            fs::write(&probe, b"").map_err(io_err(dir))?;
            let _ = fs::remove_file(&probe);
        }
        Ok(Sink {
            command,
            settings: settings.clone(),
            written: Vec::new(),
        })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn header(&self, table: &str) -> String {
        let s = &self.settings;
        format!(
            "# schema={CSV_SCHEMA} command={} table={table} q_convention={} alpha={} beta={}\n",
            self.command, s.q_convention, s.alpha, s.beta
        )
    }

    fn emit(&mut self, file: &str, text: &str) -> CliResult<()> {
        match &self.settings.out {
            Some(dir) => {
                let path = dir.join(file);
                fs::write(&path, text).map_err(io_err(&path))?;
                self.written.push(path);
            }
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(io_err(Path::new("stdout")))?;
            }
        }
        Ok(())
    }

    /// Writes `rows` in every requested tabular format.
    pub fn table<T: Serialize>(&mut self, table: &str, rows: &[T]) -> CliResult<()> {
        if self.settings.formats.contains(&Format::Csv) {
            let text = self.header(table) + &to_csv(rows)?;
            self.emit(&format!("{table}.csv"), &text)?;
        }
        if self.settings.formats.contains(&Format::Json) {
            let doc = self.envelope(table, serde_json::to_value(rows).expect("rows serialize"));
            self.emit(&format!("{table}.json"), &pretty(&doc))?;
        }
        Ok(())
    }

    /// A JSON document written regardless of the format selection.
    pub fn document(&mut self, name: &str, value: &serde_json::Value) -> CliResult<()> {
        let text = pretty(value);
        self.emit(&format!("{name}.json"), &text)
    }

    pub fn envelope(&self, table: &str, rows: serde_json::Value) -> serde_json::Value {
        let s = &self.settings;
        json!({
            "schema": JSON_SCHEMA,
            "command": self.command,
            "table": table,
            "q_convention": s.q_convention,
            "alpha": s.alpha,
            "beta": s.beta,
            "rows": rows,
        })
    }

    pub fn wants_svg(&self) -> bool {
        self.settings.formats.contains(&Format::Svg)
    }

    pub fn svg(&mut self, name: &str, svg: &str) -> CliResult<()> {
        if self.wants_svg() {
            self.emit(&format!("{name}.svg"), svg)?;
        }
        Ok(())
    }
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes") + "\n"
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::usage(format!("csv encoding: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::usage(format!("csv encoding: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
