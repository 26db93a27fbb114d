//! Report envelope and rendering.
//!
//! JSON reports are `{"schema_version": 1, "command", "status", "result"}`
//! with `status` one of `ok`, `infeasible`, `invalid` or `error`.

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Infeasible,
    Invalid,
}

#[derive(Debug)]
pub struct Outcome {
    status: Status,
    result: serde_json::Value,
    table: String,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    status: &'a str,
    result: T,
}

fn envelope<T: Serialize>(command: &str, status: &str, result: T) -> String {
    let env = Envelope { schema_version: SCHEMA_VERSION, command, status, result };
    let mut s = serde_json::to_string_pretty(&env).expect("report serializes");
    s.push('\n');
    s
}

impl Outcome {
    pub fn new(status: Status, result: &impl Serialize, table: String) -> Self {
        let result = serde_json::to_value(result).expect("report serializes");
        Outcome { status, result, table }
    }

    pub fn exit_code(&self) -> u8 {
        match self.status {
            Status::Ok => 0,
            Status::Infeasible => 2,
            Status::Invalid => 1,
        }
    }

    pub fn render(&self, format: Format, command: &str) -> String {
        match format {
            Format::Json => {
                let status = serde_json::to_value(self.status).expect("status serializes");
                envelope(command, status.as_str().expect("string"), &self.result)
            }
            Format::Table => {
                let mut t = self.table.clone();
                if !t.ends_with('\n') {
                    t.push('\n');
                }
                t
            }
        }
    }
}

#[derive(Serialize)]
struct ErrorResult<'a> {
    message: &'a str,
}

pub fn error_envelope(command: &str, message: &str) -> String {
    envelope(command, "error", ErrorResult { message })
}

/// Left-aligned columns separated by two spaces.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: Vec<String>| {
        let parts: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        parts.join("  ").trim_end().to_string()
    };
    let mut out = vec![line(header.iter().map(|h| h.to_string()).collect())];
    out.extend(rows.iter().map(|r| line(r.clone())));
    out.join("\n") + "\n"
}
