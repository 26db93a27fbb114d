//! Bundled example networks.

use std::fs;
use std::path::Path;

use adtnet_core::format;
use serde::Serialize;

use crate::commands::CliError;
use crate::report::{table, Outcome, Status};

pub const FIXTURES: [(&str, &str); 9] = [
    ("fig2.json", include_str!("../../../fixtures/fig2.json")),
    ("diamond.json", include_str!("../../../fixtures/diamond.json")),
    ("parallel.json", include_str!("../../../fixtures/parallel.json")),
    ("cycle2.json", include_str!("../../../fixtures/cycle2.json")),
    ("multisource.json", include_str!("../../../fixtures/multisource.json")),
    ("butterfly.json", include_str!("../../../fixtures/butterfly.json")),
    ("combination.json", include_str!("../../../fixtures/combination.json")),
    ("broadcast.json", include_str!("../../../fixtures/broadcast.json")),
    ("twolevel.json", include_str!("../../../fixtures/twolevel.json")),
];

const README: &str = include_str!("../../../fixtures/README.md");

#[derive(Serialize)]
struct Summary {
    name: &'static str,
    nodes: usize,
    ports: usize,
    edges: usize,
    class: Option<String>,
    delay: bool,
    erasures: bool,
}

#[derive(Serialize)]
struct Written {
    written: Vec<String>,
}

fn find(name: &str) -> Option<(&'static str, &'static str)> {
    FIXTURES.iter().copied().find(|(n, _)| *n == name || n.trim_end_matches(".json") == name)
}

pub fn run(show: Option<&str>, out: Option<&Path>) -> Result<Outcome, CliError> {
    if let Some(name) = show {
        let (name, text) = find(name).ok_or_else(|| CliError::Usage(format!("no fixture named `{name}`")))?;
        let value: serde_json::Value = serde_json::from_str(text).expect("bundled fixtures parse");
        #[derive(Serialize)]
        struct Shown {
            name: &'static str,
            network: serde_json::Value,
        }
        return Ok(Outcome::new(Status::Ok, &Shown { name, network: value }, text.to_string()));
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let mut written = Vec::new();
        for (name, text) in FIXTURES.iter().copied().chain([("README.md", README)]) {
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
            written.push(path.display().to_string());
        }
        let table = written.join("\n");
        return Ok(Outcome::new(Status::Ok, &Written { written }, table));
    }
    let summaries: Vec<Summary> = FIXTURES
        .iter()
        .map(|&(name, text)| {
            let net = format::load(text).expect("bundled fixtures load");
            Summary {
                name,
                nodes: net.nodes().len(),
                ports: net.num_ports(),
                edges: net.edges().len(),
                class: net.connections().map(|c| c.class.to_string()),
                delay: net.is_delay(),
                erasures: net.erasures().is_some(),
            }
        })
        .collect();
    let rows: Vec<Vec<String>> = summaries
        .iter()
        .map(|s| {
            let mut notes = Vec::new();
            if s.delay {
                notes.push("delay");
            }
            if s.erasures {
                notes.push("erasures");
            }
            vec![
                s.name.to_string(),
                s.nodes.to_string(),
                s.ports.to_string(),
                s.edges.to_string(),
                s.class.clone().unwrap_or_else(|| "-".into()),
                notes.join(","),
            ]
        })
        .collect();
    let text = table(&["fixture", "nodes", "ports", "edges", "class", "notes"], &rows);
    Ok(Outcome::new(Status::Ok, &summaries, text))
}
