//! The college football network (Division I-A, Fall 2000) and the
//! per-conference tests.
//!
//! The dataset is the usual `football.gml`: one node per team with its
//! conference index in the `value` attribute. It is not bundled; point
//! [`FOOTBALL_ENV`] at a local copy.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::commands::csv_field;
use super::reference::{ConferenceRow, FOOTBALL_TABLE};
use crate::error::{GcError, Result};
use crate::gc_test::{gc_score, TestResult};
use crate::gml::parse_gml;
use crate::graph::{Graph, LoadedGraph};

/// Environment variable holding the path of `football.gml`.
pub const FOOTBALL_ENV: &str = "GCNET_FOOTBALL_GML";

/// Conference names indexed by the `value` attribute of the dataset.
pub const CONFERENCES: [&str; 12] = [
    "Atlantic Coast",
    "Big East",
    "Big Ten",
    "Big Twelve",
    "Conference USA",
    "Independents",
    "Mid-American",
    "Mountain West",
    "Pacific Ten",
    "Southeastern",
    "Sun Belt",
    "Western Athletic",
];

/// Not a conference; left out of the per-conference tests.
pub const INDEPENDENTS: &str = "Independents";
pub const WAC: &str = "Western Athletic";
/// The WAC team that played no conference game in the data range.
pub const WAC_OUTLIER: &str = "BoiseState";

/// Where to look for the dataset: [`FOOTBALL_ENV`], then `data/football.gml`
/// under the current directory and its ancestors.
pub fn locate_dataset() -> Option<PathBuf> {
    if let Some(p) = std::env::var_os(FOOTBALL_ENV) {
        return Some(PathBuf::from(p));
    }
    let mut dir = std::env::current_dir().ok()?;
    loop {
        let candidate = dir.join("data").join("football.gml");
        if candidate.is_file() {
            return Some(candidate);
        }
        if !dir.pop() {
            return None;
        }
    }
}

#[derive(Debug, Clone)]
pub struct FootballData {
    pub loaded: LoadedGraph,
    /// Hex SHA-256 of the file contents, to identify the dataset version.
    pub sha256: String,
}

pub fn parse_football(text: &str) -> Result<FootballData> {
    let names: BTreeMap<String, String> = CONFERENCES
        .iter()
        .enumerate()
        .filter(|(_, name)| **name != INDEPENDENTS)
        .map(|(i, name)| (i.to_string(), name.to_string()))
        .collect();
    let loaded = parse_gml(text)?.to_loaded(Some("value"), Some(&names))?;
    let sha256 = Sha256::digest(text.as_bytes()).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    });
    Ok(FootballData { loaded, sha256 })
}

pub fn load_football(path: &Path) -> Result<FootballData> {
    parse_football(&std::fs::read_to_string(path)?)
}

/// Scores and p-values of one (sub)graph for both orders.
#[derive(Debug, Clone, Serialize)]
pub struct FootballRow {
    pub graph: String,
    pub size: usize,
    pub m3: TestResult,
    pub m4: TestResult,
}

fn test_row(name: &str, g: &Graph, alpha: f64) -> Result<FootballRow> {
    let result = |m| TestResult::from_score(gc_score(g, m)?, alpha, g.node_count(), g.edge_count());
    Ok(FootballRow { graph: name.to_string(), size: g.node_count(), m3: result(3)?, m4: result(4)? })
}

#[derive(Debug, Clone, Serialize)]
pub struct FootballReport {
    pub sha256: String,
    pub n: usize,
    pub edges: usize,
    pub duplicate_edges: usize,
    pub whole: FootballRow,
    pub conferences: Vec<FootballRow>,
    pub wac_without_outlier: FootballRow,
}

pub fn analyze(data: &FootballData, alpha: f64) -> Result<FootballReport> {
    let g = &data.loaded.graph;
    let labels = &data.loaded.labeling;
    let whole = test_row("all", g, alpha)?;
    let mut conferences = Vec::new();
    for row in FOOTBALL_TABLE {
        let members = labels
            .group(row.conference)
            .ok_or_else(|| GcError::arg(format!("conference {:?} not found in the dataset", row.conference)))?;
        conferences.push(test_row(row.conference, &g.induced_subgraph(members)?, alpha)?);
    }
    let outlier = labels
        .id(WAC_OUTLIER)
        .ok_or_else(|| GcError::arg(format!("team {WAC_OUTLIER:?} not found in the dataset")))?;
    let mut wac: BTreeSet<usize> = labels.group(WAC).cloned().unwrap_or_default();
    if !wac.remove(&outlier) {
        return Err(GcError::arg(format!("{WAC_OUTLIER} is not in {WAC}")));
    }
    let wac_without_outlier = test_row(&format!("{WAC} without {WAC_OUTLIER}"), &g.induced_subgraph(&wac)?, alpha)?;
    Ok(FootballReport {
        sha256: data.sha256.clone(),
        n: g.node_count(),
        edges: g.edge_count(),
        duplicate_edges: data.loaded.duplicate_edges,
        whole,
        conferences,
        wac_without_outlier,
    })
}

/// One reproduced quantity that misses its reference value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discrepancy {
    pub conference: String,
    pub quantity: String,
    pub expected: f64,
    pub observed: f64,
}

/// Compares conference rows with the published table: sizes exactly, scores
/// within `score_tol`, p-values within `p_tol` (two-sided for `m = 3`,
/// one-sided for `m = 4`, as published).
pub fn compare_with_reference(report: &FootballReport, score_tol: f64, p_tol: f64) -> Vec<Discrepancy> {
    let mut out = Vec::new();
    for (row, reference) in report.conferences.iter().zip(FOOTBALL_TABLE.iter()) {
        let ConferenceRow { conference, size, score3, p3, score4, p4 } = *reference;
        let checks = [
            ("size", size as f64, row.size as f64, 0.0),
            ("score m=3", score3, row.m3.score, score_tol),
            ("p m=3", p3, row.m3.p_value_two_sided, p_tol),
            ("score m=4", score4, row.m4.score, score_tol),
            ("p m=4", p4, row.m4.p_value, p_tol),
        ];
        for (quantity, expected, observed, tol) in checks {
            // Published values carry two decimals.
            if (expected - observed).abs() > tol + 1e-9 {
                out.push(Discrepancy {
                    conference: conference.to_string(),
                    quantity: quantity.to_string(),
                    expected,
                    observed,
                });
            }
        }
    }
    out
}

impl FootballReport {
    /// `conference,size,score3,p3_two_sided,score4,p4` with two decimals, the
    /// whole network first and the WAC without its outlier last.
    pub fn to_table_csv(&self) -> String {
        let mut out = String::from("conference,size,score3,p3_two_sided,score4,p4\n");
        let rows = std::iter::once(&self.whole)
            .chain(&self.conferences)
            .chain(std::iter::once(&self.wac_without_outlier));
        for r in rows {
            let _ = writeln!(
                out,
                "{},{},{:.2},{:.2},{:.2},{:.2}",
                csv_field(&r.graph),
                r.size,
                r.m3.score,
                r.m3.p_value_two_sided,
                r.m4.score,
                r.m4.p_value
            );
        }
        out
    }
}
