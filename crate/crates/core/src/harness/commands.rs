//! Counting and testing on user-supplied graphs.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::error::{GcError, Result};
use crate::gc_test::{check_alpha, score_from_counts, TestResult};
use crate::graph::{GraphBuilder, LoadedGraph};
use crate::graphlet::{CountNumerators, GraphletCounts};

#[derive(Debug, Clone, Serialize)]
pub struct CountRecord {
    pub n: usize,
    pub edges: usize,
    pub densities: GraphletCounts,
    pub numerators: CountNumerators,
    pub duplicate_edges: usize,
    pub self_loops: usize,
    pub seconds: f64,
}

pub fn cmd_count(loaded: &LoadedGraph) -> Result<CountRecord> {
    let g = &loaded.graph;
    if g.node_count() == 0 {
        return Err(GcError::arg("the graph has no nodes"));
    }
    let start = Instant::now();
    let densities = GraphletCounts::from_graph(g)?;
    Ok(CountRecord {
        n: g.node_count(),
        edges: g.edge_count(),
        numerators: densities.numerators,
        densities,
        duplicate_edges: loaded.duplicate_edges,
        self_loops: loaded.self_loops,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// One `(graph, m)` row. Exactly one of `result` and `error` is set.
#[derive(Debug, Clone, Serialize)]
pub struct TestRow {
    /// `"all"` for the full graph, otherwise the group name.
    pub graph: String,
    pub size: usize,
    pub m: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<TestResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TestRow {
    fn failed(graph: &str, size: usize, m: u32, error: &GcError) -> Self {
        TestRow { graph: graph.to_string(), size, m, result: None, error: Some(error.to_string()) }
    }
}

/// Label used for rows of the full graph.
pub const FULL_GRAPH: &str = "all";

fn test_graph(name: &str, g: &crate::graph::Graph, ms: &[u32], alpha: f64) -> Vec<TestRow> {
    let n = g.node_count();
    let counts = match GraphletCounts::from_graph(g) {
        Ok(c) => c,
        Err(e) => return ms.iter().map(|&m| TestRow::failed(name, n, m, &e)).collect(),
    };
    ms.iter()
        .map(|&m| {
            match score_from_counts(&counts, m).and_then(|s| TestResult::from_score(s, alpha, n, g.edge_count())) {
                Ok(r) => TestRow { graph: name.to_string(), size: n, m, result: Some(r), error: None },
                Err(e) => TestRow::failed(name, n, m, &e),
            }
        })
        .collect()
}

/// Tests the full graph and, with `groups`, the subgraph induced by each group.
/// Problems with a single row are reported in that row.
pub fn cmd_test(loaded: &LoadedGraph, with_groups: bool, ms: &[u32], alpha: f64) -> Result<Vec<TestRow>> {
    check_alpha(alpha)?;
    if ms.is_empty() {
        return Err(GcError::arg("no orders m requested"));
    }
    let mut rows = test_graph(FULL_GRAPH, &loaded.graph, ms, alpha);
    if with_groups {
        for (name, members) in loaded.labeling.groups() {
            if members.is_empty() {
                let e = GcError::arg("group is empty");
                rows.extend(ms.iter().map(|&m| TestRow::failed(name, 0, m, &e)));
                continue;
            }
            match loaded.graph.induced_subgraph(members) {
                Ok(sub) => rows.extend(test_graph(name, &sub, ms, alpha)),
                Err(e) => rows.extend(ms.iter().map(|&m| TestRow::failed(name, members.len(), m, &e))),
            }
        }
    }
    Ok(rows)
}

/// Loads an edge list and an optional group file, then runs [`cmd_test`].
/// An unreadable or malformed group file becomes an error row; the edge list
/// itself must load.
pub fn cmd_test_files(edges: &Path, groups: Option<&Path>, ms: &[u32], alpha: f64) -> Result<Vec<TestRow>> {
    let mut builder = GraphBuilder::new();
    builder.read_edge_list(&std::fs::read_to_string(edges)?)?;
    let group_error = match groups {
        Some(path) => std::fs::read_to_string(path)
            .map_err(GcError::from)
            .and_then(|text| builder.read_groups(&text))
            .err(),
        None => None,
    };
    let loaded = builder.build();
    if loaded.graph.node_count() == 0 {
        return Err(GcError::arg("the edge list has no edges"));
    }
    let mut rows = cmd_test(&loaded, groups.is_some() && group_error.is_none(), ms, alpha)?;
    if let Some(e) = group_error {
        rows.extend(ms.iter().map(|&m| TestRow::failed("groups", 0, m, &e)));
    }
    Ok(rows)
}

/// True when every row failed.
pub fn all_failed(rows: &[TestRow]) -> bool {
    rows.iter().all(|r| r.result.is_none())
}

pub fn rows_to_csv(rows: &[TestRow]) -> String {
    let mut out = String::from("graph,size,m,chi,score,p_value,p_value_two_sided,reject,degenerate,error\n");
    for r in rows {
        let name = csv_field(&r.graph);
        match (&r.result, &r.error) {
            (Some(t), _) => {
                let _ = writeln!(
                    out,
                    "{name},{},{},{},{},{},{},{},{},",
                    r.size, r.m, t.chi, t.score, t.p_value, t.p_value_two_sided, t.reject, t.degenerate
                );
            }
            (None, e) => {
                let _ = writeln!(out, "{name},{},{},,,,,,,{}", r.size, r.m, csv_field(e.as_deref().unwrap_or("")));
            }
        }
    }
    out
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::load_edge_list;

    #[test]
    fn count_triangle() {
        let record = cmd_count(&load_edge_list("a b\nb c\nc a\n").unwrap()).unwrap();
        assert_eq!(record.densities.c3, Some(1.0));
        assert_eq!(record.densities.l2, Some(1.0));
        assert_eq!(record.numerators.cycles3, 6);
        assert!(cmd_count(&load_edge_list("").unwrap()).is_err());
    }

    #[test]
    fn group_rows() {
        let mut builder = GraphBuilder::new();
        builder
            .read_edge_list("a b\nb c\nc a\nc d\nd e\ne a\nb d\na f\nf g\ng a\n")
            .unwrap();
        builder.read_groups("everything a\neverything b\neverything c\neverything d\neverything e\neverything f\neverything g\nsmall a\nsmall b\n").unwrap();
        let loaded = builder.build();
        let rows = cmd_test(&loaded, true, &[3, 4], 0.05).unwrap();
        assert_eq!(rows.len(), 6);
        let full: Vec<_> = rows.iter().filter(|r| r.graph == FULL_GRAPH).collect();
        let same: Vec<_> = rows.iter().filter(|r| r.graph == "everything").collect();
        for (f, s) in full.iter().zip(&same) {
            assert_eq!(f.result.unwrap().score, s.result.unwrap().score);
        }
        let small: Vec<_> = rows.iter().filter(|r| r.graph == "small").collect();
        assert!(small.iter().all(|r| r.error.is_some() && r.result.is_none()));
        assert!(!all_failed(&rows));
        let csv = rows_to_csv(&rows);
        assert_eq!(csv.lines().count(), 7);
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("Big East"), "Big East");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
