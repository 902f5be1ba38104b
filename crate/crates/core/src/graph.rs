//! Simple undirected graphs stored as sorted neighbor lists (CSR), edge-list
//! ingestion, and the exact matrix functionals `tr(A^m)` and `1'A^m 1`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{GcError, Result};

/// A simple undirected graph on nodes `0..n`.
///
/// Neighbor lists are sorted and contain no duplicates or self-loops. The graph
/// is immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

impl Graph {
    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        Graph {
            offsets: vec![0; n + 1],
            neighbors: Vec::new(),
        }
    }

    /// Builds a graph from unordered node pairs. Duplicate pairs (in either
    /// orientation) are merged; self-loops and out-of-range ids are errors.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(GcError::arg(format!(
                    "edge ({u}, {v}) references a node outside 0..{n}"
                )));
            }
            if u == v {
                return Err(GcError::arg(format!("self-loop at node {u}")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        Ok(Self::from_adjacency(adjacency))
    }

    fn from_adjacency(mut adjacency: Vec<Vec<usize>>) -> Self {
        let mut offsets = Vec::with_capacity(adjacency.len() + 1);
        offsets.push(0);
        let mut neighbors = Vec::new();
        for list in adjacency.iter_mut() {
            list.sort_unstable();
            list.dedup();
            neighbors.extend_from_slice(list);
            offsets.push(neighbors.len());
        }
        Graph { offsets, neighbors }
    }

    /// Builds from already-sorted, duplicate-free neighbor lists. Used by the
    /// samplers, which emit edges in row-major order.
    pub(crate) fn from_sorted_lists(lists: Vec<Vec<usize>>) -> Self {
        debug_assert!(lists
            .iter()
            .enumerate()
            .all(|(i, l)| l.windows(2).all(|w| w[0] < w[1]) && !l.contains(&i)));
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let total = lists.iter().map(Vec::len).sum();
        let mut neighbors = Vec::with_capacity(total);
        for list in &lists {
            neighbors.extend_from_slice(list);
            offsets.push(neighbors.len());
        }
        Graph { offsets, neighbors }
    }

    /// Complete graph `K_n`.
    pub fn complete(n: usize) -> Self {
        let lists = (0..n)
            .map(|i| (0..n).filter(|&j| j != i).collect())
            .collect();
        Self::from_sorted_lists(lists)
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.node_count() && self.neighbors(i).binary_search(&j).is_ok()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count()).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .copied()
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }

    /// Subgraph induced by `nodes`, relabeled to `0..nodes.len()` in increasing
    /// order of the original ids.
    pub fn induced_subgraph(&self, nodes: &BTreeSet<usize>) -> Result<Graph> {
        let n = self.node_count();
        if let Some(&bad) = nodes.iter().find(|&&v| v >= n) {
            return Err(GcError::arg(format!("node id {bad} out of range 0..{n}")));
        }
        let index: HashMap<usize, usize> =
            nodes.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let lists = nodes
            .iter()
            .map(|&old| {
                self.neighbors(old)
                    .iter()
                    .filter_map(|v| index.get(v).copied())
                    .collect()
            })
            .collect();
        Ok(Self::from_sorted_lists(lists))
    }

    /// Exact `tr(A^m)` for `m` in `{2, 3, 4}`.
    ///
    /// `m = 3` intersects sorted neighbor lists along every edge; `m = 4` uses
    /// `tr(A^4) = ||A^2||_F^2`, accumulating one row of `A^2` at a time.
    pub fn trace_power(&self, m: u32) -> Result<u64> {
        match m {
            2 => Ok(self.neighbors.len() as u64),
            3 => {
                let mut total: u64 = 0;
                for i in 0..self.node_count() {
                    let ni = self.neighbors(i);
                    for &j in ni {
                        let common = sorted_intersection_len(ni, self.neighbors(j)) as u64;
                        total = total.checked_add(common).ok_or(GcError::Overflow("tr(A^3)"))?;
                    }
                }
                Ok(total)
            }
            4 => {
                let n = self.node_count();
                let mut row = vec![0u64; n];
                let mut touched = Vec::new();
                let mut total: u64 = 0;
                for i in 0..n {
                    for &k in self.neighbors(i) {
                        for &j in self.neighbors(k) {
                            if row[j] == 0 {
                                touched.push(j);
                            }
                            row[j] += 1;
                        }
                    }
                    for &j in &touched {
                        let sq = row[j]
                            .checked_mul(row[j])
                            .ok_or(GcError::Overflow("tr(A^4)"))?;
                        total = total.checked_add(sq).ok_or(GcError::Overflow("tr(A^4)"))?;
                        row[j] = 0;
                    }
                    touched.clear();
                }
                Ok(total)
            }
            _ => Err(GcError::arg(format!("trace_power supports m in {{2,3,4}}, got {m}"))),
        }
    }

    /// Exact `1'A^m 1` (number of length-`m` walks) for `m` in `{1, 2, 3}`.
    pub fn total_walks(&self, m: u32) -> Result<u64> {
        let n = self.node_count();
        match m {
            1 => Ok(self.neighbors.len() as u64),
            2 => (0..n).try_fold(0u64, |acc, i| {
                let d = self.degree(i) as u64;
                acc.checked_add(d * d).ok_or(GcError::Overflow("1'A^2 1"))
            }),
            3 => {
                let mut total: u64 = 0;
                for i in 0..n {
                    let di = self.degree(i) as u64;
                    let neighbor_degrees: u64 =
                        self.neighbors(i).iter().map(|&j| self.degree(j) as u64).sum();
                    let term = di
                        .checked_mul(neighbor_degrees)
                        .ok_or(GcError::Overflow("1'A^3 1"))?;
                    total = total.checked_add(term).ok_or(GcError::Overflow("1'A^3 1"))?;
                }
                Ok(total)
            }
            _ => Err(GcError::arg(format!("total_walks supports m in {{1,2,3}}, got {m}"))),
        }
    }
}

fn sorted_intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut x, mut y, mut count) = (0, 0, 0);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                x += 1;
                y += 1;
            }
        }
    }
    count
}

/// External node names and optional named groups of nodes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct NodeLabeling {
    names: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
    groups: BTreeMap<String, BTreeSet<usize>>,
}

impl NodeLabeling {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, id: usize) -> Option<&str> {
        self.names.get(id).map(String::as_str)
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Returns the id for `name`, assigning the next free id on first sight.
    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn add_to_group(&mut self, group: &str, id: usize) -> Result<()> {
        if id >= self.names.len() {
            return Err(GcError::arg(format!("group member id {id} is not a known node")));
        }
        self.groups.entry(group.to_string()).or_default().insert(id);
        Ok(())
    }

    pub fn groups(&self) -> &BTreeMap<String, BTreeSet<usize>> {
        &self.groups
    }

    pub fn group(&self, name: &str) -> Option<&BTreeSet<usize>> {
        self.groups.get(name)
    }
}

/// Result of reading an edge list (and optionally a group file).
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub labeling: NodeLabeling,
    pub duplicate_edges: usize,
    pub self_loops: usize,
    /// Nodes first seen in a group file rather than in the edge list.
    pub group_only_nodes: usize,
}

/// Incremental reader for edge lists and group files sharing one name table.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    labeling: NodeLabeling,
    edges: BTreeSet<(usize, usize)>,
    duplicate_edges: usize,
    self_loops: usize,
    group_only_nodes: usize,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, name: &str) -> usize {
        self.labeling.intern(name)
    }

    /// Adds an undirected edge between two ids; returns false if it was
    /// a self-loop or a duplicate (both are counted, not stored).
    pub fn add_edge_ids(&mut self, u: usize, v: usize) -> bool {
        if u == v {
            self.self_loops += 1;
            return false;
        }
        let key = (u.min(v), u.max(v));
        if !self.edges.insert(key) {
            self.duplicate_edges += 1;
            return false;
        }
        true
    }

    pub fn add_edge(&mut self, a: &str, b: &str) -> bool {
        let u = self.labeling.intern(a);
        let v = self.labeling.intern(b);
        self.add_edge_ids(u, v)
    }

    /// Reads lines of two whitespace-separated node names. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn read_edge_list(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 2 {
                return Err(GcError::Parse {
                    line: lineno + 1,
                    message: format!("expected two node names, found {} tokens", tokens.len()),
                });
            }
            self.add_edge(tokens[0], tokens[1]);
        }
        Ok(())
    }

    /// Reads lines of `group_name node_name`. If a line contains a tab it is
    /// split at the first tab; otherwise the last token is the node name and
    /// everything before it is the group name, so group names may contain spaces.
    pub fn read_groups(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let split = match line.split_once('\t') {
                Some((g, v)) => Some((g.trim(), v.trim())),
                None => line.rsplit_once(char::is_whitespace).map(|(g, v)| (g.trim(), v.trim())),
            };
            let (group, node) = match split {
                Some((g, v)) if !g.is_empty() && !v.is_empty() => (g, v),
                _ => {
                    return Err(GcError::Parse {
                        line: lineno + 1,
                        message: "expected `group_name node_name`".into(),
                    })
                }
            };
            let known = self.labeling.id(node).is_some();
            let id = self.labeling.intern(node);
            if !known {
                self.group_only_nodes += 1;
            }
            self.labeling.add_to_group(group, id)?;
        }
        Ok(())
    }

    pub fn add_to_group(&mut self, group: &str, id: usize) -> Result<()> {
        self.labeling.add_to_group(group, id)
    }

    pub fn build(self) -> LoadedGraph {
        let n = self.labeling.len();
        let mut lists = vec![Vec::new(); n];
        for &(u, v) in &self.edges {
            lists[u].push(v);
            lists[v].push(u);
        }
        for list in lists.iter_mut() {
            list.sort_unstable();
        }
        if self.self_loops > 0 || self.duplicate_edges > 0 {
            log::warn!(
                "dropped {} self-loops and {} duplicate edges",
                self.self_loops,
                self.duplicate_edges
            );
        }
        LoadedGraph {
            graph: Graph::from_sorted_lists(lists),
            labeling: self.labeling,
            duplicate_edges: self.duplicate_edges,
            self_loops: self.self_loops,
            group_only_nodes: self.group_only_nodes,
        }
    }
}

/// Parses an undirected edge list. Node ids follow first appearance.
pub fn load_edge_list(text: &str) -> Result<LoadedGraph> {
    let mut builder = GraphBuilder::new();
    builder.read_edge_list(text)?;
    Ok(builder.build())
}

/// Writes one `name name` line per edge. Nodes without edges are not
/// representable in this format and are lost.
pub fn to_edge_list(graph: &Graph, labeling: Option<&NodeLabeling>) -> String {
    let mut out = String::new();
    for (i, j) in graph.edges() {
        match labeling {
            Some(l) => {
                let a = l.name(i).map(str::to_string).unwrap_or_else(|| i.to_string());
                let b = l.name(j).map(str::to_string).unwrap_or_else(|| j.to_string());
                let _ = writeln!(out, "{a} {b}");
            }
            None => {
                let _ = writeln!(out, "{i} {j}");
            }
        }
    }
    out
}
