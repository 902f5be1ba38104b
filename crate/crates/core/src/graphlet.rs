//! Path and cycle densities.
//!
//! All counts are over *ordered* tuples of distinct nodes, so an undirected
//! path of length `m` contributes 2 and an undirected `m`-cycle contributes
//! `2m`. Closed forms (valid for path lengths 1..=3 and cycle lengths 3..=4):
//!
//! ```text
//! paths(1)  = 1'A1
//! paths(2)  = 1'A^2 1 - tr(A^2)
//! paths(3)  = 1'A^3 1 - 2 (1'A^2 1) + 1'A1 - tr(A^3)
//! cycles(3) = tr(A^3)
//! cycles(4) = tr(A^4) - 2 (1'A^2 1) + 1'A1
//! ```
//!
//! Each density divides its count by the number of ordered distinct tuples of
//! the same size, `B(n, k) = n (n-1) ... (n-k+1)`.

use serde::Serialize;

use crate::error::{GcError, Result};
use crate::graph::Graph;

/// Upper bound on the number of tuples the brute-force enumerators may visit.
pub const ENUMERATION_GUARD: f64 = 1e8;

/// Exact falling factorial `n (n-1) ... (n-m+1)`.
pub fn falling_factorial(n: u64, m: u64) -> Result<u64> {
    if m > n {
        return Err(GcError::arg(format!("falling factorial needs m <= n, got n={n}, m={m}")));
    }
    (0..m).try_fold(1u64, |acc, s| {
        acc.checked_mul(n - s).ok_or(GcError::Overflow("falling factorial"))
    })
}

/// Floating-point falling factorial; used for density denominators where the
/// exact value may exceed 64 bits.
pub fn falling_factorial_f64(n: usize, m: usize) -> f64 {
    (0..m).map(|s| n as f64 - s as f64).product()
}

/// Ordered-tuple counts of paths of length `m` (1..=3).
pub fn path_count(g: &Graph, m: u32) -> Result<u64> {
    let count: i128 = match m {
        1 => g.total_walks(1)? as i128,
        2 => g.total_walks(2)? as i128 - g.trace_power(2)? as i128,
        3 => {
            g.total_walks(3)? as i128 - 2 * g.total_walks(2)? as i128 + g.total_walks(1)? as i128
                - g.trace_power(3)? as i128
        }
        _ => return Err(GcError::arg(format!("closed-form path counts need m in 1..=3, got {m}"))),
    };
    u64::try_from(count).map_err(|_| GcError::Overflow("path count"))
}

/// Ordered-tuple counts of `m`-cycles (3..=4).
pub fn cycle_count(g: &Graph, m: u32) -> Result<u64> {
    let count: i128 = match m {
        3 => g.trace_power(3)? as i128,
        4 => {
            g.trace_power(4)? as i128 - 2 * g.total_walks(2)? as i128 + g.total_walks(1)? as i128
        }
        _ => return Err(GcError::arg(format!("closed-form cycle counts need m in 3..=4, got {m}"))),
    };
    u64::try_from(count).map_err(|_| GcError::Overflow("cycle count"))
}

/// Density of length-`m` self-avoiding paths, `m` in 1..=3.
pub fn path_density(g: &Graph, m: u32) -> Result<f64> {
    let n = g.node_count();
    if n <= m as usize {
        return Err(GcError::arg(format!("path density of length {m} needs n > {m}, got n={n}")));
    }
    Ok(path_count(g, m)? as f64 / falling_factorial_f64(n, m as usize + 1))
}

/// Density of `m`-cycles, `m` in 3..=4.
pub fn cycle_density(g: &Graph, m: u32) -> Result<f64> {
    let n = g.node_count();
    if n < m as usize {
        return Err(GcError::arg(format!("cycle density of length {m} needs n >= {m}, got n={n}")));
    }
    Ok(cycle_count(g, m)? as f64 / falling_factorial_f64(n, m as usize))
}

/// Raw ordered-tuple counts behind [`GraphletCounts`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CountNumerators {
    pub paths1: u64,
    pub paths2: u64,
    pub paths3: u64,
    pub cycles3: u64,
    pub cycles4: u64,
}

/// All implemented densities of one graph. A density is `None` when the graph
/// has too few nodes to contain the corresponding tuple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GraphletCounts {
    pub n: usize,
    #[serde(rename = "L1")]
    pub l1: Option<f64>,
    #[serde(rename = "L2")]
    pub l2: Option<f64>,
    #[serde(rename = "L3")]
    pub l3: Option<f64>,
    #[serde(rename = "C3")]
    pub c3: Option<f64>,
    #[serde(rename = "C4")]
    pub c4: Option<f64>,
    #[serde(skip)]
    pub numerators: CountNumerators,
}

impl GraphletCounts {
    /// Computes every density. Needs at least two nodes.
    pub fn from_graph(g: &Graph) -> Result<Self> {
        let n = g.node_count();
        if n < 2 {
            return Err(GcError::arg(format!("graphlet counts need at least 2 nodes, got {n}")));
        }
        // Shared functionals, each computed once.
        let w1 = g.total_walks(1)? as i128;
        let w2 = g.total_walks(2)? as i128;
        let w3 = g.total_walks(3)? as i128;
        let t2 = g.trace_power(2)? as i128;
        let t3 = g.trace_power(3)? as i128;
        let t4 = g.trace_power(4)? as i128;
        let to_u64 = |v: i128, what| u64::try_from(v).map_err(|_| GcError::Overflow(what));
        let numerators = CountNumerators {
            paths1: to_u64(w1, "path count")?,
            paths2: to_u64(w2 - t2, "path count")?,
            paths3: to_u64(w3 - 2 * w2 + w1 - t3, "path count")?,
            cycles3: to_u64(t3, "cycle count")?,
            cycles4: to_u64(t4 - 2 * w2 + w1, "cycle count")?,
        };
        let density = |count: u64, k: usize| {
            (n >= k).then(|| count as f64 / falling_factorial_f64(n, k))
        };
        Ok(GraphletCounts {
            n,
            l1: density(numerators.paths1, 2),
            l2: density(numerators.paths2, 3),
            l3: density(numerators.paths3, 4),
            c3: density(numerators.cycles3, 3),
            c4: density(numerators.cycles4, 4),
            numerators,
        })
    }

    /// Path density `L_m` for `m` in 1..=3.
    pub fn path(&self, m: u32) -> Option<f64> {
        match m {
            1 => self.l1,
            2 => self.l2,
            3 => self.l3,
            _ => None,
        }
    }

    /// Cycle density `C_m` for `m` in 3..=4.
    pub fn cycle(&self, m: u32) -> Option<f64> {
        match m {
            3 => self.c3,
            4 => self.c4,
            _ => None,
        }
    }
}

/// Counts ordered distinct tuples by depth-first search, pruning at the first
/// missing edge of the prefix.
fn enumerate_tuples(g: &Graph, len: usize, closed: bool) -> Result<u64> {
    let n = g.node_count();
    if len == 0 || len > n {
        return Ok(0);
    }
    let required = falling_factorial_f64(n, len);
    if required > ENUMERATION_GUARD {
        return Err(GcError::Resource { required, limit: ENUMERATION_GUARD });
    }

    fn extend(
        g: &Graph,
        tuple: &mut Vec<usize>,
        used: &mut [bool],
        len: usize,
        closed: bool,
        count: &mut u64,
    ) {
        if tuple.len() == len {
            if !closed || g.has_edge(tuple[len - 1], tuple[0]) {
                *count += 1;
            }
            return;
        }
        let last = *tuple.last().expect("tuple starts non-empty");
        for &next in g.neighbors(last) {
            if used[next] {
                continue;
            }
            used[next] = true;
            tuple.push(next);
            extend(g, tuple, used, len, closed, count);
            tuple.pop();
            used[next] = false;
        }
    }

    let mut count = 0u64;
    let mut used = vec![false; n];
    let mut tuple = Vec::with_capacity(len);
    for start in 0..n {
        used[start] = true;
        tuple.push(start);
        extend(g, &mut tuple, &mut used, len, closed, &mut count);
        tuple.pop();
        used[start] = false;
    }
    Ok(count)
}

/// Ordered-tuple path count by literal enumeration; any `m >= 1`.
pub fn brute_force_path_count(g: &Graph, m: u32) -> Result<u64> {
    if m == 0 {
        return Err(GcError::arg("path length must be at least 1"));
    }
    enumerate_tuples(g, m as usize + 1, false)
}

/// Ordered-tuple cycle count by literal enumeration; any `m >= 3`.
pub fn brute_force_cycle_count(g: &Graph, m: u32) -> Result<u64> {
    if m < 3 {
        return Err(GcError::arg("cycle length must be at least 3"));
    }
    enumerate_tuples(g, m as usize, true)
}

pub fn brute_force_path_density(g: &Graph, m: u32) -> Result<f64> {
    let n = g.node_count();
    if n <= m as usize {
        return Err(GcError::arg(format!("path density of length {m} needs n > {m}, got n={n}")));
    }
    Ok(brute_force_path_count(g, m)? as f64 / falling_factorial_f64(n, m as usize + 1))
}

pub fn brute_force_cycle_density(g: &Graph, m: u32) -> Result<f64> {
    let n = g.node_count();
    if n < m as usize {
        return Err(GcError::arg(format!("cycle density of length {m} needs n >= {m}, got n={n}")));
    }
    Ok(brute_force_cycle_count(g, m)? as f64 / falling_factorial_f64(n, m as usize))
}
