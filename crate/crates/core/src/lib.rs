//! Graphlet Count (GC) global tests for network community structure.
//!
//! The crate counts self-avoiding paths and cycles of length up to four through
//! exact trace identities on the adjacency matrix, turns them into the GC
//! statistic and its standardized score, and provides the machinery around it:
//! a degree-corrected mixed-membership (DCMM) simulator, spectral power
//! proxies and a reproducible Monte Carlo harness.
//!
//! ```
//! use gcnet::graph::load_edge_list;
//! use gcnet::gc_test::gc_test;
//!
//! let loaded = load_edge_list("a b\nb c\nc a\nc d\nd e\ne c\n").unwrap();
//! let result = gc_test(&loaded.graph, 4, 0.05).unwrap();
//! assert!(result.p_value >= 0.0 && result.p_value <= 1.0);
//! ```

pub mod dcmm;
pub mod error;
pub mod gml;
pub mod graph;
pub mod graphlet;
pub mod harness;
pub mod normal;
pub mod params_file;
pub mod power;

pub use dcmm::{DcmmParams, OmegaMatrix, OmegaPolicy};
pub use error::{GcError, Result};
pub use gc_test::{gc_score, gc_test, GcScore, TestResult};
pub use graph::{Graph, NodeLabeling};
pub use graphlet::GraphletCounts;
pub use power::{PowerReport, SpectralSummary};
