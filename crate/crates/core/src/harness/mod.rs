//! Reproducible Monte Carlo experiments and the data-file commands behind the CLI.
//!
//! Replicate `r` of an experiment draws all of its randomness from
//! [`stream_rng`]`(seed, stream(r))`, so reports do not depend on how
//! replicates are spread over worker threads.

pub mod commands;
pub mod experiments;
pub mod football;
pub mod reference;

use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::dcmm::{pareto_theta, sample_graph_with, stream_rng, DcmmParams, OmegaPolicy, ThetaScaling, GENERATOR_ID};
use crate::error::{GcError, Result};
use crate::gc_test::{check_alpha, score_from_counts, TestResult};
use crate::graphlet::GraphletCounts;
use crate::normal;
use crate::power::{predicted_power, SpectralSummary};

/// Runs `task(index)` for every index in `0..count`, on `workers` threads
/// (all cores when `None`). Results come back in index order; the first
/// failure is reported with its replicate index.
pub fn run_replicates<T, F>(count: u64, workers: Option<usize>, task: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let wrap = |index: u64| task(index).map_err(|e| GcError::Replicate { index, source: Box::new(e) });
    match workers {
        Some(0) => Err(GcError::arg("workers must be at least 1")),
        Some(1) => (0..count).map(wrap).collect(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| GcError::Numerical(format!("cannot start worker pool: {e}")))?
            .install(|| (0..count).into_par_iter().map(wrap).collect()),
        None => (0..count).into_par_iter().map(wrap).collect(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub replicates: u64,
    pub seed: u64,
    pub alpha: f64,
    /// Worker threads; `None` uses every core. Never affects results.
    #[serde(skip)]
    pub workers: Option<usize>,
    pub omega_policy: OmegaPolicy,
}

impl ExperimentConfig {
    pub const DEFAULT_REPLICATES: u64 = 500;
    pub const DEFAULT_ALPHA: f64 = 0.05;

    pub fn new(name: impl Into<String>, seed: u64) -> Self {
        ExperimentConfig {
            name: name.into(),
            replicates: Self::DEFAULT_REPLICATES,
            seed,
            alpha: Self::DEFAULT_ALPHA,
            workers: None,
            omega_policy: OmegaPolicy::Clip,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(GcError::arg("replicate count must be at least 1"));
        }
        check_alpha(self.alpha)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub seed: u64,
    pub generator: String,
    pub version: String,
    pub omega_policy: OmegaPolicy,
    /// Node pairs whose probability exceeded 1 and was clipped, over all replicates.
    pub clipped_pairs: u64,
    /// Replicates with at least one clipped pair.
    pub clipped_replicates: u64,
}

impl Metadata {
    fn new(config: &ExperimentConfig) -> Self {
        Metadata {
            seed: config.seed,
            generator: GENERATOR_ID.to_string(),
            version: concat!("gcnet ", env!("CARGO_PKG_VERSION")).to_string(),
            omega_policy: config.omega_policy,
            clipped_pairs: 0,
            clipped_replicates: 0,
        }
    }
}

/// A DCMM family whose `theta` is redrawn for every replicate.
#[derive(Debug, Clone)]
pub struct ParetoModel {
    pub block_sizes: Vec<usize>,
    pub mixed: Vec<Vec<f64>>,
    pub community: DMatrix<f64>,
    pub shape: f64,
    pub scale: f64,
    pub scaling: ThetaScaling,
}

impl ParetoModel {
    pub fn n(&self) -> usize {
        self.block_sizes.iter().sum::<usize>() + self.mixed.len()
    }

    pub fn draw<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Result<DcmmParams> {
        let theta = pareto_theta(self.n(), self.shape, self.scale, self.scaling, rng)?;
        DcmmParams::with_blocks(theta, &self.block_sizes, &self.mixed, self.community.clone())
    }
}

#[derive(Debug, Clone)]
pub enum ModelSpec {
    /// The same parameters in every replicate.
    Fixed(DcmmParams),
    /// `theta` drawn from the replicate's stream before the graph.
    Pareto(ParetoModel),
}

impl ModelSpec {
    pub fn draw<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Result<DcmmParams> {
        match self {
            ModelSpec::Fixed(p) => Ok(p.clone()),
            ModelSpec::Pareto(m) => m.draw(rng),
        }
    }
}

/// Everything recorded about one simulated graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReplicateOutcome {
    pub edges: usize,
    pub clipped_pairs: usize,
    pub score3: f64,
    pub score4: f64,
    pub degenerate3: bool,
    pub degenerate4: bool,
    pub reject3: bool,
    pub reject4: bool,
    pub delta3: f64,
    pub delta4: f64,
}

/// Draws the model, samples a graph and scores it with `m = 3` and `m = 4`,
/// all from one random stream.
pub fn simulate_replicate(model: &ModelSpec, seed: u64, stream: u64, alpha: f64, policy: OmegaPolicy) -> Result<ReplicateOutcome> {
    let mut rng = stream_rng(seed, stream);
    let params = model.draw(&mut rng)?;
    let sample = sample_graph_with(&params, &mut rng, policy)?;
    let n = sample.graph.node_count();
    let edges = sample.graph.edge_count();
    let counts = GraphletCounts::from_graph(&sample.graph)?;
    let r3 = TestResult::from_score(score_from_counts(&counts, 3)?, alpha, n, edges)?;
    let r4 = TestResult::from_score(score_from_counts(&counts, 4)?, alpha, n, edges)?;
    let spectrum = SpectralSummary::new(&params)?;
    Ok(ReplicateOutcome {
        edges,
        clipped_pairs: sample.clipped_pairs,
        score3: r3.score,
        score4: r4.score,
        degenerate3: r3.degenerate,
        degenerate4: r4.degenerate,
        reject3: r3.reject,
        reject4: r4.reject,
        delta3: spectrum.delta_gc(3)?,
        delta4: spectrum.delta_gc(4)?,
    })
}

/// Summary of the scores for one order `m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderSummary {
    pub m: u32,
    pub scores: Vec<f64>,
    pub degenerate: usize,
    /// Fraction of replicates with `score > z_alpha` (degenerate ones never reject).
    pub rejection_rate: f64,
    pub mean: f64,
    /// Sample standard deviation; `None` with a single replicate.
    pub sd: Option<f64>,
    /// Kolmogorov–Smirnov distance to N(0, 1); `None` with a single replicate.
    pub ks: Option<f64>,
    /// Mean of `delta_gc` over the replicate parameter draws.
    pub mean_delta: f64,
    /// Mean of `Phi(delta_gc - z_alpha)` over the replicate parameter draws.
    pub predicted_power: f64,
}

impl OrderSummary {
    fn new(m: u32, outcomes: &[ReplicateOutcome], alpha: f64) -> Result<Self> {
        let pick = |o: &ReplicateOutcome| {
            if m == 3 {
                (o.score3, o.degenerate3, o.reject3, o.delta3)
            } else {
                (o.score4, o.degenerate4, o.reject4, o.delta4)
            }
        };
        let reps = outcomes.len() as f64;
        let scores: Vec<f64> = outcomes.iter().map(|o| pick(o).0).collect();
        let mean = scores.iter().sum::<f64>() / reps;
        let sd = (scores.len() > 1).then(|| {
            (scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (reps - 1.0)).sqrt()
        });
        let ks = if scores.len() > 1 { normal::ks_distance(&scores) } else { None };
        let mut predicted = 0.0;
        for o in outcomes {
            predicted += predicted_power(pick(o).3, alpha)?;
        }
        Ok(OrderSummary {
            m,
            degenerate: outcomes.iter().filter(|o| pick(o).1).count(),
            rejection_rate: outcomes.iter().filter(|o| pick(o).2).count() as f64 / reps,
            mean,
            sd,
            ks,
            mean_delta: outcomes.iter().map(|o| pick(o).3).sum::<f64>() / reps,
            predicted_power: predicted / reps,
            scores,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub metadata: Metadata,
    pub m3: OrderSummary,
    pub m4: OrderSummary,
    pub mean_edges: f64,
    pub runtime_seconds: f64,
}

impl ExperimentReport {
    pub fn order(&self, m: u32) -> &OrderSummary {
        if m == 3 {
            &self.m3
        } else {
            &self.m4
        }
    }

    /// JSON without the timing field, for byte-level comparisons.
    pub fn to_json_without_timing(&self) -> Result<String> {
        let mut value = serde_json::to_value(self)?;
        if let Some(obj) = value.as_object_mut() {
            obj.remove("runtime_seconds");
        }
        Ok(serde_json::to_string(&value)?)
    }
}

/// Simulates `config.replicates` graphs from `model`; replicate `r` uses
/// stream `stream_base + r`.
pub fn run_experiment(config: &ExperimentConfig, model: &ModelSpec, stream_base: u64) -> Result<ExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let outcomes = run_replicates(config.replicates, config.workers, |r| {
        simulate_replicate(model, config.seed, stream_base + r, config.alpha, config.omega_policy)
    })?;
    let mut metadata = Metadata::new(config);
    metadata.clipped_pairs = outcomes.iter().map(|o| o.clipped_pairs as u64).sum();
    metadata.clipped_replicates = outcomes.iter().filter(|o| o.clipped_pairs > 0).count() as u64;
    if metadata.clipped_pairs > 0 {
        log::warn!(
            "{}: {} edge probabilities above 1 were clipped in {} replicates",
            config.name,
            metadata.clipped_pairs,
            metadata.clipped_replicates
        );
    }
    Ok(ExperimentReport {
        config: config.clone(),
        metadata,
        m3: OrderSummary::new(3, &outcomes, config.alpha)?,
        m4: OrderSummary::new(4, &outcomes, config.alpha)?,
        mean_edges: outcomes.iter().map(|o| o.edges as f64).sum::<f64>() / outcomes.len() as f64,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}
