//! The normality check and the power table.

use std::fmt::Write as _;
use std::time::Instant;

use nalgebra::DMatrix;
use serde::Serialize;

use super::reference::{POWER_NORMS, POWER_SETTINGS};
use super::{run_experiment, ExperimentConfig, ExperimentReport, Metadata, ModelSpec, ParetoModel};
use crate::dcmm::{block_p, ThetaScaling};
use crate::error::{GcError, Result};
use crate::normal;

pub const PARETO_SHAPE: f64 = 4.0;
pub const PARETO_SCALE: f64 = 0.375;

/// Null model of the normality check: `n = 200`, `K = 1`, `sqrt(10) theta_i ~ Pareto(4, 0.375)`.
pub fn normality_null_model() -> ModelSpec {
    ModelSpec::Pareto(ParetoModel {
        block_sizes: vec![200],
        mixed: Vec::new(),
        community: DMatrix::from_element(1, 1, 1.0),
        shape: PARETO_SHAPE,
        scale: PARETO_SCALE,
        scaling: ThetaScaling::Divisor(10f64.sqrt()),
    })
}

/// Alternative of the normality check: `K = 3`, off-diagonals of `P` equal to
/// 1/3, three pure blocks of 60 followed by 20 nodes with membership
/// `(1/3, 1/3, 1/3)`, and `sqrt(2) theta_i ~ Pareto(4, 0.375)`.
pub fn normality_alternative_model() -> ModelSpec {
    let third = 1.0 / 3.0;
    ModelSpec::Pareto(ParetoModel {
        block_sizes: vec![60, 60, 60],
        mixed: vec![vec![third; 3]; 20],
        community: DMatrix::from_fn(3, 3, |i, j| if i == j { 1.0 } else { third }),
        shape: PARETO_SHAPE,
        scale: PARETO_SCALE,
        scaling: ThetaScaling::Divisor(2f64.sqrt()),
    })
}

/// Replicate streams of the alternative start here so they never overlap the null's.
pub const ALTERNATIVE_STREAM_BASE: u64 = 1 << 40;

#[derive(Debug, Clone, Serialize)]
pub struct NormalityReport {
    pub null: ExperimentReport,
    pub alternative: Option<ExperimentReport>,
}

pub fn normality(config: &ExperimentConfig, with_alternative: bool) -> Result<NormalityReport> {
    let null = run_experiment(config, &normality_null_model(), 0)?;
    let alternative = if with_alternative {
        let mut alt_config = config.clone();
        alt_config.name = format!("{} (alternative)", config.name);
        Some(run_experiment(&alt_config, &normality_alternative_model(), ALTERNATIVE_STREAM_BASE)?)
    } else {
        None
    };
    Ok(NormalityReport { null, alternative })
}

impl NormalityReport {
    /// Common bin edges covering every `m = 4` score, `bins` equal-width bins.
    fn edges(&self, bins: usize) -> Vec<f64> {
        let all = self
            .null
            .m4
            .scores
            .iter()
            .chain(self.alternative.iter().flat_map(|a| a.m4.scores.iter()));
        let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| (lo.min(s), hi.max(s)));
        let (lo, hi) = (lo.floor().min(-4.0), hi.ceil().max(4.0));
        (0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect()
    }

    fn counts(scores: &[f64], edges: &[f64]) -> Vec<usize> {
        let bins = edges.len() - 1;
        let (lo, hi) = (edges[0], edges[bins]);
        let mut counts = vec![0; bins];
        for &s in scores {
            let idx = (((s - lo) / (hi - lo)) * bins as f64).floor() as usize;
            counts[idx.min(bins - 1)] += 1;
        }
        counts
    }

    /// `bin_lo,bin_hi,null_count[,alternative_count]` for the `m = 4` scores.
    pub fn histogram_csv(&self, bins: usize) -> String {
        let edges = self.edges(bins.max(1));
        let null = Self::counts(&self.null.m4.scores, &edges);
        let alt = self.alternative.as_ref().map(|a| Self::counts(&a.m4.scores, &edges));
        let mut out = String::from("bin_lo,bin_hi,null_count");
        if alt.is_some() {
            out.push_str(",alternative_count");
        }
        out.push('\n');
        for i in 0..null.len() {
            let _ = write!(out, "{},{},{}", edges[i], edges[i + 1], null[i]);
            if let Some(alt) = &alt {
                let _ = write!(out, ",{}", alt[i]);
            }
            out.push('\n');
        }
        out
    }

    /// Density curves of `N(0, 1)` and `N(delta_4, 1)` on a grid, where
    /// `delta_4` is the alternative's mean `delta_gc` (0 without an alternative).
    pub fn curves_csv(&self, points: usize) -> String {
        let edges = self.edges(1);
        let delta = self.alternative.as_ref().map_or(0.0, |a| a.m4.mean_delta);
        let mut out = String::from("x,null_density,alternative_density\n");
        let points = points.max(2);
        for i in 0..points {
            let x = edges[0] + (edges[1] - edges[0]) * i as f64 / (points - 1) as f64;
            let _ = writeln!(out, "{x},{},{}", normal::pdf(x), normal::pdf(x - delta));
        }
        out
    }
}

/// Nodes per community and community count of the power table.
pub const POWER_BLOCK: usize = 30;
pub const POWER_K: usize = 10;

/// The power-table model for one setting: 10 pure blocks of 30 and
/// `theta = (h / ||x||) x` with `x_i ~ Pareto(4, 0.375)`.
pub fn power_model(a: f64, b: f64, h: f64) -> Result<ModelSpec> {
    Ok(ModelSpec::Pareto(ParetoModel {
        block_sizes: vec![POWER_BLOCK; POWER_K],
        mixed: Vec::new(),
        community: block_p(POWER_K, a, b)?,
        shape: PARETO_SHAPE,
        scale: PARETO_SCALE,
        scaling: ThetaScaling::TargetNorm(h),
    }))
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerCell {
    pub a: f64,
    pub b: f64,
    pub h: f64,
    pub report: ExperimentReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerTable {
    pub settings: Vec<(f64, f64)>,
    pub norms: Vec<f64>,
    /// Row-major over settings, then norms.
    pub cells: Vec<PowerCell>,
    pub metadata: Metadata,
    pub runtime_seconds: f64,
}

/// Replicate `r` of cell `c` uses stream `(c << 32) | r`.
pub fn power_table(config: &ExperimentConfig, settings: &[(f64, f64)], norms: &[f64]) -> Result<PowerTable> {
    config.validate()?;
    if config.replicates >= 1 << 32 {
        return Err(GcError::arg("at most 2^32 - 1 replicates per cell"));
    }
    if let Some(h) = norms.iter().find(|h| !(**h > 0.0)) {
        return Err(GcError::arg(format!("norm grid must be positive, got {h}")));
    }
    let start = Instant::now();
    let mut cells = Vec::with_capacity(settings.len() * norms.len());
    let mut metadata = Metadata::new(config);
    for &(a, b) in settings {
        for &h in norms {
            let index = cells.len() as u64;
            let mut cell_config = config.clone();
            cell_config.name = format!("{} a={a} b={b} h={h}", config.name);
            let report = run_experiment(&cell_config, &power_model(a, b, h)?, index << 32)?;
            metadata.clipped_pairs += report.metadata.clipped_pairs;
            metadata.clipped_replicates += report.metadata.clipped_replicates;
            cells.push(PowerCell { a, b, h, report });
        }
    }
    Ok(PowerTable {
        settings: settings.to_vec(),
        norms: norms.to_vec(),
        cells,
        metadata,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

/// The published layout: all three settings over `||theta|| = 5..10`.
pub fn default_power_table(config: &ExperimentConfig) -> Result<PowerTable> {
    power_table(config, &POWER_SETTINGS, &POWER_NORMS)
}

impl PowerTable {
    pub fn cell(&self, setting: usize, norm: usize) -> &PowerCell {
        &self.cells[setting * self.norms.len() + norm]
    }

    /// Rejection rates for `m` (4 = GC, 3 = EZ), one row per setting.
    pub fn rates(&self, m: u32) -> Vec<Vec<f64>> {
        (0..self.settings.len())
            .map(|s| (0..self.norms.len()).map(|h| self.cell(s, h).report.order(m).rejection_rate).collect())
            .collect()
    }

    fn csv_with(&self, value: impl Fn(&PowerCell, u32) -> f64) -> String {
        let mut out = String::from("a,b,test");
        for h in &self.norms {
            let _ = write!(out, ",{h}");
        }
        out.push('\n');
        for (s, (a, b)) in self.settings.iter().enumerate() {
            for (label, m) in [("GC", 4), ("EZ", 3)] {
                let _ = write!(out, "{a},{b},{label}");
                for h in 0..self.norms.len() {
                    let _ = write!(out, ",{}", value(self.cell(s, h), m));
                }
                out.push('\n');
            }
        }
        out
    }

    /// Settings by rows (GC then EZ), norms by columns, empirical rejection rates.
    pub fn to_csv(&self) -> String {
        self.csv_with(|c, m| c.report.order(m).rejection_rate)
    }

    /// Same layout with the mean predicted power `Phi(delta_gc - z_alpha)`.
    pub fn predicted_csv(&self) -> String {
        self.csv_with(|c, m| c.report.order(m).predicted_power)
    }
}
