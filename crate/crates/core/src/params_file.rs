//! JSON description of a DCMM parameter set.
//!
//! ```json
//! {
//!   "K": 3,
//!   "theta_spec": {"pareto": {"shape": 4, "scale": 0.375}, "divisor": 3.1623, "seed": 7},
//!   "pure_blocks": [60, 60, 60],
//!   "mixed": [[0.3333333333333333, 0.3333333333333333, 0.3333333333333334]],
//!   "P": [[1, 0.4, 0.4], [0.4, 1, 0.4], [0.4, 0.4, 1]]
//! }
//! ```
//!
//! `theta` may be given explicitly instead of `theta_spec`, `Pi` (one row
//! per node) instead of `pure_blocks`/`mixed`, and `block: {K, a, b}` instead of `P`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dcmm::{block_p, pareto_theta, stream_rng, DcmmParams, ThetaScaling};
use crate::error::{GcError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoSpec {
    pub shape: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaSpec {
    pub pareto: ParetoSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divisor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_norm: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl ThetaSpec {
    pub fn scaling(&self) -> Result<ThetaScaling> {
        match (self.divisor, self.target_norm) {
            (Some(d), None) => Ok(ThetaScaling::Divisor(d)),
            (None, Some(h)) => Ok(ThetaScaling::TargetNorm(h)),
            _ => Err(GcError::InvalidParams(
                "theta_spec needs exactly one of divisor and target_norm".into(),
            )),
        }
    }

    pub fn draw(&self, n: usize) -> Result<Vec<f64>> {
        let mut rng = stream_rng(self.seed, 0);
        pareto_theta(n, self.pareto.shape, self.pareto.scale, self.scaling()?, &mut rng)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    #[serde(rename = "K")]
    pub k: usize,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_spec: Option<ThetaSpec>,
    #[serde(rename = "Pi", default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pure_blocks: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixed: Option<Vec<Vec<f64>>>,
    #[serde(rename = "P", default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<BlockSpec>,
}

fn invalid(msg: impl Into<String>) -> GcError {
    GcError::InvalidParams(msg.into())
}

fn matrix_from_rows(rows: &[Vec<f64>], cols: usize, what: &str) -> Result<DMatrix<f64>> {
    if let Some(r) = rows.iter().position(|row| row.len() != cols) {
        return Err(invalid(format!("row {r} of {what} has length {}, expected {cols}", rows[r].len())));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

impl ParamsFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Resolves the description into validated parameters, drawing `theta`
    /// if it is given as a Pareto recipe.
    pub fn resolve(&self) -> Result<DcmmParams> {
        let community = match (&self.p, &self.block) {
            (Some(rows), None) => matrix_from_rows(rows, rows.len(), "P")?,
            (None, Some(b)) => block_p(b.k, b.a, b.b)?,
            _ => return Err(invalid("give exactly one of P and block")),
        };
        let k = community.nrows();
        if let Some(declared) = self.k {
            if declared != k {
                return Err(invalid(format!("K = {declared} but P is {k}x{k}")));
            }
        }

        enum Layout<'a> {
            Rows(&'a [Vec<f64>]),
            Blocks(&'a [usize], &'a [Vec<f64>]),
        }
        let layout = match (&self.pi, &self.pure_blocks, &self.mixed) {
            (Some(rows), None, None) => Layout::Rows(rows),
            (None, Some(blocks), mixed) => Layout::Blocks(blocks, mixed.as_deref().unwrap_or(&[])),
            (None, None, Some(mixed)) => Layout::Blocks(&[], mixed),
            (None, None, None) if k == 1 => Layout::Blocks(&[], &[]),
            _ => return Err(invalid("give either Pi or pure_blocks/mixed")),
        };
        let layout_n = match &layout {
            Layout::Rows(rows) => Some(rows.len()),
            Layout::Blocks([], []) => None,
            Layout::Blocks(blocks, mixed) => Some(blocks.iter().sum::<usize>() + mixed.len()),
        };

        let theta = match (&self.theta, &self.theta_spec) {
            (Some(t), None) => t.clone(),
            (None, Some(spec)) => {
                let n = layout_n.ok_or_else(|| invalid("theta_spec needs a membership layout to fix n"))?;
                spec.draw(n)?
            }
            _ => return Err(invalid("give exactly one of theta and theta_spec")),
        };

        match layout {
            Layout::Rows(rows) => DcmmParams::new(theta, matrix_from_rows(rows, k, "Pi")?, community),
            Layout::Blocks([], []) => {
                let n = theta.len();
                DcmmParams::with_blocks(theta, &[n], &[], community)
            }
            Layout::Blocks(blocks, mixed) => {
                let blocks = if blocks.is_empty() { vec![0; k] } else { blocks.to_vec() };
                DcmmParams::with_blocks(theta, &blocks, mixed, community)
            }
        }
    }
}
