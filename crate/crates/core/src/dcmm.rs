//! Degree-corrected mixed-membership (DCMM) model.
//!
//! Edge `(i, j)`, `i != j`, is present independently with probability
//! `Omega[i][j] = theta_i theta_j pi_i' P pi_j`, i.e. `Omega = Theta Pi P Pi' Theta`.
//! `theta` holds the positive degree parameters, row `i` of `Pi` is the
//! membership PMF of node `i`, and `P` is the `K x K` symmetric community
//! matrix with unit diagonal.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::error::{GcError, Result};
use crate::graph::Graph;

/// Tolerance for the PMF rows of `Pi` and the symmetry/unit diagonal of `P`.
pub const STRUCTURE_TOL: f64 = 1e-12;

/// Identifier of the random stream construction, recorded in reports.
pub const GENERATOR_ID: &str = "ChaCha20Rng::seed_from_u64(master_seed) with set_stream(stream)";

/// Random stream `stream` of the family keyed by `master_seed`.
///
/// Streams are independent ChaCha20 keystreams, so replicate `r` always sees
/// the same numbers no matter how replicates are scheduled across threads.
pub fn stream_rng(master_seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcmmParams {
    theta: Vec<f64>,
    memberships: DMatrix<f64>,
    community: DMatrix<f64>,
}

impl DcmmParams {
    /// Validates the structural constraints: positive finite `theta`, PMF rows
    /// in `memberships` (`n x K`), and a symmetric `K x K` matrix with unit diagonal.
    pub fn new(theta: Vec<f64>, memberships: DMatrix<f64>, community: DMatrix<f64>) -> Result<Self> {
        let n = theta.len();
        let k = community.nrows();
        if n == 0 {
            return Err(GcError::InvalidParams("theta is empty".into()));
        }
        if k == 0 || community.ncols() != k {
            return Err(GcError::InvalidParams(format!(
                "P must be square and non-empty, got {}x{}",
                community.nrows(),
                community.ncols()
            )));
        }
        if memberships.nrows() != n || memberships.ncols() != k {
            return Err(GcError::InvalidParams(format!(
                "Pi must be {n}x{k}, got {}x{}",
                memberships.nrows(),
                memberships.ncols()
            )));
        }
        if let Some(i) = theta.iter().position(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(GcError::InvalidParams(format!("theta[{i}] = {} is not positive", theta[i])));
        }
        for (i, row) in memberships.row_iter().enumerate() {
            if row.iter().any(|&x| !(x >= 0.0)) {
                return Err(GcError::InvalidParams(format!("row {i} of Pi has a negative entry")));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > STRUCTURE_TOL {
                return Err(GcError::InvalidParams(format!("row {i} of Pi sums to {total}")));
            }
        }
        for a in 0..k {
            if (community[(a, a)] - 1.0).abs() > STRUCTURE_TOL {
                return Err(GcError::InvalidParams(format!(
                    "P[{a}][{a}] = {} but the diagonal must be 1",
                    community[(a, a)]
                )));
            }
            for b in 0..a {
                if (community[(a, b)] - community[(b, a)]).abs() > STRUCTURE_TOL {
                    return Err(GcError::InvalidParams(format!("P is not symmetric at ({a}, {b})")));
                }
                if !(community[(a, b)] >= 0.0) {
                    return Err(GcError::InvalidParams(format!("P[{a}][{b}] is negative")));
                }
            }
        }
        Ok(DcmmParams { theta, memberships, community })
    }

    /// The null model `K = 1`: `Omega[i][j] = theta_i theta_j`.
    pub fn null(theta: Vec<f64>) -> Result<Self> {
        let n = theta.len();
        Self::new(theta, DMatrix::from_element(n, 1, 1.0), DMatrix::from_element(1, 1, 1.0))
    }

    /// Pure nodes in contiguous blocks of the given sizes, followed by mixed
    /// nodes with the given membership rows.
    pub fn with_blocks(
        theta: Vec<f64>,
        block_sizes: &[usize],
        mixed: &[Vec<f64>],
        community: DMatrix<f64>,
    ) -> Result<Self> {
        let k = community.nrows();
        if block_sizes.len() != k {
            return Err(GcError::InvalidParams(format!(
                "{} pure blocks given for K = {k}",
                block_sizes.len()
            )));
        }
        let n = block_sizes.iter().sum::<usize>() + mixed.len();
        if n != theta.len() {
            return Err(GcError::InvalidParams(format!(
                "membership layout has {n} nodes but theta has {}",
                theta.len()
            )));
        }
        let mut pi = DMatrix::zeros(n, k);
        let mut row = 0;
        for (community_id, &size) in block_sizes.iter().enumerate() {
            for _ in 0..size {
                pi[(row, community_id)] = 1.0;
                row += 1;
            }
        }
        for pmf in mixed {
            if pmf.len() != k {
                return Err(GcError::InvalidParams(format!(
                    "mixed membership row has length {}, expected {k}",
                    pmf.len()
                )));
            }
            for (c, &w) in pmf.iter().enumerate() {
                pi[(row, c)] = w;
            }
            row += 1;
        }
        Self::new(theta, pi, community)
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    pub fn k(&self) -> usize {
        self.community.nrows()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn memberships(&self) -> &DMatrix<f64> {
        &self.memberships
    }

    pub fn community(&self) -> &DMatrix<f64> {
        &self.community
    }

    /// Pure nodes of community `c`.
    pub fn pure_nodes(&self, c: usize) -> Vec<usize> {
        (0..self.n())
            .filter(|&i| self.memberships[(i, c)] == 1.0)
            .collect()
    }

    /// Row-major `Pi P` and row-major `Pi`, the factors used by the samplers.
    fn factors(&self) -> (Vec<f64>, Vec<f64>) {
        let weighted = &self.memberships * &self.community;
        let k = self.k();
        let mut left = Vec::with_capacity(self.n() * k);
        let mut right = Vec::with_capacity(self.n() * k);
        for i in 0..self.n() {
            for c in 0..k {
                left.push(weighted[(i, c)]);
                right.push(self.memberships[(i, c)]);
            }
        }
        (left, right)
    }
}

/// Dense `n x n` matrix of edge probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaMatrix {
    matrix: DMatrix<f64>,
}

impl OmegaMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    /// Largest off-diagonal entry.
    pub fn max_off_diagonal(&self) -> f64 {
        max_off_diagonal(&self.matrix)
    }
}

fn max_off_diagonal(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut best = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                best = best.max(m[(i, j)]);
            }
        }
    }
    best
}

/// `Omega = Theta Pi P Pi' Theta`, including the diagonal.
///
/// Only off-diagonal entries are edge probabilities; an off-diagonal entry
/// above 1 is a [`GcError::ModelValidity`] error naming the first such pair in
/// row-major order. The diagonal is never sampled and is not checked.
pub fn build_omega(params: &DcmmParams) -> Result<OmegaMatrix> {
    let n = params.n();
    let theta = DVector::from_column_slice(params.theta());
    let left = DMatrix::from_fn(n, params.k(), |i, c| theta[i] * params.memberships[(i, c)]);
    let mut matrix = &left * params.community() * left.transpose();
    // Enforce exact symmetry against rounding in the triple product.
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (matrix[(i, j)] + matrix[(j, i)]);
            matrix[(i, j)] = v;
            matrix[(j, i)] = v;
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if matrix[(i, j)] > 1.0 {
                return Err(GcError::ModelValidity { i, j, value: matrix[(i, j)] });
            }
        }
    }
    Ok(OmegaMatrix { matrix })
}

/// What to do with edge probabilities above 1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OmegaPolicy {
    /// Fail with [`GcError::ModelValidity`].
    #[default]
    Strict,
    /// Treat the probability as 1 and count the pair.
    Clip,
}

/// A sampled adjacency matrix plus the number of pairs whose probability was
/// clipped to 1 (always 0 under [`OmegaPolicy::Strict`]).
#[derive(Debug, Clone)]
pub struct SampledGraph {
    pub graph: Graph,
    pub clipped_pairs: usize,
}

/// Samples the upper triangle pair by pair in row-major order, drawing one
/// uniform per pair.
pub fn sample_graph_with<R: Rng + ?Sized>(
    params: &DcmmParams,
    rng: &mut R,
    policy: OmegaPolicy,
) -> Result<SampledGraph> {
    let n = params.n();
    let k = params.k();
    let theta = params.theta();
    let (left, right) = params.factors();
    let mut lists: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut clipped_pairs = 0;
    for i in 0..n {
        let li = &left[i * k..(i + 1) * k];
        for j in i + 1..n {
            let rj = &right[j * k..(j + 1) * k];
            let affinity: f64 = li.iter().zip(rj).map(|(a, b)| a * b).sum();
            let mut p = theta[i] * theta[j] * affinity;
            if p > 1.0 {
                match policy {
                    OmegaPolicy::Strict => return Err(GcError::ModelValidity { i, j, value: p }),
                    OmegaPolicy::Clip => {
                        clipped_pairs += 1;
                        p = 1.0;
                    }
                }
            }
            let u: f64 = rng.random();
            if u < p {
                lists[i].push(j);
                lists[j].push(i);
            }
        }
    }
    Ok(SampledGraph { graph: Graph::from_sorted_lists(lists), clipped_pairs })
}

/// Strict sampling from stream 0 of `seed`.
pub fn sample_graph(params: &DcmmParams, seed: u64) -> Result<Graph> {
    let mut rng = stream_rng(seed, 0);
    Ok(sample_graph_with(params, &mut rng, OmegaPolicy::Strict)?.graph)
}

/// How raw Pareto draws are turned into `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaScaling {
    /// `theta_i = x_i / divisor`.
    Divisor(f64),
    /// `theta = (h / ||x||) x`, so `||theta|| = h`.
    TargetNorm(f64),
}

/// Draws `n` iid Pareto(`shape`, `scale`) values by inverse CDF,
/// `scale * U^(-1/shape)` with `U` uniform on `(0, 1]`, then rescales.
pub fn pareto_theta<R: Rng + ?Sized>(
    n: usize,
    shape: f64,
    scale: f64,
    scaling: ThetaScaling,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(GcError::arg("pareto_theta needs n >= 1"));
    }
    if !(shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite()) {
        return Err(GcError::arg(format!("Pareto shape and scale must be positive, got ({shape}, {scale})")));
    }
    let raw: Vec<f64> = (0..n)
        .map(|_| {
            let u = 1.0 - rng.random::<f64>();
            scale * u.powf(-1.0 / shape)
        })
        .collect();
    match scaling {
        ThetaScaling::Divisor(d) => {
            if !(d > 0.0 && d.is_finite()) {
                return Err(GcError::arg(format!("divisor must be positive, got {d}")));
            }
            Ok(raw.into_iter().map(|x| x / d).collect())
        }
        ThetaScaling::TargetNorm(h) => {
            if !(h > 0.0 && h.is_finite()) {
                return Err(GcError::arg(format!("target norm must be positive, got {h}")));
            }
            let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
            Ok(raw.into_iter().map(|x| h * x / norm).collect())
        }
    }
}

/// `K x K` matrix with unit diagonal, `a` off the diagonal inside each of the
/// two `K/2` diagonal blocks, and `b` across blocks.
pub fn block_p(k: usize, a: f64, b: f64) -> Result<DMatrix<f64>> {
    if k == 0 || k % 2 != 0 {
        return Err(GcError::arg(format!("block P needs an even K, got {k}")));
    }
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
        return Err(GcError::arg(format!("block P needs a, b in [0, 1], got ({a}, {b})")));
    }
    let half = k / 2;
    Ok(DMatrix::from_fn(k, k, |r, c| {
        if r == c {
            1.0
        } else if (r < half) == (c < half) {
            a
        } else {
            b
        }
    }))
}

/// Diagnostics on how well a parameter set fits the regime the test's theory
/// assumes. Everything here is advisory.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub n: usize,
    pub k: usize,
    pub theta_norm1: f64,
    pub theta_norm2: f64,
    pub theta_norm3: f64,
    pub theta_max: f64,
    /// `sum_{pure in k} theta_i^2 / sum_i theta_i^2` per community.
    pub pure_mass_ratios: Vec<f64>,
    /// Singular values of `P`, descending.
    pub p_singular_values: Vec<f64>,
    /// Largest off-diagonal edge probability.
    pub max_omega: f64,
    pub warnings: Vec<String>,
}

pub fn validate(params: &DcmmParams) -> ValidationReport {
    let theta = params.theta();
    let norm = |p: i32| theta.iter().map(|t| t.powi(p)).sum::<f64>().powf(1.0 / p as f64);
    let sum_sq: f64 = theta.iter().map(|t| t * t).sum();
    let pure_mass_ratios: Vec<f64> = (0..params.k())
        .map(|c| params.pure_nodes(c).iter().map(|&i| theta[i] * theta[i]).sum::<f64>() / sum_sq)
        .collect();
    let mut p_singular_values: Vec<f64> = params
        .community()
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    p_singular_values.sort_by(|a, b| b.total_cmp(a));

    let (left, right) = params.factors();
    let k = params.k();
    let mut max_omega = 0.0f64;
    for i in 0..params.n() {
        for j in i + 1..params.n() {
            let aff: f64 = (0..k).map(|c| left[i * k + c] * right[j * k + c]).sum();
            max_omega = max_omega.max(theta[i] * theta[j] * aff);
        }
    }

    let mut warnings = Vec::new();
    for (c, r) in pure_mass_ratios.iter().enumerate() {
        if *r == 0.0 {
            warnings.push(format!("community {c} has no pure node"));
        }
    }
    let smallest = p_singular_values.last().copied().unwrap_or(0.0);
    let largest = p_singular_values.first().copied().unwrap_or(0.0);
    if smallest <= 1e-12 * largest.max(1.0) {
        warnings.push(format!("P is numerically singular (smallest singular value {smallest:e})"));
    }
    if max_omega > 1.0 {
        warnings.push(format!("largest edge probability {max_omega} exceeds 1"));
    }
    let theta_norm3 = norm(3);
    if theta_norm3 >= 1.0 {
        warnings.push(format!("||theta||_3 = {theta_norm3} is not small"));
    }

    ValidationReport {
        n: params.n(),
        k,
        theta_norm1: norm(1),
        theta_norm2: sum_sq.sqrt(),
        theta_norm3,
        theta_max: theta.iter().copied().fold(0.0, f64::max),
        pure_mass_ratios,
        p_singular_values,
        max_omega,
        warnings,
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    pub(crate) fn random_params(seed: u64, n: usize, k: usize) -> DcmmParams {
        let mut rng = stream_rng(seed, 99);
        let theta: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..0.6)).collect();
        let mut pi = DMatrix::zeros(n, k);
        for i in 0..n {
            if i < k || rng.random::<f64>() < 0.6 {
                pi[(i, i % k)] = 1.0;
            } else {
                let w: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.01).collect();
                let s: f64 = w.iter().sum();
                for c in 0..k {
                    pi[(i, c)] = w[c] / s;
                }
            }
        }
        let mut p = DMatrix::identity(k, k);
        for a in 0..k {
            for b in 0..a {
                let v = rng.random_range(0.0..0.9);
                p[(a, b)] = v;
                p[(b, a)] = v;
            }
        }
        DcmmParams::new(theta, pi, p).unwrap()
    }

    /// Direct double sum over community pairs for every node pair.
    fn omega_by_summation(params: &DcmmParams) -> Vec<Vec<f64>> {
        let (n, k) = (params.n(), params.k());
        let pi = params.memberships();
        let p = params.community();
        let t = params.theta();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut s = 0.0;
                        for a in 0..k {
                            for b in 0..k {
                                s += pi[(i, a)] * pi[(j, b)] * p[(a, b)];
                            }
                        }
                        t[i] * t[j] * s
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn null_omega_is_outer_product() {
        let theta = vec![0.1, 0.2, 0.3, 0.4];
        let omega = build_omega(&DcmmParams::null(theta.clone()).unwrap()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_abs_diff_eq!(omega.get(i, j), theta[i] * theta[j], epsilon = 1e-16);
            }
        }
    }

    #[test]
    fn two_pure_nodes_cross_probability() {
        let p = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.0]);
        let params = DcmmParams::with_blocks(vec![0.5, 0.8], &[1, 1], &[], p).unwrap();
        assert_abs_diff_eq!(build_omega(&params).unwrap().get(0, 1), 0.5 * 0.8 * 0.3, epsilon = 1e-16);
    }

    #[test]
    fn omega_matches_summation_oracle() {
        for seed in 0..20 {
            let params = random_params(seed, 10 + seed as usize * 2, 1 + seed as usize % 4);
            let omega = build_omega(&params).unwrap();
            let oracle = omega_by_summation(&params);
            for i in 0..params.n() {
                for j in 0..params.n() {
                    assert_abs_diff_eq!(omega.get(i, j), oracle[i][j], epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn omega_rank_equals_k() {
        for seed in 0..10 {
            let k = 1 + seed as usize % 4;
            let params = random_params(seed, 40, k);
            let omega = build_omega(&params).unwrap();
            let sv = omega.matrix().clone().svd(false, false).singular_values;
            let top = sv.max();
            let rank = sv.iter().filter(|&&s| s > 1e-10 * top).count();
            assert_eq!(rank, k, "seed {seed}");
        }
    }

    #[test]
    fn omega_above_one_is_an_error() {
        // 0.5 * 1.5 = 0.75 is fine; the offending pair is (1, 2) at 1.35.
        let params = DcmmParams::null(vec![0.5, 1.5, 0.9]).unwrap();
        match build_omega(&params) {
            Err(GcError::ModelValidity { i, j, value }) => {
                assert_eq!((i, j), (1, 2));
                assert_abs_diff_eq!(value, 1.35, epsilon = 1e-12);
            }
            other => panic!("expected model-validity error, got {other:?}"),
        }
        // A diagonal entry above 1 alone is allowed: it is never sampled.
        assert!(build_omega(&DcmmParams::null(vec![1.2, 0.1]).unwrap()).is_ok());
    }

    #[test]
    fn structural_violations_are_rejected() {
        let p = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.3, 1.0]);
        let pi = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert!(DcmmParams::new(vec![0.1, 0.1], pi.clone(), p).is_err());
        let p = DMatrix::from_row_slice(2, 2, &[0.9, 0.2, 0.2, 1.0]);
        assert!(DcmmParams::new(vec![0.1, 0.1], pi.clone(), p).is_err());
        let p = DMatrix::identity(2, 2);
        let bad_pi = DMatrix::from_row_slice(2, 2, &[0.7, 0.2, 0.0, 1.0]);
        assert!(DcmmParams::new(vec![0.1, 0.1], bad_pi, p.clone()).is_err());
        assert!(DcmmParams::new(vec![0.1, -0.1], pi.clone(), p.clone()).is_err());
        assert!(DcmmParams::new(vec![0.1, 0.1], pi, p).is_ok());
    }

    #[test]
    fn sampling_extremes() {
        let zero_p = DMatrix::identity(2, 2);
        let params = DcmmParams::with_blocks(vec![0.5; 6], &[3, 3], &[], zero_p.clone()).unwrap();
        // P = I with tiny theta across blocks: cross pairs have probability 0.
        let g = sample_graph(&params, 1).unwrap();
        for (i, j) in g.edges() {
            assert_eq!(i < 3, j < 3);
        }
        let all_zero = DcmmParams::with_blocks(
            vec![1e-300; 6],
            &[3, 3],
            &[],
            zero_p,
        )
        .unwrap();
        assert_eq!(sample_graph(&all_zero, 5).unwrap().edge_count(), 0);
        let full = DcmmParams::null(vec![1.0; 7]).unwrap();
        assert_eq!(sample_graph(&full, 3).unwrap(), Graph::complete(7));
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let params = random_params(4, 60, 3);
        let a = sample_graph(&params, 17).unwrap();
        let b = sample_graph(&params, 17).unwrap();
        let c = sample_graph(&params, 18).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        for i in 0..60 {
            assert!(!a.has_edge(i, i));
            for j in 0..60 {
                assert_eq!(a.has_edge(i, j), a.has_edge(j, i));
            }
        }
    }

    #[test]
    fn strict_and_clip_policies() {
        let params = DcmmParams::null(vec![0.2, 1.5, 0.9, 0.1]).unwrap();
        let mut rng = stream_rng(1, 0);
        assert!(matches!(
            sample_graph_with(&params, &mut rng, OmegaPolicy::Strict),
            Err(GcError::ModelValidity { i: 1, j: 2, .. })
        ));
        let mut rng = stream_rng(1, 0);
        let s = sample_graph_with(&params, &mut rng, OmegaPolicy::Clip).unwrap();
        assert_eq!(s.clipped_pairs, 1);
        assert!(s.graph.has_edge(1, 2));
    }

    #[test]
    fn sample_edge_count_matches_expectation() {
        let mut rng = stream_rng(2024, 7);
        let theta = pareto_theta(200, 4.0, 0.375, ThetaScaling::Divisor(10f64.sqrt()), &mut rng).unwrap();
        let params = DcmmParams::null(theta).unwrap();
        let omega = build_omega(&params).unwrap();
        let mut mean = 0.0;
        let mut var = 0.0;
        for i in 0..200 {
            for j in i + 1..200 {
                let p = omega.get(i, j);
                mean += p;
                var += p * (1.0 - p);
            }
        }
        let reps = 500;
        let total: usize = (0..reps)
            .map(|r| {
                let mut rng = stream_rng(99, r);
                sample_graph_with(&params, &mut rng, OmegaPolicy::Strict)
                    .unwrap()
                    .graph
                    .edge_count()
            })
            .sum();
        let sample_mean = total as f64 / reps as f64;
        let se = (var / reps as f64).sqrt();
        assert!((sample_mean - mean).abs() < 3.0 * se, "{sample_mean} vs {mean} (se {se})");
    }

    #[test]
    fn pareto_target_norm_is_exact() {
        for seed in 0..5 {
            let mut rng = stream_rng(seed, 0);
            let theta = pareto_theta(300, 4.0, 0.375, ThetaScaling::TargetNorm(8.0), &mut rng).unwrap();
            let norm = theta.iter().map(|t| t * t).sum::<f64>().sqrt();
            assert_abs_diff_eq!(norm, 8.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn pareto_moments() {
        // Pareto(4, 0.375): mean 4 * 0.375 / 3 = 0.5, second moment 4 * 0.375^2 / 2 = 0.28125.
        let mut rng = stream_rng(7, 0);
        let x = pareto_theta(1_000_000, 4.0, 0.375, ThetaScaling::Divisor(1.0), &mut rng).unwrap();
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let second = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
        assert!((mean / 0.5 - 1.0).abs() < 0.01, "mean {mean}");
        assert!((second / 0.28125 - 1.0).abs() < 0.01, "second moment {second}");
    }

    #[test]
    fn pareto_divisor_support() {
        let mut rng = stream_rng(3, 0);
        let d = 10f64.sqrt();
        let theta = pareto_theta(200, 4.0, 0.375, ThetaScaling::Divisor(d), &mut rng).unwrap();
        assert!(theta.iter().all(|&t| t >= 0.375 / d));
        assert!(pareto_theta(5, 0.0, 0.375, ThetaScaling::Divisor(1.0), &mut rng).is_err());
        assert!(pareto_theta(5, 4.0, -1.0, ThetaScaling::Divisor(1.0), &mut rng).is_err());
    }

    #[test]
    fn block_p_examples() {
        assert_eq!(block_p(2, 0.4, 0.3).unwrap(), DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.0]));
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[1.0, 0.3, 0.6, 0.6, 0.3, 1.0, 0.6, 0.6, 0.6, 0.6, 1.0, 0.3, 0.6, 0.6, 0.3, 1.0],
        );
        assert_eq!(block_p(4, 0.3, 0.6).unwrap(), expected);
        assert!(block_p(3, 0.3, 0.6).is_err());
    }

    #[test]
    fn block_p_eigenvalues() {
        // Eigenvalues: (1-a) + K/2 (a+b), (1-a) + K/2 (a-b), and (1-a) with multiplicity K-2.
        let (k, a, b) = (10, 0.25, 0.7);
        let eig = block_p(k, a, b).unwrap().symmetric_eigen().eigenvalues;
        let mut got: Vec<f64> = eig.iter().copied().collect();
        got.sort_by(f64::total_cmp);
        let mut want = vec![1.0 - a; k - 2];
        want.push((1.0 - a) + 5.0 * (a + b));
        want.push((1.0 - a) + 5.0 * (a - b));
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            assert_abs_diff_eq!(g, w, epsilon = 1e-12);
        }
    }

    #[test]
    fn validation_report() {
        let mut rng = stream_rng(11, 0);
        let theta = pareto_theta(300, 4.0, 0.375, ThetaScaling::TargetNorm(10.0), &mut rng).unwrap();
        let params = DcmmParams::with_blocks(theta, &[30; 10], &[], block_p(10, 0.15, 0.52).unwrap()).unwrap();
        let report = validate(&params);
        assert_abs_diff_eq!(report.theta_norm2, 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.pure_mass_ratios.iter().sum::<f64>(), 1.0, epsilon = 1e-12);

        let null = validate(&DcmmParams::null(vec![0.1; 10]).unwrap());
        assert_eq!(null.pure_mass_ratios, vec![1.0]);

        let singular = DcmmParams::with_blocks(vec![0.1; 4], &[1, 1, 1, 1], &[], block_p(4, 1.0, 1.0).unwrap()).unwrap();
        let report = validate(&singular);
        assert!(report.p_singular_values.last().unwrap().abs() < 1e-12);
        assert!(report.warnings.iter().any(|w| w.contains("singular")));

        let p = DMatrix::identity(2, 2);
        let no_pure = DcmmParams::with_blocks(vec![0.1; 3], &[3, 0], &[], p).unwrap();
        assert!(validate(&no_pure).warnings.iter().any(|w| w.contains("no pure node")));
    }
}
