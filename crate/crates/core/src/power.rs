//! Spectral quantities of a DCMM model and the power proxy of the GC test.
//!
//! With `G = Pi' Theta^2 Pi` and `eta = G^{-1/2} Pi' theta`, the nonzero
//! eigenvalues `lambda_k` of `Omega` are those of `G^{1/2} P G^{1/2}`, and
//! `1' Omega^m 1 = sum_k (eta, xi_k)^2 lambda_k^m`.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::dcmm::{build_omega, DcmmParams};
use crate::error::{GcError, Result};
use crate::gc_test::check_alpha;
use crate::graphlet::{falling_factorial_f64, ENUMERATION_GUARD};
use crate::normal;

/// Eigenvalues of `G` below this fraction of `trace(G)` make `G` singular.
pub const G_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct SpectralSummary {
    #[serde(serialize_with = "serialize_matrix")]
    pub g: DMatrix<f64>,
    pub eta: Vec<f64>,
    /// Sorted by descending absolute value, ties by descending signed value.
    pub lambdas: Vec<f64>,
    /// Unit eigenvectors matching `lambdas`, first nonzero coordinate positive.
    pub xis: Vec<Vec<f64>>,
    /// `(eta, xi_k)^2`.
    pub projections: Vec<f64>,
}

fn serialize_matrix<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for row in m.row_iter() {
        seq.serialize_element(&row.iter().copied().collect::<Vec<f64>>())?;
    }
    seq.end()
}

fn check_order(m: u32) -> Result<()> {
    if m == 3 || m == 4 {
        Ok(())
    } else {
        Err(GcError::arg(format!("m must be 3 or 4, got {m}")))
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let k = m.nrows();
    for i in 0..k {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

fn sign_normalize(v: &mut [f64]) {
    if let Some(first) = v.iter().copied().find(|x| x.abs() > 1e-12) {
        if first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

impl SpectralSummary {
    pub fn new(params: &DcmmParams) -> Result<Self> {
        let pi = params.memberships();
        let theta_sq = DVector::from_iterator(params.n(), params.theta().iter().map(|t| t * t));
        let weighted_pi = DMatrix::from_fn(pi.nrows(), pi.ncols(), |i, c| theta_sq[i] * pi[(i, c)]);
        let mut g = pi.transpose() * weighted_pi;
        symmetrize(&mut g);

        let eig = SymmetricEigen::try_new(g.clone(), f64::EPSILON, 0)
            .ok_or_else(|| GcError::Numerical("eigendecomposition of G did not converge".into()))?;
        let floor = G_FLOOR * g.trace();
        if let Some(&min) = eig.eigenvalues.iter().min_by(|a, b| a.total_cmp(b)) {
            if !(min > floor) {
                return Err(GcError::Numerical(format!(
                    "G is singular: smallest eigenvalue {min:e} is below {floor:e}"
                )));
            }
        }
        let root = |f: fn(f64) -> f64| {
            let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
            let mut m = &eig.eigenvectors * d * eig.eigenvectors.transpose();
            symmetrize(&mut m);
            m
        };
        let g_half = root(f64::sqrt);
        let g_inv_half = root(|x| 1.0 / x.sqrt());

        let theta = DVector::from_column_slice(params.theta());
        let eta = &g_inv_half * (pi.transpose() * theta);

        let mut core = &g_half * params.community() * &g_half;
        symmetrize(&mut core);
        let eig = SymmetricEigen::try_new(core, f64::EPSILON, 0)
            .ok_or_else(|| GcError::Numerical("eigendecomposition of G^1/2 P G^1/2 did not converge".into()))?;
        let mut pairs: Vec<(f64, Vec<f64>)> = (0..params.k())
            .map(|c| {
                let mut v: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
                sign_normalize(&mut v);
                (eig.eigenvalues[c], v)
            })
            .collect();
        pairs.sort_by(|(la, va), (lb, vb)| {
            lb.abs()
                .total_cmp(&la.abs())
                .then_with(|| lb.total_cmp(la))
                .then_with(|| vb.partial_cmp(va).unwrap_or(Ordering::Equal))
        });

        let projections = pairs
            .iter()
            .map(|(_, v)| {
                let dot: f64 = v.iter().zip(eta.iter()).map(|(a, b)| a * b).sum();
                dot * dot
            })
            .collect();
        let (lambdas, xis) = pairs.into_iter().unzip();
        Ok(SpectralSummary { g, eta: eta.iter().copied().collect(), lambdas, xis, projections })
    }

    pub fn k(&self) -> usize {
        self.lambdas.len()
    }

    /// `sum_k lambda_k^m`, which equals `trace(Omega^m)`.
    pub fn trace_power(&self, m: u32) -> f64 {
        self.lambdas.iter().map(|l| l.powi(m as i32)).sum()
    }

    /// `sum_k (eta, xi_k)^2 lambda_k^m`, which equals `1' Omega^m 1`.
    pub fn quadratic_power(&self, m: u32) -> f64 {
        self.lambdas
            .iter()
            .zip(&self.projections)
            .map(|(l, p)| p * l.powi(m as i32))
            .sum()
    }

    /// The walk ratio `sum p lambda^{m-1} / sum p lambda^{m-2}`.
    pub fn walk_ratio(&self, m: u32) -> Result<f64> {
        check_order(m)?;
        let denominator = self.quadratic_power(m - 2);
        if denominator == 0.0 {
            return Err(GcError::Domain(format!("sum of (eta, xi)^2 lambda^{} is zero", m - 2)));
        }
        Ok(self.quadratic_power(m - 1) / denominator)
    }

    /// `S - r^m` with `S = sum lambda^m` and `r` the walk ratio.
    pub fn bracket(&self, m: u32) -> Result<f64> {
        let ratio = self.walk_ratio(m)?;
        // With one eigenpair the ratio is lambda_1 and the bracket vanishes identically.
        if self.k() == 1 {
            return Ok(0.0);
        }
        Ok(self.trace_power(m) - ratio.powi(m as i32))
    }

    /// `(2m)^{-1/2} S^{-1/2} (S - r^m)`.
    pub fn delta_gc(&self, m: u32) -> Result<f64> {
        check_order(m)?;
        let total = self.trace_power(m);
        if !(total > 0.0) {
            return Err(GcError::Domain(format!("sum of lambda^{m} is {total}, cannot standardize")));
        }
        Ok(self.bracket(m)? / (2.0 * m as f64 * total).sqrt())
    }
}

pub fn spectral_summary(params: &DcmmParams) -> Result<SpectralSummary> {
    SpectralSummary::new(params)
}

pub fn delta_gc(params: &DcmmParams, m: u32) -> Result<f64> {
    SpectralSummary::new(params)?.delta_gc(m)
}

/// How [`chi_gc_population`] evaluates the population statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PopulationMode {
    /// Expected densities by enumerating ordered distinct tuples over `Omega`.
    Exact,
    /// The spectral leading term `n^{-m} (S - r^m)`.
    Proxy,
}

/// Expected graphlet numerators: sums over ordered distinct tuples of the
/// products of `Omega` along the path or cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
struct ExpectedNumerators {
    paths1: f64,
    paths2: f64,
    paths3: f64,
    cycles3: f64,
    cycles4: f64,
}

fn expected_numerators(w: &[Vec<f64>], need_four: bool) -> ExpectedNumerators {
    let n = w.len();
    let mut e = ExpectedNumerators { paths1: 0.0, paths2: 0.0, paths3: 0.0, cycles3: 0.0, cycles4: 0.0 };
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            let wij = w[i][j];
            e.paths1 += wij;
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let wijk = wij * w[j][k];
                e.paths2 += wijk;
                e.cycles3 += wijk * w[k][i];
                if !need_four {
                    continue;
                }
                for l in 0..n {
                    if l == i || l == j || l == k {
                        continue;
                    }
                    let wijkl = wijk * w[k][l];
                    e.paths3 += wijkl;
                    e.cycles4 += wijkl * w[l][i];
                }
            }
        }
    }
    e
}

/// Population statistic `C_m - (L_{m-1} / L_{m-2})^m`.
///
/// Exact mode replaces every density by its expectation under the model;
/// since the indices of a tuple are distinct the expectation of the product of
/// edge indicators is the product of probabilities. It is guarded by
/// `B(n, m+1) <= 1e8`.
pub fn chi_gc_population(params: &DcmmParams, m: u32, mode: PopulationMode) -> Result<f64> {
    check_order(m)?;
    let n = params.n();
    if n < m as usize + 1 {
        return Err(GcError::arg(format!("population statistic for m={m} needs n >= {}", m + 1)));
    }
    match mode {
        PopulationMode::Proxy => {
            let summary = SpectralSummary::new(params)?;
            Ok(summary.bracket(m)? / (n as f64).powi(m as i32))
        }
        PopulationMode::Exact => {
            let required = falling_factorial_f64(n, m as usize + 1);
            if required > ENUMERATION_GUARD {
                return Err(GcError::Resource { required, limit: ENUMERATION_GUARD });
            }
            let omega = build_omega(params)?;
            let w: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| omega.get(i, j)).collect()).collect();
            let e = expected_numerators(&w, m == 4);
            let b = |k: usize| falling_factorial_f64(n, k);
            let (cycles, upper, lower) = if m == 3 {
                (e.cycles3 / b(3), e.paths2 / b(3), e.paths1 / b(2))
            } else {
                (e.cycles4 / b(4), e.paths3 / b(4), e.paths2 / b(3))
            };
            if lower == 0.0 {
                return Err(GcError::Degenerate(format!("expected L{} is zero", m - 2)));
            }
            Ok(cycles - (upper / lower).powi(m as i32))
        }
    }
}

/// `Phi(delta - z_alpha)`.
pub fn predicted_power(delta: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(normal::cdf(delta - normal::upper_quantile(alpha)))
}

/// Closed forms for `K` equal pure blocks with equal `theta` and
/// `P = block_p(K, a, b)`, where `(eta, xi_k)^2` is `n` for `k = 1` and 0 otherwise.
#[derive(Debug, Clone, Serialize)]
pub struct BlockClosedForm {
    /// `(h^2/K) B_K`, `(h^2/K) A_K`, then `(h^2/K)(1 - a)` repeated `K - 2` times.
    pub lambdas: Vec<f64>,
    pub delta3: f64,
    pub delta4: f64,
    /// The `b` at which `delta3` vanishes, `w + (1 - w) a` with `w = (1 + (K-2)^{1/3}) / (K/2)`.
    pub b_star: f64,
}

/// With a single leading projection the walk ratio is `lambda_1`, so
/// `delta_m = sum_{k>=2} lambda_k^m / sqrt(2m sum_k lambda_k^m)`.
pub fn block_closed_forms(k: usize, a: f64, b: f64, theta_norm: f64) -> Result<BlockClosedForm> {
    if k < 2 || k % 2 != 0 {
        return Err(GcError::arg(format!("closed forms need an even K >= 2, got {k}")));
    }
    if !(theta_norm > 0.0 && theta_norm.is_finite()) {
        return Err(GcError::arg(format!("||theta|| must be positive, got {theta_norm}")));
    }
    let half = (k / 2) as f64;
    let scale = theta_norm * theta_norm / k as f64;
    let b_k = (1.0 - a) + half * (a + b);
    let a_k = (1.0 - a) + half * (a - b);
    let mut lambdas = vec![scale * b_k, scale * a_k];
    lambdas.extend(std::iter::repeat_n(scale * (1.0 - a), k - 2));

    let delta = |m: i32| {
        let total: f64 = lambdas.iter().map(|l| l.powi(m)).sum();
        let rest: f64 = lambdas[1..].iter().map(|l| l.powi(m)).sum();
        rest / (2.0 * m as f64 * total).sqrt()
    };
    let w = (1.0 + ((k - 2) as f64).cbrt()) / half;
    Ok(BlockClosedForm {
        delta3: delta(3),
        delta4: delta(4),
        b_star: w + (1.0 - w) * a,
        lambdas,
    })
}

/// Power proxies for both orders.
#[derive(Debug, Clone, Serialize)]
pub struct PowerReport {
    pub alpha: f64,
    pub delta3: f64,
    pub delta4: f64,
    pub chi_pop3: f64,
    pub chi_pop4: f64,
    pub population_mode: PopulationMode,
    pub predicted_power3: f64,
    pub predicted_power4: f64,
    pub spectrum: SpectralSummary,
}

impl PowerReport {
    pub fn new(params: &DcmmParams, alpha: f64, mode: PopulationMode) -> Result<Self> {
        check_alpha(alpha)?;
        let spectrum = SpectralSummary::new(params)?;
        let delta3 = spectrum.delta_gc(3)?;
        let delta4 = spectrum.delta_gc(4)?;
        Ok(PowerReport {
            alpha,
            delta3,
            delta4,
            chi_pop3: chi_gc_population(params, 3, mode)?,
            chi_pop4: chi_gc_population(params, 4, mode)?,
            population_mode: mode,
            predicted_power3: predicted_power(delta3, alpha)?,
            predicted_power4: predicted_power(delta4, alpha)?,
            spectrum,
        })
    }
}
