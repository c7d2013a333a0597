//! Quasi-optimal experimental design on a finite grid.
//!
//! Given feature vectors `x_1..x_k` spanning `R^p`, find a probability vector
//! `rho` whose information matrix `Sigma = sum rho_j x_j x_j^T` keeps every
//! leverage `x_j^T Sigma^{-1} x_j` below `2p`. The solver is Frank-Wolfe for
//! the D-optimal (log det) objective with exact line search and away steps.
//! `Sigma^{-1}` and all leverages are updated by Sherman-Morrison and
//! recomputed from scratch at a fixed cadence.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harmonics::{FeatureMap, HarmonicsError, NormKind};

pub const GRID_CAP: usize = 1_000_000;
/// Minimum grid size, as a multiple of the feature dimension.
pub const GRID_FACTOR: usize = 10;
pub const SPAN_TOL: f64 = 1e-10;
pub const PRUNE_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DesignError {
    #[error(transparent)]
    Features(#[from] HarmonicsError),
    #[error("grid spacing must lie in (0, 2], got {0}")]
    Spacing(f64),
    #[error("grid would have {size} points, above the cap of {cap}")]
    GridCap { size: u128, cap: usize },
    #[error("feature vectors do not span R^{dim}: smallest singular value {min_singular:e}")]
    NotSpanning { dim: usize, min_singular: f64 },
    #[error("design problem has {rows} points of dimension {dim}; need at least as many points as dimensions")]
    TooFewPoints { rows: usize, dim: usize },
    #[error("information matrix is not positive definite")]
    Singular,
}

pub type Result<T> = std::result::Result<T, DesignError>;

/// Points per axis of a grid with spacing at most `eps_prime`.
pub fn grid_side(eps_prime: f64) -> Result<usize> {
    if !(eps_prime > 0.0 && eps_prime <= 2.0) {
        return Err(DesignError::Spacing(eps_prime));
    }
    let m = (2.0 / eps_prime - 1e-9).ceil().max(1.0);
    if m > GRID_CAP as f64 {
        return Err(DesignError::GridCap { size: m as u128, cap: GRID_CAP });
    }
    Ok(m as usize)
}

/// Cell-centered tensor grid with `m` points per axis, first axis slowest.
pub fn cell_centered_grid(d: usize, m: usize) -> Result<Vec<Vec<f64>>> {
    let size = (m as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    if size > GRID_CAP as u128 {
        return Err(DesignError::GridCap { size, cap: GRID_CAP });
    }
    let axis: Vec<f64> = (0..m).map(|i| -1.0 + (2 * i + 1) as f64 / m as f64).collect();
    let mut out = Vec::with_capacity(size as usize);
    let mut idx = vec![0usize; d];
    for _ in 0..size {
        out.push(idx.iter().map(|&i| axis[i]).collect());
        for ax in (0..d).rev() {
            idx[ax] += 1;
            if idx[ax] < m {
                break;
            }
            idx[ax] = 0;
        }
    }
    Ok(out)
}

/// Uniform grid on `[-1, 1]^d` with spacing at most `eps_prime`, cell-centered
/// so no point sits on the periodic seam.
pub fn build_grid(d: usize, eps_prime: f64) -> Result<Vec<Vec<f64>>> {
    cell_centered_grid(d, grid_side(eps_prime)?)
}

/// Points per axis for a design grid: the `eps_prime` grid, refined until it
/// holds at least `GRID_FACTOR * dim` points.
pub fn design_grid_side(d: usize, eps_prime: f64, dim: usize) -> Result<usize> {
    let mut m = grid_side(eps_prime)?;
    let want = (GRID_FACTOR * dim) as u128;
    while (m as u128).pow(d as u32) < want {
        m += 1;
    }
    Ok(m)
}

/// Feature vectors of a finite design space.
#[derive(Debug, Clone)]
pub struct DesignProblem {
    feature_map: Option<FeatureMap>,
    grid_points: Vec<Vec<f64>>,
    features: DMatrix<f64>,
    eps_prime: Option<f64>,
}

impl DesignProblem {
    /// Evaluate `feature_map` on `grid_points` and check the result spans.
    pub fn new(feature_map: FeatureMap, grid_points: Vec<Vec<f64>>) -> Result<Self> {
        let p = feature_map.len();
        let mut features = DMatrix::zeros(grid_points.len(), p);
        let mut row = vec![0.0; p];
        for (i, z) in grid_points.iter().enumerate() {
            feature_map.eval_into(z, &mut row)?;
            for (j, v) in row.iter().enumerate() {
                features[(i, j)] = *v;
            }
        }
        let problem = Self { feature_map: Some(feature_map), grid_points, features, eps_prime: None };
        problem.check_span()?;
        Ok(problem)
    }

    /// Design over the default grid for `feature_map` (see [`design_grid_side`]).
    pub fn on_grid(feature_map: FeatureMap, eps_prime: f64) -> Result<Self> {
        let m = design_grid_side(feature_map.dim(), eps_prime, feature_map.len())?;
        let grid = cell_centered_grid(feature_map.dim(), m)?;
        let mut problem = Self::new(feature_map, grid)?;
        problem.eps_prime = Some(eps_prime);
        Ok(problem)
    }

    /// A problem given directly by its vectors; grid points are the vectors.
    pub fn from_vectors(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let rows = vectors.len();
        let p = vectors.first().map_or(0, Vec::len);
        let features = DMatrix::from_fn(rows, p, |i, j| vectors[i][j]);
        let problem = Self { feature_map: None, grid_points: vectors, features, eps_prime: None };
        problem.check_span()?;
        Ok(problem)
    }

    fn check_span(&self) -> Result<()> {
        let (k, p) = self.features.shape();
        if k < p || p == 0 {
            return Err(DesignError::TooFewPoints { rows: k, dim: p });
        }
        let min_singular = min_singular_value(&self.features);
        if !(min_singular > SPAN_TOL) {
            return Err(DesignError::NotSpanning { dim: p, min_singular });
        }
        Ok(())
    }

    pub fn feature_map(&self) -> Option<&FeatureMap> {
        self.feature_map.as_ref()
    }

    pub fn grid_points(&self) -> &[Vec<f64>] {
        &self.grid_points
    }

    /// `k x p` matrix of feature vectors, one per row.
    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn eps_prime(&self) -> Option<f64> {
        self.eps_prime
    }

    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }
}

fn min_singular_value(x: &DMatrix<f64>) -> f64 {
    let r = x.clone().qr().r();
    r.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FwOptions {
    pub max_iters: usize,
    /// Stop once the g-value is at most `2 p (1 - tol)`.
    pub tol: f64,
    /// Iterations between full recomputations of `Sigma^{-1}` and leverages.
    pub refresh_every: usize,
}

impl Default for FwOptions {
    fn default() -> Self {
        Self { max_iters: 50_000, tol: 0.45, refresh_every: 50 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignStatus {
    /// Stopping rule met.
    Converged,
    /// Iteration limit hit with the g-value still at most `2p`.
    IterationLimit,
    /// g-value above `2p` at exit.
    TargetMissed,
}

#[derive(Debug, Clone)]
pub struct DesignResult {
    /// Weights over all grid indices.
    pub rho: Vec<f64>,
    /// Indices with positive weight, increasing.
    pub support: Vec<usize>,
    pub sigma: DMatrix<f64>,
    pub sigma_inv: DMatrix<f64>,
    pub g_value: f64,
    /// Per-support-point counts once a sample budget is supplied.
    pub counts: Option<Vec<u64>>,
    pub n_tot: Option<u64>,
    pub status: DesignStatus,
    pub iterations: usize,
    /// `log det Sigma` after every accepted step.
    pub logdet_history: Vec<f64>,
    /// True if Sigma needed `1e-12 I` added before it factorized.
    pub jittered: bool,
    dim: usize,
    support_points: Vec<Vec<f64>>,
    meta: Option<(usize, usize, NormKind)>,
    eps_prime: Option<f64>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct SupportRecord {
    pub z: Vec<f64>,
    pub rho: f64,
    pub count: Option<u64>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct DesignRecord {
    pub d: Option<usize>,
    #[serde(rename = "N")]
    pub degree: Option<usize>,
    pub norm_kind: Option<NormKind>,
    pub eps_prime: Option<f64>,
    pub support: Vec<SupportRecord>,
    pub g_value: f64,
    pub n_tot: Option<u64>,
}

impl DesignResult {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support_size(&self) -> usize {
        self.support.len()
    }

    pub fn support_points(&self) -> &[Vec<f64>] {
        &self.support_points
    }

    /// Weights of the support points, in support order.
    pub fn support_weights(&self) -> Vec<f64> {
        self.support.iter().map(|&j| self.rho[j]).collect()
    }

    pub fn is_success(&self) -> bool {
        self.status != DesignStatus::TargetMissed
    }

    /// Attach per-point counts for a total budget `n_tot`.
    pub fn with_counts(mut self, n_tot: u64) -> Self {
        self.counts = Some(round_counts(&self, n_tot));
        self.n_tot = Some(n_tot);
        self
    }

    pub fn record(&self) -> DesignRecord {
        let support = self
            .support
            .iter()
            .enumerate()
            .map(|(i, &j)| SupportRecord {
                z: self.support_points[i].clone(),
                rho: self.rho[j],
                count: self.counts.as_ref().map(|c| c[i]),
            })
            .collect();
        DesignRecord {
            d: self.meta.map(|m| m.0),
            degree: self.meta.map(|m| m.1),
            norm_kind: self.meta.map(|m| m.2),
            eps_prime: self.eps_prime,
            support,
            g_value: self.g_value,
            n_tot: self.n_tot,
        }
    }

    /// Leverage `x^T Sigma^{-1} x`.
    pub fn leverage(&self, x: &[f64]) -> f64 {
        let v = DVector::from_column_slice(x);
        (&self.sigma_inv * &v).dot(&v)
    }
}

/// `4 p log log max(p, 16)`.
pub fn support_bound(p: usize) -> usize {
    let q = p.max(16) as f64;
    (4.0 * p as f64 * q.ln().ln()).floor() as usize
}

fn inverse_spd(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64, bool)> {
    let logdet =
        |c: &nalgebra::Cholesky<f64, nalgebra::Dyn>| 2.0 * c.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    if let Some(c) = m.clone().cholesky() {
        let ld = logdet(&c);
        return Ok((c.inverse(), ld, false));
    }
    let jittered = m + DMatrix::identity(m.nrows(), m.ncols()) * 1e-12;
    let c = jittered.cholesky().ok_or(DesignError::Singular)?;
    let ld = logdet(&c);
    Ok((c.inverse(), ld, true))
}

fn information_matrix(x: &DMatrix<f64>, rho: &[f64]) -> DMatrix<f64> {
    let p = x.ncols();
    let mut m = DMatrix::zeros(p, p);
    for (j, &w) in rho.iter().enumerate() {
        if w > 0.0 {
            let row = x.row(j).transpose();
            m.ger(w, &row, &row, 1.0);
        }
    }
    m
}

fn leverages(x: &DMatrix<f64>, sigma_inv: &DMatrix<f64>) -> Vec<f64> {
    let xs = x * sigma_inv;
    xs.component_mul(x).column_sum().iter().copied().collect()
}

/// Greedy pivoted Gram-Schmidt: `p` rows that are linearly independent.
fn initial_support(x: &DMatrix<f64>, candidates: &[usize]) -> Vec<usize> {
    let p = x.ncols();
    let mut residual: Vec<f64> = candidates.iter().map(|&j| x.row(j).norm_squared()).collect();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(p);
    let mut chosen = Vec::with_capacity(p);
    let mut taken = vec![false; candidates.len()];
    for _ in 0..p {
        let mut best = None;
        let mut best_val = 0.0;
        for (c, &r) in residual.iter().enumerate() {
            if !taken[c] && r > best_val {
                best_val = r;
                best = Some(c);
            }
        }
        let Some(c) = best else { break };
        taken[c] = true;
        let j = candidates[c];
        chosen.push(j);
        let mut q = x.row(j).transpose();
        for b in &basis {
            let proj = b.dot(&q);
            q.axpy(-proj, b, 1.0);
        }
        let norm = q.norm();
        if norm <= 0.0 {
            break;
        }
        q /= norm;
        for (c2, &j2) in candidates.iter().enumerate() {
            if !taken[c2] {
                let proj = x.row(j2).transpose().dot(&q);
                residual[c2] -= proj * proj;
            }
        }
        basis.push(q);
    }
    chosen.sort_unstable();
    chosen
}

struct FwState {
    rho: Vec<f64>,
    sigma_inv: DMatrix<f64>,
    g: Vec<f64>,
    logdet: f64,
}

/// Frank-Wolfe iterations over candidate rows (all others keep weight 0).
fn frank_wolfe_on(
    x: &DMatrix<f64>,
    candidates: &[usize],
    options: &FwOptions,
    history: &mut Vec<f64>,
) -> Result<(FwState, usize, bool)> {
    let (k, p) = x.shape();
    let pf = p as f64;
    let target = 2.0 * pf * (1.0 - options.tol);
    let init = initial_support(x, candidates);
    if init.len() < p {
        return Err(DesignError::Singular);
    }
    let mut rho = vec![0.0; k];
    for &j in &init {
        rho[j] = 1.0 / init.len() as f64;
    }
    let refresh = |rho: &[f64]| -> Result<FwState> {
        let (sigma_inv, logdet, _) = inverse_spd(&information_matrix(x, rho))?;
        let g = leverages(x, &sigma_inv);
        Ok(FwState { rho: rho.to_vec(), sigma_inv, g, logdet })
    };
    let mut st = refresh(&rho)?;
    history.push(st.logdet);
    let mut converged = false;
    let mut iters = 0;
    while iters < options.max_iters {
        // forward vertex: largest leverage, lowest index on ties
        let mut jp = candidates[0];
        for &j in candidates {
            if st.g[j] > st.g[jp] {
                jp = j;
            }
        }
        let g_max = st.g[jp];
        if g_max <= target {
            converged = true;
            break;
        }
        // away vertex: smallest leverage among the support
        let mut jm = None;
        for &j in candidates {
            if st.rho[j] > 0.0 && jm.is_none_or(|m: usize| st.g[j] < st.g[m]) {
                jm = Some(j);
            }
        }
        let jm = jm.expect("support is never empty");
        let g_min = st.g[jm];
        let forward_gap = g_max / pf - 1.0;
        let away_gap = 1.0 - g_min / pf;
        let (j, gj, gamma) = if forward_gap >= away_gap || st.rho[jm] >= 1.0 {
            (jp, g_max, (g_max - pf) / (pf * (g_max - 1.0)))
        } else {
            let w = st.rho[jm];
            let floor = -w / (1.0 - w);
            let opt = if g_min > 1.0 + 1e-12 { (g_min - pf) / (pf * (g_min - 1.0)) } else { floor };
            (jm, g_min, opt.max(floor))
        };
        let denom = 1.0 + gamma * (gj - 1.0);
        if !(gamma.is_finite() && denom > 1e-9 && gamma < 1.0) {
            break;
        }
        iters += 1;
        let u = &st.sigma_inv * x.row(j).transpose();
        let xu = x * &u;
        let scale = 1.0 / (1.0 - gamma);
        let c = gamma / (1.0 - gamma + gamma * gj);
        st.sigma_inv.ger(-c, &u, &u, 1.0);
        st.sigma_inv *= scale;
        for (gi, v) in st.g.iter_mut().zip(xu.iter()) {
            *gi = scale * (*gi - c * v * v);
        }
        for w in st.rho.iter_mut() {
            *w *= 1.0 - gamma;
        }
        st.rho[j] += gamma;
        if st.rho[j] < 1e-15 {
            st.rho[j] = 0.0;
        }
        st.logdet += pf * (1.0 - gamma).ln() + (denom / (1.0 - gamma)).ln();
        if iters % options.refresh_every == 0 {
            st = refresh(&st.rho)?;
        }
        history.push(st.logdet);
    }
    Ok((st, iters, converged))
}

/// Frank-Wolfe D-optimal design with support pruning.
pub fn frank_wolfe_design(problem: &DesignProblem, options: &FwOptions) -> Result<DesignResult> {
    let x = problem.features();
    let (k, p) = x.shape();
    let mut history = Vec::new();
    let all: Vec<usize> = (0..k).collect();
    let (st, mut iterations, mut converged) = frank_wolfe_on(x, &all, options, &mut history)?;
    let mut rho = st.rho;
    prune(&mut rho);

    let bound = support_bound(p);
    let mut support: Vec<usize> = (0..k).filter(|&j| rho[j] > 0.0).collect();
    if support.len() > bound {
        support.sort_by(|&a, &b| rho[b].total_cmp(&rho[a]).then(a.cmp(&b)));
        support.truncate(bound);
        support.sort_unstable();
        let mut kept = vec![0.0; k];
        for &j in &support {
            kept[j] = rho[j];
        }
        let total: f64 = kept.iter().sum();
        kept.iter_mut().for_each(|w| *w /= total);
        let (inv, _, _) = inverse_spd(&information_matrix(x, &kept))?;
        let g_full = leverages(x, &inv).into_iter().fold(0.0, f64::max);
        if g_full > 2.0 * p as f64 {
            let (st2, it2, conv2) = frank_wolfe_on(x, &support, options, &mut history)?;
            iterations += it2;
            converged = conv2;
            kept = st2.rho;
            prune(&mut kept);
        }
        rho = kept;
        support = (0..k).filter(|&j| rho[j] > 0.0).collect();
    }
    let sigma = information_matrix(x, &rho);
    let (sigma_inv, _, jittered) = inverse_spd(&sigma)?;
    let g_value = leverages(x, &sigma_inv).into_iter().fold(0.0, f64::max);
    let status = if g_value > 2.0 * p as f64 {
        DesignStatus::TargetMissed
    } else if converged {
        DesignStatus::Converged
    } else {
        DesignStatus::IterationLimit
    };
    let support_points = support.iter().map(|&j| problem.grid_points()[j].clone()).collect();
    let meta = problem.feature_map().map(|fm| (fm.dim(), fm.index_set().degree(), fm.index_set().norm_kind()));
    Ok(DesignResult {
        rho,
        support,
        sigma,
        sigma_inv,
        g_value,
        counts: None,
        n_tot: None,
        status,
        iterations,
        logdet_history: history,
        jittered,
        dim: p,
        support_points,
        meta,
        eps_prime: problem.eps_prime(),
    })
}

fn prune(rho: &mut [f64]) {
    for w in rho.iter_mut() {
        if *w < PRUNE_TOL {
            *w = 0.0;
        }
    }
    let total: f64 = rho.iter().sum();
    rho.iter_mut().for_each(|w| *w /= total);
}

/// `ceil(n_tot rho_j)` per support point. Products within `1e-9` (relative) of
/// an integer are not rounded up, so `0.3 * 100` gives 30.
pub fn round_counts(result: &DesignResult, n_tot: u64) -> Vec<u64> {
    round_weights(&result.support_weights(), n_tot)
}

pub fn round_weights(weights: &[f64], n_tot: u64) -> Vec<u64> {
    weights
        .iter()
        .map(|&w| {
            let c = n_tot as f64 * w;
            let fl = c.floor();
            let n = if c - fl <= 1e-9 * c.max(1.0) { fl } else { fl + 1.0 };
            (n as u64).max(1)
        })
        .collect()
}

/// Largest leverage of `result` over a grid `refine` times finer than the
/// problem's, as a check on the discretization.
pub fn audit_g_value(fm: &FeatureMap, result: &DesignResult, grid_side: usize, refine: usize) -> Result<f64> {
    let grid = cell_centered_grid(fm.dim(), grid_side * refine)?;
    let mut best: f64 = 0.0;
    let mut phi = vec![0.0; fm.len()];
    for z in &grid {
        fm.eval_into(z, &mut phi)?;
        best = best.max(result.leverage(&phi));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_examples() {
        assert_eq!(build_grid(1, 1.0).unwrap(), vec![vec![-0.5], vec![0.5]]);
        assert_eq!(build_grid(2, 0.5).unwrap().len(), 16);
        let g = build_grid(1, 0.01).unwrap();
        assert_eq!(g.len(), 200);
        assert!((g[1][0] - g[0][0] - 0.01).abs() < 1e-12);
        assert!(matches!(build_grid(1, 0.0), Err(DesignError::Spacing(_))));
        assert!(matches!(build_grid(3, 0.001), Err(DesignError::GridCap { .. })));
    }

    #[test]
    fn standard_basis_design_is_uniform() {
        let vecs: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let r = frank_wolfe_design(&DesignProblem::from_vectors(vecs).unwrap(), &FwOptions::default()).unwrap();
        for w in &r.rho {
            assert!((w - 0.25).abs() < 1e-12);
        }
        assert!((r.g_value - 4.0).abs() < 1e-9);
    }

    #[test]
    fn two_orthonormal_vectors() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let vecs = vec![vec![s, s], vec![s, -s]];
        let r = frank_wolfe_design(&DesignProblem::from_vectors(vecs).unwrap(), &FwOptions::default()).unwrap();
        assert!((r.rho[0] - 0.5).abs() < 1e-12 && (r.rho[1] - 0.5).abs() < 1e-12);
        assert!((r.g_value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn not_spanning() {
        let vecs = vec![vec![1.0, 0.0], vec![2.0, 0.0], vec![-1.0, 0.0]];
        assert!(matches!(DesignProblem::from_vectors(vecs), Err(DesignError::NotSpanning { .. })));
        assert!(matches!(DesignProblem::from_vectors(vec![vec![1.0, 0.0]]), Err(DesignError::TooFewPoints { .. })));
    }

    #[test]
    fn trig_design_d1_n3() {
        let fm = FeatureMap::orthonormal(1, 3, NormKind::Linf).unwrap();
        let problem = DesignProblem::new(fm, build_grid(1, 0.02).unwrap()).unwrap();
        let r = frank_wolfe_design(&problem, &FwOptions::default()).unwrap();
        assert!(r.g_value <= 14.0 && r.g_value >= 7.0 - 1e-6);
        assert!(r.support_size() <= support_bound(7));
        assert!(r.is_success());
        assert!((r.rho.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(r.rho.iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn logdet_never_decreases() {
        let fm = FeatureMap::orthonormal(2, 2, NormKind::Linf).unwrap();
        let problem = DesignProblem::on_grid(fm, 0.2).unwrap();
        let opts = FwOptions { tol: 0.49, ..FwOptions::default() };
        let r = frank_wolfe_design(&problem, &opts).unwrap();
        for w in r.logdet_history.windows(2) {
            assert!(w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0), "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn rounding_examples() {
        assert_eq!(round_weights(&[0.5, 0.3, 0.2], 100), vec![50, 30, 20]);
        assert_eq!(round_weights(&[0.55, 0.45], 10), vec![6, 5]);
    }

    #[test]
    fn support_bound_floor() {
        assert_eq!(support_bound(1), 4);
        assert_eq!(support_bound(100), (400.0 * 100f64.ln().ln()).floor() as usize);
    }

    #[test]
    fn json_record_shape() {
        let fm = FeatureMap::orthonormal(1, 2, NormKind::Linf).unwrap();
        let problem = DesignProblem::on_grid(fm, 0.1).unwrap();
        let r = frank_wolfe_design(&problem, &FwOptions::default()).unwrap().with_counts(100);
        let v = serde_json::to_value(r.record()).unwrap();
        for key in ["d", "N", "norm_kind", "eps_prime", "support", "g_value", "n_tot"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["norm_kind"], "LINF");
    }

    proptest! {
        #[test]
        fn rounded_total_within_budget(raw in proptest::collection::vec(0.01f64..1.0, 1..20), n_tot in 1u64..10_000) {
            let total: f64 = raw.iter().sum();
            let w: Vec<f64> = raw.iter().map(|v| v / total).collect();
            let counts = round_weights(&w, n_tot);
            let sum: u64 = counts.iter().sum();
            prop_assert!(sum >= n_tot);
            prop_assert!(sum <= n_tot + w.len() as u64);
        }
    }
}
