//! Perturbed least-squares value iteration.
//!
//! One design over the state-action grid fixes the base points and their
//! multiplicities. Stages are then solved backwards from `H` to `1`. Every
//! base point copy draws a signed kernel pair, queries the model at both
//! perturbed points and forms
//!
//! `y = beta_plus (r+ + V(s+')) - beta_minus (r- + V(s-'))`,
//!
//! where `V` is the greedy value of the stage above (zero past the horizon).
//! The conditional mean of `y` is the kernel projection of the Bellman image,
//! which lies in the feature span, so each stage is a well-specified linear
//! regression.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::design::{self, DesignError, DesignProblem, DesignResult, FwOptions};
use crate::env::{EnvError, GenerativeModel, Simulator};
use crate::harmonics::{
    wrap, wrap_coord, FeatureMap, HarmonicsError, MultiIndexSet, NormKind, Normalization, SocTable,
};
use crate::kernel_sampler::{self, KernelTable, SamplerError};
use crate::rng::{stream, Purpose};

pub const SINGULAR_TOL: f64 = 1e-10;
pub const DEFAULT_RIDGE: f64 = 1e-10;
pub const DEFAULT_ACTION_GRID: usize = 41;
pub const DEFAULT_REFINE_ROUNDS: usize = 3;
pub const DEFAULT_DELTA: f64 = 0.1;

#[derive(Debug, Error)]
pub enum LsviError {
    #[error(transparent)]
    Harmonics(#[from] HarmonicsError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error("stage {stage}: {source}")]
    Env { stage: usize, source: EnvError },
    #[error("design missed its target: g-value {g_value} > {bound}")]
    DesignFailed { g_value: f64, bound: f64 },
    #[error("Gram matrix is singular: smallest eigenvalue {min_eig:e}")]
    Singular { min_eig: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("estimate json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, LsviError>;

/// `N = 2 ceil(c eps^{-1/(nu+1)} / 2)`, at least 2.
pub fn choose_degree(epsilon: f64, nu: f64, c: f64) -> usize {
    let raw = c * epsilon.powf(-1.0 / (nu + 1.0));
    let half = (raw / 2.0 - 1e-9).ceil().max(1.0);
    2 * half as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    #[serde(rename = "N")]
    pub degree: usize,
    pub n_tot: u64,
    pub nu: Option<f64>,
    pub eps_prime: f64,
    pub action_grid_m: usize,
    pub seed: u64,
    pub ridge: f64,
    pub norm_kind: NormKind,
    pub table_points: usize,
    pub refine_rounds: usize,
    pub clip: bool,
    pub design_tol: f64,
    pub design_max_iters: usize,
    pub delta: f64,
    /// Per-stage seed overrides, keyed by stage.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub stage_seeds: BTreeMap<usize, u64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let fw = FwOptions::default();
        Self {
            degree: 2,
            n_tot: 2000,
            nu: None,
            eps_prime: 0.1,
            action_grid_m: DEFAULT_ACTION_GRID,
            seed: 0,
            ridge: DEFAULT_RIDGE,
            norm_kind: NormKind::Linf,
            table_points: kernel_sampler::DEFAULT_TABLE_POINTS,
            refine_rounds: DEFAULT_REFINE_ROUNDS,
            clip: false,
            design_tol: fw.tol,
            design_max_iters: fw.max_iters,
            delta: DEFAULT_DELTA,
            stage_seeds: BTreeMap::new(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.degree < 2 || self.degree % 2 == 1 {
            return Err(LsviError::Config(format!("degree must be even and >= 2, got {}", self.degree)));
        }
        if self.n_tot < 1 {
            return Err(LsviError::Config("n_tot must be >= 1".into()));
        }
        if self.action_grid_m < 3 {
            return Err(LsviError::Config(format!("action grid needs >= 3 points, got {}", self.action_grid_m)));
        }
        if !(self.ridge >= 0.0) {
            return Err(LsviError::Config(format!("ridge must be >= 0, got {}", self.ridge)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(LsviError::Config(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        Ok(())
    }

    pub fn stage_seed(&self, h: usize) -> u64 {
        self.stage_seeds.get(&h).copied().unwrap_or(self.seed)
    }

    fn fw_options(&self) -> FwOptions {
        FwOptions { tol: self.design_tol, max_iters: self.design_max_iters, ..FwOptions::default() }
    }
}

/// Base points with multiplicities; the same for every stage.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub points: Vec<Vec<f64>>,
    pub multiplicities: Vec<u64>,
}

impl Dataset {
    pub fn size(&self) -> u64 {
        self.multiplicities.iter().sum()
    }

    /// Point index of every copy, in order.
    pub fn copies(&self) -> Vec<usize> {
        self.multiplicities.iter().enumerate().flat_map(|(i, &m)| std::iter::repeat_n(i, m as usize)).collect()
    }
}

pub fn build_dataset(design: &DesignResult, n_tot: u64) -> Dataset {
    Dataset { points: design.support_points().to_vec(), multiplicities: design::round_counts(design, n_tot) }
}

/// Endpoint-inclusive action grid, `-1 + 2 j / (m - 1)` per axis.
pub fn action_grid(d_action: usize, m: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> =
        (0..m).map(|j| if j + 1 == m { 1.0 } else { -1.0 + 2.0 * j as f64 / (m - 1) as f64 }).collect();
    let total = m.pow(d_action as u32);
    (0..total)
        .map(|mut flat| {
            let mut a = vec![0.0; d_action];
            for ax in (0..d_action).rev() {
                a[ax] = axis[flat % m];
                flat /= m;
            }
            a
        })
        .collect()
}

/// `Q(s, a) = phi(s, a)^T theta` with fast evaluation over the action grid.
///
/// Features factor as a state part times an action part. Coefficients are
/// grouped by state part `u`, giving `Q(s, a_j) = sum_u S_u(s) W[u][j]`.
#[derive(Debug, Clone)]
pub struct QFunction {
    fm: FeatureMap,
    theta: Vec<f64>,
    d_state: usize,
    actions: Vec<Vec<f64>>,
    action_spacing: f64,
    state_keys: Vec<Vec<i32>>,
    state_scale: Vec<f64>,
    /// `|state_keys| x |actions|`, row-major.
    w: Vec<f64>,
    refine_rounds: usize,
    clip: Option<(f64, f64)>,
}

impl QFunction {
    pub fn new(fm: FeatureMap, theta: Vec<f64>, d_state: usize, action_grid_m: usize, refine_rounds: usize) -> Self {
        let d = fm.dim();
        let d_action = d - d_state;
        let actions = action_grid(d_action, action_grid_m);
        let degree = fm.index_set().degree();
        let orthonormal = fm.normalization() == Normalization::Orthonormal;
        let half_scale = |n: &[i32]| -> f64 {
            if orthonormal {
                n.iter().filter(|&&v| v == 0).fold(1.0, |acc, _| acc * std::f64::consts::FRAC_1_SQRT_2)
            } else {
                1.0
            }
        };
        let mut state_keys: Vec<Vec<i32>> = Vec::new();
        let mut key_of = Vec::with_capacity(fm.len());
        for n in fm.index_set().indices() {
            let key = &n[..d_state];
            let u = match state_keys.iter().position(|k| k.as_slice() == key) {
                Some(u) => u,
                None => {
                    state_keys.push(key.to_vec());
                    state_keys.len() - 1
                }
            };
            key_of.push(u);
        }
        let state_scale = state_keys.iter().map(|k| half_scale(k)).collect();
        let mut w = vec![0.0; state_keys.len() * actions.len()];
        for (j, a) in actions.iter().enumerate() {
            // a = 1 and a = -1 are the same point; wrapping makes their values tie exactly
            let table = SocTable::new(degree, &wrap(a));
            for (idx, n) in fm.index_set().indices().iter().enumerate() {
                let an = &n[d_state..];
                let av: f64 = an.iter().enumerate().map(|(i, &v)| table.get(i, v)).product::<f64>() * half_scale(an);
                w[key_of[idx] * actions.len() + j] += theta[idx] * av;
            }
        }
        let action_spacing = 2.0 / (action_grid_m - 1) as f64;
        Self { fm, theta, d_state, actions, action_spacing, state_keys, state_scale, w, refine_rounds, clip: None }
    }

    /// Clip Q values to `[lo, hi]`.
    pub fn with_clip(mut self, lo: f64, hi: f64) -> Self {
        self.clip = Some((lo, hi));
        self
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn actions(&self) -> &[Vec<f64>] {
        &self.actions
    }

    fn clip_value(&self, q: f64) -> f64 {
        match self.clip {
            Some((lo, hi)) => q.clamp(lo, hi),
            None => q,
        }
    }

    /// `Q(s, a)` at any point of the cube.
    pub fn q(&self, s: &[f64], a: &[f64]) -> f64 {
        let z: Vec<f64> = s.iter().chain(a).map(|&x| wrap_coord(x)).collect();
        let phi = self.fm.eval(&z).expect("point in the cube");
        self.clip_value(phi.iter().zip(&self.theta).map(|(x, t)| x * t).sum())
    }

    /// `Q(s, a_j)` for every action-grid point.
    pub fn q_grid(&self, s: &[f64]) -> Vec<f64> {
        let degree = self.fm.index_set().degree();
        let table = SocTable::new(degree, &wrap(s));
        let na = self.actions.len();
        let mut out = vec![0.0; na];
        for (u, key) in self.state_keys.iter().enumerate() {
            let sv = key.iter().enumerate().map(|(i, &v)| table.get(i, v)).product::<f64>() * self.state_scale[u];
            if sv == 0.0 {
                continue;
            }
            for (o, w) in out.iter_mut().zip(&self.w[u * na..(u + 1) * na]) {
                *o += sv * w;
            }
        }
        out.into_iter().map(|q| self.clip_value(q)).collect()
    }

    /// `max_j Q(s, a_j)` over the action grid.
    pub fn value(&self, s: &[f64]) -> f64 {
        self.q_grid(s).into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Grid argmax (lowest index on ties), then `refine_rounds` rounds of
    /// coordinate moves of half the previous step, kept only if strictly
    /// better.
    pub fn greedy(&self, s: &[f64]) -> (Vec<f64>, f64) {
        let q = self.q_grid(s);
        let mut best_j = 0;
        for (j, &v) in q.iter().enumerate() {
            if v > q[best_j] {
                best_j = j;
            }
        }
        let mut a = self.actions[best_j].clone();
        let mut best = q[best_j];
        let mut step = self.action_spacing;
        for _ in 0..self.refine_rounds {
            step *= 0.5;
            for ax in 0..a.len() {
                for dir in [-1.0, 1.0] {
                    let mut cand = a.clone();
                    cand[ax] = (cand[ax] + dir * step).clamp(-1.0, 1.0);
                    let v = self.q(s, &cand);
                    if v > best {
                        best = v;
                        a = cand;
                    }
                }
            }
        }
        (a, best)
    }

    pub fn d_state(&self) -> usize {
        self.d_state
    }
}

/// Signed regression target for one base point copy.
#[allow(clippy::too_many_arguments)]
pub fn target_sample(
    sim: &Simulator<'_>,
    next: Option<&QFunction>,
    table: &KernelTable,
    z: &[f64],
    h: usize,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    let d = z.len();
    let ds = sim.model().d_state();
    let (eta_plus, eta_minus) = kernel_sampler::sample_pair_d(table, d, rng);
    let half = |eta: &[f64], rng: &mut dyn RngCore| -> Result<f64> {
        let x = kernel_sampler::perturb(z, eta);
        let t = sim.query(&x[..ds], &x[ds..], h, rng).map_err(|source| LsviError::Env { stage: h, source })?;
        Ok(t.reward + next.map_or(0.0, |q| q.value(&t.next_state)))
    };
    let yp = half(&eta_plus, rng)?;
    let ym = half(&eta_minus, rng)?;
    Ok(table.beta_plus_d(d) * yp - table.beta_minus_d(d) * ym)
}

/// Targets for every copy of the dataset at stage `h`, in copy order.
pub fn build_targets(
    sim: &Simulator<'_>,
    h: usize,
    dataset: &Dataset,
    next: Option<&QFunction>,
    table: &KernelTable,
    seed: u64,
) -> Result<Vec<f64>> {
    let copies = dataset.copies();
    copies
        .par_iter()
        .enumerate()
        .map(|(i, &p)| {
            let mut rng = stream(seed, Purpose::Targets, h as u64, i as u64);
            target_sample(sim, next, table, &dataset.points[p], h, &mut rng)
        })
        .collect()
}

/// Solve `(G + ridge I) theta = b` by symmetric eigendecomposition.
pub fn solve_normal(gram: &DMatrix<f64>, rhs: &DVector<f64>, ridge: f64) -> Result<(DVector<f64>, f64)> {
    let p = gram.nrows();
    let v = gram + DMatrix::identity(p, p) * ridge;
    let eig = SymmetricEigen::new(v);
    let min_eig = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if ridge == 0.0 && !(min_eig >= SINGULAR_TOL) {
        return Err(LsviError::Singular { min_eig });
    }
    if !(min_eig > 0.0) {
        return Err(LsviError::Singular { min_eig });
    }
    let coords = eig.eigenvectors.transpose() * rhs;
    let scaled = DVector::from_iterator(p, coords.iter().zip(eig.eigenvalues.iter()).map(|(c, l)| c / l));
    Ok((&eig.eigenvectors * scaled, min_eig))
}

/// Ridge least squares over `(features, target)` rows.
pub fn solve_stage(samples: &[(Vec<f64>, f64)], ridge: f64) -> Result<Vec<f64>> {
    let weights = vec![1.0; samples.len()];
    solve_weighted(samples, &weights, ridge)
}

/// Least squares with per-row weights (a weight `m` acts like `m` copies).
pub fn solve_weighted(samples: &[(Vec<f64>, f64)], weights: &[f64], ridge: f64) -> Result<Vec<f64>> {
    let p = samples.first().map_or(0, |s| s.0.len());
    let mut gram = DMatrix::zeros(p, p);
    let mut rhs = DVector::zeros(p);
    for ((x, y), &w) in samples.iter().zip(weights) {
        let v = DVector::from_column_slice(x);
        gram.ger(w, &v, &v, 1.0);
        rhs.axpy(w * y, &v, 1.0);
    }
    Ok(solve_normal(&gram, &rhs, ridge)?.0.iter().copied().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceWidths {
    /// `sqrt(log(2 k / delta)) ||x||_{V^{-1}} sigma`.
    pub finite_cover: f64,
    /// `sqrt(n log(2 n / delta)) ||x||_{V^{-1}} sigma`.
    pub uniform: f64,
    pub x_norm: f64,
}

/// Widths from a Gram matrix built from `n` rows.
pub fn confidence_width_from_gram(
    gram: &DMatrix<f64>,
    n: usize,
    x: &[f64],
    sigma_bound: f64,
    delta: f64,
    k_cover: usize,
) -> Result<ConfidenceWidths> {
    let chol = gram.clone().cholesky().ok_or(LsviError::Singular { min_eig: 0.0 })?;
    let v = DVector::from_column_slice(x);
    let x_norm = chol.solve(&v).dot(&v).max(0.0).sqrt();
    let nf = n as f64;
    Ok(ConfidenceWidths {
        finite_cover: (2.0 * k_cover as f64 / delta).ln().sqrt() * x_norm * sigma_bound,
        uniform: (nf * (2.0 * nf / delta).ln()).sqrt() * x_norm * sigma_bound,
        x_norm,
    })
}

/// Widths for the regression on `rows` (no ridge).
pub fn confidence_width(
    rows: &[Vec<f64>],
    x: &[f64],
    sigma_bound: f64,
    delta: f64,
    k_cover: usize,
) -> Result<ConfidenceWidths> {
    let p = x.len();
    let mut gram = DMatrix::zeros(p, p);
    for r in rows {
        let v = DVector::from_column_slice(r);
        gram.ger(1.0, &v, &v, 1.0);
    }
    confidence_width_from_gram(&gram, rows.len(), x, sigma_bound, delta, k_cover)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageDiagnostics {
    pub h: usize,
    pub n_samples: u64,
    pub n_queries: u64,
    pub residual_rms: f64,
    pub min_gram_eig: f64,
    /// Largest finite-cover width over the support points.
    pub max_confidence_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageEstimate {
    pub h: usize,
    pub theta: Vec<f64>,
    pub diagnostics: StageDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSummary {
    pub grid_points: usize,
    pub support_size: usize,
    pub g_value: f64,
    pub support_bound: usize,
    pub dataset_size: u64,
}

/// Stage coefficient vectors plus everything needed to evaluate them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QEstimate {
    pub env: String,
    pub d_state: usize,
    pub d_action: usize,
    pub horizon: usize,
    pub n_features: usize,
    pub config: TrainConfig,
    pub lambda_hat: f64,
    /// `1 + lambda_hat^d (H + 1)`, the bound on the target noise.
    pub sigma_bound: f64,
    pub design: DesignSummary,
    /// Ordered by stage, `h = 1..=H`.
    pub stages: Vec<StageEstimate>,
}

impl QEstimate {
    pub fn feature_map(&self) -> Result<FeatureMap> {
        let set = MultiIndexSet::new(self.d_state + self.d_action, self.config.degree, self.config.norm_kind)?;
        Ok(FeatureMap::new(set, Normalization::Orthonormal))
    }

    pub fn theta(&self, h: usize) -> &[f64] {
        &self.stages[h - 1].theta
    }

    pub fn q_function(&self, h: usize) -> Result<QFunction> {
        let q = QFunction::new(
            self.feature_map()?,
            self.theta(h).to_vec(),
            self.d_state,
            self.config.action_grid_m,
            self.config.refine_rounds,
        );
        Ok(if self.config.clip { q.with_clip(0.0, (self.horizon + 1 - h) as f64) } else { q })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("estimate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let est: Self = serde_json::from_str(text).map_err(|e| LsviError::Json(e.to_string()))?;
        let p = est.feature_map()?.len();
        if est.n_features != p || est.stages.len() != est.horizon || est.stages.iter().any(|s| s.theta.len() != p) {
            return Err(LsviError::Json("coefficient shapes do not match the feature map".into()));
        }
        Ok(est)
    }

    pub fn total_queries(&self) -> u64 {
        self.stages.iter().map(|s| s.diagnostics.n_queries).sum()
    }
}

/// Greedy policy `pi_h(s) = argmax_a Q_h(s, a)`.
#[derive(Debug, Clone)]
pub struct GreedyPolicy {
    stages: Vec<QFunction>,
}

impl GreedyPolicy {
    pub fn action(&self, s: &[f64], h: usize) -> Vec<f64> {
        self.stages[h - 1].greedy(s).0
    }

    pub fn q(&self, h: usize) -> &QFunction {
        &self.stages[h - 1]
    }

    pub fn as_fn(&self) -> impl Fn(&[f64], usize) -> Vec<f64> + Sync + '_ {
        move |s, h| self.action(s, h)
    }
}

pub fn greedy_policy(est: &QEstimate) -> Result<GreedyPolicy> {
    Ok(GreedyPolicy { stages: (1..=est.horizon).map(|h| est.q_function(h)).collect::<Result<_>>()? })
}

/// Output of [`train`] beyond the estimate itself.
#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub estimate: QEstimate,
    pub design: DesignResult,
    pub dataset: Dataset,
    pub ledger_per_stage: Vec<u64>,
}

impl TrainOutput {
    pub fn ledger_total(&self) -> u64 {
        self.ledger_per_stage.iter().sum()
    }
}

/// Design, then backward induction over stages.
pub fn train(model: &dyn GenerativeModel, config: &TrainConfig) -> Result<TrainOutput> {
    config.validate()?;
    let (ds, da, horizon) = (model.d_state(), model.d_action(), model.horizon());
    let d = ds + da;
    let fm = FeatureMap::orthonormal(d, config.degree, config.norm_kind)?;
    let p = fm.len();
    let table = KernelTable::build(config.degree, config.table_points.max(64 * config.degree))?;
    let problem = DesignProblem::on_grid(fm.clone(), config.eps_prime)?;
    let design = design::frank_wolfe_design(&problem, &config.fw_options())?;
    if !design.is_success() {
        return Err(LsviError::DesignFailed { g_value: design.g_value, bound: 2.0 * p as f64 });
    }
    let design = design.with_counts(config.n_tot);
    let dataset = build_dataset(&design, config.n_tot);
    let features: Vec<Vec<f64>> = dataset.points.iter().map(|z| fm.eval(z)).collect::<std::result::Result<_, _>>()?;
    let mut gram = DMatrix::zeros(p, p);
    for (x, &m) in features.iter().zip(&dataset.multiplicities) {
        let v = DVector::from_column_slice(x);
        gram.ger(m as f64, &v, &v, 1.0);
    }
    let sigma_bound = 1.0 + table.lambda_hat().powi(d as i32) * (horizon + 1) as f64;
    let copies = dataset.copies();

    let sim = Simulator::new(model);
    let mut stages: Vec<StageEstimate> = Vec::with_capacity(horizon);
    let mut next: Option<QFunction> = None;
    for h in (1..=horizon).rev() {
        let before = sim.ledger().stage(h);
        let targets = build_targets(&sim, h, &dataset, next.as_ref(), &table, config.stage_seed(h))?;
        let mut rhs = DVector::zeros(p);
        for (&pt, &y) in copies.iter().zip(&targets) {
            rhs.axpy(y, &DVector::from_column_slice(&features[pt]), 1.0);
        }
        let (theta, min_eig) = solve_normal(&gram, &rhs, config.ridge)?;
        let fitted: Vec<f64> = features.iter().map(|x| x.iter().zip(theta.iter()).map(|(a, b)| a * b).sum()).collect();
        let sse: f64 = copies.iter().zip(&targets).map(|(&pt, &y)| (y - fitted[pt]).powi(2)).sum();
        let mut max_width: f64 = 0.0;
        for x in &features {
            let w = confidence_width_from_gram(&gram, copies.len(), x, sigma_bound, config.delta, problem.len())?;
            max_width = max_width.max(w.finite_cover);
        }
        let theta: Vec<f64> = theta.iter().copied().collect();
        let diagnostics = StageDiagnostics {
            h,
            n_samples: copies.len() as u64,
            n_queries: sim.ledger().stage(h) - before,
            residual_rms: (sse / copies.len() as f64).sqrt(),
            min_gram_eig: min_eig,
            max_confidence_width: max_width,
        };
        let q = QFunction::new(fm.clone(), theta.clone(), ds, config.action_grid_m, config.refine_rounds);
        next = Some(if config.clip { q.with_clip(0.0, (horizon + 1 - h) as f64) } else { q });
        stages.push(StageEstimate { h, theta, diagnostics });
    }
    stages.reverse();

    let estimate = QEstimate {
        env: model.name().to_string(),
        d_state: ds,
        d_action: da,
        horizon,
        n_features: p,
        config: config.clone(),
        lambda_hat: table.lambda_hat(),
        sigma_bound,
        design: DesignSummary {
            grid_points: problem.len(),
            support_size: design.support_size(),
            g_value: design.g_value,
            support_bound: design::support_bound(p),
            dataset_size: dataset.size(),
        },
        stages,
    };
    Ok(TrainOutput { estimate, ledger_per_stage: sim.ledger().per_stage(), design, dataset })
}
