//! Generative-model MDPs on periodic cubes, rollouts and a grid oracle.
//!
//! States live in `[-1, 1]^{d_S}`, actions in `[-1, 1]^{d_A}`, stages are
//! numbered `1..=H`. A [`GenerativeModel`] answers `(s, a, h)` with one sampled
//! transition; [`Simulator`] adds validation and query accounting on top.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harmonics::wrap_coord;
use crate::rng::{splitmix64, stream, Purpose};

pub const DOMAIN_TOL: f64 = 1e-12;
/// Largest number of (state, action) cells the oracle accepts.
pub const ORACLE_CELL_CAP: u128 = 50_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("unknown environment `{0}`")]
    Unknown(String),
    #[error("stage {h} outside 1..={horizon}")]
    Stage { h: usize, horizon: usize },
    #[error("{what} coordinate {coord} = {value} lies outside [-1, 1]")]
    Domain { what: &'static str, coord: usize, value: f64 },
    #[error("{what} has dimension {got}, expected {expected}")]
    Dimension { what: &'static str, expected: usize, got: usize },
    #[error("invalid environment parameters: {0}")]
    Params(String),
    #[error("oracle too large: {0}")]
    OracleScale(String),
}

pub type Result<T> = std::result::Result<T, EnvError>;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub next_state: Vec<f64>,
    pub reward: f64,
}

/// Upper bounds on the partial-derivative sums of `Q*_h` in state and action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lipschitz {
    pub state: f64,
    pub action: f64,
}

pub trait GenerativeModel: Send + Sync {
    fn name(&self) -> &str;
    fn d_state(&self) -> usize;
    fn d_action(&self) -> usize;
    fn horizon(&self) -> usize;
    /// Mean reward `R_h(s, a)`, in `[0, 1]`.
    fn reward(&self, s: &[f64], a: &[f64], h: usize) -> f64;
    /// One draw of `(s', r)`. Inputs are assumed valid.
    fn sample(&self, s: &[f64], a: &[f64], h: usize, rng: &mut dyn RngCore) -> Transition;
    fn start_state(&self) -> Vec<f64> {
        vec![0.0; self.d_state()]
    }
    /// Lipschitz bounds used by the oracle's error budget, if known.
    fn lipschitz(&self, _h: usize) -> Option<Lipschitz> {
        None
    }
    fn dim(&self) -> usize {
        self.d_state() + self.d_action()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvKind {
    /// `R = (1 + sin(pi a)) / 2`, one stage.
    TrigBandit,
    /// `R = (2 + cos(pi s) + sin(pi a)) / 4`,
    /// `s' = wrap(s + drift sin(pi a) + noise_scale w)` with `w` drawn from the
    /// raised cosine density `(1 + cos(pi w)) / 2` on `[-1, 1]`.
    SmoothChain { drift: f64, noise_scale: f64 },
    /// `R = c`, `s' = s`.
    Constant { c: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdpSpec {
    pub name: String,
    pub d_state: usize,
    pub d_action: usize,
    pub horizon: usize,
    pub kind: EnvKind,
}

pub const CHAIN_DRIFT: f64 = 0.5;
pub const CHAIN_NOISE_SCALE: f64 = 0.25;

pub fn make_trig_bandit() -> MdpSpec {
    MdpSpec { name: "trig_bandit".into(), d_state: 1, d_action: 1, horizon: 1, kind: EnvKind::TrigBandit }
}

/// Multi-stage chain; `noise_scale = 0` makes transitions deterministic.
pub fn make_smooth_chain(horizon: usize, drift: f64, noise_scale: f64) -> Result<MdpSpec> {
    if horizon < 1 {
        return Err(EnvError::Params("smooth_chain needs H >= 1".into()));
    }
    if !(0.0..=1.0).contains(&noise_scale) || !drift.is_finite() {
        return Err(EnvError::Params(format!("drift {drift}, noise_scale {noise_scale}")));
    }
    Ok(MdpSpec {
        name: "smooth_chain".into(),
        d_state: 1,
        d_action: 1,
        horizon,
        kind: EnvKind::SmoothChain { drift, noise_scale },
    })
}

pub fn make_constant(c: f64, horizon: usize) -> Result<MdpSpec> {
    if !(0.0..=1.0).contains(&c) || horizon < 1 {
        return Err(EnvError::Params(format!("constant reward {c} with H = {horizon}")));
    }
    Ok(MdpSpec { name: "constant".into(), d_state: 1, d_action: 1, horizon, kind: EnvKind::Constant { c } })
}

/// Look an environment up by name. `params` may override `drift`,
/// `noise_scale` (smooth_chain) or `c` (constant).
pub fn env_by_name(name: &str, horizon: Option<usize>, params: &serde_json::Value) -> Result<MdpSpec> {
    let get = |key: &str, default: f64| -> Result<f64> {
        match params.get(key) {
            None => Ok(default),
            Some(v) => v.as_f64().ok_or_else(|| EnvError::Params(format!("`{key}` must be a number"))),
        }
    };
    if let Some(obj) = params.as_object() {
        let allowed: &[&str] = match name {
            "smooth_chain" => &["drift", "noise_scale"],
            "constant" => &["c"],
            _ => &[],
        };
        if let Some(k) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(EnvError::Params(format!("unknown parameter `{k}` for {name}")));
        }
    } else if !params.is_null() {
        return Err(EnvError::Params("parameters must be a JSON object".into()));
    }
    match name {
        "trig_bandit" => match horizon {
            None | Some(1) => Ok(make_trig_bandit()),
            Some(h) => Err(EnvError::Params(format!("trig_bandit has H = 1, got {h}"))),
        },
        "smooth_chain" => {
            make_smooth_chain(horizon.unwrap_or(3), get("drift", CHAIN_DRIFT)?, get("noise_scale", CHAIN_NOISE_SCALE)?)
        }
        "constant" => make_constant(get("c", 0.5)?, horizon.unwrap_or(1)),
        other => Err(EnvError::Unknown(other.to_string())),
    }
}

/// Draw from the raised cosine density `(1 + cos(pi w)) / 2` on `[-1, 1]`.
fn raised_cosine<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let w = rng.random_range(-1.0..1.0);
        if rng.random::<f64>() < 0.5 * (1.0 + (PI * w).cos()) {
            return w;
        }
    }
}

impl MdpSpec {
    /// `E[s' | s, a]` as a point of `[-1, 1)` (wrapping included), by midpoint
    /// quadrature over the noise density.
    pub fn next_state_mean(&self, s: &[f64], a: &[f64]) -> Vec<f64> {
        match self.kind {
            EnvKind::TrigBandit | EnvKind::Constant { .. } => s.to_vec(),
            EnvKind::SmoothChain { drift, noise_scale } => {
                let centre = s[0] + drift * (PI * a[0]).sin();
                if noise_scale == 0.0 {
                    return vec![wrap_coord(centre)];
                }
                let n = 200_000;
                let h = 2.0 / n as f64;
                let mean = (0..n)
                    .map(|i| {
                        let w = -1.0 + (i as f64 + 0.5) * h;
                        0.5 * (1.0 + (PI * w).cos()) * wrap_coord(centre + noise_scale * w)
                    })
                    .sum::<f64>()
                    * h;
                vec![mean]
            }
        }
    }
}

impl GenerativeModel for MdpSpec {
    fn name(&self) -> &str {
        &self.name
    }

    fn d_state(&self) -> usize {
        self.d_state
    }

    fn d_action(&self) -> usize {
        self.d_action
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn reward(&self, s: &[f64], a: &[f64], _h: usize) -> f64 {
        match self.kind {
            EnvKind::TrigBandit => 0.5 * (1.0 + (PI * a[0]).sin()),
            EnvKind::SmoothChain { .. } => 0.25 * (2.0 + (PI * s[0]).cos() + (PI * a[0]).sin()),
            EnvKind::Constant { c } => c,
        }
    }

    fn sample(&self, s: &[f64], a: &[f64], h: usize, mut rng: &mut dyn RngCore) -> Transition {
        let reward = self.reward(s, a, h);
        let next_state = match self.kind {
            EnvKind::TrigBandit | EnvKind::Constant { .. } => s.to_vec(),
            EnvKind::SmoothChain { drift, noise_scale } => {
                let w = if noise_scale > 0.0 { raised_cosine(&mut rng) } else { 0.0 };
                vec![wrap_coord(s[0] + drift * (PI * a[0]).sin() + noise_scale * w)]
            }
        };
        Transition { next_state, reward }
    }

    fn lipschitz(&self, h: usize) -> Option<Lipschitz> {
        let remaining = (self.horizon + 1 - h.min(self.horizon)) as f64;
        Some(match self.kind {
            EnvKind::TrigBandit => Lipschitz { state: 0.0, action: PI / 2.0 },
            EnvKind::Constant { .. } => Lipschitz { state: 0.0, action: 0.0 },
            // |dR/ds|, |dR/da| <= pi/4; V_{h+1} has state constant (H - h) pi / 4
            // and the drift moves s' by at most drift * pi per unit of a.
            EnvKind::SmoothChain { drift, .. } => {
                let next = (remaining - 1.0) * PI / 4.0;
                Lipschitz { state: PI / 4.0 + next, action: PI / 4.0 + next * drift.abs() * PI }
            }
        })
    }
}

/// Wraps a model and adds Gaussian noise of standard deviation `sigma` to
/// sampled rewards. Mean rewards are unchanged.
#[derive(Debug, Clone)]
pub struct NoisyReward<M> {
    pub inner: M,
    pub sigma: f64,
}

impl<M: GenerativeModel> GenerativeModel for NoisyReward<M> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn d_state(&self) -> usize {
        self.inner.d_state()
    }

    fn d_action(&self) -> usize {
        self.inner.d_action()
    }

    fn horizon(&self) -> usize {
        self.inner.horizon()
    }

    fn reward(&self, s: &[f64], a: &[f64], h: usize) -> f64 {
        self.inner.reward(s, a, h)
    }

    fn sample(&self, s: &[f64], a: &[f64], h: usize, rng: &mut dyn RngCore) -> Transition {
        let mut t = self.inner.sample(s, a, h, rng);
        if self.sigma > 0.0 {
            let normal = Normal::new(0.0, self.sigma).expect("finite sigma");
            t.reward += normal.sample(rng);
        }
        t
    }

    fn start_state(&self) -> Vec<f64> {
        self.inner.start_state()
    }

    fn lipschitz(&self, h: usize) -> Option<Lipschitz> {
        self.inner.lipschitz(h)
    }
}

/// Per-stage query counters.
#[derive(Debug)]
pub struct QueryLedger {
    stages: Vec<AtomicU64>,
}

impl QueryLedger {
    pub fn new(horizon: usize) -> Self {
        Self { stages: (0..horizon).map(|_| AtomicU64::new(0)).collect() }
    }

    fn record(&self, h: usize) {
        self.stages[h - 1].fetch_add(1, Ordering::Relaxed);
    }

    pub fn stage(&self, h: usize) -> u64 {
        self.stages[h - 1].load(Ordering::Relaxed)
    }

    pub fn per_stage(&self) -> Vec<u64> {
        self.stages.iter().map(|c| c.load(Ordering::Relaxed)).collect()
    }

    pub fn total(&self) -> u64 {
        self.per_stage().iter().sum()
    }
}

fn check_point(what: &'static str, x: &[f64], expected: usize) -> Result<()> {
    if x.len() != expected {
        return Err(EnvError::Dimension { what, expected, got: x.len() });
    }
    for (coord, &value) in x.iter().enumerate() {
        if !(value.is_finite() && value.abs() <= 1.0 + DOMAIN_TOL) {
            return Err(EnvError::Domain { what, coord, value });
        }
    }
    Ok(())
}

/// A model plus a query ledger; every accepted query is counted.
pub struct Simulator<'a> {
    model: &'a dyn GenerativeModel,
    ledger: QueryLedger,
}

impl<'a> Simulator<'a> {
    pub fn new(model: &'a dyn GenerativeModel) -> Self {
        Self { model, ledger: QueryLedger::new(model.horizon()) }
    }

    pub fn model(&self) -> &dyn GenerativeModel {
        self.model
    }

    pub fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }

    pub fn query(&self, s: &[f64], a: &[f64], h: usize, rng: &mut dyn RngCore) -> Result<Transition> {
        let horizon = self.model.horizon();
        if h == 0 || h > horizon {
            return Err(EnvError::Stage { h, horizon });
        }
        check_point("state", s, self.model.d_state())?;
        check_point("action", a, self.model.d_action())?;
        let t = self.model.sample(s, a, h, rng);
        self.ledger.record(h);
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RolloutEstimate {
    pub mean_return: f64,
    pub std_error: f64,
    pub n_episodes: usize,
}

/// Monte-Carlo estimate of `V_1^pi(start)`. Episode `e` draws from the stream
/// `(seed, Rollout, 0, e)`, so the result does not depend on thread count.
/// Actions are clamped to the cube.
pub fn rollout_value<P>(
    model: &dyn GenerativeModel,
    policy: &P,
    start: &[f64],
    n_episodes: usize,
    seed: u64,
) -> RolloutEstimate
where
    P: Fn(&[f64], usize) -> Vec<f64> + Sync + ?Sized,
{
    let returns: Vec<f64> = (0..n_episodes as u64)
        .into_par_iter()
        .map(|e| {
            let mut rng = stream(seed, Purpose::Rollout, 0, e);
            let mut s = start.to_vec();
            let mut total = 0.0;
            for h in 1..=model.horizon() {
                let a: Vec<f64> = policy(&s, h).into_iter().map(|x| x.clamp(-1.0, 1.0)).collect();
                let t = model.sample(&s, &a, h, &mut rng);
                total += t.reward;
                s = t.next_state;
            }
            total
        })
        .collect();
    let n = returns.len().max(1) as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let var = if returns.len() > 1 { returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    RolloutEstimate { mean_return: mean, std_error: (var / n).sqrt(), n_episodes }
}

/// Evaluation starts: `-1 + 0.1 i` for `i = 0..=20` on the diagonal of the
/// state cube.
pub fn start_grid(d_state: usize) -> Vec<Vec<f64>> {
    (0..=20).map(|i| vec![-1.0 + 0.1 * i as f64; d_state]).collect()
}

/// Seed for rollouts from the `i`-th start of [`start_grid`].
pub fn start_seed(seed: u64, i: usize) -> u64 {
    splitmix64(seed ^ splitmix64(0x5354_4152_5400 + i as u64))
}

/// Backward value iteration on a periodic grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleResult {
    pub grid_m: usize,
    pub mc_per_cell: usize,
    pub d_state: usize,
    pub d_action: usize,
    pub horizon: usize,
    /// `values[h - 1]` is `V*_h` on the state grid, row-major.
    pub values: Vec<Vec<f64>>,
    /// `policy[h - 1]` holds action-grid indices, row-major.
    pub policy: Vec<Vec<usize>>,
    /// Largest Monte-Carlo standard error of a chosen Q value, per stage.
    pub max_std_error: Vec<f64>,
    /// Bound on `|V_oracle - V*|` at any start point, if the model reports
    /// Lipschitz constants.
    pub error_budget: Option<f64>,
}

#[derive(Serialize)]
struct OracleFile<'a> {
    grid_m: usize,
    mc_per_cell: usize,
    d_state: usize,
    d_action: usize,
    horizon: usize,
    values: BTreeMap<String, &'a [f64]>,
    policy: BTreeMap<String, Vec<Vec<f64>>>,
    error_budget: Option<f64>,
}

fn grid_node(m: usize, j: usize) -> f64 {
    -1.0 + 2.0 * j as f64 / m as f64
}

fn unflatten(mut flat: usize, m: usize, d: usize) -> Vec<usize> {
    let mut idx = vec![0; d];
    for ax in (0..d).rev() {
        idx[ax] = flat % m;
        flat /= m;
    }
    idx
}

/// Nearest periodic grid node of a point; exact midpoints go to the lower node.
fn nearest_flat(x: &[f64], m: usize) -> usize {
    x.iter().fold(0, |acc, &v| {
        let t = (wrap_coord(v) + 1.0) * m as f64 / 2.0;
        let j = ((t - 0.5).ceil().max(0.0) as usize) % m;
        acc * m + j
    })
}

impl OracleResult {
    pub fn state_node(&self, flat: usize) -> Vec<f64> {
        unflatten(flat, self.grid_m, self.d_state).into_iter().map(|j| grid_node(self.grid_m, j)).collect()
    }

    pub fn action_node(&self, flat: usize) -> Vec<f64> {
        unflatten(flat, self.grid_m, self.d_action).into_iter().map(|j| grid_node(self.grid_m, j)).collect()
    }

    /// `V*_h(s)` by nearest-node lookup.
    pub fn value_at(&self, h: usize, s: &[f64]) -> f64 {
        self.values[h - 1][nearest_flat(s, self.grid_m)]
    }

    /// Oracle greedy action at the node nearest to `s`.
    pub fn action_at(&self, h: usize, s: &[f64]) -> Vec<f64> {
        self.action_node(self.policy[h - 1][nearest_flat(s, self.grid_m)])
    }

    pub fn to_json(&self) -> String {
        let values = self.values.iter().enumerate().map(|(h, v)| ((h + 1).to_string(), v.as_slice())).collect();
        let policy = self
            .policy
            .iter()
            .enumerate()
            .map(|(h, p)| ((h + 1).to_string(), p.iter().map(|&j| self.action_node(j)).collect()))
            .collect();
        let file = OracleFile {
            grid_m: self.grid_m,
            mc_per_cell: self.mc_per_cell,
            d_state: self.d_state,
            d_action: self.d_action,
            horizon: self.horizon,
            values,
            policy,
            error_budget: self.error_budget,
        };
        serde_json::to_string(&file).expect("oracle serializes")
    }
}

/// Grid dynamic programming with `grid_m` periodic nodes per axis.
///
/// Expectations use `mc_per_cell` transition draws per (state node, stage);
/// every action at a state node reuses the same random stream, so action
/// comparisons see common random numbers. Next-state values come from the
/// nearest node. The error budget is
/// `sum_h (L^s_{h+1} d_S + L^a_h d_A) / grid_m + 3 max_se_h`, plus
/// `L^s_1 d_S / grid_m` for the lookup at the start state.
pub fn grid_dp_oracle(
    model: &dyn GenerativeModel,
    grid_m: usize,
    mc_per_cell: usize,
    seed: u64,
) -> Result<OracleResult> {
    let (ds, da, horizon) = (model.d_state(), model.d_action(), model.horizon());
    if ds + da > 3 {
        return Err(EnvError::OracleScale(format!("d_S + d_A = {} exceeds 3", ds + da)));
    }
    if grid_m < 2 || mc_per_cell == 0 {
        return Err(EnvError::OracleScale("need grid_m >= 2 and mc_per_cell >= 1".into()));
    }
    let n_states = (grid_m as u128).pow(ds as u32);
    let n_actions = (grid_m as u128).pow(da as u32);
    if n_states * n_actions > ORACLE_CELL_CAP {
        return Err(EnvError::OracleScale(format!(
            "{} cells exceed the cap of {ORACLE_CELL_CAP}",
            n_states * n_actions
        )));
    }
    let (n_states, n_actions) = (n_states as usize, n_actions as usize);
    let node = |flat: usize, d: usize| -> Vec<f64> {
        unflatten(flat, grid_m, d).into_iter().map(|j| grid_node(grid_m, j)).collect()
    };
    let actions: Vec<Vec<f64>> = (0..n_actions).map(|j| node(j, da)).collect();

    let mut values: Vec<Vec<f64>> = vec![Vec::new(); horizon];
    let mut policy: Vec<Vec<usize>> = vec![Vec::new(); horizon];
    let mut max_se = vec![0.0; horizon];
    let mut next_values = vec![0.0; n_states];
    for h in (1..=horizon).rev() {
        let rows: Vec<(f64, usize, f64)> = (0..n_states)
            .into_par_iter()
            .map(|i| {
                let s = node(i, ds);
                let base = stream(seed, Purpose::Oracle, h as u64, i as u64);
                let mut best = (f64::NEG_INFINITY, 0, 0.0);
                let mut draws = vec![0.0; mc_per_cell];
                for (j, a) in actions.iter().enumerate() {
                    let mut rng = base.clone();
                    for d in draws.iter_mut() {
                        let t = model.sample(&s, a, h, &mut rng);
                        let v = if h < horizon { next_values[nearest_flat(&t.next_state, grid_m)] } else { 0.0 };
                        *d = t.reward + v;
                    }
                    let mean = draws.iter().sum::<f64>() / mc_per_cell as f64;
                    if mean > best.0 {
                        let se = if mc_per_cell > 1 {
                            let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (mc_per_cell - 1) as f64;
                            (var / mc_per_cell as f64).sqrt()
                        } else {
                            0.0
                        };
                        best = (mean, j, se);
                    }
                }
                best
            })
            .collect();
        values[h - 1] = rows.iter().map(|r| r.0).collect();
        policy[h - 1] = rows.iter().map(|r| r.1).collect();
        max_se[h - 1] = rows.iter().map(|r| r.2).fold(0.0, f64::max);
        next_values = values[h - 1].clone();
    }

    let spacing = 2.0 / grid_m as f64;
    let error_budget = (1..=horizon)
        .map(|h| {
            let here = model.lipschitz(h)?;
            let next_state = if h < horizon { model.lipschitz(h + 1)?.state } else { 0.0 };
            Some(0.5 * spacing * (next_state * ds as f64 + here.action * da as f64) + 3.0 * max_se[h - 1])
        })
        .sum::<Option<f64>>()
        .and_then(|b| Some(b + 0.5 * spacing * model.lipschitz(1)?.state * ds as f64));

    Ok(OracleResult {
        grid_m,
        mc_per_cell,
        d_state: ds,
        d_action: da,
        horizon,
        values,
        policy,
        max_std_error: max_se,
        error_budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bandit_rewards() {
        let env = make_trig_bandit();
        assert!((env.reward(&[0.3], &[0.5], 1) - 1.0).abs() < 1e-15);
        assert!(env.reward(&[0.3], &[-0.5], 1).abs() < 1e-15);
        let sim = Simulator::new(&env);
        let mut rng = stream(0, Purpose::Custom(0), 0, 0);
        assert!((sim.query(&[0.0], &[0.5], 1, &mut rng).unwrap().reward - 1.0).abs() < 1e-15);
    }

    #[test]
    fn simulator_validates_and_counts() {
        let env = make_smooth_chain(3, CHAIN_DRIFT, CHAIN_NOISE_SCALE).unwrap();
        let sim = Simulator::new(&env);
        let mut rng = stream(0, Purpose::Custom(0), 0, 0);
        for i in 0..30 {
            sim.query(&[0.1], &[0.2], 1 + i % 3, &mut rng).unwrap();
        }
        assert_eq!(sim.ledger().total(), 30);
        assert_eq!(sim.ledger().per_stage(), vec![10, 10, 10]);
        assert_eq!(sim.query(&[0.1], &[0.2], 4, &mut rng), Err(EnvError::Stage { h: 4, horizon: 3 }));
        assert_eq!(sim.query(&[0.1], &[0.2], 0, &mut rng), Err(EnvError::Stage { h: 0, horizon: 3 }));
        assert!(matches!(sim.query(&[1.5], &[0.2], 1, &mut rng), Err(EnvError::Domain { what: "state", .. })));
        assert!(matches!(sim.query(&[0.1], &[0.2, 0.1], 1, &mut rng), Err(EnvError::Dimension { .. })));
        assert_eq!(sim.ledger().total(), 30);
    }

    #[test]
    fn chain_next_state_mean() {
        let env = make_smooth_chain(3, CHAIN_DRIFT, CHAIN_NOISE_SCALE).unwrap();
        let mut rng = stream(3, Purpose::Custom(1), 0, 0);
        for (s, a) in [(0.0, 0.5), (0.8, 0.9), (-0.9, -0.5)] {
            let draws: Vec<f64> = (0..10_000).map(|_| env.sample(&[s], &[a], 1, &mut rng).next_state[0]).collect();
            let mean = draws.iter().sum::<f64>() / 1e4;
            let sd = (draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 9999.0).sqrt();
            let want = env.next_state_mean(&[s], &[a])[0];
            assert!((mean - want).abs() < 3.0 * sd / 100.0, "({s},{a}): {mean} vs {want}");
        }
        assert!((env.next_state_mean(&[0.0], &[0.5])[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn rollout_of_constant_env() {
        let env = make_constant(0.3, 4).unwrap();
        let est = rollout_value(&env, &|_: &[f64], _| vec![0.0], &[0.0], 50, 1);
        assert!((est.mean_return - 1.2).abs() < 1e-12);
        let bandit = make_trig_bandit();
        let est = rollout_value(&bandit, &|_: &[f64], _| vec![0.5], &[0.0], 20, 1);
        assert!((est.mean_return - 1.0).abs() < 1e-15 && est.std_error == 0.0);
    }

    #[test]
    fn oracle_on_bandit() {
        let env = make_trig_bandit();
        let o = grid_dp_oracle(&env, 401, 1, 0).unwrap();
        assert!((o.value_at(1, &[0.2]) - 1.0).abs() < 1e-4);
        assert!((o.action_at(1, &[0.2])[0] - 0.5).abs() < 0.01);
        let v: serde_json::Value = serde_json::from_str(&o.to_json()).unwrap();
        assert_eq!(v["values"]["1"].as_array().unwrap().len(), 401);
    }

    #[test]
    fn oracle_deterministic_chain_repeats() {
        let env = make_smooth_chain(2, CHAIN_DRIFT, 0.0).unwrap();
        let a = grid_dp_oracle(&env, 60, 1, 1).unwrap();
        let b = grid_dp_oracle(&env, 60, 1, 2).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.max_std_error, vec![0.0, 0.0]);
    }

    #[test]
    fn oracle_scale_cap() {
        let env = make_trig_bandit();
        assert!(matches!(grid_dp_oracle(&env, 10_000, 1, 0), Err(EnvError::OracleScale(_))));
    }

    #[test]
    fn nearest_node_tie_break() {
        // midpoint between nodes 0 (-1.0) and 1 (-0.5) with m = 4
        assert_eq!(nearest_flat(&[-0.75], 4), 0);
        assert_eq!(nearest_flat(&[-0.7], 4), 1);
        assert_eq!(nearest_flat(&[0.9], 4), 0);
    }

    #[test]
    fn env_lookup() {
        assert_eq!(env_by_name("trig_bandit", None, &serde_json::Value::Null).unwrap(), make_trig_bandit());
        assert!(matches!(env_by_name("nope", None, &serde_json::Value::Null), Err(EnvError::Unknown(_))));
        let chain = env_by_name("smooth_chain", Some(4), &serde_json::json!({"noise_scale": 0.0})).unwrap();
        assert_eq!(chain.kind, EnvKind::SmoothChain { drift: CHAIN_DRIFT, noise_scale: 0.0 });
        assert!(env_by_name("smooth_chain", None, &serde_json::json!({"bogus": 1})).is_err());
    }

    #[test]
    fn noisy_wrapper_keeps_mean() {
        let env = NoisyReward { inner: make_trig_bandit(), sigma: 0.1 };
        let mut rng = stream(4, Purpose::Custom(2), 0, 0);
        let mean = (0..10_000).map(|_| env.sample(&[0.0], &[0.5], 1, &mut rng).reward).sum::<f64>() / 1e4;
        assert!((mean - 1.0).abs() < 3.0 * 0.1 / 100.0);
    }

    proptest! {
        #[test]
        fn rewards_and_states_in_range(s in -1.0f64..=1.0, a in -1.0f64..=1.0, seed in 0u64..1000) {
            let mut rng = stream(seed, Purpose::Custom(9), 0, 0);
            for env in [make_trig_bandit(), make_smooth_chain(3, CHAIN_DRIFT, CHAIN_NOISE_SCALE).unwrap(), make_constant(0.2, 2).unwrap()] {
                let t = env.sample(&[s], &[a], 1, &mut rng);
                prop_assert!((0.0..=1.0).contains(&t.reward));
                prop_assert!(t.next_state.iter().all(|x| (-1.0..=1.0).contains(x)));
            }
        }
    }
}
