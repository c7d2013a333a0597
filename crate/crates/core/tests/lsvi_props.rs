use std::f64::consts::PI;

use rand::Rng;
use smooth_lsvi::env::{
    grid_dp_oracle, make_constant, make_smooth_chain, make_trig_bandit, GenerativeModel, Simulator, CHAIN_DRIFT,
    CHAIN_NOISE_SCALE,
};
use smooth_lsvi::harmonics::{wrap_coord, FeatureMap, NormKind};
use smooth_lsvi::kernel_sampler::{quadrature_convolution, KernelTable};
use smooth_lsvi::lsvi::{greedy_policy, target_sample, train, QFunction, TrainConfig};
use smooth_lsvi::rng::{stream, Purpose};
use smooth_lsvi::validation::{regression_coverage_study, start_grid_gap};

fn chain() -> smooth_lsvi::env::MdpSpec {
    make_smooth_chain(3, CHAIN_DRIFT, CHAIN_NOISE_SCALE).unwrap()
}

/// Midpoint nodes and weights of the chain's transition noise density.
fn noise_rule(m: usize) -> Vec<(f64, f64)> {
    let h = 2.0 / m as f64;
    (0..m)
        .map(|i| {
            let w = -1.0 + (i as f64 + 0.5) * h;
            (w, 0.5 * (1.0 + (PI * w).cos()) * h)
        })
        .collect()
}

/// `R(s, a) + E[f(s')]` for the chain, by quadrature over the noise.
fn chain_bellman<F: Fn(f64) -> f64>(s: f64, a: f64, next: &F, rule: &[(f64, f64)]) -> f64 {
    let model = chain();
    let centre = s + CHAIN_DRIFT * (PI * a).sin();
    model.reward(&[s], &[a], 1)
        + rule.iter().map(|(w, wt)| wt * next(wrap_coord(centre + CHAIN_NOISE_SCALE * w))).sum::<f64>()
}

#[test]
fn target_mean_is_projected_bellman_image() {
    let model = chain();
    let config = TrainConfig { degree: 4, n_tot: 1000, seed: 2, ..TrainConfig::default() };
    let next = train(&model, &config).unwrap().estimate.q_function(2).unwrap();
    let table = KernelTable::with_default_points(4).unwrap();
    let sim = Simulator::new(&model);
    let rule = noise_rule(64);
    let v = |s: f64| next.value(&[s]);
    let mut zrng = stream(8, Purpose::Custom(5), 0, 0);
    for k in 0..10u64 {
        let z = [zrng.random_range(-1.0..1.0), zrng.random_range(-1.0..1.0)];
        let exact = quadrature_convolution(|x| chain_bellman(x[0], x[1], &v, &rule), &z, 4, 64).unwrap();
        let n = 20_000;
        let ys: Vec<f64> = (0..n)
            .map(|i| {
                let mut rng = stream(8, Purpose::Custom(6), k, i);
                target_sample(&sim, Some(&next), &table, &z, 1, &mut rng).unwrap()
            })
            .collect();
        let mean = ys.iter().sum::<f64>() / n as f64;
        let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - exact).abs() <= 3.0 * se, "z={z:?}: {mean} vs {exact} (se {se})");
    }
}

#[test]
fn stages_do_not_share_data() {
    let model = chain();
    let base = TrainConfig { degree: 2, n_tot: 500, seed: 4, ..TrainConfig::default() };
    let a = train(&model, &base).unwrap().estimate;
    let mut cfg = base.clone();
    cfg.stage_seeds.insert(1, 99);
    let b = train(&model, &cfg).unwrap().estimate;
    assert_ne!(a.theta(1), b.theta(1));
    assert_eq!(a.theta(2), b.theta(2));
    assert_eq!(a.theta(3), b.theta(3));
    let mut cfg = base.clone();
    cfg.stage_seeds.insert(2, 99);
    let c = train(&model, &cfg).unwrap().estimate;
    assert_ne!(a.theta(2), c.theta(2));
    assert_eq!(a.theta(3), c.theta(3));
}

#[test]
fn noiseless_targets_recovered_exactly() {
    let (c, horizon) = (0.3, 3);
    let model = make_constant(c, horizon).unwrap();
    let config = TrainConfig { degree: 2, n_tot: 300, ..TrainConfig::default() };
    let est = train(&model, &config).unwrap().estimate;
    let fm = FeatureMap::orthonormal(2, 2, NormKind::Linf).unwrap();
    let zero = fm.index_set().position(&[0, 0]).unwrap();
    for h in 1..=horizon {
        let theta = est.theta(h);
        for (j, t) in theta.iter().enumerate() {
            let want = if j == zero { (horizon + 1 - h) as f64 * c * 2.0 } else { 0.0 };
            assert!((t - want).abs() <= 1e-8, "h={h} j={j}: {t} vs {want}");
        }
    }
}

#[test]
fn ledger_matches_sample_formula() {
    for (model, n_tot) in [(Box::new(chain()) as Box<dyn GenerativeModel>, 700u64), (Box::new(make_trig_bandit()), 333)]
    {
        let out = train(model.as_ref(), &TrainConfig { n_tot, ..TrainConfig::default() }).unwrap();
        let size = out.dataset.size();
        let support = out.design.support_size() as u64;
        assert!(size >= n_tot && size <= n_tot + support);
        assert_eq!(out.ledger_total(), 2 * size * model.horizon() as u64);
        assert!(out.ledger_per_stage.iter().all(|&q| q == 2 * size));
        assert_eq!(out.estimate.total_queries(), out.ledger_total());
    }
}

#[test]
fn value_gap_within_summed_q_errors() {
    let model = chain();
    let oracle = grid_dp_oracle(&model, 200, 200, 7).unwrap();
    let config = TrainConfig { degree: 4, n_tot: 10_000, seed: 0, ..TrainConfig::default() };
    let est = train(&model, &config).unwrap().estimate;
    let policy = greedy_policy(&est).unwrap();
    let gap = start_grid_gap(&model, &oracle, &policy.as_fn(), 300, 0);

    let rule = noise_rule(64);
    let audit: Vec<f64> = (0..=40).map(|i| -1.0 + 0.05 * i as f64).collect();
    let mut q_err_sum = 0.0;
    for h in 1..=model.horizon() {
        let q: QFunction = est.q_function(h).unwrap();
        let v_next = |s: f64| if h == model.horizon() { 0.0 } else { oracle.value_at(h + 1, &[s]) };
        let sup = audit
            .iter()
            .flat_map(|&s| audit.iter().map(move |&a| (s, a)))
            .map(|(s, a)| (q.q(&[s], &[a]) - chain_bellman(s, a, &v_next, &rule)).abs())
            .fold(0.0, f64::max);
        q_err_sum += sup;
    }
    let budget = oracle.error_budget.unwrap() + 3.0 * gap.max_std_error;
    assert!(gap.max_gap <= q_err_sum + budget, "gap {} > {} + {}", gap.max_gap, q_err_sum, budget);
}

#[test]
fn width_shrinks_with_sample_size() {
    let model = make_trig_bandit();
    let width = |n_tot| {
        let est = train(&model, &TrainConfig { n_tot, ..TrainConfig::default() }).unwrap().estimate;
        (est.stages[0].diagnostics.max_confidence_width, est.design.dataset_size as f64)
    };
    let (w1, n1) = width(2000);
    let (w2, n2) = width(4000);
    assert!(n2 > n1);
    let ratio = w2 / w1;
    assert!((ratio / std::f64::consts::FRAC_1_SQRT_2 - 1.0).abs() <= 0.05, "ratio {ratio}");
}

#[test]
fn finite_cover_bound_holds() {
    let fm = FeatureMap::orthonormal(2, 2, NormKind::Linf).unwrap();
    let study = regression_coverage_study(fm, 0.1, 400, 1.0, 0.1, 200, 12).unwrap();
    assert!(study.violation_rate() <= 0.15, "{study:?}");
}
