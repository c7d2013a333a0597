//! Numerical checks of the kernel machinery, shared by the test suites and
//! the `kernel-check` command. Every function returns the measured quantity;
//! thresholds are left to the caller.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::design::{frank_wolfe_design, round_counts, DesignProblem, FwOptions};
use crate::env::{rollout_value, start_grid, start_seed, GenerativeModel, OracleResult};
use crate::harmonics::{
    circular_convolve, dirichlet_l1_norm, fourier_coefficient_from_samples, kernel_l1_norm, CosineKernel, FeatureMap,
    HarmonicsError, NormKind, Quadrature,
};
use crate::kernel_sampler::{convolution_estimate, quadrature_convolution, KernelTable, Part, SamplerError};
use crate::lsvi::{confidence_width_from_gram, solve_stage, LsviError};
use crate::rng::{stream, Purpose};

/// Points per axis of the evaluation grid for sup-norm errors.
pub const EVAL_POINTS: usize = 201;

/// Quadrature points per axis used for convolutions in dimension `d`.
pub fn default_quadrature_points(d: usize) -> usize {
    if d == 1 {
        512
    } else {
        128
    }
}

/// `sum_n c_n e_n` over an orthonormal LINF index set.
#[derive(Debug, Clone)]
pub struct TrigPoly {
    fm: FeatureMap,
    coeffs: Vec<f64>,
}

impl TrigPoly {
    /// Coefficients uniform in `[-1, 1]`.
    pub fn random<R: Rng + ?Sized>(d: usize, degree: usize, rng: &mut R) -> Result<Self, HarmonicsError> {
        let fm = FeatureMap::orthonormal(d, degree, NormKind::Linf)?;
        let coeffs = (0..fm.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        Ok(Self { fm, coeffs })
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        self.fm.dot(&self.coeffs, z).expect("point in the cube")
    }

    /// Upper bound on `sup |t|`.
    pub fn abs_bound(&self) -> f64 {
        self.coeffs.iter().zip(self.fm.scale()).map(|(c, s)| c.abs() * s).sum()
    }
}

fn eval_axis() -> Vec<f64> {
    (0..EVAL_POINTS).map(|i| -1.0 + 2.0 * i as f64 / (EVAL_POINTS - 1) as f64).collect()
}

fn tensor_points(axis: &[f64], d: usize) -> Vec<Vec<f64>> {
    let m = axis.len();
    (0..m.pow(d as u32))
        .map(|mut flat| {
            let mut z = vec![0.0; d];
            for ax in (0..d).rev() {
                z[ax] = axis[flat % m];
                flat /= m;
            }
            z
        })
        .collect()
}

/// Largest `sup |D_N * t - t|` on the evaluation grid over `trials` random
/// trigonometric polynomials of per-coordinate degree `N / 2`.
pub fn reproduction_error(d: usize, degree: usize, trials: usize, seed: u64) -> Result<f64, HarmonicsError> {
    let kernel = CosineKernel::vallee_poussin(degree)?;
    let quad = Quadrature::new(d, default_quadrature_points(d))?;
    let axis = eval_axis();
    let axes: Vec<&[f64]> = vec![&axis; d];
    let points = tensor_points(&axis, d);
    let mut worst: f64 = 0.0;
    for trial in 0..trials {
        let mut rng = stream(seed, Purpose::Custom(0x7265_7072), d as u64, trial as u64);
        let t = TrigPoly::random(d, degree / 2, &mut rng)?;
        let k = kernel.clone();
        let conv = circular_convolve(|z| t.eval(z), move |x| k.value(x), &quad);
        let values = conv.eval_grid(&axes);
        for (v, z) in values.iter().zip(&points) {
            worst = worst.max((v - t.eval(z)).abs());
        }
    }
    Ok(worst)
}

/// A random smooth periodic function `prod_i exp(a_i sin(pi z_i + b_i))`.
pub fn random_smooth<R: Rng + ?Sized>(d: usize, rng: &mut R) -> impl Fn(&[f64]) -> f64 + Clone {
    let params: Vec<(f64, f64)> =
        (0..d).map(|_| (rng.random_range(0.5..1.5), rng.random_range(0.0..2.0 * PI))).collect();
    move |z: &[f64]| z.iter().zip(&params).map(|(x, (a, b))| (a * (PI * x + b).sin()).exp()).product()
}

/// Largest Fourier coefficient of `D_N * f` with some `|n_i| > N`, over
/// `trials` random smooth `f` and all `n` with `max |n_i| <= n_max`.
pub fn projection_leak(d: usize, degree: usize, n_max: usize, trials: usize, seed: u64) -> Result<f64, HarmonicsError> {
    let kernel = CosineKernel::vallee_poussin(degree)?;
    let quad = Quadrature::new(d, default_quadrature_points(d))?;
    let nodes = quad.axis_nodes().to_vec();
    let axes: Vec<&[f64]> = vec![&nodes; d];
    let outside: Vec<Vec<i32>> = crate::harmonics::MultiIndexSet::new(d, n_max, NormKind::Linf)?
        .indices()
        .iter()
        .filter(|n| n.iter().any(|v| v.unsigned_abs() as usize > degree))
        .cloned()
        .collect();
    let mut worst: f64 = 0.0;
    for trial in 0..trials {
        let mut rng = stream(seed, Purpose::Custom(0x7072_6f6a), d as u64, trial as u64);
        let f = random_smooth(d, &mut rng);
        let k = kernel.clone();
        let conv = circular_convolve(f, move |x| k.value(x), &quad);
        let samples = conv.eval_grid(&axes);
        for n in &outside {
            worst = worst.max(fourier_coefficient_from_samples(&samples, n, &quad)?.abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L1Row {
    #[serde(rename = "N")]
    pub degree: usize,
    pub vallee_poussin: f64,
    pub dirichlet: f64,
}

/// L1 norms of the unit-mass VP and Dirichlet kernels for each degree.
pub fn l1_profile(degrees: &[usize]) -> Result<Vec<L1Row>, HarmonicsError> {
    let quad = Quadrature::new(1, 512)?;
    degrees
        .iter()
        .map(|&n| {
            Ok(L1Row { degree: n, vallee_poussin: kernel_l1_norm(n, &quad)?, dirichlet: dirichlet_l1_norm(n, &quad) })
        })
        .collect()
}

/// `f_nu(z) = sum_{n=1}^{64} n^{-(nu + 2)} cos(n pi z)`.
pub fn smooth_test_function(nu: f64) -> impl Fn(&[f64]) -> f64 + Clone {
    move |z: &[f64]| (1..=64).map(|n| (n as f64).powf(-(nu + 2.0)) * (n as f64 * PI * z[0]).cos()).sum()
}

/// `sup |f_nu - D_N * f_nu|` on the evaluation grid.
pub fn approximation_error(nu: f64, degree: usize) -> Result<f64, HarmonicsError> {
    let kernel = CosineKernel::vallee_poussin(degree)?;
    let quad = Quadrature::new(1, 512)?;
    let f = smooth_test_function(nu);
    let conv = circular_convolve(f.clone(), move |x| kernel.value(x), &quad);
    let axis = eval_axis();
    let values = conv.eval_grid(&[&axis]);
    Ok(values.iter().zip(&axis).map(|(v, &x)| (v - f(&[x])).abs()).fold(0.0, f64::max))
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Near-minimax error of approximating `f` on `[-1, 1]` by trigonometric
/// polynomials of degree `m`, by Lawson's reweighted least squares on a
/// uniform grid of `grid` points. Returns the smallest sup error seen, an
/// upper bound on the true minimax error.
pub fn best_approximation_error<F: Fn(f64) -> f64>(f: F, m: usize, grid: usize, iterations: usize) -> f64 {
    let xs: Vec<f64> = (0..grid).map(|i| -1.0 + 2.0 * i as f64 / (grid - 1) as f64).collect();
    let ys = DVector::from_iterator(grid, xs.iter().map(|&x| f(x)));
    let basis = DMatrix::from_fn(grid, 2 * m + 1, |i, j| match j {
        0 => 1.0,
        j if j % 2 == 1 => (j.div_ceil(2) as f64 * PI * xs[i]).sin(),
        j => ((j / 2) as f64 * PI * xs[i]).cos(),
    });
    let mut w = vec![1.0 / grid as f64; grid];
    let mut best = f64::INFINITY;
    for _ in 0..iterations {
        let sw = DVector::from_iterator(grid, w.iter().map(|v| v.sqrt()));
        let a = DMatrix::from_fn(grid, 2 * m + 1, |i, j| basis[(i, j)] * sw[i]);
        let b = ys.component_mul(&sw);
        let Ok(c) = a.svd(true, true).solve(&b, 1e-14) else { break };
        let resid = &ys - &basis * c;
        let err = resid.amax();
        best = best.min(err);
        let total: f64 = w.iter().zip(resid.iter()).map(|(wi, r)| wi * r.abs()).sum();
        if total <= 0.0 {
            break;
        }
        for (wi, r) in w.iter_mut().zip(resid.iter()) {
            *wi = *wi * r.abs() / total;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnbiasedCase {
    pub d: usize,
    #[serde(rename = "N")]
    pub degree: usize,
    pub z: Vec<f64>,
    pub estimate: f64,
    pub std_error: f64,
    pub exact: f64,
}

impl UnbiasedCase {
    pub fn z_score(&self) -> f64 {
        (self.estimate - self.exact).abs() / self.std_error.max(f64::MIN_POSITIVE)
    }
}

/// Signed-pair estimates of `D_N * f (z)` against quadrature at `instances`
/// random `(d, N, f, z)`. Functions are random trigonometric polynomials of
/// degree `N + 2`, so part of each lies outside the reproduced range; odd
/// instances add uniform noise in `[-0.1, 0.1]` to every sample of `f`.
pub fn unbiasedness_study(instances: usize, n_pairs: usize, seed: u64) -> Result<Vec<UnbiasedCase>, SamplerError> {
    let degrees = [2, 4, 8];
    (0..instances)
        .map(|k| {
            let d = 1 + k % 2;
            let degree = degrees[(k / 2) % degrees.len()];
            let mut rng = stream(seed, Purpose::Custom(0x756e_6269), 0, k as u64);
            let t = TrigPoly::random(d, degree + 2, &mut rng)?;
            let z: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let table = KernelTable::with_default_points(degree)?;
            let exact = quadrature_convolution(|x| t.eval(x), &z, degree, if d == 1 { 256 } else { 64 })?;
            let noise = if k % 2 == 1 { 0.1 } else { 0.0 };
            let est = convolution_estimate(
                |x, r| t.eval(x) + if noise > 0.0 { r.random_range(-noise..noise) } else { 0.0 },
                &z,
                &table,
                n_pairs,
                &mut rng,
            );
            Ok(UnbiasedCase { d, degree, z, estimate: est.mean, std_error: est.std_error, exact })
        })
        .collect()
}

/// Kolmogorov-Smirnov distance between `n` draws from a part of the table
/// and the tabulated CDF of that part.
pub fn ks_distance(table: &KernelTable, part: Part, n: usize, seed: u64) -> Result<f64, SamplerError> {
    let mut rng = stream(seed, Purpose::Custom(0x6b73), 0, part as u64);
    let mut draws = (0..n).map(|_| table.sample_part(part, &mut rng)).collect::<Result<Vec<_>, _>>()?;
    draws.sort_by(f64::total_cmp);
    let nf = n as f64;
    Ok(draws
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = table.part_cdf(part, x);
            (c - i as f64 / nf).abs().max((c - (i + 1) as f64 / nf).abs())
        })
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartGap {
    pub start: Vec<f64>,
    pub oracle: f64,
    pub rollout: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub starts: Vec<StartGap>,
    /// `max_s (V*_1(s) - V^pi_1(s))` over the start grid.
    pub max_gap: f64,
    pub max_std_error: f64,
}

/// Oracle value against rollouts of `policy` at every start of the
/// evaluation grid.
pub fn start_grid_gap<P>(
    model: &dyn GenerativeModel,
    oracle: &OracleResult,
    policy: &P,
    n_episodes: usize,
    seed: u64,
) -> GapReport
where
    P: Fn(&[f64], usize) -> Vec<f64> + Sync + ?Sized,
{
    let starts: Vec<StartGap> = start_grid(model.d_state())
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let r = rollout_value(model, policy, &s, n_episodes, start_seed(seed, i));
            StartGap { oracle: oracle.value_at(1, &s), rollout: r.mean_return, std_error: r.std_error, start: s }
        })
        .collect();
    let max_gap = starts.iter().map(|g| g.oracle - g.rollout).fold(f64::NEG_INFINITY, f64::max);
    let max_std_error = starts.iter().map(|g| g.std_error).fold(0.0, f64::max);
    GapReport { starts, max_gap, max_std_error }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageStudy {
    pub trials: usize,
    pub violations: usize,
    pub n_rows: usize,
    pub cover_size: usize,
    /// Largest ratio `|x^T (theta_hat - theta*)| / width(x)` seen.
    pub worst_ratio: f64,
}

impl CoverageStudy {
    pub fn violation_rate(&self) -> f64 {
        self.violations as f64 / self.trials as f64
    }
}

/// Synthetic regressions `y = x^T theta* + e` on the rounded optimal design
/// for `features`, with `e` uniform on `[-sigma, sigma]`. A trial violates
/// the finite-cover bound when some cover point has error above its width.
pub fn regression_coverage_study(
    features: FeatureMap,
    eps_prime: f64,
    n_tot: u64,
    sigma: f64,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<CoverageStudy, LsviError> {
    let problem = DesignProblem::on_grid(features, eps_prime)?;
    let design = frank_wolfe_design(&problem, &FwOptions::default())?;
    let counts = round_counts(&design, n_tot);
    let x = problem.features();
    let p = problem.dim();
    let rows: Vec<Vec<f64>> = design
        .support
        .iter()
        .zip(&counts)
        .flat_map(|(&i, &c)| std::iter::repeat_n(x.row(i).iter().copied().collect::<Vec<f64>>(), c as usize))
        .collect();
    let mut gram = DMatrix::zeros(p, p);
    for r in &rows {
        let v = DVector::from_column_slice(r);
        gram.ger(1.0, &v, &v, 1.0);
    }
    let k = problem.len();
    let widths: Vec<f64> = (0..k)
        .map(|j| {
            let xj: Vec<f64> = x.row(j).iter().copied().collect();
            confidence_width_from_gram(&gram, rows.len(), &xj, sigma, delta, k).map(|w| w.finite_cover)
        })
        .collect::<Result<_, _>>()?;
    let mut violations = 0;
    let mut worst_ratio: f64 = 0.0;
    for trial in 0..trials {
        let mut rng = stream(seed, Purpose::Custom(0x636f_7665), 0, trial as u64);
        let theta: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
        let samples: Vec<(Vec<f64>, f64)> = rows
            .iter()
            .map(|r| {
                let mean: f64 = r.iter().zip(&theta).map(|(a, b)| a * b).sum();
                (r.clone(), mean + rng.random_range(-sigma..sigma))
            })
            .collect();
        let fit = solve_stage(&samples, 0.0)?;
        let mut violated = false;
        for (j, w) in widths.iter().enumerate() {
            let err: f64 = x.row(j).iter().zip(fit.iter().zip(&theta)).map(|(a, (f, t))| a * (f - t)).sum();
            worst_ratio = worst_ratio.max(err.abs() / w);
            violated |= err.abs() > *w;
        }
        violations += violated as usize;
    }
    Ok(CoverageStudy { trials, violations, n_rows: rows.len(), cover_size: k, worst_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-1.5)).collect();
        assert!((loglog_slope(&xs, &ys) + 1.5).abs() < 1e-12);
    }

    #[test]
    fn lawson_recovers_exact_fit() {
        // cos(pi x) lies in the degree-1 space
        let err = best_approximation_error(|x| (PI * x).cos(), 1, 401, 20);
        assert!(err < 1e-10);
        // |sin(pi x)| is not a trigonometric polynomial
        assert!(best_approximation_error(|x| (PI * x).sin().abs(), 2, 401, 50) > 1e-3);
    }

    #[test]
    fn random_poly_bound() {
        let mut rng = stream(0, Purpose::Custom(0), 0, 0);
        let t = TrigPoly::random(2, 2, &mut rng).unwrap();
        for z in [[0.1, 0.2], [-0.7, 0.9]] {
            assert!(t.eval(&z).abs() <= t.abs_bound());
        }
    }
}
