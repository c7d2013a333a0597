//! Sampling from the signed de la Vallée-Poussin kernel.
//!
//! The unit-mass kernel `g = D_N / 2` splits as `g = beta_plus g_plus -
//! beta_minus g_minus` with `g_plus`, `g_minus` probability densities. A
//! perturbation `eta_plus ~ g_plus` and `eta_minus ~ g_minus` then give an
//! unbiased estimate of `g * f (z)`:
//!
//! `beta_plus f(z + eta_plus) - beta_minus f(z + eta_minus)`.
//!
//! In `d` dimensions the kernel is the tensor product of the univariate one.
//! Its positive part is where the product of coordinate signs is `+1`, and
//! the weights are `beta_pm^(d) = (lambda^d +- 1) / 2` with
//! `lambda = beta_plus + beta_minus`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harmonics::{self, wrap_coord, CosineKernel, HarmonicsError};

pub use crate::harmonics::wrap;

pub const DEFAULT_TABLE_POINTS: usize = 4096;
/// A kernel part with less mass than this cannot be sampled.
pub const MIN_PART_MASS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error(transparent)]
    Kernel(#[from] HarmonicsError),
    #[error("table needs at least {need} points to resolve degree {degree}, got {have}")]
    Resolution { degree: usize, have: usize, need: usize },
    #[error("the {0:?} part has no mass")]
    Mass(Part),
    #[error("kernel table invalid: {0}")]
    Invalid(String),
    #[error("kernel table json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, SamplerError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Plus,
    Minus,
}

/// Tabulated univariate kernel and its sign decomposition.
///
/// `grid` holds `G` uniform points from `-1` to `1` inclusive. The cumulative
/// masses of the two parts are exact integrals of the closed-form
/// antiderivative between the kernel's sign changes, so `beta_plus -
/// beta_minus = 1` up to rounding.
#[derive(Debug, Clone)]
pub struct KernelTable {
    degree: usize,
    grid: Vec<f64>,
    density: Vec<f64>,
    abs_cdf: Vec<f64>,
    plus_cum: Vec<f64>,
    minus_cum: Vec<f64>,
    beta_plus: f64,
    beta_minus: f64,
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    #[serde(rename = "N")]
    degree: usize,
    #[serde(rename = "G")]
    points: usize,
    beta_plus: f64,
    beta_minus: f64,
    lambda_hat: f64,
    density: Vec<f64>,
    abs_cdf: Vec<f64>,
}

impl KernelTable {
    pub fn build(degree: usize, points: usize) -> Result<Self> {
        let kernel = CosineKernel::vallee_poussin(degree)?;
        let need = 64 * degree;
        if points < need {
            return Err(SamplerError::Resolution { degree, have: points, need });
        }
        let step = 2.0 / (points - 1) as f64;
        let grid: Vec<f64> = (0..points).map(|j| if j + 1 == points { 1.0 } else { -1.0 + j as f64 * step }).collect();
        let density: Vec<f64> = grid.iter().map(|&x| kernel.normalized(x)).collect();

        // breakpoints -1 = r_0 < ... < r_{m+1} = 1 with constant sign in between
        let mut breaks = vec![-1.0];
        breaks.extend(kernel.sign_changes());
        breaks.push(1.0);
        let prim = |x: f64| kernel.normalized_antiderivative(x);
        let positive: Vec<bool> = breaks.windows(2).map(|w| kernel.value(0.5 * (w[0] + w[1])) > 0.0).collect();
        let mut plus_at = vec![0.0; breaks.len()];
        let mut minus_at = vec![0.0; breaks.len()];
        for s in 0..positive.len() {
            let mass = prim(breaks[s + 1]) - prim(breaks[s]);
            plus_at[s + 1] = plus_at[s] + if positive[s] { mass.max(0.0) } else { 0.0 };
            minus_at[s + 1] = minus_at[s] + if positive[s] { 0.0 } else { (-mass).max(0.0) };
        }
        let mut plus_cum = Vec::with_capacity(points);
        let mut minus_cum = Vec::with_capacity(points);
        let mut seg = 0;
        for &x in &grid {
            while seg + 1 < positive.len() && x > breaks[seg + 1] {
                seg += 1;
            }
            let partial = prim(x) - prim(breaks[seg]);
            if positive[seg] {
                plus_cum.push(plus_at[seg] + partial.max(0.0));
                minus_cum.push(minus_at[seg]);
            } else {
                plus_cum.push(plus_at[seg]);
                minus_cum.push(minus_at[seg] + (-partial).max(0.0));
            }
        }
        // cumulative masses must be monotone even where rounding disagrees
        for cum in [&mut plus_cum, &mut minus_cum] {
            for j in 1..cum.len() {
                if cum[j] < cum[j - 1] {
                    cum[j] = cum[j - 1];
                }
            }
        }
        let beta_plus = *plus_cum.last().expect("non-empty grid");
        let beta_minus = *minus_cum.last().expect("non-empty grid");
        let lambda = beta_plus + beta_minus;
        let mut abs_cdf: Vec<f64> = plus_cum.iter().zip(&minus_cum).map(|(p, m)| (p + m) / lambda).collect();
        *abs_cdf.last_mut().expect("non-empty grid") = 1.0;
        Ok(Self { degree, grid, density, abs_cdf, plus_cum, minus_cum, beta_plus, beta_minus })
    }

    pub fn with_default_points(degree: usize) -> Result<Self> {
        Self::build(degree, DEFAULT_TABLE_POINTS.max(64 * degree))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn points(&self) -> usize {
        self.grid.len()
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// `D_N(x_j) / 2` at the grid points.
    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn abs_cdf(&self) -> &[f64] {
        &self.abs_cdf
    }

    pub fn beta_plus(&self) -> f64 {
        self.beta_plus
    }

    pub fn beta_minus(&self) -> f64 {
        self.beta_minus
    }

    /// L1 norm of the unit-mass kernel.
    pub fn lambda_hat(&self) -> f64 {
        self.beta_plus + self.beta_minus
    }

    pub fn beta(&self, part: Part) -> f64 {
        match part {
            Part::Plus => self.beta_plus,
            Part::Minus => self.beta_minus,
        }
    }

    /// Weight of the positive part of the `d`-fold tensor-product kernel.
    pub fn beta_plus_d(&self, d: usize) -> f64 {
        0.5 * (self.lambda_hat().powi(d as i32) + 1.0)
    }

    pub fn beta_minus_d(&self, d: usize) -> f64 {
        0.5 * (self.lambda_hat().powi(d as i32) - 1.0)
    }

    fn cum(&self, part: Part) -> &[f64] {
        match part {
            Part::Plus => &self.plus_cum,
            Part::Minus => &self.minus_cum,
        }
    }

    /// CDF of the normalized part at `x`, linear between grid points.
    pub fn part_cdf(&self, part: Part, x: f64) -> f64 {
        let cum = self.cum(part);
        let total = self.beta(part);
        if total < MIN_PART_MASS || x <= -1.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let h = 2.0 / (self.points() - 1) as f64;
        let j = (((x + 1.0) / h).floor() as usize).min(self.points() - 2);
        let t = ((x - self.grid[j]) / (self.grid[j + 1] - self.grid[j])).clamp(0.0, 1.0);
        (cum[j] + t * (cum[j + 1] - cum[j])) / total
    }

    /// One draw from the normalized positive or negative part.
    pub fn sample_part<R: Rng + ?Sized>(&self, part: Part, rng: &mut R) -> Result<f64> {
        if self.beta(part) < MIN_PART_MASS {
            return Err(SamplerError::Mass(part));
        }
        Ok(self.invert(part, rng.random::<f64>()))
    }

    fn invert(&self, part: Part, u: f64) -> f64 {
        let cum = self.cum(part);
        let target = u * self.beta(part);
        let upper = cum.partition_point(|&c| c <= target).clamp(1, cum.len() - 1);
        let j = upper - 1;
        let width = cum[upper] - cum[j];
        let t = if width > 0.0 { ((target - cum[j]) / width).clamp(0.0, 1.0) } else { 0.5 };
        let x = self.grid[j] + t * (self.grid[upper] - self.grid[j]);
        x.clamp(-1.0, 1.0)
    }

    /// One coordinate drawn from `|g| / lambda`, with the sign of `g` there.
    fn sample_abs<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, bool) {
        let plus = rng.random::<f64>() * self.lambda_hat() < self.beta_plus || self.beta_minus < MIN_PART_MASS;
        let part = if plus { Part::Plus } else { Part::Minus };
        (self.invert(part, rng.random::<f64>()), plus)
    }

    /// A draw of `eta` from `|g^(d)| / lambda^d` with the product sign.
    pub fn sample_signed<R: Rng + ?Sized>(&self, d: usize, rng: &mut R) -> SignedNoise {
        let mut eta = Vec::with_capacity(d);
        let mut positive = true;
        for _ in 0..d {
            let (x, plus) = self.sample_abs(rng);
            eta.push(x);
            positive ^= !plus;
        }
        SignedNoise { eta, sign: if positive { 1 } else { -1 }, weight_plus_pair: positive }
    }

    pub fn to_json(&self) -> String {
        let file = TableFile {
            degree: self.degree,
            points: self.points(),
            beta_plus: self.beta_plus,
            beta_minus: self.beta_minus,
            lambda_hat: self.lambda_hat(),
            density: self.density.clone(),
            abs_cdf: self.abs_cdf.clone(),
        };
        serde_json::to_string(&file).expect("table serializes")
    }

    /// Parse a serialized table, rebuilding it from `(N, G)` and checking the
    /// stored values agree with the rebuild.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: TableFile = serde_json::from_str(text).map_err(|e| SamplerError::Json(e.to_string()))?;
        let table = Self::build(file.degree, file.points)?;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + b.abs());
        if file.density.len() != file.points || file.abs_cdf.len() != file.points {
            return Err(SamplerError::Invalid("array lengths differ from G".into()));
        }
        if file.abs_cdf.windows(2).any(|w| w[1] < w[0]) || file.abs_cdf.last() != Some(&1.0) {
            return Err(SamplerError::Invalid("abs_cdf must be non-decreasing and end at 1".into()));
        }
        if file.beta_plus < 0.0 || file.beta_minus < 0.0 || (file.beta_plus - file.beta_minus - 1.0).abs() > 1e-6 {
            return Err(SamplerError::Invalid("beta weights inconsistent with unit mass".into()));
        }
        let scalars_ok = close(file.beta_plus, table.beta_plus)
            && close(file.beta_minus, table.beta_minus)
            && close(file.lambda_hat, table.lambda_hat());
        let arrays_ok = file.density.iter().zip(&table.density).all(|(a, b)| close(*a, *b))
            && file.abs_cdf.iter().zip(&table.abs_cdf).all(|(a, b)| close(*a, *b));
        if !(scalars_ok && arrays_ok) {
            return Err(SamplerError::Invalid("stored values disagree with the kernel".into()));
        }
        Ok(table)
    }
}

/// A perturbation together with the sign of the kernel part it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedNoise {
    pub eta: Vec<f64>,
    pub sign: i8,
    /// True for a positive-part draw.
    pub weight_plus_pair: bool,
}

/// Build a kernel table. See [`KernelTable::build`].
pub fn build_table(degree: usize, points: usize) -> Result<KernelTable> {
    KernelTable::build(degree, points)
}

/// One draw from a part of the univariate kernel.
pub fn sample_part<R: Rng + ?Sized>(table: &KernelTable, part: Part, rng: &mut R) -> Result<f64> {
    table.sample_part(part, rng)
}

/// Draw `(eta_plus, eta_minus)` from the normalized parts of the `d`-fold
/// tensor-product kernel.
///
/// For `d = 1` this is one draw from each univariate part. Otherwise
/// coordinate-wise draws from `|g|` are classified by their product sign until
/// both classes have a member; the first member of each class is returned.
pub fn sample_pair_d<R: Rng + ?Sized>(table: &KernelTable, d: usize, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    assert!(d >= 1, "dimension must be at least 1");
    let no_minus = table.beta_minus() < MIN_PART_MASS;
    if d == 1 {
        let plus = table.invert(Part::Plus, rng.random::<f64>());
        let minus = if no_minus { plus } else { table.invert(Part::Minus, rng.random::<f64>()) };
        return (vec![plus], vec![minus]);
    }
    let mut plus = None;
    let mut minus = None;
    loop {
        let noise = table.sample_signed(d, rng);
        if noise.weight_plus_pair {
            plus.get_or_insert(noise.eta);
        } else {
            minus.get_or_insert(noise.eta);
        }
        if let (true, Some(p)) = (no_minus, &plus) {
            return (p.clone(), p.clone());
        }
        if let (Some(p), Some(m)) = (&plus, &minus) {
            return (p.clone(), m.clone());
        }
    }
}

/// `wrap(z + eta)`.
pub fn perturb(z: &[f64], eta: &[f64]) -> Vec<f64> {
    z.iter().zip(eta).map(|(a, b)| wrap_coord(a + b)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// Standard error of the mean.
    pub std_error: f64,
    pub n: usize,
}

pub(crate) fn summarize(values: &[f64]) -> Estimate {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = if n > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
    Estimate { mean, std_error: (var / n as f64).sqrt(), n }
}

/// Paired estimate of `g^(d) * f (z)` from `n_pairs` signed pairs.
///
/// `f_sampler(x, rng)` must return an unbiased sample of `f(x)`.
pub fn convolution_estimate<R, F>(
    mut f_sampler: F,
    z: &[f64],
    table: &KernelTable,
    n_pairs: usize,
    rng: &mut R,
) -> Estimate
where
    R: Rng + ?Sized,
    F: FnMut(&[f64], &mut R) -> f64,
{
    let d = z.len();
    let (bp, bm) = (table.beta_plus_d(d), table.beta_minus_d(d));
    let values: Vec<f64> = (0..n_pairs)
        .map(|_| {
            let (ep, em) = sample_pair_d(table, d, rng);
            let yp = f_sampler(&perturb(z, &ep), rng);
            let ym = f_sampler(&perturb(z, &em), rng);
            bp * yp - bm * ym
        })
        .collect();
    summarize(&values)
}

/// Single-draw importance estimate `lambda^d * sign * f(z + eta)`. Same mean
/// as [`convolution_estimate`], one query per draw.
pub fn single_signed_estimate<R, F>(
    mut f_sampler: F,
    z: &[f64],
    table: &KernelTable,
    n_draws: usize,
    rng: &mut R,
) -> Estimate
where
    R: Rng + ?Sized,
    F: FnMut(&[f64], &mut R) -> f64,
{
    let d = z.len();
    let scale = table.lambda_hat().powi(d as i32);
    let values: Vec<f64> = (0..n_draws)
        .map(|_| {
            let noise = table.sample_signed(d, rng);
            scale * f64::from(noise.sign) * f_sampler(&perturb(z, &noise.eta), rng)
        })
        .collect();
    summarize(&values)
}

/// Exact `g^(d) * f (z)` by quadrature, for cross-checks.
pub fn quadrature_convolution<F: Fn(&[f64]) -> f64>(
    f: F,
    z: &[f64],
    degree: usize,
    points_per_axis: usize,
) -> Result<f64> {
    let kernel = CosineKernel::vallee_poussin(degree)?;
    let quad = harmonics::Quadrature::new(z.len(), points_per_axis)?;
    let conv = harmonics::circular_convolve(f, move |x| kernel.value(x), &quad);
    Ok(conv.eval(z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::{kernel_l1_norm, Quadrature};
    use crate::rng::{stream, Purpose};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_mass_and_norm() {
        for n in [2, 4, 8, 16] {
            let t = KernelTable::with_default_points(n).unwrap();
            assert!((t.beta_plus() - t.beta_minus() - 1.0).abs() < 1e-6, "N={n}");
            assert!(t.beta_plus() >= 0.0 && t.beta_minus() >= 0.0);
            assert_eq!(*t.abs_cdf().last().unwrap(), 1.0);
            assert!(t.abs_cdf().windows(2).all(|w| w[1] >= w[0]));
        }
        let t = KernelTable::with_default_points(8).unwrap();
        let quad = Quadrature::new(1, 512).unwrap();
        assert!((t.lambda_hat() - kernel_l1_norm(8, &quad).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn build_errors() {
        assert!(matches!(build_table(3, 4096), Err(SamplerError::Kernel(_))));
        assert_eq!(build_table(8, 100).unwrap_err(), SamplerError::Resolution { degree: 8, have: 100, need: 512 });
    }

    #[test]
    fn mass_error_for_empty_part() {
        let mut t = KernelTable::with_default_points(4).unwrap();
        t.beta_minus = 0.0;
        let mut rng = stream(0, Purpose::Custom(0), 0, 0);
        assert_eq!(t.sample_part(Part::Minus, &mut rng), Err(SamplerError::Mass(Part::Minus)));
    }

    #[test]
    fn plus_part_mean_matches_quadrature() {
        let t = KernelTable::with_default_points(4).unwrap();
        let kernel = CosineKernel::vallee_poussin(4).unwrap();
        let quad = Quadrature::new(1, 4096).unwrap();
        let want = quad.integrate(|z| (PI * z[0]).cos() * kernel.normalized(z[0]).max(0.0)) / t.beta_plus();
        let mut rng = stream(1, Purpose::Custom(1), 0, 0);
        let draws: Vec<f64> = (0..100_000).map(|_| (PI * t.sample_part(Part::Plus, &mut rng).unwrap()).cos()).collect();
        let est = summarize(&draws);
        assert!(draws.iter().all(|v| v.is_finite()));
        assert!((est.mean - want).abs() < 3.0 * est.std_error + 1e-4, "{est:?} vs {want}");
    }

    #[test]
    fn draw_sequence_is_reproducible() {
        let t = KernelTable::with_default_points(4).unwrap();
        let run = || {
            let mut rng = stream(77, Purpose::Custom(2), 0, 0);
            (0..32).map(|_| t.sample_part(Part::Minus, &mut rng).unwrap()).collect::<Vec<_>>()
        };
        let a = run();
        assert_eq!(a, run());
        assert!(a.iter().all(|x| (-1.0..=1.0).contains(x)));
    }

    #[test]
    fn plus_draws_ks_distance() {
        let t = KernelTable::with_default_points(4).unwrap();
        let mut rng = stream(5, Purpose::Custom(3), 0, 0);
        let mut draws: Vec<f64> = (0..100_000).map(|_| t.sample_part(Part::Plus, &mut rng).unwrap()).collect();
        draws.sort_by(f64::total_cmp);
        let n = draws.len() as f64;
        let ks = draws
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let c = t.part_cdf(Part::Plus, x);
                (c - i as f64 / n).abs().max((c - (i + 1) as f64 / n).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks <= 0.01, "ks = {ks}");
    }

    #[test]
    fn d_weights() {
        let t = KernelTable::with_default_points(4).unwrap();
        assert!((t.beta_plus_d(1) - t.beta_plus()).abs() < 1e-12);
        assert!((t.beta_minus_d(1) - t.beta_minus()).abs() < 1e-12);
        for d in 1..=3 {
            assert!((t.beta_plus_d(d) - t.beta_minus_d(d) - 1.0).abs() < 1e-12);
            assert!((t.beta_plus_d(d) + t.beta_minus_d(d) - t.lambda_hat().powi(d as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn pair_estimate_d2_matches_quadrature() {
        let t = KernelTable::with_default_points(4).unwrap();
        let f = |z: &[f64]| (PI * z[0]).cos() * (PI * z[1]).cos();
        let want = quadrature_convolution(f, &[0.0, 0.0], 4, 64).unwrap();
        let mut rng = stream(8, Purpose::Custom(4), 0, 0);
        let est = convolution_estimate(|x, _| f(x), &[0.0, 0.0], &t, 100_000, &mut rng);
        assert!((est.mean - want).abs() < 3.0 * est.std_error, "{est:?} vs {want}");
    }

    #[test]
    fn constant_and_low_degree_estimates() {
        let t = KernelTable::with_default_points(4).unwrap();
        let mut rng = stream(9, Purpose::Custom(5), 0, 0);
        let est = convolution_estimate(|_, _| 0.7, &[0.2], &t, 10_000, &mut rng);
        assert!((est.mean - 0.7).abs() < 3.0 * est.std_error + 1e-12);
        let f = |z: &[f64]| 0.3 + (PI * z[0]).sin() - 0.5 * (2.0 * PI * z[0]).cos();
        let est = convolution_estimate(|x, _| f(x), &[0.3], &t, 10_000, &mut rng);
        assert!((est.mean - f(&[0.3])).abs() < 3.0 * est.std_error);
        let single = single_signed_estimate(|x, _| f(x), &[0.3], &t, 10_000, &mut rng);
        assert!((single.mean - f(&[0.3])).abs() < 3.0 * single.std_error);
    }

    #[test]
    fn sin3_against_quadrature() {
        let t = KernelTable::with_default_points(4).unwrap();
        let f = |z: &[f64]| (3.0 * PI * z[0]).sin();
        let want = quadrature_convolution(f, &[0.3], 4, 512).unwrap();
        let mut rng = stream(10, Purpose::Custom(6), 0, 0);
        let est = convolution_estimate(|x, _| f(x), &[0.3], &t, 10_000, &mut rng);
        assert!((est.mean - want).abs() < 3.0 * est.std_error, "{est:?} vs {want}");
    }

    #[test]
    fn single_pair_values_bounded() {
        let t = KernelTable::with_default_points(8).unwrap();
        let mut rng = stream(11, Purpose::Custom(7), 0, 0);
        for d in 1..=3 {
            let bound = t.lambda_hat().powi(d as i32);
            let z = vec![0.1; d];
            for _ in 0..500 {
                let (ep, em) = sample_pair_d(&t, d, &mut rng);
                let f = |x: &[f64]| x.iter().map(|v| (PI * v).sin()).product::<f64>();
                let v = t.beta_plus_d(d) * f(&perturb(&z, &ep)) - t.beta_minus_d(d) * f(&perturb(&z, &em));
                assert!(v.abs() <= bound + 1e-12);
            }
        }
    }

    #[test]
    fn json_round_trip_and_validation() {
        let t = KernelTable::build(4, 512).unwrap();
        let text = t.to_json();
        let back = KernelTable::from_json(&text).unwrap();
        assert_eq!(back.density(), t.density());
        assert_eq!(back.beta_plus(), t.beta_plus());
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["beta_plus"] = serde_json::json!(2.0);
        assert!(KernelTable::from_json(&v.to_string()).is_err());
    }

    proptest! {
        #[test]
        fn wrap_is_idempotent(z in proptest::collection::vec(-3.0f64..3.0, 1..4)) {
            let w = wrap(&z);
            prop_assert_eq!(wrap(&w), w.clone());
            prop_assert!(w.iter().all(|x| (-1.0..1.0).contains(x)));
        }

        #[test]
        fn inverse_cdf_stays_in_domain(u in 0.0f64..1.0) {
            let t = KernelTable::build(6, 1024).unwrap();
            for part in [Part::Plus, Part::Minus] {
                let x = t.invert(part, u);
                prop_assert!((-1.0..=1.0).contains(&x));
                prop_assert!((t.part_cdf(part, x) - u).abs() < 1e-9);
            }
        }
    }
}
