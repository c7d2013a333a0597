//! Trigonometric basis on the periodic cube `[-1, 1]^d`.
//!
//! Contents:
//! - the `soc` basis (constant / sine / cosine indexed by a signed integer)
//!   and its tensor products,
//! - multi-index sets and feature maps built from them,
//! - a periodic trapezoid quadrature,
//! - the Dirichlet and de la Vallée-Poussin kernels, circular convolution
//!   with them, Fourier coefficients and kernel L1 norms.
//!
//! Convolutions always use the unit-mass kernel `D / 2` per coordinate, so a
//! convolution reproduces constants. Multivariate kernels are tensor products
//! of the univariate one.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Slack allowed outside `[-1, 1]` before a point is rejected.
pub const DOMAIN_TOL: f64 = 1e-12;
/// Default cap on the size of an enumerated index set.
pub const DEFAULT_INDEX_CAP: usize = 10_000_000;
/// Below this value of `|sin(pi x / 2)|` the Dirichlet closed form is replaced
/// by its cosine sum.
pub const DIRICHLET_SINGULAR_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarmonicsError {
    #[error("coordinate {coord} = {value} lies outside [-1, 1]")]
    Domain { coord: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("index set would hold {size} elements, above the cap of {cap}")]
    TooLarge { size: u128, cap: usize },
    #[error("de la Vallée-Poussin degree must be even and at least 2, got {0}")]
    KernelDegree(usize),
    #[error("quadrature has {have} points per axis, need at least {need}")]
    Resolution { have: usize, need: usize },
}

pub type Result<T> = std::result::Result<T, HarmonicsError>;

#[inline]
fn soc_raw(n: i32, z: f64) -> f64 {
    match n {
        0 => 1.0,
        n if n > 0 => (f64::from(n) * PI * z).sin(),
        n => (f64::from(n) * PI * z).cos(),
    }
}

fn check_coord(coord: usize, z: f64) -> Result<()> {
    if z.is_finite() && z.abs() <= 1.0 + DOMAIN_TOL {
        Ok(())
    } else {
        Err(HarmonicsError::Domain { coord, value: z })
    }
}

/// `1` for `n = 0`, `sin(n pi z)` for `n > 0`, `cos(n pi z)` for `n < 0`.
pub fn soc(n: i32, z: f64) -> Result<f64> {
    check_coord(0, z)?;
    Ok(soc_raw(n, z))
}

/// Product of per-coordinate [`soc`] values.
pub fn soc_multi(n: &[i32], z: &[f64]) -> Result<f64> {
    if n.len() != z.len() {
        return Err(HarmonicsError::DimensionMismatch { expected: n.len(), got: z.len() });
    }
    let mut out = 1.0;
    for (i, (&ni, &zi)) in n.iter().zip(z).enumerate() {
        check_coord(i, zi)?;
        out *= soc_raw(ni, zi);
    }
    Ok(out)
}

/// Map a coordinate into `[-1, 1)` by adding or subtracting multiples of 2.
#[inline]
pub fn wrap_coord(x: f64) -> f64 {
    let w = x - 2.0 * ((x + 1.0) * 0.5).floor();
    if (-1.0..1.0).contains(&w) {
        w
    } else {
        -1.0
    }
}

/// Periodic wrap of every coordinate into `[-1, 1)`.
pub fn wrap(z: &[f64]) -> Vec<f64> {
    z.iter().map(|&x| wrap_coord(x)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum NormKind {
    /// `sum |n_i| <= N`.
    L1,
    /// `max |n_i| <= N`.
    Linf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Normalization {
    Raw,
    /// Unit L2 norm on `[-1, 1]^d` (Lebesgue measure).
    Orthonormal,
}

/// Position of a signed integer in the per-coordinate order `0, 1, -1, 2, -2, ...`.
fn coord_rank(n: i32) -> u32 {
    match n {
        0 => 0,
        n if n > 0 => 2 * n as u32 - 1,
        n => 2 * n.unsigned_abs(),
    }
}

fn rank_value(r: u32) -> i32 {
    if r == 0 {
        0
    } else if r % 2 == 1 {
        r.div_ceil(2) as i32
    } else {
        -((r / 2) as i32)
    }
}

/// Number of points of `Z^d` in the L1 ball of radius `degree`.
fn l1_ball_size(d: usize, degree: usize) -> u128 {
    // ways[b] = number of vectors over the coordinates seen so far with L1 norm b
    let mut ways = vec![0u128; degree + 1];
    ways[0] = 1;
    for _ in 0..d {
        let mut next = vec![0u128; degree + 1];
        for (b, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            next[b] += w;
            for step in 1..=degree - b {
                next[b + step] += 2 * w;
            }
        }
        ways = next;
    }
    ways.iter().sum()
}

/// Enumerated multi-indices `n in Z^d` of a degree-`N` ball.
///
/// Indices are ordered lexicographically over coordinates, each coordinate
/// ordered as `0, 1, -1, 2, -2, ...`. For `d = 1` this lists the basis as
/// `1, sin(pi z), cos(pi z), sin(2 pi z), ...`. The order is part of the
/// serialized format of coefficient vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiIndexSet {
    d: usize,
    degree: usize,
    norm_kind: NormKind,
    indices: Vec<Vec<i32>>,
}

impl MultiIndexSet {
    pub fn new(d: usize, degree: usize, norm_kind: NormKind) -> Result<Self> {
        Self::with_cap(d, degree, norm_kind, DEFAULT_INDEX_CAP)
    }

    pub fn with_cap(d: usize, degree: usize, norm_kind: NormKind, cap: usize) -> Result<Self> {
        if d == 0 {
            return Err(HarmonicsError::ZeroDimension);
        }
        let size = match norm_kind {
            NormKind::L1 => l1_ball_size(d, degree),
            NormKind::Linf => (2 * degree as u128 + 1).checked_pow(d as u32).unwrap_or(u128::MAX),
        };
        if size > cap as u128 {
            return Err(HarmonicsError::TooLarge { size, cap });
        }
        let mut indices = Vec::with_capacity(size as usize);
        let mut prefix = Vec::with_capacity(d);
        enumerate(d, degree as u32, norm_kind, degree as u32, &mut prefix, &mut indices);
        debug_assert_eq!(indices.len() as u128, size);
        Ok(Self { d, degree, norm_kind, indices })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn norm_kind(&self) -> NormKind {
        self.norm_kind
    }

    pub fn indices(&self) -> &[Vec<i32>] {
        &self.indices
    }

    /// The number of basis functions, counted by enumeration. For L1 this is
    /// not `binom(2N + d, d)`: d = 2, N = 1 gives 5, not 6.
    pub fn size(&self) -> usize {
        self.indices.len()
    }

    pub fn position(&self, n: &[i32]) -> Option<usize> {
        self.indices.iter().position(|m| m.as_slice() == n)
    }
}

fn enumerate(d: usize, degree: u32, norm_kind: NormKind, budget: u32, prefix: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
    if prefix.len() == d {
        out.push(prefix.clone());
        return;
    }
    for r in 0..=2 * degree {
        let v = rank_value(r);
        let cost = v.unsigned_abs();
        let remaining = match norm_kind {
            NormKind::L1 if cost > budget => continue,
            NormKind::L1 => budget - cost,
            NormKind::Linf => budget,
        };
        debug_assert_eq!(coord_rank(v), r);
        prefix.push(v);
        enumerate(d, degree, norm_kind, remaining, prefix, out);
        prefix.pop();
    }
}

/// Enumerate the degree-`degree` index ball. Thin wrapper over [`MultiIndexSet::new`].
pub fn enumerate_indices(d: usize, degree: usize, norm_kind: NormKind) -> Result<MultiIndexSet> {
    MultiIndexSet::new(d, degree, norm_kind)
}

/// Feature map `z -> [e_1(z), ..., e_K(z)]` over a [`MultiIndexSet`].
#[derive(Debug, Clone)]
pub struct FeatureMap {
    index_set: MultiIndexSet,
    normalization: Normalization,
    scale: Vec<f64>,
}

impl FeatureMap {
    pub fn new(index_set: MultiIndexSet, normalization: Normalization) -> Self {
        let scale = index_set
            .indices()
            .iter()
            .map(|n| match normalization {
                Normalization::Raw => 1.0,
                Normalization::Orthonormal => n.iter().filter(|&&ni| ni == 0).fold(1.0, |acc, _| acc * FRAC_1_SQRT_2),
            })
            .collect();
        Self { index_set, normalization, scale }
    }

    /// Orthonormal features over the `degree` ball in `d` dimensions.
    pub fn orthonormal(d: usize, degree: usize, norm_kind: NormKind) -> Result<Self> {
        Ok(Self::new(MultiIndexSet::new(d, degree, norm_kind)?, Normalization::Orthonormal))
    }

    pub fn index_set(&self) -> &MultiIndexSet {
        &self.index_set
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn dim(&self) -> usize {
        self.index_set.dim()
    }

    pub fn len(&self) -> usize {
        self.index_set.size()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Per-feature normalization constant.
    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    pub fn eval(&self, z: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(z, &mut out)?;
        Ok(out)
    }

    pub fn eval_into(&self, z: &[f64], out: &mut [f64]) -> Result<()> {
        let d = self.dim();
        if z.len() != d {
            return Err(HarmonicsError::DimensionMismatch { expected: d, got: z.len() });
        }
        for (i, &zi) in z.iter().enumerate() {
            check_coord(i, zi)?;
        }
        let table = SocTable::new(self.index_set.degree(), z);
        for ((o, n), s) in out.iter_mut().zip(self.index_set.indices()).zip(&self.scale) {
            *o = s * n.iter().enumerate().map(|(i, &ni)| table.get(i, ni)).product::<f64>();
        }
        Ok(())
    }

    /// `sum_i theta_i e_i(z)`.
    pub fn dot(&self, theta: &[f64], z: &[f64]) -> Result<f64> {
        let phi = self.eval(z)?;
        Ok(phi.iter().zip(theta).map(|(a, b)| a * b).sum())
    }
}

/// `soc(n, z_i)` for every coordinate and every `|n| <= degree`.
pub(crate) struct SocTable {
    degree: usize,
    values: Vec<f64>,
}

impl SocTable {
    pub(crate) fn new(degree: usize, z: &[f64]) -> Self {
        let width = 2 * degree + 1;
        let mut values = vec![0.0; width * z.len()];
        for (i, &zi) in z.iter().enumerate() {
            let row = &mut values[i * width..(i + 1) * width];
            row[degree] = 1.0;
            for k in 1..=degree {
                let (s, c) = (k as f64 * PI * zi).sin_cos();
                row[degree + k] = s;
                row[degree - k] = c;
            }
        }
        Self { degree, values }
    }

    #[inline]
    pub(crate) fn get(&self, coord: usize, n: i32) -> f64 {
        let width = 2 * self.degree + 1;
        self.values[coord * width + (self.degree as i64 + i64::from(n)) as usize]
    }
}

/// Periodic trapezoid rule on a uniform tensor grid.
///
/// Nodes are `-1 + 2 j / M`, `j = 0..M`, on every axis, each with weight
/// `2 / M`, so the weights sum to `2^d`. The rule integrates exactly every
/// trigonometric polynomial whose per-axis frequencies stay below `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    d: usize,
    points_per_axis: usize,
    nodes: Vec<f64>,
}

impl Quadrature {
    pub fn new(d: usize, points_per_axis: usize) -> Result<Self> {
        if d == 0 {
            return Err(HarmonicsError::ZeroDimension);
        }
        if points_per_axis == 0 {
            return Err(HarmonicsError::Resolution { have: 0, need: 1 });
        }
        let m = points_per_axis;
        let nodes = (0..m).map(|j| -1.0 + 2.0 * j as f64 / m as f64).collect();
        Ok(Self { d, points_per_axis, nodes })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn axis_nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn axis_weight(&self) -> f64 {
        2.0 / self.points_per_axis as f64
    }

    pub fn node_weight(&self) -> f64 {
        self.axis_weight().powi(self.d as i32)
    }

    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Highest per-axis frequency integrated exactly.
    pub fn exact_degree(&self) -> usize {
        self.points_per_axis - 1
    }

    /// Visit every tensor node in row-major order (first axis slowest).
    pub fn for_each_node(&self, mut visit: impl FnMut(usize, &[f64])) {
        let m = self.points_per_axis;
        let mut idx = vec![0usize; self.d];
        let mut point: Vec<f64> = vec![self.nodes[0]; self.d];
        for flat in 0..self.len() {
            visit(flat, &point);
            for ax in (0..self.d).rev() {
                idx[ax] += 1;
                if idx[ax] < m {
                    point[ax] = self.nodes[idx[ax]];
                    break;
                }
                idx[ax] = 0;
                point[ax] = self.nodes[0];
            }
        }
    }

    /// Values of `f` at every node, row-major.
    pub fn sample<F: Fn(&[f64]) -> f64>(&self, f: F) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        self.for_each_node(|_, z| out.push(f(z)));
        out
    }

    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        let mut acc = 0.0;
        self.for_each_node(|_, z| acc += f(z));
        acc * self.node_weight()
    }

    /// Integral from values already sampled at the nodes.
    pub fn integrate_samples(&self, samples: &[f64]) -> f64 {
        samples.iter().sum::<f64>() * self.node_weight()
    }
}

/// Dirichlet kernel `D_N^0(x) = sin((N + 1/2) pi x) / sin(pi x / 2)`, equal to
/// `1 + 2 sum_{k<=N} cos(k pi x)`. Integrates to 2 over `[-1, 1]`.
pub fn dirichlet_kernel(degree: usize, x: f64) -> f64 {
    let s = (PI * x * 0.5).sin();
    if s.abs() < DIRICHLET_SINGULAR_TOL {
        1.0 + 2.0 * (1..=degree).map(|k| (k as f64 * PI * x).cos()).sum::<f64>()
    } else {
        ((degree as f64 + 0.5) * PI * x).sin() / s
    }
}

/// de la Vallée-Poussin kernel: the mean of `D_n^0` over `n = N/2 ..= N`.
pub fn vp_kernel(degree: usize, x: f64) -> Result<f64> {
    check_vp_degree(degree)?;
    let lo = degree / 2;
    let sum: f64 = (lo..=degree).map(|n| dirichlet_kernel(n, x)).sum();
    Ok(sum / (lo + 1) as f64)
}

pub(crate) fn check_vp_degree(degree: usize) -> Result<()> {
    if degree < 2 || degree % 2 == 1 {
        Err(HarmonicsError::KernelDegree(degree))
    } else {
        Ok(())
    }
}

/// Even kernel `1 + 2 sum_k m_k cos(k pi x)` stored by its multipliers.
///
/// Both the Dirichlet and de la Vallée-Poussin kernels have this form, which
/// gives a closed-form antiderivative and fast evaluation through the
/// Chebyshev recurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineKernel {
    multipliers: Vec<f64>,
}

impl CosineKernel {
    pub fn dirichlet(degree: usize) -> Self {
        Self { multipliers: vec![1.0; degree] }
    }

    pub fn vallee_poussin(degree: usize) -> Result<Self> {
        check_vp_degree(degree)?;
        let half = degree / 2;
        let multipliers =
            (1..=degree).map(|k| if k <= half { 1.0 } else { (degree + 1 - k) as f64 / (half + 1) as f64 }).collect();
        Ok(Self { multipliers })
    }

    pub fn degree(&self) -> usize {
        self.multipliers.len()
    }

    /// Multiplier applied to frequency `k`.
    pub fn multiplier(&self, k: usize) -> f64 {
        match k {
            0 => 1.0,
            k => self.multipliers.get(k - 1).copied().unwrap_or(0.0),
        }
    }

    /// Kernel value, integral 2 over a period.
    pub fn value(&self, x: f64) -> f64 {
        let c1 = (PI * x).cos();
        let (mut prev, mut cur) = (1.0, c1);
        let mut acc = 0.0;
        for &m in &self.multipliers {
            acc += m * cur;
            let next = 2.0 * c1 * cur - prev;
            prev = cur;
            cur = next;
        }
        1.0 + 2.0 * acc
    }

    /// Kernel divided by 2: unit mass over a period.
    pub fn normalized(&self, x: f64) -> f64 {
        0.5 * self.value(x)
    }

    /// Antiderivative of [`Self::normalized`] vanishing at 0.
    pub fn normalized_antiderivative(&self, x: f64) -> f64 {
        let mut acc = 0.5 * x;
        for (i, &m) in self.multipliers.iter().enumerate() {
            let k = (i + 1) as f64;
            acc += m * (k * PI * x).sin() / (k * PI);
        }
        acc
    }

    /// Sign changes of the kernel inside `(-1, 1)`, sorted.
    pub fn sign_changes(&self) -> Vec<f64> {
        let steps = 64 * (self.degree() + 1);
        let h = 2.0 / steps as f64;
        let positive = |x: f64| self.value(x) > 0.0;
        let mut roots = Vec::new();
        let mut left = -1.0;
        let mut left_pos = positive(left);
        for i in 1..=steps {
            let right = -1.0 + i as f64 * h;
            let right_pos = positive(right);
            if right_pos != left_pos {
                let (mut a, mut b) = (left, right);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if mid <= a || mid >= b {
                        break;
                    }
                    if positive(mid) == left_pos {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                let r = 0.5 * (a + b);
                if r > -1.0 && r < 1.0 {
                    roots.push(r);
                }
            }
            left = right;
            left_pos = right_pos;
        }
        roots
    }
}

/// Circular convolution `x -> int f(y) g(x - y) dy` with a tensor-product
/// kernel, discretized by a [`Quadrature`].
///
/// `f` is sampled once at the quadrature nodes. The kernel passed in is the
/// raw (integral-2) univariate kernel; it is divided by 2 per coordinate and
/// its argument is wrapped periodically. The result is an exact
/// trigonometric polynomial in `x` of the kernel's degree.
pub struct Convolution {
    quad: Quadrature,
    samples: Vec<f64>,
    kernel: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for Convolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Convolution").field("quad", &self.quad).finish_non_exhaustive()
    }
}

/// Build the convolution of `f` with a univariate kernel (tensor product in
/// `d > 1`). `f` and the kernel are assumed periodic on `[-1, 1]^d`.
pub fn circular_convolve<F, K>(f: F, kernel: K, quad: &Quadrature) -> Convolution
where
    F: Fn(&[f64]) -> f64,
    K: Fn(f64) -> f64 + Send + Sync + 'static,
{
    Convolution { quad: quad.clone(), samples: quad.sample(f), kernel: Box::new(kernel) }
}

impl Convolution {
    fn axis_matrix(&self, points: &[f64]) -> Vec<f64> {
        let nodes = self.quad.axis_nodes();
        let w = 0.5 * self.quad.axis_weight();
        let mut mat = Vec::with_capacity(points.len() * nodes.len());
        for &p in points {
            for &y in nodes {
                mat.push(w * (self.kernel)(wrap_coord(p - y)));
            }
        }
        mat
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let axes: Vec<&[f64]> = x.iter().map(std::slice::from_ref).collect();
        self.eval_grid(&axes)[0]
    }

    /// Evaluate on the tensor grid `axes[0] x axes[1] x ...`, row-major.
    pub fn eval_grid(&self, axes: &[&[f64]]) -> Vec<f64> {
        let d = self.quad.dim();
        assert_eq!(axes.len(), d, "grid dimension must match the quadrature");
        let mut dims = vec![self.quad.points_per_axis(); d];
        let mut data = self.samples.clone();
        for ax in (0..d).rev() {
            let mat = self.axis_matrix(axes[ax]);
            data = contract_axis(&data, &dims, ax, &mat, axes[ax].len());
            dims[ax] = axes[ax].len();
        }
        data
    }
}

/// Apply a `rows x dims[axis]` matrix along one axis of a row-major tensor.
fn contract_axis(data: &[f64], dims: &[usize], axis: usize, mat: &[f64], rows: usize) -> Vec<f64> {
    let m = dims[axis];
    let outer: usize = dims[..axis].iter().product();
    let inner: usize = dims[axis + 1..].iter().product();
    let mut out = vec![0.0; outer * rows * inner];
    for o in 0..outer {
        for r in 0..rows {
            let dst = &mut out[(o * rows + r) * inner..(o * rows + r + 1) * inner];
            for j in 0..m {
                let c = mat[r * m + j];
                let src = &data[(o * m + j) * inner..(o * m + j + 1) * inner];
                for (a, b) in dst.iter_mut().zip(src) {
                    *a += c * b;
                }
            }
        }
    }
    out
}

/// Orthonormal basis function `e_n` evaluated without domain checks.
fn orthonormal_basis(n: &[i32], z: &[f64]) -> f64 {
    n.iter().zip(z).map(|(&ni, &zi)| if ni == 0 { FRAC_1_SQRT_2 } else { soc_raw(ni, zi) }).product()
}

fn check_coefficient_resolution(n: &[i32], quad: &Quadrature) -> Result<()> {
    if n.len() != quad.dim() {
        return Err(HarmonicsError::DimensionMismatch { expected: quad.dim(), got: n.len() });
    }
    let max = n.iter().map(|v| v.unsigned_abs() as usize).max().unwrap_or(0);
    let need = 4 * (max + 1);
    if quad.points_per_axis() < need {
        return Err(HarmonicsError::Resolution { have: quad.points_per_axis(), need });
    }
    Ok(())
}

/// `<f, e_n>` in the orthonormal basis, by quadrature.
pub fn fourier_coefficient<F: Fn(&[f64]) -> f64>(f: F, n: &[i32], quad: &Quadrature) -> Result<f64> {
    check_coefficient_resolution(n, quad)?;
    Ok(quad.integrate(|z| f(z) * orthonormal_basis(n, z)))
}

/// [`fourier_coefficient`] from values sampled at the quadrature nodes.
pub fn fourier_coefficient_from_samples(samples: &[f64], n: &[i32], quad: &Quadrature) -> Result<f64> {
    check_coefficient_resolution(n, quad)?;
    if samples.len() != quad.len() {
        return Err(HarmonicsError::DimensionMismatch { expected: quad.len(), got: samples.len() });
    }
    let mut acc = 0.0;
    quad.for_each_node(|i, z| acc += samples[i] * orthonormal_basis(n, z));
    Ok(acc * quad.node_weight())
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `int_{-1}^{1} |f|` by Gauss-Legendre panels split at sign changes.
///
/// Each of the `panels` panels is cut in four; a sub-panel whose endpoint
/// signs differ is split at the bisected root so both pieces are smooth.
pub fn l1_norm_1d<F: Fn(f64) -> f64>(f: F, panels: usize) -> f64 {
    let (gx, gw) = gauss_legendre(10);
    let piece = |a: f64, b: f64| -> f64 {
        let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
        gx.iter().zip(&gw).map(|(x, w)| w * f(c + r * x)).sum::<f64>() * r
    };
    let pieces = 4 * panels.max(1);
    let h = 2.0 / pieces as f64;
    let mut total = 0.0;
    for i in 0..pieces {
        let a = -1.0 + i as f64 * h;
        let b = a + h;
        let (fa, fb) = (f(a) > 0.0, f(b) > 0.0);
        if fa == fb {
            total += piece(a, b).abs();
        } else {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if (f(mid) > 0.0) == fa {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let r = 0.5 * (lo + hi);
            total += piece(a, r).abs() + piece(r, b).abs();
        }
    }
    total
}

/// `int_{-1}^{1} |D_N(x) / 2| dx` for the de la Vallée-Poussin kernel, using
/// the quadrature's per-axis resolution as the panel count.
pub fn kernel_l1_norm(degree: usize, quad: &Quadrature) -> Result<f64> {
    check_vp_degree(degree)?;
    Ok(l1_norm_1d(|x| 0.5 * vp_kernel(degree, x).expect("degree checked"), quad.points_per_axis()))
}

/// `int_{-1}^{1} |D_N^0(x) / 2| dx` for the Dirichlet kernel.
pub fn dirichlet_l1_norm(degree: usize, quad: &Quadrature) -> f64 {
    l1_norm_1d(|x| 0.5 * dirichlet_kernel(degree, x), quad.points_per_axis())
}
