//! Kernel density estimation with analytic derivatives, explicit bias correction,
//! the exact smoothed-bootstrap mean, and smoothed resampling.

use std::ops::Range;
use std::sync::Arc;

use rand::{Rng, RngExt};

use crate::error::{check_dim, invalid, Error, Result};
use crate::field::{GradientField, ScalarField};
use crate::grid::{GridPoints, GridSpec};
use crate::kernel::{ConvolvedProfile, KernelSpec, Profile, MAX_DIM, MAX_ORDER};

/// An i.i.d. sample stored row-major, plus a copy sorted along axis 0 for neighbor pruning.
#[derive(Debug, Clone)]
pub struct Dataset {
    dim: usize,
    coords: Vec<f64>,
    sorted: Vec<f64>,
    keys: Vec<f64>,
}

impl Dataset {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(invalid("coordinate count is not a multiple of the dimension"));
        }
        let n = coords.len() / dim;
        if n < 2 {
            return Err(invalid(format!("dataset needs at least 2 points, got {n}")));
        }
        if let Some(bad) = coords.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "coordinate {} of point {}",
                bad % dim,
                bad / dim
            )));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| coords[a * dim].total_cmp(&coords[b * dim]).then(a.cmp(&b)));
        let mut sorted = Vec::with_capacity(coords.len());
        for &i in &order {
            sorted.extend_from_slice(&coords[i * dim..(i + 1) * dim]);
        }
        let keys = sorted.iter().step_by(dim).copied().collect();
        Ok(Self {
            dim,
            coords,
            sorted,
            keys,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(invalid("ragged rows"));
        }
        Self::new(dim, rows.concat())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Row-major coordinates in input order.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn mean(&self) -> Vec<f64> {
        let n = self.len() as f64;
        let mut m = vec![0.0; self.dim];
        for row in self.coords.chunks_exact(self.dim) {
            for (a, v) in m.iter_mut().zip(row) {
                *a += v;
            }
        }
        m.iter_mut().for_each(|a| *a /= n);
        m
    }

    /// Per-axis sample standard deviation (n - 1 denominator).
    pub fn std_dev(&self) -> Vec<f64> {
        let m = self.mean();
        let mut s = vec![0.0; self.dim];
        for row in self.coords.chunks_exact(self.dim) {
            for j in 0..self.dim {
                s[j] += (row[j] - m[j]).powi(2);
            }
        }
        let denom = (self.len() - 1) as f64;
        s.iter().map(|v| (v / denom).sqrt()).collect()
    }

    pub fn translated(&self, offset: &[f64]) -> Result<Self> {
        check_dim(self.dim, offset.len())?;
        let coords = self
            .coords
            .chunks_exact(self.dim)
            .flat_map(|row| row.iter().zip(offset).map(|(a, b)| a + b))
            .collect();
        Self::new(self.dim, coords)
    }

    #[inline]
    fn sorted_point(&self, k: usize) -> &[f64] {
        &self.sorted[k * self.dim..(k + 1) * self.dim]
    }

    /// Sorted positions whose axis-0 coordinate lies within `radius` of `x0`.
    #[inline]
    fn window(&self, x0: f64, radius: f64) -> Range<usize> {
        let lo = self.keys.partition_point(|&k| k < x0 - radius);
        let hi = self.keys.partition_point(|&k| k <= x0 + radius);
        lo..hi.max(lo)
    }
}

/// Estimation, bias-correction and resampling bandwidth vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Bandwidths {
    pub h: Vec<f64>,
    pub l: Vec<f64>,
    pub g: Vec<f64>,
}

impl Bandwidths {
    pub fn validate(&self, dim: usize) -> Result<()> {
        for (name, v) in [("h", &self.h), ("l", &self.l), ("g", &self.g)] {
            check_positive(name, v, dim)?;
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let s = |v: &Vec<f64>| v.iter().map(|x| x * factor).collect();
        Self {
            h: s(&self.h),
            l: self.l.clone(),
            g: s(&self.g),
        }
    }

    /// Geometric mean of `h`.
    pub fn h_eff(&self) -> f64 {
        geometric_mean(&self.h)
    }
}

pub fn geometric_mean(v: &[f64]) -> f64 {
    (v.iter().map(|x| x.ln()).sum::<f64>() / v.len() as f64).exp()
}

fn check_positive(name: &str, v: &[f64], dim: usize) -> Result<()> {
    check_dim(dim, v.len())?;
    if v.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(invalid(format!("bandwidth {name} must be positive and finite: {v:?}")));
    }
    Ok(())
}

/// Requested variant at fit time.
#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorKind {
    Plain,
    BiasCorrected { l: Vec<f64> },
    BootstrapMean { g: Vec<f64> },
}

#[derive(Debug, Clone)]
enum Variant {
    Plain,
    BiasCorrected(BiasTerm),
    BootstrapMean {
        g: Vec<f64>,
        tables: Arc<Vec<ConvolvedProfile>>,
    },
}

/// Multi-indices of the partial derivatives of `f̂_l` that make up the bias term and its derivatives.
#[derive(Debug, Clone)]
struct BiasTerm {
    l: Vec<f64>,
    /// `½ μ₂ h_j²`.
    weights: Vec<f64>,
    value_idx: Vec<Multi>,
    grad_idx: Vec<Multi>,
    hess_idx: Vec<Multi>,
}

type Multi = [u8; MAX_DIM];

fn unit(j: usize, times: u8) -> Multi {
    let mut m = [0; MAX_DIM];
    m[j] = times;
    m
}

fn add(a: Multi, b: Multi) -> Multi {
    let mut m = a;
    for j in 0..MAX_DIM {
        m[j] += b[j];
    }
    m
}

impl BiasTerm {
    fn new(kernel: &KernelSpec, h: &[f64], l: &[f64]) -> Self {
        let d = h.len();
        let mu2 = kernel.constants().mu2;
        let weights = h.iter().map(|hj| 0.5 * mu2 * hj * hj).collect();
        let value_idx: Vec<Multi> = (0..d).map(|j| unit(j, 2)).collect();
        // grad_idx[m * d + j] = e_m + 2 e_j
        let grad_idx = (0..d)
            .flat_map(|m| (0..d).map(move |j| add(unit(m, 1), unit(j, 2))))
            .collect();
        // hess_idx[(a * d + b) * d + j] = e_a + e_b + 2 e_j
        let hess_idx = (0..d)
            .flat_map(|a| (0..d).flat_map(move |b| (0..d).map(move |j| add(add(unit(a, 1), unit(b, 1)), unit(j, 2)))))
            .collect();
        Self {
            l: l.to_vec(),
            weights,
            value_idx,
            grad_idx,
            hess_idx,
        }
    }
}

/// A fitted kernel density estimator. Cheap to clone; the sample is shared.
#[derive(Debug, Clone)]
pub struct DensityEstimator {
    data: Arc<Dataset>,
    kernel: KernelSpec,
    h: Vec<f64>,
    variant: Variant,
}

impl DensityEstimator {
    pub fn fit(data: Arc<Dataset>, kernel: &KernelSpec, h: &[f64], kind: EstimatorKind) -> Result<Self> {
        let d = data.dim();
        check_dim(kernel.dim(), d)?;
        check_positive("h", h, d)?;
        let variant = match kind {
            EstimatorKind::Plain => Variant::Plain,
            EstimatorKind::BiasCorrected { l } => {
                check_positive("l", &l, d)?;
                Variant::BiasCorrected(BiasTerm::new(kernel, h, &l))
            }
            EstimatorKind::BootstrapMean { g } => {
                check_positive("g", &g, d)?;
                let tables = h
                    .iter()
                    .zip(&g)
                    .map(|(&hj, &gj)| kernel.convolved_profile(hj, gj))
                    .collect::<Result<Vec<_>>>()?;
                Variant::BootstrapMean {
                    g,
                    tables: Arc::new(tables),
                }
            }
        };
        Ok(Self {
            data,
            kernel: kernel.clone(),
            h: h.to_vec(),
            variant,
        })
    }

    pub fn plain(data: Arc<Dataset>, kernel: &KernelSpec, h: &[f64]) -> Result<Self> {
        Self::fit(data, kernel, h, EstimatorKind::Plain)
    }

    pub fn dataset(&self) -> &Arc<Dataset> {
        &self.data
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn bandwidth(&self) -> &[f64] {
        &self.h
    }

    pub fn kind(&self) -> EstimatorKind {
        match &self.variant {
            Variant::Plain => EstimatorKind::Plain,
            Variant::BiasCorrected(b) => EstimatorKind::BiasCorrected { l: b.l.clone() },
            Variant::BootstrapMean { g, .. } => EstimatorKind::BootstrapMean { g: g.clone() },
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.data.dim(), x.len())?;
        Ok(self.value_unchecked(x))
    }

    pub fn eval_grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.data.dim(), x.len())?;
        let mut g = vec![0.0; x.len()];
        self.value_grad_unchecked(x, &mut g)?;
        Ok(g)
    }

    pub fn eval_hessian(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        let d = self.data.dim();
        check_dim(d, x.len())?;
        let idx: Vec<Multi> = (0..d)
            .flat_map(|a| (0..d).map(move |b| add(unit(a, 1), unit(b, 1))))
            .collect();
        let mut flat = vec![0.0; d * d];
        match &self.variant {
            Variant::Plain => self.partials(&self.h, x, &idx, &mut flat),
            Variant::BiasCorrected(b) => {
                self.partials(&self.h, x, &idx, &mut flat);
                let mut third = vec![0.0; b.hess_idx.len()];
                self.partials(&b.l, x, &b.hess_idx, &mut third);
                for ab in 0..d * d {
                    let corr: f64 = (0..d).map(|j| b.weights[j] * third[ab * d + j]).sum();
                    flat[ab] -= corr;
                }
            }
            Variant::BootstrapMean { .. } => {
                return Err(invalid("derivatives of the bootstrap-mean estimator are not tabulated"))
            }
        }
        Ok(flat.chunks(d).map(<[f64]>::to_vec).collect())
    }

    /// `β̂(x)`; zero for non-bias-corrected estimators.
    pub fn bias_at(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.data.dim(), x.len())?;
        Ok(match &self.variant {
            Variant::BiasCorrected(b) => self.bias_value(b, x),
            _ => 0.0,
        })
    }

    /// Full sum over the sample without neighbor pruning. Slow; meant for checking.
    pub fn eval_brute_force(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.data.dim(), x.len())?;
        let p = self.kernel.profile();
        let n = self.data.len() as f64;
        match &self.variant {
            Variant::Plain | Variant::BiasCorrected(_) => {
                let mut s = 0.0;
                for i in 0..self.data.len() {
                    let xi = self.data.point(i);
                    s += (0..x.len())
                        .map(|j| p.value((x[j] - xi[j]) / self.h[j]))
                        .product::<f64>();
                }
                let plain = s / (n * self.h.iter().product::<f64>());
                Ok(match &self.variant {
                    Variant::BiasCorrected(b) => {
                        let mut s2 = vec![0.0; x.len()];
                        for i in 0..self.data.len() {
                            let xi = self.data.point(i);
                            for (j, acc) in s2.iter_mut().enumerate() {
                                *acc += (0..x.len())
                                    .map(|m| {
                                        let u = (x[m] - xi[m]) / b.l[m];
                                        if m == j {
                                            p.deriv(2, u) / (b.l[m] * b.l[m])
                                        } else {
                                            p.value(u)
                                        }
                                    })
                                    .product::<f64>();
                            }
                        }
                        let norm = n * b.l.iter().product::<f64>();
                        plain - s2.iter().zip(&b.weights).map(|(s, w)| w * s / norm).sum::<f64>()
                    }
                    _ => plain,
                })
            }
            Variant::BootstrapMean { tables, .. } => {
                let mut s = 0.0;
                for i in 0..self.data.len() {
                    let xi = self.data.point(i);
                    s += (0..x.len()).map(|j| tables[j].value(x[j] - xi[j])).product::<f64>();
                }
                Ok(s / n)
            }
        }
    }

    #[inline]
    fn value_unchecked(&self, x: &[f64]) -> f64 {
        match &self.variant {
            Variant::Plain => plain_value(&self.data, self.kernel.profile(), &self.h, x),
            Variant::BiasCorrected(b) => {
                plain_value(&self.data, self.kernel.profile(), &self.h, x) - self.bias_value(b, x)
            }
            Variant::BootstrapMean { tables, .. } => mean_value(&self.data, tables, x),
        }
    }

    fn bias_value(&self, b: &BiasTerm, x: &[f64]) -> f64 {
        let d = x.len();
        let mut second = [0.0; MAX_DIM];
        self.partials(&b.l, x, &b.value_idx, &mut second[..d]);
        combine_bias(&b.weights, &second[..d])
    }

    fn value_grad_unchecked(&self, x: &[f64], grad: &mut [f64]) -> Result<f64> {
        let d = x.len();
        let mut buf = [0.0; MAX_DIM + 1];
        let idx = value_grad_indices(d);
        self.partials(&self.h, x, &idx[..=d], &mut buf[..=d]);
        grad.copy_from_slice(&buf[1..=d]);
        match &self.variant {
            Variant::Plain => Ok(buf[0]),
            Variant::BiasCorrected(b) => {
                let mut second = [0.0; MAX_DIM];
                self.partials(&b.l, x, &b.value_idx, &mut second[..d]);
                let mut third = [0.0; MAX_DIM * MAX_DIM];
                self.partials(&b.l, x, &b.grad_idx, &mut third[..d * d]);
                for m in 0..d {
                    grad[m] -= combine_bias(&b.weights, &third[m * d..(m + 1) * d]);
                }
                Ok(buf[0] - combine_bias(&b.weights, &second[..d]))
            }
            Variant::BootstrapMean { .. } => {
                Err(invalid("derivatives of the bootstrap-mean estimator are not tabulated"))
            }
        }
    }

    /// `out[k] = ∂^{idx[k]} f̂_bw(x)` using the pruned sum.
    fn partials(&self, bw: &[f64], x: &[f64], idx: &[Multi], out: &mut [f64]) {
        partial_sums(&self.data, self.kernel.profile(), bw, x, idx, out);
    }

    /// Evaluates the estimator at grid nodes or centers by scattering each sample point
    /// onto the cells it reaches. Agrees with pointwise `eval` up to rounding.
    pub fn eval_grid(&self, grid: &GridSpec, at: GridPoints) -> Result<Vec<f64>> {
        let d = self.data.dim();
        check_dim(d, grid.dim())?;
        if d > 2 {
            let mut p = vec![0.0; d];
            return Ok((0..grid.len(at))
                .map(|k| {
                    grid.point(k, at, &mut p);
                    self.value_unchecked(&p)
                })
                .collect());
        }
        let axes: Vec<Vec<f64>> = (0..d).map(|j| grid.axis(j, at)).collect();
        let profile = self.kernel.profile();
        let n = self.data.len() as f64;
        let out = match &self.variant {
            Variant::Plain => {
                let mut acc = scatter(&self.data, &axes, &self.h, |_, u| profile.value(u));
                let norm = n * self.h.iter().product::<f64>();
                acc.iter_mut().for_each(|v| *v /= norm);
                acc
            }
            Variant::BiasCorrected(b) => {
                let mut plain = scatter(&self.data, &axes, &self.h, |_, u| profile.value(u));
                let norm = n * self.h.iter().product::<f64>();
                let norm_l = n * b.l.iter().product::<f64>();
                let seconds: Vec<Vec<f64>> = (0..d)
                    .map(|j| {
                        let inv2 = 1.0 / (b.l[j] * b.l[j]);
                        scatter(&self.data, &axes, &b.l, |axis, u| {
                            if axis == j {
                                profile.deriv(2, u) * inv2
                            } else {
                                profile.value(u)
                            }
                        })
                    })
                    .collect();
                let mut second = [0.0; MAX_DIM];
                for (k, v) in plain.iter_mut().enumerate() {
                    for j in 0..d {
                        second[j] = seconds[j][k] / norm_l;
                    }
                    *v = *v / norm - combine_bias(&b.weights, &second[..d]);
                }
                plain
            }
            Variant::BootstrapMean { tables, .. } => {
                let widths: Vec<f64> = tables.iter().map(|t| t.half_width()).collect();
                let mut acc = scatter_shifted(&self.data, &axes, &widths, |axis, t| tables[axis].value(t));
                acc.iter_mut().for_each(|v| *v /= n);
                acc
            }
        };
        Ok(out)
    }
}

#[inline]
fn combine_bias(weights: &[f64], second: &[f64]) -> f64 {
    let mut s = 0.0;
    for (w, v) in weights.iter().zip(second) {
        s += w * v;
    }
    s
}

fn value_grad_indices(d: usize) -> [Multi; MAX_DIM + 1] {
    let mut idx = [[0; MAX_DIM]; MAX_DIM + 1];
    for j in 0..d {
        idx[j + 1] = unit(j, 1);
    }
    idx
}

#[inline]
fn plain_value(data: &Dataset, profile: &Profile, bw: &[f64], x: &[f64]) -> f64 {
    let d = x.len();
    let mut s = 0.0;
    'points: for k in data.window(x[0], bw[0]) {
        let p = data.sorted_point(k);
        let mut prod = 1.0;
        for j in 0..d {
            let u = (x[j] - p[j]) / bw[j];
            if u.abs() >= 1.0 {
                continue 'points;
            }
            prod *= profile.value(u);
        }
        s += prod;
    }
    s / (data.len() as f64 * bw.iter().product::<f64>())
}

fn mean_value(data: &Dataset, tables: &[ConvolvedProfile], x: &[f64]) -> f64 {
    let d = x.len();
    let mut s = 0.0;
    'points: for k in data.window(x[0], tables[0].half_width()) {
        let p = data.sorted_point(k);
        let mut prod = 1.0;
        for j in 0..d {
            let t = x[j] - p[j];
            if t.abs() >= tables[j].half_width() {
                continue 'points;
            }
            prod *= tables[j].value(t);
        }
        s += prod;
    }
    s / data.len() as f64
}

fn partial_sums(data: &Dataset, profile: &Profile, bw: &[f64], x: &[f64], idx: &[Multi], out: &mut [f64]) {
    let d = x.len();
    let max_order = idx.iter().flat_map(|m| m[..d].iter()).copied().max().unwrap_or(0) as usize;
    debug_assert!(max_order <= MAX_ORDER);
    let mut inv = [0.0; MAX_DIM];
    for j in 0..d {
        inv[j] = 1.0 / bw[j];
    }
    out.iter_mut().for_each(|v| *v = 0.0);
    let mut table = [[0.0; MAX_ORDER + 1]; MAX_DIM];
    'points: for k in data.window(x[0], bw[0]) {
        let p = data.sorted_point(k);
        for j in 0..d {
            let u = (x[j] - p[j]) / bw[j];
            if u.abs() >= 1.0 {
                continue 'points;
            }
            let row = &mut table[j][..=max_order];
            profile.derivs_upto(u, row);
            let mut scale = 1.0;
            for v in row.iter_mut().skip(1) {
                scale *= inv[j];
                *v *= scale;
            }
        }
        for (m, o) in idx.iter().zip(out.iter_mut()) {
            let mut prod = 1.0;
            for j in 0..d {
                prod *= table[j][m[j] as usize];
            }
            *o += prod;
        }
    }
    let norm = data.len() as f64 * bw.iter().product::<f64>();
    out.iter_mut().for_each(|v| *v /= norm);
}

/// Sums `Π_j φ(j, (a_j - X_ij)/bw_j)` onto the tensor grid `axes` (1-D or 2-D).
fn scatter<F: Fn(usize, f64) -> f64>(data: &Dataset, axes: &[Vec<f64>], bw: &[f64], phi: F) -> Vec<f64> {
    scatter_with(data, axes, bw, |axis, a, x| phi(axis, (a - x) / bw[axis]))
}

/// Like [`scatter`] but `φ` receives the raw offset `a_j - X_ij` and `reach` bounds its support.
fn scatter_shifted<F: Fn(usize, f64) -> f64>(data: &Dataset, axes: &[Vec<f64>], reach: &[f64], phi: F) -> Vec<f64> {
    scatter_with(data, axes, reach, |axis, a, x| phi(axis, a - x))
}

fn scatter_with<F: Fn(usize, f64, f64) -> f64>(
    data: &Dataset,
    axes: &[Vec<f64>],
    reach: &[f64],
    weight: F,
) -> Vec<f64> {
    let d = axes.len();
    let counts: Vec<usize> = axes.iter().map(Vec::len).collect();
    let mut acc = vec![0.0; counts.iter().product()];
    let mut ranges = [(0usize, 0usize); MAX_DIM];
    let mut weights: Vec<Vec<f64>> = counts.iter().map(|&c| Vec::with_capacity(c)).collect();
    'points: for k in 0..data.len() {
        let p = data.sorted_point(k);
        for j in 0..d {
            let lo = axes[j].partition_point(|&a| a - p[j] <= -reach[j]);
            let hi = axes[j].partition_point(|&a| a - p[j] < reach[j]);
            if lo >= hi {
                continue 'points;
            }
            ranges[j] = (lo, hi);
            weights[j].clear();
            weights[j].extend(axes[j][lo..hi].iter().map(|&a| weight(j, a, p[j])));
        }
        match d {
            1 => {
                for (i, w) in weights[0].iter().enumerate() {
                    acc[ranges[0].0 + i] += w;
                }
            }
            2 => {
                let nx = counts[0];
                for (iy, wy) in weights[1].iter().enumerate() {
                    let row = (ranges[1].0 + iy) * nx + ranges[0].0;
                    for (ix, wx) in weights[0].iter().enumerate() {
                        acc[row + ix] += wx * wy;
                    }
                }
            }
            _ => unreachable!("scatter handles 1-D and 2-D grids"),
        }
    }
    acc
}

impl ScalarField for DensityEstimator {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.data.dim());
        self.value_unchecked(x)
    }

    fn sample_grid(&self, grid: &GridSpec, at: GridPoints) -> Vec<f64> {
        self.eval_grid(grid, at).expect("grid dimension matches estimator")
    }
}

impl GradientField for DensityEstimator {
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        match self.value_grad_unchecked(x, grad) {
            Ok(v) => v,
            Err(_) => {
                grad.iter_mut().for_each(|g| *g = f64::NAN);
                f64::NAN
            }
        }
    }
}

/// `β̂(x) = ½ μ₂ Σ_j h_j² ∂²_j f̂_l(x)`.
pub fn bias_term(data: Arc<Dataset>, kernel: &KernelSpec, h: &[f64], l: &[f64], x: &[f64]) -> Result<f64> {
    let e = DensityEstimator::fit(data, kernel, h, EstimatorKind::BiasCorrected { l: l.to_vec() })?;
    e.bias_at(x)
}

/// `f̂^{*,E}(x) = (1/n) Σ_i Π_j (k_{h_j} ⋆ k_{g_j})(x_j - X_ij)`.
pub fn bootstrap_mean_eval(data: Arc<Dataset>, kernel: &KernelSpec, h: &[f64], g: &[f64], x: &[f64]) -> Result<f64> {
    let e = DensityEstimator::fit(data, kernel, h, EstimatorKind::BootstrapMean { g: g.to_vec() })?;
    e.eval(x)
}

/// Draws `count` points from `f̂_g`: a uniformly chosen sample point plus `g ⊙ ε`.
pub fn sample_smoothed<R: Rng + ?Sized>(
    data: &Dataset,
    kernel: &KernelSpec,
    g: &[f64],
    count: usize,
    rng: &mut R,
) -> Result<Dataset> {
    let d = data.dim();
    check_positive("g", g, d)?;
    if count == 0 {
        return Err(invalid("sample count must be positive"));
    }
    let n = data.len();
    let sampler = kernel.sampler();
    let mut coords = Vec::with_capacity(count * d);
    for _ in 0..count {
        let base = data.point(rng.random_range(0..n));
        for j in 0..d {
            coords.push(base[j] + g[j] * sampler.quantile(rng.random::<f64>()));
        }
    }
    Dataset::new(d, coords)
}

/// Multinomial resample of the data.
pub fn sample_with_replacement<R: Rng + ?Sized>(data: &Dataset, count: usize, rng: &mut R) -> Result<Dataset> {
    if count == 0 {
        return Err(invalid("sample count must be positive"));
    }
    let n = data.len();
    let mut coords = Vec::with_capacity(count * data.dim());
    for _ in 0..count {
        coords.extend_from_slice(data.point(rng.random_range(0..n)));
    }
    Dataset::new(data.dim(), coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_data(n: usize, seed: u64) -> Arc<Dataset> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coords = (0..2 * n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        Arc::new(Dataset::new(2, coords).unwrap())
    }

    #[test]
    fn two_point_example() {
        let data = Arc::new(Dataset::new(1, vec![0.0, 10.0]).unwrap());
        let k = KernelSpec::simulation(1).unwrap();
        let e = DensityEstimator::plain(data, &k, &[1.0]).unwrap();
        assert!((e.eval(&[0.0]).unwrap() - 693.0 / 1024.0).abs() < 1e-15);
        assert_eq!(e.eval(&[5.0]).unwrap(), 0.0);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(Dataset::new(2, vec![0.0, 1.0]).is_err());
        assert!(Dataset::new(1, vec![0.0, f64::NAN]).is_err());
        let data = random_data(10, 1);
        let k = KernelSpec::simulation(2).unwrap();
        assert!(DensityEstimator::plain(data.clone(), &k, &[0.5, 0.0]).is_err());
        assert!(DensityEstimator::plain(data, &k, &[0.5]).is_err());
    }

    #[test]
    fn bias_corrected_is_plain_minus_bias() {
        let data = random_data(300, 2);
        let k = KernelSpec::simulation(2).unwrap();
        let h = [0.6, 0.8];
        let l = [0.9, 1.1];
        let plain = DensityEstimator::plain(data.clone(), &k, &h).unwrap();
        let bc = DensityEstimator::fit(data, &k, &h, EstimatorKind::BiasCorrected { l: l.to_vec() }).unwrap();
        for x in [[0.1, 0.2], [-1.0, 0.5], [1.7, -1.9]] {
            let want = plain.eval(&x).unwrap() - bc.bias_at(&x).unwrap();
            assert_eq!(bc.eval(&x).unwrap(), want);
        }
    }

    #[test]
    fn bias_matches_hessian_trace_for_scalar_bandwidth() {
        let data = random_data(200, 3);
        let k = KernelSpec::simulation(2).unwrap();
        let (h, l) = (0.7, 0.9);
        let fl = DensityEstimator::plain(data.clone(), &k, &[l, l]).unwrap();
        for x in [[0.0, 0.0], [0.4, -0.3]] {
            let hs = fl.eval_hessian(&x).unwrap();
            let want = 0.5 * h * h * k.constants().mu2 * (hs[0][0] + hs[1][1]);
            let got = bias_term(data.clone(), &k, &[h, h], &[l, l], &x).unwrap();
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn grid_scatter_matches_pointwise() {
        let data = random_data(150, 4);
        let k = KernelSpec::simulation(2).unwrap();
        let grid = GridSpec::uniform(2, -3.0, 3.0, 20).unwrap();
        let kinds = [
            EstimatorKind::Plain,
            EstimatorKind::BiasCorrected { l: vec![0.9, 1.0] },
            EstimatorKind::BootstrapMean { g: vec![0.5, 0.6] },
        ];
        for kind in kinds {
            let e = DensityEstimator::fit(data.clone(), &k, &[0.6, 0.7], kind).unwrap();
            for at in [GridPoints::Nodes, GridPoints::Centers] {
                let vals = e.eval_grid(&grid, at).unwrap();
                let mut p = [0.0; 2];
                for (i, v) in vals.iter().enumerate() {
                    grid.point(i, at, &mut p);
                    let w = e.eval(&p).unwrap();
                    assert!((v - w).abs() <= 1e-14 * (1.0 + w.abs()), "{i}: {v} vs {w}");
                }
            }
        }
    }

    #[test]
    fn smoothed_draws_stay_near_data() {
        let data = random_data(50, 5);
        let k = KernelSpec::simulation(2).unwrap();
        let g = [0.3, 0.2];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = sample_smoothed(&data, &k, &g, 500, &mut rng).unwrap();
        for i in 0..s.len() {
            let p = s.point(i);
            let near = (0..data.len()).any(|m| {
                let q = data.point(m);
                (p[0] - q[0]).abs() <= g[0] && (p[1] - q[1]).abs() <= g[1]
            });
            assert!(near);
        }
    }
}
