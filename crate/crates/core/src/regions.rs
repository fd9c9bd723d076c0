//! Confidence regions, their grid rasterization, and coverage verdicts.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use rayon::prelude::*;

use crate::density::DensityEstimator;
use crate::error::{check_dim, invalid, Result};
use crate::field::{GradientField, ScalarField};
use crate::flow::{hitting_point, trace_to_level, FlowOptions, FlowStatus};
use crate::geometry::{dist_to_contour, point_segment_distance, Contour, GridPoints, GridSpec, Shape};

/// Lower bound applied to vertical bands so they never include the zero-density region.
pub const DENSITY_FLOOR: f64 = 1e-6;

/// Largest max/min gradient ratio used by the gradient-tube prefilter.
pub const GRADIENT_RATIO_CAP: f64 = 10.0;

#[derive(Debug, Clone)]
pub enum Region {
    /// `{x : max(lo, floor) ≤ F(x) ≤ hi}`.
    Vertical {
        estimator: Arc<DensityEstimator>,
        lo: f64,
        hi: f64,
        floor: f64,
    },
    /// `{x : d(x, contour) ≤ radius}`.
    Tube {
        contour: Arc<Contour>,
        radius: f64,
    },
    GradientTube(Arc<GradientTube>),
    Union(Box<Region>, Box<Region>),
    Difference(Box<Region>, Box<Region>),
}

impl Region {
    pub fn vertical(estimator: Arc<DensityEstimator>, lo: f64, hi: f64) -> Self {
        Region::Vertical {
            estimator,
            lo,
            hi,
            floor: DENSITY_FLOOR,
        }
    }

    /// `{F ≥ c}`.
    pub fn superlevel(estimator: Arc<DensityEstimator>, c: f64) -> Self {
        Self::vertical(estimator, c, f64::INFINITY)
    }

    pub fn tube(contour: Arc<Contour>, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) {
            return Err(invalid(format!("tube radius must be nonnegative, got {radius}")));
        }
        Ok(Region::Tube { contour, radius })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Vertical {
                estimator,
                lo,
                hi,
                floor,
            } => vertical_test(estimator.value(x), *lo, *hi, *floor),
            Region::Tube { contour, radius } => dist_to_contour(x, contour).map(|d| d <= *radius).unwrap_or(false),
            Region::GradientTube(t) => t.contains(x),
            Region::Union(a, b) => a.contains(x) || b.contains(x),
            Region::Difference(a, b) => a.contains(x) && !b.contains(x),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Vertical { estimator, .. } => estimator.dim(),
            Region::Tube { contour, .. } => contour.dim(),
            Region::GradientTube(t) => t.estimator.dim(),
            Region::Union(a, _) | Region::Difference(a, _) => a.dim(),
        }
    }
}

#[inline]
pub fn vertical_test(value: f64, lo: f64, hi: f64, floor: f64) -> bool {
    value >= lo.max(floor) && value <= hi
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TubeWeighting {
    /// `‖∇F(ẑ)‖ ‖ẑ - x‖ ≤ q`.
    Gradient,
    /// `‖ẑ - x‖ ≤ q`.
    Unit,
}

/// Points whose flow line reaches the level within a weighted displacement `q`.
#[derive(Debug)]
pub struct GradientTube {
    estimator: Arc<DensityEstimator>,
    c: f64,
    q: f64,
    flow: FlowOptions,
    weighting: TubeWeighting,
    /// Prefilter slope: a point is traced only if `|F(x) - c| ≤ q · slope`.
    slope: f64,
    cap_breached: bool,
    non_hit: AtomicUsize,
}

/// Outcome of tracing from one query point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TubeVerdict {
    Filtered,
    NonHit,
    Criterion(f64),
}

impl GradientTube {
    /// `reference` is the estimated level set on which gradient norms are measured for the prefilter.
    pub fn new(
        estimator: Arc<DensityEstimator>,
        c: f64,
        q: f64,
        flow: FlowOptions,
        weighting: TubeWeighting,
        reference: &Contour,
    ) -> Result<Self> {
        if !(q >= 0.0) {
            return Err(invalid(format!("tube quantile must be nonnegative, got {q}")));
        }
        flow.validate()?;
        let (min_g, max_g) = gradient_range(&estimator, reference)?;
        let ratio = if min_g > 0.0 { max_g / min_g } else { f64::INFINITY };
        let cap_breached = ratio > GRADIENT_RATIO_CAP;
        let ratio = ratio.min(GRADIENT_RATIO_CAP);
        let slope = match weighting {
            TubeWeighting::Gradient => ratio,
            TubeWeighting::Unit => ratio * max_g,
        };
        Ok(Self {
            estimator,
            c,
            q,
            flow,
            weighting,
            slope,
            cap_breached,
            non_hit: AtomicUsize::new(0),
        })
    }

    pub fn quantile(&self) -> f64 {
        self.q
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn cap_breached(&self) -> bool {
        self.cap_breached
    }

    pub fn non_hit_count(&self) -> usize {
        self.non_hit.load(Ordering::Relaxed)
    }

    pub fn with_quantile(&self, q: f64) -> Self {
        Self {
            estimator: self.estimator.clone(),
            c: self.c,
            q,
            flow: self.flow,
            weighting: self.weighting,
            slope: self.slope,
            cap_breached: self.cap_breached,
            non_hit: AtomicUsize::new(0),
        }
    }

    /// Traces from `x` when `|F(x) - c| ≤ limit · slope`.
    pub fn verdict(&self, x: &[f64], value: f64, limit: f64) -> TubeVerdict {
        if (value - self.c).abs() > limit * self.slope {
            return TubeVerdict::Filtered;
        }
        let trace = match trace_to_level(self.estimator.as_ref(), x, self.c, &self.flow) {
            Ok(t) => t,
            Err(_) => return TubeVerdict::NonHit,
        };
        if trace.status != FlowStatus::Hit {
            return TubeVerdict::NonHit;
        }
        let hit = hitting_point(&trace).expect("hit trace is nonempty");
        let disp = hit
            .point
            .iter()
            .zip(x)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let weight = match self.weighting {
            TubeWeighting::Gradient => {
                let mut g = [0.0; 3];
                self.estimator.value_and_gradient(&hit.point, &mut g[..x.len()]);
                g[..x.len()].iter().map(|v| v * v).sum::<f64>().sqrt()
            }
            TubeWeighting::Unit => 1.0,
        };
        TubeVerdict::Criterion(weight * disp)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self.verdict(x, self.estimator.value(x), self.q) {
            TubeVerdict::Criterion(v) => v <= self.q,
            TubeVerdict::NonHit => {
                self.non_hit.fetch_add(1, Ordering::Relaxed);
                false
            }
            TubeVerdict::Filtered => false,
        }
    }
}

fn gradient_range(est: &DensityEstimator, ct: &Contour) -> Result<(f64, f64)> {
    let verts = ct.vertices();
    if verts.is_empty() {
        return Err(crate::Error::EmptyContour("gradient tube reference".into()));
    }
    let mut g = vec![0.0; est.dim()];
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for v in &verts {
        est.value_and_gradient(v, &mut g);
        let n = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        lo = lo.min(n);
        hi = hi.max(n);
    }
    Ok((lo, hi))
}

/// Inner and outer regions sandwiching a superlevel set.
#[derive(Debug, Clone)]
pub struct RegionPair {
    pub outer: Region,
    pub inner: Region,
    pub target: Target,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    TrueSet,
    SmoothedSet,
}

impl RegionPair {
    /// `outer = {F ≥ c - a}`, `inner = {F ≥ c + a}`.
    pub fn vertical(estimator: Arc<DensityEstimator>, c: f64, a: f64, target: Target) -> Self {
        Self {
            outer: Region::vertical(estimator.clone(), c - a, f64::INFINITY),
            inner: Region::vertical(estimator, c + a, f64::INFINITY),
            target,
        }
    }

    /// `outer = L̂ ∪ tube`, `inner = L̂ \ tube`.
    pub fn horizontal(superlevel: Region, tube: Region, target: Target) -> Self {
        Self {
            outer: Region::Union(Box::new(superlevel.clone()), Box::new(tube.clone())),
            inner: Region::Difference(Box::new(superlevel), Box::new(tube)),
            target,
        }
    }
}

/// Cell-center membership of a region on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMask {
    pub grid: GridSpec,
    pub inside: Vec<bool>,
}

impl RegionMask {
    pub fn new(grid: GridSpec, inside: Vec<bool>) -> Self {
        debug_assert_eq!(inside.len(), grid.len(GridPoints::Centers));
        Self { grid, inside }
    }

    pub fn count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn volume(&self) -> f64 {
        self.count() as f64 * self.grid.cell_volume()
    }

    /// `Σ pdf(center) · cell volume` over contained cells; `pdf` holds center values.
    pub fn mass(&self, pdf: &[f64]) -> f64 {
        let s: f64 = self.inside.iter().zip(pdf).filter(|(b, _)| **b).map(|(_, p)| p).sum();
        s * self.grid.cell_volume()
    }

    pub fn touches_boundary(&self) -> bool {
        self.inside
            .iter()
            .enumerate()
            .any(|(k, &b)| b && self.grid.is_boundary_cell(k))
    }

    pub fn is_subset_of(&self, other: &RegionMask) -> bool {
        self.inside.iter().zip(&other.inside).all(|(a, b)| !a || *b)
    }
}

pub fn membership_mask(region: &Region, grid: &GridSpec) -> Result<RegionMask> {
    check_dim(region.dim(), grid.dim())?;
    let inside = match region {
        Region::Vertical {
            estimator,
            lo,
            hi,
            floor,
        } => estimator
            .eval_grid(grid, GridPoints::Centers)?
            .into_iter()
            .map(|v| vertical_test(v, *lo, *hi, *floor))
            .collect(),
        Region::Tube { contour, radius } if contour.dim() == 2 => tube_mask(contour, *radius, grid),
        Region::GradientTube(t) => {
            let values = t.estimator.eval_grid(grid, GridPoints::Centers)?;
            let verdicts = gradient_tube_verdicts(t, grid, &values, t.q);
            let non_hit = verdicts.iter().filter(|v| matches!(v, TubeVerdict::NonHit)).count();
            t.non_hit.fetch_add(non_hit, Ordering::Relaxed);
            verdicts
                .iter()
                .map(|v| matches!(v, TubeVerdict::Criterion(c) if *c <= t.q))
                .collect()
        }
        Region::Union(a, b) => {
            let (ma, mb) = (membership_mask(a, grid)?, membership_mask(b, grid)?);
            ma.inside.iter().zip(&mb.inside).map(|(x, y)| *x || *y).collect()
        }
        Region::Difference(a, b) => {
            let (ma, mb) = (membership_mask(a, grid)?, membership_mask(b, grid)?);
            ma.inside.iter().zip(&mb.inside).map(|(x, y)| *x && !*y).collect()
        }
        _ => {
            let mut p = vec![0.0; grid.dim()];
            (0..grid.len(GridPoints::Centers))
                .map(|k| {
                    grid.point(k, GridPoints::Centers, &mut p);
                    region.contains(&p)
                })
                .collect()
        }
    };
    Ok(RegionMask::new(grid.clone(), inside))
}

/// Traces from every cell center that passes the prefilter at `limit`; `values` are the
/// estimator's center values.
pub fn gradient_tube_verdicts(t: &GradientTube, grid: &GridSpec, values: &[f64], limit: f64) -> Vec<TubeVerdict> {
    (0..values.len())
        .into_par_iter()
        .map(|k| {
            if (values[k] - t.c).abs() > limit * t.slope {
                return TubeVerdict::Filtered;
            }
            let mut p = [0.0; 3];
            grid.point(k, GridPoints::Centers, &mut p[..grid.dim()]);
            t.verdict(&p[..grid.dim()], values[k], limit)
        })
        .collect()
}

/// Marks every center within `radius` of some contour segment.
pub fn tube_mask(contour: &Contour, radius: f64, grid: &GridSpec) -> Vec<bool> {
    let nx = grid.resolution()[0];
    let ny = grid.resolution()[1];
    let (dx, dy) = (grid.cell_size(0), grid.cell_size(1));
    let (x0, y0) = (grid.lower()[0], grid.lower()[1]);
    let mut inside = vec![false; nx * ny];
    let Shape::Curves(lines) = &contour.shape else {
        return inside;
    };
    let index_range = |lo: f64, hi: f64, origin: f64, step: f64, n: usize| {
        let a = ((lo - origin) / step - 0.5).floor().max(0.0) as usize;
        let b = (((hi - origin) / step - 0.5).ceil().max(-1.0) + 1.0).min(n as f64) as usize;
        a..b
    };
    for line in lines {
        let single = (line.vertices.len() == 1).then(|| (line.vertices[0], line.vertices[0]));
        for (a, b) in (0..line.segment_count()).map(|k| line.segment(k)).chain(single) {
            let xs = index_range(a[0].min(b[0]) - radius, a[0].max(b[0]) + radius, x0, dx, nx);
            let ys = index_range(a[1].min(b[1]) - radius, a[1].max(b[1]) + radius, y0, dy, ny);
            for iy in ys {
                let py = grid.coord(1, iy, GridPoints::Centers);
                for ix in xs.clone() {
                    let k = iy * nx + ix;
                    if inside[k] {
                        continue;
                    }
                    let px = grid.coord(0, ix, GridPoints::Centers);
                    if point_segment_distance([px, py], a, b).0 <= radius {
                        inside[k] = true;
                    }
                }
            }
        }
    }
    inside
}

pub fn lebesgue_volume(region: &Region, grid: &GridSpec) -> Result<f64> {
    Ok(membership_mask(region, grid)?.volume())
}

pub fn probability_mass<P: ScalarField + ?Sized>(region: &Region, pdf: &P, grid: &GridSpec) -> Result<f64> {
    let mask = membership_mask(region, grid)?;
    Ok(mask.mass(&pdf.sample_grid(grid, GridPoints::Centers)))
}

/// True iff every probe point lies in the region.
pub fn covers_isosurface(region: &Region, probes: &[Vec<f64>]) -> bool {
    probes.iter().all(|p| region.contains(p))
}

/// `inner ⊆ {pdf ≥ c} ⊆ outer` on every cell center; `truth[k]` is `pdf(center_k) ≥ c`.
pub fn covers_levelset_pair(pair: &RegionPair, truth: &[bool], grid: &GridSpec) -> Result<bool> {
    let inner = membership_mask(&pair.inner, grid)?;
    let outer = membership_mask(&pair.outer, grid)?;
    Ok(pair_covers(&inner.inside, &outer.inside, truth))
}

pub fn pair_covers(inner: &[bool], outer: &[bool], truth: &[bool]) -> bool {
    inner
        .iter()
        .zip(outer)
        .zip(truth)
        .all(|((i, o), t)| (!i || *t) && (!t || *o))
}

/// `n` points spaced evenly in arc length along a 2-D contour (all points for 1-D).
pub fn probes_from_contour(ct: &Contour, n: usize) -> Vec<Vec<f64>> {
    match &ct.shape {
        Shape::Points(p) => p.iter().map(|&x| vec![x]).collect(),
        Shape::Curves(lines) => {
            let total = ct.total_length();
            if total == 0.0 || n == 0 {
                return ct.vertices();
            }
            let spacing = total / n as f64;
            let mut out = Vec::with_capacity(n);
            let mut carry = 0.0;
            for line in lines {
                for k in 0..line.segment_count() {
                    let (a, b) = line.segment(k);
                    let len = (b[0] - a[0]).hypot(b[1] - a[1]);
                    let mut s = carry;
                    while s < len {
                        let t = s / len;
                        out.push(vec![a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
                        s += spacing;
                    }
                    carry = s - len;
                }
            }
            out
        }
    }
}
