//! The data-generating densities of the simulation study.

use std::f64::consts::PI;

use rand::{Rng, RngExt};
use rand_distr::StandardNormal;

use crate::density::Dataset;
use crate::error::{invalid, Error, Result};
use crate::field::{GradientField, ScalarField};
use crate::geometry::{extract_contour, Contour, GridPoints, GridSpec, Polyline};
use crate::kernel::{KernelSpec, Profile};
use crate::quadrature::GaussLegendre;

/// One axis-aligned Gaussian bump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub mean: [f64; 2],
    pub sd: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrueModel {
    /// `(1/2π) exp(-(a²x² + y²/a²)/2)`.
    Elliptic { a: f64 },
    /// Two-bump mixture with mode heights 0.065 and 0.11.
    Mixture,
}

fn normal_pdf(t: f64, sd: f64) -> f64 {
    (-0.5 * (t / sd).powi(2)).exp() / ((2.0 * PI).sqrt() * sd)
}

impl TrueModel {
    pub fn components(&self) -> Vec<Component> {
        match *self {
            TrueModel::Elliptic { a } => vec![Component {
                weight: 1.0,
                mean: [0.0, 0.0],
                sd: [1.0 / a, a],
            }],
            TrueModel::Mixture => {
                let wide = 1.5f64.powf(0.25);
                let narrow = 0.5f64.powf(0.25);
                vec![
                    Component {
                        weight: 0.5,
                        mean: [-2.0, 2.0],
                        sd: [wide, wide],
                    },
                    Component {
                        weight: 0.5,
                        mean: [1.0, -1.0],
                        sd: [narrow, narrow],
                    },
                ]
            }
        }
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        self.components()
            .iter()
            .map(|c| c.weight * normal_pdf(x[0] - c.mean[0], c.sd[0]) * normal_pdf(x[1] - c.mean[1], c.sd[1]))
            .sum()
    }

    pub fn grad_pdf(&self, x: &[f64]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for c in self.components() {
            let v = c.weight * normal_pdf(x[0] - c.mean[0], c.sd[0]) * normal_pdf(x[1] - c.mean[1], c.sd[1]);
            for j in 0..2 {
                g[j] -= v * (x[j] - c.mean[j]) / (c.sd[j] * c.sd[j]);
            }
        }
        g
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Dataset> {
        if n == 0 {
            return Err(invalid("sample size must be positive"));
        }
        let comps = self.components();
        let mut coords = Vec::with_capacity(2 * n);
        for _ in 0..n {
            let c = if comps.len() == 1 || rng.random::<f64>() < comps[0].weight {
                comps[0]
            } else {
                comps[1]
            };
            for j in 0..2 {
                let z: f64 = rng.sample(StandardNormal);
                coords.push(c.mean[j] + c.sd[j] * z);
            }
        }
        Dataset::new(2, coords)
    }

    /// Level whose superlevel set carries probability `p`.
    pub fn level_of_probability(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid(format!("probability must lie in (0, 1), got {p}")));
        }
        match self {
            TrueModel::Elliptic { .. } => Ok((1.0 - p) / (2.0 * PI)),
            TrueModel::Mixture => Err(invalid(
                "level_of_probability is closed-form only for the elliptic model",
            )),
        }
    }

    /// Global maximum of the density.
    pub fn max_pdf(&self) -> f64 {
        match self {
            TrueModel::Elliptic { .. } => 1.0 / (2.0 * PI),
            TrueModel::Mixture => self
                .components()
                .iter()
                .map(|c| self.pdf(&ascend(self, c.mean)))
                .fold(0.0, f64::max),
        }
    }

    /// Box that comfortably contains the level sets of interest.
    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for c in self.components() {
            for j in 0..2 {
                lo[j] = lo[j].min(c.mean[j] - 6.0 * c.sd[j]);
                hi[j] = hi[j].max(c.mean[j] + 6.0 * c.sd[j]);
            }
        }
        (lo, hi)
    }

    /// The exact level set `{pdf = c}` as a closed curve (elliptic) or a fine contour (mixture).
    pub fn true_contour(&self, c: f64, n_points: usize) -> Result<Contour> {
        if !(c > 0.0 && c < self.max_pdf()) {
            return Err(invalid(format!("level {c} is not below the density maximum")));
        }
        match *self {
            TrueModel::Elliptic { a } => {
                let r0 = (-2.0 * (2.0 * PI * c).ln()).sqrt();
                let verts = (0..n_points.max(3))
                    .map(|k| {
                        let t = 2.0 * PI * k as f64 / n_points.max(3) as f64;
                        [r0 * t.cos() / a, a * r0 * t.sin()]
                    })
                    .collect();
                Ok(Contour::from_polylines(c, vec![Polyline::new(verts, true)]))
            }
            TrueModel::Mixture => {
                let (lo, hi) = self.bounding_box();
                let grid = GridSpec::new(lo.to_vec(), hi.to_vec(), vec![1024, 1024])?;
                let ct = extract_contour(self, &grid, c)?;
                if ct.is_empty() {
                    return Err(Error::EmptyContour("true mixture contour".into()));
                }
                Ok(ct)
            }
        }
    }

    /// `f ⋆ K_h`, the expectation of the kernel estimator.
    pub fn smoothed(&self, kernel: &KernelSpec, h: &[f64]) -> Result<SmoothedModel> {
        if kernel.dim() != 2 || h.len() != 2 || h.iter().any(|&v| !(v > 0.0)) {
            return Err(invalid("smoothing needs a 2-D kernel and two positive bandwidths"));
        }
        Ok(SmoothedModel {
            components: self.components(),
            profile: *kernel.profile(),
            h: [h[0], h[1]],
            rule: GaussLegendre::new(64),
        })
    }
}

/// Gradient ascent from `start` to the nearby mode.
pub fn ascend(model: &TrueModel, start: [f64; 2]) -> [f64; 2] {
    let mut x = start;
    for _ in 0..10_000 {
        let g = model.grad_pdf(&x);
        let step = [g[0] * 5.0, g[1] * 5.0];
        x = [x[0] + step[0], x[1] + step[1]];
        if step[0].hypot(step[1]) < 1e-12 {
            break;
        }
    }
    x
}

fn separable_grid(
    grid: &GridSpec,
    at: GridPoints,
    comps: &[Component],
    axis_fn: impl Fn(&Component, usize, f64) -> f64,
) -> Vec<f64> {
    let xs = grid.axis(0, at);
    let ys = grid.axis(1, at);
    let mut out = vec![0.0; xs.len() * ys.len()];
    for c in comps {
        let fx: Vec<f64> = xs.iter().map(|&x| axis_fn(c, 0, x)).collect();
        let fy: Vec<f64> = ys.iter().map(|&y| axis_fn(c, 1, y)).collect();
        for (iy, wy) in fy.iter().enumerate() {
            let row = &mut out[iy * xs.len()..(iy + 1) * xs.len()];
            for (o, wx) in row.iter_mut().zip(&fx) {
                *o += c.weight * wx * wy;
            }
        }
    }
    out
}

impl ScalarField for TrueModel {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.pdf(x)
    }

    fn sample_grid(&self, grid: &GridSpec, at: GridPoints) -> Vec<f64> {
        separable_grid(grid, at, &self.components(), |c, j, t| {
            normal_pdf(t - c.mean[j], c.sd[j])
        })
    }
}

impl GradientField for TrueModel {
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        grad.copy_from_slice(&self.grad_pdf(x));
        self.pdf(x)
    }
}

/// The model density convolved with the product kernel at bandwidth `h`.
#[derive(Debug, Clone)]
pub struct SmoothedModel {
    components: Vec<Component>,
    profile: Profile,
    h: [f64; 2],
    rule: GaussLegendre,
}

impl SmoothedModel {
    /// `∫ φ_s(t - h u) k(u) du`.
    fn axis(&self, c: &Component, j: usize, t: f64) -> f64 {
        let h = self.h[j];
        let t = t - c.mean[j];
        self.rule
            .integrate(-1.0, 1.0, |u| normal_pdf(t - h * u, c.sd[j]) * self.profile.value(u))
    }
}

impl ScalarField for SmoothedModel {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * self.axis(c, 0, x[0]) * self.axis(c, 1, x[1]))
            .sum()
    }

    fn sample_grid(&self, grid: &GridSpec, at: GridPoints) -> Vec<f64> {
        separable_grid(grid, at, &self.components, |c, j, t| self.axis(c, j, t))
    }
}

/// The four simulation scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Case1,
    Case2,
    Case3,
    Case4,
}

/// Level used for the mixture scenario, just below its lower mode.
pub const MIXTURE_LEVEL: f64 = 0.048;

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Case1, Preset::Case2, Preset::Case3, Preset::Case4];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Case1 => "case1",
            Preset::Case2 => "case2",
            Preset::Case3 => "case3",
            Preset::Case4 => "case4",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::UnknownName(format!("case '{name}'")))
    }

    pub fn model(&self) -> TrueModel {
        match self {
            Preset::Case1 | Preset::Case3 => TrueModel::Elliptic { a: 1.0 },
            Preset::Case2 => TrueModel::Elliptic { a: 2.0 },
            Preset::Case4 => TrueModel::Mixture,
        }
    }

    pub fn level(&self) -> f64 {
        let m = self.model();
        match self {
            Preset::Case1 | Preset::Case2 => m.level_of_probability(0.5).expect("elliptic"),
            Preset::Case3 => m.level_of_probability(0.95).expect("elliptic"),
            Preset::Case4 => MIXTURE_LEVEL,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_adaptive;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn elliptic_peak() {
        let m = TrueModel::Elliptic { a: 1.0 };
        assert!((m.pdf(&[0.0, 0.0]) - 1.0 / (2.0 * PI)).abs() < 1e-16);
        let m2 = TrueModel::Elliptic { a: 2.0 };
        let (x, y) = (0.3, -0.7);
        let want = (-(4.0 * x * x + y * y / 4.0) / 2.0f64).exp() / (2.0 * PI);
        assert!((m2.pdf(&[x, y]) - want).abs() < 1e-16);
    }

    #[test]
    fn mixture_mode_heights() {
        let m = TrueModel::Mixture;
        let lo = m.pdf(&ascend(&m, [-2.0, 2.0]));
        let hi = m.pdf(&ascend(&m, [1.0, -1.0]));
        assert!((lo - 0.065).abs() < 0.002, "{lo}");
        // Stated to two decimals.
        assert!((hi - 0.11).abs() < 0.005, "{hi}");
        assert!((m.pdf(&[1.0, -1.0]) - 0.11).abs() < 0.005);
    }

    #[test]
    fn gradient_matches_differences() {
        for m in [TrueModel::Elliptic { a: 2.0 }, TrueModel::Mixture] {
            for x in [[0.3, -0.4], [-1.5, 1.2], [0.9, -0.8]] {
                let g = m.grad_pdf(&x);
                for j in 0..2 {
                    let mut p = x;
                    let mut q = x;
                    p[j] += 1e-6;
                    q[j] -= 1e-6;
                    let fd = (m.pdf(&p) - m.pdf(&q)) / 2e-6;
                    assert!((fd - g[j]).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn levels_and_contours() {
        let m = TrueModel::Elliptic { a: 1.0 };
        assert_eq!(m.level_of_probability(0.5).unwrap(), 0.5 / (2.0 * PI));
        assert!((m.level_of_probability(0.95).unwrap() - 0.05 / (2.0 * PI)).abs() < 1e-17);
        assert!(TrueModel::Mixture.level_of_probability(0.5).is_err());
        let c = Preset::Case1.level();
        let ct = m.true_contour(c, 256).unwrap();
        let r0 = (2.0 * 2.0f64.ln()).sqrt();
        for v in ct.vertices() {
            assert!((v[0].hypot(v[1]) - r0).abs() < 1e-12);
            assert!((m.pdf(&v) - c).abs() < 1e-9);
        }
        let ct2 = TrueModel::Elliptic { a: 2.0 }.true_contour(c, 256).unwrap();
        let vs = ct2.vertices();
        let xmax = vs.iter().map(|v| v[0].abs()).fold(0.0, f64::max);
        let ymax = vs.iter().map(|v| v[1].abs()).fold(0.0, f64::max);
        assert!((ymax / xmax - 4.0).abs() < 1e-9);
        assert!(m.true_contour(0.2, 10).is_err());
    }

    #[test]
    fn superlevel_mass_is_p() {
        let m = TrueModel::Elliptic { a: 2.0 };
        let grid = GridSpec::new(vec![-3.0, -10.0], vec![3.0, 10.0], vec![600, 1000]).unwrap();
        let c = m.level_of_probability(0.5).unwrap();
        let vals = m.sample_grid(&grid, GridPoints::Centers);
        let mass: f64 = vals.iter().filter(|&&v| v >= c).sum::<f64>() * grid.cell_volume();
        assert!((mass - 0.5).abs() < 1e-3, "{mass}");
        let total: f64 = vals.iter().sum::<f64>() * grid.cell_volume();
        assert!((total - 1.0).abs() < 1e-6);
    }

    #[test]
    fn sampling_is_seeded_and_balanced() {
        let m = TrueModel::Mixture;
        let a = m.sample(1000, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = m.sample(1000, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a.coords(), b.coords());
    }

    #[test]
    fn smoothed_axis_quadrature_is_accurate() {
        let k = KernelSpec::simulation(2).unwrap();
        let m = TrueModel::Elliptic { a: 2.0 };
        let s = m.smoothed(&k, &[1.3, 0.4]).unwrap();
        let comps = m.components();
        for t in [-1.0, 0.0, 0.35, 2.0] {
            for j in 0..2 {
                let (h, sd) = ([1.3, 0.4][j], comps[0].sd[j]);
                let want =
                    integrate_adaptive(|u| normal_pdf(t - h * u, sd) * k.profile().value(u), -1.0, 1.0, 1e-14).unwrap();
                assert!((s.axis(&comps[0], j, t) - want).abs() < 1e-12);
            }
        }
    }
}
