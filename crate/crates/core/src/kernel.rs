//! Product kernels built from the compact polynomial profile `C_p (1 - u^2)^p`.

use std::sync::Arc;

use crate::error::{check_dim, invalid, Error, Result};
use crate::quadrature::{integrate_adaptive, GaussLegendre};

/// Largest dimension supported by the stack-allocated evaluation paths.
pub const MAX_DIM: usize = 3;

/// Highest derivative order tabulated for the profile.
pub const MAX_ORDER: usize = 4;

const CDF_INTERVALS: usize = 4096;
const DEFAULT_CONV_KNOTS: usize = 4097;
const CONSTANT_TOL: f64 = 1e-12;

/// One derivative of the profile stored as `u^parity * sum_k c_k w^k` with `w = u^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct EvenOddPoly {
    odd: bool,
    len: usize,
    coeffs: [f64; 8],
}

impl EvenOddPoly {
    #[inline]
    fn eval(&self, u: f64) -> f64 {
        let w = u * u;
        let mut acc = 0.0;
        for k in (0..self.len).rev() {
            acc = acc * w + self.coeffs[k];
        }
        if self.odd {
            acc * u
        } else {
            acc
        }
    }

    fn derivative(&self) -> Self {
        let mut out = [0.0; 8];
        let len;
        if self.odd {
            // d/du sum c_k u^{2k+1} = sum (2k+1) c_k w^k
            for k in 0..self.len {
                out[k] = (2 * k + 1) as f64 * self.coeffs[k];
            }
            len = self.len;
        } else {
            // d/du sum c_k u^{2k} = u * sum_{k>=1} 2k c_k w^{k-1}
            for k in 1..self.len {
                out[k - 1] = (2 * k) as f64 * self.coeffs[k];
            }
            len = self.len.saturating_sub(1).max(1);
        }
        Self {
            odd: !self.odd,
            len,
            coeffs: out,
        }
    }
}

/// The 1-D profile `k(u) = C_p (1 - u^2)^p` on [-1, 1], zero outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile {
    power: u32,
    derivs: [EvenOddPoly; MAX_ORDER + 1],
}

impl Profile {
    pub fn new(power: u32) -> Result<Self> {
        if !(1..=6).contains(&power) {
            return Err(invalid(format!("profile power {power} outside 1..=6")));
        }
        let p = power as usize;
        let mut norm = 0.5;
        for k in 1..=p {
            norm *= (2 * k + 1) as f64 / (2 * k) as f64;
        }
        let mut coeffs = [0.0; 8];
        let mut binom = 1.0;
        for (k, c) in coeffs.iter_mut().enumerate().take(p + 1) {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            *c = norm * sign * binom;
            binom = binom * (p - k) as f64 / (k + 1) as f64;
        }
        let base = EvenOddPoly {
            odd: false,
            len: p + 1,
            coeffs,
        };
        let mut derivs = [base; MAX_ORDER + 1];
        for r in 1..=MAX_ORDER {
            derivs[r] = derivs[r - 1].derivative();
        }
        Ok(Self { power, derivs })
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    /// `C_p`, the value at zero.
    pub fn peak(&self) -> f64 {
        self.derivs[0].coeffs[0]
    }

    #[inline]
    pub fn value(&self, u: f64) -> f64 {
        if u.abs() >= 1.0 {
            0.0
        } else {
            self.derivs[0].eval(u)
        }
    }

    /// Derivative of order `r` (0..=4).
    #[inline]
    pub fn deriv(&self, r: usize, u: f64) -> f64 {
        if u.abs() >= 1.0 {
            0.0
        } else {
            self.derivs[r].eval(u)
        }
    }

    /// Fills `out[r]` with the derivative of order `r` for `r < out.len()`.
    #[inline]
    pub fn derivs_upto(&self, u: f64, out: &mut [f64]) {
        if u.abs() >= 1.0 {
            out.iter_mut().for_each(|v| *v = 0.0);
        } else {
            for (r, v) in out.iter_mut().enumerate() {
                *v = self.derivs[r].eval(u);
            }
        }
    }

    /// Antiderivative vanishing at -1; equals 1 at +1.
    pub fn cdf(&self, u: f64) -> f64 {
        if u <= -1.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        let base = &self.derivs[0];
        let anti = |x: f64| {
            let w = x * x;
            let mut acc = 0.0;
            for k in (0..base.len).rev() {
                acc = acc * w + base.coeffs[k] / (2 * k + 1) as f64;
            }
            acc * x
        };
        (anti(u) + anti(1.0)).clamp(0.0, 1.0)
    }
}

/// Scalar constants of a product kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConstants {
    /// `∫ K(u) du`.
    pub integral: f64,
    /// `‖K‖₂² = ∫ K²`.
    pub l2_norm_sq: f64,
    /// `∫ (∂K/∂u₁)²`.
    pub deriv_l2_norm_sq: f64,
    /// `deriv_l2_norm_sq / (2 l2_norm_sq)`.
    pub s_k_sq: f64,
    /// `∫ u₁² K(u) du`.
    pub mu2: f64,
    /// `∫ (∂²K/∂u₁²)²`, used by the reference bandwidth for second derivatives.
    pub second_deriv_l2_norm_sq: f64,
}

impl KernelConstants {
    fn compute(profile: &Profile, dim: usize) -> Result<Self> {
        let q = |f: &dyn Fn(f64) -> f64| integrate_adaptive(f, -1.0, 1.0, CONSTANT_TOL);
        let total = q(&|u| profile.value(u))?;
        let r0 = q(&|u| profile.value(u).powi(2))?;
        let r1 = q(&|u| profile.deriv(1, u).powi(2))?;
        let r2 = q(&|u| profile.deriv(2, u).powi(2))?;
        let m2 = q(&|u| u * u * profile.value(u))?;
        let rest = (dim - 1) as i32;
        let l2_norm_sq = r0.powi(dim as i32);
        let deriv_l2_norm_sq = r1 * r0.powi(rest);
        Ok(Self {
            integral: total.powi(dim as i32),
            l2_norm_sq,
            deriv_l2_norm_sq,
            s_k_sq: deriv_l2_norm_sq / (2.0 * l2_norm_sq),
            mu2: m2 * total.powi(rest),
            second_deriv_l2_norm_sq: r2 * r0.powi(rest),
        })
    }
}

/// Inverse-CDF table for drawing from the profile.
#[derive(Debug, Clone)]
pub struct InverseCdf {
    cdf: Vec<f64>,
}

impl InverseCdf {
    fn new(profile: &Profile) -> Self {
        let cdf = (0..=CDF_INTERVALS)
            .map(|i| profile.cdf(-1.0 + 2.0 * i as f64 / CDF_INTERVALS as f64))
            .collect();
        Self { cdf }
    }

    /// Maps a uniform draw in [0, 1) to [-1, 1].
    pub fn quantile(&self, p: f64) -> f64 {
        let i = self.cdf.partition_point(|&v| v <= p).clamp(1, CDF_INTERVALS) - 1;
        let (lo, hi) = (self.cdf[i], self.cdf[i + 1]);
        let t = if hi > lo {
            ((p - lo) / (hi - lo)).clamp(0.0, 1.0)
        } else {
            0.5
        };
        -1.0 + 2.0 * (i as f64 + t) / CDF_INTERVALS as f64
    }
}

/// A `d`-dimensional product kernel with a common profile on every axis.
#[derive(Debug, Clone)]
pub struct KernelSpec {
    dim: usize,
    name: String,
    profile: Profile,
    constants: KernelConstants,
    sampler: Arc<InverseCdf>,
}

impl KernelSpec {
    pub fn new(dim: usize, power: u32) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        let profile = Profile::new(power)?;
        let constants = KernelConstants::compute(&profile, dim)?;
        let family = match power {
            2 => "biweight",
            3 => "triweight",
            5 => "sim",
            _ => "poly",
        };
        Ok(Self {
            dim,
            name: format!("{family}{dim}d"),
            profile,
            constants,
            sampler: Arc::new(InverseCdf::new(&profile)),
        })
    }

    /// The `(693/512)² (1-x²)⁵ (1-y²)⁵` kernel generalized to `dim` axes.
    pub fn simulation(dim: usize) -> Result<Self> {
        Self::new(dim, 5)
    }

    /// Looks up a registered kernel such as `sim2d`, `triweight1d` or `biweight2d`.
    pub fn by_name(name: &str) -> Result<Self> {
        let unknown = || Error::UnknownName(format!("kernel '{name}'"));
        let stem = name.strip_suffix('d').ok_or_else(unknown)?;
        let split = stem.find(|c: char| c.is_ascii_digit()).ok_or_else(unknown)?;
        let dim: usize = stem[split..].parse().map_err(|_| unknown())?;
        let power = match &stem[..split] {
            "sim" => 5,
            "triweight" => 3,
            "biweight" => 2,
            _ => return Err(unknown()),
        };
        if dim == 0 || dim > MAX_DIM {
            return Err(unknown());
        }
        Self::new(dim, power)
    }

    pub fn registered_names() -> &'static [&'static str] {
        &[
            "sim1d",
            "sim2d",
            "sim3d",
            "triweight1d",
            "triweight2d",
            "biweight1d",
            "biweight2d",
        ]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn constants(&self) -> &KernelConstants {
        &self.constants
    }

    pub fn sampler(&self) -> &InverseCdf {
        &self.sampler
    }

    pub fn eval(&self, u: &[f64]) -> Result<f64> {
        check_dim(self.dim, u.len())?;
        Ok(u.iter().map(|&x| self.profile.value(x)).product())
    }

    pub fn grad(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, u.len())?;
        Ok((0..self.dim)
            .map(|j| {
                u.iter()
                    .enumerate()
                    .map(|(m, &x)| self.profile.deriv(usize::from(m == j), x))
                    .product()
            })
            .collect())
    }

    /// Row-major `d × d` matrix of second partials.
    pub fn hessian(&self, u: &[f64]) -> Result<Vec<Vec<f64>>> {
        check_dim(self.dim, u.len())?;
        let mut out = vec![vec![0.0; self.dim]; self.dim];
        for a in 0..self.dim {
            for b in 0..self.dim {
                out[a][b] = u
                    .iter()
                    .enumerate()
                    .map(|(m, &x)| {
                        let r = usize::from(m == a) + usize::from(m == b);
                        self.profile.deriv(r, x)
                    })
                    .product();
            }
        }
        Ok(out)
    }

    pub fn convolved_profile(&self, h: f64, g: f64) -> Result<ConvolvedProfile> {
        ConvolvedProfile::new(&self.profile, h, g, DEFAULT_CONV_KNOTS)
    }
}

/// Tabulated `(k_h ⋆ k_g)(t)` where `k_s(t) = k(t/s)/s`.
#[derive(Debug, Clone)]
pub struct ConvolvedProfile {
    half_width: f64,
    step: f64,
    inv_step: f64,
    /// Value and derivative at each knot, for cubic Hermite interpolation.
    table: Vec<[f64; 2]>,
}

impl ConvolvedProfile {
    pub fn new(profile: &Profile, h: f64, g: f64, knots: usize) -> Result<Self> {
        if !(h > 0.0 && g > 0.0 && h.is_finite() && g.is_finite()) {
            return Err(invalid(format!(
                "convolution bandwidths must be positive (h={h}, g={g})"
            )));
        }
        if knots < 3 {
            return Err(invalid("convolution table needs at least 3 knots"));
        }
        let half_width = h + g;
        let intervals = knots - 1;
        let step = 2.0 * half_width / intervals as f64;
        // The integrand is a polynomial of degree 4p on the overlap; 16 nodes are exact up to degree 31.
        let rule = GaussLegendre::new(16);
        let table = (0..knots)
            .map(|i| {
                let t = -half_width + i as f64 * step;
                [
                    exact_convolution(profile, &rule, h, g, t),
                    convolution_slope(profile, &rule, h, g, t),
                ]
            })
            .collect();
        Ok(Self {
            half_width,
            step,
            inv_step: 1.0 / step,
            table,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn knots(&self) -> usize {
        self.table.len()
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        if t.abs() >= self.half_width {
            return 0.0;
        }
        let pos = (t + self.half_width) * self.inv_step;
        let i = (pos as usize).min(self.table.len() - 2);
        let u = pos - i as f64;
        let ([y0, m0], [y1, m1]) = (self.table[i], self.table[i + 1]);
        let u2 = u * u;
        let u3 = u2 * u;
        (2.0 * u3 - 3.0 * u2 + 1.0) * y0
            + (u3 - 2.0 * u2 + u) * self.step * m0
            + (3.0 * u2 - 2.0 * u3) * y1
            + (u3 - u2) * self.step * m1
    }
}

/// `∫ k_h(s) k_g(t - s) ds` by Gauss–Legendre on the overlap of the two supports.
pub fn exact_convolution(profile: &Profile, rule: &GaussLegendre, h: f64, g: f64, t: f64) -> f64 {
    let lo = (-h).max(t - g);
    let hi = h.min(t + g);
    if hi <= lo {
        return 0.0;
    }
    rule.integrate(lo, hi, |s| profile.value(s / h) * profile.value((t - s) / g)) / (h * g)
}

/// `d/dt (k_h ⋆ k_g)(t)`.
fn convolution_slope(profile: &Profile, rule: &GaussLegendre, h: f64, g: f64, t: f64) -> f64 {
    let lo = (-h).max(t - g);
    let hi = h.min(t + g);
    if hi <= lo {
        return 0.0;
    }
    rule.integrate(lo, hi, |s| profile.value(s / h) * profile.deriv(1, (t - s) / g)) / (h * g * g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sim2() -> KernelSpec {
        KernelSpec::simulation(2).unwrap()
    }

    #[test]
    fn peak_matches_closed_form() {
        let k = sim2();
        let v = k.eval(&[0.0, 0.0]).unwrap();
        assert!((v - (693.0f64 / 512.0).powi(2)).abs() < 1e-14);
        assert!((v - 1.832_004_547_119_140_6).abs() < 1e-15);
    }

    #[test]
    fn support_and_symmetry() {
        let k = sim2();
        assert_eq!(k.eval(&[1.5, 0.0]).unwrap(), 0.0);
        assert_eq!(k.eval(&[0.3, -0.3]).unwrap(), k.eval(&[-0.3, 0.3]).unwrap());
        assert!(k.eval(&[0.1]).is_err());
    }

    #[test]
    fn second_moment_is_one_thirteenth() {
        let c = *sim2().constants();
        assert!((c.mu2 - 1.0 / 13.0).abs() < 1e-12);
        assert!((c.integral - 1.0).abs() < 1e-12);
        assert_eq!(c.s_k_sq * 2.0 * c.l2_norm_sq, c.deriv_l2_norm_sq);
    }

    #[test]
    fn derivative_table_matches_finite_differences() {
        let p = Profile::new(5).unwrap();
        let eps = 1e-6;
        for &u in &[-0.7, -0.2, 0.0, 0.35, 0.9] {
            for r in 1..=MAX_ORDER {
                let fd = (p.deriv(r - 1, u + eps) - p.deriv(r - 1, u - eps)) / (2.0 * eps);
                let an = p.deriv(r, u);
                assert!((fd - an).abs() <= 1e-6 * (1.0 + an.abs()), "r={r} u={u}: {fd} vs {an}");
            }
        }
    }

    #[test]
    fn cdf_endpoints() {
        let p = Profile::new(5).unwrap();
        assert_eq!(p.cdf(-1.0), 0.0);
        assert!((p.cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((p.cdf(0.999_999_9) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn names_round_trip() {
        for name in KernelSpec::registered_names() {
            assert_eq!(KernelSpec::by_name(name).unwrap().name(), *name);
        }
        assert!(KernelSpec::by_name("gauss2d").is_err());
        assert!(KernelSpec::by_name("sim9d").is_err());
    }

    #[test]
    fn convolution_support() {
        let k = sim2();
        let conv = k.convolved_profile(0.5, 0.3).unwrap();
        assert_eq!(conv.value(0.81), 0.0);
        assert!(conv.value(0.0) > conv.value(0.2));
    }
}
