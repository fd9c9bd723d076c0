//! Extreme-value quantiles for the supremum of the normalized estimator over the level set,
//! and the asymptotic vertical region built from them.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use statrs::distribution::{ContinuousCDF, Normal};

use crate::density::{geometric_mean, DensityEstimator, EstimatorKind};
use crate::error::{invalid, Error, Result};
use crate::geometry::{extract_contour, Contour, GridSpec};
use crate::kernel::KernelConstants;
use crate::regions::{Region, RegionPair, Target};

/// `V̂_{d-1}` for d ≥ 2 or the crossing count `N̂` for d = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceMeasure {
    Volume(f64),
    Count(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvtInputs {
    pub d: usize,
    pub n: usize,
    pub h_eff: f64,
    pub alpha: f64,
    pub c: f64,
    pub constants: KernelConstants,
    pub surface: SurfaceMeasure,
}

impl EvtInputs {
    fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if self.d == 0 || self.n == 0 {
            return Err(invalid("dimension and sample size must be positive"));
        }
        if !(self.h_eff > 0.0 && self.h_eff.is_finite()) {
            return Err(invalid(format!("bandwidth must be positive, got {}", self.h_eff)));
        }
        if !(self.c > 0.0) {
            return Err(invalid(format!("level must be positive, got {}", self.c)));
        }
        match (self.d, self.surface) {
            (1, SurfaceMeasure::Count(k)) if k >= 1 => Ok(()),
            (1, _) => Err(invalid("1-D inputs need a crossing count of at least 1")),
            (_, SurfaceMeasure::Volume(v)) if v > 0.0 && v.is_finite() => Ok(()),
            _ => Err(invalid("surface measure must be positive for d >= 2")),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// `z(α) = -log[-½ log(1-α)]`.
pub fn z_of_alpha(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(-(-0.5 * (-alpha).ln_1p()).ln())
}

/// Threshold `φ(z)` for the supremum of a normalized Gaussian field indexed by an
/// `r`-dimensional manifold with `∫ ‖D M_s‖ ds = manifold_integral`.
pub fn field_sup_threshold(r: usize, h: f64, z: f64, manifold_integral: f64) -> f64 {
    let rf = r as f64;
    let log_inv_h = -h.ln();
    let root = (2.0 * rf * log_inv_h).sqrt();
    let constant = (2.0 * rf).powf(rf / 2.0 - 0.5) / (SQRT_2 * PI.powf((rf + 1.0) / 2.0));
    root + (z + (rf / 2.0 - 0.5) * log_inv_h.ln() + (constant * manifold_integral).ln()) / root
}

/// `b̂(α)` for d ≥ 2.
pub fn b_hat(inputs: &EvtInputs) -> Result<f64> {
    inputs.validate()?;
    let d = inputs.d;
    if d < 2 {
        return Err(invalid("b_hat is defined for d >= 2"));
    }
    if inputs.h_eff >= 1.0 {
        return Err(Error::BandwidthTooLarge(inputs.h_eff));
    }
    let SurfaceMeasure::Volume(volume) = inputs.surface else {
        return Err(invalid("b_hat needs a surface measure"));
    };
    let df = d as f64;
    let z = z_of_alpha(inputs.alpha)?;
    let log_inv_h = -inputs.h_eff.ln();
    let root = (2.0 * (df - 1.0) * log_inv_h).sqrt();
    let s_k = inputs.constants.s_k_sq.sqrt();
    let inner = (2.0 * df - 2.0).powf(df / 2.0 - 1.0) * s_k.powf(df - 1.0) / (SQRT_2 * PI.powf(df / 2.0)) * volume;
    Ok(root + (z + (df / 2.0 - 1.0) * log_inv_h.ln() + inner.ln()) / root)
}

/// Half-width `â` of the asymptotic band `[c - â, c + â]`.
pub fn a_hat(inputs: &EvtInputs) -> Result<f64> {
    inputs.validate()?;
    let scale =
        (inputs.constants.l2_norm_sq * inputs.c).sqrt() / (inputs.n as f64 * inputs.h_eff.powi(inputs.d as i32)).sqrt();
    let quantile = if inputs.d == 1 {
        let SurfaceMeasure::Count(k) = inputs.surface else {
            return Err(invalid("1-D inputs need a crossing count"));
        };
        let p = (1.0 - inputs.alpha).powf(1.0 / k as f64);
        Normal::standard().inverse_cdf(p)
    } else {
        b_hat(inputs)?
    };
    Ok(quantile * scale)
}

/// The asymptotic region for `M` and the nested pair for `L`.
#[derive(Debug, Clone)]
pub struct Cn1 {
    pub region: Region,
    pub pair: RegionPair,
    pub a_hat: f64,
    pub contour: Contour,
    pub surface: SurfaceMeasure,
}

/// Builds `(f̂^bc)^{-1}[c - â, c + â]` and `([c+â, ∞), [c-â, ∞))` from a bias-corrected estimator.
pub fn build_cn1(bc: &DensityEstimator, grid: &GridSpec, c: f64, alpha: f64) -> Result<Cn1> {
    if !matches!(bc.kind(), EstimatorKind::BiasCorrected { .. }) {
        return Err(invalid("the asymptotic region needs a bias-corrected estimator"));
    }
    let d = bc.dataset().dim();
    let h_eff = geometric_mean(bc.bandwidth());
    if d >= 2 && h_eff >= 1.0 {
        return Err(Error::BandwidthTooLarge(h_eff));
    }
    let contour = extract_contour(bc, grid, c)?;
    if contour.is_empty() {
        return Err(Error::EmptyContour(
            "bias-corrected estimator never crosses the level".into(),
        ));
    }
    let surface = if d == 1 {
        SurfaceMeasure::Count(contour.vertex_count())
    } else {
        SurfaceMeasure::Volume(contour.total_length())
    };
    let inputs = EvtInputs {
        d,
        n: bc.dataset().len(),
        h_eff,
        alpha,
        c,
        constants: *bc.kernel().constants(),
        surface,
    };
    let a = a_hat(&inputs)?;
    let est = Arc::new(bc.clone());
    let region = Region::vertical(est.clone(), c - a, c + a);
    let pair = RegionPair::vertical(est, c, a, Target::TrueSet);
    Ok(Cn1 {
        region,
        pair,
        a_hat: a,
        contour,
        surface,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelSpec;

    fn inputs(h: f64, alpha: f64, volume: f64) -> EvtInputs {
        EvtInputs {
            d: 2,
            n: 1000,
            h_eff: h,
            alpha,
            c: 0.08,
            constants: *KernelSpec::simulation(2).unwrap().constants(),
            surface: SurfaceMeasure::Volume(volume),
        }
    }

    #[test]
    fn z_zero_point_and_reference() {
        let a0 = 1.0 - (-2.0f64).exp();
        assert!(z_of_alpha(a0).unwrap().abs() < 1e-15);
        assert!((z_of_alpha(0.1).unwrap() - 2.943_514_507_872_390_6).abs() < 1e-14);
        assert!(z_of_alpha(0.0).is_err() && z_of_alpha(1.0).is_err());
        let mut last = f64::INFINITY;
        for k in 1..100 {
            let z = z_of_alpha(k as f64 / 100.0).unwrap();
            assert!(z < last);
            last = z;
        }
    }

    #[test]
    fn two_dimensional_reduction() {
        let inp = inputs(0.2, 0.1, 2.0 * PI);
        let l = (1.0f64 / 0.2).ln();
        let s_k = inp.constants.s_k_sq.sqrt();
        let want =
            (2.0 * l).sqrt() + (z_of_alpha(0.1).unwrap() + (s_k * 2.0 * PI / (SQRT_2 * PI)).ln()) / (2.0 * l).sqrt();
        assert!((b_hat(&inp).unwrap() - want).abs() < 1e-13);
    }

    #[test]
    fn matches_generic_threshold() {
        for (d, h, alpha, v) in [(2, 0.3, 0.1, 5.0), (2, 0.05, 0.02, 0.7), (3, 0.4, 0.2, 12.0)] {
            let mut inp = inputs(h, alpha, v);
            inp.d = d;
            inp.constants = *KernelSpec::simulation(d).unwrap().constants();
            let integral = inp.constants.s_k_sq.sqrt().powi(d as i32 - 1) * v;
            let generic = field_sup_threshold(d - 1, h, z_of_alpha(alpha).unwrap(), integral);
            assert!((b_hat(&inp).unwrap() - generic).abs() < 1e-12);
        }
    }

    #[test]
    fn bandwidth_must_be_below_one() {
        assert!(matches!(
            b_hat(&inputs(1.2, 0.1, 3.0)),
            Err(Error::BandwidthTooLarge(_))
        ));
    }

    #[test]
    fn one_dimensional_normal_quantile() {
        let k = KernelSpec::simulation(1).unwrap();
        let inp = EvtInputs {
            d: 1,
            n: 400,
            h_eff: 0.3,
            alpha: 0.1,
            c: 0.2,
            constants: *k.constants(),
            surface: SurfaceMeasure::Count(1),
        };
        let want = 1.281_551_565_544_600_6 * (k.constants().l2_norm_sq * 0.2 / (400.0 * 0.3)).sqrt();
        assert!((a_hat(&inp).unwrap() - want).abs() < 1e-12);
        let two = EvtInputs {
            surface: SurfaceMeasure::Count(2),
            ..inp.clone()
        };
        let q2 = Normal::standard().inverse_cdf(0.9f64.sqrt());
        assert!((a_hat(&two).unwrap() / a_hat(&inp).unwrap() - q2 / 1.281_551_565_544_600_6).abs() < 1e-12);
    }

    #[test]
    fn monotone_in_alpha_and_volume() {
        let mut last = f64::INFINITY;
        for k in 1..20 {
            let a = a_hat(&inputs(0.3, k as f64 / 20.0, 4.0)).unwrap();
            assert!(a > 0.0 && a < last);
            last = a;
        }
        let mut last = f64::NEG_INFINITY;
        for v in 1..=10 {
            let b = b_hat(&inputs(0.3, 0.1, v as f64)).unwrap();
            assert!(b > last);
            last = b;
        }
    }
}
