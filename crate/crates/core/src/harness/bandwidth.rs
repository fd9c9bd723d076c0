use std::f64::consts::PI;

use crate::density::{Bandwidths, Dataset};
use crate::error::{invalid, Result};
use crate::kernel::KernelSpec;

use super::config::BandwidthRule;

/// Normal-reference multipliers `(C0, C2)` for density and second-derivative bandwidths,
/// converted from the Gaussian kernel to `kernel` through its roughness and second moment.
pub fn normal_scale_constants(kernel: &KernelSpec) -> (f64, f64) {
    let d = kernel.dim() as f64;
    let k = kernel.constants();
    let mu2_sq = k.mu2 * k.mu2;
    let gauss_r = (4.0 * PI).powf(-d / 2.0);
    let c0 = (4.0 / (d + 2.0)).powf(1.0 / (d + 4.0)) * ((k.l2_norm_sq / mu2_sq) / gauss_r).powf(1.0 / (d + 4.0));
    let gauss_r2 = 3.0 / (8.0 * PI.sqrt()) * (1.0 / (2.0 * PI.sqrt())).powf(d - 1.0);
    let c2 = (4.0 / (d + 6.0)).powf(1.0 / (d + 8.0))
        * ((k.second_deriv_l2_norm_sq / mu2_sq) / gauss_r2).powf(1.0 / (d + 8.0));
    (c0, c2)
}

/// `h_j = σ̂_j C0 n^{-1/(d+4)}`, `l_j = σ̂_j C2 n^{-1/(d+8)}`, `g = h`.
pub fn select_bandwidths(data: &Dataset, kernel: &KernelSpec, rule: &BandwidthRule) -> Result<Bandwidths> {
    let d = data.dim();
    if kernel.dim() != d {
        return Err(invalid(format!("kernel is {}-D but data are {d}-D", kernel.dim())));
    }
    match rule {
        BandwidthRule::Fixed(bw) => {
            bw.validate(d)?;
            Ok(bw.clone())
        }
        BandwidthRule::NormalScale => {
            let sd = data.std_dev();
            if let Some(j) = sd.iter().position(|s| !(*s > 0.0)) {
                return Err(invalid(format!("axis {j} has zero variance")));
            }
            let (c0, c2) = normal_scale_constants(kernel);
            let n = data.len() as f64;
            let df = d as f64;
            let h: Vec<f64> = sd.iter().map(|s| s * c0 * n.powf(-1.0 / (df + 4.0))).collect();
            let l = sd.iter().map(|s| s * c2 * n.powf(-1.0 / (df + 8.0))).collect();
            Ok(Bandwidths { g: h.clone(), h, l })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_like(n: usize, scale: [f64; 2]) -> Dataset {
        let coords = (0..n)
            .flat_map(|i| {
                let t = (i as f64 + 0.5) / n as f64;
                let u = (t * 7.0).fract() - 0.5;
                [scale[0] * (t - 0.5), scale[1] * u]
            })
            .collect();
        Dataset::new(2, coords).unwrap()
    }

    #[test]
    fn multipliers_match_quadrature_oracle() {
        let k = KernelSpec::simulation(2).unwrap();
        let (c0, c2) = normal_scale_constants(&k);
        assert!((c0 - 3.573_515_182_221_218).abs() < 1e-9);
        assert!((c2 - 3.251_027_278_486_448).abs() < 1e-9);
    }

    #[test]
    fn sample_size_scaling_and_equivariance() {
        let k = KernelSpec::simulation(2).unwrap();
        let a = select_bandwidths(&gaussian_like(400, [1.0, 1.0]), &k, &BandwidthRule::NormalScale).unwrap();
        let b = select_bandwidths(&gaussian_like(1600, [1.0, 1.0]), &k, &BandwidthRule::NormalScale).unwrap();
        let sa = gaussian_like(400, [1.0, 1.0]).std_dev();
        let sb = gaussian_like(1600, [1.0, 1.0]).std_dev();
        let ratio = (b.h[0] / sb[0]) / (a.h[0] / sa[0]);
        assert!((ratio - 4f64.powf(-1.0 / 6.0)).abs() < 1e-14);
        let c = select_bandwidths(&gaussian_like(400, [3.0, 0.5]), &k, &BandwidthRule::NormalScale).unwrap();
        assert!((c.h[0] / a.h[0] - 3.0).abs() < 1e-12);
        assert!((c.h[1] / a.h[1] - 0.5).abs() < 1e-12);
        assert_eq!(c.g, c.h);
    }

    #[test]
    fn zero_variance_rejected() {
        let k = KernelSpec::simulation(2).unwrap();
        let flat = Dataset::new(2, vec![0.0, 1.0, 0.0, 2.0, 0.0, 3.0]).unwrap();
        assert!(select_bandwidths(&flat, &k, &BandwidthRule::NormalScale).is_err());
    }
}
