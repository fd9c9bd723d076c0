//! Bootstrap calibration of the vertical and horizontal confidence regions.

use std::io::Write;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::density::{sample_smoothed, sample_with_replacement, Bandwidths, Dataset, DensityEstimator, EstimatorKind};
use crate::error::{invalid, Error, Result};
use crate::field::{GradientField, ScalarField};
use crate::flow::{hitting_point, trace_to_level, FlowOptions, FlowStatus};
use crate::geometry::{directed_hausdorff, extract_contour, hausdorff, resample, Contour, GridSpec};
use crate::kernel::KernelSpec;

/// Share of replications that may be skipped before a quantile is refused.
pub const MAX_SKIPPED_SHARE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    /// `sup_{M̂} |f̂* - f̂_g|`.
    SupVsFg,
    /// `sup_{M̂} |f̂* - f̂^{*,E}|`.
    SupVsMeanE,
    /// Largest flow displacement from `M̂^{*,E}` to the level of `f̂*`.
    CurveDisplacementE,
    /// Largest distance from `M̂^{*,E}` to the contour of `f̂*`.
    ProjectionDisplacementE,
    /// `d_H(M̂*, M̂)` under the standard bootstrap.
    HausdorffStd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resampling {
    /// Draws from `f̂_g`.
    Smoothed,
    /// Multinomial draws from the data.
    Standard,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapPlan {
    pub replications: usize,
    pub statistic: Statistic,
    pub resampling: Resampling,
    pub alpha: f64,
    pub base_seed: u64,
}

impl BootstrapPlan {
    pub fn validate(&self) -> Result<()> {
        if self.replications < 20 {
            return Err(invalid(format!(
                "need at least 20 replications, got {}",
                self.replications
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.alpha * (self.replications as f64) < 1.0 - 1e-9 {
            return Err(invalid(format!(
                "alpha * B must be at least 1 (alpha = {}, B = {})",
                self.alpha, self.replications
            )));
        }
        Ok(())
    }
}

/// Per-replication generator: the stream index is the replication number, so results do
/// not depend on scheduling.
pub fn replication_rng(base_seed: u64, replication: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(replication as u64);
    rng
}

/// SplitMix64 finalizer over `(seed, tag)`, for deriving independent seeds.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed
        ^ tag
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(0x6A09_E667_F3BC_C909);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 1-based rank of the order statistic used as the `(1-α)` quantile of `b` values:
/// the smallest sample whose empirical cdf exceeds `1-α`.
pub fn quantile_rank(alpha: f64, b: usize) -> usize {
    ((((1.0 - alpha) * b as f64) + 1e-9).floor() as usize + 1).clamp(1, b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicationRecord {
    /// `None` when the replication was skipped.
    pub statistic: Option<f64>,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileEstimate {
    pub value: f64,
    pub alpha: f64,
    pub replications: usize,
    /// Valid statistics, ascending.
    pub sorted: Vec<f64>,
    pub records: Vec<ReplicationRecord>,
    pub failure_count: usize,
    pub skipped: usize,
}

impl QuantileEstimate {
    pub fn from_records(records: Vec<ReplicationRecord>, alpha: f64) -> Result<Self> {
        let total = records.len();
        let mut sorted: Vec<f64> = records.iter().filter_map(|r| r.statistic).collect();
        let skipped = total - sorted.len();
        if total == 0 || skipped as f64 > MAX_SKIPPED_SHARE * total as f64 {
            return Err(Error::TooManySkipped { skipped, total });
        }
        if sorted.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("bootstrap statistic".into()));
        }
        sorted.sort_by(f64::total_cmp);
        let value = sorted[quantile_rank(alpha, sorted.len()) - 1];
        let failure_count = records.iter().map(|r| r.failures).sum();
        Ok(Self {
            value,
            alpha,
            replications: total,
            sorted,
            records,
            failure_count,
            skipped,
        })
    }

    /// The quantile at another level from the same samples.
    pub fn at(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        Ok(self.sorted[quantile_rank(alpha, self.sorted.len()) - 1])
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Ok(Self {
            value: self.at(alpha)?,
            alpha,
            ..self.clone()
        })
    }

    /// Writes `replication,statistic,status` rows.
    pub fn write_samples_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "replication,statistic,status")?;
        for (b, r) in self.records.iter().enumerate() {
            match r.statistic {
                Some(v) => {
                    let status = if r.failures > 0 { "flow_fallback" } else { "ok" };
                    writeln!(out, "{b},{v:.17e},{status}")?
                }
                None => writeln!(out, "{b},,skipped")?,
            }
        }
        Ok(())
    }
}

fn run_replications<F>(plan: &BootstrapPlan, f: F) -> Result<Vec<ReplicationRecord>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<ReplicationRecord> + Sync,
{
    (0..plan.replications)
        .into_par_iter()
        .map(|b| f(&mut replication_rng(plan.base_seed, b)))
        .collect()
}

fn draw(
    data: &Dataset,
    kernel: &KernelSpec,
    bw: &Bandwidths,
    resampling: Resampling,
    rng: &mut ChaCha8Rng,
) -> Result<Arc<Dataset>> {
    let sample = match resampling {
        Resampling::Smoothed => sample_smoothed(data, kernel, &bw.g, data.len(), rng)?,
        Resampling::Standard => sample_with_replacement(data, data.len(), rng)?,
    };
    Ok(Arc::new(sample))
}

fn sup_spacing(bw: &Bandwidths) -> f64 {
    bw.h.iter().copied().fold(f64::INFINITY, f64::min) / 4.0
}

/// `max_{v ∈ vertices(ct)} |fa(v) - fb(v)|`.
pub fn sup_abs_diff_on_contour<A, B>(fa: &A, fb: &B, ct: &Contour) -> Result<f64>
where
    A: ScalarField + ?Sized,
    B: ScalarField + ?Sized,
{
    if ct.is_empty() {
        return Err(Error::EmptyContour("supremum over an empty contour".into()));
    }
    Ok(ct
        .vertices()
        .iter()
        .map(|v| (fa.value(v) - fb.value(v)).abs())
        .fold(0.0, f64::max))
}

/// Bootstrap draws of both vertical statistics, computed from the same resamples.
#[derive(Debug, Clone, PartialEq)]
pub struct VerticalSamples {
    pub vs_fg: QuantileEstimate,
    pub vs_mean: QuantileEstimate,
}

pub fn vertical_samples(
    data: &Arc<Dataset>,
    kernel: &KernelSpec,
    bw: &Bandwidths,
    ct: &Contour,
    plan: &BootstrapPlan,
) -> Result<VerticalSamples> {
    plan.validate()?;
    bw.validate(data.dim())?;
    let ct = resample(ct, sup_spacing(bw), None);
    let verts = ct.vertices();
    if verts.is_empty() {
        return Err(Error::EmptyContour(
            "vertical bootstrap needs a nonempty contour".into(),
        ));
    }
    let (ref_fg, ref_mean): (Vec<f64>, Vec<f64>) = match plan.resampling {
        Resampling::Smoothed => {
            let fg = DensityEstimator::plain(data.clone(), kernel, &bw.g)?;
            let mean = DensityEstimator::fit(
                data.clone(),
                kernel,
                &bw.h,
                EstimatorKind::BootstrapMean { g: bw.g.clone() },
            )?;
            (
                verts.iter().map(|v| fg.value(v)).collect(),
                verts.iter().map(|v| mean.value(v)).collect(),
            )
        }
        Resampling::Standard => {
            let fh = DensityEstimator::plain(data.clone(), kernel, &bw.h)?;
            let vals: Vec<f64> = verts.iter().map(|v| fh.value(v)).collect();
            (vals.clone(), vals)
        }
    };
    let pairs: Vec<(f64, f64)> = (0..plan.replications)
        .into_par_iter()
        .map(|b| {
            let mut rng = replication_rng(plan.base_seed, b);
            let sample = draw(data, kernel, bw, plan.resampling, &mut rng)?;
            let fstar = DensityEstimator::plain(sample, kernel, &bw.h)?;
            let (mut a, mut m) = (0.0f64, 0.0f64);
            for (k, v) in verts.iter().enumerate() {
                let f = fstar.value(v);
                a = a.max((f - ref_fg[k]).abs());
                m = m.max((f - ref_mean[k]).abs());
            }
            Ok((a, m))
        })
        .collect::<Result<_>>()?;
    let rec = |pick: fn(&(f64, f64)) -> f64| {
        pairs
            .iter()
            .map(|p| ReplicationRecord {
                statistic: Some(pick(p)),
                failures: 0,
            })
            .collect::<Vec<_>>()
    };
    Ok(VerticalSamples {
        vs_fg: QuantileEstimate::from_records(rec(|p| p.0), plan.alpha)?,
        vs_mean: QuantileEstimate::from_records(rec(|p| p.1), plan.alpha)?,
    })
}

pub fn quantile_vertical(
    data: &Arc<Dataset>,
    kernel: &KernelSpec,
    bw: &Bandwidths,
    ct: &Contour,
    plan: &BootstrapPlan,
) -> Result<QuantileEstimate> {
    let s = vertical_samples(data, kernel, bw, ct, plan)?;
    match plan.statistic {
        Statistic::SupVsFg => Ok(s.vs_fg),
        Statistic::SupVsMeanE => Ok(s.vs_mean),
        other => Err(invalid(format!("{other:?} is not a vertical statistic"))),
    }
}

/// Level, contouring grid and flow controls shared by the horizontal statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelTarget {
    pub level: f64,
    pub grid: GridSpec,
    pub flow: FlowOptions,
}

/// `M̂^{*,E}`: the level set of the exact bootstrap mean, densified to `min h / 4`.
pub fn mean_contour(
    data: &Arc<Dataset>,
    kernel: &KernelSpec,
    bw: &Bandwidths,
    target: &LevelTarget,
) -> Result<Contour> {
    let mean = DensityEstimator::fit(
        data.clone(),
        kernel,
        &bw.h,
        EstimatorKind::BootstrapMean { g: bw.g.clone() },
    )?;
    let ct = extract_contour(&mean, &target.grid, target.level)?;
    if ct.is_empty() {
        return Err(Error::EmptyContour(
            "bootstrap-mean estimator never crosses the level".into(),
        ));
    }
    Ok(resample(&ct, sup_spacing(bw), Some(&mean)))
}

/// Largest flow displacement from the vertices of `seeds` to the level of `field`.
/// Returns the statistic and the number of vertices whose flow did not hit.
pub fn curve_displacement_statistic<F: GradientField + ?Sized>(
    field: &F,
    seeds: &Contour,
    c: f64,
    flow: &FlowOptions,
) -> Result<(f64, usize)> {
    let mut worst = 0.0f64;
    let mut failures = 0;
    for v in seeds.vertices() {
        let (point, hit) = match trace_to_level(field, &v, c, flow) {
            Ok(tr) => {
                let hp = hitting_point(&tr)?;
                (hp.point, tr.status == FlowStatus::Hit)
            }
            Err(Error::NonFinite(_)) => (v.clone(), false),
            Err(e) => return Err(e),
        };
        if !hit {
            failures += 1;
        }
        let d = point.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        worst = worst.max(d);
    }
    Ok((worst, failures))
}

pub fn quantile_curve_displacement(
    data: &Arc<Dataset>,
    kernel: &KernelSpec,
    bw: &Bandwidths,
    target: &LevelTarget,
    plan: &BootstrapPlan,
) -> Result<QuantileEstimate> {
    plan.validate()?;
    if plan.resampling != Resampling::Smoothed {
        return Err(invalid("curve displacement is calibrated with the smoothed bootstrap"));
    }
    let seeds = mean_contour(data, kernel, bw, target)?;
    let records = run_replications(plan, |rng| {
        let sample = draw(data, kernel, bw, plan.resampling, rng)?;
        let fstar = DensityEstimator::plain(sample, kernel, &bw.h)?;
        let (stat, failures) = curve_displacement_statistic(&fstar, &seeds, target.level, &target.flow)?;
        Ok(ReplicationRecord {
            statistic: Some(stat),
            failures,
        })
    })?;
    QuantileEstimate::from_records(records, plan.alpha)
}

pub fn quantile_projection_displacement(
    data: &Arc<Dataset>,
    kernel: &KernelSpec,
    bw: &Bandwidths,
    target: &LevelTarget,
    plan: &BootstrapPlan,
) -> Result<QuantileEstimate> {
    plan.validate()?;
    if plan.resampling != Resampling::Smoothed {
        return Err(invalid(
            "projection displacement is calibrated with the smoothed bootstrap",
        ));
    }
    let seeds = mean_contour(data, kernel, bw, target)?;
    let records = run_replications(plan, |rng| {
        let sample = draw(data, kernel, bw, plan.resampling, rng)?;
        let fstar = DensityEstimator::plain(sample, kernel, &bw.h)?;
        let ct = extract_contour(&fstar, &target.grid, target.level)?;
        if ct.is_empty() {
            return Ok(ReplicationRecord {
                statistic: None,
                failures: 0,
            });
        }
        Ok(ReplicationRecord {
            statistic: Some(directed_hausdorff(&seeds, &ct)?),
            failures: 0,
        })
    })?;
    QuantileEstimate::from_records(records, plan.alpha)
}

/// Standard-bootstrap quantile of `d_H(M̂*, M̂)`.
pub fn quantile_hausdorff_std(
    data: &Arc<Dataset>,
    kernel: &KernelSpec,
    h: &[f64],
    ct: &Contour,
    grid: &GridSpec,
    plan: &BootstrapPlan,
) -> Result<QuantileEstimate> {
    plan.validate()?;
    if plan.resampling != Resampling::Standard {
        return Err(invalid("the Hausdorff comparator uses the standard bootstrap"));
    }
    if ct.is_empty() {
        return Err(Error::EmptyContour(
            "Hausdorff bootstrap needs a nonempty contour".into(),
        ));
    }
    let spacing = h.iter().copied().fold(f64::INFINITY, f64::min) / 4.0;
    let base = resample(ct, spacing, None);
    let records = run_replications(plan, |rng| {
        let sample = Arc::new(sample_with_replacement(data, data.len(), rng)?);
        let fstar = DensityEstimator::plain(sample, kernel, h)?;
        let star = extract_contour(&fstar, grid, ct.level)?;
        if star.is_empty() {
            return Ok(ReplicationRecord {
                statistic: None,
                failures: 0,
            });
        }
        let star = resample(&star, spacing, None);
        Ok(ReplicationRecord {
            statistic: Some(hausdorff(&star, &base)?),
            failures: 0,
        })
    })?;
    QuantileEstimate::from_records(records, plan.alpha)
}
