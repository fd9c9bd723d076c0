use std::cell::OnceCell;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::bootstrap::{
    derive_seed, quantile_curve_displacement, quantile_hausdorff_std, quantile_projection_displacement,
    replication_rng, vertical_samples, BootstrapPlan, LevelTarget, QuantileEstimate, Resampling, Statistic,
    VerticalSamples,
};
use crate::density::{geometric_mean, Bandwidths, Dataset, DensityEstimator, EstimatorKind};
use crate::error::{Error, Result};
use crate::evt::{a_hat, EvtInputs, SurfaceMeasure};
use crate::field::ScalarField;
use crate::flow::FlowOptions;
use crate::geometry::{extract_contour, resample, Contour, GridPoints, GridSpec, SegmentIndex};
use crate::kernel::KernelSpec;
use crate::models::TrueModel;
use crate::regions::{
    gradient_tube_verdicts, probes_from_contour, tube_mask, vertical_test, GradientTube, RegionMask, Target,
    TubeVerdict, TubeWeighting, DENSITY_FLOOR,
};

use super::bandwidth::select_bandwidths;
use super::config::{ExperimentConfig, GridConfig, Method};
use super::report::{summarize, CoverageReport};

/// Largest share of runs that may abort before the experiment is refused.
pub const MAX_ABORTED_SHARE: f64 = 0.1;

/// Resolution of the grid on which the smoothed target contour is traced.
const TARGET_RESOLUTION: usize = 256;

const SAMPLE_TAG: u64 = 0x5A;
const BOOT_TAG: u64 = 0xB0;

/// Per-method result of one run, one entry per requested alpha.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub quantile: Vec<f64>,
    pub covered: Vec<bool>,
    pub volume: Vec<f64>,
    pub mass: Vec<f64>,
    pub touches_boundary: Vec<bool>,
    /// Flow traces that did not reach the level, over bootstrap, grid and probes.
    pub flow_failures: usize,
    pub skipped_replications: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MethodStatus {
    Done(MethodOutcome),
    Skipped(String),
    Aborted(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run: usize,
    pub bandwidths: Option<Bandwidths>,
    /// `Err` when a step shared by all methods failed.
    pub methods: std::result::Result<Vec<(Method, MethodStatus)>, String>,
}

impl RunRecord {
    pub fn status(&self, method: Method) -> Option<&MethodStatus> {
        self.methods
            .as_ref()
            .ok()?
            .iter()
            .find(|(m, _)| *m == method)
            .map(|(_, s)| s)
    }

    pub fn outcome(&self, method: Method) -> Option<&MethodOutcome> {
        match self.status(method)? {
            MethodStatus::Done(o) => Some(o),
            _ => None,
        }
    }
}

/// Everything a region construction needs besides the data and bandwidths.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSettings {
    pub level: f64,
    pub replications: usize,
    pub seed: u64,
    pub flow: FlowOptions,
    pub undersmooth_factor: f64,
    pub grid: GridConfig,
}

impl RegionSettings {
    fn from_config(cfg: &ExperimentConfig, level: f64) -> Self {
        Self {
            level,
            replications: cfg.replications,
            seed: cfg.seed,
            flow: cfg.flow,
            undersmooth_factor: cfg.undersmooth_factor,
            grid: cfg.grid.clone(),
        }
    }
}

/// Inputs shared by every run of an experiment.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub alphas: Vec<f64>,
    pub model: TrueModel,
    pub settings: RegionSettings,
    pub kernel: KernelSpec,
    pub truth_probes: Vec<Vec<f64>>,
}

impl Experiment {
    pub fn new(config: &ExperimentConfig, alphas: &[f64]) -> Result<Self> {
        config.validate()?;
        if alphas.is_empty() {
            return Err(Error::Config("no alpha levels requested".into()));
        }
        for &a in alphas {
            let mut c = config.clone();
            c.alpha = a;
            c.validate()?;
        }
        let model = config.case.model();
        let level = config.case.level();
        let truth_probes = true_probes(&model, level, config.probes)?;
        Ok(Self {
            config: config.clone(),
            alphas: alphas.to_vec(),
            model,
            settings: RegionSettings::from_config(config, level),
            kernel: KernelSpec::simulation(2)?,
            truth_probes,
        })
    }

    fn prepare(&self, index: usize) -> Result<(Arc<Dataset>, Bandwidths)> {
        let mut rng = replication_rng(derive_seed(self.config.seed, SAMPLE_TAG), index);
        let data = self.model.sample(self.config.n, &mut rng)?;
        let bw = select_bandwidths(&data, &self.kernel, &self.config.bandwidth_rule)?;
        Ok((Arc::new(data), bw))
    }

    fn engine(&self, index: usize) -> Result<Engine<'_>> {
        let (data, bw) = self.prepare(index)?;
        Engine::new(
            &self.kernel,
            &self.settings,
            &self.alphas,
            index,
            data,
            bw,
            Some(&self.model),
        )
    }

    pub fn run(&self, index: usize) -> RunRecord {
        let engine = match self.engine(index) {
            Ok(e) => e,
            Err(e) => {
                return RunRecord {
                    run: index,
                    bandwidths: None,
                    methods: Err(e.to_string()),
                }
            }
        };
        let methods = self
            .config
            .methods
            .iter()
            .map(|&m| {
                let status = match engine.skip_reason(m) {
                    Some(why) => MethodStatus::Skipped(why),
                    None => match engine.outcome(m, &self.truth_probes) {
                        Ok(o) => MethodStatus::Done(o),
                        Err(e) => MethodStatus::Aborted(e.to_string()),
                    },
                };
                (m, status)
            })
            .collect();
        RunRecord {
            run: index,
            bandwidths: Some(engine.bw.clone()),
            methods: Ok(methods),
        }
    }

    /// Runs every repetition and reduces in run order.
    pub fn run_all(&self) -> Vec<RunRecord> {
        (0..self.config.runs).into_par_iter().map(|r| self.run(r)).collect()
    }
}

fn true_probes(model: &TrueModel, c: f64, n: usize) -> Result<Vec<Vec<f64>>> {
    match model {
        TrueModel::Elliptic { .. } => Ok(model.true_contour(c, n)?.vertices()),
        TrueModel::Mixture => Ok(probes_from_contour(&model.true_contour(c, n)?, n)),
    }
}

fn min_spacing(h: &[f64]) -> f64 {
    h.iter().copied().fold(f64::INFINITY, f64::min) / 4.0
}

type Cached<T> = OnceCell<std::result::Result<T, String>>;

fn cached<T>(cell: &Cached<T>, f: impl FnOnce() -> Result<T>) -> Result<&T> {
    cell.get_or_init(|| f().map_err(|e| e.to_string()))
        .as_ref()
        .map_err(|e| Error::InvalidArgument(e.clone()))
}

/// A calibrated quantile per alpha plus the diagnostics of its bootstrap.
struct Calibration {
    quantile: Vec<f64>,
    failures: usize,
    skipped: usize,
}

impl Calibration {
    fn from_estimate(q: &QuantileEstimate, alphas: &[f64]) -> Result<Self> {
        Ok(Self {
            quantile: alphas.iter().map(|&a| q.at(a)).collect::<Result<_>>()?,
            failures: q.failure_count,
            skipped: q.skipped,
        })
    }
}

/// Lazily computed quantities of one sample, shared between methods.
struct Engine<'a> {
    kernel: &'a KernelSpec,
    settings: &'a RegionSettings,
    alphas: &'a [f64],
    run: usize,
    model: Option<&'a TrueModel>,
    data: Arc<Dataset>,
    bw: Bandwidths,
    grid: GridSpec,
    contour_grid: GridSpec,
    flow_grid: GridSpec,
    pdf: OnceCell<Vec<f64>>,
    flow_pdf: OnceCell<Vec<f64>>,
    fhat: Cached<Arc<DensityEstimator>>,
    fbc: Cached<Arc<DensityEstimator>>,
    mhat: Cached<Contour>,
    mbc: Cached<Contour>,
    vertical: Cached<VerticalSamples>,
    smoothed_probes: Cached<Vec<Vec<f64>>>,
}

impl<'a> Engine<'a> {
    fn new(
        kernel: &'a KernelSpec,
        settings: &'a RegionSettings,
        alphas: &'a [f64],
        run: usize,
        data: Arc<Dataset>,
        bw: Bandwidths,
        model: Option<&'a TrueModel>,
    ) -> Result<Self> {
        bw.validate(2)?;
        let cfg = &settings.grid;
        let (lo, hi) = match &cfg.bounds {
            Some(b) => b.clone(),
            None => {
                let pad: Vec<f64> = (0..2).map(|j| bw.h[j].max(bw.l[j]) + bw.g[j]).collect();
                let g = GridSpec::covering(data.coords(), 2, &pad, 16)?;
                (g.lower().to_vec(), g.upper().to_vec())
            }
        };
        let grid_at = |res: usize| GridSpec::new(lo.clone(), hi.clone(), vec![res, res]);
        Ok(Self {
            kernel,
            settings,
            alphas,
            run,
            model,
            grid: grid_at(cfg.resolution)?,
            contour_grid: grid_at(cfg.contour_resolution)?,
            flow_grid: grid_at(cfg.flow_resolution)?,
            data,
            bw,
            pdf: OnceCell::new(),
            flow_pdf: OnceCell::new(),
            fhat: OnceCell::new(),
            fbc: OnceCell::new(),
            mhat: OnceCell::new(),
            mbc: OnceCell::new(),
            vertical: OnceCell::new(),
            smoothed_probes: OnceCell::new(),
        })
    }

    fn level(&self) -> f64 {
        self.settings.level
    }

    fn skip_reason(&self, m: Method) -> Option<String> {
        let h_eff = self.bw.h_eff();
        (m.is_asymptotic() && h_eff >= 1.0).then(|| Error::BandwidthTooLarge(h_eff).to_string())
    }

    fn plan(&self, tag: u64, statistic: Statistic, resampling: Resampling) -> BootstrapPlan {
        BootstrapPlan {
            replications: self.settings.replications,
            statistic,
            resampling,
            alpha: self.alphas.iter().copied().fold(1.0, f64::min),
            base_seed: derive_seed(derive_seed(self.settings.seed, BOOT_TAG + tag), self.run as u64),
        }
    }

    fn model(&self) -> Result<&TrueModel> {
        self.model
            .ok_or_else(|| Error::InvalidArgument("no reference model for this sample".into()))
    }

    fn pdf(&self) -> Result<&[f64]> {
        let model = self.model()?;
        Ok(self
            .pdf
            .get_or_init(|| model.sample_grid(&self.grid, GridPoints::Centers)))
    }

    fn flow_pdf(&self) -> Result<&[f64]> {
        let model = self.model()?;
        Ok(self
            .flow_pdf
            .get_or_init(|| model.sample_grid(&self.flow_grid, GridPoints::Centers)))
    }

    fn fhat(&self) -> Result<&Arc<DensityEstimator>> {
        cached(&self.fhat, || {
            Ok(Arc::new(DensityEstimator::plain(
                self.data.clone(),
                self.kernel,
                &self.bw.h,
            )?))
        })
    }

    fn fbc(&self) -> Result<&Arc<DensityEstimator>> {
        cached(&self.fbc, || {
            let kind = EstimatorKind::BiasCorrected { l: self.bw.l.clone() };
            Ok(Arc::new(DensityEstimator::fit(
                self.data.clone(),
                self.kernel,
                &self.bw.h,
                kind,
            )?))
        })
    }

    fn undersmoothed(&self) -> Result<(Bandwidths, DensityEstimator)> {
        let bw = self.bw.scaled(self.settings.undersmooth_factor);
        let est = DensityEstimator::plain(self.data.clone(), self.kernel, &bw.h)?;
        Ok((bw, est))
    }

    fn level_contour(&self, est: &DensityEstimator, what: &str) -> Result<Contour> {
        let ct = extract_contour(est, &self.contour_grid, self.level())?;
        if ct.is_empty() {
            return Err(Error::EmptyContour(format!("{what} never crosses the level")));
        }
        Ok(resample(&ct, min_spacing(est.bandwidth()), Some(est)))
    }

    fn mhat(&self) -> Result<&Contour> {
        cached(&self.mhat, || self.level_contour(self.fhat()?, "the estimator"))
    }

    fn mbc(&self) -> Result<&Contour> {
        cached(&self.mbc, || {
            self.level_contour(self.fbc()?, "the bias-corrected estimator")
        })
    }

    fn vertical(&self) -> Result<&VerticalSamples> {
        cached(&self.vertical, || {
            let plan = self.plan(1, Statistic::SupVsMeanE, Resampling::Smoothed);
            vertical_samples(&self.data, self.kernel, &self.bw, self.mhat()?, &plan)
        })
    }

    /// Probes on the contour of `f ⋆ K_h`.
    fn smoothed_probes(&self, count: usize) -> Result<&Vec<Vec<f64>>> {
        cached(&self.smoothed_probes, || {
            let model = self.model()?;
            let smooth = model.smoothed(self.kernel, &self.bw.h)?;
            let (lo, hi) = model.bounding_box();
            let pad: Vec<f64> = self.bw.h.iter().map(|h| h + 0.5).collect();
            let grid = GridSpec::new(
                vec![lo[0] - pad[0], lo[1] - pad[1]],
                vec![hi[0] + pad[0], hi[1] + pad[1]],
                vec![TARGET_RESOLUTION, TARGET_RESOLUTION],
            )?;
            let ct = extract_contour(&smooth, &grid, self.level())?;
            if ct.is_empty() {
                return Err(Error::EmptyContour("smoothed target never crosses the level".into()));
            }
            Ok(probes_from_contour(&ct, count))
        })
    }

    fn target(&self) -> LevelTarget {
        LevelTarget {
            level: self.level(),
            grid: self.contour_grid.clone(),
            flow: self.settings.flow,
        }
    }

    fn asymptotic(&self) -> Result<Calibration> {
        let length = self.mbc()?.total_length();
        let quantile = self
            .alphas
            .iter()
            .map(|&alpha| {
                a_hat(&EvtInputs {
                    d: 2,
                    n: self.data.len(),
                    h_eff: geometric_mean(&self.bw.h),
                    alpha,
                    c: self.level(),
                    constants: *self.kernel.constants(),
                    surface: SurfaceMeasure::Volume(length),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Calibration {
            quantile,
            failures: 0,
            skipped: 0,
        })
    }

    /// The method's half-width, radius, or tube quantile at each alpha.
    fn calibrate(&self, m: Method) -> Result<Calibration> {
        let alphas = self.alphas;
        match m {
            Method::V => Calibration::from_estimate(&self.vertical()?.vs_fg, alphas),
            Method::Ve | Method::Vbc | Method::C4Star => Calibration::from_estimate(&self.vertical()?.vs_mean, alphas),
            Method::Vus => {
                let (bw, est) = self.undersmoothed()?;
                let ct = self.level_contour(&est, "the undersmoothed estimator")?;
                let plan = self.plan(2, Statistic::SupVsMeanE, Resampling::Smoothed);
                let s = vertical_samples(&self.data, self.kernel, &bw, &ct, &plan)?;
                Calibration::from_estimate(&s.vs_mean, alphas)
            }
            Method::Vls | Method::C4 => self.asymptotic(),
            Method::H => {
                let plan = self.plan(3, Statistic::HausdorffStd, Resampling::Standard);
                let raw = extract_contour(self.fhat()?.as_ref(), &self.contour_grid, self.level())?;
                let est = quantile_hausdorff_std(&self.data, self.kernel, &self.bw.h, &raw, &self.contour_grid, &plan)?;
                Calibration::from_estimate(&est, alphas)
            }
            Method::C5Star => {
                let plan = self.plan(4, Statistic::CurveDisplacementE, Resampling::Smoothed);
                let est = quantile_curve_displacement(&self.data, self.kernel, &self.bw, &self.target(), &plan)?;
                Calibration::from_estimate(&est, alphas)
            }
            Method::C6Star => {
                let plan = self.plan(5, Statistic::ProjectionDisplacementE, Resampling::Smoothed);
                let est = quantile_projection_displacement(&self.data, self.kernel, &self.bw, &self.target(), &plan)?;
                Calibration::from_estimate(&est, alphas)
            }
        }
    }

    /// Estimator whose band forms a vertical region.
    fn band_estimator(&self, m: Method) -> Result<Arc<DensityEstimator>> {
        match m {
            Method::V | Method::Ve => Ok(self.fhat()?.clone()),
            Method::Vbc | Method::Vls => Ok(self.fbc()?.clone()),
            Method::Vus => Ok(Arc::new(self.undersmoothed()?.1)),
            _ => Err(Error::InvalidArgument(format!("{} is not a vertical method", m.name()))),
        }
    }

    /// Contour the method's region is built around.
    fn base_contour(&self, m: Method) -> Result<Contour> {
        match m {
            Method::V | Method::Ve | Method::H => Ok(self.mhat()?.clone()),
            Method::Vus => self.level_contour(&self.undersmoothed()?.1, "the undersmoothed estimator"),
            _ => Ok(self.mbc()?.clone()),
        }
    }

    fn weighting(m: Method) -> TubeWeighting {
        if m == Method::C5Star {
            TubeWeighting::Unit
        } else {
            TubeWeighting::Gradient
        }
    }

    fn flow_tube(&self, m: Method, q: f64) -> Result<GradientTube> {
        GradientTube::new(
            self.fbc()?.clone(),
            self.level(),
            q,
            self.settings.flow,
            Self::weighting(m),
            self.mbc()?,
        )
    }

    /// Region masks at each alpha; flow tubes are traced once at the largest quantile.
    fn masks(&self, m: Method, q: &[f64]) -> Result<(Vec<RegionMask>, Option<(GradientTube, Vec<TubeVerdict>)>)> {
        let c = self.level();
        if m.is_vertical() {
            let values = self.band_estimator(m)?.eval_grid(&self.grid, GridPoints::Centers)?;
            let masks = q
                .iter()
                .map(|&a| {
                    let inside = values
                        .iter()
                        .map(|&v| vertical_test(v, c - a, c + a, DENSITY_FLOOR))
                        .collect();
                    RegionMask::new(self.grid.clone(), inside)
                })
                .collect();
            return Ok((masks, None));
        }
        match m {
            Method::H | Method::C6Star => {
                let ct = self.base_contour(m)?;
                let masks = q
                    .iter()
                    .map(|&r| RegionMask::new(self.grid.clone(), tube_mask(&ct, r, &self.grid)))
                    .collect();
                Ok((masks, None))
            }
            _ => {
                let q_max = q.iter().copied().fold(0.0, f64::max);
                let tube = self.flow_tube(m, q_max)?;
                let values = self.fbc()?.eval_grid(&self.flow_grid, GridPoints::Centers)?;
                let cells = gradient_tube_verdicts(&tube, &self.flow_grid, &values, q_max);
                let masks = q
                    .iter()
                    .map(|&r| RegionMask::new(self.flow_grid.clone(), cells.iter().map(|v| within(v, r)).collect()))
                    .collect();
                Ok((masks, Some((tube, cells))))
            }
        }
    }

    fn outcome(&self, m: Method, truth: &[Vec<f64>]) -> Result<MethodOutcome> {
        let probes: &[Vec<f64>] = match m.target() {
            Target::TrueSet => truth,
            Target::SmoothedSet => self.smoothed_probes(truth.len())?,
        };
        let cal = self.calibrate(m)?;
        let q = &cal.quantile;
        let (masks, traced) = self.masks(m, q)?;
        let c = self.level();
        let (covered, non_hit, pdf): (Vec<bool>, usize, &[f64]) = match traced {
            None if m.is_vertical() => {
                let est = self.band_estimator(m)?;
                let at: Vec<f64> = probes.iter().map(|p| est.value(p)).collect();
                let cov = q
                    .iter()
                    .map(|&a| at.iter().all(|&v| vertical_test(v, c - a, c + a, DENSITY_FLOOR)))
                    .collect();
                (cov, 0, self.pdf()?)
            }
            None => {
                let index = SegmentIndex::new(&self.base_contour(m)?)?;
                let worst = probes.iter().map(|p| index.distance([p[0], p[1]])).fold(0.0, f64::max);
                (q.iter().map(|&r| worst <= r).collect(), 0, self.pdf()?)
            }
            Some((tube, cells)) => {
                let fbc = self.fbc()?;
                let q_max = tube.quantile();
                let at: Vec<TubeVerdict> = probes
                    .par_iter()
                    .map(|p| tube.verdict(p, fbc.value(p), q_max))
                    .collect();
                let non_hit = cells
                    .iter()
                    .chain(&at)
                    .filter(|v| matches!(v, TubeVerdict::NonHit))
                    .count();
                let cov = q.iter().map(|&r| at.iter().all(|v| within(v, r))).collect();
                (cov, non_hit, self.flow_pdf()?)
            }
        };
        Ok(MethodOutcome {
            quantile: q.clone(),
            covered,
            volume: masks.iter().map(|mk| mk.volume()).collect(),
            mass: masks.iter().map(|mk| mk.mass(pdf)).collect(),
            touches_boundary: masks.iter().map(|mk| mk.touches_boundary()).collect(),
            flow_failures: cal.failures + non_hit,
            skipped_replications: cal.skipped,
        })
    }
}

fn within(v: &TubeVerdict, r: f64) -> bool {
    matches!(v, TubeVerdict::Criterion(x) if *x <= r)
}

/// A single confidence region for one sample.
#[derive(Debug, Clone)]
pub struct FittedRegion {
    pub method: Method,
    pub alpha: f64,
    pub quantile: f64,
    pub bandwidths: Bandwidths,
    /// The estimated level set the region is built around.
    pub contour: Contour,
    pub mask: RegionMask,
    pub flow_failures: usize,
}

/// Calibrates `method` on `data` and rasterizes the region at `alpha`.
pub fn fit_region(
    data: Arc<Dataset>,
    kernel: &KernelSpec,
    bw: Bandwidths,
    settings: &RegionSettings,
    method: Method,
    alpha: f64,
) -> Result<FittedRegion> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let alphas = [alpha];
    let engine = Engine::new(kernel, settings, &alphas, 0, data, bw, None)?;
    if method.is_asymptotic() && engine.bw.h_eff() >= 1.0 {
        return Err(Error::BandwidthTooLarge(engine.bw.h_eff()));
    }
    let cal = engine.calibrate(method)?;
    let (mut masks, traced) = engine.masks(method, &cal.quantile)?;
    let non_hit = traced.map_or(0, |(_, cells)| {
        cells.iter().filter(|v| matches!(v, TubeVerdict::NonHit)).count()
    });
    Ok(FittedRegion {
        method,
        alpha,
        quantile: cal.quantile[0],
        contour: engine.base_contour(method)?,
        bandwidths: engine.bw.clone(),
        mask: masks.remove(0),
        flow_failures: cal.failures + non_hit,
    })
}

/// Sample, estimated contour, true contour and region masks of one run, for plotting.
#[derive(Debug, Clone)]
pub struct Overlay {
    pub data: Arc<Dataset>,
    pub estimate: Option<Contour>,
    pub truth: Contour,
    pub masks: Vec<(Method, RegionMask)>,
}

/// Rebuilds run `index` and rasterizes each requested region at the first alpha.
pub fn run_overlay(exp: &Experiment, index: usize) -> Result<Overlay> {
    let engine = exp.engine(index)?;
    let truth = exp.model.true_contour(exp.settings.level, exp.config.probes)?;
    let mut masks = Vec::new();
    for &m in &exp.config.methods {
        if engine.skip_reason(m).is_some() {
            continue;
        }
        let Ok(cal) = engine.calibrate(m) else { continue };
        if let Ok((mut mk, _)) = engine.masks(m, &cal.quantile[..1]) {
            masks.push((m, mk.remove(0)));
        }
    }
    Ok(Overlay {
        data: engine.data.clone(),
        estimate: engine.mhat().ok().cloned(),
        truth,
        masks,
    })
}

/// Runs the experiment at `config.alpha`.
pub fn run_case(config: &ExperimentConfig) -> Result<CoverageReport> {
    Ok(run_case_alphas(config, &[config.alpha])?.remove(0))
}

/// Runs the experiment once and reports coverage at each alpha from the same draws.
pub fn run_case_alphas(config: &ExperimentConfig, alphas: &[f64]) -> Result<Vec<CoverageReport>> {
    let start = Instant::now();
    let exp = Experiment::new(config, alphas)?;
    let records = Arc::new(exp.run_all());
    let aborted = records.iter().filter(|r| r.methods.is_err()).count();
    if aborted as f64 > MAX_ABORTED_SHARE * records.len() as f64 {
        return Err(Error::TooManyAborted {
            aborted,
            total: records.len(),
        });
    }
    let wall = start.elapsed();
    Ok((0..alphas.len())
        .map(|k| summarize(&exp.config, alphas[k], k, records.clone(), wall))
        .collect())
}
