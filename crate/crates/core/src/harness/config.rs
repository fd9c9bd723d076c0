use std::path::Path;

use serde::Deserialize;

use crate::density::Bandwidths;
use crate::error::{Error, Result};
use crate::flow::FlowOptions;
use crate::models::Preset;
use crate::regions::Target;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    H,
    Ve,
    V,
    Vbc,
    Vus,
    Vls,
    C4,
    C4Star,
    C5Star,
    C6Star,
}

impl Method {
    pub const ALL: [Method; 10] = [
        Method::H,
        Method::Ve,
        Method::V,
        Method::Vbc,
        Method::Vus,
        Method::Vls,
        Method::C4,
        Method::C4Star,
        Method::C5Star,
        Method::C6Star,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::H => "H",
            Method::Ve => "V.e",
            Method::V => "V",
            Method::Vbc => "V.bc",
            Method::Vus => "V.us",
            Method::Vls => "V.ls",
            Method::C4 => "C4",
            Method::C4Star => "C4*",
            Method::C5Star => "C5*",
            Method::C6Star => "C6*",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(name.trim()))
            .ok_or_else(|| Error::UnknownName(format!("method '{name}'")))
    }

    /// Band of the form `F^{-1}[c - q, c + q]`.
    pub fn is_vertical(&self) -> bool {
        matches!(self, Method::Ve | Method::V | Method::Vbc | Method::Vus | Method::Vls)
    }

    /// Needs the extreme-value quantile, which requires `h < 1`.
    pub fn is_asymptotic(&self) -> bool {
        matches!(self, Method::Vls | Method::C4)
    }

    pub fn target(&self) -> Target {
        match self {
            Method::H | Method::Ve => Target::SmoothedSet,
            _ => Target::TrueSet,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BandwidthRule {
    NormalScale,
    Fixed(Bandwidths),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    /// Cells per axis for volumes and masses.
    pub resolution: usize,
    /// Cells per axis for contour extraction.
    pub contour_resolution: usize,
    /// Cells per axis for regions whose membership needs a flow trace.
    pub flow_resolution: usize,
    /// Fixed bounds; the padded data range when absent.
    pub bounds: Option<(Vec<f64>, Vec<f64>)>,
}

/// Flow step as a fraction of the smallest bandwidth.
pub const FLOW_STEP_FRAC: f64 = 1.0 / 16.0;

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            resolution: 512,
            contour_resolution: 128,
            flow_resolution: 128,
            bounds: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub case: Preset,
    pub n: usize,
    pub runs: usize,
    pub replications: usize,
    pub alpha: f64,
    pub methods: Vec<Method>,
    pub grid: GridConfig,
    pub bandwidth_rule: BandwidthRule,
    pub undersmooth_factor: f64,
    pub seed: u64,
    pub probes: usize,
    pub flow: FlowOptions,
}

impl ExperimentConfig {
    pub fn new(case: Preset, n: usize, runs: usize, replications: usize, methods: Vec<Method>, seed: u64) -> Self {
        Self {
            case,
            n,
            runs,
            replications,
            alpha: 0.1,
            methods,
            grid: GridConfig::default(),
            bandwidth_rule: BandwidthRule::NormalScale,
            undersmooth_factor: 0.7,
            seed,
            probes: 1024,
            flow: FlowOptions {
                step_frac: FLOW_STEP_FRAC,
                ..FlowOptions::default()
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if self.runs < 1 {
            return bad("runs must be at least 1".into());
        }
        if self.replications < 20 {
            return bad(format!("replications must be at least 20, got {}", self.replications));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.alpha * (self.replications as f64) < 1.0 - 1e-9 {
            return bad("alpha * replications must be at least 1".into());
        }
        if self.methods.is_empty() {
            return bad("no methods requested".into());
        }
        if !(self.undersmooth_factor > 0.0 && self.undersmooth_factor <= 1.0) {
            return bad(format!(
                "undersmooth_factor must lie in (0, 1], got {}",
                self.undersmooth_factor
            ));
        }
        if self.probes < 16 {
            return bad("need at least 16 probes".into());
        }
        let g = &self.grid;
        if g.resolution < 16 || g.contour_resolution < 16 || g.flow_resolution < 16 {
            return bad("grid resolutions must be at least 16".into());
        }
        if let Some((lo, hi)) = &g.bounds {
            if lo.len() != 2 || hi.len() != 2 || lo.iter().zip(hi).any(|(a, b)| !(a < b)) {
                return bad("grid bounds must be two increasing pairs".into());
            }
        }
        if let BandwidthRule::Fixed(bw) = &self.bandwidth_rule {
            bw.validate(2).map_err(|e| Error::Config(e.to_string()))?;
        }
        self.flow.validate().map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        raw.into_config()
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    case: String,
    n: usize,
    runs: usize,
    replications: usize,
    alpha: Option<f64>,
    methods: Vec<String>,
    seed: Option<u64>,
    undersmooth_factor: Option<f64>,
    probes: Option<usize>,
    bandwidth: Option<RawBandwidth>,
    grid: Option<RawGrid>,
    flow: Option<RawFlow>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBandwidth {
    rule: String,
    h: Option<Vec<f64>>,
    l: Option<Vec<f64>>,
    g: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    resolution: Option<usize>,
    contour_resolution: Option<usize>,
    flow_resolution: Option<usize>,
    lower: Option<Vec<f64>>,
    upper: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFlow {
    step_frac: Option<f64>,
    grad_floor: Option<f64>,
    max_steps: Option<usize>,
    level_tol: Option<f64>,
}

impl RawConfig {
    fn into_config(self) -> Result<ExperimentConfig> {
        let case = Preset::parse(&self.case).map_err(|e| Error::Config(e.to_string()))?;
        let methods = self
            .methods
            .iter()
            .map(|m| Method::parse(m).map_err(|e| Error::Config(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let mut cfg = ExperimentConfig::new(
            case,
            self.n,
            self.runs,
            self.replications,
            methods,
            self.seed.unwrap_or(0),
        );
        if let Some(a) = self.alpha {
            cfg.alpha = a;
        }
        if let Some(u) = self.undersmooth_factor {
            cfg.undersmooth_factor = u;
        }
        if let Some(p) = self.probes {
            cfg.probes = p;
        }
        if let Some(b) = self.bandwidth {
            cfg.bandwidth_rule = match b.rule.as_str() {
                "normal_scale" => BandwidthRule::NormalScale,
                "fixed" => match (b.h, b.l, b.g) {
                    (Some(h), Some(l), Some(g)) => BandwidthRule::Fixed(Bandwidths { h, l, g }),
                    _ => return Err(Error::Config("fixed bandwidths need h, l and g".into())),
                },
                other => return Err(Error::Config(format!("unknown bandwidth rule '{other}'"))),
            };
        }
        if let Some(g) = self.grid {
            let d = &mut cfg.grid;
            d.resolution = g.resolution.unwrap_or(d.resolution);
            d.contour_resolution = g.contour_resolution.unwrap_or(d.contour_resolution);
            d.flow_resolution = g.flow_resolution.unwrap_or(d.flow_resolution);
            d.bounds = match (g.lower, g.upper) {
                (Some(lo), Some(hi)) => Some((lo, hi)),
                (None, None) => None,
                _ => return Err(Error::Config("grid bounds need both lower and upper".into())),
            };
        }
        if let Some(f) = self.flow {
            let o = &mut cfg.flow;
            o.step_frac = f.step_frac.unwrap_or(o.step_frac);
            o.grad_floor = f.grad_floor.unwrap_or(o.grad_floor);
            o.max_steps = f.max_steps.unwrap_or(o.max_steps);
            o.level_tol = f.level_tol.unwrap_or(o.level_tol);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
