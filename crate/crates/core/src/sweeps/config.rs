//! Run configuration as read from (and written back to) TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::{self, FiberParams};
use crate::filtering::FilterAxis;
use crate::par::Execution;
use crate::pump::bandwidth_to_tau;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// Frequency-domain `F×G` amplitude (optionally with a dispersing pump).
    AnalyticJsa,
    /// Time-domain amplitude with walk-off and nonlinear phase.
    AnalyticJta,
    /// Split-step propagation of pump and pair.
    Ssf,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::AnalyticJsa => "analytic_jsa",
            Model::AnalyticJta => "analytic_jta",
            Model::Ssf => "ssf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PumpShapeKind {
    #[default]
    Gaussian,
    Square,
}

/// Pump pulse description. A Gaussian takes exactly one of `tau`,
/// `bandwidth_nm` or `walkoff_ratio`; a square pulse takes `duration` or
/// `walkoff_ratio`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSpec {
    #[serde(default)]
    pub shape: PumpShapeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    /// Intensity FWHM bandwidth in nm around the pump wavelength.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth_nm: Option<f64>,
    /// `max|β₁|·L` divided by the pump time scale.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walkoff_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    #[serde(default)]
    pub edge_smoothing: f64,
    /// Linear pump dispersion applied before the fibre, in metres of this fibre.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prechirp_length: Option<f64>,
}

impl PumpSpec {
    /// Time scale in seconds (τ, or the flat-top duration).
    pub fn time_scale(&self, p: &FiberParams) -> Result<f64> {
        let from_ratio = |r: f64| -> Result<f64> {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::Config(format!("walkoff_ratio must be positive, got {r}")));
            }
            let w = p.max_walkoff() * p.length;
            if w == 0.0 {
                return Err(Error::Config("walkoff_ratio needs a fibre with walk-off".into()));
            }
            Ok(w / r)
        };
        let value = match self.shape {
            PumpShapeKind::Gaussian => {
                if self.duration.is_some() {
                    return Err(Error::Config("a Gaussian pump takes tau, not duration".into()));
                }
                match (self.tau, self.bandwidth_nm, self.walkoff_ratio) {
                    (Some(t), None, None) => t,
                    (None, Some(b), None) => bandwidth_to_tau(b * 1e-9, p.lambda_p0)?,
                    (None, None, Some(r)) => from_ratio(r)?,
                    _ => {
                        return Err(Error::Config(
                            "give exactly one of pump.tau, pump.bandwidth_nm, pump.walkoff_ratio".into(),
                        ))
                    }
                }
            }
            PumpShapeKind::Square => {
                if self.tau.is_some() || self.bandwidth_nm.is_some() {
                    return Err(Error::Config("a square pump takes duration, not tau or bandwidth".into()));
                }
                match (self.duration, self.walkoff_ratio) {
                    (Some(d), None) => d,
                    (None, Some(r)) => from_ratio(r)?,
                    _ => {
                        return Err(Error::Config(
                            "give exactly one of pump.duration, pump.walkoff_ratio".into(),
                        ))
                    }
                }
            }
        };
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::Config(format!("pump time scale must be positive, got {value}")));
        }
        Ok(value)
    }

    /// Copy with the time scale pinned to `value`, replacing any other way of giving it.
    pub fn with_time_scale(&self, value: f64) -> Self {
        let mut s = self.clone();
        s.tau = None;
        s.bandwidth_nm = None;
        s.walkoff_ratio = None;
        s.duration = None;
        match s.shape {
            PumpShapeKind::Gaussian => s.tau = Some(value),
            PumpShapeKind::Square => s.duration = Some(value),
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_points")]
    pub n_points: usize,
    /// Time step; when absent the grid is sized from the pump and the walk-off.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Clearance around the amplitude's support in seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    /// Half-width of the automatic JSA window in phase-matching bandwidths.
    #[serde(default = "default_window")]
    pub window_pm_bandwidths: f64,
}

fn default_points() -> usize {
    512
}

fn default_window() -> f64 {
    3.0
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_points: default_points(),
            dt: None,
            margin: None,
            window_pm_bandwidths: default_window(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsaSpec {
    /// Keep the quadratic terms of the phase mismatch.
    #[serde(default = "yes")]
    pub include_beta2: bool,
    /// Integrate along the fibre with the pump dispersing (needed for prechirp).
    #[serde(default)]
    pub dispersed_pump: bool,
    #[serde(default = "default_slices")]
    pub slices: usize,
}

fn yes() -> bool {
    true
}

fn default_slices() -> usize {
    64
}

impl Default for JsaSpec {
    fn default() -> Self {
        Self {
            include_beta2: true,
            dispersed_pump: false,
            slices: default_slices(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SsfSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    pub axis: FilterAxis,
    /// Pass-band centre in rad/s; defaults to each state's marginal centroid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    /// Full pass-band widths in rad/s.
    pub widths: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMethod {
    #[default]
    Golden,
    Scan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSpec {
    #[serde(default)]
    pub method: SearchMethod,
    /// Absolute bracket in seconds; overrides the factors below.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    #[serde(default = "default_lower_factor")]
    pub lower_factor: f64,
    #[serde(default = "default_upper_factor")]
    pub upper_factor: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_scan_points")]
    pub scan_points: usize,
}

fn default_lower_factor() -> f64 {
    0.2
}

fn default_upper_factor() -> f64 {
    5.0
}

fn default_tolerance() -> f64 {
    1e-3
}

fn default_scan_points() -> usize {
    25
}

impl Default for OptimizeSpec {
    fn default() -> Self {
        Self {
            method: SearchMethod::Golden,
            lower: None,
            upper: None,
            lower_factor: default_lower_factor(),
            upper_factor: default_upper_factor(),
            tolerance: default_tolerance(),
            scan_points: default_scan_points(),
        }
    }
}

/// Quantities fixed by automatic resolution, written next to every result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resolved {
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset_version: Option<u32>,
    pub fiber: FiberParams,
    pub pump_time_scale: f64,
    pub pump_grid: GridRecord,
    pub signal_axis: GridRecord,
    pub idler_axis: GridRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ssf_steps: Option<usize>,
}

/// One sampled axis: `domain` is `time` (step in s) or `frequency` (step in rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRecord {
    pub domain: crate::grid::Domain,
    pub n_points: usize,
    pub step: f64,
    pub center: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Model,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber: Option<FiberParams>,
    /// Replaces the fibre length of the preset or table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    /// `false` zeroes every β₂.
    #[serde(default = "yes")]
    pub dispersion: bool,
    /// `false` drops SPM, XPM and the JTA nonlinear phase at every power.
    #[serde(default = "yes")]
    pub phase_modulation: bool,
    /// Target pairs per pulse; `0` is the low-power limit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<Vec<f64>>,
    /// Peak pump powers in W, as an alternative to `rates`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub powers: Option<Vec<f64>>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub execution: Execution,
    pub pump: PumpSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub jsa: JsaSpec,
    #[serde(default)]
    pub ssf: SsfSpec,
    #[serde(default)]
    pub optimize: OptimizeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<FilterConfig>,
    /// Filled in on export; ignored when the file is read back.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved: Option<Resolved>,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// Operating point of one sweep row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepPoint {
    Rate(f64),
    Power(f64),
}

impl RunConfig {
    /// Low-power JTA run on a preset with a Gaussian pump.
    pub fn new(model: Model, preset: &str, pump: PumpSpec) -> Self {
        Self {
            model,
            preset: Some(preset.to_string()),
            fiber: None,
            length: None,
            dispersion: true,
            phase_modulation: true,
            rates: Some(vec![0.0]),
            powers: None,
            output_dir: default_output(),
            execution: Execution::default(),
            pump,
            grid: GridSpec::default(),
            jsa: JsaSpec::default(),
            ssf: SsfSpec::default(),
            optimize: OptimizeSpec::default(),
            filter: None,
            resolved: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Fibre after applying the preset/table, length and dispersion switches.
    pub fn fiber_params(&self) -> Result<FiberParams> {
        let mut p = match (&self.preset, &self.fiber) {
            (Some(name), None) => fiber::preset(name)?.params,
            (None, Some(p)) => *p,
            _ => return Err(Error::Config("give exactly one of preset or [fiber]".into())),
        };
        if let Some(l) = self.length {
            p = p.with_length(l);
        }
        if !self.dispersion {
            p = p.without_dispersion();
        }
        p.validate()?;
        Ok(p)
    }

    pub fn points(&self) -> Result<Vec<SweepPoint>> {
        match (&self.rates, &self.powers) {
            (Some(r), None) => Ok(r.iter().map(|&x| SweepPoint::Rate(x)).collect()),
            (None, Some(p)) => Ok(p.iter().map(|&x| SweepPoint::Power(x)).collect()),
            _ => Err(Error::Config("give exactly one of rates or powers".into())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.fiber_params()?;
        self.pump.time_scale(&p)?;
        if !(self.pump.edge_smoothing.is_finite() && self.pump.edge_smoothing >= 0.0) {
            return Err(Error::Config("pump.edge_smoothing must be non-negative".into()));
        }
        let points = self.points()?;
        if points.is_empty() {
            return Err(Error::Config("the rate or power list is empty".into()));
        }
        for pt in &points {
            match *pt {
                SweepPoint::Rate(r) if !(r.is_finite() && r >= 0.0) => {
                    return Err(Error::Config(format!("rates must be non-negative, got {r}")))
                }
                SweepPoint::Power(w) if !(w.is_finite() && w >= 0.0) => {
                    return Err(Error::Config(format!("powers must be non-negative, got {w}")))
                }
                _ => {}
            }
        }
        if self.grid.n_points < crate::grid::MIN_POINTS {
            return Err(Error::Config(format!(
                "grid.n_points must be at least {}",
                crate::grid::MIN_POINTS
            )));
        }
        for (name, v) in [("grid.dt", self.grid.dt), ("grid.margin", self.grid.margin)] {
            if let Some(x) = v {
                if !(x.is_finite() && x > 0.0) {
                    return Err(Error::Config(format!("{name} must be positive, got {x}")));
                }
            }
        }
        if !(self.grid.window_pm_bandwidths > 0.0) {
            return Err(Error::Config("grid.window_pm_bandwidths must be positive".into()));
        }
        if self.jsa.slices == 0 {
            return Err(Error::Config("jsa.slices must be positive".into()));
        }
        if self.ssf.steps == Some(0) {
            return Err(Error::Config("ssf.steps must be positive".into()));
        }
        let o = &self.optimize;
        if !(o.lower_factor > 0.0 && o.upper_factor > o.lower_factor) {
            return Err(Error::Config("need 0 < optimize.lower_factor < optimize.upper_factor".into()));
        }
        if let (Some(a), Some(b)) = (o.lower, o.upper) {
            if !(a > 0.0 && b > a) {
                return Err(Error::Config("need 0 < optimize.lower < optimize.upper".into()));
            }
        }
        if !(o.tolerance > 0.0 && o.tolerance < 1.0) {
            return Err(Error::Config("optimize.tolerance must lie in (0, 1)".into()));
        }
        if o.scan_points < 3 {
            return Err(Error::Config("optimize.scan_points must be at least 3".into()));
        }
        if let Some(f) = &self.filter {
            if f.widths.is_empty() || f.widths.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                return Err(Error::Config("filter.widths must be a non-empty list of positive widths".into()));
            }
        }
        if self.pump.prechirp_length.is_some() && self.model == Model::AnalyticJsa && !self.jsa.dispersed_pump {
            return Err(Error::Config(
                "a prechirped pump needs jsa.dispersed_pump = true in the analytic_jsa model".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
model = "analytic_jta"
preset = "fiberA-726"
rates = [0.0, 0.1]

[pump]
walkoff_ratio = 10.0
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.grid, GridSpec::default());
        assert_eq!(cfg.execution, Execution::Parallel);
        assert_eq!(cfg.points().unwrap(), vec![SweepPoint::Rate(0.0), SweepPoint::Rate(0.1)]);
        let p = cfg.fiber_params().unwrap();
        let tau = cfg.pump.time_scale(&p).unwrap();
        assert!((tau - 1.14e-11 * 0.5 / 10.0).abs() < 1e-25);
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = RunConfig::from_toml(MINIMAL).unwrap();
        cfg.filter = Some(FilterConfig {
            axis: FilterAxis::Signal,
            center: None,
            widths: vec![1e11, 1e12],
        });
        cfg.pump.prechirp_length = Some(-0.25);
        let back = RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = format!("{MINIMAL}\nspeed = 3\n");
        assert!(matches!(RunConfig::from_toml(&bad), Err(Error::Config(_))));
        let bad = MINIMAL.replace("walkoff_ratio", "walkof_ratio");
        assert!(matches!(RunConfig::from_toml(&bad), Err(Error::Config(_))));
    }

    #[test]
    fn ambiguous_or_missing_choices_are_rejected() {
        let both = MINIMAL.replace("rates = [0.0, 0.1]", "rates = [0.0]\npowers = [1.0]");
        assert!(RunConfig::from_toml(&both).is_err());
        let two_taus = format!("{MINIMAL}tau = 1e-13\n");
        assert!(RunConfig::from_toml(&two_taus).is_err());
        let negative = MINIMAL.replace("0.1]", "-0.1]");
        assert!(RunConfig::from_toml(&negative).is_err());
        let unknown = MINIMAL.replace("fiberA-726", "fiberZ");
        assert!(RunConfig::from_toml(&unknown).is_err());
    }

    #[test]
    fn bandwidth_and_overrides_resolve() {
        let text = MINIMAL.replace("walkoff_ratio = 10.0", "bandwidth_nm = 1.0");
        let mut cfg = RunConfig::from_toml(&text).unwrap();
        cfg.length = Some(0.25);
        cfg.dispersion = false;
        let p = cfg.fiber_params().unwrap();
        assert_eq!(p.length, 0.25);
        assert_eq!((p.beta2_p, p.beta2_s, p.beta2_i), (0.0, 0.0, 0.0));
        let tau = cfg.pump.time_scale(&p).unwrap();
        assert_eq!(tau, bandwidth_to_tau(1e-9, 726e-9).unwrap());
    }

    #[test]
    fn with_time_scale_replaces_every_source() {
        let spec = PumpSpec {
            walkoff_ratio: Some(4.0),
            ..PumpSpec::default()
        };
        let pinned = spec.with_time_scale(2e-13);
        assert_eq!((pinned.tau, pinned.walkoff_ratio), (Some(2e-13), None));
        let square = PumpSpec {
            shape: PumpShapeKind::Square,
            duration: Some(1e-12),
            ..PumpSpec::default()
        };
        assert_eq!(square.with_time_scale(3e-12).duration, Some(3e-12));
    }

    #[test]
    fn prechirp_requires_the_dispersed_jsa() {
        let text = MINIMAL.replace("analytic_jta", "analytic_jsa").replace("rates = [0.0, 0.1]", "rates = [0.0]");
        let mut cfg = RunConfig::from_toml(&text).unwrap();
        cfg.pump.prechirp_length = Some(-0.25);
        assert!(cfg.validate().is_err());
        cfg.jsa.dispersed_pump = true;
        cfg.validate().unwrap();
    }
}
