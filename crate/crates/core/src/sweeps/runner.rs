//! Grid resolution and purity-versus-rate sweeps for the three models.

use crate::amplitude::{transform_2d_with, JointAmplitude};
use crate::error::{Error, Result};
use crate::fiber::{self, FiberParams};
use crate::filtering::{self, FilterCurve};
use crate::grid::{dual_grid, Domain, SpectralGrid, TemporalGrid};
use crate::jsa::{build_jsa_analytic, build_jsa_dispersed_pump};
use crate::jta::{analytic_rate, build_jta_with, generation_rate, power_for_rate, support_grids, JtaOptions};
use crate::par;
use crate::pump::{gaussian_pump, prechirp, square_pump, PumpEnvelope};
use crate::schmidt;
use crate::ssf::{auto_steps, shared_grid, simulate_pair_state, SsfConfig};

use super::config::{GridRecord, Model, PumpShapeKind, PumpSpec, Resolved, RunConfig, SweepPoint};

/// Relative rate tolerance of the split-step power search.
pub const RATE_TOLERANCE: f64 = 0.01;
const MAX_POWER_ITERATIONS: usize = 30;

/// Bounds on the two-photon interference visibility: `V ≤ P` and `V ≥ P − R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityBound {
    pub upper: f64,
    pub lower: f64,
}

pub fn visibility_bound(purity: f64, rate: f64) -> VisibilityBound {
    VisibilityBound {
        upper: purity,
        lower: purity - rate,
    }
}

#[derive(Debug, Clone)]
enum Layout {
    Time(TemporalGrid, TemporalGrid),
    Spectral(SpectralGrid, SpectralGrid),
    Shared(SsfConfig),
}

/// A state at one operating point.
#[derive(Debug, Clone)]
pub struct PointState {
    /// Time domain for `analytic_jta`, frequency domain otherwise.
    pub amplitude: JointAmplitude,
    /// Transform-limited peak power in W; zero in the low-power limit.
    pub peak_power: f64,
    /// Pairs per pulse; zero in the low-power limit, NaN when the model has no rate.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub target_rate: Option<f64>,
    pub peak_power: f64,
    pub rate: f64,
    pub purity: f64,
    pub schmidt_number: f64,
    pub visibility: VisibilityBound,
    /// Set when this point failed; the numeric fields are then NaN.
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
    pub resolved: Resolved,
}

#[derive(Debug, Clone)]
pub struct FilterTable {
    pub curves: Vec<FilterCurve>,
    pub resolved: Resolved,
}

/// A configuration with its fibre, pump and grids fixed.
#[derive(Debug, Clone)]
pub struct Prepared {
    cfg: RunConfig,
    fiber: FiberParams,
    layout: Layout,
    pump: PumpEnvelope,
    // peak of the launched (possibly chirped) pulse per watt of transform-limited peak
    chirp_ratio: f64,
    resolved: Resolved,
}

fn next_power_of_two(x: f64) -> usize {
    (x.ceil().max(1.0) as usize).next_power_of_two()
}

/// Half extent and time scale of the transform-limited pulse.
fn pulse_extent(spec: &PumpSpec, time_scale: f64) -> (f64, f64) {
    match spec.shape {
        PumpShapeKind::Gaussian => (4.0 * time_scale, time_scale),
        PumpShapeKind::Square => (0.5 * (time_scale + spec.edge_smoothing), 0.5 * time_scale),
    }
}

fn require_margin(margin: f64, half_extent: f64) -> Result<()> {
    if margin < half_extent {
        return Err(Error::Config(format!(
            "support margin {margin:.3e} s is below the pump half extent {half_extent:.3e} s"
        )));
    }
    Ok(())
}

fn build_pump(spec: &PumpSpec, time_scale: f64, grid: TemporalGrid, p: &FiberParams) -> Result<(PumpEnvelope, f64)> {
    let pump = match spec.shape {
        PumpShapeKind::Gaussian => gaussian_pump(grid, time_scale, 1.0)?,
        PumpShapeKind::Square => square_pump(grid, time_scale, 1.0, spec.edge_smoothing)?,
    };
    match spec.prechirp_length {
        Some(l) => {
            let chirped = prechirp(&pump, p.beta2_p, l)?;
            let ratio = chirped.peak_power();
            Ok((chirped, ratio))
        }
        None => Ok((pump, 1.0)),
    }
}

fn time_record(g: &TemporalGrid) -> GridRecord {
    GridRecord {
        domain: Domain::Time,
        n_points: g.n_points(),
        step: g.dt(),
        center: g.t_center(),
    }
}

fn frequency_record(g: &SpectralGrid) -> GridRecord {
    GridRecord {
        domain: Domain::Frequency,
        n_points: g.n_points(),
        step: g.d_omega(),
        center: g.omega_center(),
    }
}

impl Prepared {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let p = cfg.fiber_params()?;
        let spec = &cfg.pump;
        let scale = spec.time_scale(&p)?;
        let (half, t) = pulse_extent(spec, scale);
        let chirp = spec.prechirp_length.unwrap_or(0.0);
        let spread = |length: f64| (1.0 + (p.beta2_p * length / (t * t)).powi(2)).sqrt();
        let n = cfg.grid.n_points;

        let (layout, pump_grid) = match cfg.model {
            Model::AnalyticJta => {
                let pump_margin = (half + t) * spread(chirp);
                let margin = cfg.grid.margin.unwrap_or(pump_margin);
                let dt_p = t / 40.0;
                let pump_grid = TemporalGrid::centered(next_power_of_two(2.0 * pump_margin / dt_p), dt_p)?;
                require_margin(margin, half)?;
                let (s, i) = match cfg.grid.dt {
                    Some(dt) => {
                        let walk = p.max_walkoff() * p.length;
                        require_margin(0.5 * ((n - 1) as f64 * dt - walk), half)?;
                        let axis = |b1: f64| {
                            let mid = 0.5 * ((b1 * p.length).min(0.0) + (b1 * p.length).max(0.0));
                            TemporalGrid::new(n, dt, mid)
                        };
                        (axis(p.beta1_s)?, axis(p.beta1_i)?)
                    }
                    None => support_grids(&p, 0.0, margin, n)?,
                };
                (Layout::Time(s, i), pump_grid)
            }
            Model::Ssf => {
                let far = spread(chirp).max(spread(chirp + p.length));
                let margin = cfg.grid.margin.unwrap_or((half + t) * far);
                require_margin(margin, half)?;
                let grid = match cfg.grid.dt {
                    Some(dt) => {
                        let ends = [0.0, p.beta1_s * p.length, p.beta1_i * p.length];
                        let lo = ends.iter().copied().fold(f64::INFINITY, f64::min);
                        let hi = ends.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                        require_margin(0.5 * ((n - 1) as f64 * dt - (hi - lo)), half)?;
                        TemporalGrid::new(n, dt, 0.5 * (lo + hi))?
                    }
                    None => shared_grid(&p, 0.0, margin, n)?,
                };
                let steps = cfg.ssf.steps.unwrap_or_else(|| auto_steps(&p, &grid));
                let mut sc = SsfConfig::new(steps, grid);
                sc.execution = cfg.execution;
                if !cfg.phase_modulation {
                    sc = sc.without_phase_modulation();
                }
                sc.validate(&p)?;
                (Layout::Shared(sc), grid)
            }
            Model::AnalyticJsa => {
                if let Some(SweepPoint::Rate(r)) = cfg.points()?.into_iter().find(|pt| *pt != SweepPoint::Rate(0.0)) {
                    return Err(Error::Config(format!(
                        "the analytic_jsa model only covers the low-power limit; got rate {r}, use powers for the CW term"
                    )));
                }
                if cfg.jsa.dispersed_pump && cfg.points()?.iter().any(|pt| matches!(pt, SweepPoint::Power(w) if *w > 0.0)) {
                    return Err(Error::Config("the dispersed-pump JSA has no power-dependent term".into()));
                }
                match cfg.grid.dt {
                    Some(dt) => {
                        let tg = TemporalGrid::centered(n, dt)?;
                        let g = dual_grid(&tg);
                        (Layout::Spectral(g, g), tg)
                    }
                    None => {
                        let mut w = 8.0 / t;
                        if p.max_walkoff() > 0.0 {
                            w = w.max(cfg.grid.window_pm_bandwidths * p.phase_matching_bandwidth());
                        }
                        let g = dual_grid(&TemporalGrid::centered(n, std::f64::consts::PI / w)?);
                        let dt_p = std::f64::consts::PI / (2.0 * w);
                        let far = if cfg.jsa.dispersed_pump {
                            spread(chirp).max(spread(chirp + p.length))
                        } else {
                            spread(chirp)
                        };
                        let margin = cfg.grid.margin.unwrap_or((half + t) * far);
                        let n_p = next_power_of_two((2.0 * margin / dt_p).max(4.0 * n as f64));
                        (Layout::Spectral(g, g), TemporalGrid::centered(n_p, dt_p)?)
                    }
                }
            }
        };

        if let Layout::Spectral(g, _) = &layout {
            if p.max_walkoff() > 0.0 && g.span() < 4.0 * p.phase_matching_bandwidth() {
                return Err(Error::Config(format!(
                    "spectral window {:.3e} rad/s is narrower than 4 phase-matching bandwidths ({:.3e} rad/s)",
                    g.span(),
                    4.0 * p.phase_matching_bandwidth()
                )));
            }
        }
        let (pump, chirp_ratio) = build_pump(spec, scale, pump_grid, &p)?;
        let (signal_axis, idler_axis) = match &layout {
            Layout::Time(s, i) => (time_record(s), time_record(i)),
            Layout::Spectral(s, i) => (frequency_record(s), frequency_record(i)),
            Layout::Shared(sc) => {
                let g = dual_grid(&sc.grid);
                (frequency_record(&g), frequency_record(&g))
            }
        };
        let preset_version = match &cfg.preset {
            Some(name) => Some(fiber::preset(name)?.version),
            None => None,
        };
        let resolved = Resolved {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            preset: cfg.preset.clone(),
            preset_version,
            fiber: p,
            pump_time_scale: scale,
            pump_grid: time_record(&pump_grid),
            signal_axis,
            idler_axis,
            ssf_steps: match &layout {
                Layout::Shared(sc) => Some(sc.n_steps),
                _ => None,
            },
        };
        Ok(Self {
            cfg: cfg.clone(),
            fiber: p,
            layout,
            pump,
            chirp_ratio,
            resolved,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn fiber(&self) -> &FiberParams {
        &self.fiber
    }

    pub fn resolved(&self) -> &Resolved {
        &self.resolved
    }

    /// Launched pump at 1 W transform-limited peak power.
    pub fn unit_pump(&self) -> &PumpEnvelope {
        &self.pump
    }

    fn pump_at(&self, peak_power: f64) -> Result<PumpEnvelope> {
        self.pump.with_peak_power(peak_power * self.chirp_ratio)
    }

    /// Builds the state at one operating point.
    pub fn state_at(&self, point: SweepPoint) -> Result<PointState> {
        let p = &self.fiber;
        let low_power = matches!(point, SweepPoint::Rate(r) | SweepPoint::Power(r) if r == 0.0);
        match &self.layout {
            Layout::Time(s, i) => {
                let peak_power = match point {
                    _ if low_power => 0.0,
                    SweepPoint::Power(w) => w,
                    SweepPoint::Rate(r) => power_for_rate(&self.pump, p, s, i, r)? / self.chirp_ratio,
                };
                let opts = JtaOptions {
                    nonlinear_phase: self.cfg.phase_modulation && !low_power,
                    execution: self.cfg.execution,
                };
                let pump = if low_power { self.pump.clone() } else { self.pump_at(peak_power)? };
                let amplitude = build_jta_with(&pump, p, s, i, &opts)?;
                let rate = if low_power { 0.0 } else { generation_rate(&amplitude)? };
                Ok(PointState {
                    amplitude,
                    peak_power,
                    rate,
                })
            }
            Layout::Spectral(s, i) => {
                let cw = match point {
                    SweepPoint::Power(w) if self.cfg.phase_modulation => w,
                    SweepPoint::Rate(r) if r > 0.0 => {
                        return Err(Error::Config("the analytic_jsa model has no rate dependence".into()))
                    }
                    _ => 0.0,
                };
                let exec = self.cfg.execution;
                let amplitude = if self.cfg.jsa.dispersed_pump {
                    build_jsa_dispersed_pump(&self.pump, p, s, i, self.cfg.jsa.slices, exec)?
                } else {
                    build_jsa_analytic(&self.pump, p, s, i, self.cfg.jsa.include_beta2, cw, exec)?
                };
                Ok(PointState {
                    amplitude,
                    peak_power: match point {
                        SweepPoint::Power(w) => w,
                        SweepPoint::Rate(_) => 0.0,
                    },
                    rate: if low_power { 0.0 } else { f64::NAN },
                })
            }
            Layout::Shared(sc) => match point {
                _ if low_power => Ok(PointState {
                    amplitude: simulate_pair_state(&self.pump, p, &sc.without_phase_modulation())?,
                    peak_power: 0.0,
                    rate: 0.0,
                }),
                SweepPoint::Power(w) => {
                    let amplitude = simulate_pair_state(&self.pump_at(w)?, p, sc)?;
                    let rate = amplitude.rate();
                    Ok(PointState {
                        amplitude,
                        peak_power: w,
                        rate,
                    })
                }
                SweepPoint::Rate(r) => self.ssf_state_for_rate(sc, r),
            },
        }
    }

    /// Scaled-secant search on `R ∝ P²` with a bisection safeguard.
    fn ssf_state_for_rate(&self, sc: &SsfConfig, target: f64) -> Result<PointState> {
        let p = &self.fiber;
        let unit_rate = if p.differential_walkoff() > 0.0 {
            analytic_rate(&self.pump_at(1.0)?, p)
        } else {
            f64::NAN
        };
        let mut power = if unit_rate.is_finite() && unit_rate > 0.0 {
            (target / unit_rate).sqrt()
        } else {
            1.0
        };
        let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
        for _ in 0..MAX_POWER_ITERATIONS {
            let amplitude = simulate_pair_state(&self.pump_at(power)?, p, sc)?;
            let rate = amplitude.rate();
            if (rate / target - 1.0).abs() <= RATE_TOLERANCE {
                return Ok(PointState {
                    amplitude,
                    peak_power: power,
                    rate,
                });
            }
            if !(rate.is_finite() && rate > 0.0) {
                return Err(Error::Numerical(format!("split-step rate {rate} at {power} W")));
            }
            if rate < target {
                lo = lo.max(power);
            } else {
                hi = hi.min(power);
            }
            let mut next = power * (target / rate).sqrt();
            if next <= lo || next >= hi {
                next = if hi.is_finite() {
                    if lo > 0.0 {
                        (lo * hi).sqrt()
                    } else {
                        0.5 * hi
                    }
                } else {
                    2.0 * lo
                };
            }
            power = next;
        }
        Err(Error::Numerical(format!(
            "split-step power search did not reach rate {target} within {MAX_POWER_ITERATIONS} runs"
        )))
    }

    /// Frequency-domain state, transforming the JTA when necessary.
    pub fn spectral_state_at(&self, point: SweepPoint) -> Result<PointState> {
        let mut st = self.state_at(point)?;
        if st.amplitude.domain() == Domain::Time {
            st.amplitude = transform_2d_with(&st.amplitude, self.cfg.execution)?;
        }
        Ok(st)
    }

    /// Time-domain state, transforming the JSA when necessary.
    pub fn temporal_state_at(&self, point: SweepPoint) -> Result<PointState> {
        let mut st = self.state_at(point)?;
        if st.amplitude.domain() == Domain::Frequency {
            st.amplitude = transform_2d_with(&st.amplitude, self.cfg.execution)?;
        }
        Ok(st)
    }

    pub fn row(&self, point: SweepPoint) -> RateRow {
        let target_rate = match point {
            SweepPoint::Rate(r) => Some(r),
            SweepPoint::Power(_) => None,
        };
        let outcome = self.state_at(point).and_then(|st| {
            let decomposition = schmidt::schmidt_decompose(&st.amplitude)?;
            Ok((st, decomposition))
        });
        match outcome {
            Ok((st, d)) => RateRow {
                target_rate,
                peak_power: st.peak_power,
                rate: st.rate,
                purity: d.purity,
                schmidt_number: d.schmidt_number(),
                visibility: visibility_bound(d.purity, st.rate),
                diagnostic: None,
            },
            Err(e) => RateRow {
                target_rate,
                peak_power: f64::NAN,
                rate: f64::NAN,
                purity: f64::NAN,
                schmidt_number: f64::NAN,
                visibility: visibility_bound(f64::NAN, f64::NAN),
                diagnostic: Some(e.to_string()),
            },
        }
    }
}

/// One row per configured rate or power. Configuration errors abort the sweep;
/// numerical failures are reported in the row's diagnostic.
pub fn purity_vs_rate(cfg: &RunConfig) -> Result<RateTable> {
    let prepared = Prepared::new(cfg)?;
    let points = cfg.points()?;
    let rows = par::map(cfg.execution, &points, |&pt| prepared.row(pt));
    Ok(RateTable {
        rows,
        resolved: prepared.resolved.clone(),
    })
}

/// Purity against effective rate for every configured point and filter width.
pub fn filter_sweep(cfg: &RunConfig) -> Result<FilterTable> {
    let filter = cfg
        .filter
        .as_ref()
        .ok_or_else(|| Error::Config("filter sweep needs a [filter] table".into()))?;
    let prepared = Prepared::new(cfg)?;
    let points = cfg.points()?;
    let states = par::map(cfg.execution, &points, |&pt| {
        prepared.spectral_state_at(pt).map(|st| (st.rate, st.amplitude))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let curves =
        filtering::purity_vs_effective_rate(&states, filter.axis, &filter.widths, filter.center, cfg.execution)?;
    Ok(FilterTable {
        curves,
        resolved: prepared.resolved.clone(),
    })
}
