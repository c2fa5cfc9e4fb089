//! Split-step Fourier propagation of the pump and of the first-order pair state.
//!
//! Each step applies half a step of dispersion, the nonlinear operators in the
//! time domain, then the other half step of dispersion. New pairs are added
//! coherently on the diagonal `t_s = t_i` during the nonlinear part.

use num_complex::Complex64;

use crate::amplitude::{Axis, JointAmplitude, Transform2d};
use crate::error::{Error, Result};
use crate::fiber::FiberParams;
use crate::grid::{dual_grid, Direction, Domain, FourierPlan, TemporalGrid};
use crate::par::{self, Execution};
use crate::pump::PumpEnvelope;
use crate::schmidt;

/// Steps used when neither photon walks off and the step constraint is vacuous.
pub const DEFAULT_STEPS_WITHOUT_WALKOFF: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsfConfig {
    pub n_steps: usize,
    /// Shared time axis of the pump, signal and idler.
    pub grid: TemporalGrid,
    /// Pump self-phase modulation.
    pub spm: bool,
    /// Cross-phase modulation of the pair by the pump.
    pub xpm: bool,
    pub execution: Execution,
}

impl SsfConfig {
    pub fn new(n_steps: usize, grid: TemporalGrid) -> Self {
        Self {
            n_steps,
            grid,
            spm: true,
            xpm: true,
            execution: Execution::default(),
        }
    }

    /// Step count giving `dz = dt/(2·max|β₁|)`.
    pub fn auto(p: &FiberParams, grid: TemporalGrid) -> Self {
        Self::new(auto_steps(p, &grid), grid)
    }

    /// Pump SPM and pair XPM both switched off.
    pub fn without_phase_modulation(mut self) -> Self {
        self.spm = false;
        self.xpm = false;
        self
    }

    pub fn dz(&self, p: &FiberParams) -> f64 {
        p.length / self.n_steps as f64
    }

    /// Checks the step count and that neither photon crosses a time bin per step.
    pub fn validate(&self, p: &FiberParams) -> Result<()> {
        if self.n_steps == 0 {
            return Err(Error::Config("n_steps must be positive".into()));
        }
        let shift = p.max_walkoff() * self.dz(p);
        if shift >= self.grid.dt() {
            return Err(Error::Config(format!(
                "step too long: walk-off per step {shift:.3e} s is not below dt = {:.3e} s; need more than {} steps",
                self.grid.dt(),
                (p.max_walkoff() * p.length / self.grid.dt()).floor()
            )));
        }
        Ok(())
    }
}

pub fn auto_steps(p: &FiberParams, grid: &TemporalGrid) -> usize {
    let w = p.max_walkoff();
    if w == 0.0 {
        return DEFAULT_STEPS_WITHOUT_WALKOFF;
    }
    ((2.0 * w * p.length / grid.dt()).ceil() as usize).max(1)
}

/// Shared grid of `n_points` holding the pump and both walk-off ranges with `margin` of clearance.
pub fn shared_grid(p: &FiberParams, center: f64, margin: f64, n_points: usize) -> Result<TemporalGrid> {
    let ends = [0.0, p.beta1_s * p.length, p.beta1_i * p.length];
    let lo = center + ends.iter().copied().fold(f64::INFINITY, f64::min) - margin;
    let hi = center + ends.iter().copied().fold(f64::NEG_INFINITY, f64::max) + margin;
    let dt = (hi - lo) / (n_points.max(2) - 1) as f64;
    TemporalGrid::new(n_points, dt, lo + (n_points / 2) as f64 * dt)
}

/// `e^{i·k(ω)·length}` on a spectral axis.
fn phase_vector(omegas: &[f64], beta1: f64, beta2: f64, length: f64) -> Vec<Complex64> {
    omegas
        .iter()
        .map(|&w| Complex64::from_polar(1.0, (beta1 * w + 0.5 * beta2 * w * w) * length))
        .collect()
}

/// Pump stepper with its plan and half-step dispersion phase cached.
struct PumpStepper {
    plan: FourierPlan,
    scratch: Vec<Complex64>,
    half: Vec<Complex64>,
    gamma_dz: f64,
}

impl PumpStepper {
    fn new(p: &FiberParams, cfg: &SsfConfig) -> Self {
        let dz = cfg.dz(p);
        let omegas = dual_grid(&cfg.grid).omegas();
        let plan = FourierPlan::new(cfg.grid.n_points());
        let scratch = plan.scratch();
        Self {
            plan,
            scratch,
            half: phase_vector(&omegas, 0.0, p.beta2_p, 0.5 * dz),
            gamma_dz: if cfg.spm { p.gamma_p * dz } else { 0.0 },
        }
    }

    fn disperse_half(&mut self, e: &mut [Complex64]) {
        self.plan
            .process_with_scratch(e, Direction::TimeToFrequency, &mut self.scratch);
        for (z, d) in e.iter_mut().zip(&self.half) {
            *z *= d;
        }
        self.plan
            .process_with_scratch(e, Direction::FrequencyToTime, &mut self.scratch);
    }

    /// Advances one step and returns the field halfway through the nonlinear part.
    fn step(&mut self, e: &mut [Complex64]) -> Vec<Complex64> {
        self.disperse_half(e);
        let mut mid = Vec::with_capacity(e.len());
        for z in e.iter_mut() {
            let phi = self.gamma_dz * z.norm_sqr();
            mid.push(*z * Complex64::from_polar(1.0, 0.5 * phi));
            *z *= Complex64::from_polar(1.0, phi);
        }
        self.disperse_half(e);
        mid
    }
}

fn check_pump_grid(pump: &PumpEnvelope, cfg: &SsfConfig) -> Result<()> {
    if pump.grid() != &cfg.grid {
        return Err(Error::Dimension(
            "pump must be sampled on the SSF grid".into(),
        ));
    }
    Ok(())
}

/// Pump envelope at the midpoint of every step; coverage is checked at each one.
pub fn propagate_pump(pump: &PumpEnvelope, p: &FiberParams, cfg: &SsfConfig) -> Result<Vec<PumpEnvelope>> {
    cfg.validate(p)?;
    check_pump_grid(pump, cfg)?;
    let mut stepper = PumpStepper::new(p, cfg);
    let mut e = pump.samples().to_vec();
    (0..cfg.n_steps)
        .map(|_| PumpEnvelope::from_samples(cfg.grid, stepper.step(&mut e), pump.shape()))
        .collect()
}

/// Pump envelope at the fibre output.
pub fn propagate_pump_to_end(pump: &PumpEnvelope, p: &FiberParams, cfg: &SsfConfig) -> Result<PumpEnvelope> {
    cfg.validate(p)?;
    check_pump_grid(pump, cfg)?;
    let mut stepper = PumpStepper::new(p, cfg);
    let mut e = pump.samples().to_vec();
    for _ in 0..cfg.n_steps {
        stepper.step(&mut e);
    }
    PumpEnvelope::from_samples(cfg.grid, e, pump.shape())
}

fn apply_axis_phases(ja: &mut JointAmplitude, s: &[Complex64], i: &[Complex64], exec: Execution) {
    let cols = ja.cols();
    par::for_each_row(exec, ja.data_mut(), cols, |j, row| {
        let a = s[j];
        for (z, b) in row.iter_mut().zip(i) {
            *z *= a * b;
        }
    });
}

/// Multiplies a JSA by `e^{i(β₁Δω + (β₂/2)Δω²)·dz/2}` on each axis, delaying
/// photons with positive relative β₁.
pub fn pair_dispersion_half_step(jsa: &mut JointAmplitude, p: &FiberParams, dz: f64) -> Result<()> {
    jsa.require_domain(Domain::Frequency)?;
    let ws = jsa.signal_axis().values();
    let wi = jsa.idler_axis().values();
    let s = phase_vector(&ws, p.beta1_s, p.beta2_s, 0.5 * dz);
    let i = phase_vector(&wi, p.beta1_i, p.beta2_i, 0.5 * dz);
    apply_axis_phases(jsa, &s, &i, Execution::default());
    Ok(())
}

fn require_pump_axes(jta: &JointAmplitude, pump: &PumpEnvelope) -> Result<()> {
    jta.require_domain(Domain::Time)?;
    let same = |a: &Axis| a.as_time() == Some(pump.grid());
    if !(same(jta.signal_axis()) && same(jta.idler_axis())) {
        return Err(Error::Dimension("JTA axes must match the pump grid".into()));
    }
    Ok(())
}

fn xpm_vector(pump: &[Complex64], gamma: f64, dz: f64) -> Vec<Complex64> {
    pump.iter()
        .map(|e| Complex64::from_polar(1.0, 2.0 * gamma * e.norm_sqr() * dz))
        .collect()
}

/// Cross-phase modulation of both photons by the pump over one step.
pub fn pair_xpm_step(jta: &mut JointAmplitude, pump_at_z: &PumpEnvelope, p: &FiberParams, dz: f64) -> Result<()> {
    require_pump_axes(jta, pump_at_z)?;
    let s = xpm_vector(pump_at_z.samples(), p.gamma_s, dz);
    let i = xpm_vector(pump_at_z.samples(), p.gamma_i, dz);
    apply_axis_phases(jta, &s, &i, Execution::default());
    Ok(())
}

fn inject_diagonal(data: &mut [Complex64], cols: usize, pump: &[Complex64], coefficient: Complex64) {
    for (j, e) in pump.iter().enumerate() {
        data[j * cols + j] += coefficient * e * e;
    }
}

/// Adds `i√(γₛγᵢ)·E_p²·dz/dt` on the diagonal.
pub fn fwm_inject_step(jta: &mut JointAmplitude, pump_at_z: &PumpEnvelope, p: &FiberParams, dz: f64) -> Result<()> {
    require_pump_axes(jta, pump_at_z)?;
    let coefficient = Complex64::new(0.0, (p.gamma_s * p.gamma_i).sqrt() * dz / pump_at_z.grid().dt());
    let cols = jta.cols();
    inject_diagonal(jta.data_mut(), cols, pump_at_z.samples(), coefficient);
    Ok(())
}

/// Full SSF run; returns the output JSA with `rate_scale = dt²` so that
/// [`JointAmplitude::rate`] gives pairs per pulse.
pub fn simulate_pair_state(pump: &PumpEnvelope, p: &FiberParams, cfg: &SsfConfig) -> Result<JointAmplitude> {
    cfg.validate(p)?;
    check_pump_grid(pump, cfg)?;
    let exec = cfg.execution;
    let grid = cfg.grid;
    let n = grid.n_points();
    let dz = cfg.dz(p);
    let dt = grid.dt();
    let omegas = dual_grid(&grid).omegas();
    let half_s = phase_vector(&omegas, p.beta1_s, p.beta2_s, 0.5 * dz);
    let half_i = phase_vector(&omegas, p.beta1_i, p.beta2_i, 0.5 * dz);
    let full_s = phase_vector(&omegas, p.beta1_s, p.beta2_s, dz);
    let full_i = phase_vector(&omegas, p.beta1_i, p.beta2_i, dz);
    let coefficient = Complex64::new(0.0, (p.gamma_s * p.gamma_i).sqrt() * dz / dt);

    let mut stepper = PumpStepper::new(p, cfg);
    let mut e = pump.samples().to_vec();
    let plan = Transform2d::new(n, n, exec);
    let mut state = JointAmplitude::zeros(Axis::Time(grid), Axis::Time(grid), dt * dt)?;

    for step in 0..cfg.n_steps {
        let mid = stepper.step(&mut e);
        if step > 0 {
            // the trailing half step of the previous iteration merged with this leading one
            apply_axis_phases(&mut state, &full_s, &full_i, exec);
            plan.apply(&mut state)?;
        }
        if cfg.xpm {
            let xs = xpm_vector(&mid, p.gamma_s, dz);
            let xi = xpm_vector(&mid, p.gamma_i, dz);
            apply_axis_phases(&mut state, &xs, &xi, exec);
        }
        inject_diagonal(state.data_mut(), n, &mid, coefficient);
        plan.apply(&mut state)?;
    }
    apply_axis_phases(&mut state, &half_s, &half_i, exec);
    PumpEnvelope::from_samples(grid, e, pump.shape())?;
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceTarget {
    Pump,
    PairState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub dz: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `ln deviation` against `ln dz`; `None` when the
    /// deviations sit at the rounding floor.
    pub order: Option<f64>,
}

/// Deviations below this are indistinguishable from rounding.
pub const NOISE_FLOOR: f64 = 1e-11;

/// Self-convergence against the finest configuration in `configs`.
pub fn convergence_study(
    pump: &PumpEnvelope,
    p: &FiberParams,
    configs: &[SsfConfig],
    target: ConvergenceTarget,
) -> Result<ConvergenceReport> {
    if configs.len() < 2 {
        return Err(Error::Config("convergence study needs at least two configurations".into()));
    }
    let finest = configs
        .iter()
        .max_by_key(|c| c.n_steps)
        .copied()
        .ok_or_else(|| Error::Config("no configurations".into()))?;
    let relative = |a: &[Complex64], b: &[Complex64]| {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    };
    let mut rows = Vec::new();
    match target {
        ConvergenceTarget::Pump => {
            let reference = propagate_pump_to_end(pump, p, &finest)?;
            for c in configs.iter().filter(|c| c.n_steps != finest.n_steps) {
                let out = propagate_pump_to_end(pump, p, c)?;
                rows.push(ConvergenceRow {
                    dz: c.dz(p),
                    deviation: relative(out.samples(), reference.samples()),
                });
            }
        }
        ConvergenceTarget::PairState => {
            let reference = schmidt::normalize(&simulate_pair_state(pump, p, &finest)?)?;
            for c in configs.iter().filter(|c| c.n_steps != finest.n_steps) {
                let out = schmidt::normalize(&simulate_pair_state(pump, p, c)?)?;
                rows.push(ConvergenceRow {
                    dz: c.dz(p),
                    deviation: relative(out.data(), reference.data()),
                });
            }
        }
    }
    rows.sort_by(|a, b| b.dz.total_cmp(&a.dz));
    let order = fit_order(&rows);
    Ok(ConvergenceReport { rows, order })
}

fn fit_order(rows: &[ConvergenceRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.deviation > NOISE_FLOOR)
        .map(|r| (r.dz.ln(), r.deviation.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}
