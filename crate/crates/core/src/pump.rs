//! Classical pump envelopes in power-normalised units (`|E|²` in watts).

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{dual_grid, Direction, FourierPlan, TemporalGrid};

/// Edge intensity must stay below this fraction of the peak.
pub const COVERAGE_THRESHOLD: f64 = 1e-6;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PumpShape {
    /// `e^{-t²/2τ²}` amplitude.
    Gaussian { tau: f64 },
    /// Flat top of full width `duration` with raised-cosine edges of width `edge_smoothing`.
    Square { duration: f64, edge_smoothing: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PumpEnvelope {
    grid: TemporalGrid,
    samples: Vec<Complex64>,
    peak_power: f64,
    shape: PumpShape,
}

impl PumpEnvelope {
    /// Wraps arbitrary samples, enforcing the length and coverage invariants.
    pub fn from_samples(grid: TemporalGrid, samples: Vec<Complex64>, shape: PumpShape) -> Result<Self> {
        if samples.len() != grid.n_points() {
            return Err(Error::Dimension(format!(
                "pump has {} samples for a {}-point grid",
                samples.len(),
                grid.n_points()
            )));
        }
        let peak_power = samples.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        if !(peak_power.is_finite() && peak_power > 0.0) {
            return Err(Error::Numerical("pump envelope has no energy".into()));
        }
        let pump = Self {
            grid,
            samples,
            peak_power,
            shape,
        };
        pump.check_coverage()?;
        Ok(pump)
    }

    pub fn grid(&self) -> &TemporalGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn peak_power(&self) -> f64 {
        self.peak_power
    }

    pub fn shape(&self) -> PumpShape {
        self.shape
    }

    /// Characteristic duration: τ for a Gaussian, half the flat-top width for a square pulse.
    pub fn time_scale(&self) -> f64 {
        match self.shape {
            PumpShape::Gaussian { tau } => tau,
            PumpShape::Square { duration, .. } => 0.5 * duration,
        }
    }

    /// Half-width beyond which the intensity is negligible (used for grid sizing).
    pub fn half_extent(&self) -> f64 {
        match self.shape {
            PumpShape::Gaussian { tau } => 4.0 * tau,
            PumpShape::Square {
                duration,
                edge_smoothing,
            } => 0.5 * (duration + edge_smoothing),
        }
    }

    pub fn check_coverage(&self) -> Result<()> {
        let limit = COVERAGE_THRESHOLD * self.peak_power;
        let first = self.samples[0].norm_sqr();
        let last = self.samples[self.samples.len() - 1].norm_sqr();
        if first >= limit || last >= limit {
            return Err(Error::Coverage(format!(
                "pump edge intensity {:.3e} W exceeds {:.0e} of the {:.3e} W peak",
                first.max(last),
                COVERAGE_THRESHOLD,
                self.peak_power
            )));
        }
        Ok(())
    }

    /// `Σ|E|²·dt` in joules.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dt()
    }

    /// `∫|E|⁴dt` (W²·s); edge samples vanish so the trapezoid rule is a plain sum.
    pub fn intensity_squared_integral(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>() * self.grid.dt()
    }

    /// Linear interpolation of the complex envelope; zero outside the grid.
    pub fn sample_at(&self, t: f64) -> Complex64 {
        let x = self.grid.position(t);
        let n = self.samples.len();
        if !(x >= 0.0 && x <= (n - 1) as f64) {
            return Complex64::new(0.0, 0.0);
        }
        let j = (x.floor() as usize).min(n - 2);
        let f = x - j as f64;
        self.samples[j] * (1.0 - f) + self.samples[j + 1] * f
    }

    /// Same shape rescaled to a new peak power.
    pub fn with_peak_power(&self, peak_power: f64) -> Result<Self> {
        if !(peak_power.is_finite() && peak_power > 0.0) {
            return Err(Error::Numerical(format!("peak power must be positive, got {peak_power}")));
        }
        let factor = (peak_power / self.peak_power).sqrt();
        Ok(Self {
            grid: self.grid,
            samples: self.samples.iter().map(|z| z * factor).collect(),
            peak_power,
            shape: self.shape,
        })
    }

    /// Unitary spectrum on the dual grid.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut s = self.samples.clone();
        let plan = FourierPlan::new(s.len());
        let mut scratch = plan.scratch();
        plan.process_with_scratch(&mut s, Direction::TimeToFrequency, &mut scratch);
        s
    }

    /// Intensity full width at half maximum, located by linear interpolation.
    pub fn intensity_fwhm(&self) -> f64 {
        let p: Vec<f64> = self.samples.iter().map(|z| z.norm_sqr()).collect();
        let half = 0.5 * self.peak_power;
        let first = p.iter().position(|&x| x >= half).unwrap_or(0);
        let last = p.iter().rposition(|&x| x >= half).unwrap_or(p.len() - 1);
        let left = if first == 0 {
            self.grid.time(0)
        } else {
            let f = (half - p[first - 1]) / (p[first] - p[first - 1]);
            self.grid.time(first - 1) + f * self.grid.dt()
        };
        let right = if last + 1 >= p.len() {
            self.grid.time(p.len() - 1)
        } else {
            let f = (p[last] - half) / (p[last] - p[last + 1]);
            self.grid.time(last) + f * self.grid.dt()
        };
        right - left
    }
}

/// `√P₀·e^{-t²/2τ²}` with zero phase, peaked at `t = 0` wherever the grid is centred.
pub fn gaussian_pump(grid: TemporalGrid, tau: f64, peak_power: f64) -> Result<PumpEnvelope> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::Resolution(format!("tau must be positive, got {tau}")));
    }
    if tau < 4.0 * grid.dt() {
        return Err(Error::Resolution(format!(
            "tau = {tau:.3e} s is below 4 samples (dt = {:.3e} s)",
            grid.dt()
        )));
    }
    check_power(peak_power)?;
    let amp = peak_power.sqrt();
    let samples = grid
        .times()
        .iter()
        .map(|&t| Complex64::new(amp * (-t * t / (2.0 * tau * tau)).exp(), 0.0))
        .collect();
    PumpEnvelope::from_samples(grid, samples, PumpShape::Gaussian { tau })
}

/// Flat-top pulse centred on `t = 0`; `edge_smoothing = 0` gives hard edges.
pub fn square_pump(
    grid: TemporalGrid,
    duration: f64,
    peak_power: f64,
    edge_smoothing: f64,
) -> Result<PumpEnvelope> {
    if !(duration.is_finite() && duration >= 8.0 * grid.dt()) {
        return Err(Error::Resolution(format!(
            "square duration {duration:.3e} s is below 8 samples (dt = {:.3e} s)",
            grid.dt()
        )));
    }
    if !(edge_smoothing.is_finite() && edge_smoothing >= 0.0) {
        return Err(Error::Config(format!(
            "edge smoothing must be non-negative, got {edge_smoothing}"
        )));
    }
    if duration + edge_smoothing >= grid.span() {
        return Err(Error::Coverage(format!(
            "square pulse of {duration:.3e} s (+{edge_smoothing:.3e} s edges) does not fit a {:.3e} s grid",
            grid.span()
        )));
    }
    check_power(peak_power)?;
    let amp = peak_power.sqrt();
    let half = 0.5 * duration;
    let samples = grid
        .times()
        .iter()
        .map(|&t| {
            let x = t.abs();
            let a = if edge_smoothing == 0.0 {
                if x < half {
                    1.0
                } else {
                    0.0
                }
            } else {
                let inner = half - 0.5 * edge_smoothing;
                let outer = half + 0.5 * edge_smoothing;
                if x <= inner {
                    1.0
                } else if x >= outer {
                    0.0
                } else {
                    0.5 * (1.0 + (PI * (x - inner) / edge_smoothing).cos())
                }
            };
            Complex64::new(amp * a, 0.0)
        })
        .collect();
    PumpEnvelope::from_samples(
        grid,
        samples,
        PumpShape::Square {
            duration,
            edge_smoothing,
        },
    )
}

fn check_power(p: f64) -> Result<()> {
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::Config(format!("peak power must be positive, got {p}")));
    }
    Ok(())
}

/// τ of the transform-limited Gaussian whose intensity FWHM bandwidth is `Δλ` at `λ₀`.
///
/// `Δν = cΔλ/λ₀²`, `Δt_FWHM = 2 ln2/(πΔν)`, `τ = Δt_FWHM/(2√ln2)`.
pub fn bandwidth_to_tau(delta_lambda_fwhm: f64, lambda0: f64) -> Result<f64> {
    if !(delta_lambda_fwhm > 0.0 && lambda0 > 0.0) {
        return Err(Error::Config(format!(
            "bandwidth and wavelength must be positive, got {delta_lambda_fwhm} and {lambda0}"
        )));
    }
    let delta_nu = SPEED_OF_LIGHT * delta_lambda_fwhm / (lambda0 * lambda0);
    let fwhm = 2.0 * LN_2 / (PI * delta_nu);
    Ok(fwhm / (2.0 * LN_2.sqrt()))
}

/// Applies linear dispersion `e^{i(β₂/2)Δω²ℓ}` in the spectral domain.
///
/// Negative `length` undoes propagation; `-L/2` makes the pulse transform
/// limited at the fibre midpoint.
pub fn prechirp(pump: &PumpEnvelope, beta2: f64, length: f64) -> Result<PumpEnvelope> {
    let n = pump.grid.n_points();
    let plan = FourierPlan::new(n);
    let mut scratch = plan.scratch();
    let mut s = pump.samples.clone();
    plan.process_with_scratch(&mut s, Direction::TimeToFrequency, &mut scratch);
    let spec = dual_grid(&pump.grid);
    for (k, z) in s.iter_mut().enumerate() {
        let w = spec.omega(k);
        *z *= Complex64::from_polar(1.0, 0.5 * beta2 * w * w * length);
    }
    plan.process_with_scratch(&mut s, Direction::FrequencyToTime, &mut scratch);
    PumpEnvelope::from_samples(pump.grid, s, pump.shape)
}
