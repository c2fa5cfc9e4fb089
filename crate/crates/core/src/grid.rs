//! Uniform time and frequency lattices and the unitary transform between them.
//!
//! Sample `j` of an `n`-point grid sits at `center + (j - n/2) * step`, so the
//! centre sample is index `n/2` (integer division) for even and odd `n` alike.
//!
//! Spectra follow the `e^{-iωt}` convention of the field envelopes: a time
//! signal is rebuilt from its spectrum as `a(t) = Σ ã(Δω) e^{-iΔω t} / √n`, so a
//! component at positive detuning oscillates as `e^{-iΔω t}`. Here `t` is
//! measured from the grid's centre time, so a spectrum of samples taken on a
//! grid centred at `t₀` lacks the factor `e^{iΔω t₀}` of the absolute-time
//! spectrum. Both directions carry a `1/√n` factor and are exactly unitary.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest grid the library accepts.
pub const MIN_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Time,
    Frequency,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Time => f.write_str("time-domain"),
            Domain::Frequency => f.write_str("frequency-domain"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    TimeToFrequency,
    FrequencyToTime,
}

#[inline]
fn centre_index(n: usize) -> usize {
    n / 2
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalGrid {
    n_points: usize,
    dt: f64,
    t_center: f64,
}

impl TemporalGrid {
    pub fn new(n_points: usize, dt: f64, t_center: f64) -> Result<Self> {
        if n_points < MIN_POINTS {
            return Err(Error::Dimension(format!(
                "temporal grid needs at least {MIN_POINTS} points, got {n_points}"
            )));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Dimension(format!("time step must be positive, got {dt}")));
        }
        if !t_center.is_finite() {
            return Err(Error::Dimension("grid centre must be finite".into()));
        }
        Ok(Self {
            n_points,
            dt,
            t_center,
        })
    }

    /// Grid of `n_points` samples centred on the origin.
    pub fn centered(n_points: usize, dt: f64) -> Result<Self> {
        Self::new(n_points, dt, 0.0)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_center(&self) -> f64 {
        self.t_center
    }

    pub fn span(&self) -> f64 {
        self.n_points as f64 * self.dt
    }

    pub fn time(&self, j: usize) -> f64 {
        self.t_center + (j as f64 - centre_index(self.n_points) as f64) * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.time(j)).collect()
    }

    pub fn first(&self) -> f64 {
        self.time(0)
    }

    pub fn last(&self) -> f64 {
        self.time(self.n_points - 1)
    }

    /// Fractional sample index of time `t` (not clamped).
    pub fn position(&self, t: f64) -> f64 {
        (t - self.t_center) / self.dt + centre_index(self.n_points) as f64
    }
}

/// Frequency lattice dual to a [`TemporalGrid`].
///
/// The time step it was derived from is kept so the inverse conversion
/// returns the original `dt` bit for bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralGrid {
    n_points: usize,
    d_omega: f64,
    omega_center: f64,
    dual_dt: f64,
    dual_t_center: f64,
}

impl SpectralGrid {
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn d_omega(&self) -> f64 {
        self.d_omega
    }

    pub fn omega_center(&self) -> f64 {
        self.omega_center
    }

    pub fn omega(&self, k: usize) -> f64 {
        self.omega_center + (k as f64 - centre_index(self.n_points) as f64) * self.d_omega
    }

    pub fn omegas(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.omega(k)).collect()
    }

    pub fn first(&self) -> f64 {
        self.omega(0)
    }

    pub fn last(&self) -> f64 {
        self.omega(self.n_points - 1)
    }

    /// Frequency span `n·dω`, equal to `2π/dt` of the dual grid.
    pub fn span(&self) -> f64 {
        self.n_points as f64 * self.d_omega
    }

    /// Fractional sample index of detuning `omega` (not clamped).
    pub fn position(&self, omega: f64) -> f64 {
        (omega - self.omega_center) / self.d_omega + centre_index(self.n_points) as f64
    }
}

/// Conjugate frequency grid: `dω = 2π/(n·dt)`, centred on zero detuning.
pub fn dual_grid(g: &TemporalGrid) -> SpectralGrid {
    SpectralGrid {
        n_points: g.n_points,
        d_omega: 2.0 * PI / (g.n_points as f64 * g.dt),
        omega_center: 0.0,
        dual_dt: g.dt,
        dual_t_center: g.t_center,
    }
}

/// Inverse of [`dual_grid`]; reproduces the original temporal grid exactly.
pub fn temporal_dual(s: &SpectralGrid) -> TemporalGrid {
    TemporalGrid {
        n_points: s.n_points,
        dt: s.dual_dt,
        t_center: s.dual_t_center,
    }
}

/// Cached FFT plan plus the centring twiddles for one transform length.
#[derive(Clone)]
pub struct FourierPlan {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    backward: Arc<dyn Fft<f64>>,
    // e^{-iθcj}; its conjugate serves the inverse direction
    pre: Vec<Complex64>,
    // e^{-iθc(k-c)}/√n; its conjugate serves the inverse direction
    post: Vec<Complex64>,
    scratch_len: usize,
}

impl fmt::Debug for FourierPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourierPlan").field("n", &self.n).finish()
    }
}

impl FourierPlan {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        // time→freq needs Σ e^{+iθkj}, which is rustfft's inverse kernel
        let forward = planner.plan_fft_inverse(n);
        let backward = planner.plan_fft_forward(n);
        let c = centre_index(n);
        let theta = 2.0 * PI / n as f64;
        let norm = 1.0 / (n as f64).sqrt();
        // c·j is reduced mod n before scaling
        let pre = (0..n)
            .map(|j| Complex64::from_polar(1.0, -theta * ((c * j) % n) as f64))
            .collect();
        let post = (0..n)
            .map(|k| {
                let m = (k as i64 - c as i64).rem_euclid(n as i64) as usize;
                Complex64::from_polar(norm, -theta * ((c * m) % n) as f64)
            })
            .collect();
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(backward.get_inplace_scratch_len());
        Self {
            n,
            forward,
            backward,
            pre,
            post,
            scratch_len,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn scratch(&self) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); self.scratch_len]
    }

    /// In-place transform using caller-provided scratch (see [`Self::scratch`]).
    pub fn process_with_scratch(
        &self,
        data: &mut [Complex64],
        direction: Direction,
        scratch: &mut [Complex64],
    ) {
        debug_assert_eq!(data.len(), self.n);
        match direction {
            Direction::TimeToFrequency => {
                data.iter_mut().zip(&self.pre).for_each(|(x, w)| *x *= w);
                self.forward.process_with_scratch(data, scratch);
                data.iter_mut().zip(&self.post).for_each(|(x, w)| *x *= w);
            }
            Direction::FrequencyToTime => {
                data.iter_mut().zip(&self.pre).for_each(|(x, w)| *x *= w.conj());
                self.backward.process_with_scratch(data, scratch);
                data.iter_mut().zip(&self.post).for_each(|(x, w)| *x *= w.conj());
            }
        }
    }

    pub fn process(&self, data: &mut [Complex64], direction: Direction) -> Result<()> {
        if data.len() != self.n {
            return Err(Error::Dimension(format!(
                "transform of length {} applied to {} samples",
                self.n,
                data.len()
            )));
        }
        let mut scratch = self.scratch();
        self.process_with_scratch(data, direction, &mut scratch);
        Ok(())
    }
}

/// Unitary 1D transform between a grid's time samples and its spectrum.
pub fn transform_1d(
    samples: &[Complex64],
    n_points: usize,
    direction: Direction,
) -> Result<Vec<Complex64>> {
    if samples.len() != n_points {
        return Err(Error::Dimension(format!(
            "expected {n_points} samples, got {}",
            samples.len()
        )));
    }
    let mut out = samples.to_vec();
    FourierPlan::new(n_points).process(&mut out, direction)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn norm(v: &[Complex64]) -> f64 {
        v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn dual_spacing_matches_definition() {
        let g = TemporalGrid::centered(1024, 1e-15).unwrap();
        let s = dual_grid(&g);
        assert_eq!(s.d_omega(), 2.0 * PI / (1024.0 * 1e-15));
        assert_eq!(s.omega_center(), 0.0);
    }

    #[test]
    fn dual_round_trip_is_bit_exact() {
        for &(n, dt) in &[(1024usize, 1e-15), (512, 4e-15), (333, 2.718281828e-14)] {
            let g = TemporalGrid::new(n, dt, 1.5e-13).unwrap();
            let back = temporal_dual(&dual_grid(&g));
            assert_eq!(back, g);
        }
    }

    #[test]
    fn frequency_span_is_inverse_dt() {
        let g = TemporalGrid::centered(512, 4e-15).unwrap();
        let span_hz = dual_grid(&g).span() / (2.0 * PI);
        assert_relative_eq!(span_hz, 250e12, max_relative = 1e-12);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(TemporalGrid::centered(4, 1.0).is_err());
        assert!(TemporalGrid::centered(16, 0.0).is_err());
        assert!(TemporalGrid::centered(16, -1.0).is_err());
    }

    #[test]
    fn delta_at_centre_has_flat_spectrum() {
        for n in [16usize, 17, 64] {
            let mut a = vec![Complex64::new(0.0, 0.0); n];
            a[n / 2] = Complex64::new(1.0, 0.0);
            let spec = transform_1d(&a, n, Direction::TimeToFrequency).unwrap();
            for z in spec {
                assert_relative_eq!(z.re, 1.0 / (n as f64).sqrt(), epsilon = 1e-14);
                assert!(z.im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn length_mismatch_is_dimension_error() {
        let a = vec![Complex64::new(1.0, 0.0); 10];
        assert!(matches!(
            transform_1d(&a, 12, Direction::TimeToFrequency),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn positive_detuning_oscillates_as_exp_minus_i_omega_t() {
        let n = 64;
        let g = TemporalGrid::centered(n, 0.1).unwrap();
        let s = dual_grid(&g);
        let k = n / 2 + 5;
        let w = s.omega(k);
        let a: Vec<Complex64> = g
            .times()
            .iter()
            .map(|&t| Complex64::from_polar(1.0, -w * t))
            .collect();
        let spec = transform_1d(&a, n, Direction::TimeToFrequency).unwrap();
        let peak = (0..n)
            .max_by(|&x, &y| spec[x].norm().total_cmp(&spec[y].norm()))
            .unwrap();
        assert_eq!(peak, k);
        assert_relative_eq!(spec[k].norm(), (n as f64).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn gaussian_spectrum_matches_analytic_pair() {
        // e^{-t²/2τ²}  ->  τ√(2π) e^{-ω²τ²/2} / (√n dt) on the unitary lattice;
        // intensity falls to 1/e at |Δω| = 1/τ
        let n = 1024;
        let dt = 1e-15;
        for tau in [10.0 * dt, 25.0 * dt, 60.0 * dt] {
            let g = TemporalGrid::centered(n, dt).unwrap();
            let s = dual_grid(&g);
            let a: Vec<Complex64> = g
                .times()
                .iter()
                .map(|&t| Complex64::new((-t * t / (2.0 * tau * tau)).exp(), 0.0))
                .collect();
            let spec = transform_1d(&a, n, Direction::TimeToFrequency).unwrap();
            let scale = tau * (2.0 * PI).sqrt() / ((n as f64).sqrt() * dt);
            let peak = spec[n / 2].norm();
            assert_relative_eq!(peak, scale, max_relative = 1e-3);
            for k in 0..n {
                let w = s.omega(k);
                let expected = scale * (-w * w * tau * tau / 2.0).exp();
                if expected > 1e-3 * scale {
                    assert_relative_eq!(spec[k].norm(), expected, max_relative = 1e-3);
                }
            }
            // 1/e intensity half-width, located by interpolation
            let target = peak * peak / std::f64::consts::E;
            let mut k = n / 2;
            while spec[k + 1].norm_sqr() > target {
                k += 1;
            }
            // ln|S|² is linear in ω² for a Gaussian
            let (y0, y1) = (spec[k].norm_sqr().ln(), spec[k + 1].norm_sqr().ln());
            let (x0, x1) = (s.omega(k).powi(2), s.omega(k + 1).powi(2));
            let x = x0 + (target.ln() - y0) * (x1 - x0) / (y1 - y0);
            let half_width = x.sqrt();
            assert_relative_eq!(half_width, 1.0 / tau, max_relative = 1e-3);
        }
    }

    #[test]
    fn round_trip_and_parseval_on_odd_length() {
        let n = 97;
        let a: Vec<Complex64> = (0..n)
            .map(|j| Complex64::new((j as f64 * 0.37).sin(), (j as f64 * 1.3).cos()))
            .collect();
        let f = transform_1d(&a, n, Direction::TimeToFrequency).unwrap();
        assert_relative_eq!(norm(&f), norm(&a), max_relative = 1e-13);
        let back = transform_1d(&f, n, Direction::FrequencyToTime).unwrap();
        for (x, y) in a.iter().zip(&back) {
            assert!((x - y).norm() < 1e-13);
        }
    }
}
