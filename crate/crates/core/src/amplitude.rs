//! Two-photon joint amplitudes over (signal × idler) axes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{dual_grid, temporal_dual, Direction, Domain, FourierPlan, SpectralGrid, TemporalGrid};
use crate::par::{self, Execution};

/// One axis of a joint amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axis {
    Time(TemporalGrid),
    Frequency(SpectralGrid),
}

impl Axis {
    pub fn domain(&self) -> Domain {
        match self {
            Axis::Time(_) => Domain::Time,
            Axis::Frequency(_) => Domain::Frequency,
        }
    }

    pub fn n_points(&self) -> usize {
        match self {
            Axis::Time(g) => g.n_points(),
            Axis::Frequency(g) => g.n_points(),
        }
    }

    /// Sample spacing (`dt` or `dω`), the per-axis integration measure.
    pub fn step(&self) -> f64 {
        match self {
            Axis::Time(g) => g.dt(),
            Axis::Frequency(g) => g.d_omega(),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Axis::Time(g) => g.times(),
            Axis::Frequency(g) => g.omegas(),
        }
    }

    /// The conjugate axis.
    pub fn dual(&self) -> Axis {
        match self {
            Axis::Time(g) => Axis::Frequency(dual_grid(g)),
            Axis::Frequency(g) => Axis::Time(temporal_dual(g)),
        }
    }

    pub fn as_time(&self) -> Option<&TemporalGrid> {
        match self {
            Axis::Time(g) => Some(g),
            Axis::Frequency(_) => None,
        }
    }

    pub fn as_frequency(&self) -> Option<&SpectralGrid> {
        match self {
            Axis::Frequency(g) => Some(g),
            Axis::Time(_) => None,
        }
    }
}

/// Complex matrix indexed `[signal][idler]` (row-major, one row per signal sample).
///
/// `rate_scale` converts `Σ|m|²` into a pair probability per pulse. Time-domain
/// states built from physical pump powers carry `dt_s·dt_i`; since the 2D
/// transform is unitary the same factor stays valid after transforming.
#[derive(Debug, Clone, PartialEq)]
pub struct JointAmplitude {
    data: Vec<Complex64>,
    signal_axis: Axis,
    idler_axis: Axis,
    pub rate_scale: f64,
}

impl JointAmplitude {
    pub fn new(
        data: Vec<Complex64>,
        signal_axis: Axis,
        idler_axis: Axis,
        rate_scale: f64,
    ) -> Result<Self> {
        if signal_axis.domain() != idler_axis.domain() {
            return Err(Error::Dimension(format!(
                "signal axis is {} but idler axis is {}",
                signal_axis.domain(),
                idler_axis.domain()
            )));
        }
        let expected = signal_axis.n_points() * idler_axis.n_points();
        if data.len() != expected {
            return Err(Error::Dimension(format!(
                "matrix holds {} entries, axes need {}x{}",
                data.len(),
                signal_axis.n_points(),
                idler_axis.n_points()
            )));
        }
        Ok(Self {
            data,
            signal_axis,
            idler_axis,
            rate_scale,
        })
    }

    pub fn zeros(signal_axis: Axis, idler_axis: Axis, rate_scale: f64) -> Result<Self> {
        let n = signal_axis.n_points() * idler_axis.n_points();
        Self::new(vec![Complex64::new(0.0, 0.0); n], signal_axis, idler_axis, rate_scale)
    }

    /// Builds a matrix entry by entry from `f(signal_index, idler_index)`.
    pub fn from_fn<F>(
        exec: Execution,
        signal_axis: Axis,
        idler_axis: Axis,
        rate_scale: f64,
        f: F,
    ) -> Result<Self>
    where
        F: Fn(usize, usize) -> Complex64 + Sync + Send,
    {
        let mut out = Self::zeros(signal_axis, idler_axis, rate_scale)?;
        let cols = out.cols();
        par::for_each_row(exec, &mut out.data, cols, |j, row| {
            for (k, z) in row.iter_mut().enumerate() {
                *z = f(j, k);
            }
        });
        Ok(out)
    }

    pub fn domain(&self) -> Domain {
        self.signal_axis.domain()
    }

    pub fn signal_axis(&self) -> &Axis {
        &self.signal_axis
    }

    pub fn idler_axis(&self) -> &Axis {
        &self.idler_axis
    }

    pub fn rows(&self) -> usize {
        self.signal_axis.n_points()
    }

    pub fn cols(&self) -> usize {
        self.idler_axis.n_points()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.data[j * self.cols() + k]
    }

    pub fn set(&mut self, j: usize, k: usize, value: Complex64) {
        let cols = self.cols();
        self.data[j * cols + k] = value;
    }

    /// Area element `d_s·d_i` of the axes.
    pub fn measure(&self) -> f64 {
        self.signal_axis.step() * self.idler_axis.step()
    }

    /// Plain Frobenius norm of the stored matrix.
    pub fn frobenius_norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Pair probability per pulse, `rate_scale·Σ|m|²`, in either domain.
    pub fn rate(&self) -> f64 {
        self.rate_scale * self.norm_sqr()
    }

    pub fn require_domain(&self, expected: Domain) -> Result<()> {
        if self.domain() != expected {
            return Err(Error::DomainTag {
                expected,
                found: self.domain(),
            });
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|z| *z *= factor);
    }

    /// Entry-wise magnitudes, row-major.
    pub fn magnitudes(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.norm()).collect()
    }

    /// Marginal intensity along the signal axis (sum over idler).
    pub fn signal_marginal(&self) -> Vec<f64> {
        self.data
            .chunks(self.cols())
            .map(|row| row.iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }

    /// Marginal intensity along the idler axis (sum over signal).
    pub fn idler_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols()];
        for row in self.data.chunks(self.cols()) {
            for (acc, z) in out.iter_mut().zip(row) {
                *acc += z.norm_sqr();
            }
        }
        out
    }

    pub(crate) fn set_axes(&mut self, signal_axis: Axis, idler_axis: Axis) {
        debug_assert_eq!(signal_axis.n_points(), self.signal_axis.n_points());
        debug_assert_eq!(idler_axis.n_points(), self.idler_axis.n_points());
        self.signal_axis = signal_axis;
        self.idler_axis = idler_axis;
    }
}

/// Reusable plans for repeated 2D transforms of one matrix shape.
#[derive(Debug, Clone)]
pub struct Transform2d {
    rows: FourierPlan,
    cols: FourierPlan,
    exec: Execution,
}

impl Transform2d {
    /// Plans for an `n_signal × n_idler` matrix.
    pub fn new(n_signal: usize, n_idler: usize, exec: Execution) -> Self {
        Self {
            cols: FourierPlan::new(n_signal),
            rows: FourierPlan::new(n_idler),
            exec,
        }
    }

    pub fn for_amplitude(ja: &JointAmplitude, exec: Execution) -> Self {
        Self::new(ja.rows(), ja.cols(), exec)
    }

    /// Transforms along both axes in place and relabels the axes.
    pub fn apply(&self, ja: &mut JointAmplitude) -> Result<()> {
        if ja.rows() != self.cols.len() || ja.cols() != self.rows.len() {
            return Err(Error::Dimension(format!(
                "2D plan for {}x{} applied to {}x{}",
                self.cols.len(),
                self.rows.len(),
                ja.rows(),
                ja.cols()
            )));
        }
        let direction = match ja.domain() {
            Domain::Time => Direction::TimeToFrequency,
            Domain::Frequency => Direction::FrequencyToTime,
        };
        let (nr, nc) = (ja.rows(), ja.cols());
        let exec = self.exec;
        let row_plan = &self.rows;
        par::for_each_row_with(
            exec,
            &mut ja.data,
            nc,
            || row_plan.scratch(),
            |scratch, _, row| row_plan.process_with_scratch(row, direction, scratch),
        );
        let mut t = transpose(&ja.data, nr, nc);
        let col_plan = &self.cols;
        par::for_each_row_with(
            exec,
            &mut t,
            nr,
            || col_plan.scratch(),
            |scratch, _, col| col_plan.process_with_scratch(col, direction, scratch),
        );
        ja.data = transpose(&t, nc, nr);
        let (s, i) = (ja.signal_axis.dual(), ja.idler_axis.dual());
        ja.set_axes(s, i);
        Ok(())
    }
}

fn transpose(data: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    const B: usize = 32;
    for rb in (0..rows).step_by(B) {
        for cb in (0..cols).step_by(B) {
            for r in rb..(rb + B).min(rows) {
                for c in cb..(cb + B).min(cols) {
                    out[c * rows + r] = data[r * cols + c];
                }
            }
        }
    }
    out
}

/// 2D unitary transform JTA ↔ JSA; the output carries the opposite domain tag.
pub fn transform_2d(ja: &JointAmplitude) -> Result<JointAmplitude> {
    transform_2d_with(ja, Execution::default())
}

pub fn transform_2d_with(ja: &JointAmplitude, exec: Execution) -> Result<JointAmplitude> {
    let mut out = ja.clone();
    Transform2d::for_amplitude(ja, exec).apply(&mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn time_axis(n: usize, dt: f64) -> Axis {
        Axis::Time(TemporalGrid::centered(n, dt).unwrap())
    }

    #[test]
    fn mixed_domains_rejected() {
        let t = time_axis(16, 1.0);
        let f = t.dual();
        assert!(matches!(
            JointAmplitude::zeros(t, f, 1.0),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn wrong_length_rejected() {
        let t = time_axis(16, 1.0);
        let r = JointAmplitude::new(vec![Complex64::new(0.0, 0.0); 10], t, t, 1.0);
        assert!(matches!(r, Err(Error::Dimension(_))));
    }

    #[test]
    fn separable_product_transforms_to_outer_product() {
        let (ns, ni) = (24usize, 16usize);
        let (sa, ia) = (time_axis(ns, 0.5), time_axis(ni, 0.7));
        let f: Vec<Complex64> = (0..ns)
            .map(|j| Complex64::new((-((j as f64 - 11.0) / 3.0).powi(2)).exp(), 0.1 * j as f64))
            .collect();
        let g: Vec<Complex64> = (0..ni)
            .map(|k| Complex64::new((k as f64 * 0.4).cos(), (-(k as f64) / 5.0).exp()))
            .collect();
        let ja = JointAmplitude::from_fn(Execution::Sequential, sa, ia, 1.0, |j, k| f[j] * g[k])
            .unwrap();
        let out = transform_2d(&ja).unwrap();
        assert_eq!(out.domain(), Domain::Frequency);
        let fs = crate::grid::transform_1d(&f, ns, Direction::TimeToFrequency).unwrap();
        let gs = crate::grid::transform_1d(&g, ni, Direction::TimeToFrequency).unwrap();
        for j in 0..ns {
            for k in 0..ni {
                assert!((out.get(j, k) - fs[j] * gs[k]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn marginals_sum_to_total() {
        let t = time_axis(8, 1.0);
        let ja = JointAmplitude::from_fn(Execution::Sequential, t, t, 1.0, |j, k| {
            Complex64::new(j as f64, k as f64)
        })
        .unwrap();
        let total = ja.norm_sqr();
        let s: f64 = ja.signal_marginal().iter().sum();
        let i: f64 = ja.idler_marginal().iter().sum();
        assert!((s - total).abs() < 1e-9 && (i - total).abs() < 1e-9);
    }
}
