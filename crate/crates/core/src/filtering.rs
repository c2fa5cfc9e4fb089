//! Top-hat spectral filtering of one photon and the resulting rate/purity trade-off.

use serde::{Deserialize, Serialize};

use crate::amplitude::JointAmplitude;
use crate::error::{Error, Result};
use crate::grid::Domain;
use crate::par::{self, Execution};
use crate::schmidt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterAxis {
    Signal,
    Idler,
}

/// Hard-edged pass band `|Δω − center| ≤ width/2` on one axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub axis: FilterAxis,
    pub center: f64,
    pub width: f64,
}

impl FilterSpec {
    pub fn new(axis: FilterAxis, center: f64, width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) || !center.is_finite() {
            return Err(Error::Config(format!(
                "filter needs a finite centre and positive width, got centre {center}, width {width}"
            )));
        }
        Ok(Self { axis, center, width })
    }

    pub fn passes(&self, omega: f64) -> bool {
        (omega - self.center).abs() <= 0.5 * self.width
    }
}

/// Intensity-weighted mean detuning along `axis`.
pub fn marginal_centroid(jsa: &JointAmplitude, axis: FilterAxis) -> Result<f64> {
    jsa.require_domain(Domain::Frequency)?;
    let (marginal, omegas) = match axis {
        FilterAxis::Signal => (jsa.signal_marginal(), jsa.signal_axis().values()),
        FilterAxis::Idler => (jsa.idler_marginal(), jsa.idler_axis().values()),
    };
    let total: f64 = marginal.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateState);
    }
    Ok(marginal.iter().zip(&omegas).map(|(m, w)| m * w).sum::<f64>() / total)
}

/// Zeroes everything outside the pass band; returns the unnormalised output and
/// the transmission `T = ‖out‖²/‖in‖²`.
pub fn apply_filter(jsa: &JointAmplitude, f: &FilterSpec) -> Result<(JointAmplitude, f64)> {
    jsa.require_domain(Domain::Frequency)?;
    let total = jsa.norm_sqr();
    if total <= 0.0 {
        return Err(Error::DegenerateState);
    }
    let keep: Vec<bool> = match f.axis {
        FilterAxis::Signal => jsa.signal_axis().values(),
        FilterAxis::Idler => jsa.idler_axis().values(),
    }
    .into_iter()
    .map(|w| f.passes(w))
    .collect();
    if !keep.iter().any(|&k| k) {
        return Err(Error::DegenerateTransmission);
    }
    let mut out = jsa.clone();
    let cols = out.cols();
    let zero = num_complex::Complex64::new(0.0, 0.0);
    for (j, row) in out.data_mut().chunks_mut(cols).enumerate() {
        match f.axis {
            FilterAxis::Signal if !keep[j] => row.fill(zero),
            FilterAxis::Signal => {}
            FilterAxis::Idler => row
                .iter_mut()
                .zip(&keep)
                .filter(|(_, &k)| !k)
                .for_each(|(z, _)| *z = zero),
        }
    }
    let transmitted = out.norm_sqr();
    if transmitted <= 0.0 {
        return Err(Error::DegenerateTransmission);
    }
    Ok((out, transmitted / total))
}

pub fn effective_rate(rate: f64, transmission: f64) -> f64 {
    rate * transmission
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterPoint {
    pub width: f64,
    pub transmission: f64,
    pub effective_rate: f64,
    pub purity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterCurve {
    pub rate: f64,
    pub center: f64,
    pub points: Vec<FilterPoint>,
}

/// Purity against effective rate `R·T` for each unfiltered state and filter width.
///
/// `states` pairs each unfiltered rate with its JSA. With `center = None` each
/// curve is centred on its own marginal centroid.
pub fn purity_vs_effective_rate(
    states: &[(f64, JointAmplitude)],
    axis: FilterAxis,
    widths: &[f64],
    center: Option<f64>,
    exec: Execution,
) -> Result<Vec<FilterCurve>> {
    states
        .iter()
        .map(|(rate, jsa)| {
            let c = match center {
                Some(c) => c,
                None => marginal_centroid(jsa, axis)?,
            };
            let points = par::map(exec, widths, |&w| {
                let spec = FilterSpec::new(axis, c, w)?;
                let (filtered, t) = apply_filter(jsa, &spec)?;
                Ok(FilterPoint {
                    width: w,
                    transmission: t,
                    effective_rate: effective_rate(*rate, t),
                    purity: schmidt::purity_of(&filtered)?,
                })
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
            Ok(FilterCurve {
                rate: *rate,
                center: c,
                points,
            })
        })
        .collect()
}
