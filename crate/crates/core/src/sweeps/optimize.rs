//! Pump duration search maximising purity at a fixed operating point.

use crate::error::{Error, Result};

use super::config::{RunConfig, SearchMethod, SweepPoint};
use super::runner::Prepared;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub time_scale: f64,
    /// NaN when the state could not be built at this duration.
    pub purity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub point: SweepPoint,
    pub initial_time_scale: f64,
    pub best_time_scale: f64,
    pub best_purity: f64,
    /// Every evaluation in order, starting with the configured duration.
    pub trace: Vec<TracePoint>,
    pub at_boundary: bool,
    pub warning: Option<String>,
}

/// Purity at `point` with the pump time scale pinned to `time_scale`.
pub fn purity_at(cfg: &RunConfig, point: SweepPoint, time_scale: f64) -> Result<f64> {
    let mut c = cfg.clone();
    c.pump = cfg.pump.with_time_scale(time_scale);
    match point {
        SweepPoint::Rate(r) => {
            c.rates = Some(vec![r]);
            c.powers = None;
        }
        SweepPoint::Power(w) => {
            c.rates = None;
            c.powers = Some(vec![w]);
        }
    }
    let st = Prepared::new(&c)?.state_at(point)?;
    crate::schmidt::purity_of(&st.amplitude)
}

/// Maximises purity over the pump time scale (τ, or the flat-top duration).
///
/// Golden-section search runs in `ln τ`, so `optimize.tolerance` is relative.
/// The configured duration is evaluated first and kept if nothing beats it.
/// Durations where the state cannot be built count as worst; configuration
/// errors abort.
pub fn optimize_time_scale(cfg: &RunConfig, point: SweepPoint) -> Result<OptimizeResult> {
    let p = cfg.fiber_params()?;
    let x0 = cfg.pump.time_scale(&p)?;
    let o = &cfg.optimize;
    let lo = o.lower.unwrap_or(o.lower_factor * x0);
    let hi = o.upper.unwrap_or(o.upper_factor * x0);
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Config(format!("empty search bracket [{lo:e}, {hi:e}]")));
    }
    let mut trace = Vec::new();
    let mut eval = |x: f64| -> Result<f64> {
        let purity = match purity_at(cfg, point, x) {
            Ok(v) => v,
            Err(e @ Error::Config(_)) => return Err(e),
            Err(_) => f64::NAN,
        };
        trace.push(TracePoint { time_scale: x, purity });
        Ok(if purity.is_nan() { f64::NEG_INFINITY } else { purity })
    };
    if (lo..=hi).contains(&x0) {
        eval(x0)?;
    }
    let (a0, b0) = (lo.ln(), hi.ln());
    match o.method {
        SearchMethod::Golden => {
            let r = 0.5 * (5f64.sqrt() - 1.0);
            let (mut a, mut b) = (a0, b0);
            let mut c = b - r * (b - a);
            let mut d = a + r * (b - a);
            let mut fc = eval(c.exp())?;
            let mut fd = eval(d.exp())?;
            while b - a > o.tolerance {
                if fc >= fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - r * (b - a);
                    fc = eval(c.exp())?;
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + r * (b - a);
                    fd = eval(d.exp())?;
                }
            }
        }
        SearchMethod::Scan => {
            let n = o.scan_points;
            for k in 0..n {
                eval((a0 + (b0 - a0) * k as f64 / (n - 1) as f64).exp())?;
            }
        }
    }
    let best = trace
        .iter()
        .filter(|t| !t.purity.is_nan())
        .fold(None::<TracePoint>, |acc, t| match acc {
            Some(b) if b.purity >= t.purity => Some(b),
            _ => Some(*t),
        })
        .ok_or_else(|| Error::Numerical("no pump duration in the bracket gave a valid state".into()))?;
    let edge = match o.method {
        SearchMethod::Golden => 2.0 * o.tolerance,
        SearchMethod::Scan => 0.5 * (b0 - a0) / (o.scan_points - 1) as f64,
    };
    let u = best.time_scale.ln();
    let at_boundary = u - a0 <= edge || b0 - u <= edge;
    let warning = at_boundary.then(|| {
        format!(
            "optimum {:.4e} s sits at the edge of the bracket [{lo:.4e}, {hi:.4e}] s; widen it",
            best.time_scale
        )
    });
    Ok(OptimizeResult {
        point,
        initial_time_scale: x0,
        best_time_scale: best.time_scale,
        best_purity: best.purity,
        trace,
        at_boundary,
        warning,
    })
}

/// Runs [`optimize_time_scale`] for every configured point, one after another.
pub fn optimize_all(cfg: &RunConfig) -> Result<Vec<OptimizeResult>> {
    cfg.points()?.into_iter().map(|pt| optimize_time_scale(cfg, pt)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweeps::config::{Model, PumpSpec};

    fn symmetric_jsa() -> RunConfig {
        let mut fiber = crate::fiber::fiber_a_726().params.without_dispersion();
        fiber.beta1_s = 0.5e-11;
        fiber.beta1_i = -0.5e-11;
        let mut cfg = RunConfig::new(
            Model::AnalyticJsa,
            "fiberA-726",
            PumpSpec {
                walkoff_ratio: Some(2.0),
                ..PumpSpec::default()
            },
        );
        cfg.preset = None;
        cfg.fiber = Some(fiber);
        cfg.grid.n_points = 64;
        cfg
    }

    #[test]
    fn golden_search_finds_an_interior_optimum() {
        let mut cfg = symmetric_jsa();
        cfg.optimize.tolerance = 1e-2;
        let res = optimize_time_scale(&cfg, SweepPoint::Rate(0.0)).unwrap();
        assert!(!res.at_boundary, "{:?}", res.warning);
        assert_eq!(res.trace[0].time_scale, res.initial_time_scale);
        assert!(res.trace.iter().all(|t| t.purity <= res.best_purity));
        let below = purity_at(&cfg, SweepPoint::Rate(0.0), res.best_time_scale * 0.9).unwrap();
        let above = purity_at(&cfg, SweepPoint::Rate(0.0), res.best_time_scale * 1.1).unwrap();
        assert!(res.best_purity >= below && res.best_purity >= above);
    }

    #[test]
    fn scan_agrees_with_golden_search() {
        let mut cfg = symmetric_jsa();
        cfg.optimize.tolerance = 1e-2;
        let golden = optimize_time_scale(&cfg, SweepPoint::Rate(0.0)).unwrap();
        cfg.optimize.method = SearchMethod::Scan;
        cfg.optimize.scan_points = 41;
        let scan = optimize_time_scale(&cfg, SweepPoint::Rate(0.0)).unwrap();
        assert_eq!(scan.trace.len(), 42);
        assert!((golden.best_time_scale / scan.best_time_scale).ln().abs() < 0.1);
        assert!(golden.best_purity >= scan.best_purity - 1e-3);
    }

    #[test]
    fn narrow_bracket_flags_the_boundary() {
        let mut cfg = symmetric_jsa();
        cfg.optimize.lower_factor = 4.0;
        cfg.optimize.upper_factor = 5.0;
        cfg.optimize.tolerance = 1e-2;
        let res = optimize_time_scale(&cfg, SweepPoint::Rate(0.0)).unwrap();
        assert!(res.at_boundary);
        assert!(res.warning.is_some());
        // the initial duration lies outside this bracket and is not evaluated
        assert!(res.trace.iter().all(|t| t.time_scale >= 4.0 * res.initial_time_scale * 0.999));
    }
}
