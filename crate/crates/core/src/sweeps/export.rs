//! CSV and TOML output, each file written to a temporary sibling and then
//! renamed into place.

use std::path::{Path, PathBuf};

use crate::amplitude::{Axis, JointAmplitude};
use crate::error::{Error, Result};
use crate::filtering::FilterCurve;

use super::config::{Resolved, RunConfig, SweepPoint};
use super::optimize::OptimizeResult;
use super::runner::RateRow;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn optional(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_io = |e: csv::Error| Error::io(path, std::io::Error::other(e));
    w.write_record(header).map_err(to_io)?;
    for r in rows {
        w.write_record(&r).map_err(to_io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    write_atomic(path, &bytes)
}

pub const RATE_TABLE_HEADER: [&str; 8] = [
    "target_rate [pairs/pulse]",
    "peak_power [W]",
    "rate [pairs/pulse]",
    "purity",
    "schmidt_number",
    "visibility_upper",
    "visibility_lower",
    "diagnostic",
];

pub fn write_rate_table(path: &Path, rows: &[RateRow]) -> Result<()> {
    write_csv(
        path,
        &RATE_TABLE_HEADER,
        rows.iter().map(|r| {
            vec![
                optional(r.target_rate),
                format_number(r.peak_power),
                format_number(r.rate),
                format_number(r.purity),
                format_number(r.schmidt_number),
                format_number(r.visibility.upper),
                format_number(r.visibility.lower),
                r.diagnostic.clone().unwrap_or_default(),
            ]
        }),
    )
}

fn point_columns(p: SweepPoint) -> [String; 2] {
    match p {
        SweepPoint::Rate(r) => [format_number(r), String::new()],
        SweepPoint::Power(w) => [String::new(), format_number(w)],
    }
}

/// Summary table plus a `<stem>_trace.csv` listing every evaluation.
pub fn write_optimize_tables(path: &Path, results: &[OptimizeResult]) -> Result<PathBuf> {
    write_csv(
        path,
        &[
            "target_rate [pairs/pulse]",
            "peak_power [W]",
            "initial_time_scale [s]",
            "best_time_scale [s]",
            "best_purity",
            "evaluations",
            "warning",
        ],
        results.iter().map(|r| {
            let [rate, power] = point_columns(r.point);
            vec![
                rate,
                power,
                format_number(r.initial_time_scale),
                format_number(r.best_time_scale),
                format_number(r.best_purity),
                r.trace.len().to_string(),
                r.warning.clone().unwrap_or_default(),
            ]
        }),
    )?;
    let trace_path = sibling(path, "_trace");
    write_csv(
        &trace_path,
        &["target_rate [pairs/pulse]", "peak_power [W]", "time_scale [s]", "purity"],
        results.iter().flat_map(|r| {
            let [rate, power] = point_columns(r.point);
            r.trace
                .iter()
                .map(move |t| vec![rate.clone(), power.clone(), format_number(t.time_scale), format_number(t.purity)])
        }),
    )?;
    Ok(trace_path)
}

pub fn write_filter_table(path: &Path, curves: &[FilterCurve]) -> Result<()> {
    write_csv(
        path,
        &[
            "rate [pairs/pulse]",
            "center [rad/s]",
            "width [rad/s]",
            "transmission",
            "effective_rate [pairs/pulse]",
            "purity",
        ],
        curves.iter().flat_map(|c| {
            c.points.iter().map(move |p| {
                vec![
                    format_number(c.rate),
                    format_number(c.center),
                    format_number(p.width),
                    format_number(p.transmission),
                    format_number(p.effective_rate),
                    format_number(p.purity),
                ]
            })
        }),
    )
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}{ext}"))
}

fn axis_header(a: &Axis, name: &str) -> String {
    match a {
        Axis::Time(_) => format!("t_{name} [s]"),
        Axis::Frequency(_) => format!("omega_{name} [rad/s]"),
    }
}

/// `<stem>_magnitude.csv` (rows follow the signal axis) and one CSV per axis.
pub fn write_magnitude(dir: &Path, stem: &str, ja: &JointAmplitude) -> Result<Vec<PathBuf>> {
    let mags = ja.magnitudes();
    let cols = ja.cols();
    let matrix = dir.join(format!("{stem}_magnitude.csv"));
    let header: Vec<String> = (0..cols).map(|k| format!("idler_{k}")).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(
        &matrix,
        &header,
        mags.chunks(cols).map(|row| row.iter().map(|&m| format_number(m)).collect()),
    )?;
    let mut out = vec![matrix];
    for (axis, name) in [(ja.signal_axis(), "signal"), (ja.idler_axis(), "idler")] {
        let path = dir.join(format!("{stem}_{name}_axis.csv"));
        write_csv(
            &path,
            &[axis_header(axis, &name[..1]).as_str()],
            axis.values().into_iter().map(|v| vec![format_number(v)]),
        )?;
        out.push(path);
    }
    Ok(out)
}

/// The run configuration with its `[resolved]` table filled in; it loads back as a config.
pub fn write_metadata(path: &Path, cfg: &RunConfig, resolved: &Resolved) -> Result<()> {
    let mut c = cfg.clone();
    c.resolved = Some(resolved.clone());
    write_atomic(path, c.to_toml()?.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{dual_grid, TemporalGrid};
    use crate::par::Execution;
    use crate::sweeps::config::{Model, PumpSpec};
    use crate::sweeps::runner::{purity_vs_rate, visibility_bound, Prepared};
    use num_complex::Complex64;

    #[test]
    fn numbers_round_trip_exactly() {
        for x in [0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_number(f64::NAN), "NaN");
    }

    #[test]
    fn rate_table_has_units_and_one_line_per_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/rates.csv");
        let rows = vec![
            RateRow {
                target_rate: Some(0.1),
                peak_power: 12.5,
                rate: 0.1,
                purity: 0.8,
                schmidt_number: 1.25,
                visibility: visibility_bound(0.8, 0.1),
                diagnostic: None,
            },
            RateRow {
                target_rate: None,
                peak_power: f64::NAN,
                rate: f64::NAN,
                purity: f64::NAN,
                schmidt_number: f64::NAN,
                visibility: visibility_bound(f64::NAN, f64::NAN),
                diagnostic: Some("coverage, violated".into()),
            },
        ];
        write_rate_table(&path, &rows).unwrap();
        let mut rdr = csv::Reader::from_path(&path).unwrap();
        assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), RATE_TABLE_HEADER);
        let recs: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0][3].parse::<f64>().unwrap(), 0.8);
        assert_eq!(&recs[1][0], "");
        assert_eq!(&recs[1][7], "coverage, violated");
        assert!(!dir.path().join("sub/rates.csv.partial").exists());
    }

    #[test]
    fn magnitude_export_matches_the_state() {
        let g = dual_grid(&TemporalGrid::centered(8, 1e-13).unwrap());
        let ja = JointAmplitude::from_fn(
            Execution::Sequential,
            Axis::Frequency(g),
            Axis::Frequency(g),
            1.0,
            |j, k| Complex64::new(j as f64, -(k as f64)),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = write_magnitude(dir.path(), "jsa", &ja).unwrap();
        assert_eq!(files.len(), 3);
        let mut rdr = csv::Reader::from_path(&files[0]).unwrap();
        let rows: Vec<Vec<f64>> =
            rdr.records().map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect()).collect();
        assert_eq!(rows.len(), 8);
        assert_eq!(rows[3][4], ja.get(3, 4).norm());
        let mut axis = csv::Reader::from_path(&files[1]).unwrap();
        assert_eq!(&axis.headers().unwrap()[0], "omega_s [rad/s]");
        let values: Vec<f64> = axis.records().map(|r| r.unwrap()[0].parse().unwrap()).collect();
        assert_eq!(values, g.omegas());
    }

    #[test]
    fn metadata_reloads_and_reproduces_the_run() {
        let mut cfg = RunConfig::new(
            Model::AnalyticJta,
            "fiberA-726",
            PumpSpec {
                walkoff_ratio: Some(10.0),
                ..PumpSpec::default()
            },
        );
        cfg.grid.n_points = 64;
        cfg.rates = Some(vec![0.0, 0.1]);
        let first = purity_vs_rate(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        write_metadata(&path, &cfg, &first.resolved).unwrap();
        let reloaded = RunConfig::load(&path).unwrap();
        assert_eq!(reloaded.resolved.as_ref(), Some(&first.resolved));
        let again = purity_vs_rate(&reloaded).unwrap();
        assert_eq!(again.resolved, first.resolved);
        assert_eq!(again.rows, first.rows);
        assert_eq!(Prepared::new(&reloaded).unwrap().resolved().tool_version, env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn unwritable_destination_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, b"x").unwrap();
        let err = write_rate_table(&blocker.join("rates.csv"), &[]).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }
}
