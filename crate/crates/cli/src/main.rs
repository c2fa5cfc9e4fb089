use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fwm_purity::fiber;
use fwm_purity::sweeps::config::{Model, PumpShapeKind, PumpSpec, RunConfig, SweepPoint};
use fwm_purity::sweeps::{export, filter_sweep, optimize_all, purity_vs_rate, Prepared};
use fwm_purity::{schmidt, Error, Result};

#[derive(Parser)]
#[command(name = "fwmpair", version, about = "Photon-pair spectral purity from four-wave mixing in fibre")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Joint spectral amplitude at the first configured point.
    Jsa(Common),
    /// Joint temporal amplitude at the first configured point.
    Jta(Common),
    /// Purity against rate with the split-step model.
    Ssf(Common),
    /// Purity against rate with the configured model.
    Sweep(Common),
    /// Pump duration maximising purity at each configured point.
    OptimizeTau(Common),
    /// Purity against effective rate under a herald filter.
    FilterSweep(Common),
    /// Shipped fibre presets.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<ModelArg>,
    #[arg(long)]
    preset: Option<String>,
    /// Target pairs per pulse; repeat for several points.
    #[arg(long)]
    rate: Vec<f64>,
    /// Gaussian τ (or square duration) in seconds.
    #[arg(long)]
    tau: Option<f64>,
    /// Fibre length in metres.
    #[arg(long)]
    length: Option<f64>,
    /// Pump intensity FWHM bandwidth in nm.
    #[arg(long)]
    bandwidth_nm: Option<f64>,
    /// Split-step count.
    #[arg(long)]
    steps: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ModelArg {
    AnalyticJsa,
    AnalyticJta,
    Ssf,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::AnalyticJsa => Model::AnalyticJsa,
            ModelArg::AnalyticJta => Model::AnalyticJta,
            ModelArg::Ssf => Model::Ssf,
        }
    }
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::new(
                Model::AnalyticJta,
                "fiberA-726",
                PumpSpec {
                    walkoff_ratio: Some(10.0),
                    ..PumpSpec::default()
                },
            ),
        };
        if let Some(m) = self.model {
            cfg.model = m.into();
        }
        if let Some(name) = &self.preset {
            cfg.preset = Some(name.clone());
            cfg.fiber = None;
        }
        if !self.rate.is_empty() {
            cfg.rates = Some(self.rate.clone());
            cfg.powers = None;
        }
        if let Some(t) = self.tau {
            cfg.pump = cfg.pump.with_time_scale(t);
        }
        if let Some(b) = self.bandwidth_nm {
            if cfg.pump.shape != PumpShapeKind::Gaussian {
                return Err(Error::Config("--bandwidth-nm applies to Gaussian pumps only".into()));
            }
            cfg.pump = PumpSpec {
                tau: None,
                walkoff_ratio: None,
                bandwidth_nm: Some(b),
                ..cfg.pump.clone()
            };
        }
        if let Some(l) = self.length {
            cfg.length = Some(l);
        }
        if let Some(s) = self.steps {
            cfg.ssf.steps = Some(s);
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn first_point(cfg: &RunConfig) -> Result<SweepPoint> {
    cfg.points()?
        .into_iter()
        .next()
        .ok_or_else(|| Error::Config("no operating point configured".into()))
}

fn amplitude(cfg: &RunConfig, stem: &str, spectral: bool) -> Result<bool> {
    let prepared = Prepared::new(cfg)?;
    let point = first_point(cfg)?;
    let st = if spectral {
        prepared.spectral_state_at(point)?
    } else {
        prepared.temporal_state_at(point)?
    };
    let d = schmidt::schmidt_decompose(&st.amplitude)?;
    let dir = &cfg.output_dir;
    let files = export::write_magnitude(dir, stem, &st.amplitude)?;
    export::write_metadata(&dir.join("run.toml"), cfg, prepared.resolved())?;
    println!(
        "{}: {}x{} points, purity {:.6}, Schmidt number {:.4}, rate {:.4e}, peak power {:.4e} W",
        cfg.model.name(),
        st.amplitude.rows(),
        st.amplitude.cols(),
        d.purity,
        d.schmidt_number(),
        st.rate,
        st.peak_power
    );
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(true)
}

fn sweep(cfg: &RunConfig) -> Result<bool> {
    let table = purity_vs_rate(cfg)?;
    let path = cfg.output_dir.join("rates.csv");
    export::write_rate_table(&path, &table.rows)?;
    export::write_metadata(&cfg.output_dir.join("run.toml"), cfg, &table.resolved)?;
    println!("{:>12} {:>14} {:>12} {:>10} {:>10}", "target R", "peak power/W", "R", "purity", "K");
    let mut ok = true;
    for r in &table.rows {
        let target = r.target_rate.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
        println!(
            "{target:>12} {:>14.6e} {:>12.6} {:>10.6} {:>10.4}",
            r.peak_power, r.rate, r.purity, r.schmidt_number
        );
        if let Some(d) = &r.diagnostic {
            eprintln!("point failed: {d}");
            ok = false;
        }
    }
    println!("wrote {}", path.display());
    Ok(ok)
}

fn optimize(cfg: &RunConfig) -> Result<bool> {
    let results = optimize_all(cfg)?;
    let path = cfg.output_dir.join("optimize.csv");
    let trace = export::write_optimize_tables(&path, &results)?;
    let resolved = Prepared::new(cfg)?.resolved().clone();
    export::write_metadata(&cfg.output_dir.join("run.toml"), cfg, &resolved)?;
    for r in &results {
        println!(
            "{:?}: best time scale {:.6e} s, purity {:.6} ({} evaluations)",
            r.point,
            r.best_time_scale,
            r.best_purity,
            r.trace.len()
        );
        if let Some(w) = &r.warning {
            eprintln!("warning: {w}");
        }
    }
    println!("wrote {} and {}", path.display(), trace.display());
    Ok(true)
}

fn filter(cfg: &RunConfig) -> Result<bool> {
    let table = filter_sweep(cfg)?;
    let path = cfg.output_dir.join("filter.csv");
    export::write_filter_table(&path, &table.curves)?;
    export::write_metadata(&cfg.output_dir.join("run.toml"), cfg, &table.resolved)?;
    for c in &table.curves {
        println!("R = {:.4}, centre {:.4e} rad/s", c.rate, c.center);
        for p in &c.points {
            println!(
                "  width {:.4e} rad/s  T {:.6}  RT {:.6}  purity {:.6}",
                p.width, p.transmission, p.effective_rate, p.purity
            );
        }
    }
    println!("wrote {}", path.display());
    Ok(true)
}

fn list_presets() {
    for p in fiber::presets() {
        let f = p.params;
        println!("{} (version {})", p.name, p.version);
        println!("  {}", p.description);
        println!(
            "  L = {} m, beta1_s = {:e} s/m, beta1_i = {:e} s/m, beta2 (p, s, i) = ({:e}, {:e}, {:e}) s^2/m",
            f.length, f.beta1_s, f.beta1_i, f.beta2_p, f.beta2_s, f.beta2_i
        );
        println!(
            "  lambda (p, s, i) = ({:.1}, {:.1}, {:.1}) nm, gamma_p = {} /W/m",
            f.lambda_p0 * 1e9,
            f.lambda_s0 * 1e9,
            f.lambda_i0 * 1e9,
            f.gamma_p
        );
    }
}

fn run(cli: Cli) -> Result<bool> {
    let with = |c: &Common, model: Option<Model>| -> Result<RunConfig> {
        let mut cfg = c.resolve()?;
        if let Some(m) = model {
            cfg.model = m;
            cfg.validate()?;
        }
        Ok(cfg)
    };
    match &cli.command {
        Command::Jsa(c) => amplitude(&with(c, None)?, "jsa", true),
        Command::Jta(c) => amplitude(&with(c, None)?, "jta", false),
        Command::Ssf(c) => sweep(&with(c, Some(Model::Ssf))?),
        Command::Sweep(c) => sweep(&with(c, None)?),
        Command::OptimizeTau(c) => optimize(&with(c, None)?),
        Command::FilterSweep(c) => filter(&with(c, None)?),
        Command::Presets {
            action: PresetAction::List,
        } => {
            list_presets();
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
