use std::path::Path;
use std::process::{Command, Output};

fn fwmpair(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fwmpair")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const SMALL: &str = r#"
model = "analytic_jta"
preset = "fiberA-726"
dispersion = false
rates = [0.0, 0.1]

[pump]
walkoff_ratio = 10.0

[grid]
n_points = 96
"#;

#[test]
fn presets_are_listed() {
    let out = fwmpair(&["presets", "list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("fiberA-726") && text.contains("fiberB-1064"));
}

#[test]
fn sweep_writes_a_table_and_reloadable_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out_dir = dir.path().join("out");
    let out = fwmpair(&["sweep", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(out_dir.join("rates.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    assert!(table.starts_with("target_rate [pairs/pulse],peak_power [W]"));

    let again = dir.path().join("again");
    let meta = out_dir.join("run.toml");
    let out = fwmpair(&["sweep", "--config", meta.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(again.join("rates.csv")).unwrap(), table);
}

#[test]
fn amplitude_commands_export_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out_dir = dir.path().join("amp");
    for (cmd, stem, axis) in [("jta", "jta", "t_s [s]"), ("jsa", "jsa", "omega_s [rad/s]")] {
        let out = fwmpair(&[cmd, "--config", &cfg, "--rate", "0.1", "--out", out_dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let matrix = std::fs::read_to_string(out_dir.join(format!("{stem}_magnitude.csv"))).unwrap();
        assert_eq!(matrix.lines().count(), 97);
        let sidecar = std::fs::read_to_string(out_dir.join(format!("{stem}_signal_axis.csv"))).unwrap();
        assert_eq!(sidecar.lines().next(), Some(axis));
        assert_eq!(sidecar.lines().count(), 97);
    }
}

#[test]
fn filter_and_optimize_commands_run() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "{}\n[optimize]\nmethod = \"scan\"\nscan_points = 5\n\n[filter]\naxis = \"idler\"\nwidths = [1e11, 1e12, 1e15]\n",
        SMALL.replace("rates = [0.0, 0.1]", "rates = [0.0]")
    );
    let cfg = write_config(dir.path(), &body);
    let out_dir = dir.path().join("o");
    let out = fwmpair(&["filter-sweep", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(out_dir.join("filter.csv")).unwrap().lines().count(), 4);
    let out = fwmpair(&["optimize-tau", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(out_dir.join("optimize_trace.csv")).unwrap().lines().count(), 7);
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}\ncolour = \"blue\"\n"));
    assert_eq!(fwmpair(&["sweep", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(fwmpair(&["sweep", "--preset", "unknown"]).status.code(), Some(2));
    assert_eq!(fwmpair(&["sweep", "--rate", "-1"]).status.code(), Some(2));
}

#[test]
fn numerical_errors_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
model = "analytic_jta"
rates = [0.0, 0.1]

[pump]
walkoff_ratio = 10.0

[grid]
n_points = 96

[fiber]
length = 0.5
beta1_s = 1e-11
beta1_i = 1e-11
beta2_p = 0.0
beta2_s = 0.0
beta2_i = 0.0
gamma_p = 0.1
gamma_s = 0.1
gamma_i = 0.1
lambda_p0 = 8e-7
lambda_s0 = 8e-7
lambda_i0 = 8e-7
"#;
    let cfg = write_config(dir.path(), body);
    let out_dir = dir.path().join("n");
    let out = fwmpair(&["jta", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let out = fwmpair(&["sweep", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out_dir.join("rates.csv").exists());
}

#[test]
fn unwritable_output_exits_with_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, "").unwrap();
    let out = fwmpair(&["sweep", "--config", &cfg, "--out", blocker.join("x").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn shipped_configs_resolve() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = fwm_purity::sweeps::RunConfig::load(&path).unwrap();
            fwm_purity::sweeps::Prepared::new(&cfg).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert_eq!(seen, 6);
}
