use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavicool")).args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut all: Vec<&str> = args.to_vec();
    all.extend(["--out", dir.to_str().unwrap()]);
    run(&all)
}

fn columns(path: &Path, names: &[&str]) -> Vec<Vec<f64>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().clone();
    let idx: Vec<usize> = names.iter().map(|n| header.iter().position(|h| h == *n).unwrap()).collect();
    let mut cols = vec![Vec::new(); names.len()];
    for rec in r.records() {
        let rec = rec.unwrap();
        for (c, &i) in idx.iter().enumerate() {
            cols[c].push(rec[i].parse().unwrap_or(f64::NAN));
        }
    }
    cols
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn drive_spectrum_peaks_at_trap_frequency() {
    let d = tempfile::tempdir().unwrap();
    let o = run_in(d.path(), &["spectrum", "--preset", "fig3a", "--omega-min", "0.9", "--omega-max", "1.1", "--points", "2001"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let c = columns(&d.path().join("spectrum.csv"), &["omega", "S_total"]);
    let (i, _) = c[1].iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let m = json(&d.path().join("manifest.json"));
    let gamma_n = m["sets"][0]["derived"]["gamma_n"].as_f64().unwrap();
    assert!((c[0][i] - 1.0).abs() <= gamma_n, "peak at {}", c[0][i]);
    assert_eq!(m["sets"][0]["params"]["Omega"].as_f64(), Some(0.1));
    assert!(d.path().join("spectrum.json").exists());
}

#[test]
fn cavity_spectrum_has_four_lines() {
    let d = tempfile::tempdir().unwrap();
    let o = run_in(d.path(), &["spectrum", "--preset", "fig4", "--omega-min", "-10", "--omega-max", "10", "--points", "20001"]);
    assert!(o.status.success());
    let c = columns(&d.path().join("spectrum.csv"), &["omega", "S_g"]);
    let top = c[1].iter().copied().fold(0.0, f64::max);
    let peaks: Vec<f64> = (1..c[1].len() - 1)
        .filter(|&i| c[1][i] > c[1][i - 1] && c[1][i] >= c[1][i + 1] && c[1][i] > 1e-3 * top)
        .map(|i| c[0][i])
        .collect();
    assert_eq!(peaks.len(), 4, "{peaks:?}");
    // Inner pair at ±(Δ_c − Δ); outer pair near ±Δ_c, pushed out by the
    // dressing to ±(Δ_c − Δ + Δ̄).
    assert!((peaks[1] + 1.0).abs() < 5e-3 && (peaks[2] - 1.0).abs() < 5e-3);
    assert!((peaks[0] + 7.3246).abs() < 2e-3 && (peaks[3] - 7.3246).abs() < 2e-3);
}

#[test]
fn empty_grid_is_a_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let o = run_in(d.path(), &["spectrum", "--preset", "fig3a", "--points", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run_in(d.path(), &["scan", "--preset", "fig6", "--points", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn weak_sideband_rates_match_closed_form() {
    let d = tempfile::tempdir().unwrap();
    let o = run_in(d.path(), &["rates", "--preset", "casc-sb-weak"]);
    assert!(o.status.success());
    let c = columns(&d.path().join("rates.csv"), &["n_final", "closed_n_final"]);
    assert!((c[0][0] / c[1][0] - 1.0).abs() < 0.1);
}

#[test]
fn saturated_doppler_rate() {
    let d = tempfile::tempdir().unwrap();
    let o = run_in(d.path(), &["rates", "--preset", "nabla-g-saturated-doppler"]);
    assert!(o.status.success());
    let c = columns(&d.path().join("rates.csv"), &["W"]);
    let p = &json(&d.path().join("manifest.json"))["sets"][0]["params"];
    let f = |k: &str| p[k].as_f64().unwrap();
    let want = f("eta_c").powi(2) * f("g").powi(2) * f("nu") / f("kappa").powi(2);
    assert!((c[0][0] / want - 1.0).abs() < 0.1, "{} vs {want}", c[0][0]);
}

#[test]
fn heating_point_is_flagged_not_failed() {
    let d = tempfile::tempdir().unwrap();
    let o = run_in(d.path(), &["rates", "--preset", "fig3a", "--Delta", "1"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("heating"));
    let m = json(&d.path().join("manifest.json"));
    assert_eq!(m["flags"][0]["net_heating"], Value::Bool(true));
}

#[test]
fn rates_with_table1_report() {
    let d = tempfile::tempdir().unwrap();
    let o = run_in(d.path(), &["rates", "--preset", "fig3a", "--table1"]);
    assert!(o.status.success());
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("nabla-g-saturated-doppler") && out.contains("n/a"));
    let rows = csv::Reader::from_path(d.path().join("table1.csv")).unwrap().records().count();
    assert_eq!(rows, 8);
}

#[test]
fn scan_expands_thermal_list() {
    let d = tempfile::tempdir().unwrap();
    let o = run_in(d.path(), &["scan", "--preset", "fig6", "--N", "0.1,0.5,1", "--points", "41"]);
    assert!(o.status.success());
    let c = columns(&d.path().join("scan.csv"), &["set", "n_final"]);
    assert_eq!(c[0].len(), 123);
    let m = json(&d.path().join("manifest.json"));
    let ns: Vec<f64> = (0..3).map(|i| m["sets"][i]["params"]["N"].as_f64().unwrap()).collect();
    assert_eq!(ns, [0.1, 0.5, 1.0]);
    // Same δν, hotter environment, hotter motion.
    assert!(c[1][20] < c[1][61] && c[1][61] < c[1][102]);
}

#[test]
fn scan_over_drive_strength() {
    let d = tempfile::tempdir().unwrap();
    let o = run_in(d.path(), &["scan", "--preset", "fig7", "--Omega", "0.1,0.65,0.95", "--lock-sideband", "--points", "21"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = json(&d.path().join("manifest.json"));
    for i in 0..3 {
        let p = &m["sets"][i]["params"];
        let (o, dl) = (p["Omega"].as_f64().unwrap(), p["Delta"].as_f64().unwrap());
        assert!((o.hypot(dl) - 1.0).abs() < 1e-12);
    }
    let c = columns(&d.path().join("scan.csv"), &["W_over_W0"]);
    assert_eq!(c[0].len(), 63);
    assert!((c[0][10] - 1.0).abs() < 1e-12);
}

#[test]
fn output_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["scan", "--preset", "fig6", "--N", "0,0.5", "--points", "64"];
    assert!(run_in(a.path(), &args).status.success());
    let o = Command::new(env!("CARGO_BIN_EXE_cavicool"))
        .args(args)
        .args(["--out", b.path().to_str().unwrap()])
        .env("CAVICOOL_THREADS", "1")
        .output()
        .unwrap();
    assert!(o.status.success());
    for f in ["scan.csv", "manifest.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_file_with_absolute_units() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.toml");
    // 100 kHz trap; every frequency in Hz.
    std::fs::write(
        &cfg,
        "scale = 1.0e5\ng = 5.0e4\nkappa = 5.0e5\nOmega = 1.0e4\nDelta = -1.0e5\nDelta_c = 0.0\nnu = 1.0e5\nN = 0.0\neta = 0.05\neta_c = 0.0\n",
    )
    .unwrap();
    let o = run_in(d.path(), &["rates", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let e = run_in(d.path(), &["rates", "--preset", "fig3a"]);
    assert!(e.status.success());
    let a = json(&d.path().join("manifest.json"));
    assert!(o.stdout == e.stdout, "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(a["sets"][0]["params"]["kappa"].as_f64(), Some(5.0));
}

#[test]
fn invalid_config_reports_the_line() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("bad.toml");
    std::fs::write(&cfg, "g = 0.5\nkappa = \"wide\"\n").unwrap();
    let o = run_in(d.path(), &["rates", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    std::fs::write(&cfg, "g = 0.5\nkapa = 5.0\n").unwrap();
    let o = run_in(d.path(), &["rates", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let o = run_in(d.path(), &["rates", "--preset", "fig3a", "--kappa", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run_in(d.path(), &["rates", "--preset", "no-such-figure"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_agrees_with_spectral_rate() {
    let d = tempfile::tempdir().unwrap();
    let o = run_in(d.path(), &["oracle", "--preset", "casc-sb-weak"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&d.path().join("oracle.json"));
    assert_eq!(r["converged"], Value::Bool(true));
    let levels = r["levels"].as_array().unwrap();
    let w = levels.last().unwrap()["fit"]["w"].as_f64().unwrap();
    let spectral = r["spectral"]["w"].as_f64().unwrap();
    assert!((w / spectral - 1.0).abs() < 0.1, "{w} vs {spectral}");
}

#[test]
fn oracle_dims_override_and_physicality_exit() {
    let d = tempfile::tempdir().unwrap();
    let o = run_in(d.path(), &["oracle", "--preset", "fig3a", "--dims", "2,2,2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("max_top_motion"));
    let r = json(&d.path().join("oracle.json"));
    assert_eq!(r["levels"][0]["truncation"]["cavity"].as_u64(), Some(1));
    assert_eq!(r["levels"][0]["truncation"]["motion"].as_u64(), Some(1));
    assert!(d.path().join("trajectories.csv").exists());

    let o = run_in(d.path(), &["oracle", "--preset", "fig3a", "--dims", "3,4,5"]);
    assert_eq!(o.status.code(), Some(2));
}
