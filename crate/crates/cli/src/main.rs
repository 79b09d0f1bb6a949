//! `cavicool` command-line front end.
//!
//! Exit codes: 0 success (heating points included), 1 computation error,
//! 2 invalid configuration or usage, 3 physicality violation in an oracle
//! run, 4 oracle truncation not converged.

mod config;
mod emit;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cavicool::cooling::{imperfection_scan, rates_at, table1, CoolingResult, Mechanism, ScanMode, Table1Cell, Table1Row};
use cavicool::oracle::{
    default_levels, fit_cooling, simulate, ConvergenceStudy, OracleConfig, OracleRun, Physicality, Trajectory, Truncation,
};
use cavicool::params::SystemParams;
use cavicool::spectra::{Component, SpectralModel};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use config::{grid, ConfigError, ParamArgs};
use emit::{num, opt, write_json, Manifest, OutDir, SetEcho, Table};

#[derive(Parser)]
#[command(name = "cavicool", version, about = "Cavity-assisted microwave cooling of a trapped polar molecule")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Force spectrum S(ω) and its components on a frequency grid.
    Spectrum {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, allow_negative_numbers = true)]
        omega_min: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        omega_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Heating and cooling rates, W and the final occupation.
    Rates {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum)]
        mechanism: Option<Mech>,
        /// Also print the Table-1 report at each thermal occupation.
        #[arg(long)]
        table1: bool,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// W and the final occupation against a trap-frequency offset δν.
    Scan {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, allow_negative_numbers = true)]
        delta_nu_min: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        delta_nu_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long, value_enum, default_value = "anharmonic")]
        mode: Mode,
        /// Motional level for the state-dependent mode.
        #[arg(long, default_value_t = 1)]
        level: u32,
        #[arg(long, value_enum)]
        mechanism: Option<Mech>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Time-domain master equation with a fitted cooling rate.
    Oracle {
        #[command(flatten)]
        params: ParamArgs,
        /// Hilbert dimensions `2,cavity,motion`.
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
        /// Initial motional Fock states, at least two.
        #[arg(long, value_delimiter = ',')]
        n_init: Vec<usize>,
        /// One truncation only, no convergence check.
        #[arg(long)]
        single: bool,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Closed forms of every Table-1 cell against the spectral route.
    Table1 {
        #[arg(long = "N", value_delimiter = ',', default_value = "0")]
        n_thermal: Vec<f64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Mech {
    Full,
    Drive,
    Cavity,
}

impl From<Mech> for Mechanism {
    fn from(m: Mech) -> Self {
        match m {
            Mech::Full => Mechanism::Full,
            Mech::Drive => Mechanism::Drive,
            Mech::Cavity => Mechanism::Cavity,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Mode {
    Anharmonic,
    StateDependent,
}

#[derive(Debug)]
enum Failure {
    Config(ConfigError),
    Compute(String),
    Io(std::io::Error),
    Physicality(String),
    Unconverged(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn compute<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Compute(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var("CAVICOOL_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                rayon::ThreadPoolBuilder::new().num_threads(n).build_global().expect("thread pool set once");
            }
            _ => {
                eprintln!("error: CAVICOOL_THREADS must be a positive integer, got `{v}`");
                return ExitCode::from(2);
            }
        }
    }
    let result = match cli.command {
        Command::Spectrum { params, omega_min, omega_max, points, out } => {
            cmd_spectrum(&params, omega_min, omega_max, points, &out)
        }
        Command::Rates { params, mechanism, table1, out } => cmd_rates(&params, mechanism, table1, &out),
        Command::Scan { params, delta_nu_min, delta_nu_max, points, mode, level, mechanism, out } => {
            cmd_scan(&params, delta_nu_min, delta_nu_max, points, mode, level, mechanism, &out)
        }
        Command::Oracle { params, dims, n_init, single, samples, out } => {
            cmd_oracle(&params, &dims, &n_init, single, samples, &out)
        }
        Command::Table1 { n_thermal, out } => cmd_table1(&n_thermal, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Config(e) => (2, e.to_string()),
                Failure::Compute(m) => (1, m),
                Failure::Io(e) => (1, e.to_string()),
                Failure::Physicality(m) => (3, m),
                Failure::Unconverged(m) => (4, m),
            };
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn echo(sets: &[SystemParams]) -> Vec<SetEcho> {
    sets.iter().enumerate().map(|(i, p)| SetEcho::new(i, p)).collect()
}

fn cmd_spectrum(
    args: &ParamArgs,
    omega_min: Option<f64>,
    omega_max: Option<f64>,
    points: Option<usize>,
    out: &Path,
) -> Result<(), Failure> {
    let cfg = args.resolve()?;
    let lo = omega_min.or(cfg.file.omega_min).unwrap_or(-10.0);
    let hi = omega_max.or(cfg.file.omega_max).unwrap_or(10.0);
    let n = points.or(cfg.file.omega_points).unwrap_or(2001);
    let omegas = grid(lo, hi, n, "omega")?;

    let mut table = Table::new(&["set", "omega", "S_total", "S_Omega", "S_g", "S_I"]);
    let mut json_sets = Vec::new();
    for (i, p) in cfg.sets.iter().enumerate() {
        let model = SpectralModel::new(p).map_err(compute)?;
        let rows: Vec<[f64; 4]> = omegas
            .par_iter()
            .map(|&w| {
                let s_o = model.component(Component::Omega, w)?;
                let s_g = model.component(Component::G, w)?;
                let s_i = model.component(Component::Interference, w)?;
                Ok([s_o + s_g + s_i, s_o, s_g, s_i])
            })
            .collect::<Result<_, cavicool::spectra::SpectrumError>>()
            .map_err(compute)?;
        for (w, r) in omegas.iter().zip(&rows) {
            table.push(vec![i.to_string(), num(*w), num(r[0]), num(r[1]), num(r[2]), num(r[3])]);
        }
        let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<_>>();
        json_sets.push(json!({
            "set": i,
            "omega": omegas,
            "S_total": col(0),
            "S_Omega": col(1),
            "S_g": col(2),
            "S_I": col(3),
        }));
    }

    let dir = OutDir::create(out)?;
    table.write(&dir.file("spectrum.csv"))?;
    write_json(&dir.file("spectrum.json"), &json!({ "sets": json_sets }))?;
    write_json(
        &dir.file("manifest.json"),
        &Manifest {
            tool: "cavicool",
            version: env!("CARGO_PKG_VERSION"),
            command: "spectrum",
            preset: cfg.preset.as_deref(),
            units: "trap frequency",
            options: json!({ "omega_min": lo, "omega_max": hi, "points": n }),
            sets: echo(&cfg.sets),
            flags: json!({}),
            files: vec!["spectrum.csv".into(), "spectrum.json".into()],
        },
    )?;
    println!("wrote {} rows for {} parameter set(s) to {}", omegas.len() * cfg.sets.len(), cfg.sets.len(), out.display());
    Ok(())
}

fn preset_cell(preset: Option<&str>) -> Option<Table1Cell> {
    preset.and_then(Table1Cell::from_name)
}

fn flags_json(r: &CoolingResult) -> serde_json::Value {
    json!({ "net_heating": r.flags.net_heating, "regime_mismatch": r.flags.regime_mismatch })
}

fn cmd_rates(args: &ParamArgs, mechanism: Option<Mech>, with_table1: bool, out: &Path) -> Result<(), Failure> {
    let cfg = args.resolve()?;
    let cell = preset_cell(cfg.preset.as_deref());
    let mech: Mechanism = match (mechanism, cell) {
        (Some(m), _) => m.into(),
        (None, Some(c)) => c.mechanism(),
        (None, None) => Mechanism::Full,
    };

    let results: Vec<(CoolingResult, Option<CoolingResult>)> = cfg
        .sets
        .par_iter()
        .map(|p| {
            let r = rates_at(p, p.nu, mech)?;
            let closed = match cell {
                Some(c) => c.closed_form(p)?,
                None => None,
            };
            Ok((r, closed))
        })
        .collect::<Result<_, cavicool::cooling::CoolingError>>()
        .map_err(compute)?;

    let mut table = Table::new(&[
        "set",
        "A_minus",
        "A_plus",
        "W",
        "n_final",
        "net_heating",
        "regime_mismatch",
        "closed_W",
        "closed_n_final",
    ]);
    let mut flags = Vec::new();
    for (i, (r, c)) in results.iter().enumerate() {
        table.push(vec![
            i.to_string(),
            num(r.a_minus),
            num(r.a_plus),
            num(r.w),
            opt(r.n_final),
            r.flags.net_heating.to_string(),
            r.flags.regime_mismatch.to_string(),
            opt(c.map(|c| c.w)),
            opt(c.and_then(|c| c.n_final)),
        ]);
        flags.push(flags_json(r));
        println!("set {i}: A- = {:.6e}  A+ = {:.6e}  W = {:.6e}", r.a_minus, r.a_plus, r.w);
        match r.n_final {
            Some(n) => println!("       n_final = {n:.6e}"),
            None => println!("       n_final = none (net heating)"),
        }
        if let Some(c) = c {
            println!(
                "       closed form ({}): W = {:.6e}  n_final = {}",
                cell.map(|c| c.name()).unwrap_or(""),
                c.w,
                c.n_final.map(|n| format!("{n:.6e}")).unwrap_or_else(|| "none".into())
            );
        }
        if r.flags.net_heating {
            println!("       flag: heating");
        }
    }

    let dir = OutDir::create(out)?;
    let mut files = vec!["rates.csv".to_string(), "rates.json".to_string()];
    table.write(&dir.file("rates.csv"))?;
    write_json(&dir.file("rates.json"), &json!({ "mechanism": mech, "results": results }))?;
    if with_table1 {
        let mut ns: Vec<f64> = Vec::new();
        for p in &cfg.sets {
            if !ns.contains(&p.n_thermal) {
                ns.push(p.n_thermal);
            }
        }
        let rows = table1_rows(&ns)?;
        print_table1(&rows);
        table1_table(&rows).write(&dir.file("table1.csv"))?;
        files.push("table1.csv".into());
    }
    write_json(
        &dir.file("manifest.json"),
        &Manifest {
            tool: "cavicool",
            version: env!("CARGO_PKG_VERSION"),
            command: "rates",
            preset: cfg.preset.as_deref(),
            units: "trap frequency",
            options: json!({ "mechanism": mech, "table1": with_table1 }),
            sets: echo(&cfg.sets),
            flags: serde_json::Value::Array(flags),
            files,
        },
    )?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_scan(
    args: &ParamArgs,
    lo: Option<f64>,
    hi: Option<f64>,
    points: Option<usize>,
    mode: Mode,
    level: u32,
    mechanism: Option<Mech>,
    out: &Path,
) -> Result<(), Failure> {
    let cfg = args.resolve()?;
    let lo = lo.or(cfg.file.delta_nu_min).unwrap_or(-0.05);
    let hi = hi.or(cfg.file.delta_nu_max).unwrap_or(0.05);
    let n = points.or(cfg.file.delta_nu_points).unwrap_or(201);
    let deltas = grid(lo, hi, n, "delta_nu")?;
    let mech: Mechanism = mechanism.map(Into::into).unwrap_or(Mechanism::Full);
    let scan_mode = match mode {
        Mode::Anharmonic => ScanMode::Anharmonic,
        Mode::StateDependent => ScanMode::StateDependent { level },
    };

    let curves: Vec<(CoolingResult, Vec<CoolingResult>)> = cfg
        .sets
        .par_iter()
        .map(|p| {
            let w0 = rates_at(p, p.nu, mech)?;
            let pts: Vec<CoolingResult> = deltas
                .par_chunks(32)
                .map(|chunk| imperfection_scan(p, chunk, scan_mode, mech))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .flatten()
                .map(|s| s.result)
                .collect();
            Ok((w0, pts))
        })
        .collect::<Result<_, cavicool::cooling::CoolingError>>()
        .map_err(compute)?;

    let mut table = Table::new(&["set", "delta_nu", "W", "W_over_W0", "n_final", "net_heating", "regime_mismatch"]);
    let mut flags = Vec::new();
    for (i, (w0, pts)) in curves.iter().enumerate() {
        let mut heating = 0;
        for (d, r) in deltas.iter().zip(pts) {
            heating += r.flags.net_heating as usize;
            table.push(vec![
                i.to_string(),
                num(*d),
                num(r.w),
                num(r.w / w0.w),
                opt(r.n_final),
                r.flags.net_heating.to_string(),
                r.flags.regime_mismatch.to_string(),
            ]);
        }
        flags.push(json!({ "W0": w0.w, "heating_points": heating }));
        println!("set {i}: W0 = {:.6e}, {heating} of {} points heat", w0.w, deltas.len());
    }

    let dir = OutDir::create(out)?;
    table.write(&dir.file("scan.csv"))?;
    write_json(
        &dir.file("manifest.json"),
        &Manifest {
            tool: "cavicool",
            version: env!("CARGO_PKG_VERSION"),
            command: "scan",
            preset: cfg.preset.as_deref(),
            units: "trap frequency",
            options: json!({
                "delta_nu_min": lo,
                "delta_nu_max": hi,
                "points": n,
                "mode": mode,
                "level": level,
                "mechanism": mech,
            }),
            sets: echo(&cfg.sets),
            flags: serde_json::Value::Array(flags),
            files: vec!["scan.csv".into()],
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct LevelRecord {
    truncation: Truncation,
    physicality: Physicality,
    fit: Option<cavicool::oracle::CoolingFit>,
    steps: Vec<usize>,
}

fn cmd_oracle(
    args: &ParamArgs,
    dims: &[usize],
    n_init: &[usize],
    single: bool,
    samples: Option<usize>,
    out: &Path,
) -> Result<(), Failure> {
    let cfg = args.resolve()?;
    let [p] = cfg.sets.as_slice() else {
        return Err(ConfigError::Usage("oracle takes a single parameter set".into()).into());
    };
    let mut oc = OracleConfig::for_params(p);
    if !dims.is_empty() {
        match dims {
            [2, c, m] if *c >= 1 && *m >= 1 => oc.truncation = Truncation { cavity: c - 1, motion: m - 1 },
            _ => return Err(ConfigError::Usage(format!("--dims expects 2,<cavity>,<motion>, got {dims:?}")).into()),
        }
    }
    if !n_init.is_empty() {
        if n_init.len() < 2 {
            return Err(ConfigError::Usage("--n-init needs at least two initial states".into()).into());
        }
        oc.initial_motion = n_init.to_vec();
    }
    if let Some(&n) = oc.initial_motion.iter().find(|&&n| n > oc.truncation.motion) {
        return Err(ConfigError::Usage(format!("initial Fock state {n} exceeds the motion cut {}", oc.truncation.motion)).into());
    }
    if let Some(s) = samples {
        oc.samples = s;
    }
    let levels = if single { vec![oc.truncation] } else { default_levels(&oc) };
    let spectral = rates_at(p, p.nu, Mechanism::Full).map_err(compute)?;

    let dir = OutDir::create(out)?;
    let mut traj_table = Table::new(&["level", "initial_motion", "t", "n", "cavity", "rho_ee", "trace"]);
    let mut records = Vec::new();
    let mut runs = Vec::new();
    let mut failure = None;
    for (k, t) in levels.iter().enumerate() {
        let c = OracleConfig { truncation: *t, ..oc.clone() };
        eprintln!("level {k}: cavity cut {}, motion cut {}", t.cavity, t.motion);
        let trajectories: Vec<Trajectory> = simulate(p, &c).map_err(compute)?;
        for tr in &trajectories {
            for i in 0..tr.times.len() {
                traj_table.push(vec![
                    k.to_string(),
                    tr.initial_motion.to_string(),
                    num(tr.times[i]),
                    num(tr.motion[i]),
                    num(tr.cavity[i]),
                    num(tr.excited[i]),
                    num(tr.trace[i]),
                ]);
            }
        }
        let physicality = trajectories.iter().fold(Physicality::default(), |a, t| a.merge(&t.physicality));
        let steps = trajectories.iter().map(|t| t.steps).collect();
        if !physicality.ok() {
            records.push(LevelRecord { truncation: *t, physicality, fit: None, steps });
            failure = Some(Failure::Physicality(format!("level {k}: {physicality:?}")));
            break;
        }
        match fit_cooling(&trajectories, c.window) {
            Ok(fit) => {
                records.push(LevelRecord { truncation: *t, physicality, fit: Some(fit.clone()), steps });
                runs.push(OracleRun { params: *p, config: c, trajectories, fit, physicality });
            }
            Err(e) => {
                records.push(LevelRecord { truncation: *t, physicality, fit: None, steps });
                failure = Some(compute(e));
                break;
            }
        }
    }

    let study = (failure.is_none()).then(|| ConvergenceStudy::from_runs(runs));
    let converged = study.as_ref().map(|s| single || s.converged());
    traj_table.write(&dir.file("trajectories.csv"))?;
    write_json(
        &dir.file("oracle.json"),
        &json!({
            "levels": records,
            "rel_change_W": study.as_ref().map(|s| s.rel_change_w.clone()),
            "rel_change_n": study.as_ref().map(|s| s.rel_change_n.clone()),
            "converged": converged,
            "spectral": spectral,
        }),
    )?;
    write_json(
        &dir.file("manifest.json"),
        &Manifest {
            tool: "cavicool",
            version: env!("CARGO_PKG_VERSION"),
            command: "oracle",
            preset: cfg.preset.as_deref(),
            units: "trap frequency",
            options: json!({
                "initial_motion": oc.initial_motion,
                "window": oc.window,
                "samples": oc.samples,
                "tolerances": oc.tolerances,
                "levels": levels,
            }),
            sets: echo(&cfg.sets),
            flags: json!({ "converged": converged, "physicality_ok": failure.as_ref().map_or(true, |f| !matches!(f, Failure::Physicality(_))) }),
            files: vec!["trajectories.csv".into(), "oracle.json".into()],
        },
    )?;
    if let Some(f) = failure {
        return Err(f);
    }
    let study = study.expect("no failure");
    let fit = &study.best().fit;
    println!("oracle:   W = {:.6e}  n_final = {:.6e}", fit.w, fit.n_final);
    println!(
        "spectral: W = {:.6e}  n_final = {}",
        spectral.w,
        spectral.n_final.map(|n| format!("{n:.6e}")).unwrap_or_else(|| "none (net heating)".into())
    );
    if converged == Some(false) {
        return Err(Failure::Unconverged(format!(
            "truncation not converged: relative change W {:?}, n {:?}",
            study.rel_change_w, study.rel_change_n
        )));
    }
    Ok(())
}

fn table1_rows(ns: &[f64]) -> Result<Vec<(f64, Table1Row)>, Failure> {
    let per_n: Vec<Vec<(f64, Table1Row)>> = ns
        .par_iter()
        .map(|&n| table1(n).map(|rows| rows.into_iter().map(|r| (n, r)).collect()))
        .collect::<Result<_, _>>()
        .map_err(compute)?;
    Ok(per_n.into_iter().flatten().collect())
}

fn table1_table(rows: &[(f64, Table1Row)]) -> Table {
    let mut t = Table::new(&["N", "cell", "spectral_W", "spectral_n_final", "closed_W", "closed_n_final", "dev_W", "dev_n", "tolerance", "pass"]);
    for (n, r) in rows {
        t.push(vec![
            num(*n),
            r.cell.name().into(),
            num(r.spectral.w),
            opt(r.spectral.n_final),
            opt(r.closed_form.map(|c| c.w)),
            opt(r.closed_form.and_then(|c| c.n_final)),
            opt(r.dev_w),
            opt(r.dev_n),
            num(r.tolerance),
            r.pass.map(|b| b.to_string()).unwrap_or_else(|| "n/a".into()),
        ]);
    }
    t
}

fn print_table1(rows: &[(f64, Table1Row)]) {
    println!(
        "{:>5}  {:<28}  {:>12}  {:>12}  {:>12}  {:>12}  {:>8}  {:>8}  {:>4}",
        "N", "cell", "W", "n_final", "W closed", "n closed", "dW", "dn", "ok"
    );
    let e = |x: Option<f64>| x.map(|v| format!("{v:.4e}")).unwrap_or_else(|| "-".into());
    let d = |x: Option<f64>| x.map(|v| format!("{v:+.4}")).unwrap_or_else(|| "-".into());
    for (n, r) in rows {
        println!(
            "{:>5}  {:<28}  {:>12}  {:>12}  {:>12}  {:>12}  {:>8}  {:>8}  {:>4}",
            n,
            r.cell.name(),
            format!("{:.4e}", r.spectral.w),
            e(r.spectral.n_final),
            e(r.closed_form.map(|c| c.w)),
            e(r.closed_form.and_then(|c| c.n_final)),
            d(r.dev_w),
            d(r.dev_n),
            match r.pass {
                Some(true) => "yes",
                Some(false) => "NO",
                None => "n/a",
            }
        );
    }
}

fn cmd_table1(ns: &[f64], out: &Path) -> Result<(), Failure> {
    if ns.is_empty() {
        return Err(ConfigError::Usage("--N list is empty".into()).into());
    }
    let rows = table1_rows(ns)?;
    print_table1(&rows);
    let dir = OutDir::create(out)?;
    table1_table(&rows).write(&dir.file("table1.csv"))?;
    let sets: Vec<SystemParams> = rows.iter().map(|(_, r)| r.params).collect();
    write_json(
        &dir.file("manifest.json"),
        &Manifest {
            tool: "cavicool",
            version: env!("CARGO_PKG_VERSION"),
            command: "table1",
            preset: None,
            units: "trap frequency",
            options: json!({ "N": ns }),
            sets: echo(&sets),
            flags: serde_json::Value::Array(rows.iter().map(|(_, r)| json!({ "cell": r.cell.name(), "pass": r.pass })).collect()),
            files: vec!["table1.csv".into()],
        },
    )?;
    Ok(())
}
