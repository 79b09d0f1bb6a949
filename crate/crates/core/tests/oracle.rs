use cavicool::cooling::rates_from_spectrum;
use cavicool::oracle::{run_oracle, OracleConfig, Trajectory};
use cavicool::params::{derive, SystemParams};

fn fig3a() -> SystemParams {
    SystemParams::default()
}

#[test]
fn blue_detuned_drive_heats_in_time_domain() {
    let p = SystemParams { detuning: 1.0, ..fig3a() };
    let mut cfg = OracleConfig::for_params(&p);
    // Heating spreads population upward.
    cfg.truncation.motion += 4;
    let run = run_oracle(&p, &cfg).unwrap();
    let spectral = rates_from_spectrum(&p).unwrap();
    assert!(spectral.w < 0.0);
    assert!(run.fit.w < 0.0, "fitted W = {}", run.fit.w);
    assert!((run.fit.w / spectral.w - 1.0).abs() < 0.1, "{} vs {}", run.fit.w, spectral.w);
    assert!(run.physicality.ok());
}

fn sample_at(t: &Trajectory, time: f64) -> f64 {
    let i = t.times.iter().position(|&x| x >= time).unwrap();
    t.motion[i]
}

#[test]
fn undriven_system_does_not_relax_motion() {
    // Without drive the only motional coupling is the thermal cavity, which
    // heats and cools at equal rates: the gap between the two trajectories
    // stays put.
    let p = SystemParams { rabi: 0.0, eta: 0.05, eta_c: 0.05, n_thermal: 0.1, ..fig3a() };
    let mut cfg = OracleConfig::for_params(&p);
    cfg.truncation.motion += 4;
    let run = run_oracle(&p, &cfg).unwrap();
    let (t0, t1) = cfg.window;
    let gap = |time| sample_at(&run.trajectories[0], time) - sample_at(&run.trajectories[1], time);
    let w = -(gap(t1) / gap(t0)).ln() / (t1 - t0);
    let gamma = derive(&p).gamma;
    assert!(w.abs() < 1e-3 * gamma, "W = {w}");
    assert!(run.physicality.ok());
}
