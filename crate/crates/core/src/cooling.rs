//! Cooling observables from the force spectrum and their regime limits.
//!
//! The motional occupation obeys `d⟨n⟩/dt = −W(⟨n⟩ − ⟨n⟩₀)` with
//! `A₋ = S(+ν)`, `A₊ = S(−ν)`, `W = A₋ − A₊` and `⟨n⟩₀ = A₊/W`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::{classify_regime, derive, ParamError, Regime, SystemParams};
use crate::spectra::{Component, SpectralModel, SpectrumError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoolingError {
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("heating configuration: strong-drive sideband cooling needs Δ < 0, got Δ = {0}")]
    HeatingConfiguration(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Spectral,
    ClosedForm,
    Oracle,
}

/// Which spectral components enter `A±`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mechanism {
    /// `S_Ω + S_g + S_I`.
    Full,
    /// `S_Ω` alone (drive-gradient cooling).
    Drive,
    /// `S_g` alone (cavity-gradient cooling).
    Cavity,
}

impl Mechanism {
    fn components(self) -> &'static [Component] {
        match self {
            Mechanism::Full => &[Component::Omega, Component::G, Component::Interference],
            Mechanism::Drive => &[Component::Omega],
            Mechanism::Cavity => &[Component::G],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CoolingFlags {
    /// `W ≤ 0`: no finite steady occupation.
    pub net_heating: bool,
    /// A closed form was evaluated outside the regime it was derived for.
    pub regime_mismatch: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoolingResult {
    pub a_minus: f64,
    pub a_plus: f64,
    pub w: f64,
    pub n_final: Option<f64>,
    pub regime: Regime,
    pub flags: CoolingFlags,
    pub route: Route,
}

impl CoolingResult {
    pub fn from_rates(a_minus: f64, a_plus: f64, regime: Regime, route: Route) -> Self {
        let w = a_minus - a_plus;
        let net_heating = !(w > 0.0);
        Self {
            a_minus,
            a_plus,
            w,
            n_final: if net_heating { None } else { Some(a_plus / w) },
            regime,
            flags: CoolingFlags { net_heating, regime_mismatch: false },
            route,
        }
    }

    /// Closed forms give `W` and `⟨n⟩₀`; rates follow as `A₊ = ⟨n⟩₀W`,
    /// `A₋ = (⟨n⟩₀ + 1)W`.
    pub fn from_closed_form(w: f64, n_final: f64, regime: Regime, regime_ok: bool) -> Self {
        let mut r = Self::from_rates((n_final + 1.0) * w, n_final * w, regime, Route::ClosedForm);
        r.w = w;
        r.n_final = Some(n_final);
        r.flags.regime_mismatch = !regime_ok;
        r
    }
}

fn rates_with_model(model: &SpectralModel, nu_r: f64, mechanism: Mechanism) -> Result<(f64, f64), SpectrumError> {
    let mut a_minus = 0.0;
    let mut a_plus = 0.0;
    for &c in mechanism.components() {
        a_minus += model.component(c, nu_r)?;
        a_plus += model.component(c, -nu_r)?;
    }
    Ok((a_minus, a_plus))
}

/// `A∓ = S(±ν_r)` for the chosen mechanism, with all excitation parameters
/// held fixed.
pub fn rates_at(p: &SystemParams, nu_r: f64, mechanism: Mechanism) -> Result<CoolingResult, CoolingError> {
    let model = SpectralModel::new(p)?;
    let (a_minus, a_plus) = rates_with_model(&model, nu_r, mechanism)?;
    Ok(CoolingResult::from_rates(a_minus, a_plus, classify_regime(p), Route::Spectral))
}

/// Rates from the full spectrum at the trap frequency.
pub fn rates_from_spectrum(p: &SystemParams) -> Result<CoolingResult, CoolingError> {
    rates_at(p, p.nu, Mechanism::Full)
}

// Optimal-detuning constructors.

/// `Δ = −ν`.
pub fn with_casc_sideband_detuning(p: &SystemParams) -> SystemParams {
    SystemParams { detuning: -p.nu, ..*p }
}

/// `Δ = −γ_N/2`.
pub fn with_casc_doppler_detuning(p: &SystemParams) -> SystemParams {
    SystemParams { detuning: -0.5 * derive(p).gamma_n, ..*p }
}

/// `Ω = ν sin φ`, `Δ = −ν cos φ`, so that `Δ̄ = ν` on the red side.
pub fn with_strong_drive(p: &SystemParams, sin_phi: f64) -> SystemParams {
    let c = (1.0 - sin_phi * sin_phi).max(0.0).sqrt();
    SystemParams { rabi: p.nu * sin_phi, detuning: -p.nu * c, ..*p }
}

/// `Δ_c − Δ = ν`.
pub fn with_nabla_g_sideband_detuning(p: &SystemParams) -> SystemParams {
    SystemParams { cavity_detuning: p.detuning + p.nu, ..*p }
}

/// `Δ_c − Δ = κ`.
pub fn with_nabla_g_doppler_detuning(p: &SystemParams) -> SystemParams {
    SystemParams { cavity_detuning: p.detuning + p.kappa, ..*p }
}

/// Resonant drive with `Δ_c = ν`.
pub fn with_saturated_sideband_detuning(p: &SystemParams) -> SystemParams {
    SystemParams { detuning: 0.0, cavity_detuning: p.nu, ..*p }
}

/// Resonant drive with `Δ_c = κ`.
pub fn with_saturated_doppler_detuning(p: &SystemParams) -> SystemParams {
    SystemParams { detuning: 0.0, cavity_detuning: p.kappa, ..*p }
}

// Closed forms.

fn n2(p: &SystemParams) -> f64 {
    2.0 * p.n_thermal + 1.0
}

/// Weak-drive sideband CASC: `W = η²Ω²/((2N+1)γ_N)`,
/// `⟨n⟩₀ = N + (2N+1)(γ_N/4ν)²`.
pub fn casc_weak_sideband(p: &SystemParams) -> CoolingResult {
    let d = derive(p);
    let r = classify_regime(p);
    let w = p.eta * p.eta * p.rabi * p.rabi / (n2(p) * d.gamma_n);
    let n = p.n_thermal + n2(p) * (d.gamma_n / (4.0 * p.nu)).powi(2);
    CoolingResult::from_closed_form(w, n, r, d.gamma_n < p.nu && p.rabi < d.gamma_n)
}

/// Weak-drive Doppler CASC: `W = 2η²Ω²ν/((2N+1)γ_N²)`,
/// `⟨n⟩₀ = (2N+1)γ_N/4ν`.
pub fn casc_weak_doppler(p: &SystemParams) -> CoolingResult {
    let d = derive(p);
    let r = classify_regime(p);
    let w = 2.0 * p.eta * p.eta * p.rabi * p.rabi * p.nu / (n2(p) * d.gamma_n * d.gamma_n);
    let n = n2(p) * d.gamma_n / (4.0 * p.nu);
    CoolingResult::from_closed_form(w, n, r, d.gamma_n > p.nu && p.rabi < d.gamma_n)
}

/// `g(φ) = 4 sin²φ |cos³φ| / (4 − sin⁴φ)`.
pub fn g_phi(sin_phi: f64) -> f64 {
    let s2 = sin_phi * sin_phi;
    let c = (1.0 - s2).max(0.0).sqrt();
    4.0 * s2 * c.powi(3) / (4.0 - s2 * s2)
}

/// `g₁(φ) = (1 − |cos φ|)² / (4|cos φ|)`.
pub fn g1_phi(sin_phi: f64) -> f64 {
    let c = (1.0 - sin_phi * sin_phi).max(0.0).sqrt();
    (1.0 - c).powi(2) / (4.0 * c)
}

/// Strong-drive sideband CASC with its three-peak diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrongDriveCasc {
    pub result: CoolingResult,
    pub sin_phi: f64,
    pub g: f64,
    pub g1: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    /// Width of the `±Δ̄` peaks, `γ_N(2 + sin²φ)/2`.
    pub gamma_bar: f64,
    /// Width of the central peak, `γ_N(1 + cos²φ)/2`.
    pub gamma_bar0: f64,
    /// Approximate eigenvalues `ε± ≃ ±iΔ̄ − γ̄/2`, `ε₀ ≃ −γ̄₀` of the Bloch matrix.
    pub eps_plus: (f64, f64),
    pub eps_minus: (f64, f64),
    pub eps_zero: (f64, f64),
}

/// `α± ≃ cos²φ (ρ_ee⁰ + (1 ± |cos φ|)² / (2(2N+1)(1 + cos²φ)))`.
pub fn alpha_pm(sin_phi: f64, n_thermal: f64) -> (f64, f64) {
    let c2 = (1.0 - sin_phi * sin_phi).max(0.0);
    let c = c2.sqrt();
    let n2 = 2.0 * n_thermal + 1.0;
    let rho0 = n_thermal / n2;
    let a = |sgn: f64| c2 * (rho0 + (1.0 + sgn * c).powi(2) / (2.0 * n2 * (1.0 + c2)));
    (a(1.0), a(-1.0))
}

/// `W = γ(ην/γ_N)² g(φ)`, `⟨n⟩₀ ≃ N + (2N+1) g₁(φ)`.
pub fn casc_strong_sideband(p: &SystemParams) -> Result<StrongDriveCasc, CoolingError> {
    if p.detuning >= 0.0 {
        return Err(CoolingError::HeatingConfiguration(p.detuning));
    }
    let d = derive(p);
    let r = classify_regime(p);
    let s = d.sin_phi();
    let c2 = 1.0 - s * s;
    let g = g_phi(s);
    let g1 = g1_phi(s);
    let w = d.gamma * (p.eta * p.nu / d.gamma_n).powi(2) * g;
    let n = p.n_thermal + n2(p) * g1;
    let ok = d.gamma_n < p.nu && (d.delta_bar - p.nu).abs() < d.gamma_n.max(1e-9 * p.nu);
    let (alpha_plus, alpha_minus) = alpha_pm(s, p.n_thermal);
    let gamma_bar = d.gamma_n * (2.0 + s * s) / 2.0;
    let gamma_bar0 = d.gamma_n * (1.0 + c2) / 2.0;
    Ok(StrongDriveCasc {
        result: CoolingResult::from_closed_form(w, n, r, ok),
        sin_phi: s,
        g,
        g1,
        alpha_plus,
        alpha_minus,
        gamma_bar,
        gamma_bar0,
        eps_plus: (-gamma_bar / 2.0, d.delta_bar),
        eps_minus: (-gamma_bar / 2.0, -d.delta_bar),
        eps_zero: (-gamma_bar0, 0.0),
    })
}

/// Weak-drive ∇g thermal correction in the sideband limit,
/// `4κ²(N+1)ρ_ee⁰(Δ/Ω)²[1/(κ² + (ν + Δ_c)²) + 1/(κ² + (ν − Δ_c)²)]`.
pub fn n_thermal_correction(p: &SystemParams) -> f64 {
    let d = derive(p);
    let k2 = p.kappa * p.kappa;
    let ratio = (p.detuning / p.rabi).powi(2);
    4.0 * k2 * (p.n_thermal + 1.0) * d.rho_ee_0 * ratio
        * (1.0 / (k2 + (p.nu + p.cavity_detuning).powi(2)) + 1.0 / (k2 + (p.nu - p.cavity_detuning).powi(2)))
}

/// Weak-drive ∇g thermal correction in the Doppler limit,
/// `β_th = 16κ²(N+1)ρ_ee⁰(Δ/Ω)²/(κ² + Δ_c²)`.
pub fn beta_thermal(p: &SystemParams) -> f64 {
    let d = derive(p);
    let k2 = p.kappa * p.kappa;
    16.0 * k2 * (p.n_thermal + 1.0) * d.rho_ee_0 * (p.detuning / p.rabi).powi(2) / (k2 + p.cavity_detuning.powi(2))
}

/// Weak-drive ∇g sideband: `W = η_c²g²/(2κ)(Ω/Δ)²`,
/// `⟨n⟩₀ = N + (N+1)(κ/2ν)² + ⟨n⟩_th`.
pub fn nabla_g_weak_sideband(p: &SystemParams) -> CoolingResult {
    let r = classify_regime(p);
    let w = p.eta_c * p.eta_c * p.g * p.g / (2.0 * p.kappa) * (p.rabi / p.detuning).powi(2);
    let n = p.n_thermal + (p.n_thermal + 1.0) * (p.kappa / (2.0 * p.nu)).powi(2) + n_thermal_correction(p);
    CoolingResult::from_closed_form(w, n, r, p.kappa < p.nu && p.rabi < p.detuning.abs())
}

/// Weak-drive ∇g Doppler: `W = η_c²g²ν/(2κ²)(Ω/Δ)²`,
/// `⟨n⟩₀ = [(2N+1) + β_th](κ/2ν)`.
pub fn nabla_g_weak_doppler(p: &SystemParams) -> CoolingResult {
    let r = classify_regime(p);
    let w = p.eta_c * p.eta_c * p.g * p.g * p.nu / (2.0 * p.kappa * p.kappa) * (p.rabi / p.detuning).powi(2);
    let n = (n2(p) + beta_thermal(p)) * p.kappa / (2.0 * p.nu);
    CoolingResult::from_closed_form(w, n, r, p.kappa > p.nu && p.rabi < p.detuning.abs())
}

/// Saturated ∇g sideband: `W = η_c²g²/κ`, `⟨n⟩₀ = N + (2N+1)(κ/2ν)²`.
pub fn nabla_g_saturated_sideband(p: &SystemParams) -> CoolingResult {
    let d = derive(p);
    let r = classify_regime(p);
    let w = p.eta_c * p.eta_c * p.g * p.g / p.kappa;
    let n = p.n_thermal + n2(p) * (p.kappa / (2.0 * p.nu)).powi(2);
    let ok = p.kappa < p.nu && p.rabi > d.gamma_n && p.rabi > p.detuning.abs() && p.rabi < p.kappa;
    CoolingResult::from_closed_form(w, n, r, ok)
}

/// Saturated ∇g Doppler: `W = η_c²g²ν/κ²`, `⟨n⟩₀ = (2N+1)κ/2ν`.
pub fn nabla_g_saturated_doppler(p: &SystemParams) -> CoolingResult {
    let d = derive(p);
    let r = classify_regime(p);
    let w = p.eta_c * p.eta_c * p.g * p.g * p.nu / (p.kappa * p.kappa);
    let n = n2(p) * p.kappa / (2.0 * p.nu);
    let ok = p.kappa > p.nu && p.rabi > d.gamma_n && p.rabi > p.detuning.abs() && p.rabi < p.kappa;
    CoolingResult::from_closed_form(w, n, r, ok)
}

// Regime spectra.

/// Weak-drive `S_Ω(ω) = (η²Ω²/4)[ρ_gg⁰γ_N/((ω+Δ)² + γ_N²/4) + ρ_ee⁰γ_N/((ω−Δ)² + γ_N²/4)]`.
pub fn s_omega_weak_drive(p: &SystemParams, w: f64) -> f64 {
    let d = derive(p);
    let gn = d.gamma_n;
    let l = |x: f64| gn / (x * x + gn * gn / 4.0);
    0.25 * p.eta * p.eta * p.rabi * p.rabi * ((1.0 - d.rho_ee_0) * l(w + p.detuning) + d.rho_ee_0 * l(w - p.detuning))
}

/// Three-peak `S_Ω` keeping only the `±Δ̄` sidebands.
pub fn s_omega_strong_drive(p: &SystemParams, w: f64) -> f64 {
    let d = derive(p);
    let (ap, am) = alpha_pm(d.sin_phi(), p.n_thermal);
    let gb = d.gamma_n * (2.0 + d.sin_phi().powi(2)) / 2.0;
    let l = |x: f64| gb / (x * x + gb * gb / 4.0);
    0.25 * p.eta * p.eta * p.rabi * p.rabi * (ap * l(w - d.delta_bar) + am * l(w + d.delta_bar))
}

/// Saturated two-peak `S_g(ω) = η_c²g²[κ(N+1)/(κ² + (ω−Δ_c)²) + κN/(κ² + (ω+Δ_c)²)]`.
pub fn s_g_saturated(p: &SystemParams, w: f64) -> f64 {
    let k = p.kappa;
    let l = |x: f64| k / (k * k + x * x);
    p.eta_c * p.eta_c * p.g * p.g * ((p.n_thermal + 1.0) * l(w - p.cavity_detuning) + p.n_thermal * l(w + p.cavity_detuning))
}

// Imperfections.

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum ScanMode {
    /// Trap frequency `ν + δν`.
    Anharmonic,
    /// Level-dependent shift: evaluates `W(n δν)`.
    StateDependent { level: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPoint {
    pub delta_nu: f64,
    pub result: CoolingResult,
}

/// Rates at the shifted trap frequency `ν + δν` with `Δ`, `Δ_c`, `Ω` kept
/// at the values chosen for the nominal `ν`.
pub fn imperfection_scan(
    p: &SystemParams,
    grid: &[f64],
    mode: ScanMode,
    mechanism: Mechanism,
) -> Result<Vec<ScanPoint>, CoolingError> {
    let model = SpectralModel::new(p)?;
    let regime = classify_regime(p);
    grid.iter()
        .map(|&dn| {
            let shift = match mode {
                ScanMode::Anharmonic => dn,
                ScanMode::StateDependent { level } => level as f64 * dn,
            };
            let (a_minus, a_plus) = rates_with_model(&model, p.nu + shift, mechanism)?;
            Ok(ScanPoint { delta_nu: dn, result: CoolingResult::from_rates(a_minus, a_plus, regime, Route::Spectral) })
        })
        .collect()
}

/// Weak-drive rolloff `W(δν) ≃ η²Ω²/((2N+1)γ_N) / (1 + (2δν/γ_N)²)`.
pub fn weak_drive_rolloff(p: &SystemParams, delta_nu: f64) -> f64 {
    let d = derive(p);
    casc_weak_sideband(p).w / (1.0 + (2.0 * delta_nu / d.gamma_n).powi(2))
}

/// Weak-drive occupation with cavity-gradient diffusion for `κ ≫ ν`,
/// implemented as printed:
/// `⟨n⟩₀,Ω + (η_c/η)²(γ_N²/4ν²)[(2N+1) + 8(N+1)ρ_ee⁰ν²/Ω²][1 + 4/(2N+1)²(δν/γ)²]`.
pub fn anharmonic_weak_drive_n_final(p: &SystemParams, delta_nu: f64) -> f64 {
    let d = derive(p);
    let n_omega = casc_weak_sideband(p).n_final.unwrap_or(f64::NAN);
    let ratio = (p.eta_c / p.eta).powi(2) * d.gamma_n.powi(2) / (4.0 * p.nu * p.nu)
        * (n2(p) + 8.0 * (p.n_thermal + 1.0) * d.rho_ee_0 * p.nu * p.nu / (p.rabi * p.rabi));
    n_omega + ratio * (1.0 + 4.0 / n2(p).powi(2) * (delta_nu / d.gamma).powi(2))
}

/// Maximize `W` over `sin φ ∈ (0, 1)` at fixed `Δ̄ = ν`, `Δ < 0`.
///
/// Returns `(sin φ₀, W(φ₀) / (γ(ην/γ_N)²))`.
pub fn strong_drive_optimum(p: &SystemParams, mechanism: Mechanism) -> Result<(f64, f64), CoolingError> {
    let d = derive(p);
    let norm = d.gamma * (p.eta * p.nu / d.gamma_n).powi(2);
    let f = |s: f64| rates_at(&with_strong_drive(p, s), p.nu, mechanism).map(|r| r.w / norm);
    let (s, v) = golden_max(f, 0.05, 0.99, 1e-6)?;
    Ok((s, v))
}

fn golden_max<E>(f: impl Fn(f64) -> Result<f64, E>, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64), E> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

// Table 1.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Table1Cell {
    CascSbWeak,
    CascDopplerWeak,
    CascSbStrong,
    CascDopplerStrong,
    NablaGSbWeak,
    NablaGDopplerWeak,
    NablaGSaturatedSb,
    NablaGSaturatedDoppler,
}

impl Table1Cell {
    pub const ALL: [Table1Cell; 8] = [
        Table1Cell::CascSbWeak,
        Table1Cell::CascDopplerWeak,
        Table1Cell::CascSbStrong,
        Table1Cell::CascDopplerStrong,
        Table1Cell::NablaGSbWeak,
        Table1Cell::NablaGDopplerWeak,
        Table1Cell::NablaGSaturatedSb,
        Table1Cell::NablaGSaturatedDoppler,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Table1Cell::CascSbWeak => "casc-sb-weak",
            Table1Cell::CascDopplerWeak => "casc-doppler-weak",
            Table1Cell::CascSbStrong => "casc-sb-strong",
            Table1Cell::CascDopplerStrong => "casc-doppler-strong",
            Table1Cell::NablaGSbWeak => "nabla-g-sb-weak",
            Table1Cell::NablaGDopplerWeak => "nabla-g-doppler-weak",
            Table1Cell::NablaGSaturatedSb => "nabla-g-saturated-sb",
            Table1Cell::NablaGSaturatedDoppler => "nabla-g-saturated-doppler",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    pub fn is_doppler(self) -> bool {
        matches!(
            self,
            Table1Cell::CascDopplerWeak
                | Table1Cell::CascDopplerStrong
                | Table1Cell::NablaGDopplerWeak
                | Table1Cell::NablaGSaturatedDoppler
        )
    }

    pub fn mechanism(self) -> Mechanism {
        match self {
            Table1Cell::CascSbWeak | Table1Cell::CascDopplerWeak | Table1Cell::CascSbStrong | Table1Cell::CascDopplerStrong => {
                Mechanism::Drive
            }
            _ => Mechanism::Cavity,
        }
    }

    /// Relative tolerance for spectral vs closed form.
    pub fn tolerance(self) -> f64 {
        if self.is_doppler() {
            0.2
        } else {
            0.1
        }
    }

    /// Desk-scale point deep in the cell's regime, in units of `ν`.
    pub fn designated_point(self, n_thermal: f64) -> SystemParams {
        let casc = SystemParams { nu: 1.0, n_thermal, eta: 0.05, eta_c: 0.0, ..SystemParams::default() };
        let grad = SystemParams { nu: 1.0, n_thermal, eta: 0.0, eta_c: 0.05, ..SystemParams::default() };
        match self {
            Table1Cell::CascSbWeak => with_casc_sideband_detuning(&SystemParams { g: 0.5, kappa: 5.0, rabi: 0.005, cavity_detuning: 0.0, ..casc }),
            Table1Cell::CascDopplerWeak => {
                let kappa = 5000.0;
                let base = SystemParams { g: (25.0 * kappa / 2.0f64).sqrt(), kappa, cavity_detuning: 0.0, ..casc };
                let gn = derive(&base).gamma_n;
                with_casc_doppler_detuning(&SystemParams { rabi: 0.01 * gn, ..base })
            }
            Table1Cell::CascSbStrong => with_strong_drive(&SystemParams { g: 0.5, kappa: 50.0, cavity_detuning: 0.0, ..casc }, 0.65),
            Table1Cell::CascDopplerStrong => {
                let kappa = 5000.0;
                let base = SystemParams { g: (25.0 * kappa / 2.0f64).sqrt(), kappa, cavity_detuning: 0.0, ..casc };
                let gn = derive(&base).gamma_n;
                SystemParams { rabi: 0.65 * gn / 2.0, detuning: -0.76 * gn / 2.0, ..base }
            }
            Table1Cell::NablaGSbWeak => with_nabla_g_sideband_detuning(&SystemParams { g: 0.005, kappa: 0.05, rabi: 0.25, detuning: -5.0, ..grad }),
            Table1Cell::NablaGDopplerWeak => with_nabla_g_doppler_detuning(&SystemParams { g: 0.5, kappa: 40.0, rabi: 10.0, detuning: -400.0, ..grad }),
            Table1Cell::NablaGSaturatedSb => with_saturated_sideband_detuning(&SystemParams { g: 0.001, kappa: 0.05, rabi: 0.005, ..grad }),
            Table1Cell::NablaGSaturatedDoppler => with_saturated_doppler_detuning(&SystemParams { g: 0.5, kappa: 40.0, rabi: 2.0, ..grad }),
        }
    }

    /// Closed form for the cell, `None` where the table has no entry.
    pub fn closed_form(self, p: &SystemParams) -> Result<Option<CoolingResult>, CoolingError> {
        Ok(Some(match self {
            Table1Cell::CascSbWeak => casc_weak_sideband(p),
            Table1Cell::CascDopplerWeak => casc_weak_doppler(p),
            Table1Cell::CascSbStrong => casc_strong_sideband(p)?.result,
            Table1Cell::CascDopplerStrong => return Ok(None),
            Table1Cell::NablaGSbWeak => nabla_g_weak_sideband(p),
            Table1Cell::NablaGDopplerWeak => nabla_g_weak_doppler(p),
            Table1Cell::NablaGSaturatedSb => nabla_g_saturated_sideband(p),
            Table1Cell::NablaGSaturatedDoppler => nabla_g_saturated_doppler(p),
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub cell: Table1Cell,
    pub params: SystemParams,
    pub spectral: CoolingResult,
    pub closed_form: Option<CoolingResult>,
    /// Relative deviation `spectral/closed − 1` of `W`.
    pub dev_w: Option<f64>,
    /// Relative deviation of `⟨n⟩₀`.
    pub dev_n: Option<f64>,
    pub tolerance: f64,
    /// `None` for cells without a closed form.
    pub pass: Option<bool>,
}

pub fn table1_row(cell: Table1Cell, n_thermal: f64) -> Result<Table1Row, CoolingError> {
    let p = cell.designated_point(n_thermal);
    let spectral = rates_at(&p, p.nu, cell.mechanism())?;
    let closed_form = cell.closed_form(&p)?;
    let dev = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) => Some(a / b - 1.0),
        _ => None,
    };
    let dev_w = closed_form.map(|c| spectral.w / c.w - 1.0);
    let dev_n = closed_form.and_then(|c| dev(spectral.n_final, c.n_final));
    let tolerance = cell.tolerance();
    let pass = closed_form.map(|_| {
        matches!(dev_w, Some(x) if x.abs() <= tolerance) && matches!(dev_n, Some(x) if x.abs() <= tolerance)
    });
    Ok(Table1Row { cell, params: p, spectral, closed_form, dev_w, dev_n, tolerance, pass })
}

pub fn table1(n_thermal: f64) -> Result<Vec<Table1Row>, CoolingError> {
    Table1Cell::ALL.into_iter().map(|c| table1_row(c, n_thermal)).collect()
}
