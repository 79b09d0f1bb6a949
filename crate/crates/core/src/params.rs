//! Physical parameters, derived quantities and regime classification.
//!
//! Frequencies are angular frequencies. The library never assumes `ν = 1`:
//! rates are evaluated at `±ν` from the stored trap frequency. Presets and
//! the closed regime formulas are written in reduced units with `ν = 1`.
//!
//! # Detuning convention
//!
//! The stored `Delta` is the *Stark-shifted* drive detuning, i.e. the bare
//! detuning `ω_m − ω_eg` plus the cavity-induced shift `δ`. Closed-form
//! regime formulas use it as is. Routes that need the bare detuning (the
//! effective two-level Hamiltonian, the `B_i` coefficients and the Lindblad
//! oracle) use [`bare_detuning`] `= Δ − δ`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Factor used for "much smaller than" comparisons in regime tags.
pub const MUCH_LESS: f64 = 0.3;

/// Lamb-Dicke parameters above this value raise the validity flag.
pub const LAMB_DICKE_LIMIT: f64 = 0.3;

const HBAR: f64 = 1.054_571_817e-34;
const K_B: f64 = 1.380_649e-23;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("parameter `{name}` must be finite, got {value}")]
    NotFinite { name: &'static str, value: f64 },
    #[error("parameter `{name}` must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("trap frequency `nu` must be positive, got {0}")]
    NonPositiveNu(f64),
    #[error("Lamb-Dicke parameter `{name}` must lie in [0, 1), got {value}")]
    LambDicke { name: &'static str, value: f64 },
}

/// All physical inputs of the model.
///
/// Serialized keys are the conventional symbols: `g`, `kappa`, `Omega`,
/// `Delta`, `Delta_c`, `nu`, `N`, `eta`, `eta_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    /// Vacuum Rabi frequency.
    pub g: f64,
    /// Cavity field half-width; the photon loss rate is `2κ`.
    pub kappa: f64,
    /// Classical drive Rabi frequency `Ω`.
    #[serde(rename = "Omega")]
    pub rabi: f64,
    /// Stark-shifted drive detuning `Δ = ω_m − ω_eg (+ δ)`.
    #[serde(rename = "Delta")]
    pub detuning: f64,
    /// Cavity detuning `Δ_c = ω_c − ω_eg`.
    #[serde(rename = "Delta_c")]
    pub cavity_detuning: f64,
    /// Trap frequency.
    pub nu: f64,
    /// Thermal photon number of the cavity environment.
    #[serde(rename = "N")]
    pub n_thermal: f64,
    /// Drive Lamb-Dicke parameter.
    pub eta: f64,
    /// Cavity Lamb-Dicke parameter.
    pub eta_c: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            g: 0.5,
            kappa: 5.0,
            rabi: 0.1,
            detuning: -1.0,
            cavity_detuning: 0.0,
            nu: 1.0,
            n_thermal: 0.0,
            eta: 0.05,
            eta_c: 0.0,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        let fields = [
            ("g", self.g),
            ("kappa", self.kappa),
            ("Omega", self.rabi),
            ("Delta", self.detuning),
            ("Delta_c", self.cavity_detuning),
            ("nu", self.nu),
            ("N", self.n_thermal),
            ("eta", self.eta),
            ("eta_c", self.eta_c),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(ParamError::NotFinite { name, value });
            }
        }
        for (name, value) in [("g", self.g), ("kappa", self.kappa), ("Omega", self.rabi), ("N", self.n_thermal)] {
            if value < 0.0 {
                return Err(ParamError::Negative { name, value });
            }
        }
        if self.nu <= 0.0 {
            return Err(ParamError::NonPositiveNu(self.nu));
        }
        for (name, value) in [("eta", self.eta), ("eta_c", self.eta_c)] {
            if !(0.0..1.0).contains(&value) {
                return Err(ParamError::LambDicke { name, value });
            }
        }
        Ok(())
    }

    /// Multiply every frequency-valued field by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            g: self.g * s,
            kappa: self.kappa * s,
            rabi: self.rabi * s,
            detuning: self.detuning * s,
            cavity_detuning: self.cavity_detuning * s,
            nu: self.nu * s,
            ..*self
        }
    }

    /// Same physics expressed in units of the trap frequency.
    pub fn to_reduced(&self) -> Self {
        self.scaled(1.0 / self.nu)
    }

    pub fn derive(&self) -> DerivedParams {
        derive(self)
    }
}

/// Quantities that follow from [`SystemParams`] by direct arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    /// Cavity-enhanced decay `γ = 2g²κ/(κ² + Δ_c²)`.
    pub gamma: f64,
    /// `(2N + 1)γ`.
    pub gamma_n: f64,
    /// Cavity Stark shift `δ = (2N + 1)g²Δ_c/(κ² + Δ_c²)`.
    pub delta_stark: f64,
    /// Generalized Rabi frequency `√(Δ² + Ω²)`.
    pub delta_bar: f64,
    /// `Δ_c − Δ`.
    pub delta_g: f64,
    /// Dressing angle in `[0, π/2]` with `sin φ = Ω/Δ̄`.
    pub phi: f64,
    /// Thermal excited population `N/(2N + 1)`.
    pub rho_ee_0: f64,
    /// Drive-induced population `Ω²/[2(2N + 1)(2Δ² + Ω²)]`.
    pub rho_ee_drive: f64,
}

impl DerivedParams {
    pub fn sin_phi(&self) -> f64 {
        self.phi.sin()
    }

    pub fn cos_phi(&self) -> f64 {
        self.phi.cos()
    }
}

pub fn derive(p: &SystemParams) -> DerivedParams {
    let n2 = 2.0 * p.n_thermal + 1.0;
    let lorentz = p.kappa * p.kappa + p.cavity_detuning * p.cavity_detuning;
    let (gamma, delta_stark) = if lorentz > 0.0 {
        (
            2.0 * p.g * p.g * p.kappa / lorentz,
            n2 * p.g * p.g * p.cavity_detuning / lorentz,
        )
    } else {
        (0.0, 0.0)
    };
    let delta_bar = p.detuning.hypot(p.rabi);
    let phi = if delta_bar > 0.0 {
        (p.rabi / delta_bar).clamp(0.0, 1.0).asin()
    } else {
        0.0
    };
    let drive_den = 2.0 * n2 * (2.0 * p.detuning * p.detuning + p.rabi * p.rabi);
    DerivedParams {
        gamma,
        gamma_n: n2 * gamma,
        delta_stark,
        delta_bar,
        delta_g: p.cavity_detuning - p.detuning,
        phi,
        rho_ee_0: p.n_thermal / n2,
        rho_ee_drive: if drive_den > 0.0 { p.rabi * p.rabi / drive_den } else { 0.0 },
    }
}

/// Bare drive detuning `Δ − δ` entering the microscopic Hamiltonian.
pub fn bare_detuning(p: &SystemParams) -> f64 {
    p.detuning - derive(p).delta_stark
}

/// Bose-Einstein occupation of a mode at angular frequency `omega_c` (rad/s)
/// in contact with a bath at temperature `t` (K).
pub fn thermal_occupation(omega_c: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    1.0 / (HBAR * omega_c / (K_B * t)).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriveRegime {
    /// `Ω ≪ γ_N`.
    Weak,
    /// `Ω ≪ |Δ|` but not `Ω ≪ γ_N`: virtual excitation.
    FarDetuned,
    /// `Ω ∼ |Δ|`.
    Strong,
    /// `Ω ≫ γ_N, |Δ|`.
    Saturated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Resolution {
    SidebandResolved,
    Doppler,
}

/// Each flag is `true` when the corresponding approximation holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityFlags {
    /// `g√(N + 1) ≪ κ`.
    pub bad_cavity: bool,
    /// `η, η_c ≤ 0.3`.
    pub lamb_dicke: bool,
    /// `ηΩ ≪ γ_N` and `η_c g²/κ ≪ γ_N`.
    pub elimination: bool,
}

impl ValidityFlags {
    pub fn all(&self) -> bool {
        self.bad_cavity && self.lamb_dicke && self.elimination
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regime {
    pub drive: DriveRegime,
    /// Set by `γ_N/ν`.
    pub casc: Resolution,
    /// Set by `κ/ν`.
    pub nabla_g: Resolution,
    pub flags: ValidityFlags,
}

pub fn classify_regime(p: &SystemParams) -> Regime {
    let d = derive(p);
    let drive = if p.rabi < MUCH_LESS * d.gamma_n {
        DriveRegime::Weak
    } else if p.rabi < MUCH_LESS * p.detuning.abs() {
        DriveRegime::FarDetuned
    } else if MUCH_LESS * p.rabi > p.detuning.abs() && MUCH_LESS * p.rabi > d.gamma_n {
        DriveRegime::Saturated
    } else {
        DriveRegime::Strong
    };
    let resolution = |width: f64| {
        if width < p.nu {
            Resolution::SidebandResolved
        } else {
            Resolution::Doppler
        }
    };
    let cavity_kick = if p.kappa > 0.0 { p.eta_c * p.g * p.g / p.kappa } else { f64::INFINITY };
    let flags = ValidityFlags {
        bad_cavity: p.g * (p.n_thermal + 1.0).sqrt() < MUCH_LESS * p.kappa,
        lamb_dicke: p.eta <= LAMB_DICKE_LIMIT && p.eta_c <= LAMB_DICKE_LIMIT,
        elimination: p.eta * p.rabi < MUCH_LESS * d.gamma_n && cavity_kick < MUCH_LESS * d.gamma_n,
    };
    Regime {
        drive,
        casc: resolution(d.gamma_n),
        nabla_g: resolution(p.kappa),
        flags,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn cavity_enhanced_decay() {
        let p = SystemParams { g: 0.5, kappa: 5.0, cavity_detuning: 0.0, ..Default::default() };
        assert!(close(derive(&p).gamma, 0.1, 1e-15));
    }

    #[test]
    fn uncoupled_cavity_has_no_decay_or_shift() {
        let p = SystemParams { g: 0.0, kappa: 3.0, cavity_detuning: 2.0, ..Default::default() };
        let d = derive(&p);
        assert_eq!(d.gamma, 0.0);
        assert_eq!(d.delta_stark, 0.0);
    }

    #[test]
    fn undriven_angles() {
        let p = SystemParams { rabi: 0.0, detuning: -1.0, ..Default::default() };
        let d = derive(&p);
        assert_eq!(d.delta_bar, 1.0);
        assert_eq!(d.sin_phi(), 0.0);
        assert_eq!(d.rho_ee_drive, 0.0);
    }

    #[test]
    fn bose_einstein() {
        assert_eq!(thermal_occupation(1.0, 0.0), 0.0);
        let t = 3.0;
        let omega = K_B * t * std::f64::consts::LN_2 / HBAR;
        assert!(close(thermal_occupation(omega, t), 1.0, 1e-12));
        let omega_c = 2.0 * std::f64::consts::PI * 10e9;
        for t in [0.02, 0.1, 0.5, 1.0, 4.0] {
            let n = thermal_occupation(omega_c, t);
            assert!((0.0..=10.0).contains(&n), "N = {n} at T = {t}");
        }
    }

    #[test]
    fn regime_examples() {
        let p = SystemParams { g: 0.2, kappa: 4.0, n_thermal: 0.0, ..Default::default() };
        assert!(classify_regime(&p).flags.bad_cavity);

        // γ_N = 0.01 with Ω = 0.1 is not weak driving.
        let g = (0.01f64 * 5.0 / 2.0).sqrt();
        let p = SystemParams { g, kappa: 5.0, rabi: 0.1, cavity_detuning: 0.0, ..Default::default() };
        let r = classify_regime(&p);
        assert!(close(derive(&p).gamma_n, 0.01, 1e-12));
        assert_ne!(r.drive, DriveRegime::Weak);
        assert_eq!(r.casc, Resolution::SidebandResolved);
        assert_eq!(r.nabla_g, Resolution::Doppler);
    }

    #[test]
    fn validation() {
        assert!(SystemParams::default().validate().is_ok());
        let bad = SystemParams { nu: 0.0, ..Default::default() };
        assert_eq!(bad.validate(), Err(ParamError::NonPositiveNu(0.0)));
        let bad = SystemParams { eta: 1.0, ..Default::default() };
        assert!(matches!(bad.validate(), Err(ParamError::LambDicke { .. })));
        let bad = SystemParams { n_thermal: -0.1, ..Default::default() };
        assert!(matches!(bad.validate(), Err(ParamError::Negative { name: "N", .. })));
    }

    #[test]
    fn serde_keys_match_symbols() {
        let t = toml::to_string(&SystemParams::default()).unwrap();
        let keys: Vec<&str> = t.lines().map(|l| l.split(" = ").next().unwrap()).collect();
        assert_eq!(keys, ["g", "kappa", "Omega", "Delta", "Delta_c", "nu", "N", "eta", "eta_c"]);
    }
}
