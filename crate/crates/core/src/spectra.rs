//! Force-fluctuation spectrum `S(ω) = S_Ω(ω) + S_g(ω) + S_I(ω)`.
//!
//! * `S_Ω` is the drive-gradient part, a two-time correlation of `σx`. The
//!   production route is the regression formula built on the Bloch matrix;
//!   [`SpectralModel::s_omega_resolvent`] evaluates the same integral from
//!   the internal Liouvillian.
//! * `S_g` is the cavity-gradient part, `2η_c²g² Re{(N+1)Tr(σ+Σ-(ω)ρ) +
//!   N Tr(σ-Σ+(ω)ρ)}`, with a six-resonance Lorentzian form as second route.
//! * `S_I` collects the interference terms. It is defined as the full
//!   `K`-correlator minus `S_Ω`, and the model evaluates it at any
//!   frequency; grid outputs only include it at `ω = ±ν`.
//!
//! One-sided Fourier transforms are resolvent solves. The steady-state
//! part of the initial operator is split off first, and the matrix
//! `−(L + iω) + |ρ₀⟩⟩⟨⟨1|` is inverted instead of `−(L + iω)`. On traceless
//! inputs both give the same answer for `ω ≠ 0`. The first stays regular at
//! `ω = 0`, where it returns the regular part.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bloch::{
    bloch_system, internal_liouvillian, liouvillian_steady_state, steady_density, BCoefficients, BlochError,
    BlochSystem, InternalState,
};
use crate::ops::{self, left, right, trace2, unvec2, vec2, Op2, Super2, C64, I, ONE};
use crate::params::{classify_regime, ParamError, Regime, SystemParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Bloch(#[from] BlochError),
    #[error("the regression formula is singular at ω = 0")]
    ZeroFrequency,
    #[error("resolvent is singular at ω = {0}: undamped mode")]
    UndampedMode(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Component {
    Omega,
    G,
    Interference,
    Total,
}

/// Precomputed state shared by all spectral evaluations at fixed parameters.
#[derive(Debug, Clone)]
pub struct SpectralModel {
    pub params: SystemParams,
    pub b: BCoefficients,
    pub bloch: BlochSystem,
    /// Steady state from the Bloch vector.
    pub steady: InternalState,
    pub liouvillian: Super2,
    /// Steady state from the null vector of the internal Liouvillian.
    pub steady_nullspace: InternalState,
    sm0: Op2,
    sp0: Op2,
}

/// `|ρ⟩⟩⟨⟨1|`.
fn steady_projector(rho: &Op2) -> Super2 {
    let r = vec2(rho);
    let id = vec2(&ops::identity());
    r * id.adjoint()
}

fn adjugate3(m: &Matrix3<C64>) -> Matrix3<C64> {
    let c = |r0: usize, r1: usize, c0: usize, c1: usize| m[(r0, c0)] * m[(r1, c1)] - m[(r0, c1)] * m[(r1, c0)];
    // Transposed cofactor matrix.
    Matrix3::new(
        c(1, 2, 1, 2),
        -c(0, 2, 1, 2),
        c(0, 1, 1, 2),
        -c(1, 2, 0, 2),
        c(0, 2, 0, 2),
        -c(0, 1, 0, 2),
        c(1, 2, 0, 1),
        -c(0, 2, 0, 1),
        c(0, 1, 0, 1),
    )
}

fn det3(m: &Matrix3<C64>) -> C64 {
    m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)]) - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
        + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
}

/// One Lorentzian term `weight · κ/(κ² + (ω − center)²)` of the
/// six-resonance `S_g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resonance {
    pub center: f64,
    pub hwhm: f64,
    pub weight: f64,
}

impl Resonance {
    pub fn eval(&self, w: f64) -> f64 {
        let k = self.hwhm;
        self.weight * k / (k * k + (w - self.center).powi(2))
    }

    pub fn height(&self) -> f64 {
        self.weight / self.hwhm
    }
}

impl SpectralModel {
    pub fn new(p: &SystemParams) -> Result<Self, SpectrumError> {
        p.validate()?;
        let b = BCoefficients::new(p);
        let bloch = bloch_system(p)?;
        let steady = steady_density(&bloch);
        let liouvillian = internal_liouvillian(p);
        let steady_nullspace = liouvillian_steady_state(&liouvillian)?;
        Ok(Self {
            params: *p,
            b,
            sm0: b.sigma_minus(0.0),
            sp0: b.sigma_plus(0.0),
            bloch,
            steady,
            liouvillian,
            steady_nullspace,
        })
    }

    fn drive_prefactor(&self) -> f64 {
        let p = &self.params;
        0.5 * p.eta * p.eta * p.rabi * p.rabi
    }

    /// `S_Ω(ω)` from the regression formula `Re{−h(iω)/(iω Det(iω + A))}`.
    pub fn s_omega_regression(&self, w: f64) -> Result<f64, SpectrumError> {
        if w == 0.0 {
            return Err(SpectrumError::ZeroFrequency);
        }
        let s = &self.bloch.sigma_ss;
        let iw = I * w;
        let m: Matrix3<C64> = self.bloch.a.map(C64::from) + Matrix3::identity() * iw;
        let det = det3(&m);
        if det.norm() == 0.0 {
            return Err(SpectrumError::UndampedMode(w));
        }
        // ⟨σ⃗σx⟩₀ = (1, −i⟨σz⟩₀, i⟨σy⟩₀)
        let corr = Vector3::new(ONE, -I * s[2], I * s[1]);
        let src = corr * iw + self.bloch.gamma_vec.map(C64::from) * C64::from(s[0]);
        let h = (adjugate3(&m) * src)[0];
        Ok(self.drive_prefactor() * (-h / (iw * det)).re)
    }

    /// One-sided transform `∫₀^∞ e^{L τ}(X) e^{iωτ} dτ` of the traceless part
    /// of `x`, using the steady state `rho`.
    fn resolve(&self, x: &Op2, rho: &Op2, w: f64) -> Result<Op2, SpectrumError> {
        let r = x - rho * trace2(x);
        let m = -(self.liouvillian + Super2::identity() * (I * w)) + steady_projector(rho);
        let y = m.lu().solve(&vec2(&r)).ok_or(SpectrumError::UndampedMode(w))?;
        Ok(unvec2(&y))
    }

    /// `S_Ω(ω)` from the internal Liouvillian and its null vector.
    pub fn s_omega_resolvent(&self, w: f64) -> Result<f64, SpectrumError> {
        let rho = self.steady_nullspace.rho;
        let sx = ops::sigma_x();
        let y = self.resolve(&(sx * rho), &rho, w)?;
        Ok(self.drive_prefactor() * trace2(&(sx * y)).re)
    }

    /// Production `S_Ω`: regression formula, resolvent at `ω = 0`.
    pub fn s_omega(&self, w: f64) -> f64 {
        match self.s_omega_regression(w) {
            Ok(v) => v,
            Err(_) => self.s_omega_resolvent(w).unwrap_or(f64::NAN),
        }
    }

    /// `S_g(ω)` from the `Σ±(ω)` operators and the full steady state.
    pub fn s_g(&self, w: f64) -> f64 {
        let p = &self.params;
        let rho = self.steady.rho;
        let n = p.n_thermal;
        let v = trace2(&(ops::sigma_plus() * self.b.sigma_minus(w) * rho)) * (n + 1.0)
            + trace2(&(ops::sigma_minus() * self.b.sigma_plus(w) * rho)) * n;
        2.0 * p.eta_c * p.eta_c * p.g * p.g * v.re
    }

    /// The six Lorentzian terms of `S_g` valid for `γ_N ≪ Δ̄` and weak
    /// saturation of the coherences.
    pub fn s_g_resonances(&self) -> Vec<Resonance> {
        let p = &self.params;
        let b = &self.b;
        let (om, d, db, dg, k) = (b.rabi, b.detuning, b.delta_bar, b.delta_g, b.kappa);
        let n = p.n_thermal;
        let pre = p.eta_c * p.eta_c * p.g * p.g;
        if db == 0.0 {
            // Undriven and on resonance: only the thermal pair survives.
            let rho_ee0 = n / (2.0 * n + 1.0);
            let rho_gg0 = (n + 1.0) / (2.0 * n + 1.0);
            return vec![
                Resonance { center: dg, hwhm: k, weight: 2.0 * pre * (n + 1.0) * rho_ee0 },
                Resonance { center: -dg, hwhm: k, weight: 2.0 * pre * n * rho_gg0 },
            ];
        }
        let n2 = 2.0 * n + 1.0;
        let rho_ee0 = n / n2;
        let rho_gg0 = (n + 1.0) / n2;
        let rho_bar = om * om / (2.0 * n2 * (2.0 * d * d + om * om));
        let c = pre / (2.0 * db * db);
        let mut out = vec![
            Resonance { center: dg, hwhm: k, weight: c * om * om * (n + 1.0) },
            Resonance { center: -dg, hwhm: k, weight: c * om * om * n },
        ];
        for s in [1.0, -1.0] {
            let dp = (d + s * db).powi(2);
            out.push(Resonance { center: dg + s * db, hwhm: k, weight: c * (dp * rho_ee0 + om * om * rho_bar) * (n + 1.0) });
            out.push(Resonance { center: -(dg + s * db), hwhm: k, weight: c * (dp * rho_gg0 - om * om * rho_bar) * n });
        }
        out
    }

    /// Six-resonance `S_g(ω)`.
    pub fn s_g_lorentzian(&self, w: f64) -> f64 {
        self.s_g_resonances().iter().map(|r| r.eval(w)).sum()
    }

    fn sigma_ops(&self, w: f64) -> (Op2, Op2) {
        (self.b.sigma_minus(w), self.b.sigma_plus(w))
    }

    /// Superoperator `K(ω)` acting on the internal state.
    pub fn k_superoperator(&self, w: f64) -> Super2 {
        let p = &self.params;
        let (smw, spw) = self.sigma_ops(w);
        let (sm0, sp0) = (self.sm0, self.sp0);
        let (sp, sm) = (ops::sigma_plus(), ops::sigma_minus());
        let gc = p.eta_c * p.g * p.g;
        let n = p.n_thermal;
        left(&ops::sigma_x()) * (-I * (0.5 * p.eta * p.rabi))
            + (left(&sm) * right(&sp0) + left(&smw) * right(&sp) - left(&(sp * smw)) - left(&(sp * sm0)))
                * C64::from(gc * (n + 1.0))
            + (left(&sp) * right(&sm0) + left(&spw) * right(&sm) - left(&(sm * spw)) - left(&(sm * sp0)))
                * C64::from(gc * n)
    }

    /// Operator `M` whose trace functional `Tr(M† ·)` closes the
    /// `K`-correlator.
    pub fn k_readout(&self) -> Op2 {
        let p = &self.params;
        let (sm0, sp0) = (self.sm0, self.sp0);
        let (sp, sm) = (ops::sigma_plus(), ops::sigma_minus());
        let n = p.n_thermal;
        ops::sigma_x() * (-I * (0.5 * p.eta * p.rabi))
            + ((sp0 * sm - sp * sm0) * C64::from(n + 1.0) + (sm0 * sp - sm * sp0) * C64::from(n))
                * C64::from(p.eta_c * p.g * p.g)
    }

    /// `2 Re ∫₀^∞ Tr{M† e^{L τ} K(ω)(ρ₀)} e^{iωτ} dτ`.
    pub fn k_correlator(&self, w: f64) -> Result<f64, SpectrumError> {
        let rho = self.steady_nullspace.rho;
        let x = unvec2(&(self.k_superoperator(w) * vec2(&rho)));
        let y = self.resolve(&x, &rho, w)?;
        Ok(2.0 * trace2(&(self.k_readout().adjoint() * y)).re)
    }

    /// `S_I(ω) = K-correlator(ω) − S_Ω(ω)`.
    pub fn s_interference(&self, w: f64) -> Result<f64, SpectrumError> {
        Ok(self.k_correlator(w)? - self.s_omega_resolvent(w)?)
    }

    /// `S_Ω + S_g + S_I` at `ω`.
    pub fn total(&self, w: f64) -> Result<f64, SpectrumError> {
        Ok(self.s_omega(w) + self.s_g(w) + self.s_interference(w)?)
    }

    pub fn component(&self, kind: Component, w: f64) -> Result<f64, SpectrumError> {
        match kind {
            Component::Omega => Ok(self.s_omega(w)),
            Component::G => Ok(self.s_g(w)),
            Component::Interference => self.s_interference(w),
            Component::Total => self.total(w),
        }
    }
}

/// `S_Ω(ω)` via the regression formula.
pub fn s_omega_regression(p: &SystemParams, w: f64) -> Result<f64, SpectrumError> {
    SpectralModel::new(p)?.s_omega_regression(w)
}

/// `S_Ω(ω)` via the internal-Liouvillian resolvent.
pub fn s_omega_resolvent(p: &SystemParams, w: f64) -> Result<f64, SpectrumError> {
    SpectralModel::new(p)?.s_omega_resolvent(w)
}

pub fn s_g(p: &SystemParams, w: f64) -> Result<f64, SpectrumError> {
    Ok(SpectralModel::new(p)?.s_g(w))
}

/// `S_I(±ν)` for `sign = ±1`.
pub fn s_interference(p: &SystemParams, sign: f64) -> Result<f64, SpectrumError> {
    SpectralModel::new(p)?.s_interference(sign.signum() * p.nu)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumPoint {
    pub omega: f64,
    pub s_omega: f64,
    pub s_g: f64,
    /// Present only at `ω = ±ν`.
    pub s_interference: Option<f64>,
    /// `S_Ω + S_g`, plus `S_I` where it is present.
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SpectrumFlags {
    /// Some total fell below `−10⁻¹⁰ max|S|`.
    pub negative_total: bool,
    /// The grid contains `ω = 0`, where only the regular part is reported.
    pub zero_frequency: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub params: SystemParams,
    pub regime: Regime,
    pub points: Vec<SpectrumPoint>,
    pub flags: SpectrumFlags,
}

impl SpectralModel {
    pub fn point(&self, w: f64) -> Result<SpectrumPoint, SpectrumError> {
        let nu = self.params.nu;
        let s_omega = self.s_omega(w);
        let s_g = self.s_g(w);
        let at_sideband = (w.abs() - nu).abs() <= 1e-12 * nu;
        let s_interference = if at_sideband { Some(self.s_interference(w)?) } else { None };
        Ok(SpectrumPoint { omega: w, s_omega, s_g, s_interference, total: s_omega + s_g + s_interference.unwrap_or(0.0) })
    }
}

/// Assemble a [`Spectrum`] from already evaluated points.
pub fn collect_spectrum(model: &SpectralModel, points: Vec<SpectrumPoint>) -> Spectrum {
    let max = points.iter().map(|q| q.total.abs()).fold(0.0, f64::max);
    let flags = SpectrumFlags {
        negative_total: points.iter().any(|q| q.total < -1e-10 * max),
        zero_frequency: points.iter().any(|q| q.omega == 0.0),
    };
    Spectrum { params: model.params, regime: classify_regime(&model.params), points, flags }
}

/// Evaluate all components on a frequency grid.
pub fn full_spectrum(p: &SystemParams, grid: &[f64]) -> Result<Spectrum, SpectrumError> {
    let model = SpectralModel::new(p)?;
    let points = grid.iter().map(|&w| model.point(w)).collect::<Result<Vec<_>, _>>()?;
    Ok(collect_spectrum(&model, points))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn generic() -> SystemParams {
        SystemParams {
            g: 0.3,
            kappa: 2.0,
            rabi: 0.8,
            detuning: -0.6,
            cavity_detuning: 1.2,
            n_thermal: 0.4,
            eta: 0.05,
            eta_c: 0.04,
            ..Default::default()
        }
    }

    #[test]
    fn regression_matches_resolvent() {
        let m = SpectralModel::new(&generic()).unwrap();
        for w in [-3.0, -1.0, -0.2, 0.4, 1.0, 2.5] {
            let a = m.s_omega_regression(w).unwrap();
            let b = m.s_omega_resolvent(w).unwrap();
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-300), "{w}: {a} vs {b}");
        }
    }

    #[test]
    fn no_drive_no_drive_spectrum() {
        let p = SystemParams { rabi: 0.0, ..generic() };
        let m = SpectralModel::new(&p).unwrap();
        assert_eq!(m.s_omega(0.7), 0.0);
    }

    #[test]
    fn interference_vanishes_without_cavity_gradient() {
        let p = SystemParams { eta_c: 0.0, ..generic() };
        let m = SpectralModel::new(&p).unwrap();
        for w in [-1.0, 1.0] {
            let si = m.s_interference(w).unwrap();
            assert!(si.abs() <= 1e-14 * m.s_omega(w).abs(), "{si}");
        }
    }

    #[test]
    fn zero_frequency_is_regular() {
        let m = SpectralModel::new(&generic()).unwrap();
        assert_eq!(m.s_omega_regression(0.0), Err(SpectrumError::ZeroFrequency));
        let r0 = m.s_omega_resolvent(0.0).unwrap();
        let r1 = m.s_omega_resolvent(1e-7).unwrap();
        assert!((r0 - r1).abs() < 1e-6 * r0.abs());
    }

    #[test]
    fn sidebands_carry_interference() {
        let s = full_spectrum(&generic(), &[-1.0, 0.0, 0.5, 1.0]).unwrap();
        assert!(s.points[0].s_interference.is_some());
        assert!(s.points[1].s_interference.is_none());
        assert!(s.points[3].s_interference.is_some());
        assert!(s.flags.zero_frequency);
    }
}
