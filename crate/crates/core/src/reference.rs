//! Slow reference evaluations used to cross-check the closed forms.
//!
//! None of these are on a production path. They integrate the defining
//! time-domain expressions directly.

use crate::bloch::{internal_hamiltonian, internal_liouvillian, liouvillian_steady_state, two_level_propagator, BlochError};
use crate::ops::{self, trace2, unvec2, vec2, Op2, Super2, C64, I, ZERO};
use crate::params::{bare_detuning, SystemParams};
use crate::quad;

/// Window constant: time-domain transforms stop at `τ = WINDOW / γ̃_N`.
pub const WINDOW: f64 = 50.0;

/// `Σ-(ω) = ∫₀^∞ e^{i(ω − Δ_g)τ} e^{−κτ} σ-(−τ) dτ` with
/// `σ-(−τ) = e^{−iH_I τ} σ- e^{iH_I τ}`, integrated by adaptive quadrature.
pub fn sigma_minus_quadrature(p: &SystemParams, w: f64, tol: f64) -> Op2 {
    let h = internal_hamiltonian(p);
    let delta_g = p.cavity_detuning - bare_detuning(p);
    let sm = ops::sigma_minus();
    let t_max = 80.0 / p.kappa;
    let v = quad::integrate(
        |t| {
            let u = two_level_propagator(&h, t);
            let m = u * sm * u.adjoint() * (C64::new(-p.kappa, w - delta_g) * t).exp();
            [m[(0, 0)], m[(1, 0)], m[(0, 1)], m[(1, 1)]]
        },
        0.0,
        t_max,
        tol,
    );
    Op2::from_column_slice(&v)
}

/// `S_Ω(ω)` from explicit propagation `e^{L_I τ}` of `σxρ₀ − ⟨σx⟩₀ρ₀` and a
/// composite Simpson rule for the one-sided Fourier integral, truncated at
/// `WINDOW / γ̃_N`.
pub fn s_omega_time_domain(p: &SystemParams, w: f64) -> Result<f64, BlochError> {
    let l = internal_liouvillian(p);
    let rho = liouvillian_steady_state(&l)?.rho;
    let sx = ops::sigma_x();
    let x = sx * rho;
    let r = x - rho * trace2(&x);

    let rates = crate::bloch::bloch_rates(p);
    let t_max = WINDOW / rates.tilde_gamma_n;
    let fastest = w.abs() + bare_detuning(p).hypot(p.rabi) + rates.tilde_gamma_n;
    let mut steps = (t_max * fastest * 12.0).ceil() as usize;
    steps += steps % 2;
    let h = t_max / steps as f64;

    let prop: Super2 = (l * C64::from(h)).exp();
    let phase = (I * (w * h)).exp();
    let mut y = vec2(&r);
    let mut ph = C64::new(1.0, 0.0);
    let mut acc = ZERO;
    for k in 0..=steps {
        let f = trace2(&(sx * unvec2(&y))) * ph;
        let wgt = if k == 0 || k == steps {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += f * wgt;
        y = prop * y;
        ph *= phase;
    }
    let integral = acc * (h / 3.0);
    Ok(0.5 * p.eta * p.eta * p.rabi * p.rabi * integral.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::BCoefficients;

    #[test]
    fn quadrature_matches_closed_form() {
        let p = SystemParams {
            g: 0.01,
            kappa: 0.3,
            rabi: 2.0,
            detuning: 6.0,
            cavity_detuning: 7.0,
            n_thermal: 0.5,
            ..Default::default()
        };
        let b = BCoefficients::new(&p);
        for w in [-1.0, 0.0, 1.0, 7.3] {
            let q = sigma_minus_quadrature(&p, w, 1e-12);
            let c = b.sigma_minus(w);
            assert!((q - c).norm() < 1e-8 * c.norm().max(1.0), "ω = {w}: {q} vs {c}");
        }
    }
}
