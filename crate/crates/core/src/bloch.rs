//! Effective two-level dynamics after the cavity has been eliminated.
//!
//! The cavity enters through the generalized jump operators
//! `Σ-(ω) = B₁(ω)σ- + B₂(ω)σ+ + B₃(ω)σz` and `Σ+(ω) = Σ-(−ω)†`, with the
//! `B_i` sums of simple poles at `ω = Δ_g` and `ω = Δ_g ± Δ̄`. The internal
//! Liouvillian built from them is equivalent to a Bloch equation
//! `d⟨σ⃗⟩/dt = A⟨σ⃗⟩ − Γ⃗` that carries non-standard terms
//! (`γ_x`, `δ_x`, `Ω_x`, `Γ_x`, ...) for `Ω ∼ κ`.
//!
//! All quantities here use the bare detuning, see [`crate::params`].

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;
use thiserror::Error;

use crate::ops::{self, commutator, left, right, trace2, unvec2, vec2, Op2, Super2, C64, E, G, I, ONE, ZERO};
use crate::params::{bare_detuning, SystemParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BlochError {
    #[error("no unique steady state: the Bloch matrix is singular")]
    NoUniqueSteadyState,
    #[error("degenerate steady state: the internal Liouvillian has a {0}-dimensional null space")]
    DegenerateSteadyState(usize),
}

/// Evaluator for `B₁(ω)`, `B₂(ω)`, `B₃(ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BCoefficients {
    pub kappa: f64,
    pub rabi: f64,
    /// Bare detuning.
    pub detuning: f64,
    /// `Δ_c − Δ` with the bare detuning.
    pub delta_g: f64,
    /// `√(Δ² + Ω²)` with the bare detuning.
    pub delta_bar: f64,
}

impl BCoefficients {
    pub fn new(p: &SystemParams) -> Self {
        let detuning = bare_detuning(p);
        Self {
            kappa: p.kappa,
            rabi: p.rabi,
            detuning,
            delta_g: p.cavity_detuning - detuning,
            delta_bar: detuning.hypot(p.rabi),
        }
    }

    fn pole(&self, w: f64, center: f64) -> C64 {
        ONE / C64::new(self.kappa, -(w - center))
    }

    /// `[B₁(ω), B₂(ω), B₃(ω)]`.
    pub fn eval(&self, w: f64) -> [C64; 3] {
        let (om, d, db) = (self.rabi, self.detuning, self.delta_bar);
        let p0 = self.pole(w, self.delta_g);
        if db == 0.0 {
            return [p0, ZERO, ZERO];
        }
        let mut b = [p0 * (2.0 * om * om), p0 * (2.0 * om * om), p0 * (-2.0 * om * d)];
        for s in [1.0, -1.0] {
            let ps = self.pole(w, self.delta_g + s * db);
            let dp = d + s * db;
            b[0] += ps * (dp * dp);
            b[1] -= ps * (om * om);
            b[2] += ps * (om * dp);
        }
        let norm = 1.0 / (4.0 * db * db);
        b.map(|x| x * norm)
    }

    pub fn b1(&self, w: f64) -> C64 {
        self.eval(w)[0]
    }

    pub fn b2(&self, w: f64) -> C64 {
        self.eval(w)[1]
    }

    pub fn b3(&self, w: f64) -> C64 {
        self.eval(w)[2]
    }

    /// `Σ-(ω)`.
    pub fn sigma_minus(&self, w: f64) -> Op2 {
        let [b1, b2, b3] = self.eval(w);
        ops::sigma_minus() * b1 + ops::sigma_plus() * b2 + ops::sigma_z() * b3
    }

    /// `Σ+(ω) = Σ-(−ω)†`.
    pub fn sigma_plus(&self, w: f64) -> Op2 {
        self.sigma_minus(-w).adjoint()
    }
}

pub fn b_coefficients(p: &SystemParams) -> BCoefficients {
    BCoefficients::new(p)
}

/// `(Σ-(ω), Σ+(ω))`.
pub fn sigma_operators(p: &SystemParams, w: f64) -> (Op2, Op2) {
    let b = BCoefficients::new(p);
    (b.sigma_minus(w), b.sigma_plus(w))
}

/// `H_I = −(Δ/2)σz + (Ω/2)σx` with the bare detuning.
pub fn internal_hamiltonian(p: &SystemParams) -> Op2 {
    ops::sigma_z() * C64::from(-0.5 * bare_detuning(p)) + ops::sigma_x() * C64::from(0.5 * p.rabi)
}

/// Superoperator of `ρ ↦ XρY − YXρ + H.c.`
fn generalized_dissipator(x: &Op2, y: &Op2) -> Super2 {
    let (xd, yd) = (x.adjoint(), y.adjoint());
    left(x) * right(y) - left(&(y * x)) + left(&yd) * right(&xd) - right(&(xd * yd))
}

/// Vectorized internal Liouvillian `L_I` (column stacking).
pub fn internal_liouvillian(p: &SystemParams) -> Super2 {
    let b = BCoefficients::new(p);
    let sm0 = b.sigma_minus(0.0);
    let sp0 = b.sigma_plus(0.0);
    let g2 = p.g * p.g;
    commutator(&internal_hamiltonian(p))
        + generalized_dissipator(&sm0, &ops::sigma_plus()) * C64::from(g2 * (p.n_thermal + 1.0))
        + generalized_dissipator(&sp0, &ops::sigma_minus()) * C64::from(g2 * p.n_thermal)
}

/// Read off `A` and `Γ⃗` of `d⟨σ⃗⟩/dt = A⟨σ⃗⟩ − Γ⃗` from a trace-preserving
/// two-level Liouvillian by acting on the Pauli basis.
pub fn project_to_bloch(l: &Super2) -> (Matrix3<f64>, Vector3<f64>) {
    let paulis = ops::paulis();
    let half = C64::from(0.5);
    let mut a = Matrix3::zeros();
    let mut gamma = Vector3::zeros();
    let act = |x: &Op2| unvec2(&(l * vec2(x)));
    let from_identity = act(&(ops::identity() * half));
    for (i, pi) in paulis.iter().enumerate() {
        for (j, pj) in paulis.iter().enumerate() {
            a[(i, j)] = trace2(&(pi * act(&(pj * half)))).re;
        }
        gamma[i] = -trace2(&(pi * from_identity)).re;
    }
    (a, gamma)
}

/// Rates and shifts of the non-standard Bloch equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochRates {
    pub tilde_gamma: f64,
    pub tilde_gamma_n: f64,
    pub tilde_delta: f64,
    pub gamma_x: f64,
    pub gamma_y: f64,
    pub delta_x: f64,
    pub delta_y: f64,
    pub omega_x: f64,
    pub omega_y: f64,
    pub big_gamma_x: f64,
    pub big_gamma_y: f64,
}

pub fn bloch_rates(p: &SystemParams) -> BlochRates {
    let [b1, b2, b3] = BCoefficients::new(p).eval(0.0);
    let g2 = p.g * p.g;
    let n2 = 2.0 * p.n_thermal + 1.0;
    let tilde_gamma = 2.0 * g2 * b1.re;
    BlochRates {
        tilde_gamma,
        tilde_gamma_n: n2 * tilde_gamma,
        tilde_delta: -g2 * n2 * b1.im,
        gamma_x: 2.0 * g2 * n2 * b2.re,
        gamma_y: 2.0 * g2 * n2 * b2.re,
        delta_x: g2 * n2 * b2.im,
        delta_y: g2 * n2 * b2.im,
        omega_x: 2.0 * g2 * n2 * b3.re,
        omega_y: 2.0 * g2 * n2 * b3.im,
        big_gamma_x: -2.0 * g2 * b3.re,
        big_gamma_y: 2.0 * g2 * b3.im,
    }
}

/// Drift matrix and drive vector of the effective Bloch equation.
///
/// The `(z, y)` entry is `Ω − Ω_y`. This is the sign obtained by projecting
/// [`internal_liouvillian`] onto the Pauli basis; see the `bloch` chapter of
/// the guide.
pub fn bloch_matrix(p: &SystemParams, r: &BlochRates) -> (Matrix3<f64>, Vector3<f64>) {
    let d = bare_detuning(p) + r.tilde_delta;
    let om = p.rabi;
    let a = Matrix3::new(
        -(r.tilde_gamma_n - r.gamma_x) / 2.0,
        d - r.delta_x,
        0.0,
        -(d + r.delta_y),
        -(r.tilde_gamma_n + r.gamma_y) / 2.0,
        -om,
        r.omega_x,
        om - r.omega_y,
        -r.tilde_gamma_n,
    );
    (a, Vector3::new(r.big_gamma_x, r.big_gamma_y, r.tilde_gamma))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlochSystem {
    pub a: Matrix3<f64>,
    pub gamma_vec: Vector3<f64>,
    pub rates: BlochRates,
    /// `(⟨σx⟩₀, ⟨σy⟩₀, ⟨σz⟩₀)`.
    pub sigma_ss: Vector3<f64>,
    /// Eigenvalues of `A`.
    pub eigenvalues: [C64; 3],
    /// `false` when some eigenvalue of `A` has positive real part.
    pub dissipative: bool,
}

pub fn bloch_system(p: &SystemParams) -> Result<BlochSystem, BlochError> {
    let rates = bloch_rates(p);
    let (a, gamma_vec) = bloch_matrix(p, &rates);
    let scale = a.abs().max();
    if scale == 0.0 || a.determinant().abs() <= 1e-14 * scale.powi(3) {
        return Err(BlochError::NoUniqueSteadyState);
    }
    let sigma_ss = a.lu().solve(&gamma_vec).ok_or(BlochError::NoUniqueSteadyState)?;
    let ev = a.complex_eigenvalues();
    let eigenvalues = [ev[0], ev[1], ev[2]];
    let dissipative = eigenvalues.iter().all(|e| e.re <= 1e-12 * scale);
    Ok(BlochSystem { a, gamma_vec, rates, sigma_ss, eigenvalues, dissipative })
}

/// Density matrix of the effective two-level system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InternalState {
    pub rho: Op2,
}

impl InternalState {
    pub fn from_bloch_vector(v: &Vector3<f64>) -> Self {
        let [x, y, z] = ops::paulis();
        let rho = (ops::identity() + x * C64::from(v[0]) + y * C64::from(v[1]) + z * C64::from(v[2])) * C64::from(0.5);
        Self { rho }
    }

    pub fn bloch_vector(&self) -> Vector3<f64> {
        let [x, y, z] = ops::paulis();
        Vector3::new(
            trace2(&(x * self.rho)).re,
            trace2(&(y * self.rho)).re,
            trace2(&(z * self.rho)).re,
        )
    }

    pub fn rho_ee(&self) -> f64 {
        self.rho[(E, E)].re
    }

    pub fn rho_gg(&self) -> f64 {
        self.rho[(G, G)].re
    }

    /// `⟨e|ρ|g⟩`.
    pub fn rho_eg(&self) -> C64 {
        self.rho[(E, G)]
    }

    /// `⟨g|ρ|e⟩`.
    pub fn rho_ge(&self) -> C64 {
        self.rho[(G, E)]
    }

    pub fn trace(&self) -> C64 {
        trace2(&self.rho)
    }

    pub fn hermiticity_error(&self) -> f64 {
        (self.rho - self.rho.adjoint()).norm()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (self.rho + self.rho.adjoint()) * C64::from(0.5);
        h.symmetric_eigenvalues().min()
    }
}

pub fn steady_density(b: &BlochSystem) -> InternalState {
    InternalState::from_bloch_vector(&b.sigma_ss)
}

/// Steady state as the normalized null vector of a two-level Liouvillian.
pub fn liouvillian_steady_state(l: &Super2) -> Result<InternalState, BlochError> {
    let sv = l.singular_values();
    let scale = sv.max().max(f64::MIN_POSITIVE);
    let null_dim = sv.iter().filter(|s| **s <= 1e-12 * scale).count();
    if null_dim > 1 {
        return Err(BlochError::DegenerateSteadyState(null_dim));
    }
    // Replace one equation by the trace condition.
    let mut m = *l;
    let mut rhs = nalgebra::Vector4::zeros();
    let id = vec2(&ops::identity());
    for j in 0..4 {
        m[(0, j)] = id[j].conj();
    }
    rhs[0] = ONE;
    let v = m.lu().solve(&rhs).ok_or(BlochError::DegenerateSteadyState(2))?;
    Ok(InternalState { rho: unvec2(&v) })
}

/// Steady state of the internal Liouvillian.
pub fn internal_steady_state(p: &SystemParams) -> Result<InternalState, BlochError> {
    liouvillian_steady_state(&internal_liouvillian(p))
}

/// `e^{−iHτ}` for `H = (Δ̄/2) n̂·σ⃗`, written without the `B_i`.
pub(crate) fn two_level_propagator(h: &Op2, tau: f64) -> Op2 {
    // H = a·σ with |a| = Δ̄/2 for traceless Hermitian H.
    let half_bar = (h[(0, 0)].re.powi(2) + h[(0, 1)].norm_sqr()).sqrt();
    if half_bar == 0.0 {
        return ops::identity();
    }
    let (s, c) = (half_bar * tau).sin_cos();
    ops::identity() * C64::from(c) - h * (I * (s / half_bar))
}
