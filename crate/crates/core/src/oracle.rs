//! Full Lindblad reference: two-level system, cavity mode and motional
//! mode, with the Lamb-Dicke couplings kept to first order.
//!
//! Basis order is `TLS ⊗ cavity ⊗ motion` with the motion as the fast index.
//! In the frame of the drive,
//!
//! ```text
//! H = (Δ_c − Δ) c†c − (Δ/2) σz + ν a†a
//!     + (Ω/2)[1 + η(a + a†)] σx + g[1 + η_c(a + a†)](σ+ c + σ- c†)
//! ```
//!
//! with `Δ` the bare detuning and the cavity damped by `2κ(N+1) D[c]` and
//! `2κN D[c†]`. The cooling rate and final occupation are fitted from
//! `⟨a†a⟩(t)` of several trajectories that share `W` and `⟨n⟩₀`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bloch::bloch_rates;
use crate::ops::{self, left_dyn, right_dyn, C64, I, ONE, ZERO};
use crate::params::{bare_detuning, ParamError, SystemParams};

/// Largest Liouville-space dimension (`d²` for Hilbert dimension `d`) the
/// time-domain oracle accepts.
pub const MAX_LIOUVILLE_DIM: usize = 40_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("Liouville dimension {0} exceeds the cap of {MAX_LIOUVILLE_DIM}")]
    DimensionCap(usize),
    #[error("step size underflow at t = {0}")]
    StepSizeUnderflow(f64),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("no unique steady state of the cavity-level Liouvillian")]
    SteadyState,
    #[error("initial motional occupation {0} exceeds the truncation")]
    InitialState(usize),
}

/// Highest retained Fock level of each mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub cavity: usize,
    pub motion: usize,
}

impl Truncation {
    pub fn dim(&self) -> usize {
        2 * (self.cavity + 1) * (self.motion + 1)
    }

    pub fn grow(&self, dc: usize, dm: usize) -> Self {
        Self { cavity: self.cavity + dc, motion: self.motion + dm }
    }
}

/// Compressed sparse rows.
#[derive(Debug, Clone)]
pub struct Csr {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl Csr {
    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let n = m.nrows();
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..n {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != ZERO {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self { n, indptr, indices, values }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    /// `out += A x`.
    fn add_mul(&self, x: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        let n = self.n;
        let xs = x.as_slice();
        let os = out.as_mut_slice();
        for j in 0..x.ncols() {
            let xc = &xs[j * n..(j + 1) * n];
            let oc = &mut os[j * n..(j + 1) * n];
            for (i, o) in oc.iter_mut().enumerate() {
                for (k, v) in self.row(i) {
                    *o += v * xc[k];
                }
            }
        }
    }

    /// `out += s x A†`.
    fn add_mul_adjoint(&self, x: &DMatrix<C64>, s: C64, out: &mut DMatrix<C64>) {
        let n = self.n;
        let xs = x.as_slice();
        let os = out.as_mut_slice();
        for j in 0..n {
            let oc = &mut os[j * n..(j + 1) * n];
            for (k, v) in self.row(j) {
                let v = s * v.conj();
                let xc = &xs[k * n..(k + 1) * n];
                for (o, x) in oc.iter_mut().zip(xc) {
                    *o += v * x;
                }
            }
        }
    }
}

/// Ladder operator on `0..=n`.
fn annihilation(n: usize) -> DMatrix<C64> {
    let mut a = DMatrix::zeros(n + 1, n + 1);
    for k in 1..=n {
        a[(k - 1, k)] = C64::from((k as f64).sqrt());
    }
    a
}

fn kron3(t: &DMatrix<C64>, c: &DMatrix<C64>, m: &DMatrix<C64>) -> DMatrix<C64> {
    t.kronecker(c).kronecker(m)
}

fn tls(x: &ops::Op2) -> DMatrix<C64> {
    DMatrix::from_column_slice(2, 2, x.as_slice())
}

/// `dst = a·src + b·src†`, in tiles to keep both access patterns local.
fn adjoint_combine(src: &DMatrix<C64>, a: C64, b: C64, dst: &mut DMatrix<C64>) {
    const TILE: usize = 16;
    let n = src.nrows();
    let s = src.as_slice();
    let d = dst.as_mut_slice();
    for jb in (0..n).step_by(TILE) {
        for ib in (0..n).step_by(TILE) {
            for j in jb..(jb + TILE).min(n) {
                for i in ib..(ib + TILE).min(n) {
                    d[j * n + i] = a * s[j * n + i] + b * s[i * n + j].conj();
                }
            }
        }
    }
}

/// Work buffers for [`LindbladModel::apply`].
#[derive(Debug, Clone)]
pub struct Scratch {
    herm: DMatrix<C64>,
    prod: DMatrix<C64>,
}

/// Truncated thermal populations, renormalized.
pub fn thermal_populations(n_mean: f64, n_max: usize) -> Vec<f64> {
    let mut p: Vec<f64> = if n_mean == 0.0 {
        (0..=n_max).map(|k| if k == 0 { 1.0 } else { 0.0 }).collect()
    } else {
        let r = n_mean / (n_mean + 1.0);
        (0..=n_max).map(|k| r.powi(k as i32)).collect()
    };
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= s);
    p
}

/// Generator `L(ρ) = −iKρ + iρK† + Σ JρJ†` with `K = H − (i/2)ΣJ†J`.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    pub truncation: Truncation,
    pub params: SystemParams,
    k: Csr,
    jumps: Vec<Csr>,
    motion_number: Vec<f64>,
    cavity_number: Vec<f64>,
    excited: Vec<f64>,
}

impl LindbladModel {
    pub fn new(p: &SystemParams, t: Truncation) -> Result<Self, OracleError> {
        p.validate()?;
        let dim = t.dim();
        if dim * dim > MAX_LIOUVILLE_DIM {
            return Err(OracleError::DimensionCap(dim * dim));
        }
        let (nc, nm) = (t.cavity + 1, t.motion + 1);
        let it = DMatrix::<C64>::identity(2, 2);
        let ic = DMatrix::<C64>::identity(nc, nc);
        let im = DMatrix::<C64>::identity(nm, nm);
        let c1 = annihilation(t.cavity);
        let a1 = annihilation(t.motion);

        let c = kron3(&it, &c1, &im);
        let a = kron3(&it, &ic, &a1);
        let sz = kron3(&tls(&ops::sigma_z()), &ic, &im);
        let sx = kron3(&tls(&ops::sigma_x()), &ic, &im);
        let sp = kron3(&tls(&ops::sigma_plus()), &ic, &im);
        let id = DMatrix::<C64>::identity(dim, dim);
        let x = &a + a.adjoint();

        let d = bare_detuning(p);
        let cd = c.adjoint();
        let nc_op = &cd * &c;
        let na_op = a.adjoint() * &a;
        let exchange = &sp * &c + sp.adjoint() * &cd;
        let h = &nc_op * C64::from(p.cavity_detuning - d) - &sz * C64::from(d / 2.0)
            + &na_op * C64::from(p.nu)
            + (&id + &x * C64::from(p.eta)) * &sx * C64::from(p.rabi / 2.0)
            + (&id + &x * C64::from(p.eta_c)) * &exchange * C64::from(p.g);

        let mut jumps = Vec::new();
        let mut k = h;
        for (op, rate) in [(c.clone(), 2.0 * p.kappa * (p.n_thermal + 1.0)), (cd.clone(), 2.0 * p.kappa * p.n_thermal)] {
            if rate > 0.0 {
                let j = op * C64::from(rate.sqrt());
                k -= j.adjoint() * &j * (I * 0.5);
                jumps.push(Csr::from_dense(&j));
            }
        }

        let diag = |m: &DMatrix<C64>| (0..dim).map(|i| m[(i, i)].re).collect::<Vec<_>>();
        let pe = kron3(&tls(&(ops::identity() + ops::sigma_z())), &ic, &im) * C64::from(0.5);
        Ok(Self {
            truncation: t,
            params: *p,
            k: Csr::from_dense(&k),
            jumps,
            motion_number: diag(&na_op),
            cavity_number: diag(&nc_op),
            excited: diag(&pe),
        })
    }

    pub fn dim(&self) -> usize {
        self.truncation.dim()
    }

    /// Stored entries of `K` and of all jump operators.
    pub fn nnz(&self) -> usize {
        self.k.nnz() + self.jumps.iter().map(Csr::nnz).sum::<usize>()
    }

    /// `|g⟩⟨g| ⊗ ρ_th(N) ⊗ |n⟩⟨n|`.
    pub fn initial_state(&self, excited: bool, n_motion: usize) -> Result<DMatrix<C64>, OracleError> {
        let t = self.truncation;
        if n_motion > t.motion {
            return Err(OracleError::InitialState(n_motion));
        }
        let pc = thermal_populations(self.params.n_thermal, t.cavity);
        let mut rho = DMatrix::zeros(self.dim(), self.dim());
        let s = if excited { 0 } else { 1 };
        for (kc, p) in pc.iter().enumerate() {
            let i = (s * (t.cavity + 1) + kc) * (t.motion + 1) + n_motion;
            rho[(i, i)] = C64::from(*p);
        }
        Ok(rho)
    }

    pub fn scratch(&self) -> Scratch {
        let n = self.dim();
        Scratch { herm: DMatrix::zeros(n, n), prod: DMatrix::zeros(n, n) }
    }

    /// `out = L((ρ + ρ†)/2)`.
    ///
    /// Acting on the Hermitian part only keeps rounding errors in the
    /// anti-Hermitian part from being propagated.
    pub fn apply(&self, rho: &DMatrix<C64>, out: &mut DMatrix<C64>, ws: &mut Scratch) {
        let half = C64::from(0.5);
        adjoint_combine(rho, half, half, &mut ws.herm);
        // With Y = ρK†: −iKρ + iρK† = i(Y − Y†).
        ws.prod.fill(ZERO);
        self.k.add_mul_adjoint(&ws.herm, ONE, &mut ws.prod);
        adjoint_combine(&ws.prod, I, -I, out);
        for jump in &self.jumps {
            ws.prod.fill(ZERO);
            jump.add_mul_adjoint(&ws.herm, ONE, &mut ws.prod);
            jump.add_mul(&ws.prod, out);
        }
    }

    fn expect_diag(&self, weights: &[f64], rho: &DMatrix<C64>) -> f64 {
        weights.iter().enumerate().map(|(i, w)| w * rho[(i, i)].re).sum()
    }

    pub fn motion_number(&self, rho: &DMatrix<C64>) -> f64 {
        self.expect_diag(&self.motion_number, rho)
    }

    pub fn cavity_number(&self, rho: &DMatrix<C64>) -> f64 {
        self.expect_diag(&self.cavity_number, rho)
    }

    pub fn excited_population(&self, rho: &DMatrix<C64>) -> f64 {
        self.expect_diag(&self.excited, rho)
    }

    /// Populations of the highest cavity and motional Fock levels.
    pub fn top_occupancy(&self, rho: &DMatrix<C64>) -> (f64, f64) {
        let t = self.truncation;
        let (mut pc, mut pm) = (0.0, 0.0);
        for i in 0..self.dim() {
            let m = i % (t.motion + 1);
            let c = (i / (t.motion + 1)) % (t.cavity + 1);
            let p = rho[(i, i)].re;
            if c == t.cavity {
                pc += p;
            }
            if m == t.motion {
                pm += p;
            }
        }
        (pc, pm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12 }
    }
}

/// Worst values of the physicality checks over a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Physicality {
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
    pub max_top_cavity: f64,
    pub max_top_motion: f64,
}

impl Default for Physicality {
    fn default() -> Self {
        Self {
            max_trace_error: 0.0,
            max_hermiticity_error: 0.0,
            min_eigenvalue: f64::INFINITY,
            max_top_cavity: 0.0,
            max_top_motion: 0.0,
        }
    }
}

impl Physicality {
    pub const TRACE_TOL: f64 = 1e-8;
    pub const HERMITICITY_TOL: f64 = 1e-10;
    pub const PSD_TOL: f64 = 1e-10;
    pub const TOP_FOCK_TOL: f64 = 1e-6;

    pub fn ok(&self) -> bool {
        self.max_trace_error <= Self::TRACE_TOL
            && self.max_hermiticity_error <= Self::HERMITICITY_TOL
            && self.min_eigenvalue >= -Self::PSD_TOL
            && self.max_top_cavity < Self::TOP_FOCK_TOL
            && self.max_top_motion < Self::TOP_FOCK_TOL
    }

    pub fn merge(&self, o: &Self) -> Self {
        Self {
            max_trace_error: self.max_trace_error.max(o.max_trace_error),
            max_hermiticity_error: self.max_hermiticity_error.max(o.max_hermiticity_error),
            min_eigenvalue: self.min_eigenvalue.min(o.min_eigenvalue),
            max_top_cavity: self.max_top_cavity.max(o.max_top_cavity),
            max_top_motion: self.max_top_motion.max(o.max_top_motion),
        }
    }

    fn record(&mut self, model: &LindbladModel, rho: &DMatrix<C64>, spectral: bool) {
        let tr: C64 = rho.trace();
        self.max_trace_error = self.max_trace_error.max((tr - ONE).norm());
        let n = rho.nrows();
        let mut herm: f64 = 0.0;
        for j in 0..n {
            for i in 0..j {
                herm = herm.max((rho[(i, j)] - rho[(j, i)].conj()).norm());
            }
            herm = herm.max(rho[(j, j)].im.abs());
        }
        self.max_hermiticity_error = self.max_hermiticity_error.max(herm);
        let (pc, pm) = model.top_occupancy(rho);
        self.max_top_cavity = self.max_top_cavity.max(pc);
        self.max_top_motion = self.max_top_motion.max(pm);
        if spectral {
            let h = (rho + rho.adjoint()) * C64::from(0.5);
            self.min_eigenvalue = self.min_eigenvalue.min(h.symmetric_eigenvalues().min());
        }
    }
}

/// Sampled observables of one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub initial_motion: usize,
    pub times: Vec<f64>,
    pub motion: Vec<f64>,
    pub cavity: Vec<f64>,
    pub excited: Vec<f64>,
    pub trace: Vec<f64>,
    pub physicality: Physicality,
    pub steps: usize,
    pub rejected: usize,
}

// Dormand–Prince 5(4).
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E5: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Stepper<'a> {
    model: &'a LindbladModel,
    tol: Tolerances,
    k: Vec<DMatrix<C64>>,
    ytmp: DMatrix<C64>,
    scratch: Scratch,
    h: f64,
    fresh: bool,
    steps: usize,
    rejected: usize,
}

impl<'a> Stepper<'a> {
    fn new(model: &'a LindbladModel, tol: Tolerances, h0: f64) -> Self {
        let n = model.dim();
        Self {
            model,
            tol,
            k: (0..7).map(|_| DMatrix::zeros(n, n)).collect(),
            ytmp: DMatrix::zeros(n, n),
            scratch: model.scratch(),
            h: h0,
            fresh: true,
            steps: 0,
            rejected: 0,
        }
    }

    /// Advance `y` from `t` to exactly `t_end`.
    fn advance(&mut self, y: &mut DMatrix<C64>, t: &mut f64, t_end: f64) -> Result<(), OracleError> {
        if self.fresh {
            self.model.apply(y, &mut self.k[0], &mut self.scratch);
            self.fresh = false;
        }
        while *t < t_end {
            let last = *t + self.h >= t_end;
            let h = if last { t_end - *t } else { self.h };
            if h < 1e-12 * t_end.abs().max(1.0) {
                return Err(OracleError::StepSizeUnderflow(*t));
            }
            for s in 1..7 {
                let coef: Vec<(usize, f64)> =
                    A[s].iter().take(s).enumerate().filter(|(_, a)| **a != 0.0).map(|(r, a)| (r, h * a)).collect();
                {
                    let ks: Vec<&[C64]> = coef.iter().map(|(r, _)| self.k[*r].as_slice()).collect();
                    let ys = y.as_slice();
                    for (idx, out) in self.ytmp.as_mut_slice().iter_mut().enumerate() {
                        let mut v = ys[idx];
                        for (kr, (_, c)) in ks.iter().zip(&coef) {
                            v += kr[idx] * c;
                        }
                        *out = v;
                    }
                }
                self.model.apply(&self.ytmp, &mut self.k[s], &mut self.scratch);
            }
            // ytmp now holds the 5th-order solution (row 6 of A is b).
            let (ys, yn) = (y.as_slice(), self.ytmp.as_slice());
            let ks: Vec<(&[C64], f64)> =
                E5.iter().enumerate().filter(|(_, e)| **e != 0.0).map(|(r, e)| (self.k[r].as_slice(), h * e)).collect();
            let mut acc = 0.0;
            for idx in 0..ys.len() {
                let mut e = ZERO;
                for (kr, c) in &ks {
                    e += kr[idx] * c;
                }
                let sc = self.tol.atol + self.tol.rtol * ys[idx].norm_sqr().max(yn[idx].norm_sqr()).sqrt();
                acc += e.norm_sqr() / (sc * sc);
            }
            let err = (acc / ys.len() as f64).sqrt();
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                y.copy_from(&self.ytmp);
                *t = if last { t_end } else { *t + h };
                self.k.swap(0, 6);
                self.steps += 1;
                if !last || factor < 1.0 {
                    self.h = h * factor;
                }
            } else {
                self.rejected += 1;
                self.h = h * factor.min(1.0);
            }
        }
        Ok(())
    }
}

/// Integrate from `rho0` and sample at `times` (ascending, starting at or
/// after 0). The full spectrum of `ρ` is checked at `checkpoints` evenly
/// spread samples; trace, Hermiticity and top-Fock occupancy at every one.
pub fn evolve(
    model: &LindbladModel,
    mut rho: DMatrix<C64>,
    initial_motion: usize,
    times: &[f64],
    tol: Tolerances,
    checkpoints: usize,
) -> Result<Trajectory, OracleError> {
    let mut st = Stepper::new(model, tol, 1e-3);
    let mut t = 0.0;
    let mut out = Trajectory {
        initial_motion,
        times: times.to_vec(),
        motion: Vec::with_capacity(times.len()),
        cavity: Vec::with_capacity(times.len()),
        excited: Vec::with_capacity(times.len()),
        trace: Vec::with_capacity(times.len()),
        physicality: Physicality::default(),
        steps: 0,
        rejected: 0,
    };
    let every = (times.len() / checkpoints.max(1)).max(1);
    for (i, &ts) in times.iter().enumerate() {
        st.advance(&mut rho, &mut t, ts)?;
        out.motion.push(model.motion_number(&rho));
        out.cavity.push(model.cavity_number(&rho));
        out.excited.push(model.excited_population(&rho));
        out.trace.push(rho.trace().re);
        out.physicality.record(model, &rho, i % every == 0 || i + 1 == times.len());
    }
    out.steps = st.steps;
    out.rejected = st.rejected;
    Ok(out)
}

/// Shared-rate fit `⟨n⟩_k(t) = n₀ + c_k e^{−W(t − t₀)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoolingFit {
    pub w: f64,
    pub n_final: f64,
    pub amplitudes: Vec<f64>,
    pub rms_residual: f64,
    pub window: (f64, f64),
    pub samples: usize,
    /// Residual above `1e-3` of the spread between trajectories.
    pub poor_fit: bool,
}

fn linear_fit(data: &[(usize, f64, f64)], ntraj: usize, w: f64, t0: f64) -> (f64, Vec<f64>, f64) {
    let m = DMatrix::from_fn(data.len(), ntraj + 1, |r, col| {
        let (k, t, _) = data[r];
        if col == 0 {
            1.0
        } else if col == k + 1 {
            (-w * (t - t0)).exp()
        } else {
            0.0
        }
    });
    let b = DVector::from_iterator(data.len(), data.iter().map(|d| d.2));
    let x = m.clone().svd(true, true).solve(&b, 1e-15).expect("SVD with both factors");
    let r = &m * &x - b;
    let rms = (r.norm_squared() / data.len() as f64).sqrt();
    (x[0], x.iter().skip(1).copied().collect(), rms)
}

/// Variable projection over `W`; the linear parameters are eliminated by
/// least squares at each trial rate.
pub fn fit_cooling(trajs: &[Trajectory], window: (f64, f64)) -> Result<CoolingFit, OracleError> {
    if trajs.len() < 2 {
        return Err(OracleError::Fit("need at least two trajectories".into()));
    }
    let (t0, t1) = window;
    let mut data = Vec::new();
    for (k, tr) in trajs.iter().enumerate() {
        for (t, n) in tr.times.iter().zip(&tr.motion) {
            if *t >= t0 && *t <= t1 {
                data.push((k, *t, *n));
            }
        }
    }
    let in_window = |tr: &Trajectory| -> Vec<(f64, f64)> {
        tr.times.iter().zip(&tr.motion).filter(|(t, _)| **t >= t0 && **t <= t1).map(|(t, n)| (*t, *n)).collect()
    };
    let (a, b) = (in_window(&trajs[0]), in_window(&trajs[1]));
    if a.len() < 3 || a.len() != b.len() {
        return Err(OracleError::Fit("too few samples in the fit window".into()));
    }
    let d0 = a[0].1 - b[0].1;
    let d1 = a[a.len() - 1].1 - b[b.len() - 1].1;
    let span = a[a.len() - 1].0 - a[0].0;
    if !(d0 / d1 > 0.0) {
        return Err(OracleError::Fit(format!("trajectories cross in the fit window: {d0} → {d1}")));
    }
    // Negative for heating.
    let w0 = (d0 / d1).ln() / span;
    if w0 == 0.0 {
        return Err(OracleError::Fit("no relaxation between trajectories".into()));
    }

    // Golden section on ln|W|, sign fixed by the initial estimate.
    let cost = |lw: f64| linear_fit(&data, trajs.len(), w0.signum() * lw.exp(), t0).2;
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (w0.abs().ln() - 1.0, w0.abs().ln() + 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (cost(x1), cost(x2));
    while hi - lo > 1e-10 {
        if f1 > f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = cost(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = cost(x1);
        }
    }
    let w = w0.signum() * (0.5 * (lo + hi)).exp();
    let (n_final, amplitudes, rms) = linear_fit(&data, trajs.len(), w, t0);
    Ok(CoolingFit {
        w,
        n_final,
        amplitudes,
        rms_residual: rms,
        window,
        samples: data.len(),
        poor_fit: rms > 1e-3 * d0.abs(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub truncation: Truncation,
    pub initial_motion: Vec<usize>,
    pub window: (f64, f64),
    pub samples: usize,
    pub tolerances: Tolerances,
    pub checkpoints: usize,
}

impl OracleConfig {
    /// Cavity cut where the thermal tail drops below `5·10⁻⁷` (at least 3),
    /// motion cut three levels above the highest initial state, and a fit
    /// window `[t₀, 2t₀]` with `t₀ = 10/min(κ, γ̃_N)`.
    pub fn for_params(p: &SystemParams) -> Self {
        let mut nc = 3;
        if p.n_thermal > 0.0 {
            let r = p.n_thermal / (p.n_thermal + 1.0);
            while (1.0 - r) * r.powi(nc as i32) >= 5e-7 {
                nc += 1;
            }
        }
        let initial_motion = vec![1, 0];
        let rates = bloch_rates(p);
        let t0 = 10.0 / p.kappa.min(rates.tilde_gamma_n);
        Self {
            truncation: Truncation { cavity: nc, motion: initial_motion.iter().max().copied().unwrap_or(0) + 3 },
            initial_motion,
            window: (t0, 2.0 * t0),
            samples: 121,
            tolerances: Tolerances::default(),
            checkpoints: 8,
        }
    }

    fn sample_times(&self) -> Vec<f64> {
        let (t0, t1) = self.window;
        let pre = 8;
        let mut t: Vec<f64> = (1..=pre).map(|k| t0 * k as f64 / pre as f64).collect();
        t.pop();
        let n = self.samples.max(3);
        t.extend((0..n).map(|k| t0 + (t1 - t0) * k as f64 / (n - 1) as f64));
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRun {
    pub params: SystemParams,
    pub config: OracleConfig,
    pub trajectories: Vec<Trajectory>,
    pub fit: CoolingFit,
    pub physicality: Physicality,
}

/// Trajectories for every initial motional state of `cfg`, without the fit.
pub fn simulate(p: &SystemParams, cfg: &OracleConfig) -> Result<Vec<Trajectory>, OracleError> {
    let model = LindbladModel::new(p, cfg.truncation)?;
    let times = cfg.sample_times();
    cfg.initial_motion
        .iter()
        .map(|&n0| {
            let rho = model.initial_state(false, n0)?;
            evolve(&model, rho, n0, &times, cfg.tolerances, cfg.checkpoints)
        })
        .collect()
}

pub fn run_oracle(p: &SystemParams, cfg: &OracleConfig) -> Result<OracleRun, OracleError> {
    let trajectories = simulate(p, cfg)?;
    let physicality = trajectories.iter().fold(Physicality::default(), |a, t| a.merge(&t.physicality));
    let fit = fit_cooling(&trajectories, cfg.window)?;
    Ok(OracleRun { params: *p, config: cfg.clone(), trajectories, fit, physicality })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub runs: Vec<OracleRun>,
    /// `|ΔW|/W` between consecutive truncations.
    pub rel_change_w: Vec<f64>,
    /// `|Δn₀|/n₀` between consecutive truncations.
    pub rel_change_n: Vec<f64>,
}

impl ConvergenceStudy {
    pub const TOL: f64 = 1e-3;

    /// Runs ordered from the smallest truncation up.
    pub fn from_runs(runs: Vec<OracleRun>) -> Self {
        let rel = |f: fn(&OracleRun) -> f64| -> Vec<f64> {
            runs.windows(2).map(|w| ((f(&w[1]) - f(&w[0])) / f(&w[1])).abs()).collect()
        };
        let rel_change_w = rel(|r| r.fit.w);
        let rel_change_n = rel(|r| r.fit.n_final);
        Self { runs, rel_change_w, rel_change_n }
    }

    pub fn converged(&self) -> bool {
        matches!((self.rel_change_w.last(), self.rel_change_n.last()), (Some(w), Some(n)) if *w < Self::TOL && *n < Self::TOL)
    }

    pub fn best(&self) -> &OracleRun {
        self.runs.last().expect("at least one run")
    }
}

/// Base truncation and one level grown by two cavity and one motional quantum.
pub fn default_levels(cfg: &OracleConfig) -> Vec<Truncation> {
    vec![cfg.truncation, cfg.truncation.grow(2, 1)]
}

pub fn convergence_sweep(p: &SystemParams, cfg: &OracleConfig, levels: &[Truncation]) -> Result<ConvergenceStudy, OracleError> {
    let mut runs = Vec::new();
    for t in levels {
        let c = OracleConfig { truncation: *t, ..cfg.clone() };
        runs.push(run_oracle(p, &c)?);
    }
    Ok(ConvergenceStudy::from_runs(runs))
}

/// Exact force spectrum of the two-level system and cavity with the motion
/// removed, force `f = (ηΩ/2)σx + η_c g(σ+c + σ-c†)`, evaluated by a dense
/// resolvent of the joint Liouvillian.
pub fn cavity_force_spectrum(p: &SystemParams, n_cavity: usize, omegas: &[f64]) -> Result<Vec<f64>, OracleError> {
    p.validate()?;
    let nc = n_cavity + 1;
    let ic = DMatrix::<C64>::identity(nc, nc);
    let c = ops::embed(&ops::identity(), &annihilation(n_cavity));
    let sz = ops::embed(&ops::sigma_z(), &ic);
    let sx = ops::embed(&ops::sigma_x(), &ic);
    let sp = ops::embed(&ops::sigma_plus(), &ic);
    let cd = c.adjoint();
    let d = bare_detuning(p);
    let exchange = &sp * &c + sp.adjoint() * &cd;
    let h = &cd * &c * C64::from(p.cavity_detuning - d) - &sz * C64::from(d / 2.0)
        + &sx * C64::from(p.rabi / 2.0)
        + &exchange * C64::from(p.g);
    let n = h.nrows();
    let mut l = (left_dyn(&h) - right_dyn(&h)) * (-I);
    for (j, rate) in [(c.clone(), p.kappa * (p.n_thermal + 1.0)), (cd.clone(), p.kappa * p.n_thermal)] {
        let jd = j.adjoint();
        let jdj = &jd * &j;
        l += (left_dyn(&j) * right_dyn(&jd) * C64::from(2.0) - left_dyn(&jdj) - right_dyn(&jdj)) * C64::from(rate);
    }

    let id_vec = DMatrix::<C64>::identity(n, n);
    let id_vec = DVector::from_column_slice(id_vec.as_slice());
    let mut m = l.clone();
    for j in 0..n * n {
        m[(0, j)] = id_vec[j].conj();
    }
    let mut rhs = DVector::zeros(n * n);
    rhs[0] = ONE;
    let rho_v = m.lu().solve(&rhs).ok_or(OracleError::SteadyState)?;
    let rho = DMatrix::from_column_slice(n, n, rho_v.as_slice());

    let f = &sx * C64::from(p.eta * p.rabi / 2.0) + &exchange * C64::from(p.eta_c * p.g);
    let x = &f * &rho;
    let r = &x - &rho * x.trace();
    let r_v = DVector::from_column_slice(r.as_slice());
    let proj = &rho_v * id_vec.adjoint();
    omegas
        .iter()
        .map(|&w| {
            let a = -(&l + DMatrix::<C64>::identity(n * n, n * n) * (I * w)) + &proj;
            let y = a.lu().solve(&r_v).ok_or(OracleError::SteadyState)?;
            let y = DMatrix::from_column_slice(n, n, y.as_slice());
            Ok(2.0 * (&f * y).trace().re)
        })
        .collect()
}
