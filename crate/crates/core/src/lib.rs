//! Cavity-assisted microwave cooling of a trapped polar molecule.
//!
//! The molecule is a driven two-level system coupled to a lossy microwave
//! resonator held at a thermal occupation `N`. The drive and the cavity field
//! both vary over the trap, so the internal dynamics push on the motion. This
//! crate computes that push as a force spectrum, turns it into heating and
//! cooling rates, and checks the result in the time domain.
//!
//! - [`params`]: inputs, derived rates and regime tags; [`presets`] for named sets.
//! - [`bloch`]: the effective two-level dynamics after cavity elimination.
//! - [`spectra`]: the force spectrum `S = S_Ω + S_g + S_I`.
//! - [`cooling`]: `A±`, `W`, `⟨n⟩₀`, the closed regime formulas and scans.
//! - [`oracle`]: master equation of molecule, cavity and motion.
//!
//! Frequencies are in units of the trap frequency. The stored drive
//! detuning includes the cavity Stark shift; see [`params::bare_detuning`].
//!
//! ```
//! use cavicool::cooling::rates_from_spectrum;
//! use cavicool::presets::preset;
//!
//! let r = rates_from_spectrum(&preset("fig3a").unwrap()).unwrap();
//! assert!(r.w > 0.0 && r.n_final.unwrap() < 1e-3);
//! ```

pub mod bloch;
pub mod ops;
pub mod params;
pub mod quad;
pub mod spectra;
pub mod reference;
pub mod cooling;
pub mod oracle;
pub mod presets;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/parameters.md")]
    mod parameters {}
    #[doc = include_str!("../../../book/src/bloch.md")]
    mod bloch {}
    #[doc = include_str!("../../../book/src/spectra.md")]
    mod spectra {}
    #[doc = include_str!("../../../book/src/cooling.md")]
    mod cooling {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/validation.md")]
    mod validation {}
}

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}
