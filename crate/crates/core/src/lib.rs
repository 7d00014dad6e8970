//! Simulation and analysis of three-photon coherent population trapping in
//! laser-cooled Ca+.
//!
//! The crate covers the full chain from the driven four-level (or Zeeman
//! resolved 14-state) Lindblad model to synthetic fluorescence spectra, dark
//! line detection and Lorentzian fitting, Zeeman-ladder regression, and the
//! frequency-comb arithmetic that references the dark resonance to the
//! 1.82 THz fine-structure transition.

pub mod analysis;
pub mod atomic;
pub mod comb;
pub mod constants;
pub mod digest;
pub mod dressed;
pub mod lindblad;
pub mod scenario;
pub mod spectroscopy;
pub mod units;
