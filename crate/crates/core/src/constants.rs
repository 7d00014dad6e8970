//! Physical constants and Ca+ atomic data.
//!
//! All values are loaded from the committed table `data/constants.toml` so
//! that every number entering the physics has a single, versioned source.
//! Frequencies are ordinary frequencies (Hz) unless stated otherwise.

use std::sync::OnceLock;

use num::rational::Ratio;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Codata {
    pub speed_of_light: f64,
    pub planck: f64,
    pub boltzmann: f64,
    pub bohr_magneton: f64,
    pub bohr_magneton_over_h: f64,
    pub atomic_mass_unit: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandeFactors {
    pub g_s12: [i64; 2],
    pub g_p12: [i64; 2],
    pub g_d32: [i64; 2],
    pub g_d52: [i64; 2],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ca40 {
    pub mass_u: f64,
    pub lambda_b_m: f64,
    pub lambda_r_m: f64,
    pub lambda_c_m: f64,
    pub lambda_thz_m: f64,
    pub f_dd_hz: f64,
    pub f_dd_uncertainty_hz: f64,
    pub branching_beta: f64,
    pub gamma_p: f64,
    pub tau_d32: f64,
    pub tau_d52: f64,
    pub lande: LandeFactors,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsTable {
    pub codata: Codata,
    pub ca40: Ca40,
}

static TABLE: OnceLock<ConstantsTable> = OnceLock::new();

/// The committed constants table, parsed once.
pub fn table() -> &'static ConstantsTable {
    TABLE.get_or_init(|| {
        toml::from_str(include_str!("../data/constants.toml"))
            .expect("data/constants.toml is well-formed")
    })
}

pub fn speed_of_light() -> f64 {
    table().codata.speed_of_light
}

pub fn boltzmann() -> f64 {
    table().codata.boltzmann
}

/// Bohr magneton over h, in Hz/T.
pub fn mu_b_over_h() -> f64 {
    table().codata.bohr_magneton_over_h
}

/// Mass of a 40Ca atom in kg.
pub fn mass_ca40() -> f64 {
    let t = table();
    t.ca40.mass_u * t.codata.atomic_mass_unit
}

pub fn lambda_b() -> f64 {
    table().ca40.lambda_b_m
}

pub fn lambda_r() -> f64 {
    table().ca40.lambda_r_m
}

pub fn lambda_c() -> f64 {
    table().ca40.lambda_c_m
}

pub fn lambda_thz() -> f64 {
    table().ca40.lambda_thz_m
}

/// Shipped 3D3/2-3D5/2 splitting used as the THz reference value (Hz).
pub fn f_dd() -> f64 {
    table().ca40.f_dd_hz
}

pub fn branching_beta() -> f64 {
    table().ca40.branching_beta
}

/// Total 4P1/2 decay rate, 1/s.
pub fn gamma_p() -> f64 {
    table().ca40.gamma_p
}

pub fn gamma_d32() -> f64 {
    1.0 / table().ca40.tau_d32
}

pub fn gamma_d52() -> f64 {
    1.0 / table().ca40.tau_d52
}

fn ratio(r: [i64; 2]) -> Ratio<i64> {
    Ratio::new(r[0], r[1])
}

pub fn g_s12() -> Ratio<i64> {
    ratio(table().ca40.lande.g_s12)
}

pub fn g_p12() -> Ratio<i64> {
    ratio(table().ca40.lande.g_p12)
}

pub fn g_d32() -> Ratio<i64> {
    ratio(table().ca40.lande.g_d32)
}

pub fn g_d52() -> Ratio<i64> {
    ratio(table().ca40.lande.g_d52)
}

/// Absolute atomic transition frequencies (Hz), mutually consistent with the
/// configured THz splitting.
///
/// The optical anchor frequencies come from the tabulated wavelengths; the
/// quadrupole transition frequency is derived from them and `f_dd` so that
/// `f_r + f_c - f_b = f_dd` holds as an identity. This keeps every synthetic
/// frequency chain (comb locks, three-photon combinations) self-consistent.
#[derive(Debug, Clone, Copy)]
pub struct AtomicFrequencies {
    /// 4S1/2 - 4P1/2 (Hz)
    pub f_ps: f64,
    /// 3D3/2 - 4P1/2 (Hz)
    pub f_pd: f64,
    /// 4S1/2 - 3D5/2 (Hz), derived
    pub f_qs: f64,
    /// 3D3/2 - 3D5/2 (Hz)
    pub f_dd: f64,
}

impl AtomicFrequencies {
    pub fn from_table() -> Self {
        Self::with_f_dd(f_dd())
    }

    pub fn with_f_dd(f_dd: f64) -> Self {
        let c = speed_of_light();
        let f_ps = c / lambda_b();
        let f_pd = c / lambda_r();
        // omega_QS = omega_PS - omega_PD + omega_THz
        let f_qs = f_ps - f_pd + f_dd;
        Self { f_ps, f_pd, f_qs, f_dd }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn table_parses_and_is_sane() {
        let t = table();
        assert_eq!(t.codata.speed_of_light, 299_792_458.0);
        assert!(t.ca40.branching_beta > 0.0 && t.ca40.branching_beta < 1.0);
    }

    #[test]
    fn mu_b_over_h_consistent_with_si_values() {
        let t = table();
        let derived = t.codata.bohr_magneton / t.codata.planck;
        assert_relative_eq!(derived, t.codata.bohr_magneton_over_h, max_relative = 1e-9);
        // ~1.4 MHz per gauss
        assert_relative_eq!(mu_b_over_h() * 1e-4, 1.399_624_5e6, max_relative = 1e-6);
    }

    #[test]
    fn derived_quadrupole_frequency_matches_quoted_wavelength() {
        let f = AtomicFrequencies::from_table();
        let lambda_derived = speed_of_light() / f.f_qs;
        // the quoted 729.15 nm is a rounded value; consistency to ~1e-4 is
        // the best the four quoted numbers permit
        assert_relative_eq!(lambda_derived, lambda_c(), max_relative = 2e-4);
        assert_relative_eq!(f.f_pd + f.f_qs - f.f_ps, f.f_dd, max_relative = 1e-12);
    }
}
