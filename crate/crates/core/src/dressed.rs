//! Dressed-state reduction of the N-scheme to an effective Lambda system.
//!
//! Diagonalising the quadrupole-coupled pair {S1/2, D5/2} at lowest order
//! turns the four-level N-scheme into a Lambda system whose feet are D3/2
//! and the dressed D5/2-like state. The reduction yields the mixing
//! coefficient alpha_C = Omega_C / (2 Delta_C), the quadrupole light shift
//! delta_C = Omega_C^2 / (4 Delta_C), the three-photon resonance condition
//! Delta_R = Delta_B - Delta_C - delta_C, and the THz reference combination
//! omega_R + omega_C - omega_B + delta_C.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DressedError {
    #[error("quadrupole drive is resonant (Delta_C = 0); the perturbative reduction is invalid")]
    ResonantQuadrupole,
    #[error("perturbativity violated: |Omega_C/Delta_C| = {ratio} >= 1")]
    NotPerturbative { ratio: f64 },
    #[error("dark state undefined: both effective couplings vanish")]
    UndefinedDarkState,
}

/// Effective Lambda scheme obtained from the dressed-state reduction.
/// Frequencies in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveLambda {
    /// Coupling of the D3/2 foot: Omega_R.
    pub coupling_1: f64,
    /// Coupling of the dressed D5/2 foot: alpha_C * Omega_B.
    pub coupling_2: f64,
    pub alpha_c: f64,
    pub delta_c: f64,
    /// Predicted dark-resonance repumper detuning.
    pub dark_detuning: f64,
}

impl EffectiveLambda {
    pub fn new(
        omega_b_rabi: f64,
        omega_r_rabi: f64,
        omega_c_rabi: f64,
        delta_b: f64,
        delta_c: f64,
    ) -> Result<Self, DressedError> {
        let alpha_c = mixing_coefficient(omega_c_rabi, delta_c)?;
        let shift = quadrupole_light_shift(omega_c_rabi, delta_c)?;
        Ok(EffectiveLambda {
            coupling_1: omega_r_rabi,
            coupling_2: alpha_c * omega_b_rabi,
            alpha_c,
            delta_c: shift,
            dark_detuning: dark_resonance_detuning(delta_b, delta_c, shift),
        })
    }

    /// True when the reduction is comfortably perturbative.
    pub fn is_perturbative(&self) -> bool {
        self.alpha_c.abs() <= 0.3
    }
}

/// Mixing coefficient alpha_C = Omega_C / (2 Delta_C).
pub fn mixing_coefficient(omega_c_rabi: f64, delta_c: f64) -> Result<f64, DressedError> {
    if delta_c == 0.0 {
        return Err(DressedError::ResonantQuadrupole);
    }
    Ok(omega_c_rabi / (2.0 * delta_c))
}

/// Second-order light shift of the quadrupole drive,
/// delta_C = Omega_C^2 / (4 Delta_C).
pub fn quadrupole_light_shift(omega_c_rabi: f64, delta_c: f64) -> Result<f64, DressedError> {
    if omega_c_rabi == 0.0 {
        return Ok(0.0);
    }
    if delta_c == 0.0 {
        return Err(DressedError::ResonantQuadrupole);
    }
    let ratio = (omega_c_rabi / delta_c).abs();
    if ratio >= 1.0 {
        return Err(DressedError::NotPerturbative { ratio });
    }
    Ok(omega_c_rabi * omega_c_rabi / (4.0 * delta_c))
}

/// Exact counterpart of [`quadrupole_light_shift`] from the 2x2
/// diagonalisation; kept public as the validation route.
pub fn exact_two_level_shift(omega_c_rabi: f64, delta_c: f64) -> f64 {
    0.5 * ((delta_c * delta_c + omega_c_rabi * omega_c_rabi).sqrt() - delta_c.abs())
        * delta_c.signum()
}

/// Three-photon resonance condition: the repumper detuning at which the dark
/// resonance occurs, Delta_R = Delta_B - Delta_C - delta_C.
pub fn dark_resonance_detuning(delta_b: f64, delta_c: f64, delta_shift_c: f64) -> f64 {
    delta_b - delta_c - delta_shift_c
}

/// The combination of absolute laser frequencies fixed by the dark
/// resonance: omega_R + omega_C - omega_B + delta_C. At the dark-line centre
/// and zero field this equals the THz transition frequency.
pub fn three_photon_reference(omega_r: f64, omega_c: f64, omega_b: f64, delta_shift_c: f64) -> f64 {
    omega_r + omega_c - omega_b + delta_shift_c
}

/// Normalised dark state over the {|D3/2>, |dressed D5/2>} feet:
/// |dark> ~ coupling_2 |D> - coupling_1 |Q>.
pub fn dark_state_vector(lambda: &EffectiveLambda) -> Result<[f64; 2], DressedError> {
    let (c1, c2) = (lambda.coupling_1, lambda.coupling_2);
    let norm = (c1 * c1 + c2 * c2).sqrt();
    if norm == 0.0 {
        return Err(DressedError::UndefinedDarkState);
    }
    Ok([c2 / norm, -c1 / norm])
}
