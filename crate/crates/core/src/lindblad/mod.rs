//! Rotating-frame Hamiltonian and Lindblad dynamics of the driven Ca+
//! N-scheme, in the reduced four-level basis or the Zeeman-resolved
//! 14-state basis.
//!
//! Conventions fixed project-wide:
//! - Hamiltonian matrix entries are ordinary frequencies (Hz); the
//!   Liouvillian carries the 2 pi and is in 1/s.
//! - Density matrices are vectorised by column-major stacking (nalgebra's
//!   native layout), so vec(A rho B) = (B^T kron A) vec(rho).
//! - Detunings follow Delta_B = omega_B - omega_PS,
//!   Delta_R = omega_R - omega_PD, Delta_C = omega_C - omega_QS; the
//!   rotating frame assigns phase omega_B to P1/2, omega_B - omega_R to
//!   D3/2 and omega_C to D5/2.
//! - A laser of linewidth dnu (FWHM, Hz) contributes Markovian pure
//!   dephasing that relaxes the optical coherences it drives at pi * dnu.

pub mod density;
pub mod evolve;
pub mod hamiltonian;
pub mod liouvillian;
pub mod steady;

use nalgebra::Vector3;
use num::rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::atomic::half::Half;
use crate::atomic::{LevelName, TransitionLabel, ZeemanLine};
use crate::constants;

pub use density::DensityMatrix;
pub use hamiltonian::{build_hamiltonian, Basis, BasisState, Hamiltonian};
pub use liouvillian::{build_liouvillian, DecayChannel, Dephasing, JumpOp, Liouvillian};
pub use steady::steady_state;

#[derive(Debug, Error)]
pub enum LindbladError {
    #[error("laser {0:?} is required but missing")]
    MissingLaser(TransitionLabel),
    #[error("negative rate {rate} for {what}")]
    NegativeRate { what: &'static str, rate: f64 },
    #[error("operator dimension {got} does not match basis dimension {expected}")]
    BasisMismatch { got: usize, expected: usize },
    #[error("stationary state is not unique: kernel dimension ~{kernel_dim} (decoupled sublevels?)")]
    DegenerateKernel { kernel_dim: usize },
    #[error("steady-state residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },
    #[error("time step underflow at t = {t:.3e} s (step {step:.3e} s)")]
    StepUnderflow { t: f64, step: f64 },
    #[error("integration exceeded {0} steps; system too stiff for the requested span")]
    TooManySteps(usize),
    #[error("unknown Zeeman line label {0}")]
    UnknownLine(String),
}

/// One driving field. Frequencies in Hz; `linewidth` is the FWHM of the
/// laser's Lorentzian lineshape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaserField {
    pub label: TransitionLabel,
    pub detuning: f64,
    pub rabi: f64,
    #[serde(default)]
    pub linewidth: f64,
    pub direction: [f64; 3],
}

impl LaserField {
    pub fn new(label: TransitionLabel, detuning: f64, rabi: f64) -> Self {
        LaserField { label, detuning, rabi, linewidth: 0.0, direction: [1.0, 0.0, 0.0] }
    }

    pub fn dir(&self) -> Vector3<f64> {
        Vector3::from(self.direction)
    }

    /// First-order Doppler shift seen by an atom at velocity v (Hz).
    pub fn doppler_shift(&self, velocity: Vector3<f64>) -> f64 {
        let lambda = crate::atomic::TransitionSpec::get(self.label).wavelength;
        self.dir().dot(&velocity) / lambda
    }
}

/// The three driving fields of the N-scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaserTriple {
    pub b: LaserField,
    pub r: LaserField,
    pub c: LaserField,
}

impl LaserTriple {
    pub fn get(&self, label: TransitionLabel) -> &LaserField {
        match label {
            TransitionLabel::B => &self.b,
            TransitionLabel::R => &self.r,
            TransitionLabel::C => &self.c,
            TransitionLabel::Thz => unreachable!("THz transition is not driven"),
        }
    }

    pub fn get_mut(&mut self, label: TransitionLabel) -> &mut LaserField {
        match label {
            TransitionLabel::B => &mut self.b,
            TransitionLabel::R => &mut self.r,
            TransitionLabel::C => &mut self.c,
            TransitionLabel::Thz => unreachable!("THz transition is not driven"),
        }
    }
}

/// Basis choice for the driven system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Model {
    /// Reduced 4-level system {S1/2, P1/2, D3/2, D5/2}. With `line` set the
    /// couplings are scaled by that Zeeman component's relative Rabi
    /// frequencies and the sublevel Zeeman shifts enter the diagonal.
    FourLevel { line: Option<Ratio<i64>> },
    /// Full 14-state Zeeman manifold. `pi_admixture` is the residual field
    /// amplitude of the pi component of the two dipole lasers relative to
    /// sigma (polarisation only nearly perpendicular to B).
    Zeeman14 {
        pi_admixture: f64,
        /// Restrict couplings and decays to the four path states of one
        /// line; used to cross-check against the 4-level model.
        restrict_to_line: Option<Ratio<i64>>,
    },
}

impl Model {
    pub fn four_level() -> Self {
        Model::FourLevel { line: None }
    }

    pub fn zeeman14() -> Self {
        Model::Zeeman14 { pi_admixture: 0.0, restrict_to_line: None }
    }
}

/// Incoherent rates of the system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    /// Total P1/2 decay rate (1/s).
    pub gamma_p: f64,
    /// Branching probability P1/2 -> D3/2.
    pub beta: f64,
    /// Include the slow metastable decays D3/2 -> S, D5/2 -> S.
    pub metastable_decay: bool,
    pub gamma_d32: f64,
    pub gamma_d52: f64,
}

impl Default for Rates {
    fn default() -> Self {
        Rates {
            gamma_p: constants::gamma_p(),
            beta: constants::branching_beta(),
            metastable_decay: true,
            gamma_d32: constants::gamma_d32(),
            gamma_d52: constants::gamma_d52(),
        }
    }
}

/// Photon-counting parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    /// Probability that an emitted 397 nm photon is counted.
    pub efficiency: f64,
    /// Stray-light background (counts/s).
    pub background: f64,
}

impl Default for Detection {
    fn default() -> Self {
        Detection { efficiency: 1e-4, background: 570e3 }
    }
}

/// Complete parameter set for one steady-state evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub model: Model,
    pub lasers: LaserTriple,
    /// Static magnetic field (T).
    pub b_field: f64,
    pub rates: Rates,
    pub detection: Detection,
}

impl SystemParams {
    pub fn basis(&self) -> Basis {
        Basis::for_model(&self.model)
    }

    pub fn hamiltonian(&self, velocity: Option<Vector3<f64>>) -> Result<Hamiltonian, LindbladError> {
        build_hamiltonian(&self.model, &self.lasers, self.b_field, velocity)
    }

    /// All jump operators: radiative decays plus laser-linewidth dephasing.
    pub fn jump_ops(&self) -> Result<Vec<JumpOp>, LindbladError> {
        let basis = self.basis();
        let mut ops = hamiltonian::decay_ops(&self.model, &basis, &self.rates)?;
        ops.extend(hamiltonian::laser_dephasing_ops(&basis, &self.lasers)?);
        Ok(ops)
    }

    pub fn liouvillian(&self, velocity: Option<Vector3<f64>>) -> Result<Liouvillian, LindbladError> {
        let h = self.hamiltonian(velocity)?;
        build_liouvillian(&h, &self.jump_ops()?)
    }

    /// Steady-state fluorescence of a single ion (counts/s) at the given
    /// velocity, including detection efficiency and background.
    pub fn steady_fluorescence(&self, velocity: Option<Vector3<f64>>) -> Result<f64, LindbladError> {
        let basis = self.basis();
        let l = self.liouvillian(velocity)?;
        let rho = steady_state(&l)?;
        Ok(fluorescence(&rho, &basis, &self.rates, &self.detection))
    }
}

/// Detected fluorescence rate (counts/s):
/// (1 - beta) Gamma_P * (total P1/2 population) * efficiency + background.
pub fn fluorescence(
    rho: &DensityMatrix,
    basis: &Basis,
    rates: &Rates,
    detection: &Detection,
) -> f64 {
    let p_pop: f64 = basis
        .indices_of(LevelName::P12)
        .map(|i| rho.matrix[(i, i)].re)
        .sum();
    (1.0 - rates.beta) * rates.gamma_p * p_pop.max(0.0) * detection.efficiency
        + detection.background
}

/// Convenience: the Zeeman line data for a label, as a builder input.
pub fn resolve_line(label: Ratio<i64>) -> Result<ZeemanLine, LindbladError> {
    crate::atomic::line_by_label(label)
        .ok_or_else(|| LindbladError::UnknownLine(crate::atomic::format_m_thz(label)))
}

/// Sublevel Zeeman shift in Hz for (level, m) at field B.
pub fn sublevel_shift(level: LevelName, m: Half, b_tesla: f64) -> f64 {
    crate::atomic::Level::get(level).zeeman_sublevel_shift(m, b_tesla)
}
