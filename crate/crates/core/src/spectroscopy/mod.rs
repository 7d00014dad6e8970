//! Scan engine: synthetic fluorescence spectra from the steady-state model,
//! averaged over Doppler velocities and magnetic-field noise, with optional
//! photon shot noise.
//!
//! Scan points are independent work units; the engine produces identical
//! output regardless of execution order or parallelism. Shot noise is
//! applied after deterministic assembly, from a per-point seeded stream.
//!
//! Doppler model: the velocity enters through the three-photon effective
//! wave-vector, shifting the dark-line coordinate by
//! (k_R + k_C - k_B).axis * v / 2pi per unit velocity. The MHz-scale
//! one-photon Doppler modulation of the broad fluorescence profile is far
//! below the natural linewidth and is neglected; the full per-laser shift
//! remains available through the Hamiltonian builder and is used to
//! validate this reduction.

pub mod averaging;
pub mod io;
pub mod noise;
pub mod quadrature;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::atomic::{self, TransitionLabel};
use crate::lindblad::{
    liouvillian, steady_state, Detection, LindbladError, SystemParams,
};

pub use averaging::{doppler_average, doppler_average_adaptive, field_noise_average, AveragingError, FieldNoiseModel};
pub use noise::add_shot_noise;

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("invalid scan grid: {0}")]
    InvalidGrid(String),
    #[error("integration time must be positive, got {0}")]
    ZeroIntegrationTime(f64),
    #[error(transparent)]
    Averaging(#[from] AveragingError),
    #[error(transparent)]
    Lindblad(#[from] LindbladError),
    #[error("spectrum i/o: {0}")]
    Io(String),
}

/// Environmental noise parameters of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    /// Sample temperature (K); 0 disables Doppler averaging.
    pub temperature: f64,
    /// Short-term field fluctuations, peak-to-peak (T); broaden lines in
    /// proportion to |m_THz|.
    pub b_short_pkpk: f64,
    /// Long-term (scan-to-scan) field drift, peak-to-peak (T); reported in
    /// budgets, not applied within a single scan.
    pub b_long_pkpk: f64,
    /// Axis of the 1-D velocity distribution (the trap axis).
    pub velocity_axis: [f64; 3],
}

impl Default for Environment {
    fn default() -> Self {
        Environment {
            temperature: 0.0,
            b_short_pkpk: 0.0,
            b_long_pkpk: 0.0,
            velocity_axis: [1.0, 0.0, 0.0],
        }
    }
}

/// Quadrature settings for the noise averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragingConfig {
    pub doppler_order: usize,
    pub field_order: usize,
    pub field_model: FieldNoiseModel,
}

impl Default for AveragingConfig {
    fn default() -> Self {
        AveragingConfig { doppler_order: 16, field_order: 7, field_model: FieldNoiseModel::Uniform }
    }
}

/// Full description of one scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub system: SystemParams,
    /// Which laser detuning is swept.
    pub sweep: TransitionLabel,
    /// Grid (Hz): start, stop inclusive, step > 0.
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub environment: Environment,
    pub averaging: AveragingConfig,
    /// Dwell time per point (s).
    pub integration_time: f64,
    /// Number of ions contributing signal.
    pub ion_count: f64,
    pub seed: u64,
    /// Apply Poisson shot noise after assembly.
    pub shot_noise: bool,
}

impl ScanConfig {
    pub fn detunings(&self) -> Result<Vec<f64>, ScanError> {
        if !(self.step > 0.0) {
            return Err(ScanError::InvalidGrid(format!("step {} must be > 0", self.step)));
        }
        if self.stop <= self.start {
            return Err(ScanError::InvalidGrid(format!(
                "stop {} must exceed start {}",
                self.stop, self.start
            )));
        }
        let n = ((self.stop - self.start) / self.step + 1.0 + 1e-9).floor() as usize;
        if n < 2 {
            return Err(ScanError::InvalidGrid("grid must cover at least 2 points".into()));
        }
        Ok((0..n).map(|i| self.start + i as f64 * self.step).collect())
    }

    /// Doppler shift of the dark line per unit velocity in the swept
    /// coordinate (Hz per m/s).
    pub fn sweep_doppler_slope(&self) -> f64 {
        let axis = Vector3::from(self.environment.velocity_axis);
        let slope = atomic::doppler_slope_hz_per_mps(
            self.system.lasers.b.dir(),
            self.system.lasers.r.dir(),
            self.system.lasers.c.dir(),
            axis,
        );
        match self.sweep {
            TransitionLabel::R | TransitionLabel::C => slope,
            TransitionLabel::B => -slope,
            TransitionLabel::Thz => unreachable!("THz transition is not driven"),
        }
    }

    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("scan config serialises");
        crate::digest::hex_digest(json.as_bytes())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub detuning_hz: f64,
    pub rate: f64,
    /// Shot-noise standard deviation of the rate (counts/s); 0 for
    /// noiseless spectra.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub index: usize,
    pub detuning_hz: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ScanDiagnostics {
    pub failed_points: Vec<PointFailure>,
    pub doppler_order: usize,
    pub field_order: usize,
    pub config_digest: String,
}

/// Ordered spectrum samples plus the configuration that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub points: Vec<SpectrumPoint>,
    pub config: ScanConfig,
    pub diagnostics: ScanDiagnostics,
}

impl Spectrum {
    pub fn detunings(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.detuning_hz).collect()
    }

    pub fn rates(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.rate).collect()
    }
}

/// Execution strategy for the point loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Execution::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            Execution::Sequential
        }
    }
}

/// Run a scan with the default execution strategy.
pub fn scan(config: &ScanConfig) -> Result<Spectrum, ScanError> {
    scan_with(config, Execution::default())
}

/// Run a scan with an explicit execution strategy. The output is identical
/// for every strategy.
pub fn scan_with(config: &ScanConfig, execution: Execution) -> Result<Spectrum, ScanError> {
    if config.integration_time <= 0.0 {
        return Err(ScanError::ZeroIntegrationTime(config.integration_time));
    }
    let detunings = config.detunings()?;

    // constant parts, built once
    let basis = config.system.basis();
    let dim = basis.dim();
    let jumps = config.system.jump_ops()?;
    let dissipator = liouvillian::dissipator_superop(&jumps, dim)?;
    let slope = config.sweep_doppler_slope();

    let evaluate = |(index, &detuning): (usize, &f64)| -> Result<f64, PointFailure> {
        point_rate(config, &dissipator, detuning, slope).map_err(|e| PointFailure {
            index,
            detuning_hz: detuning,
            message: e.to_string(),
        })
    };

    let results: Vec<Result<f64, PointFailure>> = match execution {
        Execution::Sequential => detunings.iter().enumerate().map(evaluate).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            detunings.par_iter().enumerate().map(evaluate).collect()
        }
    };

    let mut points = Vec::with_capacity(detunings.len());
    let mut failed = Vec::new();
    for (detuning, res) in detunings.iter().zip(results) {
        match res {
            Ok(rate) => points.push(SpectrumPoint { detuning_hz: *detuning, rate, sigma: 0.0 }),
            Err(failure) => {
                points.push(SpectrumPoint { detuning_hz: *detuning, rate: f64::NAN, sigma: f64::NAN });
                failed.push(failure);
            }
        }
    }

    let spectrum = Spectrum {
        points,
        diagnostics: ScanDiagnostics {
            failed_points: failed,
            doppler_order: config.averaging.doppler_order,
            field_order: config.averaging.field_order,
            config_digest: config.digest(),
        },
        config: config.clone(),
    };

    if config.shot_noise {
        add_shot_noise(&spectrum, config.seed).map_err(|e| ScanError::Io(e.to_string()))
    } else {
        Ok(spectrum)
    }
}

/// Noise-averaged rate (counts/s) at one grid point.
fn point_rate(
    config: &ScanConfig,
    dissipator: &nalgebra::DMatrix<num_complex::Complex64>,
    detuning: f64,
    doppler_slope: f64,
) -> Result<f64, ScanError> {
    let env = &config.environment;

    // innermost evaluation: one steady state for (detuning shift, field)
    let per_ion = |sweep_detuning: f64, b_field: f64| -> Result<f64, LindbladError> {
        let mut sys = config.system.clone();
        sys.lasers.get_mut(config.sweep).detuning = sweep_detuning;
        sys.b_field = b_field;
        sys.detection = Detection { efficiency: config.system.detection.efficiency, background: 0.0 };
        let h = sys.hamiltonian(None)?;
        let l = liouvillian::liouvillian_from_parts(&h.matrix, dissipator);
        let rho = steady_state(&l)?;
        Ok(crate::lindblad::fluorescence(&rho, &h.basis, &sys.rates, &sys.detection))
    };

    let failure = std::cell::RefCell::new(None::<LindbladError>);
    let field_avg = |v: f64| -> f64 {
        let shifted = detuning - doppler_slope * v;
        let eval_b = |b: f64| match per_ion(shifted, b) {
            Ok(r) => r,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        };
        match field_noise_average(
            &eval_b,
            config.system.b_field,
            env.b_short_pkpk,
            config.averaging.field_order,
            config.averaging.field_model,
        ) {
            Ok(r) => r,
            Err(_) => f64::NAN,
        }
    };

    let k_eff = atomic::effective_wavevector(
        config.system.lasers.b.dir(),
        config.system.lasers.r.dir(),
        config.system.lasers.c.dir(),
    )
    .dot(&Vector3::from(env.velocity_axis));

    let averaged = doppler_average(
        &field_avg,
        env.temperature,
        k_eff,
        crate::constants::mass_ca40(),
        config.averaging.doppler_order.max(3),
    )?;

    if let Some(e) = failure.into_inner() {
        return Err(ScanError::Lindblad(e));
    }
    Ok(config.ion_count * averaged + config.system.detection.background)
}
