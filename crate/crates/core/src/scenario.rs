//! Scenario files: the structured-text configuration consumed by the CLI.
//!
//! Every physical quantity carries an explicit unit suffix ("-18 MHz",
//! "10 mK", "0.4 mG", "570 counts/ms") and is normalised to SI on load.
//! Unknown keys are rejected.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::atomic::{self, TransitionLabel};
use crate::comb::{lock_to_frequency, CombConfig, LockedLaser};
use crate::constants::AtomicFrequencies;
use crate::lindblad::{Detection, LaserField, LaserTriple, Model, Rates, SystemParams};
use crate::spectroscopy::{AveragingConfig, Environment, FieldNoiseModel, ScanConfig};
use crate::units::{Dimension, Quantity, UnitError};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("scenario schema error: {0}")]
    Schema(#[from] toml::de::Error),
    #[error("{context}: {source}")]
    Units { context: String, source: UnitError },
    #[error("scenario error: {0}")]
    Invalid(String),
}

fn q(value: &Quantity, dim: Dimension, context: &str) -> Result<f64, ScenarioError> {
    value.value(dim).map_err(|source| ScenarioError::Units { context: context.to_string(), source })
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub model: ModelSection,
    pub lasers: LasersSection,
    pub scan: ScanSection,
    #[serde(default)]
    pub environment: EnvironmentSection,
    #[serde(default)]
    pub averaging: AveragingSection,
    #[serde(default)]
    pub rates: RatesSection,
    pub detection: DetectionSection,
    #[serde(default)]
    pub comb: Option<CombSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// "four-level" or "zeeman14".
    pub kind: String,
    /// Restrict the 4-level model to one Zeeman component, e.g. "13/5".
    #[serde(default)]
    pub zeeman_line: Option<String>,
    /// Residual pi-polarisation field amplitude of the repumper relative to
    /// sigma (zeeman14 only).
    #[serde(default)]
    pub pi_admixture: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LasersSection {
    pub b: LaserSection,
    pub r: LaserSection,
    pub c: LaserSection,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LaserSection {
    pub detuning: Quantity,
    /// Either a direct Rabi frequency...
    #[serde(default)]
    pub rabi: Option<Quantity>,
    /// ... or an optical power with a per-laser calibration constant.
    #[serde(default)]
    pub power_mw: Option<f64>,
    /// Calibration in Hz of Rabi frequency per sqrt(mW).
    #[serde(default)]
    pub rabi_per_sqrt_mw: Option<Quantity>,
    #[serde(default = "zero_hz")]
    pub linewidth: Quantity,
    #[serde(default = "x_axis")]
    pub direction: [f64; 3],
}

fn zero_hz() -> Quantity {
    Quantity::new("0 Hz")
}

fn x_axis() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    /// Swept laser: "b", "r" or "c".
    pub sweep: String,
    pub start: Quantity,
    pub stop: Quantity,
    pub step: Quantity,
    pub integration_time: Quantity,
    pub ion_count: f64,
    #[serde(default)]
    pub shot_noise: bool,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSection {
    #[serde(default = "zero_gauss")]
    pub b_mean: Quantity,
    #[serde(default = "zero_gauss")]
    pub b_short_pkpk: Quantity,
    #[serde(default = "zero_gauss")]
    pub b_long_pkpk: Quantity,
    #[serde(default = "zero_kelvin")]
    pub temperature: Quantity,
    #[serde(default = "x_axis")]
    pub velocity_axis: [f64; 3],
}

fn zero_gauss() -> Quantity {
    Quantity::new("0 G")
}

fn zero_kelvin() -> Quantity {
    Quantity::new("0 K")
}

impl Default for EnvironmentSection {
    fn default() -> Self {
        EnvironmentSection {
            b_mean: zero_gauss(),
            b_short_pkpk: zero_gauss(),
            b_long_pkpk: zero_gauss(),
            temperature: zero_kelvin(),
            velocity_axis: x_axis(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AveragingSection {
    pub doppler_order: usize,
    pub field_order: usize,
    /// "uniform" or "gaussian".
    pub field_model: String,
}

impl Default for AveragingSection {
    fn default() -> Self {
        AveragingSection { doppler_order: 16, field_order: 7, field_model: "uniform".into() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RatesSection {
    /// P1/2 lifetime; the default corresponds to the constants table.
    #[serde(default)]
    pub tau_p: Option<Quantity>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default = "default_true")]
    pub metastable_decay: bool,
    #[serde(default)]
    pub tau_d32: Option<Quantity>,
    #[serde(default)]
    pub tau_d52: Option<Quantity>,
}

fn default_true() -> bool {
    true
}

impl Default for RatesSection {
    fn default() -> Self {
        RatesSection {
            tau_p: None,
            beta: None,
            metastable_decay: true,
            tau_d32: None,
            tau_d52: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DetectionSection {
    pub efficiency: f64,
    pub background: Quantity,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CombSection {
    pub f_rep: Quantity,
    pub sigma_rep: Quantity,
    pub wavemeter_accuracy: Quantity,
    /// Override of the THz reference value.
    #[serde(default)]
    pub f_dd: Option<Quantity>,
    /// Explicit lock table; derived from the atomic frequencies and the
    /// detunings when absent.
    #[serde(default)]
    pub locks: Option<LockTable>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LockTable {
    pub b: LockEntry,
    pub r: LockEntry,
    pub c: LockEntry,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LockEntry {
    pub mode_index: i64,
    pub beat: Quantity,
    #[serde(default = "one")]
    pub shg_factor: u8,
}

fn one() -> u8 {
    1
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Scenario, ScenarioError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Scenario, ScenarioError> {
        Scenario::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn model(&self) -> Result<Model, ScenarioError> {
        let line = match &self.model.zeeman_line {
            Some(s) => Some(atomic::parse_m_thz(s).ok_or_else(|| {
                ScenarioError::Invalid(format!("cannot parse zeeman_line {s:?}"))
            })?),
            None => None,
        };
        match self.model.kind.as_str() {
            "four-level" => Ok(Model::FourLevel { line }),
            "zeeman14" => Ok(Model::Zeeman14 {
                pi_admixture: self.model.pi_admixture,
                restrict_to_line: None,
            }),
            other => Err(ScenarioError::Invalid(format!(
                "model.kind must be \"four-level\" or \"zeeman14\", got {other:?}"
            ))),
        }
    }

    fn laser(&self, label: TransitionLabel) -> Result<LaserField, ScenarioError> {
        let (section, name) = match label {
            TransitionLabel::B => (&self.lasers.b, "lasers.b"),
            TransitionLabel::R => (&self.lasers.r, "lasers.r"),
            TransitionLabel::C => (&self.lasers.c, "lasers.c"),
            TransitionLabel::Thz => unreachable!(),
        };
        let rabi = match (&section.rabi, section.power_mw, &section.rabi_per_sqrt_mw) {
            (Some(r), None, None) => q(r, Dimension::Frequency, &format!("{name}.rabi"))?,
            (None, Some(p), Some(cal)) => {
                if p < 0.0 {
                    return Err(ScenarioError::Invalid(format!("{name}.power_mw negative")));
                }
                q(cal, Dimension::Frequency, &format!("{name}.rabi_per_sqrt_mw"))? * p.sqrt()
            }
            _ => {
                return Err(ScenarioError::Invalid(format!(
                    "{name}: give either rabi, or power_mw with rabi_per_sqrt_mw"
                )))
            }
        };
        Ok(LaserField {
            label,
            detuning: q(&section.detuning, Dimension::Frequency, &format!("{name}.detuning"))?,
            rabi,
            linewidth: q(&section.linewidth, Dimension::Frequency, &format!("{name}.linewidth"))?,
            direction: section.direction,
        })
    }

    pub fn lasers(&self) -> Result<LaserTriple, ScenarioError> {
        Ok(LaserTriple {
            b: self.laser(TransitionLabel::B)?,
            r: self.laser(TransitionLabel::R)?,
            c: self.laser(TransitionLabel::C)?,
        })
    }

    pub fn rates(&self) -> Result<Rates, ScenarioError> {
        let mut rates = Rates { metastable_decay: self.rates.metastable_decay, ..Rates::default() };
        if let Some(tau) = &self.rates.tau_p {
            rates.gamma_p = 1.0 / q(tau, Dimension::Time, "rates.tau_p")?;
        }
        if let Some(beta) = self.rates.beta {
            if !(0.0..=1.0).contains(&beta) {
                return Err(ScenarioError::Invalid("rates.beta must be in [0, 1]".into()));
            }
            rates.beta = beta;
        }
        if let Some(tau) = &self.rates.tau_d32 {
            rates.gamma_d32 = 1.0 / q(tau, Dimension::Time, "rates.tau_d32")?;
        }
        if let Some(tau) = &self.rates.tau_d52 {
            rates.gamma_d52 = 1.0 / q(tau, Dimension::Time, "rates.tau_d52")?;
        }
        Ok(rates)
    }

    pub fn sweep_label(&self) -> Result<TransitionLabel, ScenarioError> {
        match self.scan.sweep.as_str() {
            "b" | "B" => Ok(TransitionLabel::B),
            "r" | "R" => Ok(TransitionLabel::R),
            "c" | "C" => Ok(TransitionLabel::C),
            other => Err(ScenarioError::Invalid(format!(
                "scan.sweep must be b, r or c, got {other:?}"
            ))),
        }
    }

    pub fn to_scan_config(&self) -> Result<ScanConfig, ScenarioError> {
        let field_model = match self.averaging.field_model.as_str() {
            "uniform" => FieldNoiseModel::Uniform,
            "gaussian" => FieldNoiseModel::Gaussian,
            other => {
                return Err(ScenarioError::Invalid(format!(
                    "averaging.field_model must be uniform or gaussian, got {other:?}"
                )))
            }
        };
        Ok(ScanConfig {
            system: SystemParams {
                model: self.model()?,
                lasers: self.lasers()?,
                b_field: q(&self.environment.b_mean, Dimension::MagneticField, "environment.b_mean")?,
                rates: self.rates()?,
                detection: Detection {
                    efficiency: self.detection.efficiency,
                    background: q(
                        &self.detection.background,
                        Dimension::CountRate,
                        "detection.background",
                    )?,
                },
            },
            sweep: self.sweep_label()?,
            start: q(&self.scan.start, Dimension::Frequency, "scan.start")?,
            stop: q(&self.scan.stop, Dimension::Frequency, "scan.stop")?,
            step: q(&self.scan.step, Dimension::Frequency, "scan.step")?,
            environment: Environment {
                temperature: q(
                    &self.environment.temperature,
                    Dimension::Temperature,
                    "environment.temperature",
                )?,
                b_short_pkpk: q(
                    &self.environment.b_short_pkpk,
                    Dimension::MagneticField,
                    "environment.b_short_pkpk",
                )?,
                b_long_pkpk: q(
                    &self.environment.b_long_pkpk,
                    Dimension::MagneticField,
                    "environment.b_long_pkpk",
                )?,
                velocity_axis: self.environment.velocity_axis,
            },
            averaging: AveragingConfig {
                doppler_order: self.averaging.doppler_order,
                field_order: self.averaging.field_order,
                field_model,
            },
            integration_time: q(
                &self.scan.integration_time,
                Dimension::Time,
                "scan.integration_time",
            )?,
            ion_count: self.scan.ion_count,
            seed: self.scan.seed,
            shot_noise: self.scan.shot_noise,
        })
    }

    /// THz reference value: scenario override or the constants-table value.
    pub fn f_dd(&self) -> Result<f64, ScenarioError> {
        match self.comb.as_ref().and_then(|c| c.f_dd.as_ref()) {
            Some(v) => q(v, Dimension::Frequency, "comb.f_dd"),
            None => Ok(crate::constants::f_dd()),
        }
    }

    /// Absolute atomic frequencies consistent with the configured f_DD.
    pub fn atomic_frequencies(&self) -> Result<AtomicFrequencies, ScenarioError> {
        Ok(AtomicFrequencies::with_f_dd(self.f_dd()?))
    }

    /// The comb and the three locks. Without an explicit lock table the
    /// locks are derived from the atomic frequencies plus the configured
    /// detunings (the synthetic frequency chain).
    pub fn comb_setup(&self) -> Result<Option<(CombConfig, [LockedLaser; 3])>, ScenarioError> {
        let Some(section) = &self.comb else { return Ok(None) };
        let comb = CombConfig {
            f_rep: q(&section.f_rep, Dimension::Frequency, "comb.f_rep")?,
            sigma_rep: q(&section.sigma_rep, Dimension::Frequency, "comb.sigma_rep")?,
            offset: 0.0,
            wavemeter_accuracy: q(
                &section.wavemeter_accuracy,
                Dimension::Frequency,
                "comb.wavemeter_accuracy",
            )?,
        };
        let locks = match &section.locks {
            Some(table) => {
                let entry = |e: &LockEntry, label, name: &str| -> Result<LockedLaser, ScenarioError> {
                    Ok(LockedLaser {
                        label,
                        mode_index: e.mode_index,
                        beat: q(&e.beat, Dimension::Frequency, &format!("comb.locks.{name}.beat"))?,
                        shg_factor: e.shg_factor,
                    })
                };
                [
                    entry(&table.b, TransitionLabel::B, "b")?,
                    entry(&table.r, TransitionLabel::R, "r")?,
                    entry(&table.c, TransitionLabel::C, "c")?,
                ]
            }
            None => {
                let freqs = self.atomic_frequencies()?;
                let lasers = self.lasers()?;
                let mk = |label, f0: f64, detuning: f64, shg| {
                    lock_to_frequency(label, f0 + detuning, shg, &comb)
                        .map_err(|e| ScenarioError::Invalid(e.to_string()))
                };
                [
                    mk(TransitionLabel::B, freqs.f_ps, lasers.b.detuning, 2)?,
                    mk(TransitionLabel::R, freqs.f_pd, lasers.r.detuning, 1)?,
                    mk(TransitionLabel::C, freqs.f_qs, lasers.c.detuning, 1)?,
                ]
            }
        };
        Ok(Some((comb, locks)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const EXAMPLE: &str = r#"
[model]
kind = "zeeman14"

[lasers.b]
detuning = "-18 MHz"
rabi = "5 MHz"

[lasers.r]
detuning = "0 MHz"
rabi = "1.5 MHz"
linewidth = "0 Hz"

[lasers.c]
detuning = "4 MHz"
power_mw = 12.1
rabi_per_sqrt_mw = "115 kHz"

[scan]
sweep = "r"
start = "-23 MHz"
stop = "-21.2 MHz"
step = "10 kHz"
integration_time = "150 ms"
ion_count = 560
shot_noise = true
seed = 42

[environment]
b_mean = "1 G"
b_short_pkpk = "6 mG"
temperature = "10 mK"

[detection]
efficiency = 1e-4
background = "570 counts/ms"

[comb]
f_rep = "80 MHz"
sigma_rep = "1.5 mHz"
wavemeter_accuracy = "10 MHz"
"#;

    #[test]
    fn example_scenario_parses() {
        let s = Scenario::from_toml(EXAMPLE).unwrap();
        let config = s.to_scan_config().unwrap();
        assert_eq!(config.start, -23e6);
        assert_eq!(config.step, 10e3);
        assert_eq!(config.system.b_field, 1e-4);
        assert_eq!(config.environment.b_short_pkpk, 6e-7);
        assert_eq!(config.integration_time, 0.15);
        // power calibration: 115 kHz * sqrt(12.1)
        approx::assert_relative_eq!(
            config.system.lasers.c.rabi,
            115e3 * 12.1f64.sqrt(),
            max_relative = 1e-12
        );
        let (comb, locks) = s.comb_setup().unwrap().unwrap();
        assert_eq!(comb.f_rep, 80e6);
        assert_eq!(locks[0].shg_factor, 2);
        assert!(locks[0].mode_index > 4_000_000);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = EXAMPLE.replace("[detection]", "[detection]\nunknown_key = 3");
        assert!(matches!(Scenario::from_toml(&bad), Err(ScenarioError::Schema(_))));
    }

    #[test]
    fn missing_units_are_rejected() {
        let bad = EXAMPLE.replace("step = \"10 kHz\"", "step = \"10\"");
        let s = Scenario::from_toml(&bad).unwrap();
        assert!(matches!(s.to_scan_config(), Err(ScenarioError::Units { .. })));
    }

    #[test]
    fn empty_file_is_a_schema_error() {
        assert!(matches!(Scenario::from_toml(""), Err(ScenarioError::Schema(_))));
    }
}
