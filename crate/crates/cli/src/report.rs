//! Report records written by `fit` and `reference`.

use serde::{Deserialize, Serialize};

use cpt_core::analysis::FitResult;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitRecord {
    /// Zeeman line label like "13/5" when identified.
    pub m_thz: Option<String>,
    #[serde(flatten)]
    pub fit: FitResult,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub config_digest: String,
    pub version: String,
    /// Detunings are in the swept-laser coordinate (Hz).
    pub sweep: String,
    pub records: Vec<FitRecord>,
    pub skipped_windows: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReferenceLine {
    pub m_thz: String,
    pub center_hz: f64,
    pub center_sigma_hz: f64,
    /// omega_R^c + omega_C - omega_B.
    pub delta_rcb_hz: f64,
    pub delta_z_hz: f64,
    pub delta_z_sigma_hz: f64,
    /// delta_rcb - delta_z - f_dd.
    pub delta_f_hz: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CombBudgetReport {
    pub f_rep_hz: f64,
    pub sigma_rep_hz: f64,
    pub lasers: Vec<CombLaserBudget>,
    pub combined_index: i64,
    pub combined_uncertainty_hz: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CombLaserBudget {
    pub label: String,
    pub mode_index: i64,
    pub beat_hz: f64,
    pub shg_factor: u8,
    pub frequency_hz: f64,
    pub uncertainty_hz: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReferenceReport {
    pub config_digest: String,
    pub f_dd_hz: f64,
    /// Field estimate used for the Zeeman shifts (T) and how it was
    /// obtained ("zeeman-fit" or "scenario").
    pub b_estimate_tesla: f64,
    pub b_sigma_tesla: f64,
    pub b_source: String,
    pub lines: Vec<ReferenceLine>,
    pub comb: Option<CombBudgetReport>,
    pub warnings: Vec<String>,
}
