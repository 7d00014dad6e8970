//! Frequency-comb bookkeeping: mode-index resolution from wavemeter
//! readings, absolute laser frequencies from lock parameters, and the
//! propagation of repetition-rate uncertainty to the lasers and to the
//! three-photon combination.
//!
//! Mode indices sit near 5e6 and carry Hz-level consequences, so all index
//! arithmetic is done in integers (milli-hertz resolution), never by
//! floating-point division alone.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::atomic::TransitionLabel;

#[derive(Debug, Error, PartialEq)]
pub enum CombError {
    #[error("wavemeter accuracy {accuracy} Hz >= f_rep/2 = {half_frep} Hz: mode index ambiguous")]
    AmbiguousIndex { accuracy: f64, half_frep: f64 },
    #[error("beat note {beat} Hz outside (-f_rep/2, +f_rep/2]")]
    BeatOutOfRange { beat: f64 },
    #[error("repetition rate must be positive")]
    NonPositiveFrep,
}

/// Offset-free comb parameters. Frequencies in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombConfig {
    pub f_rep: f64,
    /// 1-sigma repetition-rate uncertainty.
    pub sigma_rep: f64,
    /// Carrier-envelope offset; zero for the difference-frequency scheme.
    #[serde(default)]
    pub offset: f64,
    pub wavemeter_accuracy: f64,
}

/// A laser phase-locked to one comb mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LockedLaser {
    pub label: TransitionLabel,
    /// Index of the closest comb eigen-mode at the fundamental wavelength.
    pub mode_index: i64,
    /// Beat note against that mode, bounded by +-f_rep/2 (Hz).
    pub beat: f64,
    /// 2 when the delivered light is the second harmonic of the locked
    /// fundamental (the 397 nm beam locked at 794 nm), else 1.
    pub shg_factor: u8,
}

/// Result of a mode-index determination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeIndex {
    pub index: i64,
    /// Distance of the reading from the nearest half-integer multiple of
    /// f_rep (Hz); the margin against mis-assignment.
    pub ambiguity_margin: f64,
}

/// Resolve the comb mode index N = round(f / f_rep) from a wavemeter
/// reading, in integer milli-hertz arithmetic.
pub fn mode_index(wavemeter_freq: f64, comb: &CombConfig) -> Result<ModeIndex, CombError> {
    if comb.f_rep <= 0.0 {
        return Err(CombError::NonPositiveFrep);
    }
    if comb.wavemeter_accuracy >= comb.f_rep / 2.0 {
        return Err(CombError::AmbiguousIndex {
            accuracy: comb.wavemeter_accuracy,
            half_frep: comb.f_rep / 2.0,
        });
    }
    let f_mhz = ((wavemeter_freq - comb.offset) * 1e3).round() as i128;
    let rep_mhz = (comb.f_rep * 1e3).round() as i128;
    let index = div_round_nearest(f_mhz, rep_mhz);
    let residual = f_mhz - index * rep_mhz;
    let margin = comb.f_rep / 2.0 - (residual.unsigned_abs() as f64 * 1e-3) + 0.0;
    Ok(ModeIndex { index: index as i64, ambiguity_margin: margin })
}

fn div_round_nearest(n: i128, d: i128) -> i128 {
    debug_assert!(d > 0);
    if n >= 0 {
        (n + d / 2) / d
    } else {
        -((-n + d / 2) / d)
    }
}

/// Absolute delivered frequency: shg_factor * (N f_rep + offset + beat).
pub fn laser_frequency(laser: &LockedLaser, comb: &CombConfig) -> Result<f64, CombError> {
    if laser.beat.abs() > comb.f_rep / 2.0 {
        return Err(CombError::BeatOutOfRange { beat: laser.beat });
    }
    Ok(f64::from(laser.shg_factor)
        * (laser.mode_index as f64 * comb.f_rep + comb.offset + laser.beat))
}

/// 1-sigma frequency uncertainty of one locked laser: shg * N * sigma_rep.
pub fn frequency_uncertainty(laser: &LockedLaser, comb: &CombConfig) -> f64 {
    f64::from(laser.shg_factor) * laser.mode_index as f64 * comb.sigma_rep
}

/// Effective mode index entering the three-photon combination (the SHG
/// factor doubles the fundamental index).
pub fn effective_index(laser: &LockedLaser) -> i64 {
    i64::from(laser.shg_factor) * laser.mode_index
}

/// Uncertainty of the THz combination omega_R + omega_C - omega_B:
/// |N_B_eff - N_R - N_C| * sigma_rep. The index difference equals
/// round(f_THz / f_rep) when the three locks satisfy the resonance
/// combination.
pub fn combined_thz_uncertainty(
    laser_b: &LockedLaser,
    laser_r: &LockedLaser,
    laser_c: &LockedLaser,
    comb: &CombConfig,
) -> f64 {
    let diff = effective_index(laser_b) - effective_index(laser_r) - effective_index(laser_c);
    diff.unsigned_abs() as f64 * comb.sigma_rep
}

/// Build a lock table from absolute target frequencies: picks the mode index
/// and beat reproducing each frequency exactly.
pub fn lock_to_frequency(
    label: TransitionLabel,
    delivered_freq: f64,
    shg_factor: u8,
    comb: &CombConfig,
) -> Result<LockedLaser, CombError> {
    let fundamental = delivered_freq / f64::from(shg_factor);
    let idx = mode_index(fundamental, comb)?;
    let beat = fundamental - comb.offset - idx.index as f64 * comb.f_rep;
    Ok(LockedLaser { label, mode_index: idx.index, beat, shg_factor })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants;
    use approx::assert_relative_eq;

    fn comb() -> CombConfig {
        CombConfig { f_rep: 80e6, sigma_rep: 1.5e-3, offset: 0.0, wavemeter_accuracy: 10e6 }
    }

    #[test]
    fn index_from_wavemeter_reading() {
        // 729 nm laser: direct arithmetic c / lambda / f_rep
        let f = constants::speed_of_light() / 729.147e-9;
        let n = mode_index(f, &comb()).unwrap();
        let expected = (f / 80e6).round() as i64;
        assert_eq!(n.index, expected);
        assert!(n.index > 5_000_000 && n.index < 5_200_000);

        // exact multiple: margin is f_rep / 2
        let n = mode_index(5_000_000.0 * 80e6, &comb()).unwrap();
        assert_eq!(n.index, 5_000_000);
        assert_relative_eq!(n.ambiguity_margin, 40e6);
    }

    #[test]
    fn ambiguity_precondition() {
        let mut c = comb();
        c.wavemeter_accuracy = 50e6;
        assert!(matches!(mode_index(1e14, &c), Err(CombError::AmbiguousIndex { .. })));
    }

    #[test]
    fn frequency_assembly_and_roundtrip() {
        let l = LockedLaser { label: TransitionLabel::C, mode_index: 5_000_000, beat: 1e6, shg_factor: 1 };
        assert_relative_eq!(laser_frequency(&l, &comb()).unwrap(), 400.000001e12, max_relative = 1e-12);

        // shg doubles both frequency and uncertainty
        let l2 = LockedLaser { shg_factor: 2, ..l };
        assert_relative_eq!(
            laser_frequency(&l2, &comb()).unwrap(),
            2.0 * laser_frequency(&l, &comb()).unwrap()
        );
        assert_relative_eq!(
            frequency_uncertainty(&l2, &comb()),
            2.0 * frequency_uncertainty(&l, &comb())
        );

        // mode_index recovers N from the assembled frequency
        let f = laser_frequency(&l, &comb()).unwrap();
        assert_eq!(mode_index(f, &comb()).unwrap().index, l.mode_index);
    }

    #[test]
    fn per_laser_uncertainty_scale() {
        let f_c = constants::speed_of_light() / constants::lambda_c();
        let n_c = mode_index(f_c, &comb()).unwrap().index;
        let l = LockedLaser { label: TransitionLabel::C, mode_index: n_c, beat: 0.0, shg_factor: 1 };
        let u = frequency_uncertainty(&l, &comb());
        assert_relative_eq!(u, 7.7e3, max_relative = 2e-2);

        // SHG-doubled 794 nm laser
        let f_794 = constants::speed_of_light() / 794e-9;
        let n_b = mode_index(f_794, &comb()).unwrap().index;
        let lb = LockedLaser { label: TransitionLabel::B, mode_index: n_b, beat: 0.0, shg_factor: 2 };
        assert_relative_eq!(frequency_uncertainty(&lb, &comb()), 14.2e3, max_relative = 2e-2);
    }

    #[test]
    fn combined_uncertainty_is_34_hz() {
        let freqs = constants::AtomicFrequencies::from_table();
        let c = comb();
        let lb = lock_to_frequency(TransitionLabel::B, freqs.f_ps, 2, &c).unwrap();
        let lr = lock_to_frequency(TransitionLabel::R, freqs.f_pd, 1, &c).unwrap();
        let lc = lock_to_frequency(TransitionLabel::C, freqs.f_qs, 1, &c).unwrap();
        let u = combined_thz_uncertainty(&lb, &lr, &lc, &c);
        // the SHG-doubled beat can fold up to two repetition rates into the
        // index combination, shifting it by +-2 at the mHz level
        let expected = (constants::f_dd() / 80e6).round() * 1.5e-3;
        assert!((u - expected).abs() <= 2.0 * c.sigma_rep, "u {u} vs {expected}");
        assert!((u - 34.1).abs() < 0.1, "u {u}");

        // sigma_rep = 0 kills the budget
        let c0 = CombConfig { sigma_rep: 0.0, ..c };
        assert_eq!(combined_thz_uncertainty(&lb, &lr, &lc, &c0), 0.0);
    }
}
