//! Weighted linear regression of dark-line centres against their m_THz
//! labels; the slope measures the magnetic field.

use num::rational::Ratio;

use super::FitError;
use crate::atomic::ratio_to_f64;
use crate::constants;

#[derive(Debug, Clone, PartialEq)]
pub struct ZeemanFit {
    /// Estimated field (T) from the slope mu_B B / h.
    pub b_estimate: f64,
    pub b_sigma: f64,
    /// Unshifted line centre (Hz).
    pub intercept: f64,
    pub intercept_sigma: f64,
    /// Slope in Hz per unit m_THz.
    pub slope: f64,
    pub slope_sigma: f64,
    /// Per-line residuals (Hz), in input order.
    pub residuals: Vec<f64>,
}

impl ZeemanFit {
    /// Zeeman shift of a given line under the fitted field (Hz), with its
    /// 1-sigma uncertainty.
    pub fn zeeman_shift_of(&self, m_thz: Ratio<i64>) -> (f64, f64) {
        let m = ratio_to_f64(m_thz);
        (m * self.slope, m.abs() * self.slope_sigma)
    }
}

/// Weighted least squares of center = intercept + m_thz * (mu_B/h) * B.
pub fn zeeman_linear_fit(lines: &[(Ratio<i64>, f64, f64)]) -> Result<ZeemanFit, FitError> {
    if lines.len() < 2 {
        return Err(FitError::RankDeficient("need at least two lines".into()));
    }
    let distinct = {
        let mut labels: Vec<Ratio<i64>> = lines.iter().map(|l| l.0).collect();
        labels.sort();
        labels.dedup();
        labels.len()
    };
    if distinct < 2 {
        return Err(FitError::RankDeficient("all lines share one m_THz label".into()));
    }

    let (mut s, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(m, y, sig) in lines {
        let w = if sig > 0.0 { 1.0 / (sig * sig) } else { 1.0 };
        let x = ratio_to_f64(m);
        s += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let det = s * sxx - sx * sx;
    if det.abs() <= f64::EPSILON * s * sxx {
        return Err(FitError::RankDeficient("degenerate design matrix".into()));
    }
    let intercept = (sxx * sy - sx * sxy) / det;
    let slope = (s * sxy - sx * sy) / det;
    let intercept_sigma = (sxx / det).sqrt();
    let slope_sigma = (s / det).sqrt();

    let residuals = lines
        .iter()
        .map(|&(m, y, _)| y - intercept - slope * ratio_to_f64(m))
        .collect();

    let mu = constants::mu_b_over_h();
    Ok(ZeemanFit {
        b_estimate: slope / mu,
        b_sigma: slope_sigma / mu,
        intercept,
        intercept_sigma,
        slope,
        slope_sigma,
        residuals,
    })
}
