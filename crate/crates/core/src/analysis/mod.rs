//! Spectroscopic analysis chain: dark-line detection, Lorentzian dip fits
//! with uncertainties, the Zeeman-ladder field regression and the
//! THz-referenced shift arithmetic.

pub mod lorentzian;
pub mod zeeman_fit;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectroscopy::Spectrum;
pub use lorentzian::LorentzianFit;
pub use zeeman_fit::{zeeman_linear_fit, ZeemanFit};

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("fit window has {points} points, need at least {min}")]
    WindowTooSmall { points: usize, min: usize },
    #[error("singular Jacobian: the model is degenerate on this window")]
    SingularJacobian,
    #[error("fit did not converge")]
    NotConverged,
    #[error("rank-deficient regression: {0}")]
    RankDeficient(String),
    #[error("contrast undefined: baseline {baseline} does not exceed background {background}")]
    UndefinedContrast { baseline: f64, background: f64 },
    #[error("window narrower than half the fitted width")]
    WindowNarrowerThanLine,
}

/// A detected dark-line window on the spectrum grid (inclusive indices).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub start: usize,
    pub end: usize,
    /// Index of the deepest point.
    pub minimum: usize,
    /// Set when the window contains more than one resolved minimum.
    pub blended: bool,
}

impl Window {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }
}

/// Complete result of one dark-line fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub center: f64,
    pub fwhm: f64,
    /// Dip depth relative to the fitted baseline above the stray-light
    /// background recorded in the spectrum configuration.
    pub contrast: f64,
    pub baseline: f64,
    pub depth: f64,
    pub center_sigma: f64,
    pub fwhm_sigma: f64,
    pub depth_sigma: f64,
    pub baseline_sigma: f64,
    /// Row-major 4x4 covariance over (baseline, depth, center, fwhm).
    pub covariance: Vec<f64>,
    pub residual_rms: f64,
    pub converged: bool,
    /// Residuals exceed the expected noise floor: the profile deviates from
    /// a plain Lorentzian (e.g. Doppler-dominated Voigt shapes).
    pub model_mismatch: bool,
    pub window: Window,
}

/// Rolling-median baseline estimate.
fn rolling_baseline(y: &[f64], half_width: usize) -> Vec<f64> {
    let n = y.len();
    let mut out = Vec::with_capacity(n);
    let mut buf = Vec::new();
    for i in 0..n {
        let lo = i.saturating_sub(half_width);
        let hi = (i + half_width).min(n - 1);
        buf.clear();
        buf.extend(y[lo..=hi].iter().copied().filter(|v| v.is_finite()));
        if buf.is_empty() {
            out.push(f64::NAN);
            continue;
        }
        buf.sort_by(f64::total_cmp);
        out.push(buf[buf.len() / 2]);
    }
    out
}

/// Robust global noise estimate from first differences.
fn noise_estimate(y: &[f64]) -> f64 {
    let mut diffs: Vec<f64> = y
        .windows(2)
        .filter(|w| w[0].is_finite() && w[1].is_finite())
        .map(|w| (w[1] - w[0]).abs())
        .collect();
    if diffs.is_empty() {
        return 0.0;
    }
    diffs.sort_by(f64::total_cmp);
    let mad = diffs[diffs.len() / 2];
    // |delta| median of a Gaussian difference: 0.6745 sqrt(2) sigma
    mad / (0.6745 * std::f64::consts::SQRT_2)
}

/// Find disjoint windows around local minima deeper than
/// `min_depth_sigma` times the shot noise below a rolling baseline.
pub fn detect_dark_lines(spectrum: &Spectrum, min_depth_sigma: f64) -> Vec<Window> {
    let y = spectrum.rates();
    let n = y.len();
    if n < 20 {
        return Vec::new();
    }
    let baseline = rolling_baseline(&y, (n / 8).max(10));
    let global_sigma = noise_estimate(&y);

    let sigma_at = |i: usize| -> f64 {
        let s = spectrum.points[i].sigma;
        if s > 0.0 {
            s
        } else if global_sigma > 0.0 {
            global_sigma
        } else {
            // noiseless spectrum: depth threshold relative to the baseline
            1e-6 * baseline[i].abs().max(f64::MIN_POSITIVE)
        }
    };

    // contiguous runs below threshold
    let deep: Vec<bool> = (0..n)
        .map(|i| {
            y[i].is_finite() && baseline[i].is_finite()
                && baseline[i] - y[i] > min_depth_sigma * sigma_at(i)
        })
        .collect();
    let mut segments: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < n {
        if deep[i] {
            let start = i;
            while i + 1 < n && deep[i + 1] {
                i += 1;
            }
            segments.push((start, i));
        }
        i += 1;
    }

    // noisy line edges fragment the run: bridge short gaps, then discard
    // isolated excursions too short to be a line
    const MERGE_GAP: usize = 25;
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for seg in segments {
        match merged.last_mut() {
            Some(last) if seg.0 - last.1 <= MERGE_GAP => last.1 = seg.1,
            _ => merged.push(seg),
        }
    }
    merged.retain(|(s, e)| e - s + 1 >= 3);

    // pad each segment for baseline room; overlapping windows merge
    let mut windows: Vec<Window> = Vec::new();
    for (start, end) in merged {
        let width = end - start + 1;
        let pad = (width / 2).max(8);
        let w_start = start.saturating_sub(pad);
        let w_end = (end + pad).min(n - 1);
        let minimum = (start..=end)
            .filter(|&i| y[i].is_finite())
            .min_by(|&a, &b| y[a].total_cmp(&y[b]))
            .unwrap_or(start);
        let blended = prominent_minima(&y, &baseline, start, end, &sigma_at) > 1;
        match windows.last_mut() {
            Some(last) if w_start <= last.end => {
                last.end = w_end;
                last.blended = true;
                if y[minimum] < y[last.minimum] {
                    last.minimum = minimum;
                }
            }
            _ => windows.push(Window { start: w_start, end: w_end, minimum, blended }),
        }
    }
    windows
}

/// Count the sub-minima of a below-threshold segment that are separated by
/// a rise of at least max(3 sigma, 15 % of the segment depth); more than
/// one marks the window as a blend of unresolved lines.
fn prominent_minima(
    y: &[f64],
    baseline: &[f64],
    start: usize,
    end: usize,
    sigma_at: &dyn Fn(usize) -> f64,
) -> usize {
    let depth: Vec<f64> = (start..=end)
        .map(|i| if y[i].is_finite() { baseline[i] - y[i] } else { 0.0 })
        .collect();
    let max_depth = depth.iter().cloned().fold(0.0f64, f64::max);
    let prominence = (3.0 * sigma_at(start + depth.len() / 2)).max(0.15 * max_depth);
    let mut count = 0;
    let mut tracking_max = f64::NEG_INFINITY;
    let mut active = true;
    for &d in &depth {
        if active {
            tracking_max = tracking_max.max(d);
            if tracking_max - d > prominence {
                count += 1;
                active = false;
                tracking_max = d;
            }
        } else {
            // in a valley: arm again once depth recovers
            tracking_max = tracking_max.min(d);
            if d - tracking_max > prominence {
                active = true;
            }
        }
    }
    if active && tracking_max > prominence {
        count += 1;
    }
    count.max(1)
}

/// Fit a Lorentzian dip on a window of the spectrum.
pub fn fit_lorentzian(
    spectrum: &Spectrum,
    window: &Window,
    guess: Option<[f64; 4]>,
) -> Result<FitResult, FitError> {
    let pts = &spectrum.points[window.start..=window.end];
    let x: Vec<f64> = pts.iter().map(|p| p.detuning_hz).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.rate).collect();
    let sigmas: Vec<f64> = pts.iter().map(|p| p.sigma).collect();
    let have_sigma = sigmas.iter().any(|&s| s > 0.0);
    let fit = lorentzian::fit(
        &x,
        &y,
        if have_sigma { Some(&sigmas) } else { None },
        guess.map(|g| nalgebra::Vector4::new(g[0], g[1], g[2], g[3])),
    )?;
    if !fit.converged {
        return Err(FitError::NotConverged);
    }
    let span = x[x.len() - 1] - x[0];
    if span < fit.fwhm / 2.0 {
        return Err(FitError::WindowNarrowerThanLine);
    }

    // model-mismatch flag: residuals well above the noise floor
    let noise_floor = if have_sigma {
        let mean_var: f64 =
            sigmas.iter().map(|s| s * s).sum::<f64>() / sigmas.len() as f64;
        mean_var.sqrt()
    } else {
        noise_estimate(&y)
    };
    let model_mismatch = noise_floor > 0.0 && fit.residual_rms > 3.0 * noise_floor;

    let background = spectrum.config.system.detection.background;
    let contrast = if fit.baseline > background {
        (fit.depth / (fit.baseline - background)).clamp(0.0, 1.0)
    } else {
        f64::NAN
    };

    Ok(FitResult {
        center: fit.center,
        fwhm: fit.fwhm,
        contrast,
        baseline: fit.baseline,
        depth: fit.depth,
        center_sigma: fit.center_sigma,
        fwhm_sigma: fit.fwhm_sigma,
        depth_sigma: fit.depth_sigma,
        baseline_sigma: fit.baseline_sigma,
        covariance: fit.covariance.iter().copied().collect(),
        residual_rms: fit.residual_rms,
        converged: fit.converged,
        model_mismatch,
        window: window.clone(),
    })
}

/// Fit every detected dark line.
pub fn fit_all_lines(
    spectrum: &Spectrum,
    min_depth_sigma: f64,
) -> Vec<(Window, Result<FitResult, FitError>)> {
    detect_dark_lines(spectrum, min_depth_sigma)
        .into_iter()
        .map(|w| {
            let fit = fit_lorentzian(spectrum, &w, None);
            (w, fit)
        })
        .collect()
}

/// THz-referenced shift of a fitted line:
/// delta_f = (center + omega_C - omega_B) - delta_Z - f_DD.
pub fn thz_shift(center: f64, omega_c: f64, omega_b: f64, delta_z: f64, f_dd: f64) -> f64 {
    center + omega_c - omega_b - delta_z - f_dd
}

/// FWHM and contrast of a converged fit against an explicit background.
pub fn line_metrics(fit: &FitResult, background: f64) -> Result<(f64, f64), FitError> {
    if fit.baseline <= background {
        return Err(FitError::UndefinedContrast { baseline: fit.baseline, background });
    }
    Ok((fit.fwhm, fit.depth / (fit.baseline - background)))
}

/// Signal-to-noise ratio of a dip of the given contrast at shot-noise
/// limited counting: contrast * rate * t / sqrt(rate * t).
pub fn dip_snr(rate_counts_per_s: f64, contrast: f64, integration_time: f64) -> f64 {
    contrast * (rate_counts_per_s * integration_time).sqrt()
}
