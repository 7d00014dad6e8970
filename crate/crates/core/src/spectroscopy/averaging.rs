//! Noise averaging of a steady-state evaluator over the Doppler velocity
//! distribution and over magnetic-field fluctuations.

use thiserror::Error;

use super::quadrature;

#[derive(Debug, Error, PartialEq)]
pub enum AveragingError {
    #[error("quadrature order must be at least {min}, got {got}")]
    OrderTooSmall { min: usize, got: usize },
    #[error("Doppler average did not converge at order {order} (last change {change:.3e})")]
    NotConverged { order: usize, change: f64 },
    #[error("{quantity} must be non-negative, got {value}")]
    Negative { quantity: &'static str, value: f64 },
}

/// Distribution model for the short-term field fluctuations. The
/// measurement is quoted peak-to-peak, which naturally bounds a uniform
/// distribution; a Gaussian of matching variance is available as an option.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum FieldNoiseModel {
    Uniform,
    Gaussian,
}

/// Gauss-Hermite average of `evaluator` (a function of the 1-D velocity
/// along the common axis, m/s) over the Maxwell-Boltzmann distribution at
/// `temperature_k` for an atom of mass `mass_kg`.
///
/// `k_eff` (rad/m) is the effective wave-vector controlling the first-order
/// Doppler effect; when it vanishes (phase-matched geometry) or T = 0 the
/// average reduces exactly to the single evaluation at v = 0.
pub fn doppler_average(
    evaluator: &dyn Fn(f64) -> f64,
    temperature_k: f64,
    k_eff: f64,
    mass_kg: f64,
    order: usize,
) -> Result<f64, AveragingError> {
    if order < 3 {
        return Err(AveragingError::OrderTooSmall { min: 3, got: order });
    }
    if temperature_k < 0.0 {
        return Err(AveragingError::Negative { quantity: "temperature", value: temperature_k });
    }
    if temperature_k == 0.0 || k_eff == 0.0 {
        return Ok(evaluator(0.0));
    }
    // 1-D MB: p(v) ~ exp(-v^2 / (2 sigma_v^2)), sigma_v = sqrt(kB T / m)
    let sigma_v = (crate::constants::boltzmann() * temperature_k / mass_kg).sqrt();
    let (nodes, weights) = quadrature::gauss_hermite(order);
    let norm = std::f64::consts::PI.sqrt();
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        let v = std::f64::consts::SQRT_2 * sigma_v * x;
        acc += w * evaluator(v);
    }
    Ok(acc / norm)
}

/// Like [`doppler_average`] but doubling the order until the result changes
/// by less than `rel_tol` (relative), starting from `order`. Returns the
/// converged value and the order that achieved it.
pub fn doppler_average_adaptive(
    evaluator: &dyn Fn(f64) -> f64,
    temperature_k: f64,
    k_eff: f64,
    mass_kg: f64,
    order: usize,
    rel_tol: f64,
    max_order: usize,
) -> Result<(f64, usize), AveragingError> {
    if temperature_k <= 0.0 || k_eff == 0.0 {
        return Ok((doppler_average(evaluator, temperature_k, k_eff, mass_kg, order.max(3))?, order));
    }
    let mut order = order.max(3);
    let mut prev = doppler_average(evaluator, temperature_k, k_eff, mass_kg, order)?;
    loop {
        let next_order = order * 2;
        if next_order > max_order {
            return Err(AveragingError::NotConverged { order, change: f64::NAN });
        }
        let next = doppler_average(evaluator, temperature_k, k_eff, mass_kg, next_order)?;
        let change = if next.abs() > 0.0 { ((next - prev) / next).abs() } else { 0.0 };
        if change < rel_tol {
            return Ok((next, next_order));
        }
        prev = next;
        order = next_order;
    }
}

/// Average of `evaluator` (a function of the magnetic field, T) over the
/// field-noise distribution of peak-to-peak width `pkpk` centred on
/// `b_mean`. Uniform noise uses Gauss-Legendre nodes over the bounded
/// support; the Gaussian option matches the uniform variance pkpk^2/12.
pub fn field_noise_average(
    evaluator: &dyn Fn(f64) -> f64,
    b_mean: f64,
    pkpk: f64,
    order: usize,
    model: FieldNoiseModel,
) -> Result<f64, AveragingError> {
    if pkpk < 0.0 {
        return Err(AveragingError::Negative { quantity: "pk-pk width", value: pkpk });
    }
    if pkpk == 0.0 {
        return Ok(evaluator(b_mean));
    }
    if order < 2 {
        return Err(AveragingError::OrderTooSmall { min: 2, got: order });
    }
    match model {
        FieldNoiseModel::Uniform => {
            let (nodes, weights) = quadrature::gauss_legendre(order);
            let mut acc = 0.0;
            for (x, w) in nodes.iter().zip(&weights) {
                acc += w * evaluator(b_mean + 0.5 * pkpk * x);
            }
            // weights sum to 2 over [-1, 1]
            Ok(acc / 2.0)
        }
        FieldNoiseModel::Gaussian => {
            let sigma = pkpk / 12.0f64.sqrt();
            let (nodes, weights) = quadrature::gauss_hermite(order);
            let norm = std::f64::consts::PI.sqrt();
            let mut acc = 0.0;
            for (x, w) in nodes.iter().zip(&weights) {
                acc += w * evaluator(b_mean + std::f64::consts::SQRT_2 * sigma * x);
            }
            Ok(acc / norm)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_width_reduces_to_identity() {
        let f = |v: f64| 3.0 + v;
        assert_eq!(doppler_average(&f, 0.0, 1.0, 1e-26, 9).unwrap(), 3.0);
        assert_eq!(doppler_average(&f, 1e-3, 0.0, 1e-26, 9).unwrap(), 3.0);
        let g = |b: f64| 2.0 * b;
        assert_eq!(
            field_noise_average(&g, 1e-4, 0.0, 8, FieldNoiseModel::Uniform).unwrap(),
            2e-4
        );
    }

    #[test]
    fn linear_in_the_evaluator() {
        let f1 = |v: f64| (1e-4 * v).sin();
        let f2 = |v: f64| (2e-4 * v).cos();
        let combo = |v: f64| 2.0 * f1(v) + 3.0 * f2(v);
        let t = 10e-3;
        let m = crate::constants::mass_ca40();
        let k = 3.8e4;
        let a1 = doppler_average(&f1, t, k, m, 20).unwrap();
        let a2 = doppler_average(&f2, t, k, m, 20).unwrap();
        let ac = doppler_average(&combo, t, k, m, 20).unwrap();
        assert_relative_eq!(ac, 2.0 * a1 + 3.0 * a2, max_relative = 1e-12);
    }

    #[test]
    fn gaussian_moments_match_temperature() {
        // <v^2> = kB T / m
        let t = 10e-3;
        let m = crate::constants::mass_ca40();
        let expect = crate::constants::boltzmann() * t / m;
        let v2 = doppler_average(&|v| v * v, t, 1.0, m, 12).unwrap();
        assert_relative_eq!(v2, expect, max_relative = 1e-10);
    }

    #[test]
    fn uniform_field_average_is_centred_mean() {
        // <B> = b_mean, <(B - b_mean)^2> = pkpk^2 / 12
        let b0 = 1e-4;
        let pk = 6e-7;
        let mean = field_noise_average(&|b| b, b0, pk, 10, FieldNoiseModel::Uniform).unwrap();
        assert_relative_eq!(mean, b0, max_relative = 1e-12);
        let var =
            field_noise_average(&|b| (b - b0) * (b - b0), b0, pk, 10, FieldNoiseModel::Uniform)
                .unwrap();
        assert_relative_eq!(var, pk * pk / 12.0, max_relative = 1e-10);
        // Gaussian option matches the uniform variance by construction
        let var_g =
            field_noise_average(&|b| (b - b0) * (b - b0), b0, pk, 16, FieldNoiseModel::Gaussian)
                .unwrap();
        assert_relative_eq!(var_g, pk * pk / 12.0, max_relative = 1e-9);
    }

    #[test]
    fn adaptive_doppler_converges_against_dense_grid() {
        // Lorentzian line of width 5 kHz against a 10^4-point dense
        // integration oracle
        let gamma = 5e3;
        let center_slope = 6.07e3; // Hz per m/s
        let line = move |v: f64| {
            let x = center_slope * v;
            1.0 - 0.5 * (gamma / 2.0) * (gamma / 2.0) / (x * x + (gamma / 2.0) * (gamma / 2.0))
        };
        let t = 10e-3;
        let m = crate::constants::mass_ca40();
        let k = 2.0 * std::f64::consts::PI * center_slope;
        let (gh, order) =
            doppler_average_adaptive(&line, t, k, m, 5, 1e-4, 2048).unwrap();
        assert!(order <= 2048);

        // dense-grid oracle
        let sigma_v = (crate::constants::boltzmann() * t / m).sqrt();
        let n = 10_000;
        let vmax = 8.0 * sigma_v;
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            let v = -vmax + 2.0 * vmax * (i as f64 + 0.5) / n as f64;
            let w = (-v * v / (2.0 * sigma_v * sigma_v)).exp();
            num += w * line(v);
            den += w;
        }
        let dense = num / den;
        assert_relative_eq!(gh, dense, max_relative = 2e-4);
    }
}
