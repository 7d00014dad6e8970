//! Damped least-squares (Levenberg-Marquardt) fit of a Lorentzian dip with
//! analytic Jacobian.
//!
//! Model: f(x) = baseline - depth * (g/2)^2 / ((x - x0)^2 + (g/2)^2).
//!
//! With per-point sigmas the covariance is (J^T W J)^-1 and the reported
//! uncertainties are absolute; without sigmas it is scaled by the residual
//! variance.

use nalgebra::{DMatrix, DVector, Matrix4, Vector4};

use super::FitError;

#[derive(Debug, Clone, PartialEq)]
pub struct LorentzianFit {
    pub baseline: f64,
    pub depth: f64,
    pub center: f64,
    pub fwhm: f64,
    pub baseline_sigma: f64,
    pub depth_sigma: f64,
    pub center_sigma: f64,
    pub fwhm_sigma: f64,
    /// Covariance over (baseline, depth, center, fwhm).
    pub covariance: Matrix4<f64>,
    pub residual_rms: f64,
    pub converged: bool,
    pub iterations: usize,
}

pub fn model(x: f64, p: &Vector4<f64>) -> f64 {
    let (b, d, x0, g) = (p[0], p[1], p[2], p[3]);
    let a = g / 2.0;
    let u = x - x0;
    b - d * a * a / (u * u + a * a)
}

fn jacobian_row(x: f64, p: &Vector4<f64>) -> Vector4<f64> {
    let (_, d, x0, g) = (p[0], p[1], p[2], p[3]);
    let a = g / 2.0;
    let u = x - x0;
    let den = u * u + a * a;
    let l = a * a / den;
    Vector4::new(
        1.0,
        -l,
        -d * 2.0 * u * a * a / (den * den),
        -d * a * u * u / (den * den),
    )
}

/// Initial parameters from the window: baseline from the edge median, centre
/// at the minimum, width from the half-depth crossings.
pub fn initial_guess(x: &[f64], y: &[f64]) -> Vector4<f64> {
    let n = x.len();
    let edge = (n / 6).max(2).min(n / 2);
    let mut edges: Vec<f64> = y[..edge].iter().chain(y[n - edge..].iter()).copied().collect();
    edges.sort_by(f64::total_cmp);
    let baseline = edges[edges.len() / 2];
    let (imin, ymin) = y
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, &v)| (i, v))
        .expect("non-empty window");
    let depth = (baseline - ymin).max(f64::MIN_POSITIVE);
    let half = baseline - depth / 2.0;
    let mut left = x[0];
    for i in (0..imin).rev() {
        if y[i] >= half {
            left = x[i];
            break;
        }
    }
    let mut right = x[n - 1];
    for i in imin..n {
        if y[i] >= half {
            right = x[i];
            break;
        }
    }
    let grid = (x[n - 1] - x[0]) / (n - 1) as f64;
    let fwhm = (right - left).max(2.0 * grid);
    Vector4::new(baseline, depth, x[imin], fwhm)
}

pub fn fit(
    x: &[f64],
    y: &[f64],
    sigma: Option<&[f64]>,
    guess: Option<Vector4<f64>>,
) -> Result<LorentzianFit, FitError> {
    let n = x.len();
    if n < 7 {
        return Err(FitError::WindowTooSmall { points: n, min: 7 });
    }
    let weights: Vec<f64> = match sigma {
        Some(s) => s
            .iter()
            .map(|&v| if v > 0.0 { 1.0 / (v * v) } else { 1.0 })
            .collect(),
        None => vec![1.0; n],
    };

    let mut p = guess.unwrap_or_else(|| initial_guess(x, y));
    if p[3] <= 0.0 {
        p[3] = (x[n - 1] - x[0]) / 4.0;
    }

    let cost = |p: &Vector4<f64>| -> f64 {
        x.iter()
            .zip(y)
            .zip(&weights)
            .map(|((&xi, &yi), &w)| {
                let r = yi - model(xi, p);
                w * r * r
            })
            .sum()
    };

    let mut lambda = 1e-3;
    let mut current_cost = cost(&p);
    let mut converged = false;
    let mut iterations = 0;
    const MAX_ITER: usize = 200;

    while iterations < MAX_ITER {
        iterations += 1;
        // normal equations J^T W J and J^T W r
        let mut jtj = Matrix4::<f64>::zeros();
        let mut jtr = Vector4::<f64>::zeros();
        for ((&xi, &yi), &w) in x.iter().zip(y).zip(&weights) {
            let j = jacobian_row(xi, &p);
            let r = yi - model(xi, &p);
            jtj += j * j.transpose() * w;
            jtr += j * (w * r);
        }
        let mut damped = jtj;
        for k in 0..4 {
            damped[(k, k)] *= 1.0 + lambda;
            if damped[(k, k)] == 0.0 {
                return Err(FitError::SingularJacobian);
            }
        }
        let step = match damped.lu().solve(&jtr) {
            Some(s) => s,
            None => return Err(FitError::SingularJacobian),
        };
        let mut trial = p + step;
        // keep width positive
        trial[3] = trial[3].abs().max(f64::MIN_POSITIVE);
        let trial_cost = cost(&trial);
        if trial_cost <= current_cost {
            let rel_step = (0..4)
                .map(|k| (step[k] / (p[k].abs() + 1e-30)).abs())
                .fold(0.0f64, f64::max);
            let rel_cost = (current_cost - trial_cost) / current_cost.max(1e-300);
            p = trial;
            current_cost = trial_cost;
            lambda = (lambda / 3.0).max(1e-12);
            if rel_step < 1e-10 || rel_cost < 1e-13 {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }

    // covariance at the optimum
    let mut jtj = Matrix4::<f64>::zeros();
    for (&xi, &w) in x.iter().zip(&weights) {
        let j = jacobian_row(xi, &p);
        jtj += j * j.transpose() * w;
    }
    let cov_unscaled = jtj.try_inverse().ok_or(FitError::SingularJacobian)?;
    let dof = (n as f64 - 4.0).max(1.0);
    let covariance = match sigma {
        Some(_) => cov_unscaled,
        None => cov_unscaled * (current_cost / dof),
    };
    let residual_rms = {
        let ss: f64 = x
            .iter()
            .zip(y)
            .map(|(&xi, &yi)| {
                let r = yi - model(xi, &p);
                r * r
            })
            .sum();
        (ss / n as f64).sqrt()
    };

    Ok(LorentzianFit {
        baseline: p[0],
        depth: p[1],
        center: p[2],
        fwhm: p[3],
        baseline_sigma: covariance[(0, 0)].max(0.0).sqrt(),
        depth_sigma: covariance[(1, 1)].max(0.0).sqrt(),
        center_sigma: covariance[(2, 2)].max(0.0).sqrt(),
        fwhm_sigma: covariance[(3, 3)].max(0.0).sqrt(),
        covariance,
        residual_rms,
        converged,
        iterations,
    })
}

/// Dense evaluation of the fitted model, for residual inspection.
pub fn model_curve(x: &[f64], fitres: &LorentzianFit) -> DVector<f64> {
    let p = Vector4::new(fitres.baseline, fitres.depth, fitres.center, fitres.fwhm);
    DVector::from_iterator(x.len(), x.iter().map(|&xi| model(xi, &p)))
}

#[allow(dead_code)]
fn as_dmatrix(m: &Matrix4<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(4, 4, |i, j| m[(i, j)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_recovery_of_noiseless_lorentzian() {
        let truth = Vector4::new(1000.0, 250.0, 3.2e6, 45e3);
        let x: Vec<f64> = (0..400).map(|i| 3.0e6 + i as f64 * 1e3).collect();
        let y: Vec<f64> = x.iter().map(|&xi| model(xi, &truth)).collect();
        let f = fit(&x, &y, None, None).unwrap();
        assert!(f.converged);
        assert_relative_eq!(f.center, 3.2e6, max_relative = 1e-9);
        assert_relative_eq!(f.fwhm, 45e3, max_relative = 1e-6);
        assert_relative_eq!(f.baseline, 1000.0, max_relative = 1e-6);
        assert_relative_eq!(f.depth, 250.0, max_relative = 1e-6);
        assert!(f.residual_rms < 1e-6);
    }

    #[test]
    fn window_too_small() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [1.0; 6];
        assert!(matches!(
            fit(&x, &y, None, None),
            Err(FitError::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn weighted_fit_reports_absolute_uncertainties() {
        // center sigma from the covariance should match the Fisher bound
        // sigma_x0 = (sigma_N / depth) sqrt(2 gamma h / pi) at dense sampling
        let truth = Vector4::new(1e5, 2e4, 0.0, 50e3);
        let h = 1e3;
        let x: Vec<f64> = (-300..=300).map(|i| i as f64 * h).collect();
        let y: Vec<f64> = x.iter().map(|&xi| model(xi, &truth)).collect();
        let sigma = vec![300.0; x.len()];
        let f = fit(&x, &y, Some(&sigma), None).unwrap();
        let bound = 300.0 / 2e4 * (2.0 * 50e3 * h / std::f64::consts::PI).sqrt();
        assert_relative_eq!(f.center_sigma, bound, max_relative = 0.05);
    }
}
