//! Time evolution rho(t) = exp(L t)[rho0] by adaptive Dormand-Prince
//! integration of the vectorised master equation.

use nalgebra::DVector;
use num_complex::Complex64;

use super::{DensityMatrix, LindbladError, Liouvillian};

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions { rel_tol: 1e-10, abs_tol: 1e-12, max_steps: 4_000_000 }
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

pub fn evolve(
    rho0: &DensityMatrix,
    l: &Liouvillian,
    t: f64,
    opts: &EvolveOptions,
) -> Result<DensityMatrix, LindbladError> {
    assert!(t >= 0.0, "evolution time must be non-negative");
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    // integrate in dimensionless time tau = t * scale
    let scale = l.scale();
    let m = l.matrix.map(|z| z / scale);
    let tau_end = t * scale;

    let f = |y: &DVector<Complex64>| &m * y;

    let mut y = rho0.vectorise();
    let mut tau = 0.0f64;
    let mut h = (tau_end / 100.0).min(0.1).max(1e-8);
    let mut k: [DVector<Complex64>; 7] = [
        f(&y),
        DVector::zeros(y.len()),
        DVector::zeros(y.len()),
        DVector::zeros(y.len()),
        DVector::zeros(y.len()),
        DVector::zeros(y.len()),
        DVector::zeros(y.len()),
    ];
    let mut steps = 0usize;

    while tau < tau_end {
        if steps >= opts.max_steps {
            return Err(LindbladError::TooManySteps(opts.max_steps));
        }
        steps += 1;
        h = h.min(tau_end - tau);
        if h < 1e-14 * tau_end.max(1.0) {
            return Err(LindbladError::StepUnderflow { t: tau / scale, step: h / scale });
        }

        for stage in 0..6 {
            let mut arg = y.clone();
            for (j, kj) in k.iter().take(stage + 1).enumerate() {
                if A[stage][j] != 0.0 {
                    arg.axpy(Complex64::new(h * A[stage][j], 0.0), kj, Complex64::new(1.0, 0.0));
                }
            }
            k[stage + 1] = f(&arg);
        }

        let mut y5 = y.clone();
        let mut y4 = y.clone();
        for (j, kj) in k.iter().enumerate() {
            if B5[j] != 0.0 {
                y5.axpy(Complex64::new(h * B5[j], 0.0), kj, Complex64::new(1.0, 0.0));
            }
            if B4[j] != 0.0 {
                y4.axpy(Complex64::new(h * B4[j], 0.0), kj, Complex64::new(1.0, 0.0));
            }
        }

        // weighted RMS error estimate
        let mut err2 = 0.0f64;
        for i in 0..y.len() {
            let sc = opts.abs_tol + opts.rel_tol * y5[i].norm().max(y[i].norm());
            let e = (y5[i] - y4[i]).norm() / sc;
            err2 += e * e;
        }
        let err = (err2 / y.len() as f64).sqrt();

        if err <= 1.0 {
            tau += h;
            y = y5;
            // first-same-as-last
            k[0] = k[6].clone();
        } else {
            k[0] = f(&y);
        }
        let factor = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
        h *= factor.clamp(0.2, 5.0);
    }

    Ok(DensityMatrix::from_vector(&y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::hamiltonian::{Basis, BasisState};
    use crate::lindblad::{build_liouvillian, Hamiltonian, JumpOp};
    use crate::atomic::half::Half;
    use crate::atomic::LevelName;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn two_level(omega_hz: f64, gamma: f64) -> Liouvillian {
        let mut h = DMatrix::<Complex64>::zeros(2, 2);
        h[(0, 1)] = Complex64::new(omega_hz / 2.0, 0.0);
        h[(1, 0)] = Complex64::new(omega_hz / 2.0, 0.0);
        let basis = Basis {
            states: vec![
                BasisState { level: LevelName::S12, m: Half(-1) },
                BasisState { level: LevelName::P12, m: Half(-1) },
            ],
        };
        let jumps = if gamma > 0.0 {
            vec![JumpOp::lowering(2, 0, 1, gamma)]
        } else {
            vec![]
        };
        build_liouvillian(&Hamiltonian { matrix: h, basis }, &jumps).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let l = two_level(1e6, 1e7);
        let rho0 = DensityMatrix::pure(2, 1);
        let rho = evolve(&rho0, &l, 0.0, &Default::default()).unwrap();
        assert_eq!(rho, rho0);
    }

    #[test]
    fn closed_system_rabi_oscillation() {
        let omega = 1e6;
        let l = two_level(omega, 0.0);
        let rho0 = DensityMatrix::pure(2, 0);
        for frac in [0.1, 0.25, 0.5, 0.9] {
            let t = frac / omega;
            let rho = evolve(&rho0, &l, t, &Default::default()).unwrap();
            let expected = (std::f64::consts::PI * omega * t).sin().powi(2);
            assert_relative_eq!(rho.population(1), expected, epsilon = 1e-8);
            let d = rho.diagnostics();
            assert!(d.hermiticity < 1e-8 && d.trace_deviation < 1e-8);
        }
    }

    #[test]
    fn long_time_limit_matches_steady_state() {
        let l = two_level(8e6, 2e7);
        let rho_ss = crate::lindblad::steady_state(&l).unwrap();
        let rho0 = DensityMatrix::pure(2, 0);
        let rho = evolve(&rho0, &l, 30.0 / 2e7 * 10.0, &Default::default()).unwrap();
        let diff = (&rho.matrix - &rho_ss.matrix).camax();
        assert!(diff < 1e-6, "difference {diff}");
    }
}
